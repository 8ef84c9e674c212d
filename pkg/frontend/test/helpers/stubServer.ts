import { createServer, type IncomingMessage, type Server } from "node:http";
import type { AddressInfo } from "node:net";

export interface StubResponse {
  status: number;
  body: string;
  delayMs?: number;
}

type Handler = (req: IncomingMessage, body: string) => StubResponse;

function asResponse(value: StubResponse | object | string, status: number): StubResponse {
  if (typeof value === "string") return { status, body: value };
  if (typeof value === "object" && value !== null && "body" in value && "status" in value) {
    return value as StubResponse;
  }
  return { status, body: JSON.stringify(value) };
}

/**
 * Minimal programmable HTTP stub for exercising the client without the real
 * service. Routes are keyed by "METHOD /path?query" (exact match). Each hit
 * is counted so tests can assert on request dedup and cache behaviour.
 */
export class StubServer {
  private server: Server | null = null;
  private handlers = new Map<string, Handler>();
  readonly hits = new Map<string, number>();

  route(method: string, path: string, value: object | string, status = 200): void {
    this.handlers.set(`${method} ${path}`, () => asResponse(value, status));
  }

  routeFn(method: string, path: string, fn: Handler): void {
    this.handlers.set(`${method} ${path}`, fn);
  }

  hitCount(method: string, path: string): number {
    return this.hits.get(`${method} ${path}`) ?? 0;
  }

  async start(): Promise<string> {
    this.server = createServer((req, res) => {
      const chunks: Buffer[] = [];
      req.on("data", (c: Buffer) => chunks.push(c));
      req.on("end", () => {
        const key = `${req.method} ${req.url}`;
        this.hits.set(key, (this.hits.get(key) ?? 0) + 1);
        const handler = this.handlers.get(key);
        if (!handler) {
          res.writeHead(404, { "content-type": "application/json" });
          res.end(JSON.stringify({ error: { message: `no stub for ${key}` } }));
          return;
        }
        const out = handler(req, Buffer.concat(chunks).toString("utf8"));
        const write = () => {
          res.writeHead(out.status, { "content-type": "application/json" });
          res.end(out.body);
        };
        if (out.delayMs) setTimeout(write, out.delayMs);
        else write();
      });
    });
    await new Promise<void>((resolve) => this.server!.listen(0, "127.0.0.1", resolve));
    const addr = this.server!.address() as AddressInfo;
    return `http://127.0.0.1:${addr.port}`;
  }

  async stop(): Promise<void> {
    if (!this.server) return;
    await new Promise<void>((resolve, reject) =>
      this.server!.close((err) => (err ? reject(err) : resolve())),
    );
    this.server = null;
  }
}
