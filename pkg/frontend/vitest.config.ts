import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "node",
    include: ["test/**/*.test.ts"],
    // roundtrip drives a live service; simulation runs need headroom
    testTimeout: 180_000,
    hookTimeout: 120_000,
  },
});
