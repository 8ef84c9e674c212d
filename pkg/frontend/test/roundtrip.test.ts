/** End-to-end round trip against the live service.
 *
 * Drives the controller exactly as the browser would: submit the S1 preset,
 * poll to completion, chart the census, fetch the evaluation table, sweep.
 * Asserts the three display contracts: the plotted mean census lies within
 * the API-reported band, the evaluation table's source equals the report
 * endpoint's response byte-for-byte, and the sweep appends a row that is
 * cost-minimal among the displayed strategies.
 */
import { afterAll, beforeAll, describe, expect, it } from "vitest";
import { ApiClient } from "../src/api.js";
import { AppController } from "../src/app.js";
import { CHART_HEIGHT, CHART_WIDTH, linearScale } from "../src/charts.js";
import { PRESET_SCENARIOS } from "../src/presetData.js";
import { renderEvalPanel, renderFooter, renderVizPanel, rowCells } from "../src/panels.js";
import type { ReportResponse } from "../src/types.js";
import { fixtureText } from "./helpers/fixtures.js";
import { startRealServer, type RealServer } from "./helpers/realServer.js";

let server: RealServer;

beforeAll(async () => {
  server = await startRealServer();
});

afterAll(async () => {
  await server.stop();
});

const sleep = (ms: number) => new Promise((resolve) => setTimeout(resolve, ms));

describe("live service", () => {
  it("ships scenario presets identical to what the service serves", async () => {
    const controller = new AppController(new ApiClient(server.base));
    await controller.init();
    expect(controller.state.banner).toBeNull();
    const served = controller.state.scenarios.filter((s) => s.source === "preset");
    expect(served).toEqual(PRESET_SCENARIOS);
  });

  it("round trip: S1 submit, census in band, byte-exact table, cost-minimal sweep row", async () => {
    const controller = new AppController(new ApiClient(server.base));
    await controller.init();

    // -- submit the S1 preset with a small but non-trivial horizon ----------
    controller.applyPresetByName("S1");
    controller.setForm({
      horizonDays: 40,
      warmupDays: 10,
      replications: 3,
      masterSeed: 910,
      strategies: [
        { caregiverType: "CNA", residentsPerStaff: 6 },
        { caregiverType: "CNA", residentsPerStaff: 39 },
      ],
    });
    expect(controller.state.formErrors).toEqual({});

    const runId = await controller.submit();
    expect(runId).not.toBeNull();
    expect(controller.state.submit).toMatchObject({ phase: "polling" });
    const configHash = controller.state.submitConfigHash!;
    expect(configHash).toMatch(/^[0-9a-f]{64}$/);

    // -- poll to completion as the 1s browser loop would --------------------
    const deadline = Date.now() + 150_000;
    while (controller.polling && Date.now() < deadline) {
      await controller.pollTick();
      if (controller.polling) await sleep(250);
    }
    expect(controller.state.submit).toEqual({ phase: "idle" });
    expect(controller.state.view.selectedRunId).toBe(runId);

    // -- visualization: mean census lies within the API-reported band -------
    const daily = controller.selectedDaily();
    expect(daily).not.toBeNull();
    expect(daily!.config_hash).toBe(configHash);
    expect(daily!.days.length).toBe(30); // horizon minus warmup
    for (let i = 0; i < daily!.days.length; i++) {
      expect(daily!.census.lower[i]).toBeLessThanOrEqual(daily!.census.mean[i]);
      expect(daily!.census.mean[i]).toBeLessThanOrEqual(daily!.census.upper[i]);
    }

    // the chart plots exactly the API's mean series: check the first point
    const vizHtml = renderVizPanel(controller);
    expect(vizHtml).toContain(`data-chart="census"`);
    const days = daily!.days;
    const x = linearScale(days[0], days[days.length - 1], 48, CHART_WIDTH - 12);
    const yMax = Math.max(1, ...daily!.census.upper) * 1.05;
    const y = linearScale(0, yMax, CHART_HEIGHT - 28, 22);
    const firstMeanPoint = `${x(days[0]).toFixed(2)},${y(daily!.census.mean[0]).toFixed(2)}`;
    expect(vizHtml).toContain(firstMeanPoint);

    // -- evaluation table equals the report endpoint byte-for-byte ----------
    await controller.fetchReport();
    const evaluation = controller.state.evaluation;
    expect(evaluation).not.toBeNull();

    const query = new URLSearchParams({ strategies: "CNA:6,CNA:39" }).toString();
    const independent = await fetch(`${server.base}/api/runs/${runId}/report?${query}`);
    const independentBytes = await independent.text();
    expect(evaluation!.raw).toBe(independentBytes);

    const parsed = JSON.parse(independentBytes) as ReportResponse;
    expect(parsed.config_hash).toBe(configHash);
    const evalHtml = renderEvalPanel(controller);
    for (const row of parsed.rows) {
      for (const cell of rowCells(row)) {
        expect(evalHtml).toContain(`<td>${cell}</td>`);
      }
    }
    expect(evalHtml).toContain(`data-config-hash="${configHash}"`);

    // -- sweep appends a row that is cost-minimal among displayed rows ------
    await controller.runSweep(5, 40);
    const rows = controller.displayedRows();
    expect(rows.length).toBe(3); // the suggestion was appended
    const suggestedLabel = controller.state.evaluation!.suggestedLabel;
    expect(suggestedLabel).not.toBeNull();
    const suggested = rows.find((r) => r.label === suggestedLabel)!;
    const minTotal = Math.min(...rows.map((r) => r.total_cost_mean));
    expect(suggested.total_cost_mean).toBe(minTotal);

    const sweptHtml = renderEvalPanel(controller);
    expect(sweptHtml).toContain(`<tr class="suggested" data-row="${suggestedLabel}">`);

    // -- observed stays overlay straight from the validation endpoint -------
    await controller.uploadObserved(fixtureText("observed.csv"));
    expect(controller.state.validation).not.toBeNull();
    expect(controller.state.validation!.ks.n_observed).toBeGreaterThan(0);
    const overlayHtml = renderVizPanel(controller);
    expect(overlayHtml).toContain(`data-chart="km-overlay"`);
    expect(overlayHtml).toContain(`data-chart="los-histogram"`);
    expect(overlayHtml).toContain(`data-note="ks"`);

    // -- every panel traces back to run_id + config hash in the footer ------
    const footer = renderFooter(controller);
    expect(footer).toContain(`<code data-trace="run-id">${runId}</code>`);
    expect(footer).toContain(`<code data-trace="config-hash">${configHash}</code>`);
  });
});
