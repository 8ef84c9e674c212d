/** Browser bootstrap: mounts the controller onto #app, delegates events by
data-action/data-field attributes, and drives the 1-second poll loop.

All logic lives in the controller and the render modules; this file only
moves DOM events in and HTML strings out. Form state commits on change
events, so re-rendering does not fight the user's typing.
*/

import { ApiClient } from "./api.js";
import { AppController, POLL_INTERVAL_MS } from "./app.js";
import { renderApp } from "./panels.js";

function numeric(value: string): number {
  return value === "" ? Number.NaN : Number(value);
}

function handleField(controller: AppController, field: string, value: string): void {
  const form = controller.state.form;
  switch (field) {
    case "horizon_days":
      controller.setForm({ horizonDays: numeric(value) });
      return;
    case "warmup_days":
      controller.setForm({ warmupDays: numeric(value) });
      return;
    case "replications":
      controller.setForm({ replications: numeric(value) });
      return;
    case "master_seed":
      controller.setForm({ masterSeed: numeric(value) });
      return;
    case "arrival.family":
      controller.setForm({
        arrival:
          value === "poisson"
            ? { family: "poisson", r: null, p: null, lam: form.arrival.lam ?? 3 }
            : { family: "negbinom", r: form.arrival.r ?? 4.95, p: form.arrival.p ?? 0.64, lam: null },
      });
      return;
    case "arrival.r":
      controller.setForm({ arrival: { ...form.arrival, r: numeric(value) } });
      return;
    case "arrival.p":
      controller.setForm({ arrival: { ...form.arrival, p: numeric(value) } });
      return;
    case "arrival.lam":
      controller.setForm({ arrival: { ...form.arrival, lam: numeric(value) } });
      return;
    case "scenario.customName":
      controller.setForm({ scenario: { ...form.scenario, customName: value } });
      return;
    case "strategies":
      controller.setStrategiesText(value);
      return;
    case "sweep.kMin":
      controller.setSweepRange(numeric(value), controller.state.sweepRange.kMax);
      return;
    case "sweep.kMax":
      controller.setSweepRange(controller.state.sweepRange.kMin, numeric(value));
      return;
    default:
      break;
  }
  const los = /^los\.(\d+)\.(eta|sigma)$/.exec(field);
  if (los) {
    const dispositions = form.dispositions.map((d) => ({ ...d }));
    const target = dispositions[Number(los[1])];
    if (target) {
      if (los[2] === "eta") target.eta = numeric(value);
      else target.sigma = numeric(value);
      controller.setForm({ dispositions, losSource: "manual" });
    }
  }
}

function readUpload(input: HTMLInputElement, consume: (text: string) => void): void {
  const file = input.files?.[0];
  if (!file) return;
  const reader = new FileReader();
  reader.onload = () => consume(String(reader.result ?? ""));
  reader.readAsText(file);
}

export function mount(root: HTMLElement, apiBase = ""): AppController {
  const api = new ApiClient(apiBase);
  const controller = new AppController(api, () => {
    root.innerHTML = renderApp(controller);
  });

  root.addEventListener("click", (event) => {
    const target = (event.target as HTMLElement).closest<HTMLElement>("[data-action]");
    if (!target || target.hasAttribute("disabled")) return;
    switch (target.dataset.action) {
      case "preset":
        controller.applyPresetByName(target.dataset.name ?? "baseline");
        break;
      case "scenario-mode":
        controller.setScenarioMode(target.dataset.mode === "custom" ? "custom" : "preset");
        break;
      case "add-transform":
        controller.addTransform(
          target.dataset.kind === "therapy_fraction_scale"
            ? "therapy_fraction_scale"
            : "adl_band_mix",
        );
        break;
      case "remove-transform":
        controller.removeTransform(Number(target.dataset.index));
        break;
      case "save-scenario":
        void controller.saveScenario();
        break;
      case "submit":
      case "retry":
        void controller.submit();
        break;
      case "band":
        void controller.setBand(target.dataset.band === "percentile" ? "percentile" : "ci");
        break;
      case "ctype":
        controller.setCaregiverType((target.dataset.ctype ?? "CNA") as never);
        break;
      case "evaluate":
        void controller.fetchReport();
        break;
      case "sweep":
        void controller.runSweep();
        break;
      default:
        break;
    }
  });

  root.addEventListener("change", (event) => {
    const element = event.target as HTMLElement;
    if (element instanceof HTMLSelectElement && element.dataset.action === "select-run") {
      if (element.value) void controller.selectRun(element.value);
      return;
    }
    if (element instanceof HTMLInputElement && element.dataset.upload) {
      const kind = element.dataset.upload;
      readUpload(element, (text) => {
        if (kind === "residents") void controller.uploadResidents(text);
        else if (kind === "counts") void controller.uploadCounts(text);
        else if (kind === "observed") void controller.uploadObserved(text);
      });
      return;
    }
    if (
      (element instanceof HTMLInputElement || element instanceof HTMLSelectElement) &&
      element.dataset.transform
    ) {
      const [index, key] = element.dataset.transform.split(":");
      controller.setTransformField(Number(index), key, Number(element.value));
      return;
    }
    if (
      (element instanceof HTMLInputElement || element instanceof HTMLSelectElement) &&
      element.dataset.field
    ) {
      handleField(controller, element.dataset.field, element.value);
    }
  });

  window.setInterval(() => {
    void controller.pollTick();
  }, POLL_INTERVAL_MS);

  void controller.init();
  return controller;
}

declare global {
  interface Window {
    CAREFLOW_API?: string;
  }
}

const appRoot = typeof document !== "undefined" ? document.getElementById("app") : null;
if (appRoot) {
  const params = new URLSearchParams(window.location.search);
  mount(appRoot, params.get("api") ?? window.CAREFLOW_API ?? "");
}
