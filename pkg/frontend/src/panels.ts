/** The three panels and the footer, rendered to HTML strings from state.

Numbers in table cells are printed with String(): no rounding, no locale
formatting, so a cell always shows the value the API returned. Interactive
elements carry data-action attributes; the browser bootstrap delegates
events by those names.
*/

import type { AppController } from "./app.js";
import {
  bandChart,
  costBars,
  densityHistogram,
  escapeXml,
  survivalOverlay,
} from "./charts.js";
import { strategiesQuery } from "./form.js";
import { PRESET_TRANSFORMS } from "./presets.js";
import { CAREGIVER_TYPES, type ReportRow } from "./types.js";
import { PRESET_SCENARIO_NAMES } from "./validate.js";

const esc = escapeXml;

function fieldError(controller: AppController, key: string): string {
  const message = controller.state.formErrors[key];
  return message ? `<span class="field-error" data-error="${esc(key)}">${esc(message)}</span>` : "";
}

function numberInput(
  controller: AppController,
  field: string,
  label: string,
  value: number | null,
  step = "1",
): string {
  return (
    `<label class="field">${esc(label)}` +
    `<input type="number" step="${step}" data-field="${esc(field)}" value="${value ?? ""}"/>` +
    fieldError(controller, field) +
    `</label>`
  );
}

function describeTransform(t: { type: string } & Record<string, unknown>): string {
  if (t.type === "adl_band_mix") {
    const band = t.band as [number, number];
    return `ADL mix shift: band ${band[0]}-${band[1]} weight ${t.band_weight}, mean x${t.mean_scale}`;
  }
  if (t.type === "therapy_fraction_scale") {
    return `therapy fractions x${t.factor}`;
  }
  return t.type;
}

// -- input panel -------------------------------------------------------------

function scenarioBlock(controller: AppController): string {
  const scenario = controller.state.form.scenario;
  const presetButtons = PRESET_SCENARIO_NAMES.map((name) => {
    const active = scenario.mode === "preset" && scenario.presetName === name;
    return (
      `<button type="button" data-action="preset" data-name="${name}"` +
      ` class="${active ? "preset active" : "preset"}">${name}</button>`
    );
  }).join("");

  let transformItems: string;
  if (scenario.mode === "preset") {
    const transforms = PRESET_TRANSFORMS[scenario.presetName] ?? [];
    transformItems = transforms.length
      ? `<ul class="transforms">${transforms
          .map((t) => `<li>${esc(describeTransform(t as never))}</li>`)
          .join("")}</ul>`
      : `<p class="hint">no transforms: shipped baseline mix</p>`;
  } else {
    const rows = scenario.transforms
      .map((t, i) => {
        const fields =
          t.type === "adl_band_mix"
            ? `band <input type="number" class="narrow" data-transform="${i}:band_lo" value="${t.band[0]}"/>` +
              `-<input type="number" class="narrow" data-transform="${i}:band_hi" value="${t.band[1]}"/> ` +
              `weight <input type="number" step="0.05" class="narrow" data-transform="${i}:band_weight" value="${t.band_weight}"/> ` +
              `mean x<input type="number" step="0.05" class="narrow" data-transform="${i}:mean_scale" value="${t.mean_scale}"/>`
            : `factor <input type="number" step="0.05" class="narrow" data-transform="${i}:factor" value="${t.factor}"/>`;
        return (
          `<li>${esc(t.type)}: ${fields} ` +
          `<button type="button" data-action="remove-transform" data-index="${i}">remove</button>` +
          fieldError(controller, `scenario.transforms.${i}`) +
          `</li>`
        );
      })
      .join("");
    transformItems =
      `<ul class="transforms">${rows}</ul>` +
      `<div class="transform-add">` +
      `<button type="button" data-action="add-transform" data-kind="adl_band_mix">+ ADL mix shift</button>` +
      `<button type="button" data-action="add-transform" data-kind="therapy_fraction_scale">+ therapy scale</button>` +
      `</div>`;
  }

  const customBlock =
    scenario.mode === "custom"
      ? `<label class="field">scenario name` +
        `<input type="text" data-field="scenario.customName" value="${esc(scenario.customName)}"/>` +
        `</label>` +
        `<button type="button" data-action="save-scenario">save scenario</button>` +
        (controller.state.scenarioSaved
          ? `<span class="saved-note">saved '${esc(controller.state.scenarioSaved)}'</span>`
          : "")
      : "";

  return (
    `<fieldset><legend>census scenario</legend>` +
    `<div class="preset-row">${presetButtons}` +
    `<button type="button" data-action="scenario-mode" data-mode="${
      scenario.mode === "custom" ? "preset" : "custom"
    }" class="${scenario.mode === "custom" ? "preset active" : "preset"}">custom</button></div>` +
    transformItems +
    customBlock +
    fieldError(controller, "scenario") +
    `</fieldset>`
  );
}

function arrivalBlock(controller: AppController): string {
  const arrival = controller.state.form.arrival;
  const fitted = controller.state.fitArrivals;
  const fittedNote = fitted
    ? `<p class="hint">fitted: mean ${fitted.mean_per_day}/day` +
      (fitted.gof ? `, GOF p=${fitted.gof.p_value}` : "") +
      `</p>`
    : "";
  const params =
    arrival.family === "negbinom"
      ? numberInput(controller, "arrival.r", "r", arrival.r, "0.01") +
        numberInput(controller, "arrival.p", "p", arrival.p, "0.01")
      : numberInput(controller, "arrival.lam", "lambda", arrival.lam, "0.01");
  return (
    `<fieldset><legend>daily admissions</legend>` +
    `<label class="field">family<select data-field="arrival.family">` +
    `<option value="negbinom"${arrival.family === "negbinom" ? " selected" : ""}>negative binomial</option>` +
    `<option value="poisson"${arrival.family === "poisson" ? " selected" : ""}>poisson</option>` +
    `</select></label>` +
    params +
    `<label class="field">fit from counts file` +
    `<input type="file" data-upload="counts" accept=".txt,.csv"/></label>` +
    (controller.state.fitArrivalsError
      ? `<span class="field-error">${esc(controller.state.fitArrivalsError)}</span>`
      : "") +
    fittedNote +
    `</fieldset>`
  );
}

function losBlock(controller: AppController): string {
  const { form, fitLos, fitLosError } = controller.state;
  const rows = form.dispositions
    .map(
      (d, i) =>
        `<tr><td>${esc(d.label)}</td>` +
        `<td><input type="number" step="0.01" data-field="los.${i}.eta" value="${d.eta}"/></td>` +
        `<td><input type="number" step="0.01" data-field="los.${i}.sigma" value="${d.sigma}"/></td></tr>` +
        (controller.state.formErrors[`los_model.${i}`]
          ? `<tr><td colspan="3">${fieldError(controller, `los_model.${i}`)}</td></tr>`
          : ""),
    )
    .join("");
  const fitNote = fitLos
    ? `<p class="hint">fitted from upload: ${fitLos.n_observations} stays ` +
      `(${fitLos.n_censored} censored), ${fitLos.converged ? "converged" : "did not converge"} ` +
      `in ${fitLos.iterations} iterations</p>`
    : "";
  return (
    `<fieldset><legend>stay model (${form.losSource})</legend>` +
    `<table class="mini"><thead><tr><th>disposition</th><th>eta</th><th>sigma</th></tr></thead>` +
    `<tbody>${rows}</tbody></table>` +
    `<label class="field">fit from resident CSV` +
    `<input type="file" data-upload="residents" accept=".csv"/></label>` +
    (fitLosError ? `<span class="field-error" data-error="csv">${esc(fitLosError)}</span>` : "") +
    fitNote +
    fieldError(controller, "los_model") +
    `</fieldset>`
  );
}

function submitBlock(controller: AppController): string {
  const submit = controller.state.submit;
  const blocked =
    Object.keys(controller.state.formErrors).length > 0 ||
    submit.phase === "submitting" ||
    submit.phase === "polling";
  let status = "";
  if (submit.phase === "submitting") {
    status = `<p class="status">submitting…</p>`;
  } else if (submit.phase === "polling") {
    status = `<p class="status">run ${esc(submit.runId)}: ${esc(submit.status)}…</p>`;
  } else if (submit.phase === "error") {
    status =
      `<p class="status error">${esc(submit.message)}</p>` +
      (submit.canRetry ? `<button type="button" data-action="retry">retry</button>` : "");
  }
  return (
    `<div class="submit-row">` +
    `<button type="button" data-action="submit"${blocked ? " disabled" : ""}>run simulation</button>` +
    status +
    `</div>`
  );
}

export function renderInputPanel(controller: AppController): string {
  const form = controller.state.form;
  return (
    `<section class="panel" id="input-panel"><h2>input settings</h2>` +
    `<fieldset><legend>simulation</legend>` +
    numberInput(controller, "horizon_days", "horizon (days)", form.horizonDays) +
    numberInput(controller, "warmup_days", "warmup (days)", form.warmupDays) +
    numberInput(controller, "replications", "replications", form.replications) +
    numberInput(controller, "master_seed", "master seed", form.masterSeed) +
    `</fieldset>` +
    arrivalBlock(controller) +
    losBlock(controller) +
    scenarioBlock(controller) +
    `<fieldset><legend>strategies</legend>` +
    `<label class="field">TYPE:RATIO list` +
    `<input type="text" data-field="strategies" value="${esc(strategiesQuery(form.strategies))}"/>` +
    `</label>` +
    fieldError(controller, "strategies") +
    form.strategies.map((_, i) => fieldError(controller, `strategies.${i}`)).join("") +
    `</fieldset>` +
    submitBlock(controller) +
    `</section>`
  );
}

// -- visualization panel -------------------------------------------------------

export function renderVizPanel(controller: AppController): string {
  const { view, runs, submit, validation } = controller.state;
  const doneRuns = runs.filter((r) => r.status === "done");
  const options = doneRuns
    .map(
      (r) =>
        `<option value="${esc(r.run_id)}"${r.run_id === view.selectedRunId ? " selected" : ""}>` +
        `${esc(r.run_id)} (${esc(r.created_at)})</option>`,
    )
    .join("");
  const selector =
    `<label class="field">finished run` +
    `<select data-action="select-run"><option value="">choose…</option>${options}</select></label>`;

  const bandToggle = (["ci", "percentile"] as const)
    .map(
      (band) =>
        `<button type="button" data-action="band" data-band="${band}" ` +
        `class="${view.bandType === band ? "toggle active" : "toggle"}">${band}</button>`,
    )
    .join("");
  const typeToggle = CAREGIVER_TYPES.map(
    (t) =>
      `<button type="button" data-action="ctype" data-ctype="${t}" ` +
      `class="${view.caregiverType === t ? "toggle active" : "toggle"}">${t}</button>`,
  ).join("");

  let charts = "";
  const daily = controller.selectedDaily();
  if (submit.phase === "polling") {
    charts = `<p class="status">run ${esc(submit.runId)} is ${esc(submit.status)}; charts appear when it finishes.</p>`;
  } else if (daily) {
    const demand = daily.demand[view.caregiverType];
    charts =
      `<figure data-chart="census">${bandChart({
        days: daily.days,
        band: daily.census,
        title: `resident census (${daily.band} band)`,
      })}</figure>` +
      (demand
        ? `<figure data-chart="demand">${bandChart({
            days: daily.days,
            band: demand,
            title: `${view.caregiverType} demand, min/day (${daily.band} band)`,
          })}</figure>`
        : "");
  } else {
    charts = `<p class="hint">select a finished run to see census and demand.</p>`;
  }

  let comparison = "";
  if (validation) {
    comparison =
      `<figure data-chart="km-overlay">${survivalOverlay({
        times: validation.overlay.times,
        observed: validation.overlay.observed,
        simulated: validation.overlay.simulated,
        maxGap: validation.overlay.max_gap,
        title: "stay survival: observed vs simulated",
      })}</figure>` +
      `<figure data-chart="los-histogram">${densityHistogram({
        binEdges: validation.histogram.bin_edges,
        observedDensity: validation.histogram.observed_density,
        simulatedDensity: validation.histogram.simulated_density,
        title: "stay length density",
      })}</figure>` +
      `<p class="hint" data-note="ks">KS D=${validation.ks.statistic} p=${validation.ks.p_value} ` +
      `(${validation.ks.n_observed} observed vs ${validation.ks.n_simulated} simulated stays)</p>`;
  } else if (daily) {
    comparison = `<p class="hint">upload observed stays to overlay survival curves.</p>`;
  }

  return (
    `<section class="panel" id="viz-panel"><h2>visualization</h2>` +
    selector +
    `<div class="toggle-row">band: ${bandToggle} type: ${typeToggle}</div>` +
    charts +
    `<label class="field">observed stays CSV` +
    `<input type="file" data-upload="observed" accept=".csv"/></label>` +
    comparison +
    `</section>`
  );
}

// -- evaluation panel ---------------------------------------------------------

const REPORT_COLUMNS: { key: keyof ReportRow; heading: string }[] = [
  { key: "label", heading: "strategy" },
  { key: "caregiver_type", heading: "type" },
  { key: "residents_per_staff", heading: "residents/staff" },
  { key: "total_cost_mean", heading: "total cost" },
  { key: "total_cost_ci_lower", heading: "CI lower" },
  { key: "total_cost_ci_upper", heading: "CI upper" },
  { key: "planned_cost_mean", heading: "planned" },
  { key: "understaffing_cost_mean", heading: "understaffing" },
  { key: "avg_daily_overstaffing_min", heading: "over min/day" },
  { key: "avg_daily_understaffing_min", heading: "under min/day" },
];

/** Cell text for one report row, column order fixed; String() only. */
export function rowCells(row: ReportRow): string[] {
  return REPORT_COLUMNS.map(({ key }) => String(row[key]));
}

export function renderEvalPanel(controller: AppController): string {
  const { view, evaluation } = controller.state;
  const ready = view.selectedRunId !== null;
  const { kMin, kMax } = controller.state.sweepRange;
  const controls =
    `<div class="eval-controls">` +
    `<button type="button" data-action="evaluate"${ready ? "" : " disabled"}>evaluate strategies</button>` +
    `<label class="field inline">sweep k` +
    `<input type="number" data-field="sweep.kMin" value="${kMin}" class="narrow"/>..` +
    `<input type="number" data-field="sweep.kMax" value="${kMax}" class="narrow"/>` +
    `</label>` +
    `<button type="button" data-action="sweep"${ready ? "" : " disabled"}>sweep ${esc(
      view.caregiverType,
    )} ratios</button>` +
    `</div>`;

  if (!evaluation) {
    return (
      `<section class="panel" id="eval-panel"><h2>evaluation output</h2>` +
      controls +
      `<p class="hint">evaluate a finished run to compare staffing strategies.</p>` +
      `</section>`
    );
  }

  const rows = controller.displayedRows();
  const header = REPORT_COLUMNS.map((c) => `<th>${esc(c.heading)}</th>`).join("");
  const body = rows
    .map((row) => {
      const cls = row.label === evaluation.suggestedLabel ? ` class="suggested"` : "";
      const cells = rowCells(row)
        .map((cell) => `<td>${esc(cell)}</td>`)
        .join("");
      return `<tr${cls} data-row="${esc(row.label)}">${cells}</tr>`;
    })
    .join("");

  return (
    `<section class="panel" id="eval-panel"><h2>evaluation output</h2>` +
    controls +
    `<table class="report" data-config-hash="${esc(evaluation.report.config_hash)}">` +
    `<thead><tr>${header}</tr></thead><tbody>${body}</tbody></table>` +
    `<figure data-chart="cost-bars">${costBars(rows, evaluation.suggestedLabel)}</figure>` +
    (evaluation.suggestedLabel
      ? `<p class="hint" data-note="suggested">suggested: ${esc(evaluation.suggestedLabel)}</p>`
      : "") +
    `</section>`
  );
}

// -- footer ---------------------------------------------------------------------

export function renderFooter(controller: AppController): string {
  const info = controller.footerInfo();
  const version = controller.state.apiVersion;
  const trace = info
    ? `run <code data-trace="run-id">${esc(info.runId)}</code> · ` +
      `config <code data-trace="config-hash">${esc(info.configHash)}</code>`
    : "no run selected";
  return (
    `<footer id="trace-footer">${trace}` +
    (version ? ` · service ${esc(version)}` : "") +
    `</footer>`
  );
}

export function renderApp(controller: AppController): string {
  const banner = controller.state.banner;
  return (
    (banner
      ? `<div class="banner error">${esc(banner.message)}` +
        (banner.errorId ? ` <code>${esc(banner.errorId)}</code>` : "") +
        `</div>`
      : "") +
    `<main class="panels">` +
    renderInputPanel(controller) +
    renderVizPanel(controller) +
    renderEvalPanel(controller) +
    `</main>` +
    renderFooter(controller)
  );
}
