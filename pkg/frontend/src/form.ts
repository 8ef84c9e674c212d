/** The input panel's form model and its translation to a run config.

The form captures everything a run needs: horizon and replication counts,
the arrival process, stay-model parameters (typed in or filled from a
fitted upload), the census scenario (a shipped preset or baseline plus
declarative transforms), the strategy list, and optional wage overrides.
Submission happens only after client-side validation passes.
*/

import type { CaregiverType, FittedDisposition } from "./types.js";

export interface ArrivalForm {
  family: "negbinom" | "poisson";
  r: number | null;
  p: number | null;
  lam: number | null;
}

export interface AdlBandMixTransform {
  type: "adl_band_mix";
  band: [number, number];
  band_weight: number;
  mean_scale: number;
}

export interface TherapyFractionTransform {
  type: "therapy_fraction_scale";
  factor: number;
}

export type ScenarioTransform = AdlBandMixTransform | TherapyFractionTransform;

export interface ScenarioSelection {
  /** "preset" submits the name; "custom" submits baseline + transforms. */
  mode: "preset" | "custom";
  presetName: string;
  customName: string;
  transforms: ScenarioTransform[];
}

export interface StrategyInput {
  caregiverType: CaregiverType;
  residentsPerStaff: number;
}

export interface CostOverride {
  caregiverType: CaregiverType;
  regularWagePerMin: number;
  tempWagePerMin: number;
  staffDayMinutes: number;
}

export interface ScenarioForm {
  horizonDays: number;
  warmupDays: number;
  replications: number;
  masterSeed: number;
  arrival: ArrivalForm;
  losSource: "manual" | "fitted";
  dispositions: FittedDisposition[];
  scenario: ScenarioSelection;
  strategies: StrategyInput[];
  /** Empty means: let the server apply its default wage table. */
  costOverrides: CostOverride[];
}

export function defaultForm(): ScenarioForm {
  return {
    horizonDays: 365,
    warmupDays: 90,
    replications: 20,
    masterSeed: 20230817,
    arrival: { family: "negbinom", r: 4.95, p: 0.64, lam: null },
    losSource: "manual",
    dispositions: [
      { index: 1, label: "community", eta: 3.41, sigma: 0.94 },
      { index: 2, label: "hospital", eta: 4.52, sigma: 1.58 },
    ],
    scenario: { mode: "preset", presetName: "baseline", customName: "", transforms: [] },
    strategies: [
      { caregiverType: "CNA", residentsPerStaff: 20 },
      { caregiverType: "CNA", residentsPerStaff: 10 },
    ],
    costOverrides: [],
  };
}

function arrivalPayload(arrival: ArrivalForm): Record<string, unknown> {
  if (arrival.family === "negbinom") {
    return { family: "negbinom", r: arrival.r, p: arrival.p };
  }
  return { family: "poisson", lam: arrival.lam };
}

function scenarioPayload(scenario: ScenarioSelection): unknown {
  if (scenario.mode === "preset") {
    return scenario.presetName;
  }
  return {
    name: scenario.customName,
    base: { $include: "scenario_baseline.json" },
    transforms: scenario.transforms,
  };
}

/** Server-shaped run config. Rules and staff-time tables are not edited in
the panel, so the shipped defaults are always requested. */
export function toRunConfig(form: ScenarioForm): Record<string, unknown> {
  return {
    schema_version: 1,
    horizon_days: form.horizonDays,
    warmup_days: form.warmupDays,
    replications: form.replications,
    master_seed: form.masterSeed,
    arrival: arrivalPayload(form.arrival),
    los_model: {
      dispositions: form.dispositions.map((d) => ({
        index: d.index,
        label: d.label,
        eta: d.eta,
        sigma: d.sigma,
      })),
    },
    scenario: scenarioPayload(form.scenario),
    rules: "default",
    staff_table: "default",
  };
}

/** "CNA:20,CNA:10" for the report endpoint's strategies query. */
export function strategiesQuery(strategies: StrategyInput[]): string {
  return strategies.map((s) => `${s.caregiverType}:${s.residentsPerStaff}`).join(",");
}

/** "CNA:0.35:0.525:480" wage-override query; empty string when the form
left wages to the server default. */
export function costQuery(overrides: CostOverride[]): string {
  return overrides
    .map(
      (c) =>
        `${c.caregiverType}:${c.regularWagePerMin}:${c.tempWagePerMin}:${c.staffDayMinutes}`,
    )
    .join(",");
}

/** Parse "CNA:20,CNA:10" exactly like the report endpoint's strategies
query, with the server's error wording. */
export function parseStrategiesText(
  text: string,
): { ok: true; strategies: StrategyInput[] } | { ok: false; message: string } {
  const strategies: StrategyInput[] = [];
  for (const rawToken of text.split(",")) {
    const token = rawToken.trim();
    if (token === "") continue;
    const separator = token.indexOf(":");
    if (separator < 0) {
      return { ok: false, message: `strategies: expected TYPE:RATIO, got '${token}'` };
    }
    const caregiverType = token.slice(0, separator) as CaregiverType;
    const ratioText = token.slice(separator + 1);
    if (!/^-?\d+$/.test(ratioText)) {
      return { ok: false, message: `strategies: ratio in '${token}' is not an integer` };
    }
    strategies.push({ caregiverType, residentsPerStaff: Number(ratioText) });
  }
  if (strategies.length === 0) {
    return { ok: false, message: "strategies: at least one TYPE:RATIO pair is required" };
  }
  return { ok: true, strategies };
}

/** Parse an uploaded daily-admissions file: one count per line, blank lines
and #-comments skipped. Returns null when any line is not a whole number. */
export function parseCountsFile(text: string): number[] | null {
  const counts: number[] = [];
  for (const line of text.split(/\r?\n/)) {
    const trimmed = line.trim();
    if (trimmed === "" || trimmed.startsWith("#")) continue;
    if (!/^\d+$/.test(trimmed)) return null;
    counts.push(Number(trimmed));
  }
  return counts.length > 0 ? counts : null;
}
