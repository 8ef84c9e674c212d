/** Client-side form checks mirroring the server's ranges.

Every message here is phrased exactly like the server's 400 for the same
violation, so a user sees the same wording whether the check fires locally
or a stale form slips through to the API. An invalid form cannot submit.
*/

import type { ScenarioForm, ScenarioTransform } from "./form.js";
import { CAREGIVER_TYPES } from "./types.js";

export type FormErrors = Record<string, string>;

export const PRESET_SCENARIO_NAMES = ["baseline", "S1", "S2", "S3"] as const;

function isInt(value: number): boolean {
  return Number.isInteger(value);
}

function checkTransform(t: ScenarioTransform, key: string, errors: FormErrors): void {
  if (t.type === "adl_band_mix") {
    const [lo, hi] = t.band;
    if (!isInt(lo) || !isInt(hi) || lo < 0 || hi > 16 || lo > hi) {
      errors[key] = "band must be an integer range within 0..16";
    } else if (!(t.band_weight > 0 && t.band_weight < 1)) {
      errors[key] = "band_weight must lie in (0, 1)";
    } else if (!(t.mean_scale > 0) || !Number.isFinite(t.mean_scale)) {
      errors[key] = "mean_scale must be positive and finite";
    }
  } else if (t.type === "therapy_fraction_scale") {
    if (!(t.factor > 0 && t.factor <= 1)) {
      errors[key] = "factor must lie in (0, 1]";
    }
  }
}

export function validateForm(form: ScenarioForm): FormErrors {
  const errors: FormErrors = {};

  if (!isInt(form.horizonDays) || form.horizonDays < 1) {
    errors.horizon_days = "horizon_days must be at least 1";
  }
  if (!isInt(form.replications) || form.replications < 1) {
    errors.replications = "replications must be at least 1";
  }
  if (!isInt(form.masterSeed) || form.masterSeed < 0) {
    errors.master_seed = "master_seed must be non-negative";
  }
  if (
    !isInt(form.warmupDays) ||
    form.warmupDays < 0 ||
    (isInt(form.horizonDays) && form.horizonDays >= 1 && form.warmupDays >= form.horizonDays)
  ) {
    errors.warmup_days = "warmup_days must satisfy 0 <= warmup < horizon";
  }

  const arrival = form.arrival;
  if (arrival.family === "negbinom") {
    if (arrival.r === null || !(arrival.r > 0) || !Number.isFinite(arrival.r)) {
      errors["arrival.r"] = "r must be positive and finite";
    }
    if (arrival.p === null || !(arrival.p > 0 && arrival.p < 1)) {
      errors["arrival.p"] = "p must lie in (0, 1)";
    }
  } else {
    if (arrival.lam === null || arrival.lam < 0 || !Number.isFinite(arrival.lam)) {
      errors["arrival.lam"] = "lam must be non-negative and finite";
    }
  }

  if (form.dispositions.length === 0) {
    errors.los_model = "at least one disposition is required";
  }
  form.dispositions.forEach((d, i) => {
    const key = `los_model.${i}`;
    if (!d.label) {
      errors[key] = "disposition label must be non-empty";
    } else if (!Number.isFinite(d.eta)) {
      errors[key] = "eta must be finite";
    } else if (!(d.sigma > 0) || !Number.isFinite(d.sigma)) {
      errors[key] = "sigma must be positive and finite";
    }
  });

  const scenario = form.scenario;
  if (scenario.mode === "preset") {
    if (!(PRESET_SCENARIO_NAMES as readonly string[]).includes(scenario.presetName)) {
      errors.scenario = `unknown preset ${scenario.presetName}`;
    }
  } else {
    if (!scenario.customName.trim()) {
      errors.scenario = "scenario name must be non-empty";
    } else if ((PRESET_SCENARIO_NAMES as readonly string[]).includes(scenario.customName)) {
      errors.scenario = `scenario: name '${scenario.customName}' collides with a shipped preset`;
    }
    scenario.transforms.forEach((t, i) => checkTransform(t, `scenario.transforms.${i}`, errors));
  }

  if (form.strategies.length === 0) {
    errors.strategies = "at least one strategy is required";
  }
  form.strategies.forEach((s, i) => {
    const key = `strategies.${i}`;
    if (!(CAREGIVER_TYPES as readonly string[]).includes(s.caregiverType)) {
      errors[key] = `unknown caregiver type '${s.caregiverType}'`;
    } else if (!isInt(s.residentsPerStaff) || s.residentsPerStaff < 1) {
      errors[key] = "residents_per_staff must be at least 1";
    }
  });

  form.costOverrides.forEach((c, i) => {
    const key = `cost.${i}`;
    const values = [c.regularWagePerMin, c.tempWagePerMin, c.staffDayMinutes];
    if (!values.every((v) => v > 0 && Number.isFinite(v))) {
      errors[key] = "cost parameters must be positive and finite";
    }
  });

  return errors;
}

export function canSubmit(form: ScenarioForm): boolean {
  return Object.keys(validateForm(form)).length === 0;
}
