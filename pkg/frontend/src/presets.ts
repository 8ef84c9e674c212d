/** Shipped census-scenario presets.

Two layers: the declarative transform each what-if applies to the baseline
mix (shown in the form's transform editor when a preset is selected), and
the fully resolved attribute distributions (displayed in the input panel's
mix preview). The resolved JSON is generated from a live server capture and
a test holds it identical to what GET /api/scenarios returns, so the panel
never drifts from the service.
*/

import type { ScenarioForm, ScenarioTransform } from "./form.js";
import { PRESET_SCENARIOS } from "./presetData.js";
import type { ScenarioEntry } from "./types.js";

export const PRESET_TRANSFORMS: Record<string, ScenarioTransform[]> = {
  baseline: [],
  // healthier admissions: weight shifts to the low-ADL band until the mean
  // ADL score drops to 40% of baseline
  S1: [{ type: "adl_band_mix", band: [0, 1], band_weight: 0.7, mean_scale: 0.4 }],
  // frailer admissions: weight shifts to the high-ADL band, mean up to 160%
  S2: [{ type: "adl_band_mix", band: [11, 16], band_weight: 0.7, mean_scale: 1.6 }],
  // reduced therapy program: halve every nonzero therapy-intensity level
  S3: [{ type: "therapy_fraction_scale", factor: 0.5 }],
};

export function presetEntry(name: string): ScenarioEntry {
  const entry = PRESET_SCENARIOS.find((s) => s.name === name);
  if (!entry) {
    throw new Error(`no shipped preset named '${name}'`);
  }
  return entry;
}

/** Fill the form's scenario block from a preset: selects it for submission
and pre-fills the transform editor with the preset's declaration so a
switch to custom mode starts from the preset's definition. */
export function applyPreset(form: ScenarioForm, name: string): ScenarioForm {
  const transforms = PRESET_TRANSFORMS[name];
  if (transforms === undefined) {
    throw new Error(`no shipped preset named '${name}'`);
  }
  return {
    ...form,
    scenario: {
      mode: "preset",
      presetName: name,
      customName: "",
      transforms: transforms.map((t) => ({ ...t }) as ScenarioTransform),
    },
  };
}
