/** Single-page controller: form state, run submission, 1-second status
polling, series caching, and the evaluation feedback loop.

All statistics displayed come from API payloads held in this state; the
controller never derives a cost or a band itself. Charts and tables are
re-rendered from state on every change via the onChange callback.
*/

import { ApiClient, ApiError } from "./api.js";
import {
  costQuery,
  defaultForm,
  parseCountsFile,
  parseStrategiesText,
  strategiesQuery,
  toRunConfig,
  type CostOverride,
  type ScenarioForm,
  type ScenarioTransform,
} from "./form.js";
import { applyPreset } from "./presets.js";
import type {
  BandType,
  CaregiverType,
  DailySummary,
  FitArrivalsResponse,
  FitLosResponse,
  ReportResponse,
  ReportRow,
  RunRecord,
  RunStatus,
  ScenarioEntry,
  ValidateResponse,
} from "./types.js";
import { validateForm, type FormErrors } from "./validate.js";

/** Runs take minutes; one status request per second is plenty. */
export const POLL_INTERVAL_MS = 1000;

export interface ViewState {
  /** Only ever a run the API reported as done. */
  selectedRunId: string | null;
  caregiverType: CaregiverType;
  bandType: BandType;
}

export type SubmitPhase =
  | { phase: "idle" }
  | { phase: "submitting" }
  | { phase: "polling"; runId: string; status: RunStatus }
  | { phase: "error"; message: string; field?: string; canRetry: boolean };

export interface EvaluationState {
  /** Exact bytes of the report endpoint's response; the table's source. */
  raw: string;
  report: ReportResponse;
  /** Sweep-suggested rows appended below the requested strategies. */
  appended: ReportRow[];
  suggestedLabel: string | null;
}

export interface AppState {
  apiVersion: string | null;
  form: ScenarioForm;
  formErrors: FormErrors;
  submit: SubmitPhase;
  submitConfigHash: string | null;
  runs: RunRecord[];
  view: ViewState;
  daily: Record<string, DailySummary>;
  evaluation: EvaluationState | null;
  validation: ValidateResponse | null;
  observedCsv: string | null;
  fitLos: FitLosResponse | null;
  fitLosError: string | null;
  fitArrivals: FitArrivalsResponse | null;
  fitArrivalsError: string | null;
  scenarios: ScenarioEntry[];
  scenarioSaved: string | null;
  sweepRange: { kMin: number; kMax: number };
  banner: { message: string; errorId?: string } | null;
}

function initialState(): AppState {
  return {
    apiVersion: null,
    form: defaultForm(),
    formErrors: {},
    submit: { phase: "idle" },
    submitConfigHash: null,
    runs: [],
    view: { selectedRunId: null, caregiverType: "CNA", bandType: "ci" },
    daily: {},
    evaluation: null,
    validation: null,
    observedCsv: null,
    fitLos: null,
    fitLosError: null,
    fitArrivals: null,
    fitArrivalsError: null,
    scenarios: [],
    scenarioSaved: null,
    sweepRange: { kMin: 10, kMax: 30 },
    banner: null,
  };
}

function dailyKey(runId: string, band: BandType): string {
  return `${runId}:${band}`;
}

export class AppController {
  readonly state: AppState;
  private readonly api: ApiClient;
  private readonly onChange: (() => void) | null;

  constructor(api: ApiClient, onChange?: () => void) {
    this.api = api;
    this.onChange = onChange ?? null;
    this.state = initialState();
  }

  private emit(): void {
    this.onChange?.();
  }

  private fail(error: unknown): void {
    if (error instanceof ApiError) {
      this.state.banner = { message: error.message, errorId: error.errorId };
    } else {
      this.state.banner = { message: (error as Error).message };
    }
    this.emit();
  }

  async init(): Promise<void> {
    try {
      const [health, scenarios, runs] = await Promise.all([
        this.api.health(),
        this.api.listScenarios(),
        this.api.listRuns(),
      ]);
      this.state.apiVersion = health.version;
      this.state.scenarios = scenarios;
      this.state.runs = runs;
      this.state.banner = null;
    } catch (error) {
      this.fail(error);
      return;
    }
    this.emit();
  }

  // -- input panel ---------------------------------------------------------

  setForm(update: Partial<ScenarioForm>): void {
    Object.assign(this.state.form, update);
    this.state.formErrors = validateForm(this.state.form);
    this.emit();
  }

  applyPresetByName(name: string): void {
    this.state.form = applyPreset(this.state.form, name);
    this.state.formErrors = validateForm(this.state.form);
    this.emit();
  }

  setCostOverrides(overrides: CostOverride[]): void {
    this.state.form.costOverrides = overrides;
    this.state.formErrors = validateForm(this.state.form);
    this.emit();
  }

  /** Parse a "CNA:20,CNA:10" line; a parse failure becomes the inline
  strategies error (same wording as the server's 400). */
  setStrategiesText(text: string): void {
    const parsed = parseStrategiesText(text);
    if (parsed.ok) {
      this.state.form.strategies = parsed.strategies;
      this.state.formErrors = validateForm(this.state.form);
    } else {
      this.state.formErrors = validateForm(this.state.form);
      this.state.formErrors.strategies = parsed.message;
    }
    this.emit();
  }

  setSweepRange(kMin: number, kMax: number): void {
    this.state.sweepRange = { kMin, kMax };
    this.emit();
  }

  /** Preset mode submits the shipped name; custom mode edits transforms on
  top of the baseline mix. Switching to custom keeps the preset's transforms
  as the starting point. */
  setScenarioMode(mode: "preset" | "custom"): void {
    const scenario = this.state.form.scenario;
    if (mode === scenario.mode) return;
    if (mode === "custom") {
      this.state.form.scenario = {
        mode: "custom",
        presetName: scenario.presetName,
        customName: scenario.customName || "custom-mix",
        transforms: scenario.transforms.map((t) => ({ ...t }) as ScenarioTransform),
      };
    } else {
      this.state.form.scenario = { ...scenario, mode: "preset" };
    }
    this.state.formErrors = validateForm(this.state.form);
    this.emit();
  }

  addTransform(kind: ScenarioTransform["type"]): void {
    const scenario = this.state.form.scenario;
    if (scenario.mode !== "custom") return;
    if (kind === "adl_band_mix") {
      scenario.transforms.push({
        type: "adl_band_mix",
        band: [0, 1],
        band_weight: 0.5,
        mean_scale: 1.0,
      });
    } else {
      scenario.transforms.push({ type: "therapy_fraction_scale", factor: 1.0 });
    }
    this.state.formErrors = validateForm(this.state.form);
    this.emit();
  }

  removeTransform(index: number): void {
    const scenario = this.state.form.scenario;
    if (scenario.mode !== "custom") return;
    scenario.transforms.splice(index, 1);
    this.state.formErrors = validateForm(this.state.form);
    this.emit();
  }

  setTransformField(index: number, key: string, value: number): void {
    const scenario = this.state.form.scenario;
    if (scenario.mode !== "custom") return;
    const transform = scenario.transforms[index];
    if (!transform) return;
    if (transform.type === "adl_band_mix") {
      if (key === "band_lo") transform.band = [value, transform.band[1]];
      else if (key === "band_hi") transform.band = [transform.band[0], value];
      else if (key === "band_weight") transform.band_weight = value;
      else if (key === "mean_scale") transform.mean_scale = value;
    } else if (transform.type === "therapy_fraction_scale" && key === "factor") {
      transform.factor = value;
    }
    this.state.formErrors = validateForm(this.state.form);
    this.emit();
  }

  async uploadResidents(csv: string): Promise<void> {
    try {
      const fitted = await this.api.fitLos(csv);
      this.state.fitLos = fitted;
      this.state.fitLosError = null;
      this.state.form.losSource = "fitted";
      this.state.form.dispositions = fitted.dispositions.map((d) => ({ ...d }));
      this.state.formErrors = validateForm(this.state.form);
    } catch (error) {
      if (error instanceof ApiError) {
        this.state.fitLos = null;
        this.state.fitLosError = error.message;
      } else {
        this.fail(error);
        return;
      }
    }
    this.emit();
  }

  async uploadCounts(text: string): Promise<void> {
    const counts = parseCountsFile(text);
    if (counts === null) {
      this.state.fitArrivals = null;
      this.state.fitArrivalsError = "counts file must contain one whole number per line";
      this.emit();
      return;
    }
    try {
      const fitted = await this.api.fitArrivals(counts, this.state.form.arrival.family);
      this.state.fitArrivals = fitted;
      this.state.fitArrivalsError = null;
      if (fitted.family === "negbinom") {
        this.state.form.arrival = {
          family: "negbinom",
          r: fitted.r ?? null,
          p: fitted.p ?? null,
          lam: null,
        };
      } else {
        this.state.form.arrival = {
          family: "poisson",
          r: null,
          p: null,
          lam: fitted.lam ?? null,
        };
      }
      this.state.formErrors = validateForm(this.state.form);
    } catch (error) {
      if (error instanceof ApiError) {
        this.state.fitArrivals = null;
        this.state.fitArrivalsError = error.message;
      } else {
        this.fail(error);
        return;
      }
    }
    this.emit();
  }

  /** Invalid forms cannot submit; otherwise POST and start polling. */
  async submit(): Promise<string | null> {
    this.state.formErrors = validateForm(this.state.form);
    if (Object.keys(this.state.formErrors).length > 0) {
      this.emit();
      return null;
    }
    this.state.submit = { phase: "submitting" };
    this.emit();
    try {
      const accepted = await this.api.submitRun(toRunConfig(this.state.form));
      this.state.submitConfigHash = accepted.config_hash;
      this.state.submit = { phase: "polling", runId: accepted.run_id, status: accepted.status };
      this.state.runs = await this.api.listRuns();
      this.emit();
      return accepted.run_id;
    } catch (error) {
      if (error instanceof ApiError) {
        if (error.field) {
          this.state.formErrors[error.field] = error.message;
        }
        this.state.submit = {
          phase: "error",
          message: error.message,
          field: error.field,
          canRetry: error.isNetwork,
        };
      } else {
        this.state.submit = { phase: "error", message: (error as Error).message, canRetry: false };
      }
      this.emit();
      return null;
    }
  }

  get polling(): boolean {
    return this.state.submit.phase === "polling";
  }

  /** One poll step; the browser loop calls this every POLL_INTERVAL_MS. */
  async pollTick(): Promise<void> {
    if (this.state.submit.phase !== "polling") return;
    const runId = this.state.submit.runId;
    let record: RunRecord;
    try {
      record = await this.api.getRun(runId);
    } catch (error) {
      if (error instanceof ApiError && error.isNetwork) {
        return; // transient; next tick retries
      }
      this.state.submit = { phase: "error", message: (error as Error).message, canRetry: false };
      this.emit();
      return;
    }
    const index = this.state.runs.findIndex((r) => r.run_id === runId);
    if (index >= 0) this.state.runs[index] = record;

    if (record.status === "done") {
      this.state.submit = { phase: "idle" };
      await this.selectRun(runId);
      return;
    }
    if (record.status === "failed") {
      this.state.submit = {
        phase: "error",
        message: record.error ?? "run failed",
        canRetry: false,
      };
      this.emit();
      return;
    }
    this.state.submit = { phase: "polling", runId, status: record.status };
    this.emit();
  }

  // -- visualization panel ---------------------------------------------------

  private async ensureDaily(runId: string, band: BandType): Promise<DailySummary> {
    const key = dailyKey(runId, band);
    const cached = this.state.daily[key];
    if (cached) return cached;
    const summary = await this.api.getDaily(runId, band);
    this.state.daily[key] = summary;
    return summary;
  }

  /** Select a finished run for the visualization and evaluation panels.
  Returns false (and selects nothing) unless the API reports it done. */
  async selectRun(runId: string): Promise<boolean> {
    let record = this.state.runs.find((r) => r.run_id === runId);
    if (!record) {
      try {
        record = await this.api.getRun(runId);
      } catch (error) {
        this.fail(error);
        return false;
      }
    }
    if (record.status !== "done") {
      return false;
    }
    try {
      await this.ensureDaily(runId, this.state.view.bandType);
    } catch (error) {
      this.fail(error);
      return false;
    }
    this.state.view.selectedRunId = runId;
    this.state.evaluation = null;
    this.state.validation = null;
    if (this.state.observedCsv !== null) {
      await this.refreshValidation();
    }
    this.emit();
    return true;
  }

  /** CI/percentile toggle; a cached band renders without a refetch. */
  async setBand(band: BandType): Promise<void> {
    this.state.view.bandType = band;
    const runId = this.state.view.selectedRunId;
    if (runId !== null) {
      try {
        await this.ensureDaily(runId, band);
      } catch (error) {
        this.fail(error);
        return;
      }
    }
    this.emit();
  }

  setCaregiverType(caregiverType: CaregiverType): void {
    this.state.view.caregiverType = caregiverType;
    this.emit();
  }

  selectedDaily(): DailySummary | null {
    const { selectedRunId, bandType } = this.state.view;
    if (selectedRunId === null) return null;
    return this.state.daily[dailyKey(selectedRunId, bandType)] ?? null;
  }

  async uploadObserved(csv: string): Promise<void> {
    this.state.observedCsv = csv;
    if (this.state.view.selectedRunId !== null) {
      await this.refreshValidation();
    }
    this.emit();
  }

  private async refreshValidation(): Promise<void> {
    const runId = this.state.view.selectedRunId;
    if (runId === null || this.state.observedCsv === null) return;
    try {
      this.state.validation = await this.api.validateRun(runId, this.state.observedCsv);
    } catch (error) {
      this.state.validation = null;
      if (error instanceof ApiError) {
        this.state.banner = { message: error.message, errorId: error.errorId };
      } else {
        throw error;
      }
    }
  }

  // -- evaluation panel --------------------------------------------------------

  async fetchReport(): Promise<void> {
    const runId = this.state.view.selectedRunId;
    if (runId === null) return;
    try {
      const { raw, data } = await this.api.getReport(
        runId,
        strategiesQuery(this.state.form.strategies),
        costQuery(this.state.form.costOverrides) || undefined,
      );
      this.state.evaluation = { raw, report: data, appended: [], suggestedLabel: null };
      this.state.banner = null;
    } catch (error) {
      this.fail(error);
      return;
    }
    this.emit();
  }

  /** Rows shown in the evaluation table, in display order. */
  displayedRows(): ReportRow[] {
    const evaluation = this.state.evaluation;
    if (!evaluation) return [];
    return [...evaluation.report.rows, ...evaluation.appended];
  }

  private sweepCost(): Record<string, unknown> | undefined {
    const override = this.state.form.costOverrides.find(
      (c) => c.caregiverType === this.state.view.caregiverType,
    );
    if (!override) return undefined;
    return {
      schema_version: 1,
      types: {
        [override.caregiverType]: {
          regular_wage_per_min: override.regularWagePerMin,
          temp_wage_per_min: override.tempWagePerMin,
          staff_day_minutes: override.staffDayMinutes,
        },
      },
    };
  }

  /** Ratio sweep for the selected caregiver type; the suggested row is
  appended to the table (or just highlighted when already displayed). */
  async runSweep(kMin?: number, kMax?: number): Promise<void> {
    kMin = kMin ?? this.state.sweepRange.kMin;
    kMax = kMax ?? this.state.sweepRange.kMax;
    const runId = this.state.view.selectedRunId;
    if (runId === null) return;
    if (this.state.evaluation === null) {
      await this.fetchReport();
      if (this.state.evaluation === null) return;
    }
    try {
      const result = await this.api.sweep({
        run_id: runId,
        caregiver_type: this.state.view.caregiverType,
        k_min: kMin,
        k_max: kMax,
        cost: this.sweepCost(),
      });
      const evaluation = this.state.evaluation;
      const shown = new Set(this.displayedRows().map((r) => r.label));
      if (!shown.has(result.suggested.label)) {
        evaluation.appended.push(result.suggested);
      }
      evaluation.suggestedLabel = result.suggested.label;
      this.state.banner = null;
    } catch (error) {
      this.fail(error);
      return;
    }
    this.emit();
  }

  // -- scenarios ---------------------------------------------------------------

  async saveScenario(): Promise<void> {
    const scenario = this.state.form.scenario;
    if (scenario.mode !== "custom") return;
    this.state.formErrors = validateForm(this.state.form);
    if (this.state.formErrors.scenario) {
      this.emit();
      return;
    }
    try {
      await this.api.saveScenario({
        schema_version: 1,
        name: scenario.customName,
        base: { $include: "scenario_baseline.json" },
        transforms: scenario.transforms,
      });
      this.state.scenarioSaved = scenario.customName;
      this.state.scenarios = await this.api.listScenarios();
    } catch (error) {
      if (error instanceof ApiError) {
        this.state.formErrors.scenario = error.message;
      } else {
        this.fail(error);
        return;
      }
    }
    this.emit();
  }

  /** run_id + config hash for the footer; every displayed number traces here. */
  footerInfo(): { runId: string; configHash: string } | null {
    const runId = this.state.view.selectedRunId;
    if (runId !== null) {
      const record = this.state.runs.find((r) => r.run_id === runId);
      if (record) return { runId, configHash: record.config_hash };
      const daily = this.selectedDaily();
      if (daily) return { runId, configHash: daily.config_hash };
    }
    if (this.state.submit.phase === "polling" && this.state.submitConfigHash !== null) {
      return { runId: this.state.submit.runId, configHash: this.state.submitConfigHash };
    }
    return null;
  }
}
