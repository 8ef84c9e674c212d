/** Payload shapes of the careflow HTTP API, field-for-field.

The panel never invents numbers: everything rendered in a chart or table
cell originates in one of these payloads. */

export type RunStatus = "pending" | "running" | "done" | "failed";

export interface RunRecord {
  run_id: string;
  status: RunStatus;
  config_hash: string;
  created_at: string;
  error: string | null;
}

export interface SeriesBand {
  mean: number[];
  lower: number[];
  upper: number[];
}

export type BandType = "ci" | "percentile";

export interface DailySummary {
  run_id: string;
  config_hash: string;
  band: BandType;
  alpha: number;
  days: number[];
  census: SeriesBand;
  demand: Record<string, SeriesBand>;
}

export interface ReportRow {
  label: string;
  caregiver_type: string;
  residents_per_staff: number;
  total_cost_mean: number;
  total_cost_ci_lower: number;
  total_cost_ci_upper: number;
  planned_cost_mean: number;
  understaffing_cost_mean: number;
  avg_daily_overstaffing_min: number;
  avg_daily_understaffing_min: number;
}

export interface ReportResponse {
  config_hash: string;
  rows: ReportRow[];
  run_id: string;
}

export interface SweepResponse {
  run_id: string;
  config_hash: string;
  caregiver_type: string;
  suggested: ReportRow;
  evaluations: ReportRow[];
}

export interface FittedDisposition {
  index: number;
  label: string;
  eta: number;
  sigma: number;
}

export interface FitLosResponse {
  dispositions: FittedDisposition[];
  log_likelihood: number;
  iterations: number;
  converged: boolean;
  n_observations: number;
  n_censored: number;
}

export interface GofResult {
  statistic: number;
  p_value: number;
  dof: number;
  bins: number;
}

export interface FitArrivalsResponse {
  family: "negbinom" | "poisson";
  mean_per_day: number;
  r?: number;
  p?: number;
  lam?: number;
  gof: GofResult | null;
  gof_error?: string;
}

export interface ValidateResponse {
  run_id: string;
  config_hash: string;
  ks: {
    statistic: number;
    p_value: number;
    n_observed: number;
    n_simulated: number;
  };
  overlay: {
    times: number[];
    observed: number[];
    simulated: number[];
    max_gap: number;
  };
  histogram: {
    bin_edges: number[];
    observed_density: number[];
    simulated_density: number[];
  };
}

export interface ScenarioEntry {
  source: "preset" | "saved";
  schema_version: number;
  name: string;
  distributions: Record<string, number[]>;
}

export interface SubmitRunResponse {
  run_id: string;
  status: RunStatus;
  config_hash: string;
}

export interface ErrorBody {
  error: {
    message: string;
    field?: string;
    id?: string;
  };
}

export const CAREGIVER_TYPES = ["CNA", "LPN", "RN"] as const;
export type CaregiverType = (typeof CAREGIVER_TYPES)[number];
