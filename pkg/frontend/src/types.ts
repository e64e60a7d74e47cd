// Payload shapes of the service HTTP API. The UI renders these verbatim and
// holds no scoring logic of its own.

export type Colour = "green" | "yellow" | "orange" | "red";

export type PainSeverity = "mild" | "severe";

export interface PainEntry {
  region: string;
  severity: PainSeverity;
}

export interface Assessment {
  sbp: number;
  hr: number;
  temp: number;
  rr: number;
  avpu: number;
  pain: PainEntry[];
  flags: string[];
}

export interface TriageBlock {
  crisp_ts: number;
  vital_scores: Record<string, number>;
  out_of_table: string[];
  base_colour: Colour;
  colour: Colour;
  applied_overrides: { flag: string; from: Colour; to: Colour }[];
}

export interface PatientCase {
  id: string;
  name: string;
  age: number;
  assessment: Assessment;
  triage: TriageBlock;
  arrival_min: number;
  predicted_consult_min: number;
  status: "waiting" | "in-consultation" | "done";
  doctor_id: string | null;
  notes: string[];
  consult_start_min: number | null;
  consult_end_min: number | null;
  observed_min: number | null;
  queue_position?: number | null;
}

export interface QueueRow {
  position: number;
  id: string;
  name: string;
  colour: Colour;
  crisp_ts: number;
  waited_min: number;
  projected_start_min: number;
  expected_consult_min: number;
}

export interface QueueResponse {
  now_min: number;
  rows: QueueRow[];
}

export interface NextPatientResponse {
  patient: PatientCase | null;
}

export interface ApiError {
  code: string;
  message: string;
  field?: string;
}
