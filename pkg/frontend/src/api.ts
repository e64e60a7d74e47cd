import type {
  ApiError,
  Assessment,
  NextPatientResponse,
  PatientCase,
  QueueResponse,
} from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiRequestError extends Error {
  readonly status: number;
  readonly body: ApiError;

  constructor(status: number, body: ApiError) {
    super(body.message);
    this.status = status;
    this.body = body;
  }
}

async function parseError(response: Response): Promise<never> {
  let body: ApiError;
  try {
    body = (await response.json()) as ApiError;
  } catch {
    body = { code: "http_error", message: `HTTP ${response.status}` };
  }
  throw new ApiRequestError(response.status, body);
}

export class ApiClient {
  private readonly base: string;
  private readonly fetchFn: FetchLike;

  constructor(base = "", fetchFn: FetchLike = (input, init) => fetch(input, init)) {
    this.base = base.replace(/\/$/, "");
    this.fetchFn = fetchFn;
  }

  private async get<T>(path: string): Promise<T> {
    const response = await this.fetchFn(this.base + path);
    if (!response.ok) await parseError(response);
    return (await response.json()) as T;
  }

  private async post<T>(path: string, body: unknown): Promise<T> {
    const response = await this.fetchFn(this.base + path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!response.ok) await parseError(response);
    return (await response.json()) as T;
  }

  submitPatient(name: string, age: number, assessment: Assessment): Promise<PatientCase> {
    return this.post<PatientCase>("/api/patients", { name, age, assessment });
  }

  nextPatient(doctorId: string, notes: string): Promise<NextPatientResponse> {
    return this.post<NextPatientResponse>(
      `/api/doctors/${encodeURIComponent(doctorId)}/next`, { notes });
  }

  getQueue(): Promise<QueueResponse> {
    return this.get<QueueResponse>("/api/queue");
  }

  getPatient(id: string): Promise<PatientCase> {
    return this.get<PatientCase>(`/api/patients/${encodeURIComponent(id)}`);
  }

  searchPatients(query: string): Promise<{ results: PatientCase[] }> {
    return this.get<{ results: PatientCase[] }>(
      `/api/patients?q=${encodeURIComponent(query)}`);
  }
}
