// Typed client for the workbench HTTP API. The console never recomputes a
// number: everything it shows comes from these payloads, and the optional
// onPayload hook lets tests verify the displayed text byte-for-byte.

export interface Activation {
  facility: string;
  location: string;
  period: number;
}

export interface SampleItem {
  id: string;
  vector: number[];
  activations: Activation[];
}

export interface RuleCondition {
  objective: string;
  objective_index: number;
  threshold: number;
}

export interface Rule {
  id: string;
  conditions: RuleCondition[];
  support: string[];
  sentence: string;
}

export interface SessionState {
  id: string;
  state: string;
  formulation: string;
  iteration: number;
  objective_names: string[];
  constraints: string[];
  sample?: SampleItem[];
  rules?: Rule[];
  journal: unknown[];
}

export interface LabelsResponse {
  state: string;
  rules: Rule[];
}

export interface ChoiceResponse {
  state: string;
  sample?: SampleItem[];
}

export interface DashboardTable {
  name: string;
  header: string[];
  rows: (string | number)[][];
}

export interface FinalReport {
  state: string;
  strategy: Activation[];
  value: number;
  dashboard: DashboardTable[];
}

export interface InstanceMeta {
  facilities: string[];
  locations: string[];
  criteria: string[];
  horizon: number;
  interest_rate: number;
  name?: string;
}

export interface InstanceDoc {
  meta: InstanceMeta;
  [key: string]: unknown;
}

export interface ErrorBody {
  code: string;
  message: string;
  pointer: string;
}

export class ApiError extends Error {
  constructor(readonly status: number, readonly body: ErrorBody) {
    super(`${body.code}: ${body.message}`);
  }
}

export type PayloadHook = (path: string, payload: unknown) => void;
type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class WorkbenchClient {
  constructor(
    private readonly base: string,
    private readonly onPayload?: PayloadHook,
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const res = await this.fetchFn(this.base + path, init);
    const body = await res.json().catch(() => null);
    if (!res.ok) {
      const err: ErrorBody = body ?? {
        code: "http_error",
        message: res.statusText,
        pointer: "",
      };
      throw new ApiError(res.status, err);
    }
    this.onPayload?.(path, body);
    return body as T;
  }

  private post<T>(path: string, payload: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  instance(): Promise<InstanceDoc> {
    return this.request<InstanceDoc>("/instance");
  }

  createSession(formulation: string): Promise<SessionState> {
    return this.post<SessionState>("/sessions", { formulation });
  }

  getSession(id: string): Promise<SessionState> {
    return this.request<SessionState>(`/sessions/${id}`);
  }

  submitLabels(id: string, labels: Record<string, "good" | "other">): Promise<LabelsResponse> {
    return this.post<LabelsResponse>(`/sessions/${id}/labels`, { labels });
  }

  chooseRule(id: string, rule: string): Promise<ChoiceResponse> {
    return this.post<ChoiceResponse>(`/sessions/${id}/choice`, { rule });
  }

  markSatisfied(id: string, strategy: string): Promise<FinalReport> {
    return this.post<FinalReport>(`/sessions/${id}/satisfied`, { strategy });
  }
}
