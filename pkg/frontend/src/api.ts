import type {
  BadgesResponse,
  DailyPayload,
  MonthlyPayload,
  OverviewPayload,
  RecordPayload,
  ScoreTriple,
  SubmitResponse,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

/** Network-level failure (no HTTP response): worth retrying. */
export class OfflineError extends Error {
  constructor() {
    super("network unreachable, try again");
    this.name = "OfflineError";
  }
}

async function parseError(response: Response): Promise<ApiError> {
  let code = "error";
  let message = `request failed with status ${response.status}`;
  try {
    const body = await response.json();
    if (typeof body.error === "string") code = body.error;
    if (typeof body.message === "string") message = body.message;
  } catch {
    // non-JSON error body; keep the generic message
  }
  return new ApiError(response.status, code, message);
}

export class ApiClient {
  token: string | null = null;

  constructor(
    private baseUrl: string = "",
    private fetchFn: typeof fetch = (...args) => fetch(...args),
  ) {}

  private async request(path: string, init: RequestInit = {}): Promise<Response> {
    const headers = new Headers(init.headers);
    if (this.token) headers.set("Authorization", `Bearer ${this.token}`);
    let response: Response;
    try {
      response = await this.fetchFn(this.baseUrl + path, { ...init, headers });
    } catch {
      throw new OfflineError();
    }
    if (!response.ok) throw await parseError(response);
    return response;
  }

  private async getJson<T>(path: string): Promise<T> {
    return (await this.request(path)).json();
  }

  private async postJson<T>(path: string, body: unknown): Promise<T> {
    const response = await this.request(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    return response.json();
  }

  async register(email: string, displayName: string, password: string): Promise<string> {
    const body = await this.postJson<{ user_id: string }>("/api/register", {
      email,
      display_name: displayName,
      password,
    });
    return body.user_id;
  }

  async login(email: string, password: string): Promise<string> {
    const body = await this.postJson<{ token: string }>("/api/login", { email, password });
    this.token = body.token;
    return body.token;
  }

  async submitRecord(photo: Blob, filename: string, scores: ScoreTriple): Promise<SubmitResponse> {
    const form = new FormData();
    form.append("photo", photo, filename);
    form.append("rice", String(scores.rice));
    form.append("meat", String(scores.meat));
    form.append("vegetables", String(scores.vegetables));
    const response = await this.request("/api/records", { method: "POST", body: form });
    return response.json();
  }

  records(from?: string, to?: string): Promise<RecordPayload[]> {
    const params = new URLSearchParams();
    if (from) params.set("from", from);
    if (to) params.set("to", to);
    const query = params.toString();
    return this.getJson(`/api/records${query ? `?${query}` : ""}`);
  }

  overview(): Promise<OverviewPayload> {
    return this.getJson("/api/overview");
  }

  badges(): Promise<BadgesResponse> {
    return this.getJson("/api/badges");
  }

  async media(photoUrl: string): Promise<Blob> {
    return (await this.request(photoUrl)).blob();
  }

  daily(date?: string): Promise<DailyPayload> {
    return this.getJson(`/api/dashboard/daily${date ? `?date=${date}` : ""}`);
  }

  monthly(month?: string): Promise<MonthlyPayload> {
    return this.getJson(`/api/dashboard/monthly${month ? `?month=${month}` : ""}`);
  }

  async tips(): Promise<string[]> {
    const body = await this.getJson<{ tips: string[] }>("/api/dashboard/tips");
    return body.tips;
  }
}
