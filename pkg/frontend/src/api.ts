/** Typed client for the session server HTTP API. All pixels and all state
 * come from the server; the client never transforms image data. */

export interface UploadResult {
  width: number;
  height: number;
  stack_depth: number;
  image_url: string;
}

export interface PlanSummary {
  functions: string[];
  partial: boolean;
}

export interface TurnResult {
  reply: string;
  image_url: string;
  plan: PlanSummary;
  token_usage: number;
  token_total: number;
  stack_depth: number;
}

export interface UndoResult {
  stack_depth: number;
  image_url: string;
}

export interface HistoryTurn {
  instruction: string;
  reply: string;
  functions: string[];
  ok: boolean;
  token_usage: number;
}

export interface HistoryResult {
  turns: HistoryTurn[];
  stack_depth: number;
  token_total: number;
}

export class ApiError extends Error {
  constructor(message: string, readonly status: number) {
    super(message);
  }
}

/** What the controller needs from the server; ApiClient is the real one. */
export interface SessionApi {
  createSession(): Promise<string>;
  uploadImage(sessionId: string, file: Blob, name?: string): Promise<UploadResult>;
  postTurn(sessionId: string, instruction: string): Promise<TurnResult>;
  undo(sessionId: string): Promise<UndoResult>;
  history(sessionId: string): Promise<HistoryResult>;
  imageBytes(sessionId: string): Promise<ArrayBuffer>;
  imageUrl(path: string): string;
}

async function parseError(response: Response): Promise<never> {
  let message = `HTTP ${response.status}`;
  try {
    const body = (await response.json()) as { error?: string; detail?: string };
    message = body.error ?? body.detail ?? message;
  } catch {
    // non-JSON error body; keep the status text
  }
  throw new ApiError(message, response.status);
}

export class ApiClient implements SessionApi {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: typeof fetch = fetch,
  ) {}

  private url(path: string): string {
    return `${this.baseUrl}${path}`;
  }

  async createSession(): Promise<string> {
    const response = await this.fetchFn(this.url("/sessions"), { method: "POST" });
    if (!response.ok) await parseError(response);
    const body = (await response.json()) as { id: string };
    return body.id;
  }

  async uploadImage(sessionId: string, file: Blob, name = "upload.png"): Promise<UploadResult> {
    const form = new FormData();
    form.append("file", file, name);
    const response = await this.fetchFn(this.url(`/sessions/${sessionId}/image`), {
      method: "POST",
      body: form,
    });
    if (!response.ok) await parseError(response);
    return (await response.json()) as UploadResult;
  }

  async postTurn(sessionId: string, instruction: string): Promise<TurnResult> {
    const response = await this.fetchFn(this.url(`/sessions/${sessionId}/turns`), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ instruction }),
    });
    if (!response.ok) await parseError(response);
    return (await response.json()) as TurnResult;
  }

  async undo(sessionId: string): Promise<UndoResult> {
    const response = await this.fetchFn(this.url(`/sessions/${sessionId}/undo`), {
      method: "POST",
    });
    if (!response.ok) await parseError(response);
    return (await response.json()) as UndoResult;
  }

  async history(sessionId: string): Promise<HistoryResult> {
    const response = await this.fetchFn(this.url(`/sessions/${sessionId}/history`));
    if (!response.ok) await parseError(response);
    return (await response.json()) as HistoryResult;
  }

  /** Raw PNG bytes of the current version; used by tests to compare
   * byte-for-byte and by the app indirectly through <img src>. */
  async imageBytes(sessionId: string): Promise<ArrayBuffer> {
    const response = await this.fetchFn(this.url(`/sessions/${sessionId}/image`));
    if (!response.ok) await parseError(response);
    return response.arrayBuffer();
  }

  imageUrl(path: string): string {
    return this.url(path);
  }
}
