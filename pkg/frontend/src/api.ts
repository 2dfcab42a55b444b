// Typed client for the annotation service JSON API. The UI talks to the
// service exclusively through this module; no other network access.

export const LABELS = ["essential", "optional", "erroneous", "not_assessable"] as const;

export type Label = (typeof LABELS)[number];

export interface DiffSegment {
  op: "equal" | "M" | "R" | "U";
  original: string;
  modified: string;
}

export interface AnnotationTask {
  task_id: number;
  pair_id: string;
  source: string;
  original_target: string;
  modified_target: string;
  diff_spans: DiffSegment[];
}

export interface AnnotationStats {
  corpus_size: number;
  n_modified: number;
  modified_ratio: number;
  n_tasks: number;
  n_labeled: number;
  n_pending: number;
  fractions: Record<Label, number>;
  wrong_annotations_lower_bound: number;
}

export interface LabelReceipt {
  ok: boolean;
  task_id: number;
  label: string;
}

export interface HealthInfo {
  status: string;
  n_tasks: number;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    detail: string,
  ) {
    super(detail);
    this.name = "ApiError";
  }
}

async function raiseForStatus(resp: Response): Promise<void> {
  if (resp.ok) return;
  let code = "error";
  let detail = `${resp.status} ${resp.statusText}`;
  try {
    const body = await resp.json();
    if (body && typeof body.error === "string") code = body.error;
    if (body && typeof body.detail === "string") detail = body.detail;
  } catch {
    // non-JSON error body; keep the status line
  }
  throw new ApiError(resp.status, code, detail);
}

export class AnnoClient {
  constructor(
    private baseUrl: string,
    private token?: string,
  ) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
  }

  private headers(json: boolean): Record<string, string> {
    const headers: Record<string, string> = {};
    if (json) headers["content-type"] = "application/json";
    if (this.token) headers["x-anno-token"] = this.token;
    return headers;
  }

  async health(): Promise<HealthInfo> {
    const resp = await fetch(`${this.baseUrl}/health`);
    await raiseForStatus(resp);
    return resp.json();
  }

  /** Lease the next unlabeled task, or null when the queue is drained. */
  async nextTask(annotator: string): Promise<AnnotationTask | null> {
    const url = `${this.baseUrl}/tasks/next?annotator=${encodeURIComponent(annotator)}`;
    const resp = await fetch(url, { headers: this.headers(false) });
    if (resp.status === 204) return null;
    await raiseForStatus(resp);
    return resp.json();
  }

  async getTask(taskId: number): Promise<AnnotationTask> {
    const resp = await fetch(`${this.baseUrl}/tasks/${taskId}`, {
      headers: this.headers(false),
    });
    await raiseForStatus(resp);
    return resp.json();
  }

  async submitLabel(taskId: number, label: Label, annotator: string): Promise<LabelReceipt> {
    const resp = await fetch(`${this.baseUrl}/tasks/${taskId}/label`, {
      method: "POST",
      headers: this.headers(true),
      body: JSON.stringify({ label, annotator }),
    });
    await raiseForStatus(resp);
    return resp.json();
  }

  async stats(): Promise<AnnotationStats> {
    const resp = await fetch(`${this.baseUrl}/stats`, { headers: this.headers(false) });
    await raiseForStatus(resp);
    return resp.json();
  }
}
