// Session state for one annotator: fetch tasks, submit labels, track
// progress. DOM-free on purpose; main.ts owns rendering and this module
// owns every decision, so the whole labeling flow is testable headlessly.

import type { AnnotationStats, AnnotationTask, Label } from "./api.js";

export const KEY_LABELS: Record<string, Label> = {
  "1": "essential",
  "2": "optional",
  "3": "erroneous",
  "4": "not_assessable",
};

// Keystrokes aimed at form fields must not label tasks.
const EDITABLE_TAGS = new Set(["INPUT", "TEXTAREA", "SELECT"]);

export interface KeyTarget {
  tagName?: string;
  isContentEditable?: boolean;
}

export function shouldIgnoreKey(target: KeyTarget | null): boolean {
  if (!target) return false;
  if (target.isContentEditable) return true;
  return EDITABLE_TAGS.has((target.tagName ?? "").toUpperCase());
}

/** The slice of the API client the controller needs. */
export interface TaskService {
  nextTask(annotator: string): Promise<AnnotationTask | null>;
  submitLabel(taskId: number, label: Label, annotator: string): Promise<unknown>;
  stats(): Promise<AnnotationStats>;
}

export interface HistoryEntry {
  task: AnnotationTask;
  label: Label;
}

export type ViewState = "loading" | "task" | "done" | "error";

export class AnnotationController {
  state: ViewState = "loading";
  current: AnnotationTask | null = null;
  stats: AnnotationStats | null = null;
  history: HistoryEntry[] = [];
  lastError = "";
  onChange: () => void = () => {};

  private busy = false;

  constructor(
    private client: TaskService,
    readonly annotator: string,
  ) {}

  async start(): Promise<void> {
    this.state = "loading";
    this.lastError = "";
    this.onChange();
    try {
      await this.advance();
      await this.refreshStats();
    } catch (err) {
      this.fail(err);
    }
  }

  /** Retry affordance for the unreachable-service banner. */
  async retry(): Promise<void> {
    await this.start();
  }

  private fail(err: unknown): void {
    this.state = "error";
    this.lastError = err instanceof Error ? err.message : String(err);
    this.onChange();
  }

  private async advance(): Promise<void> {
    const task = await this.client.nextTask(this.annotator);
    this.current = task;
    this.state = task === null ? "done" : "task";
    this.onChange();
  }

  async refreshStats(): Promise<void> {
    this.stats = await this.client.stats();
    this.onChange();
  }

  /**
   * Label the displayed task and advance to the next one. Returns false
   * when nothing was submitted: no task on screen, a request already in
   * flight (double-submit guard), or the POST failed. A failed POST keeps
   * the task on screen so the label can be retried.
   */
  async submit(label: Label): Promise<boolean> {
    if (this.state !== "task" || this.current === null || this.busy) return false;
    const task = this.current;
    this.busy = true;
    try {
      await this.client.submitLabel(task.task_id, label, this.annotator);
    } catch (err) {
      this.busy = false;
      this.lastError = err instanceof Error ? err.message : String(err);
      this.onChange();
      return false;
    }
    this.lastError = "";
    this.remember(task, label);
    try {
      await this.advance();
      await this.refreshStats();
    } catch (err) {
      this.fail(err);
    } finally {
      this.busy = false;
    }
    return true;
  }

  /** Change the label of an already-labeled task; the service keeps the
   * last write, and the local history mirrors it. */
  async relabel(taskId: number, label: Label): Promise<boolean> {
    if (this.busy) return false;
    const entry = this.history.find((e) => e.task.task_id === taskId);
    if (!entry) return false;
    this.busy = true;
    try {
      await this.client.submitLabel(taskId, label, this.annotator);
      entry.label = label;
      await this.refreshStats();
      return true;
    } catch (err) {
      this.lastError = err instanceof Error ? err.message : String(err);
      this.onChange();
      return false;
    } finally {
      this.busy = false;
    }
  }

  /**
   * Route a keystroke. Returns the submit promise when the key mapped to a
   * label (so callers can preventDefault and tests can await the result),
   * or null for unmapped keys and keys aimed at editable elements.
   */
  handleKey(key: string, target: KeyTarget | null = null): Promise<boolean> | null {
    if (shouldIgnoreKey(target)) return null;
    const label = KEY_LABELS[key];
    if (!label) return null;
    return this.submit(label);
  }

  private remember(task: AnnotationTask, label: Label): void {
    const entry = this.history.find((e) => e.task.task_id === task.task_id);
    if (entry) entry.label = label;
    else this.history.push({ task, label });
  }
}
