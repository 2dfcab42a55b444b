// DOM wiring. All state lives in AnnotationController; this file only
// renders it and forwards events.

import { AnnoClient, LABELS, type Label } from "./api.js";
import { AnnotationController, KEY_LABELS, type KeyTarget } from "./controller.js";
import { diffHtml } from "./diff.js";

const LABEL_TITLES: Record<Label, string> = {
  essential: "Essential",
  optional: "Optional",
  erroneous: "Erroneous",
  not_assessable: "Not assessable",
};

function el(tag: string, className: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function pct(x: number): string {
  return `${(100 * x).toFixed(2)}%`;
}

function renderTask(controller: AnnotationController): HTMLElement {
  const task = controller.current;
  if (!task) return el("div", "card");
  const card = el("div", "card task");
  card.appendChild(el("div", "task-id", `Task ${task.task_id} (${task.pair_id})`));

  const rows: Array<[string, string]> = [
    ["Source", task.source],
    ["Original target", task.original_target],
  ];
  for (const [name, text] of rows) {
    const row = el("div", "row");
    row.appendChild(el("div", "row-name", name));
    row.appendChild(el("div", "row-text", text));
    card.appendChild(row);
  }
  const row = el("div", "row");
  row.appendChild(el("div", "row-name", "Modified target"));
  const diff = el("div", "row-text diff");
  diff.innerHTML = diffHtml(task.diff_spans);
  row.appendChild(diff);
  card.appendChild(row);

  const buttons = el("div", "buttons");
  for (const [key, label] of Object.entries(KEY_LABELS)) {
    const button = el("button", `label-btn label-${label}`);
    button.appendChild(el("span", "key-hint", key));
    button.appendChild(el("span", "label-name", LABEL_TITLES[label]));
    button.addEventListener("click", () => void controller.submit(label));
    buttons.appendChild(button);
  }
  card.appendChild(buttons);
  return card;
}

function renderStats(controller: AnnotationController): HTMLElement {
  const panel = el("div", "card stats");
  panel.appendChild(el("h2", "", "Progress"));
  const stats = controller.stats;
  if (!stats) {
    panel.appendChild(el("div", "muted", "loading stats..."));
    return panel;
  }
  panel.appendChild(
    el("div", "progress", `${stats.n_labeled} / ${stats.n_tasks} labeled`),
  );
  panel.appendChild(
    el(
      "div",
      "muted",
      `${stats.n_modified} of ${stats.corpus_size} pairs modified (${pct(stats.modified_ratio)})`,
    ),
  );
  if (stats.n_labeled === 0) {
    panel.appendChild(el("div", "muted", `${stats.n_pending} tasks pending`));
    return panel;
  }
  const table = el("table", "stats-table");
  const head = el("tr", "");
  const body = el("tr", "");
  for (const label of LABELS) {
    head.appendChild(el("th", "", LABEL_TITLES[label]));
    body.appendChild(el("td", "", pct(stats.fractions[label] ?? 0)));
  }
  head.appendChild(el("th", "", "Wrong annotations (lower bound)"));
  body.appendChild(el("td", "", pct(stats.wrong_annotations_lower_bound)));
  table.appendChild(head);
  table.appendChild(body);
  panel.appendChild(table);
  return panel;
}

function renderHistory(controller: AnnotationController): HTMLElement {
  const panel = el("div", "card history");
  panel.appendChild(el("h2", "", "History"));
  if (controller.history.length === 0) {
    panel.appendChild(el("div", "muted", "nothing labeled yet"));
    return panel;
  }
  for (const entry of controller.history) {
    const row = el("div", "history-row");
    row.appendChild(el("span", "history-pair", entry.task.pair_id));
    const select = document.createElement("select");
    for (const label of LABELS) {
      const option = document.createElement("option");
      option.value = label;
      option.textContent = LABEL_TITLES[label];
      option.selected = label === entry.label;
      select.appendChild(option);
    }
    select.addEventListener("change", () => {
      void controller.relabel(entry.task.task_id, select.value as Label);
    });
    row.appendChild(select);
    panel.appendChild(row);
  }
  return panel;
}

function render(root: HTMLElement, controller: AnnotationController): void {
  root.textContent = "";
  const header = el("header", "");
  header.appendChild(el("h1", "", "Annotation"));
  header.appendChild(el("span", "muted", `annotator: ${controller.annotator}`));
  root.appendChild(header);

  if (controller.lastError) {
    const banner = el("div", "banner error", `Service error: ${controller.lastError}`);
    const retry = el("button", "retry", "Retry");
    retry.addEventListener("click", () => void controller.retry());
    banner.appendChild(retry);
    root.appendChild(banner);
  }

  switch (controller.state) {
    case "loading":
      root.appendChild(el("div", "card", "loading..."));
      break;
    case "task":
      root.appendChild(renderTask(controller));
      break;
    case "done":
      root.appendChild(el("div", "card done", "All tasks labeled. Nothing left to do."));
      break;
    case "error":
      break;
  }

  root.appendChild(renderStats(controller));
  root.appendChild(renderHistory(controller));
}

function boot(): void {
  const params = new URLSearchParams(window.location.search);
  const base = params.get("api") ?? window.location.origin;
  const annotator = params.get("annotator") ?? "annotator-1";
  const token = params.get("token") ?? undefined;

  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app element");

  const client = new AnnoClient(base, token);
  const controller = new AnnotationController(client, annotator);
  controller.onChange = () => render(root, controller);

  document.addEventListener("keydown", (ev) => {
    const pending = controller.handleKey(ev.key, ev.target as KeyTarget | null);
    if (pending) ev.preventDefault();
  });

  void controller.start();
}

boot();
