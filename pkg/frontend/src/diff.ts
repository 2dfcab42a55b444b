// Diff presentation. The service's diff_spans are the single source of
// truth: this module never recomputes an alignment, it only renders the
// segments it is given. Deleted text is struck through, inserted text is
// bold, and a replacement shows both.

import type { DiffSegment } from "./api.js";

export interface RenderedSegment {
  op: DiffSegment["op"];
  original: string;
  modified: string;
  html: string;
}

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Concatenating the original halves of the segments must rebuild the
 * original target string byte for byte. */
export function concatOriginal(spans: readonly DiffSegment[]): string {
  return spans.map((s) => s.original).join("");
}

/** Same guarantee for the modified target. */
export function concatModified(spans: readonly DiffSegment[]): string {
  return spans.map((s) => s.modified).join("");
}

function segmentHtml(span: DiffSegment): string {
  if (span.op === "equal") return escapeHtml(span.original);
  const del = span.original ? `<del class="diff-del">${escapeHtml(span.original)}</del>` : "";
  const ins = span.modified ? `<ins class="diff-ins">${escapeHtml(span.modified)}</ins>` : "";
  return del + ins;
}

/** One rendered segment per diff span, in order; nothing merged or dropped. */
export function renderSegments(spans: readonly DiffSegment[]): RenderedSegment[] {
  return spans.map((span) => ({
    op: span.op,
    original: span.original,
    modified: span.modified,
    html: segmentHtml(span),
  }));
}

export function diffHtml(spans: readonly DiffSegment[]): string {
  return renderSegments(spans)
    .map((s) => s.html)
    .join("");
}
