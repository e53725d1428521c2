/**
 * Live-count plumbing. Concurrent count requests are coalesced: responses
 * apply to the canvas only if no newer request was issued meanwhile, so a
 * slow early response can never overwrite a fresh one.
 */

import { ApiClient, ApiError } from './api.js';
import type { QueryCanvas } from './canvas.js';

export class CountCoalescer {
  private latest = 0;

  begin(): number {
    return ++this.latest;
  }

  isCurrent(ticket: number): boolean {
    return ticket === this.latest;
  }
}

export type CountOutcome =
  | { kind: 'applied'; display: string }
  | { kind: 'stale' }
  | { kind: 'invalid'; diagnostics: string[] }
  | { kind: 'failed'; reason: string };

/** Run one count round-trip; the canvas only ever shows server strings. */
export async function runCount(
  canvas: QueryCanvas,
  client: ApiClient,
  coalescer: CountCoalescer,
  studyId?: string,
): Promise<CountOutcome> {
  if (canvas.isEmpty) {
    throw new Error('count requires at least one constraint line');
  }
  const ticket = coalescer.begin();
  try {
    const result = await client.evalQuery(canvas.toCanonical(), studyId);
    if (!coalescer.isCurrent(ticket)) {
      return { kind: 'stale' };
    }
    canvas.applyCounts(result.per_line, result.display);
    return { kind: 'applied', display: result.display };
  } catch (err) {
    if (!coalescer.isCurrent(ticket)) {
      return { kind: 'stale' };
    }
    if (err instanceof ApiError && err.diagnostics.length > 0) {
      canvas.applyDiagnostics(err.diagnostics);
      return { kind: 'invalid', diagnostics: err.diagnostics };
    }
    return { kind: 'failed', reason: err instanceof Error ? err.message : String(err) };
  }
}
