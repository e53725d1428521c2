/**
 * Typed client for the gateway routes. Every request carries the session
 * identity header; denial reasons from the server surface verbatim.
 */

import type {
  ApprovalRowDoc,
  ChartDocumentDoc,
  CohortSummary,
  DownloadManifest,
  EvalResponse,
  QueryDoc,
  SaveCohortResponse,
} from './types.js';

export const USER_HEADER = 'X-User-Id';

export interface ResponseLike {
  ok: boolean;
  status: number;
  json(): Promise<unknown>;
  text(): Promise<string>;
}

export type FetchLike = (url: string, init: {
  method: string;
  headers: Record<string, string>;
  body?: string;
}) => Promise<ResponseLike>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    /** the server's reason string, never rephrased */
    readonly reason: string,
    readonly diagnostics: string[] = [],
  ) {
    super(reason);
  }
}

interface ErrorBody {
  error?: string;
  diagnostics?: string[];
}

export class ApiClient {
  constructor(
    readonly baseUrl: string,
    readonly userId: string,
    private readonly fetchFn: FetchLike = (url, init) => globalThis.fetch(url, init),
  ) {
    if (!userId) {
      throw new Error('a session identity is required before calling any endpoint');
    }
  }

  private async request(method: string, path: string, body?: unknown): Promise<ResponseLike> {
    const headers: Record<string, string> = { [USER_HEADER]: this.userId };
    let encoded: string | undefined;
    if (body !== undefined) {
      headers['Content-Type'] = 'application/json';
      encoded = JSON.stringify(body);
    }
    const response = await this.fetchFn(this.baseUrl + path, { method, headers, body: encoded });
    if (!response.ok) {
      let parsed: ErrorBody = {};
      try {
        parsed = (await response.json()) as ErrorBody;
      } catch {
        // non-JSON error body; fall through to the status line
      }
      throw new ApiError(
        response.status,
        parsed.error ?? `request failed with status ${response.status}`,
        parsed.diagnostics ?? [],
      );
    }
    return response;
  }

  private async json<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.request(method, path, body);
    return (await response.json()) as T;
  }

  evalQuery(query: QueryDoc, studyId?: string): Promise<EvalResponse> {
    return this.json('POST', '/api/cohort/eval', { query, study_id: studyId ?? null });
  }

  saveCohort(args: {
    studyId: string;
    name: string;
    query?: QueryDoc;
    mrns?: string[];
    autoRefresh?: boolean;
  }): Promise<SaveCohortResponse> {
    return this.json('POST', '/api/cohort/save', {
      study_id: args.studyId,
      name: args.name,
      query: args.query,
      mrns: args.mrns,
      auto_refresh: args.autoRefresh ?? false,
    });
  }

  listCohorts(): Promise<{ cohorts: CohortSummary[] }> {
    return this.json('GET', '/api/cohort/list');
  }

  cohortMembers(cohortId: string): Promise<{ members: string[] }> {
    return this.json('GET', `/api/cohort/${cohortId}/members`);
  }

  getChart(cohortId: string, memberRef: string): Promise<ChartDocumentDoc> {
    return this.json('GET', `/api/cohort/${cohortId}/chart/${memberRef}`);
  }

  complianceMatrix(protocolId: string): Promise<{ rows: ApprovalRowDoc[] }> {
    return this.json('GET', `/api/compliance/matrix?protocol=${encodeURIComponent(protocolId)}`);
  }

  download(cohortId: string, mode: 'identified' | 'scrubbed', dest: string): Promise<DownloadManifest> {
    return this.json('POST', `/api/cohort/${cohortId}/download`, { mode, dest });
  }

  async recruitment(cohortId: string): Promise<string> {
    const response = await this.request('POST', `/api/cohort/${cohortId}/recruitment`, {});
    return response.text();
  }
}
