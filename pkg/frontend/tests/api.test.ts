import { strict as assert } from 'node:assert';
import { test } from 'node:test';

import { ApiClient, ApiError, USER_HEADER, type FetchLike, type ResponseLike } from '../src/api.js';

interface Call {
  url: string;
  method: string;
  headers: Record<string, string>;
  body?: string;
}

function fakeFetch(
  respond: (call: Call) => { status: number; body: unknown } | { status: number; text: string },
): { fetchFn: FetchLike; calls: Call[] } {
  const calls: Call[] = [];
  const fetchFn: FetchLike = async (url, init) => {
    const call: Call = { url, method: init.method, headers: init.headers, body: init.body };
    calls.push(call);
    const out = respond(call);
    const response: ResponseLike = {
      ok: out.status >= 200 && out.status < 300,
      status: out.status,
      json: async () => ('body' in out ? out.body : JSON.parse(out.text)),
      text: async () => ('text' in out ? out.text : JSON.stringify(out.body)),
    };
    return response;
  };
  return { fetchFn, calls };
}

test('every request carries the session identity header', async () => {
  const { fetchFn, calls } = fakeFetch(() => ({ status: 200, body: { cohorts: [] } }));
  const client = new ApiClient('http://gw', 'u_admin', fetchFn);
  await client.listCohorts();
  await client.complianceMatrix('P1').catch(() => undefined);
  assert.ok(calls.length >= 2);
  for (const call of calls) {
    assert.equal(call.headers[USER_HEADER], 'u_admin');
  }
});

test('constructing a client without an identity is impossible', () => {
  assert.throws(() => new ApiClient('http://gw', ''));
});

test('denial reasons surface verbatim, never masked', async () => {
  const { fetchFn } = fakeFetch(() => ({ status: 403, body: { error: 'no signed DPA' } }));
  const client = new ApiClient('http://gw', 'u_director', fetchFn);
  await assert.rejects(
    client.saveCohort({ studyId: 'P1', name: 'x', mrns: ['M00001'] }),
    (err: unknown) => {
      assert.ok(err instanceof ApiError);
      assert.equal(err.status, 403);
      assert.equal(err.reason, 'no signed DPA');
      return true;
    },
  );
});

test('validation diagnostics pass through untouched', async () => {
  const { fetchFn } = fakeFetch(() => ({
    status: 400,
    body: { error: 'query failed validation', diagnostics: ["line 1: unknown diagnosis code 'ZZZ'"] },
  }));
  const client = new ApiClient('http://gw', 'u_admin', fetchFn);
  await assert.rejects(
    client.evalQuery({ name: null, lines: [] }),
    (err: unknown) => {
      assert.ok(err instanceof ApiError);
      assert.deepEqual(err.diagnostics, ["line 1: unknown diagnosis code 'ZZZ'"]);
      return true;
    },
  );
});

test('eval posts the canonical document unchanged', async () => {
  const doc = { name: null, lines: [] };
  const { fetchFn, calls } = fakeFetch(() => ({
    status: 200,
    body: { display: '~ 15,800', per_line: [], dataset_version: 1 },
  }));
  const client = new ApiClient('http://gw', 'u_admin', fetchFn);
  const result = await client.evalQuery(doc, 'P1');
  assert.equal(result.display, '~ 15,800');
  const sent = JSON.parse(calls[0].body ?? '{}');
  assert.deepEqual(sent.query, doc);
  assert.equal(sent.study_id, 'P1');
  assert.equal(calls[0].url, 'http://gw/api/cohort/eval');
});

test('recruitment returns the raw delimited report', async () => {
  const { fetchFn } = fakeFetch(() => ({ status: 200, text: 'mrn,name\nM1,Pat One\n' }));
  const client = new ApiClient('http://gw', 'u_broker', fetchFn);
  const report = await client.recruitment('c0001');
  assert.equal(report.split('\n')[0], 'mrn,name');
});
