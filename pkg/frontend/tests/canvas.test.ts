import { strict as assert } from 'node:assert';
import { test } from 'node:test';

import { QueryCanvas, emptyEvent, constraintLabel, modifierLabel } from '../src/canvas.js';
import type { QueryDoc } from '../src/types.js';

/**
 * Canonical form of the classic three-line query, captured verbatim from
 * the gateway's own serializer. The canvas must emit exactly this shape.
 */
const THREE_LINE_CANONICAL: QueryDoc = {
  name: null,
  lines: [
    {
      polarity: 'include',
      constraint: {
        variant: 'event',
        kind: 'diagnosis',
        codes: ['427.31'],
        code_system: null,
        text_keyword: null,
        doc_types: null,
        department: null,
        provider: null,
        drug_ingredient: null,
        drug_class: null,
        lab_comparison: null,
      },
      modifiers: { age_range: null, date_range: null, min_occurrences: 1 },
    },
    {
      polarity: 'include',
      constraint: {
        variant: 'event',
        kind: 'med_order',
        codes: null,
        code_system: null,
        text_keyword: null,
        doc_types: null,
        department: null,
        provider: null,
        drug_ingredient: 'warfarin',
        drug_class: null,
        lab_comparison: null,
      },
      modifiers: { age_range: null, date_range: null, min_occurrences: 1 },
    },
    {
      polarity: 'include',
      constraint: {
        variant: 'event',
        kind: 'lab',
        codes: ['INR'],
        code_system: null,
        text_keyword: null,
        doc_types: null,
        department: null,
        provider: null,
        drug_ingredient: null,
        drug_class: null,
        lab_comparison: { op: '>=', value: 4.0 },
      },
      modifiers: { age_range: null, date_range: null, min_occurrences: 1 },
    },
  ],
};

function buildThreeLineCanvas(): QueryCanvas {
  const canvas = new QueryCanvas();
  canvas.addLine({ variant: 'event', ...emptyEvent('diagnosis'), codes: ['427.31'] });
  canvas.addLine({ variant: 'event', ...emptyEvent('med_order'), drug_ingredient: 'warfarin' });
  canvas.addLine({
    variant: 'event',
    ...emptyEvent('lab'),
    codes: ['INR'],
    lab_comparison: { op: '>=', value: 4 },
  });
  return canvas;
}

test('canvas serializes the three-line query to the exact canonical document', () => {
  const canvas = buildThreeLineCanvas();
  assert.deepEqual(canvas.toCanonical(), THREE_LINE_CANONICAL);
});

test('canonical -> canvas -> canonical is lossless', () => {
  const canvas = QueryCanvas.fromCanonical(THREE_LINE_CANONICAL);
  assert.deepEqual(canvas.toCanonical(), THREE_LINE_CANONICAL);
  // once more through a JSON round trip, as the wire would carry it
  const wire = JSON.parse(JSON.stringify(canvas.toCanonical())) as QueryDoc;
  assert.deepEqual(QueryCanvas.fromCanonical(wire).toCanonical(), THREE_LINE_CANONICAL);
});

test('round trip preserves modifiers and polarity on every line', () => {
  const doc: QueryDoc = {
    name: 'complex',
    lines: [
      {
        polarity: 'exclude',
        constraint: { variant: 'biospecimen', available: false },
        modifiers: { age_range: [18, 65], date_range: ['2010-01-01', '2020-12-31'], min_occurrences: 3 },
      },
      {
        polarity: 'include',
        constraint: {
          variant: 'temporal_pair',
          first: { ...emptyEvent('diagnosis'), codes: ['427.31'] },
          second: { ...emptyEvent('med_order'), drug_ingredient: 'warfarin' },
          relation: { order: 'first_before_second', gap_days: [1, null] },
        },
        modifiers: { age_range: [40, null], date_range: null, min_occurrences: 1 },
      },
      {
        polarity: 'include',
        constraint: { variant: 'patient_list', mrns: ['M00001', 'M00002'] },
        modifiers: { age_range: null, date_range: null, min_occurrences: 1 },
      },
      {
        polarity: 'include',
        constraint: { variant: 'demographic', field: 'current_age', value: null, age_range: [65, null] },
        modifiers: { age_range: null, date_range: null, min_occurrences: 1 },
      },
      {
        polarity: 'include',
        constraint: { variant: 'saved_cohort', cohort_id: 'c0042' },
        modifiers: { age_range: null, date_range: null, min_occurrences: 1 },
      },
    ],
  };
  assert.deepEqual(QueryCanvas.fromCanonical(doc).toCanonical(), doc);
});

test('count strings are stored verbatim and never reformatted', () => {
  const canvas = buildThreeLineCanvas();
  canvas.applyCounts(['~ 102,020', '~ 41,685', '<10'], '~ 15,800');
  assert.equal(canvas.lines[0].countDisplay, '~ 102,020');
  assert.equal(canvas.lines[1].countDisplay, '~ 41,685');
  assert.equal(canvas.lines[2].countDisplay, '<10');
  assert.equal(canvas.combinedDisplay, '~ 15,800');
  assert.equal(canvas.dirty, false);
});

test('mutating the canvas marks it dirty and clears stale counts', () => {
  const canvas = buildThreeLineCanvas();
  canvas.applyCounts(['~ 10', '~ 20', '~ 30'], '~ 5,000');
  canvas.setPolarity(1, 'exclude');
  assert.equal(canvas.dirty, true);
  assert.equal(canvas.combinedDisplay, null);
  assert.ok(canvas.lines.every((line) => line.countDisplay === null));
});

test('diagnostics pin to the offending line by index', () => {
  const canvas = buildThreeLineCanvas();
  canvas.applyDiagnostics(["line 2: unknown drug ingredient 'unobtanium'"]);
  assert.equal(canvas.lines[0].error, null);
  assert.match(canvas.lines[1].error ?? '', /unobtanium/);
  assert.equal(canvas.lines[2].error, null);
});

test('row labels describe constraints and modifiers', () => {
  const canvas = buildThreeLineCanvas();
  assert.equal(constraintLabel(canvas.lines[0].constraint), 'Diagnosis of: 427.31');
  assert.equal(constraintLabel(canvas.lines[2].constraint), 'Lab result: INR, value >= 4');
  assert.equal(
    modifierLabel(canvas.lines[0].modifiers),
    'Age at event is: any age · Event date is: any date · Occurrence frequency is: one or more',
  );
});
