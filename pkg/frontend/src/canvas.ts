/**
 * The query canvas: an ordered stack of visual constraint rows that
 * serializes to the canonical query document and back without loss.
 *
 * Counts on the canvas are opaque server strings; the client never
 * formats or recomputes a number itself.
 */

import type {
  ConstraintDoc,
  EventFields,
  IntRangeDoc,
  LineDoc,
  ModifiersDoc,
  Polarity,
  QueryDoc,
} from './types.js';

export interface CanvasLine {
  polarity: Polarity;
  constraint: ConstraintDoc;
  modifiers: ModifiersDoc;
  /** verbatim display_count string from the last server eval, if any */
  countDisplay: string | null;
  /** server-side validation diagnostic pinned to this row, if any */
  error: string | null;
}

export function emptyModifiers(): ModifiersDoc {
  return { age_range: null, date_range: null, min_occurrences: 1 };
}

export function emptyEvent(kind: EventFields['kind']): EventFields {
  return {
    kind,
    codes: null,
    code_system: null,
    text_keyword: null,
    doc_types: null,
    department: null,
    provider: null,
    drug_ingredient: null,
    drug_class: null,
    lab_comparison: null,
  };
}

export class QueryCanvas {
  lines: CanvasLine[] = [];
  name: string | null = null;
  combinedDisplay: string | null = null;
  dirty = false;

  addLine(constraint: ConstraintDoc, polarity: Polarity = 'include', modifiers?: ModifiersDoc): CanvasLine {
    const line: CanvasLine = {
      polarity,
      constraint,
      modifiers: modifiers ?? emptyModifiers(),
      countDisplay: null,
      error: null,
    };
    this.lines.push(line);
    this.markDirty();
    return line;
  }

  removeLine(index: number): void {
    this.lines.splice(index, 1);
    this.markDirty();
  }

  setPolarity(index: number, polarity: Polarity): void {
    this.lines[index].polarity = polarity;
    this.markDirty();
  }

  setModifiers(index: number, modifiers: ModifiersDoc): void {
    this.lines[index].modifiers = modifiers;
    this.markDirty();
  }

  markDirty(): void {
    this.dirty = true;
    this.combinedDisplay = null;
    for (const line of this.lines) {
      line.countDisplay = null;
      line.error = null;
    }
  }

  get isEmpty(): boolean {
    return this.lines.length === 0;
  }

  /** Serialize to the canonical document the gateway accepts. */
  toCanonical(): QueryDoc {
    return {
      name: this.name,
      lines: this.lines.map((line): LineDoc => ({
        polarity: line.polarity,
        constraint: structuredClone(line.constraint),
        modifiers: structuredClone(line.modifiers),
      })),
    };
  }

  static fromCanonical(doc: QueryDoc): QueryCanvas {
    const canvas = new QueryCanvas();
    canvas.name = doc.name ?? null;
    for (const line of doc.lines) {
      canvas.lines.push({
        polarity: line.polarity,
        constraint: structuredClone(line.constraint),
        modifiers: structuredClone(line.modifiers ?? emptyModifiers()),
        countDisplay: null,
        error: null,
      });
    }
    canvas.dirty = false;
    return canvas;
  }

  /** Record server count strings verbatim; clears the dirty flag. */
  applyCounts(perLine: string[], combined: string): void {
    perLine.forEach((display, i) => {
      if (i < this.lines.length) {
        this.lines[i].countDisplay = display;
      }
    });
    this.combinedDisplay = combined;
    this.dirty = false;
  }

  /** Pin server validation diagnostics like "line 2: unknown code" to rows. */
  applyDiagnostics(diagnostics: string[]): void {
    for (const diagnostic of diagnostics) {
      const match = /^line (\d+): (.*)$/.exec(diagnostic);
      if (match) {
        const index = Number(match[1]) - 1;
        if (index >= 0 && index < this.lines.length) {
          const existing = this.lines[index].error;
          this.lines[index].error = existing ? `${existing}; ${match[2]}` : match[2];
          continue;
        }
      }
      // diagnostics without a line anchor attach to the first row
      if (this.lines.length > 0 && !match) {
        const first = this.lines[0];
        first.error = first.error ? `${first.error}; ${diagnostic}` : diagnostic;
      }
    }
  }
}

function rangeLabel(range: IntRangeDoc | null, unit: string): string {
  if (range === null) return `any ${unit}`;
  const [min, max] = range;
  if (max === null) return `${min}+ ${unit}`;
  if (max === min) return `${min} ${unit}`;
  return `${min}-${max} ${unit}`;
}

/** Human-readable row label, in the spirit of "Diagnosis of: ...". */
export function constraintLabel(constraint: ConstraintDoc): string {
  switch (constraint.variant) {
    case 'event': {
      const kindLabel: Record<string, string> = {
        diagnosis: 'Diagnosis of',
        procedure: 'Procedure',
        lab: 'Lab result',
        med_order: 'Drug order',
        encounter: 'Encounter',
        admission: 'Admission',
        document: 'Clinical document',
        flowsheet: 'Flowsheet entry',
      };
      const parts: string[] = [];
      if (constraint.codes?.length) parts.push(constraint.codes.join(', '));
      if (constraint.drug_ingredient) parts.push(`ingredient ${constraint.drug_ingredient}`);
      if (constraint.drug_class) parts.push(`class ${constraint.drug_class}`);
      if (constraint.doc_types?.length) parts.push(`type ${constraint.doc_types.join('/')}`);
      if (constraint.text_keyword) parts.push(`keyword "${constraint.text_keyword}"`);
      if (constraint.department) parts.push(`dept ${constraint.department}`);
      if (constraint.provider) parts.push(`provider ${constraint.provider}`);
      if (constraint.lab_comparison) {
        parts.push(`value ${constraint.lab_comparison.op} ${constraint.lab_comparison.value}`);
      }
      return `${kindLabel[constraint.kind]}: ${parts.length ? parts.join(', ') : 'any'}`;
    }
    case 'demographic':
      if (constraint.field === 'current_age') {
        return `Current age: ${rangeLabel(constraint.age_range, 'years')}`;
      }
      return `${constraint.field.replace('_', ' ')}: ${constraint.value}`;
    case 'temporal_pair': {
      const a = constraintLabel({ variant: 'event', ...constraint.first });
      const b = constraintLabel({ variant: 'event', ...constraint.second });
      if (constraint.relation.order === 'same_day') return `${a} SAME DAY AS ${b}`;
      const gap = rangeLabel(constraint.relation.gap_days, 'days');
      const word = constraint.relation.order === 'first_before_second' ? 'BEFORE' : 'AFTER';
      return `${a} ${word} (${gap}) ${b}`;
    }
    case 'patient_list':
      return `Patient list: ${constraint.mrns.length} MRNs`;
    case 'saved_cohort':
      return `Saved cohort: ${constraint.cohort_id}`;
    case 'biospecimen':
      return `Biospecimen available: ${constraint.available ? 'yes' : 'no'}`;
  }
}

export function modifierLabel(modifiers: ModifiersDoc): string {
  const age = modifiers.age_range === null
    ? 'Age at event is: any age'
    : `Age at event is: ${rangeLabel(modifiers.age_range, 'years')}`;
  const dates = modifiers.date_range === null
    ? 'Event date is: any date'
    : `Event date is: ${modifiers.date_range[0]} to ${modifiers.date_range[1]}`;
  const freq = modifiers.min_occurrences === 1
    ? 'Occurrence frequency is: one or more'
    : `Occurrence frequency is: ${modifiers.min_occurrences} or more`;
  return `${age} · ${dates} · ${freq}`;
}
