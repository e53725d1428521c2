/**
 * Wire types shared with the gateway: the canonical query document, chart
 * documents, approval rows, and endpoint payloads. Field names and null
 * conventions must match the server exactly.
 */

export type Polarity = 'include' | 'exclude';

export type EventKindName =
  | 'diagnosis'
  | 'procedure'
  | 'lab'
  | 'med_order'
  | 'encounter'
  | 'admission'
  | 'document'
  | 'flowsheet';

export type DemographicFieldName =
  | 'current_age'
  | 'gender'
  | 'race'
  | 'ethnicity'
  | 'language'
  | 'vital_status';

export type ComparisonOp = '<' | '<=' | '=' | '>=' | '>';

/** Inclusive integer range; null max means unbounded. */
export type IntRangeDoc = [number, number | null];

/** Inclusive ISO-date range. */
export type DateRangeDoc = [string, string];

export interface LabComparisonDoc {
  op: ComparisonOp;
  value: number;
}

export interface EventFields {
  kind: EventKindName;
  codes: string[] | null;
  code_system: string | null;
  text_keyword: string | null;
  doc_types: string[] | null;
  department: string | null;
  provider: string | null;
  drug_ingredient: string | null;
  drug_class: string | null;
  lab_comparison: LabComparisonDoc | null;
}

export type EventConstraintDoc = EventFields & { variant: 'event' };

export interface DemographicConstraintDoc {
  variant: 'demographic';
  field: DemographicFieldName;
  value: string | null;
  age_range: IntRangeDoc | null;
}

export interface TemporalRelationDoc {
  order: 'first_before_second' | 'second_before_first' | 'same_day';
  gap_days: IntRangeDoc | null;
}

export interface TemporalPairConstraintDoc {
  variant: 'temporal_pair';
  first: EventFields;
  second: EventFields;
  relation: TemporalRelationDoc;
}

export interface PatientListConstraintDoc {
  variant: 'patient_list';
  mrns: string[];
}

export interface SavedCohortConstraintDoc {
  variant: 'saved_cohort';
  cohort_id: string;
}

export interface BiospecimenConstraintDoc {
  variant: 'biospecimen';
  available: boolean;
}

export type ConstraintDoc =
  | EventConstraintDoc
  | DemographicConstraintDoc
  | TemporalPairConstraintDoc
  | PatientListConstraintDoc
  | SavedCohortConstraintDoc
  | BiospecimenConstraintDoc;

export interface ModifiersDoc {
  age_range: IntRangeDoc | null;
  date_range: DateRangeDoc | null;
  min_occurrences: number;
}

export interface LineDoc {
  polarity: Polarity;
  constraint: ConstraintDoc;
  modifiers: ModifiersDoc;
}

export interface QueryDoc {
  name: string | null;
  lines: LineDoc[];
}

// ---- endpoint payloads -----------------------------------------------

export interface EvalResponse {
  display: string;
  per_line: string[];
  dataset_version: number;
  exact?: number;
  members?: string[];
}

export interface SaveCohortResponse {
  cohort_id: string;
  study_id: string;
  name: string;
  display: string;
  dataset_version: number;
  auto_refresh: boolean;
  warnings: string[];
}

export interface CohortSummary {
  cohort_id: string;
  study_id: string;
  name: string;
  display: string;
  auto_refresh: boolean;
  created_by: string;
  created_at: string;
  static: boolean;
}

export interface ApprovalRowDoc {
  user_id: string;
  signed_dpa: boolean;
  approved_chart_review: boolean;
  named_on_irb: boolean;
  download_exempt: boolean;
  approved_phi_download: boolean;
}

export interface ChartDocumentDoc {
  patient_uid: string;
  header: Record<string, unknown>;
  sections: Record<string, Array<Record<string, unknown>>>;
}

export interface DownloadManifest {
  cohort_id: string;
  study_id: string;
  mode: 'identified' | 'scrubbed';
  member_count: number;
  generated_at: string;
  files: Array<{ name: string; rows: number }>;
  warnings: string[];
}

export const CHART_SECTION_ORDER = [
  'demographics',
  'encounters',
  'documents',
  'labs',
  'diagnoses',
  'procedures',
  'med_orders',
] as const;
