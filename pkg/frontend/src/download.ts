/**
 * Download-dialog control state, derived from the user's five-boolean
 * approval row. The identified option is enabled only when the final
 * column (approved for identified download) is true; the dialog never
 * second-guesses the server's derivation.
 */

import type { ApprovalRowDoc } from './types.js';

export interface DownloadControls {
  row: ApprovalRowDoc | null;
  scrubbedEnabled: boolean;
  identifiedEnabled: boolean;
  identifiedReason: string | null;
}

export function downloadControls(rows: ApprovalRowDoc[], userId: string): DownloadControls {
  const row = rows.find((r) => r.user_id === userId) ?? null;
  if (row === null) {
    return {
      row: null,
      scrubbedEnabled: false,
      identifiedEnabled: false,
      identifiedReason: 'no approval row for this study',
    };
  }
  let reason: string | null = null;
  if (!row.approved_phi_download) {
    if (!row.approved_chart_review) {
      reason = row.signed_dpa
        ? 'protocol or its privacy attestation is not valid'
        : 'no signed privacy attestation';
    } else if (!row.named_on_irb) {
      reason = 'not named on the protocol personnel roster';
    } else {
      reason = 'no approved download exemption';
    }
  }
  return {
    row,
    scrubbedEnabled: row.approved_chart_review,
    identifiedEnabled: row.approved_phi_download,
    identifiedReason: reason,
  };
}

export function approvalMarks(row: ApprovalRowDoc): string {
  return [
    row.signed_dpa,
    row.approved_chart_review,
    row.named_on_irb,
    row.download_exempt,
    row.approved_phi_download,
  ]
    .map((v) => (v ? '✓' : '✗'))
    .join('');
}
