/**
 * Browser client: cohort builder canvas, chart review tabs, and the
 * download dialog. Pure client of the gateway; all evaluation, count
 * suppression, and compliance logic stays server-side.
 */

import { ApiClient, ApiError } from './api.js';
import {
  CanvasLine,
  QueryCanvas,
  constraintLabel,
  emptyEvent,
  emptyModifiers,
  modifierLabel,
} from './canvas.js';
import { CountCoalescer, runCount } from './counts.js';
import { approvalMarks, downloadControls } from './download.js';
import { CHART_SECTION_ORDER, ConstraintDoc, EventKindName } from './types.js';

const PALETTE: Array<{ group: string; items: Array<{ label: string; make: () => ConstraintDoc }> }> = [
  {
    group: 'DEMOGRAPHICS',
    items: [
      { label: 'Current Age', make: () => ({ variant: 'demographic', field: 'current_age', value: null, age_range: [18, null] }) },
      { label: 'Gender', make: () => ({ variant: 'demographic', field: 'gender', value: 'female', age_range: null }) },
      { label: 'Race', make: () => ({ variant: 'demographic', field: 'race', value: 'white', age_range: null }) },
      { label: 'Ethnicity', make: () => ({ variant: 'demographic', field: 'ethnicity', value: 'hispanic', age_range: null }) },
      { label: 'Language', make: () => ({ variant: 'demographic', field: 'language', value: 'english', age_range: null }) },
      { label: 'Vital Status', make: () => ({ variant: 'demographic', field: 'vital_status', value: 'alive', age_range: null }) },
    ],
  },
  {
    group: 'CLINICAL EVENTS',
    items: [
      { label: 'Diagnosis', make: () => eventWith('diagnosis', { codes: ['427.31'] }) },
      { label: 'Procedure', make: () => eventWith('procedure', { codes: ['93000'] }) },
      { label: 'Laboratory Test', make: () => eventWith('lab', { codes: ['INR'], lab_comparison: { op: '>=', value: 4 } }) },
      { label: 'Drug Ingredient', make: () => eventWith('med_order', { drug_ingredient: 'warfarin' }) },
      { label: 'Drug Class', make: () => eventWith('med_order', { drug_class: 'anticoagulant' }) },
      { label: 'Clinical Documents', make: () => eventWith('document', { text_keyword: 'fibrillation' }) },
      { label: 'Encounter', make: () => eventWith('encounter', {}) },
      { label: 'Admission', make: () => eventWith('admission', {}) },
      { label: 'Flowsheets', make: () => eventWith('flowsheet', { text_keyword: 'nursing' }) },
    ],
  },
  {
    group: 'TEMPORAL CONSTRAINTS',
    items: [
      {
        label: 'Pair of Events',
        make: () => ({
          variant: 'temporal_pair',
          first: { ...emptyEvent('diagnosis'), codes: ['427.31'] },
          second: { ...emptyEvent('med_order'), drug_ingredient: 'warfarin' },
          relation: { order: 'first_before_second', gap_days: [1, null] },
        }),
      },
    ],
  },
  {
    group: 'BIOSPECIMENS',
    items: [{ label: 'Specimen Available', make: () => ({ variant: 'biospecimen', available: true }) }],
  },
  {
    group: 'PATIENT LIST',
    items: [{ label: 'Saved Patient List', make: () => ({ variant: 'patient_list', mrns: [] }) }],
  },
];

function eventWith(kind: EventKindName, patch: Partial<ConstraintDoc & { variant: 'event' }>): ConstraintDoc {
  return { variant: 'event', ...emptyEvent(kind), ...patch } as ConstraintDoc;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

class App {
  private client: ApiClient;
  private canvas = new QueryCanvas();
  private coalescer = new CountCoalescer();
  private studyId: string;
  private currentCohort: string | null = null;

  constructor(private root: HTMLElement) {
    const params = new URLSearchParams(window.location.search);
    const userId = params.get('user') ?? 'u_admin';
    this.studyId = params.get('study') ?? 'P1';
    this.client = new ApiClient('', userId);
  }

  start(): void {
    this.render();
  }

  private banner(message: string, retry?: () => void): void {
    const zone = this.root.querySelector('.banner-zone')!;
    zone.textContent = '';
    const banner = el('div', 'banner', message);
    if (retry) {
      const button = el('button', 'retry', 'Retry');
      button.addEventListener('click', () => {
        zone.textContent = '';
        retry();
      });
      banner.appendChild(button);
    }
    zone.appendChild(banner);
  }

  private render(): void {
    this.root.textContent = '';
    this.root.appendChild(this.renderHeader());
    this.root.appendChild(el('div', 'banner-zone'));
    const main = el('div', 'main');
    main.appendChild(this.renderPalette());
    const work = el('div', 'work');
    work.appendChild(this.renderToolbar());
    work.appendChild(this.renderCanvas());
    work.appendChild(el('div', 'detail-zone'));
    main.appendChild(work);
    this.root.appendChild(main);
  }

  private renderHeader(): HTMLElement {
    const header = el('header');
    header.appendChild(el('h1', undefined, 'Cohort Discovery'));
    header.appendChild(el('span', 'who', `user: ${this.client.userId} · study: ${this.studyId}`));
    return header;
  }

  private renderPalette(): HTMLElement {
    const palette = el('aside', 'palette');
    for (const group of PALETTE) {
      palette.appendChild(el('h2', undefined, group.group));
      for (const item of group.items) {
        const button = el('button', 'palette-item', item.label);
        button.addEventListener('click', () => {
          this.canvas.addLine(item.make());
          this.refreshCanvas();
        });
        palette.appendChild(button);
      }
    }
    return palette;
  }

  private renderToolbar(): HTMLElement {
    const bar = el('div', 'toolbar');

    const count = el('button', 'tool count-btn', 'Count');
    count.addEventListener('click', () => void this.doCount());
    bar.appendChild(count);

    const save = el('button', 'tool', 'Save for Review');
    save.addEventListener('click', () => void this.doSave());
    bar.appendChild(save);

    const upload = el('button', 'tool', 'Upload Ids');
    upload.addEventListener('click', () => void this.doUploadIds());
    bar.appendChild(upload);

    const chart = el('button', 'tool', 'Go to Chart Review');
    chart.addEventListener('click', () => void this.doChartReview());
    bar.appendChild(chart);

    const download = el('button', 'tool', 'Download');
    download.addEventListener('click', () => void this.doDownloadDialog());
    bar.appendChild(download);

    return bar;
  }

  private refreshCanvas(): void {
    const holder = this.root.querySelector('.canvas')!;
    holder.replaceWith(this.renderCanvas());
    const countButton = this.root.querySelector<HTMLButtonElement>('.count-btn')!;
    countButton.disabled = this.canvas.isEmpty;
  }

  private renderCanvas(): HTMLElement {
    const holder = el('div', 'canvas');
    const title = (this.canvas.name ?? 'Untitled Cohort Query') + (this.canvas.dirty ? ' (modified)' : '');
    holder.appendChild(el('h2', undefined, title));
    this.canvas.lines.forEach((line, index) => {
      holder.appendChild(this.renderLine(line, index));
    });
    const combined = el('div', 'combined');
    combined.textContent = this.canvas.combinedDisplay === null
      ? 'Result: (press Count)'
      : `Result: ${this.canvas.combinedDisplay} patients`;
    holder.appendChild(combined);
    return holder;
  }

  private renderLine(line: CanvasLine, index: number): HTMLElement {
    const row = el('div', line.error ? 'line line-error' : 'line');
    const top = el('div', 'line-top');
    const polarity = el('button', 'polarity', line.polarity.toUpperCase());
    polarity.addEventListener('click', () => {
      this.canvas.setPolarity(index, line.polarity === 'include' ? 'exclude' : 'include');
      this.refreshCanvas();
    });
    top.appendChild(polarity);
    top.appendChild(el('span', 'label', constraintLabel(line.constraint)));
    const remove = el('button', 'remove', '×');
    remove.addEventListener('click', () => {
      this.canvas.removeLine(index);
      this.refreshCanvas();
    });
    top.appendChild(remove);
    row.appendChild(top);
    row.appendChild(el('div', 'mods', modifierLabel(line.modifiers)));
    if (line.error) {
      row.appendChild(el('div', 'error', line.error));
    }
    row.appendChild(
      el('div', 'count', line.countDisplay === null ? '' : `Result: ${line.countDisplay} patients`),
    );
    return row;
  }

  private async doCount(): Promise<void> {
    if (this.canvas.isEmpty) return;
    const outcome = await runCount(this.canvas, this.client, this.coalescer, this.studyId);
    if (outcome.kind === 'failed') {
      this.banner(`count failed: ${outcome.reason}`, () => void this.doCount());
      return;
    }
    this.refreshCanvas();
  }

  private async doSave(): Promise<void> {
    const name = window.prompt('Cohort name', 'untitled cohort');
    if (name === null) return;
    try {
      const saved = await this.client.saveCohort({
        studyId: this.studyId,
        name,
        query: this.canvas.toCanonical(),
      });
      this.currentCohort = saved.cohort_id;
      const messages = [`saved ${saved.cohort_id}: ${saved.display} patients`, ...saved.warnings];
      this.banner(messages.join(' · '));
    } catch (err) {
      // compliance denials surface with the server's reason, verbatim
      this.banner(err instanceof ApiError ? err.reason : String(err));
    }
  }

  private doUploadIds(): void {
    const zone = this.detailZone();
    const form = el('div', 'download-dialog');
    form.appendChild(el('h2', undefined, 'Upload Ids'));
    form.appendChild(el('p', undefined, 'Paste MRNs (comma or newline separated) or choose a file.'));
    const area = el('textarea');
    area.rows = 6;
    form.appendChild(area);
    const file = el('input');
    file.type = 'file';
    file.addEventListener('change', () => {
      const chosen = file.files?.[0];
      if (!chosen) return;
      void chosen.text().then((text) => {
        area.value = text;
      });
    });
    form.appendChild(file);
    const submit = el('button', 'tool', 'Create cohort');
    submit.addEventListener('click', () => void this.submitMrnList(area.value));
    form.appendChild(submit);
    zone.appendChild(form);
  }

  private async submitMrnList(raw: string): Promise<void> {
    const mrns = raw.split(/[\s,]+/).filter((m) => m.length > 0);
    if (mrns.length === 0) {
      this.banner('no MRNs supplied');
      return;
    }
    const name = window.prompt('Cohort name', 'uploaded list') ?? 'uploaded list';
    try {
      const saved = await this.client.saveCohort({ studyId: this.studyId, name, mrns });
      this.currentCohort = saved.cohort_id;
      // unresolved-MRN warnings surface exactly as the server reports them
      const messages = [`saved ${saved.cohort_id}: ${saved.display} patients`, ...saved.warnings];
      this.banner(messages.join(' · '));
    } catch (err) {
      this.banner(err instanceof ApiError ? err.reason : String(err));
    }
  }

  private detailZone(): Element {
    const zone = this.root.querySelector('.detail-zone')!;
    zone.textContent = '';
    return zone;
  }

  private async doChartReview(): Promise<void> {
    if (this.currentCohort === null) {
      this.banner('save a cohort first, then open chart review');
      return;
    }
    try {
      const { members } = await this.client.cohortMembers(this.currentCohort);
      const zone = this.detailZone();
      const view = el('div', 'chart');
      view.appendChild(el('h2', undefined, `Chart Review — cohort ${this.currentCohort}`));
      const roster = el('div', 'tabs');
      const body = el('div', 'tab-body', 'select a member');
      for (const member of members) {
        const entry = el('button', 'tab', member);
        entry.addEventListener('click', () => void this.openChart(member, body, view));
        roster.appendChild(entry);
      }
      view.appendChild(roster);
      view.appendChild(body);
      zone.appendChild(view);
    } catch (err) {
      this.banner(err instanceof ApiError ? err.reason : String(err));
    }
  }

  private async openChart(member: string, body: HTMLElement, view: HTMLElement): Promise<void> {
    try {
      const chart = await this.client.getChart(this.currentCohort!, member);
      const old = view.querySelector('.section-tabs');
      if (old) old.remove();
      const tabs = el('div', 'tabs section-tabs');
      for (const section of CHART_SECTION_ORDER) {
        const rows = chart.sections[section] ?? [];
        const tab = el('button', 'tab', `${section} (${rows.length})`);
        tab.addEventListener('click', () => {
          body.textContent = JSON.stringify(rows, null, 2);
        });
        tabs.appendChild(tab);
      }
      view.insertBefore(tabs, body);
      body.textContent = `chart for ${chart.patient_uid}: pick a section`;
    } catch (err) {
      this.banner(err instanceof ApiError ? err.reason : String(err));
    }
  }

  private async doDownloadDialog(): Promise<void> {
    if (this.currentCohort === null) {
      this.banner('save a cohort first, then request a download');
      return;
    }
    try {
      const matrix = await this.client.complianceMatrix(this.studyId);
      const controls = downloadControls(matrix.rows, this.client.userId);
      const zone = this.detailZone();
      const dialog = el('div', 'download-dialog');
      dialog.appendChild(el('h2', undefined, 'Download'));
      if (controls.row) {
        dialog.appendChild(el('div', 'marks', `approvals: ${approvalMarks(controls.row)}`));
      }

      const scrubbed = el('button', 'mode', 'Scrubbed download');
      scrubbed.disabled = !controls.scrubbedEnabled;
      const identified = el('button', 'mode', 'Identified download');
      identified.disabled = !controls.identifiedEnabled;
      if (!controls.identifiedEnabled && controls.identifiedReason) {
        dialog.appendChild(el('div', 'why-disabled', `identified disabled: ${controls.identifiedReason}`));
      }
      const request = (mode: 'identified' | 'scrubbed') => async () => {
        const dest = window.prompt('Destination path on the gateway host');
        if (!dest) return;
        try {
          const manifest = await this.client.download(this.currentCohort!, mode, dest);
          this.banner(`wrote ${manifest.files.length} files (${manifest.mode}) for ${manifest.member_count} patients`);
        } catch (err) {
          this.banner(err instanceof ApiError ? err.reason : String(err));
        }
      };
      scrubbed.addEventListener('click', () => void request('scrubbed')());
      identified.addEventListener('click', () => void request('identified')());
      dialog.appendChild(scrubbed);
      dialog.appendChild(identified);
      zone.appendChild(dialog);
    } catch (err) {
      this.banner(err instanceof ApiError ? err.reason : String(err));
    }
  }
}

if (typeof document !== 'undefined' && document.getElementById('app')) {
  new App(document.getElementById('app')!).start();
}
