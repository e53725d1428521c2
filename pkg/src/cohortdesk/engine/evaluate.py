"""Query evaluation over an indexed dataset.

Each line yields the set of patients satisfying its constraint under its
modifiers; the query combines include lines by intersection and subtracts
exclude lines. Per-line counts are marginal: every line is evaluated
independently of the others.
"""

from __future__ import annotations

from bisect import bisect_left, bisect_right
from collections import Counter
from dataclasses import dataclass
from datetime import date
from typing import Callable

from ..cohortql.ast import (
    Biospecimen,
    CohortQuery,
    ConstraintLine,
    Demographic,
    DemographicField,
    Event,
    Modifiers,
    PatientList,
    Polarity,
    SavedCohortRef,
    TemporalOrder,
    TemporalPair,
)
from ..cohortql.printer import print_constraint
from ..dates import anniversary
from ..squaremodel.model import SquareDataset
from .display import display_count
from .index import FAR_FUTURE_ORD, DatasetIndex, KindColumns

CohortResolver = Callable[[str], frozenset[str] | None]


class EngineError(Exception):
    pass


class InvalidQueryError(EngineError):
    pass


class UnresolvedCohortError(EngineError):
    def __init__(self, cohort_id: str):
        self.cohort_id = cohort_id
        super().__init__(f"saved cohort {cohort_id!r} does not exist")


@dataclass(frozen=True)
class PatientSet:
    members: frozenset[str]
    dataset_version: int

    def __len__(self) -> int:
        return len(self.members)


class Engine:
    """Evaluator bound to one immutable dataset snapshot.

    reference_date anchors current_age demographics; it defaults to the
    dataset build date so runs are reproducible.
    """

    def __init__(
        self,
        ds: SquareDataset,
        reference_date: date | None = None,
        cohort_resolver: CohortResolver | None = None,
    ):
        self.ds = ds
        self.reference_date = reference_date or ds.build_date
        self.cohort_resolver = cohort_resolver
        self.index = DatasetIndex(ds)

    # ---- public API ----------------------------------------------------

    def eval_query(self, query: CohortQuery) -> PatientSet:
        include_sets: list[frozenset[str]] = []
        exclude_sets: list[frozenset[str]] = []
        for line in query.lines:
            target = include_sets if line.polarity is Polarity.INCLUDE else exclude_sets
            target.append(self.eval_line(line).members)
        if not include_sets:
            raise InvalidQueryError("query has no include lines")
        result = frozenset.intersection(*include_sets)
        for excluded in exclude_sets:
            result -= excluded
        return PatientSet(members=result, dataset_version=self.ds.dataset_version)

    def eval_line(self, line: ConstraintLine) -> PatientSet:
        members = self._eval_constraint(line.constraint, line.modifiers)
        return PatientSet(members=frozenset(members), dataset_version=self.ds.dataset_version)

    def eval_temporal_pair(self, pair: TemporalPair, modifiers: Modifiers | None = None) -> PatientSet:
        members = self._eval_pair(pair, modifiers or Modifiers())
        return PatientSet(members=frozenset(members), dataset_version=self.ds.dataset_version)

    def explain(self, query: CohortQuery) -> str:
        out = [
            f"plan for dataset version {self.ds.dataset_version} "
            f"(reference date {self.reference_date.isoformat()})"
        ]
        include_ids: list[int] = []
        exclude_ids: list[int] = []
        include_sets: list[frozenset[str]] = []
        exclude_sets: list[frozenset[str]] = []
        for i, line in enumerate(query.lines, start=1):
            result = self.eval_line(line)
            polarity = line.polarity.value
            mods = []
            if line.modifiers.age_range:
                mods.append("age filter")
            if line.modifiers.date_range:
                mods.append("date filter")
            if line.modifiers.min_occurrences > 1:
                mods.append(f"min {line.modifiers.min_occurrences} occurrences")
            suffix = f" [{', '.join(mods)}]" if mods else ""
            out.append(
                f"  line {i} {polarity}: {print_constraint(line.constraint)}{suffix}"
                f" -> {len(result):,} patients"
            )
            if line.polarity is Polarity.INCLUDE:
                include_ids.append(i)
                include_sets.append(result.members)
            else:
                exclude_ids.append(i)
                exclude_sets.append(result.members)
        combined = frozenset.intersection(*include_sets) if include_sets else frozenset()
        out.append(
            "combine: intersect include line"
            f"{'s' if len(include_ids) != 1 else ''} {', '.join(map(str, include_ids)) or '-'}"
            f" -> {len(combined):,} patients"
        )
        for line_id, excluded in zip(exclude_ids, exclude_sets):
            combined -= excluded
            out.append(f"subtract exclude line {line_id} -> {len(combined):,} patients")
        out.append("note: per-line counts are marginal (each line evaluated independently)")
        return "\n".join(out)

    def display_result(self, query: CohortQuery, threshold: int = 10) -> str:
        return display_count(len(self.eval_query(query)), threshold)

    # ---- constraint dispatch --------------------------------------------

    def _eval_constraint(self, constraint, modifiers: Modifiers) -> set[str]:
        idx = self.index
        if isinstance(constraint, Event):
            counts = self._event_counts(constraint, modifiers)
            need = modifiers.min_occurrences
            uids = idx.uids
            return {uids[pid] for pid, c in counts.items() if c >= need}
        if isinstance(constraint, TemporalPair):
            return self._eval_pair(constraint, modifiers)
        if isinstance(constraint, Demographic):
            return self._eval_demographic(constraint)
        if isinstance(constraint, PatientList):
            mrn_to_uid = idx.mrn_to_uid
            return {mrn_to_uid[m] for m in constraint.mrns if m in mrn_to_uid}
        if isinstance(constraint, SavedCohortRef):
            if self.cohort_resolver is None:
                raise UnresolvedCohortError(constraint.cohort_id)
            members = self.cohort_resolver(constraint.cohort_id)
            if members is None:
                raise UnresolvedCohortError(constraint.cohort_id)
            return set(members) & set(idx.uids)
        if isinstance(constraint, Biospecimen):
            return {
                p.patient_uid for p in self.ds.patients if p.biobank_specimen == constraint.available
            }
        raise EngineError(f"unknown constraint type {type(constraint).__name__}")

    def _eval_demographic(self, d: Demographic) -> set[str]:
        patients = self.ds.patients
        if d.field is DemographicField.CURRENT_AGE:
            ages = self.index.ages_at(self.reference_date)
            rng = d.age_range
            return {p.patient_uid for p, age in zip(patients, ages) if rng.contains(age)}
        if d.field is DemographicField.VITAL_STATUS:
            want = d.value
            return {p.patient_uid for p in patients if p.vital_status.value == want}
        getter = {
            DemographicField.GENDER: lambda p: p.gender,
            DemographicField.RACE: lambda p: p.race,
            DemographicField.ETHNICITY: lambda p: p.ethnicity,
            DemographicField.LANGUAGE: lambda p: p.language,
        }[d.field]
        want = d.value
        return {p.patient_uid for p in patients if getter(p) == want}

    # ---- event scanning -------------------------------------------------

    def _date_window(self, modifiers: Modifiers) -> tuple[int, int]:
        if modifiers.date_range is None:
            return 0, FAR_FUTURE_ORD
        return modifiers.date_range.start.toordinal(), modifiers.date_range.end.toordinal()

    def _age_windows(self, modifiers: Modifiers) -> tuple[list[int], list[int]] | None:
        """Per-patient ordinal-date interval equivalent to the age filter."""
        rng = modifiers.age_range
        if rng is None:
            return None
        lo = [anniversary(b, rng.min).toordinal() for b in self.index.birth]
        if rng.max is None:
            hi = [FAR_FUTURE_ORD] * len(lo)
        else:
            hi = [anniversary(b, rng.max + 1).toordinal() - 1 for b in self.index.birth]
        return lo, hi

    def _candidate_rows(self, cols: KindColumns, ev: Event):
        """Rows selected by the most selective indexed predicate; remaining
        predicates are re-checked during the scan."""
        if ev.codes:
            rows: list[int] = []
            for code in ev.codes:
                rows.extend(cols.by_code.get(code, ()))
            return rows
        if ev.drug_ingredient is not None:
            return cols.by_ingredient.get(ev.drug_ingredient, [])
        if ev.drug_class is not None:
            return cols.by_class.get(ev.drug_class, [])
        if ev.doc_types:
            rows = []
            for dt in ev.doc_types:
                rows.extend(cols.by_doc_type.get(dt, ()))
            return rows
        if ev.text_keyword is not None:
            return cols.by_token.get(ev.text_keyword.lower(), [])
        if ev.department is not None:
            return cols.by_department.get(ev.department, [])
        if ev.provider is not None:
            return cols.by_provider.get(ev.provider, [])
        return range(cols.row_count())

    def _event_scan(self, ev: Event, modifiers: Modifiers, collect_dates: bool):
        """Count qualifying rows per patient; optionally keep their dates."""
        cols = self.index.kinds[ev.kind]
        rows = self._candidate_rows(cols, ev)
        date_lo, date_hi = self._date_window(modifiers)
        age_windows = self._age_windows(modifiers)

        pid_col = cols.pid
        date_col = cols.date_ord
        code_set = set(ev.codes) if ev.codes else None
        system = ev.code_system
        system_col = cols.code_system
        code_col = cols.code
        ingredient, ingredient_col = ev.drug_ingredient, cols.ingredient
        drug_class, class_col = ev.drug_class, cols.drug_class
        dept, dept_col = ev.department, cols.department
        provider, provider_col = ev.provider, cols.provider
        doctype_set = set(ev.doc_types) if ev.doc_types else None
        doctype_col = cols.doc_type
        keyword = ev.text_keyword.lower() if ev.text_keyword is not None else None
        token_col = cols.tokens
        cmp = ev.lab_comparison
        numeric_col = cols.numeric

        counts: Counter[int] = Counter()
        dates: dict[int, list[int]] = {}
        age_lo, age_hi = age_windows if age_windows else (None, None)

        for r in rows:
            d = date_col[r]
            if d < date_lo or d > date_hi:
                continue
            pid = pid_col[r]
            if age_lo is not None and (d < age_lo[pid] or d > age_hi[pid]):
                continue
            if code_set is not None and code_col[r] not in code_set:
                continue
            if system is not None and system_col[r] != system:
                continue
            if ingredient is not None and ingredient_col[r] != ingredient:
                continue
            if drug_class is not None and class_col[r] != drug_class:
                continue
            if dept is not None and dept_col[r] != dept:
                continue
            if provider is not None and provider_col[r] != provider:
                continue
            if doctype_set is not None and doctype_col[r] not in doctype_set:
                continue
            if keyword is not None:
                toks = token_col[r]
                if toks is None or keyword not in toks:
                    continue
            if cmp is not None:
                value = numeric_col[r]
                if value is None or not cmp.test(value):
                    continue
            counts[pid] += 1
            if collect_dates:
                dates.setdefault(pid, []).append(d)
        return counts, dates

    def _event_counts(self, ev: Event, modifiers: Modifiers) -> Counter:
        counts, _ = self._event_scan(ev, modifiers, collect_dates=False)
        return counts

    # ---- temporal pairs ---------------------------------------------------

    def _eval_pair(self, pair: TemporalPair, modifiers: Modifiers) -> set[str]:
        _, first_dates = self._event_scan(pair.first, modifiers, collect_dates=True)
        _, second_dates = self._event_scan(pair.second, modifiers, collect_dates=True)
        relation = pair.relation
        need = modifiers.min_occurrences
        uids = self.index.uids
        result: set[str] = set()

        if relation.order is TemporalOrder.SAME_DAY:
            for pid, d1s in first_dates.items():
                d2s = second_dates.get(pid)
                if not d2s:
                    continue
                c2 = Counter(d2s)
                pairs = sum(c2.get(d, 0) for d in d1s)
                if pairs >= need:
                    result.add(uids[pid])
            return result

        # first_before_second: date(e2) - date(e1) in gap
        # second_before_first: date(e1) - date(e2) in gap
        gap = relation.gap_days
        gmin = gap.min
        gmax = gap.max if gap.max is not None else FAR_FUTURE_ORD
        forward = relation.order is TemporalOrder.FIRST_BEFORE_SECOND
        for pid, d1s in first_dates.items():
            d2s = second_dates.get(pid)
            if not d2s:
                continue
            d2s = sorted(d2s)
            pairs = 0
            for d1 in d1s:
                if forward:
                    lo, hi = d1 + gmin, d1 + gmax
                else:
                    lo, hi = d1 - gmax, d1 - gmin
                pairs += bisect_right(d2s, hi) - bisect_left(d2s, lo)
                if pairs >= need:
                    break
            if pairs >= need:
                result.add(uids[pid])
        return result
