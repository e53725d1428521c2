"""Deterministic synthetic dataset generator.

Stands in for the nightly EMR feed: same (seed, n_patients, profile) always
produces the same dataset, byte-identical after serialization. Codes are
drawn from the bundled catalog so query fixtures have known ground truth.
"""

from __future__ import annotations

import random
from bisect import bisect_right
from dataclasses import dataclass, field
from datetime import date, timedelta
from itertools import accumulate

from .model import EventKind, EventRecord, Patient, SquareDataset, VitalStatus
from .vocab import (
    CATALOG,
    DEPARTMENTS,
    DOC_TEMPLATE_FILLER,
    ETHNICITIES,
    GENDERS,
    LANGUAGES,
    PROVIDERS,
    RACES,
    ROUTES,
    Catalog,
)

_FIRST_NAMES = (
    "Alice", "Benjamin", "Carla", "Devon", "Elena", "Frank", "Grace", "Hector",
    "Irene", "Jamal", "Katrin", "Leo", "Marisol", "Nadia", "Omar", "Priya",
    "Quentin", "Rosa", "Stefan", "Tamara", "Ulrich", "Vera", "Wendell", "Ximena",
    "Yusuf", "Zoe", "Arturo", "Bettina", "Casper", "Dolores",
)

_LAST_NAMES = (
    "Abernathy", "Bankole", "Castellanos", "Dmitriev", "Eriksson", "Fontaine",
    "Gutierrez", "Haverford", "Ibrahim", "Jankowski", "Kavanagh", "Lindqvist",
    "Montalvo", "Nakamura", "Okonkwo", "Petrakis", "Quispe", "Rantanen",
    "Sorensen", "Tavares", "Umarov", "Villanueva", "Whitfield", "Xiang",
    "Yilmaz", "Zielinski", "Arbuckle", "Beaumont", "Calloway", "Delacroix",
)


class ProfileError(ValueError):
    pass


@dataclass(frozen=True)
class GenProfile:
    events_per_patient: float = 45.0
    birth_year_min: int = 1930
    birth_year_max: int = 2018
    horizon: date = date(2024, 12, 31)
    deceased_rate: float = 0.08
    unknown_vital_rate: float = 0.02
    biobank_rate: float = 0.15
    kind_mix: dict[EventKind, float] = field(
        default_factory=lambda: {
            EventKind.DIAGNOSIS: 0.24,
            EventKind.LAB: 0.25,
            EventKind.MED_ORDER: 0.16,
            EventKind.ENCOUNTER: 0.14,
            EventKind.PROCEDURE: 0.08,
            EventKind.DOCUMENT: 0.07,
            EventKind.ADMISSION: 0.03,
            EventKind.FLOWSHEET: 0.03,
        }
    )

    @staticmethod
    def from_dict(raw: dict) -> "GenProfile":
        kwargs: dict = {}
        simple = {
            "events_per_patient": float, "birth_year_min": int, "birth_year_max": int,
            "deceased_rate": float, "unknown_vital_rate": float, "biobank_rate": float,
        }
        for key, value in raw.items():
            if key in simple:
                try:
                    kwargs[key] = simple[key](value)
                except (TypeError, ValueError) as exc:
                    raise ProfileError(f"profile field {key!r}: {exc}") from exc
            elif key == "horizon":
                try:
                    kwargs["horizon"] = date.fromisoformat(value)
                except (TypeError, ValueError) as exc:
                    raise ProfileError(f"profile field 'horizon': {exc}") from exc
            elif key == "kind_mix":
                try:
                    kwargs["kind_mix"] = {EventKind(k): float(v) for k, v in value.items()}
                except (TypeError, ValueError) as exc:
                    raise ProfileError(f"profile field 'kind_mix': {exc}") from exc
            else:
                raise ProfileError(f"unknown profile field {key!r}")
        profile = GenProfile(**kwargs)
        if profile.birth_year_min > profile.birth_year_max:
            raise ProfileError("birth_year_min exceeds birth_year_max")
        if profile.events_per_patient < 0:
            raise ProfileError("events_per_patient must be >= 0")
        return profile


class _WeightedPicker:
    """Cumulative-weight sampler over catalog entries; one bisect per draw."""

    def __init__(self, entries):
        self.entries = list(entries)
        self.cum = list(accumulate(e.weight for e in self.entries))
        self.total = self.cum[-1] if self.cum else 0.0

    def pick(self, rng: random.Random):
        return self.entries[bisect_right(self.cum, rng.random() * self.total)]


def generate_synthetic(
    seed: int,
    n_patients: int,
    profile: GenProfile | None = None,
    catalog: Catalog = CATALOG,
) -> SquareDataset:
    if n_patients < 0:
        raise ValueError("n_patients must be >= 0")
    profile = profile or GenProfile()
    rng = random.Random(seed)

    pickers = {kind: _WeightedPicker(catalog.entries(kind)) for kind in EventKind}
    kinds = list(profile.kind_mix)
    kind_cum = list(accumulate(profile.kind_mix[k] for k in kinds))
    kind_total = kind_cum[-1]

    horizon_ord = profile.horizon.toordinal()
    patients: list[Patient] = []
    events: dict[EventKind, list[EventRecord]] = {kind: [] for kind in EventKind}
    event_seq = 0

    for i in range(n_patients):
        birth = date(
            rng.randint(profile.birth_year_min, profile.birth_year_max),
            rng.randint(1, 12),
            rng.randint(1, 28),
        )
        roll = rng.random()
        if roll < profile.deceased_rate and birth.toordinal() + 365 < horizon_ord:
            death_ord = rng.randint(birth.toordinal() + 365, horizon_ord)
            death: date | None = date.fromordinal(death_ord)
            vital = VitalStatus.DECEASED
        elif roll < profile.deceased_rate + profile.unknown_vital_rate:
            death = None
            vital = VitalStatus.UNKNOWN
        else:
            death = None
            vital = VitalStatus.ALIVE

        patient = Patient(
            patient_uid=f"P{i + 1:06d}",
            mrn=f"M{i + 1:05d}",
            name=f"{rng.choice(_FIRST_NAMES)} {rng.choice(_LAST_NAMES)}",
            birth_date=birth,
            death_date=death,
            gender=rng.choice(GENDERS[:2]) if rng.random() < 0.96 else rng.choice(GENDERS[2:]),
            race=rng.choice(RACES),
            ethnicity=rng.choice(ETHNICITIES),
            language=rng.choice(LANGUAGES),
            vital_status=vital,
            biobank_specimen=rng.random() < profile.biobank_rate,
        )
        patients.append(patient)

        lo_ord = birth.toordinal()
        hi_ord = max(lo_ord, min(horizon_ord, death.toordinal()) if death else horizon_ord)
        n_events = max(0, int(rng.gauss(profile.events_per_patient, profile.events_per_patient * 0.4)))
        for _ in range(n_events):
            kind = kinds[bisect_right(kind_cum, rng.random() * kind_total)]
            entry = pickers[kind].pick(rng)
            event_seq += 1
            when = date.fromordinal(rng.randint(lo_ord, hi_ord))
            extra: dict = {}
            if kind in (EventKind.LAB, EventKind.FLOWSHEET):
                extra["numeric_value"] = round(rng.uniform(entry.low, entry.high), 2)
                extra["unit"] = entry.unit
            elif kind is EventKind.MED_ORDER:
                extra["drug_ingredient"] = entry.ingredient
                extra["drug_class"] = entry.drug_class
                extra["route"] = rng.choice(ROUTES)
            elif kind is EventKind.ENCOUNTER:
                extra["department"] = rng.choice(DEPARTMENTS)
                extra["provider"] = rng.choice(PROVIDERS)
            elif kind is EventKind.ADMISSION:
                extra["department"] = rng.choice(DEPARTMENTS)
                extra["discharge_date"] = when + timedelta(days=rng.randint(0, 30))
            elif kind is EventKind.DOCUMENT:
                extra["doc_type"] = entry.code
                extra["text"] = _document_text(rng, catalog)

            events[kind].append(
                EventRecord(
                    event_id=f"E{event_seq:08d}",
                    patient_uid=patient.patient_uid,
                    kind=kind,
                    code_system=entry.code_system,
                    code=entry.code,
                    display=entry.display,
                    event_date=when,
                    **extra,
                )
            )

    return SquareDataset(
        patients=tuple(patients),
        events={kind: tuple(rows) for kind, rows in events.items()},
        dataset_version=1,
        provenance=f"synthetic seed={seed} n_patients={n_patients}",
        build_date=profile.horizon + timedelta(days=1),
    )


def _document_text(rng: random.Random, catalog: Catalog) -> str:
    """Template sentences salted with catalog terms, so keyword search over
    documents has known ground truth."""
    parts = [rng.choice(DOC_TEMPLATE_FILLER)]
    for _ in range(rng.randint(1, 3)):
        source = rng.choice((EventKind.DIAGNOSIS, EventKind.MED_ORDER, EventKind.PROCEDURE))
        entry = catalog.entries(source)[rng.randrange(len(catalog.entries(source)))]
        parts.append(f"assessment notes {entry.display}")
    parts.append(rng.choice(DOC_TEMPLATE_FILLER))
    return ". ".join(parts) + "."
