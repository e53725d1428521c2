"""Bundled synthetic vocabulary catalog.

Small enough to eyeball, large enough to exercise cross-system code search.
Diagnosis codes are split across two coexisting code systems; drugs carry
ingredient and therapeutic-class mappings; weights drive synthetic sampling
(normalized per kind at load).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .model import EventKind


@dataclass(frozen=True)
class CodeEntry:
    code_system: str
    code: str
    display: str
    weight: float
    unit: str | None = None          # labs / flowsheets
    low: float | None = None         # generation range for numeric kinds
    high: float | None = None
    ingredient: str | None = None    # med orders
    drug_class: str | None = None


# fmt: off
_DIAGNOSES = [
    # legacy code system entries
    ("ICD9", "427.31", "atrial fibrillation flutter", 6.0),
    ("ICD9", "401.9",  "essential hypertension", 9.0),
    ("ICD9", "250.00", "diabetes mellitus type 2", 7.0),
    ("ICD9", "272.4",  "hyperlipidemia", 6.0),
    ("ICD9", "414.01", "coronary atherosclerosis", 4.0),
    ("ICD9", "428.0",  "congestive heart failure", 3.5),
    ("ICD9", "493.90", "asthma unspecified", 3.0),
    ("ICD9", "496",    "chronic obstructive pulmonary disease", 2.5),
    ("ICD9", "585.9",  "chronic kidney disease", 2.5),
    ("ICD9", "311",    "depressive disorder", 3.0),
    ("ICD9", "530.81", "gastroesophageal reflux", 3.5),
    ("ICD9", "715.90", "osteoarthritis", 3.0),
    ("ICD9", "780.79", "fatigue malaise", 2.0),
    ("ICD9", "786.50", "chest pain unspecified", 2.5),
    ("ICD9", "599.0",  "urinary tract infection", 2.0),
    ("ICD9", "285.9",  "anemia unspecified", 2.0),
    ("ICD9", "244.9",  "hypothyroidism", 2.0),
    ("ICD9", "327.23", "obstructive sleep apnea", 1.5),
    ("ICD9", "362.50", "macular degeneration", 0.8),
    ("ICD9", "340",    "multiple sclerosis", 0.5),
    ("ICD9", "345.90", "epilepsy unspecified", 0.8),
    ("ICD9", "571.5",  "cirrhosis of liver", 0.7),
    ("ICD9", "714.0",  "rheumatoid arthritis", 0.9),
    ("ICD9", "185",    "malignant neoplasm prostate", 0.8),
    ("ICD9", "174.9",  "malignant neoplasm breast", 0.8),
    # current code system entries
    ("ICD10", "I48.0",  "paroxysmal atrial fibrillation", 4.0),
    ("ICD10", "I48.91", "unspecified atrial fibrillation", 3.0),
    ("ICD10", "I10",    "essential hypertension", 8.0),
    ("ICD10", "E11.9",  "type 2 diabetes mellitus", 6.0),
    ("ICD10", "E78.5",  "hyperlipidemia unspecified", 5.0),
    ("ICD10", "I25.10", "atherosclerotic heart disease", 3.5),
    ("ICD10", "I50.9",  "heart failure unspecified", 3.0),
    ("ICD10", "J45.909", "unspecified asthma", 2.5),
    ("ICD10", "J44.9",  "chronic obstructive pulmonary disease", 2.0),
    ("ICD10", "N18.9",  "chronic kidney disease unspecified", 2.0),
    ("ICD10", "F32.9",  "major depressive disorder", 2.5),
    ("ICD10", "K21.9",  "gastro esophageal reflux disease", 3.0),
    ("ICD10", "M19.90", "osteoarthritis unspecified site", 2.5),
    ("ICD10", "R53.83", "other fatigue", 1.8),
    ("ICD10", "R07.9",  "chest pain unspecified", 2.0),
    ("ICD10", "N39.0",  "urinary tract infection", 1.8),
    ("ICD10", "D64.9",  "anemia unspecified", 1.6),
    ("ICD10", "E03.9",  "hypothyroidism unspecified", 1.6),
    ("ICD10", "G47.33", "obstructive sleep apnea", 1.2),
    ("ICD10", "H35.30", "macular degeneration", 0.6),
    ("ICD10", "G35",    "multiple sclerosis", 0.4),
    ("ICD10", "G40.909", "epilepsy unspecified", 0.6),
    ("ICD10", "K74.60", "cirrhosis of liver", 0.5),
    ("ICD10", "M06.9",  "rheumatoid arthritis", 0.7),
    ("ICD10", "C61",    "malignant neoplasm prostate", 0.6),
    ("ICD10", "C50.919", "malignant neoplasm breast", 0.6),
]

_PROCEDURES = [
    ("CPT", "93000", "electrocardiogram complete", 8.0),
    ("CPT", "93306", "echocardiography transthoracic", 5.0),
    ("CPT", "93510", "left heart catheterization", 1.5),
    ("CPT", "92928", "percutaneous coronary stent", 1.0),
    ("CPT", "33208", "pacemaker insertion", 0.6),
    ("CPT", "45378", "colonoscopy diagnostic", 4.0),
    ("CPT", "43239", "upper gi endoscopy biopsy", 3.0),
    ("CPT", "47562", "laparoscopic cholecystectomy", 1.2),
    ("CPT", "44950", "appendectomy", 0.8),
    ("CPT", "49505", "inguinal hernia repair", 1.0),
    ("CPT", "27447", "total knee arthroplasty", 1.5),
    ("CPT", "27130", "total hip arthroplasty", 1.2),
    ("CPT", "29881", "knee arthroscopy meniscectomy", 1.5),
    ("CPT", "63030", "lumbar discectomy", 0.8),
    ("CPT", "22551", "cervical fusion", 0.5),
    ("CPT", "19120", "excision breast lesion", 0.9),
    ("CPT", "55700", "prostate biopsy", 0.9),
    ("CPT", "52000", "cystourethroscopy", 1.2),
    ("CPT", "31622", "bronchoscopy diagnostic", 1.0),
    ("CPT", "32555", "thoracentesis with imaging", 0.7),
    ("CPT", "36556", "central venous catheter insertion", 1.5),
    ("CPT", "70450", "ct head without contrast", 5.0),
    ("CPT", "71020", "chest xray two views", 9.0),
    ("CPT", "72148", "mri lumbar spine", 2.5),
    ("CPT", "74177", "ct abdomen pelvis with contrast", 3.0),
    ("CPT", "76700", "ultrasound abdomen complete", 2.5),
    ("CPT", "77067", "screening mammography bilateral", 3.5),
    ("CPT", "90935", "hemodialysis single evaluation", 1.0),
    ("CPT", "90471", "immunization administration", 6.0),
    ("CPT", "99291", "critical care first hour", 1.5),
]

_LABS = [
    # (system, code, display, weight, unit, low, high)
    ("LAB", "INR",    "international normalized ratio", 4.0, "ratio", 0.8, 6.5),
    ("LAB", "HGB",    "hemoglobin", 9.0, "g/dL", 6.0, 18.0),
    ("LAB", "WBC",    "white blood cell count", 9.0, "10*3/uL", 2.0, 20.0),
    ("LAB", "PLT",    "platelet count", 8.0, "10*3/uL", 50.0, 600.0),
    ("LAB", "NA",     "sodium", 8.0, "mmol/L", 125.0, 150.0),
    ("LAB", "K",      "potassium", 8.0, "mmol/L", 2.8, 6.2),
    ("LAB", "CREAT",  "creatinine", 8.0, "mg/dL", 0.4, 6.0),
    ("LAB", "BUN",    "blood urea nitrogen", 6.0, "mg/dL", 5.0, 80.0),
    ("LAB", "GLU",    "glucose", 8.0, "mg/dL", 50.0, 400.0),
    ("LAB", "HBA1C",  "hemoglobin a1c", 4.0, "%", 4.5, 13.0),
    ("LAB", "TSH",    "thyroid stimulating hormone", 3.0, "mIU/L", 0.1, 12.0),
    ("LAB", "ALT",    "alanine aminotransferase", 5.0, "U/L", 5.0, 300.0),
    ("LAB", "AST",    "aspartate aminotransferase", 5.0, "U/L", 5.0, 300.0),
    ("LAB", "TBIL",   "total bilirubin", 4.0, "mg/dL", 0.2, 8.0),
    ("LAB", "ALB",    "albumin", 4.0, "g/dL", 1.5, 5.5),
    ("LAB", "LDL",    "ldl cholesterol", 4.0, "mg/dL", 40.0, 250.0),
    ("LAB", "HDL",    "hdl cholesterol", 4.0, "mg/dL", 15.0, 100.0),
    ("LAB", "TRIG",   "triglycerides", 4.0, "mg/dL", 40.0, 800.0),
    ("LAB", "TROP",   "troponin i", 2.0, "ng/mL", 0.0, 15.0),
    ("LAB", "BNP",    "brain natriuretic peptide", 2.0, "pg/mL", 10.0, 3000.0),
]

_DRUGS = [
    # (system, code, display, weight, ingredient, drug_class)
    ("RXNORM", "11289",  "warfarin sodium tablet", 3.0, "warfarin", "anticoagulant"),
    ("RXNORM", "1364430", "apixaban tablet", 2.5, "apixaban", "anticoagulant"),
    ("RXNORM", "1037042", "rivaroxaban tablet", 2.0, "rivaroxaban", "anticoagulant"),
    ("RXNORM", "32968",  "clopidogrel tablet", 2.5, "clopidogrel", "antiplatelet"),
    ("RXNORM", "1191",   "aspirin tablet", 8.0, "aspirin", "antiplatelet"),
    ("RXNORM", "6809",   "metformin tablet", 6.0, "metformin", "antidiabetic"),
    ("RXNORM", "4821",   "glipizide tablet", 2.0, "glipizide", "antidiabetic"),
    ("RXNORM", "861007", "insulin glargine injection", 2.5, "insulin glargine", "antidiabetic"),
    ("RXNORM", "29046",  "lisinopril tablet", 6.0, "lisinopril", "ace_inhibitor"),
    ("RXNORM", "69749",  "valsartan tablet", 2.5, "valsartan", "arb"),
    ("RXNORM", "20352",  "carvedilol tablet", 2.5, "carvedilol", "beta_blocker"),
    ("RXNORM", "7226",   "metoprolol tartrate tablet", 5.0, "metoprolol", "beta_blocker"),
    ("RXNORM", "17767",  "amlodipine tablet", 5.0, "amlodipine", "calcium_channel_blocker"),
    ("RXNORM", "3443",   "diltiazem capsule", 2.0, "diltiazem", "calcium_channel_blocker"),
    ("RXNORM", "4603",   "furosemide tablet", 4.0, "furosemide", "diuretic"),
    ("RXNORM", "5487",   "hydrochlorothiazide tablet", 3.5, "hydrochlorothiazide", "diuretic"),
    ("RXNORM", "36567",  "simvastatin tablet", 4.0, "simvastatin", "statin"),
    ("RXNORM", "83367",  "atorvastatin tablet", 6.0, "atorvastatin", "statin"),
    ("RXNORM", "301542", "rosuvastatin tablet", 3.0, "rosuvastatin", "statin"),
    ("RXNORM", "7646",   "omeprazole capsule", 5.0, "omeprazole", "proton_pump_inhibitor"),
    ("RXNORM", "40790",  "pantoprazole tablet", 3.0, "pantoprazole", "proton_pump_inhibitor"),
    ("RXNORM", "10582",  "levothyroxine tablet", 4.0, "levothyroxine", "thyroid_hormone"),
    ("RXNORM", "321988", "escitalopram tablet", 3.0, "escitalopram", "ssri"),
    ("RXNORM", "36437",  "sertraline tablet", 3.0, "sertraline", "ssri"),
    ("RXNORM", "42347",  "bupropion tablet", 2.0, "bupropion", "antidepressant"),
    ("RXNORM", "7052",   "morphine sulfate injection", 1.5, "morphine", "opioid"),
    ("RXNORM", "7804",   "oxycodone tablet", 2.0, "oxycodone", "opioid"),
    ("RXNORM", "161",    "acetaminophen tablet", 7.0, "acetaminophen", "analgesic"),
    ("RXNORM", "5640",   "ibuprofen tablet", 5.0, "ibuprofen", "nsaid"),
    ("RXNORM", "723",    "amoxicillin capsule", 4.0, "amoxicillin", "antibiotic"),
    ("RXNORM", "2551",   "ciprofloxacin tablet", 2.5, "ciprofloxacin", "antibiotic"),
    ("RXNORM", "10829",  "vancomycin injection", 1.5, "vancomycin", "antibiotic"),
    ("RXNORM", "435",    "albuterol inhaler", 3.5, "albuterol", "bronchodilator"),
    ("RXNORM", "41126",  "fluticasone inhaler", 2.0, "fluticasone", "corticosteroid"),
    ("RXNORM", "8640",   "prednisone tablet", 3.0, "prednisone", "corticosteroid"),
]

_FLOWSHEETS = [
    # (system, code, display, weight, unit, low, high)
    ("FLOW", "PAIN",   "pain score nursing assessment", 6.0, "score", 0.0, 10.0),
    ("FLOW", "TEMP",   "temperature oral reading", 8.0, "degC", 35.0, 41.0),
    ("FLOW", "PULSE",  "pulse rate monitoring", 8.0, "bpm", 35.0, 180.0),
    ("FLOW", "RESP",   "respiratory rate observation", 6.0, "breaths/min", 8.0, 40.0),
    ("FLOW", "SBP",    "systolic blood pressure reading", 8.0, "mmHg", 70.0, 220.0),
    ("FLOW", "DBP",    "diastolic blood pressure reading", 8.0, "mmHg", 40.0, 130.0),
    ("FLOW", "SPO2",   "oxygen saturation pulse oximetry", 7.0, "%", 75.0, 100.0),
    ("FLOW", "WEIGHT", "weight measurement nursing", 5.0, "kg", 35.0, 180.0),
    ("FLOW", "GLUCPOC", "glucose point of care check", 4.0, "mg/dL", 40.0, 450.0),
    ("FLOW", "FALL",   "fall risk morse assessment", 3.0, "score", 0.0, 125.0),
]
# fmt: on

DEPARTMENTS = (
    "cardiology", "oncology", "neurology", "orthopedics", "gastroenterology",
    "endocrinology", "pulmonology", "nephrology", "primary_care", "emergency",
    "psychiatry", "dermatology",
)

PROVIDERS = tuple(f"prov{i:03d}" for i in range(1, 25))

DOC_TYPES = (
    "progress_note", "discharge_summary", "consult_note", "operative_report",
    "history_and_physical", "radiology_report", "pathology_report", "ed_note",
)

ENCOUNTER_TYPES = (
    ("ENC", "office_visit", "office visit", 8.0),
    ("ENC", "telehealth", "telehealth visit", 3.0),
    ("ENC", "ed_visit", "emergency department visit", 3.0),
    ("ENC", "procedure_visit", "procedure visit", 2.0),
    ("ENC", "infusion_visit", "infusion visit", 1.0),
)

ADMISSION_TYPES = (
    ("ADM", "inpatient", "inpatient admission", 6.0),
    ("ADM", "observation", "observation stay", 3.0),
    ("ADM", "surgical", "surgical admission", 2.0),
)

DOC_TEMPLATE_FILLER = (
    "patient seen today in clinic for routine follow up",
    "reviewed current regimen and discussed plan with patient",
    "no acute distress noted during examination today",
    "will continue monitoring and reassess at next visit",
    "counseled regarding adherence and lifestyle measures",
)

GENDERS = ("female", "male", "other", "unknown")
RACES = ("white", "black", "asian", "pacific_islander", "native_american", "other", "unknown")
ETHNICITIES = ("hispanic", "non_hispanic", "unknown")
LANGUAGES = ("english", "spanish", "mandarin", "cantonese", "vietnamese", "tagalog", "russian", "other")
ROUTES = ("oral", "intravenous", "subcutaneous", "inhaled", "topical")


@dataclass
class Catalog:
    """Lookup surface over the bundled vocabulary."""

    codes: dict[EventKind, list[CodeEntry]] = field(default_factory=dict)

    def entries(self, kind: EventKind) -> list[CodeEntry]:
        return self.codes.get(kind, [])

    def has_code(self, kind: EventKind, code: str, code_system: str | None = None) -> bool:
        for e in self.entries(kind):
            if e.code == code and (code_system is None or e.code_system == code_system):
                return True
        return False

    def ingredients(self) -> set[str]:
        return {e.ingredient for e in self.entries(EventKind.MED_ORDER) if e.ingredient}

    def drug_classes(self) -> set[str]:
        return {e.drug_class for e in self.entries(EventKind.MED_ORDER) if e.drug_class}

    def departments(self) -> set[str]:
        return set(DEPARTMENTS)

    def providers(self) -> set[str]:
        return set(PROVIDERS)

    def doc_types(self) -> set[str]:
        return set(DOC_TYPES)

    def demographic_values(self, field_name: str) -> set[str] | None:
        return {
            "gender": set(GENDERS),
            "race": set(RACES),
            "ethnicity": set(ETHNICITIES),
            "language": set(LANGUAGES),
            "vital_status": {"alive", "deceased", "unknown"},
        }.get(field_name)

    def frequencies(self, kind: EventKind) -> dict[str, float]:
        """Per-code sampling frequency, normalized to sum 1 within the kind."""
        entries = self.entries(kind)
        total = sum(e.weight for e in entries)
        return {e.code: e.weight / total for e in entries} if total else {}


def _mk(rows, names: tuple[str, ...] = ()) -> list[CodeEntry]:
    out = []
    for row in rows:
        system, code, display, weight = row[:4]
        extras = dict(zip(names, row[4:]))
        out.append(CodeEntry(system, code, display, weight, **extras))
    return out


def load_catalog() -> Catalog:
    cat = Catalog()
    cat.codes[EventKind.DIAGNOSIS] = _mk(_DIAGNOSES)
    cat.codes[EventKind.PROCEDURE] = _mk(_PROCEDURES)
    cat.codes[EventKind.LAB] = _mk(_LABS, ("unit", "low", "high"))
    cat.codes[EventKind.MED_ORDER] = _mk(_DRUGS, ("ingredient", "drug_class"))
    cat.codes[EventKind.FLOWSHEET] = _mk(_FLOWSHEETS, ("unit", "low", "high"))
    cat.codes[EventKind.ENCOUNTER] = _mk(ENCOUNTER_TYPES)
    cat.codes[EventKind.ADMISSION] = _mk(ADMISSION_TYPES)
    cat.codes[EventKind.DOCUMENT] = [CodeEntry("DOC", dt, dt.replace("_", " "), 1.0) for dt in DOC_TYPES]
    return cat


CATALOG = load_catalog()
