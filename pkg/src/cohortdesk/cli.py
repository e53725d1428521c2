"""Command-line surface: dataset generation and ingestion, query evaluation,
cohort management, codebook operations, compliance records, the HTTP
server, and audit inspection.

Exit codes: 0 success, 1 domain error, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from datetime import date
from pathlib import Path

from .anonymizer.codebook import CodebookError
from .cohortql.canonical import CanonicalFormatError, from_canonical
from .cohortql.parser import parse_dsl
from .compliance.approvals import Action
from .compliance.fixtures import demo_store
from .compliance.records import ComplianceError, ComplianceStore, UnknownRecordError
from .engine.cohorts import CohortStoreError
from .gateway.app import Gateway, GatewayError
from .gateway.audit import AuditError, AuditLog
from .gateway.config import GatewayConfig, load_config
from .gateway.httpd import make_server
from .squaremodel.io import DatasetParseError, save_dataset
from .squaremodel.model import DatasetValidationError, EavRow
from .squaremodel.pivot import PivotError, pivot_eav
from .squaremodel.synth import GenProfile, ProfileError, generate_synthetic

DOMAIN_ERRORS = (
    GatewayError,
    PivotError,
    ProfileError,
    CohortStoreError,
    CodebookError,
    ComplianceError,
    UnknownRecordError,
    DatasetParseError,
    DatasetValidationError,
    CanonicalFormatError,
    AuditError,
    FileNotFoundError,
)


def _emit(args, payload: dict, text: str) -> None:
    if args.format == "json":
        print(json.dumps(payload, indent=2, sort_keys=True, default=str))
    else:
        print(text)


def _workspace_config(args) -> GatewayConfig:
    """Load (or initialize) the workspace config so secrets stay stable."""
    data_dir = Path(args.data)
    config_path = data_dir / "config.json"
    if config_path.exists():
        config = load_config(config_path)
    else:
        data_dir.mkdir(parents=True, exist_ok=True)
        config = GatewayConfig(data_dir=data_dir)
        config.save(config_path)
    if getattr(args, "reference_date", None):
        config.reference_date = date.fromisoformat(args.reference_date)
    return config


def _gateway(args) -> Gateway:
    config = _workspace_config(args)
    return Gateway.from_data_dir(config)


# ---- subcommands ----------------------------------------------------------


def cmd_gen(args) -> int:
    profile = GenProfile()
    if args.profile:
        profile = GenProfile.from_dict(json.loads(Path(args.profile).read_text(encoding="utf-8")))
    ds = generate_synthetic(args.seed, args.patients, profile)
    out = Path(args.out) / "dataset" if args.workspace else Path(args.out)
    save_dataset(ds, out)
    payload = {
        "patients": len(ds.patients),
        "events": ds.event_count(),
        "dataset_version": ds.dataset_version,
        "out": str(out),
    }
    _emit(args, payload, f"wrote {len(ds.patients)} patients / {ds.event_count()} events to {out}")
    return 0


def cmd_pivot(args) -> int:
    schema = json.loads(Path(args.schema).read_text(encoding="utf-8"))
    rows = []
    with open(args.rows, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["entity_id", "attribute", "value"]:
            print(f"{args.rows}:1: expected header entity_id,attribute,value", file=sys.stderr)
            return 1
        for entity_id, attribute, value in reader:
            rows.append(EavRow(entity_id=entity_id, attribute=attribute, value=value))
    fragment = pivot_eav(rows, schema, collect_unmapped=args.permissive)
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(fragment.columns)
        for row in fragment.rows:
            writer.writerow([
                json.dumps(row[c], sort_keys=True) if isinstance(row[c], dict) else (row[c] if row[c] is not None else "")
                for c in fragment.columns
            ])
    payload = {"rows": len(fragment.rows), "columns": fragment.columns, "out": args.out}
    _emit(args, payload, f"pivoted {len(rows)} EAV rows into {len(fragment.rows)} square rows at {args.out}")
    return 0


def _read_query_file(path: str):
    text = Path(path).read_text(encoding="utf-8")
    if path.endswith(".json"):
        return from_canonical(json.loads(text)), []
    result = parse_dsl(text)
    if not result.ok:
        return None, [d.render() for d in result.diagnostics]
    return result.query, []


def cmd_eval(args) -> int:
    gw = _gateway(args)
    if args.query:
        query, diagnostics = _read_query_file(args.query)
    else:
        result = parse_dsl(sys.stdin.read())
        query, diagnostics = result.query, [d.render() for d in result.diagnostics]
    if query is None:
        for d in diagnostics:
            print(d, file=sys.stderr)
        return 1
    from .cohortql.canonical import to_canonical

    payload = {"query": to_canonical(query)}
    if args.explain:
        out = gw.explain_query(args.user, payload)
        _emit(args, out, out["plan"])
        return 0
    out = gw.eval_query(args.user, payload)
    text = [f"result: {out['display']} patients"]
    for i, line_display in enumerate(out["per_line"], start=1):
        text.append(f"  line {i}: {line_display} patients")
    if args.members:
        if "members" not in out:
            print("member list is available to auditors only", file=sys.stderr)
            return 1
        text.extend(out["members"])
    _emit(args, out, "\n".join(text))
    return 0


def cmd_cohort_save(args) -> int:
    gw = _gateway(args)
    payload: dict = {"study_id": args.study, "name": args.name, "auto_refresh": args.auto_refresh}
    if args.query:
        query, diagnostics = _read_query_file(args.query)
        if query is None:
            for d in diagnostics:
                print(d, file=sys.stderr)
            return 1
        from .cohortql.canonical import to_canonical

        payload["query"] = to_canonical(query)
    elif args.mrns:
        raw = Path(args.mrns).read_text(encoding="utf-8") if Path(args.mrns).exists() else args.mrns
        payload["mrns"] = [m.strip() for m in raw.replace(",", "\n").splitlines() if m.strip()]
    else:
        print("one of --query or --mrns is required", file=sys.stderr)
        return 2
    out = gw.save_cohort(args.user, payload)
    lines = [f"saved cohort {out['cohort_id']} ({out['display']} patients)"]
    lines += [f"warning: {w}" for w in out["warnings"]]
    _emit(args, out, "\n".join(lines))
    return 0


def cmd_cohort_refresh(args) -> int:
    gw = _gateway(args)
    event = gw.refresh(args.user, args.cohort)
    record = event.to_record()
    _emit(
        args,
        record,
        f"refresh {event.status}: +{len(event.added)} added, "
        f"{len(event.no_longer_matching)} no longer matching (v{event.old_version} -> v{event.new_version})",
    )
    return 0 if event.status == "ok" else 1


def cmd_cohort_list(args) -> int:
    gw = _gateway(args)
    cohorts = gw.list_cohorts(args.user)
    text = [f"{c['cohort_id']}  {c['study_id']}  {c['display']:>10}  {c['name']}" for c in cohorts]
    _emit(args, {"cohorts": cohorts}, "\n".join(text) if text else "no cohorts")
    return 0


def cmd_anon_map(args) -> int:
    gw = _gateway(args)
    mrns = [m.strip() for m in args.mrns.split(",") if m.strip()]
    entries = gw.anon_entries(args.study, mrns)
    text = [f"{e['mrn']},{e['pseudo_id']},{e['date_offset_days']}" for e in entries]
    _emit(args, {"entries": entries}, "\n".join(text))
    return 0


def cmd_anon_shift(args) -> int:
    gw = _gateway(args)
    gw.anon_entries(args.study, [args.mrn])  # ensure the entry exists
    shifted = gw.codebook.shift_date(args.study, args.mrn, date.fromisoformat(args.date))
    _emit(args, {"shifted": shifted.isoformat()}, shifted.isoformat())
    return 0


def cmd_compliance_load(args) -> int:
    config = _workspace_config(args)
    if args.demo:
        store = demo_store(config.compliance_path)
        store.save()
        count = {"protocols": len(store.protocols), "dpas": len(store.dpas), "users": len(store.users)}
        _emit(args, count, f"installed demo compliance records at {config.compliance_path}")
        return 0
    store = ComplianceStore()
    store.load(args.file)
    store.save(config.compliance_path)
    payload = {
        "protocols": len(store.protocols),
        "dpas": len(store.dpas),
        "exemptions": len(store.exemptions),
        "users": len(store.users),
    }
    _emit(args, payload, f"loaded compliance records into {config.compliance_path}")
    return 0


def cmd_compliance_matrix(args) -> int:
    gw = _gateway(args)
    table = gw.compliance.matrix_table(args.protocol)
    rows = gw.compliance_matrix(args.user, args.protocol)
    _emit(args, {"rows": rows}, table.rstrip("\n"))
    return 0


def cmd_compliance_check(args) -> int:
    gw = _gateway(args)
    decision = gw.compliance.check_action(args.user, Action(args.action), args.study)
    payload = {"allowed": decision.allowed, "reason": decision.reason}
    _emit(args, payload, "allow" if decision.allowed else f"deny: {decision.reason}")
    return 0 if decision.allowed else 1


def cmd_download(args) -> int:
    gw = _gateway(args)
    manifest = gw.download(args.user, args.cohort, args.mode, args.dest)
    text = [f"wrote {len(manifest['files'])} files to {args.dest} ({manifest['mode']})"]
    text += [f"  {f['name']}: {f['rows']} rows" for f in manifest["files"]]
    text += [f"warning: {w}" for w in manifest["warnings"]]
    _emit(args, manifest, "\n".join(text))
    return 0


def cmd_serve(args) -> int:
    if args.config:
        config = load_config(args.config)
    else:
        config = _workspace_config(args)
    if args.port is not None:
        config.port = args.port
    if args.static:
        config.static_dir = Path(args.static)
    gw = Gateway.from_data_dir(config)
    server = make_server(gw)
    host, port = server.server_address[:2]
    print(f"serving on http://{host}:{port} (data: {config.data_dir})")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    return 0


def cmd_audit(args) -> int:
    config = _workspace_config(args)
    if args.verify:
        records = AuditLog.verify_file(config.audit_path)
        _emit(args, {"verified": True, "records": len(records)},
              f"audit journal verified: {len(records)} records, chain intact")
        return 0
    log = AuditLog(config.audit_path)
    records = log.query(user_id=args.user, action=args.action, outcome=args.outcome)
    text = [
        f"{r.sequence:>6}  {r.at}  {r.user_id:<12} {r.action:<20} {r.outcome:<6} "
        f"n={r.subject_count} {r.detail}"
        for r in records
    ]
    _emit(args, {"records": [r.body() for r in records]}, "\n".join(text) if text else "no records")
    return 0


# ---- argument wiring ---------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cohortdesk", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, data=True, user=False):
        p.add_argument("--format", choices=("text", "json"), default="text")
        p.add_argument("--reference-date", help="freeze the evaluation reference date (ISO)")
        if data:
            p.add_argument("--data", required=True, help="workspace data directory")
        if user:
            p.add_argument("--user", required=True, help="acting user id")

    p = sub.add_parser("gen", help="generate a synthetic dataset")
    common(p, data=False)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--patients", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--profile", help="generation profile JSON file")
    p.add_argument("--workspace", action="store_true", help="write under <out>/dataset (workspace layout)")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("pivot", help="pivot an EAV file into a square table")
    common(p, data=False)
    p.add_argument("--rows", required=True, help="entity_id,attribute,value CSV")
    p.add_argument("--schema", required=True, help="attribute->column JSON mapping")
    p.add_argument("--out", required=True)
    p.add_argument("--permissive", action="store_true", help="collect unmapped attributes instead of failing")
    p.set_defaults(func=cmd_pivot)

    p = sub.add_parser("eval", help="evaluate a query and print display counts")
    common(p, user=True)
    p.add_argument("--query", help=".cql (DSL) or .json (canonical) file; stdin if omitted")
    p.add_argument("--members", action="store_true", help="list member ids (auditors only)")
    p.add_argument("--explain", action="store_true", help="print the evaluation plan instead")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("cohort", help="saved cohort operations")
    cohort_sub = p.add_subparsers(dest="cohort_command", required=True)

    q = cohort_sub.add_parser("save", help="save a cohort from a query or MRN list")
    common(q, user=True)
    q.add_argument("--study", required=True)
    q.add_argument("--name", required=True)
    q.add_argument("--query", help="query file")
    q.add_argument("--mrns", help="comma-separated MRNs or a file of MRNs")
    q.add_argument("--auto-refresh", action="store_true")
    q.set_defaults(func=cmd_cohort_save)

    q = cohort_sub.add_parser("refresh", help="re-run a query cohort on the current dataset")
    common(q, user=True)
    q.add_argument("--cohort", required=True)
    q.set_defaults(func=cmd_cohort_refresh)

    q = cohort_sub.add_parser("list", help="list saved cohorts")
    common(q, user=True)
    q.set_defaults(func=cmd_cohort_list)

    p = sub.add_parser("anon", help="anonymization codebook operations")
    anon_sub = p.add_subparsers(dest="anon_command", required=True)

    q = anon_sub.add_parser("map", help="get or create pseudo-id/offset entries")
    common(q)
    q.add_argument("--study", required=True)
    q.add_argument("--mrns", required=True, help="comma-separated MRNs")
    q.set_defaults(func=cmd_anon_map)

    q = anon_sub.add_parser("shift", help="shift a date by a patient's stored offset")
    common(q)
    q.add_argument("--study", required=True)
    q.add_argument("--mrn", required=True)
    q.add_argument("--date", required=True)
    q.set_defaults(func=cmd_anon_shift)

    p = sub.add_parser("compliance", help="compliance record operations")
    comp_sub = p.add_subparsers(dest="compliance_command", required=True)

    q = comp_sub.add_parser("load", help="load compliance records into the workspace")
    common(q)
    q.add_argument("--file", help="records JSON file")
    q.add_argument("--demo", action="store_true", help="install the bundled demo records")
    q.set_defaults(func=cmd_compliance_load)

    q = comp_sub.add_parser("matrix", help="print the approval matrix for a protocol")
    common(q, user=True)
    q.add_argument("--protocol", required=True)
    q.set_defaults(func=cmd_compliance_matrix)

    q = comp_sub.add_parser("check", help="check one action for one user")
    common(q, user=True)
    q.add_argument("--action", required=True, choices=[a.value for a in Action])
    q.add_argument("--study", required=True)
    q.set_defaults(func=cmd_compliance_check)

    p = sub.add_parser("download", help="download cohort data to a local destination")
    common(p, user=True)
    p.add_argument("--cohort", required=True)
    p.add_argument("--mode", required=True, choices=("identified", "scrubbed"))
    p.add_argument("--dest", required=True)
    p.set_defaults(func=cmd_download)

    p = sub.add_parser("serve", help="run the HTTP gateway")
    common(p)
    p.add_argument("--config", help="config JSON (overrides workspace config)")
    p.add_argument("--port", type=int)
    p.add_argument("--static", help="static asset directory for the web client")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("audit", help="inspect or verify the audit journal")
    common(p)
    p.add_argument("--user")
    p.add_argument("--action")
    p.add_argument("--outcome", choices=("allow", "deny", "error"))
    p.add_argument("--verify", action="store_true", help="verify the checksum chain")
    p.set_defaults(func=cmd_audit)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DOMAIN_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
