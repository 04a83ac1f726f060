"""Single command-line entry point wiring all modules together.

Subcommands: ingest, build-dataset, split, report, convert-mcq, evaluate,
plan, plan-session, serve, sus-score. Defaults may come from a JSON config
file (--config); explicit flags always win. Randomized commands require an
explicit seed. All outputs are written atomically.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from . import DATA_FORMAT_VERSION, __version__
from .model import (
    encode_line,
    poi_to_record,
    qa_from_record,
    qa_to_record,
    read_jsonl,
    write_jsonl,
    write_text_atomic,
)


class CliError(Exception):
    """Invalid configuration or input; maps to exit status 1."""


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            config = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"config: {exc}")
    if not isinstance(config, dict):
        raise CliError("config: must be a JSON object")
    return config


def _setting(args, config: dict, name: str, default=None):
    value = getattr(args, name.replace("-", "_"), None)
    if value is not None:
        return value
    if name in config:
        return config[name]
    return default


def _require_seed(args, config: dict) -> int:
    seed = _setting(args, config, "seed")
    if seed is None:
        raise CliError("seed: required for randomized commands (pass --seed N)")
    return int(seed)


def _load_store(path: str):
    from .dataset import IngestError, ingest_pois

    try:
        return ingest_pois(read_jsonl(path))
    except IngestError as exc:
        raise CliError(f"pois: {exc}")


def cmd_ingest(args, config) -> int:
    store = _load_store(args.pois)
    if args.out:
        write_jsonl(args.out, (poi_to_record(p) for p in store.pois))
    print(f"ingested {len(store)} POIs across {len(store.cities)} cities")
    return 0


def cmd_build_dataset(args, config) -> int:
    from .dataset import build_dataset, fact_from_record, format_composition_report

    seed = _require_seed(args, config)
    store = _load_store(args.pois)
    facts = [fact_from_record(r) for r in read_jsonl(args.facts)]
    bad = [f.id for f in facts if f.violations()]
    if bad:
        raise CliError(f"facts: malformed fact records: {bad}")
    build = build_dataset(
        store,
        facts,
        questions_per_fact=int(_setting(args, config, "questions-per-fact", 5)),
        augmented=int(_setting(args, config, "augmented", 0)),
        ratio=float(_setting(args, config, "ratio", 0.8)),
        seed=seed,
        manual_rate=float(_setting(args, config, "manual-rate", 0.0)),
        cot_chains=int(_setting(args, config, "cot-chains", 0)),
    )
    out = Path(args.out)
    write_jsonl(out / "pois.jsonl", (poi_to_record(p) for p in store.pois))
    write_jsonl(out / "qa.jsonl", (qa_to_record(q) for q in build.qas))
    write_jsonl(out / "cot.jsonl", build.chains)
    qa_by_id = {q.id: q for q in build.qas}
    write_jsonl(out / "manual_queue.jsonl", (qa_to_record(qa_by_id[i]) for i in build.manual_queue))
    write_text_atomic(out / "report.txt", format_composition_report(build.stats))
    write_text_atomic(out / "split.json", encode_line(build.assignment.to_record()) + "\n")
    print(
        f"built {len(build.qas)} QA pairs ({len(build.rejected)} rejected), "
        f"{len(build.chains)} chains, {len(build.manual_queue)} queued for review"
    )
    return 0


def cmd_split(args, config) -> int:
    from .dataset import apply_split, check_poi_disjoint, split_dataset

    seed = _require_seed(args, config)
    store = _load_store(args.pois)
    qas = [qa_from_record(r) for r in read_jsonl(args.qa)]
    assignment = split_dataset(store, qas, ratio=float(_setting(args, config, "ratio", 0.8)), seed=seed)
    labeled = apply_split(qas, assignment)
    violations = check_poi_disjoint(labeled, assignment)
    if violations:
        raise CliError(f"split produced disjointness violations: {violations[:5]}")
    write_jsonl(args.out, (qa_to_record(q) for q in labeled))
    n_train = sum(1 for q in labeled if q.split == "train")
    print(f"split {len(labeled)} QAs: {n_train} train / {len(labeled) - n_train} test")
    return 0


def cmd_report(args, config) -> int:
    from .dataset import composition_report, format_composition_report

    store = _load_store(args.pois)
    qas = [qa_from_record(r) for r in read_jsonl(args.qa)]
    n_facts = questions_per_fact = None
    if args.facts:
        n_facts = sum(1 for _ in read_jsonl(args.facts))
        questions_per_fact = int(_setting(args, config, "questions-per-fact", 5))
    chains_count = sum(1 for _ in read_jsonl(args.cot)) if args.cot else 0
    targets = None
    if args.expect:
        targets = {}
        for part in args.expect.split(","):
            key, _, value = part.partition("=")
            targets[key.strip()] = int(value)
    stats = composition_report(
        store,
        qas,
        chains_count=chains_count,
        n_facts=n_facts,
        questions_per_fact=questions_per_fact,
        targets=targets,
    )
    text = format_composition_report(stats)
    if args.out:
        write_text_atomic(args.out, text)
    print(text, end="")
    return 0 if stats.all_identities_ok else 1


def cmd_convert_mcq(args, config) -> int:
    from .mcq import McqBuildError, build_mcq, mcq_to_record

    seed = _require_seed(args, config)
    store = _load_store(args.pois)
    qas = [qa_from_record(r) for r in read_jsonl(args.qa)]
    items = []
    for qa in qas:
        try:
            items.append(build_mcq(qa, store.pois, qas, seed=seed))
        except McqBuildError as exc:
            raise CliError(f"convert-mcq: {exc}")
    write_jsonl(args.out, (mcq_to_record(i) for i in items))
    print(f"converted {len(items)} QA pairs to MCQ items")
    return 0


def cmd_evaluate(args, config) -> int:
    from .mcq import match_answer, mcq_from_record, score_run

    items = [mcq_from_record(r) for r in read_jsonl(args.items)]
    by_id = {i.qa_id: i for i in items}
    predictions: dict[str, int | None] = {}
    for r in read_jsonl(args.predictions):
        qa_id = r["qa_id"]
        if qa_id not in by_id:
            raise CliError(f"predictions: unknown qa_id {qa_id!r}")
        predictions[qa_id] = match_answer(r["response"], by_id[qa_id])
    missing = [i.qa_id for i in items if i.qa_id not in predictions]
    if missing:
        raise CliError(f"predictions: missing responses for {missing[:5]}")
    weights = None
    if args.weights:
        w_text, _, w_vqa = args.weights.partition(",")
        weights = (float(w_text), float(w_vqa))
    report = score_run(predictions, items, weights=weights)
    text = report.to_text()
    if args.out:
        write_text_atomic(args.out, text)
    print(text, end="")
    return 0


def cmd_plan(args, config) -> int:
    from .solver import feasible, instance_from_record, itinerary_to_record, solve

    records = list(read_jsonl(args.instance))
    if len(records) != 1:
        raise CliError("instance: file must hold exactly one instance record")
    inst = instance_from_record(records[0])
    itinerary = solve(inst, beam_width=int(_setting(args, config, "beam", 8)))
    violations = feasible(itinerary, inst)
    write_text_atomic(args.out, encode_line(itinerary_to_record(itinerary)) + "\n")
    print(f"planned {len(itinerary.visits)} visits, utility {itinerary.total_utility}")
    if violations:
        print(f"violations: {violations}", file=sys.stderr)
        return 1
    return 0


def cmd_plan_session(args, config) -> int:
    from .agent import SessionConfig, run_session, trace_bytes
    from .model import ImageRef
    from .tools import CityFixtures

    fixtures = CityFixtures.load(args.city_fixture)
    visual = None
    if args.image:
        poi_id = fixtures.image_index.get(args.image)
        kind = "street"
        if poi_id:
            poi = fixtures.store[poi_id]
            kind = next((i.kind for i in poi.images if i.uri == args.image), "street")
        visual = ImageRef(uri=args.image, kind=kind)
    session_config = SessionConfig(
        max_steps=int(_setting(args, config, "max-steps", 32)),
        beam_width=int(_setting(args, config, "beam", 8)),
        seed=int(_setting(args, config, "seed", 0) or 0),
    )
    trace = run_session(args.query or "", visual, fixtures=fixtures, config=session_config)
    if args.out:
        write_text_atomic(args.out, trace_bytes(trace).decode("utf-8") + "\n")
    print(f"outcome: {trace.outcome}")
    for line in trace.summary:
        print(f"  {line}")
    return 0


def cmd_serve(args, config) -> int:
    from .server import serve
    from .tools import CityFixtures

    fixtures = CityFixtures.load(args.city_fixture)
    serve(
        fixtures,
        host=str(_setting(args, config, "host", "127.0.0.1")),
        port=int(_setting(args, config, "port", 8040)),
        session_dir=args.session_dir,
    )
    return 0


def cmd_sus_score(args, config) -> int:
    from .stats import SusResponse, aggregate_study, format_study_report, summarize_group

    groups: dict[str, list[SusResponse]] = {}
    supplementary: dict[str, list[tuple[float, ...]]] = {}
    with open(args.responses, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise CliError("responses: empty file")
        item_cols = [c for c in reader.fieldnames if c.startswith("item")]
        supp_cols = [c for c in reader.fieldnames if c.startswith("supp")]
        if len(item_cols) != 10:
            raise CliError(f"responses: need 10 item columns (item1..item10), found {len(item_cols)}")
        item_cols.sort(key=lambda c: int(c.removeprefix("item")))
        supp_cols.sort(key=lambda c: int(c.removeprefix("supp")))
        for row in reader:
            label = row.get(args.group_by, "all") if args.group_by else "all"
            try:
                resp = SusResponse(tuple(int(row[c]) for c in item_cols))
            except ValueError as exc:
                raise CliError(f"responses: {exc}")
            groups.setdefault(label, []).append(resp)
            if supp_cols:
                supplementary.setdefault(label, []).append(tuple(float(row[c]) for c in supp_cols))
    labels = sorted(groups)
    if len(labels) == 2:
        report = aggregate_study(
            groups[labels[0]],
            groups[labels[1]],
            labels=(labels[0], labels[1]),
            supplementary_a=supplementary.get(labels[0], ()),
            supplementary_b=supplementary.get(labels[1], ()),
        )
        text = format_study_report(report)
    else:
        parts = []
        for label in labels:
            g = summarize_group(label, groups[label], supplementary.get(label, ()))
            ci = f"[{g.ci95[0]:.2f}, {g.ci95[1]:.2f}]" if g.ci95 else "undefined (n < 2)"
            parts.append(f"group {g.label}: n={g.n} mean SUS={g.mean_score:.2f} sd={g.sd:.2f} 95% CI={ci}")
        text = "\n".join(parts) + "\n"
    if args.out:
        write_text_atomic(args.out, text)
    print(text, end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="travelkit", description=__doc__)
    parser.add_argument(
        "--version",
        action="version",
        version=f"travelkit {__version__} (data format v{DATA_FORMAT_VERSION})",
    )
    parser.add_argument("--config", help="JSON file with default option values")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    p = sub.add_parser("ingest", help="validate and normalize a POI file")
    p.add_argument("--pois", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("build-dataset", help="run the full dataset construction pipeline")
    p.add_argument("--pois", required=True)
    p.add_argument("--facts", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--questions-per-fact", type=int)
    p.add_argument("--augmented", type=int)
    p.add_argument("--ratio", type=float)
    p.add_argument("--manual-rate", type=float)
    p.add_argument("--cot-chains", type=int)
    p.set_defaults(func=cmd_build_dataset)

    p = sub.add_parser("split", help="assign POI-disjoint train/test splits")
    p.add_argument("--qa", required=True)
    p.add_argument("--pois", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--ratio", type=float)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("report", help="composition report with identity checks")
    p.add_argument("--qa", required=True)
    p.add_argument("--pois", required=True)
    p.add_argument("--facts")
    p.add_argument("--cot")
    p.add_argument("--questions-per-fact", type=int)
    p.add_argument("--expect", help="comma-separated targets, e.g. total=265,train=213")
    p.add_argument("--out")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("convert-mcq", help="convert QA pairs to four-option items")
    p.add_argument("--qa", required=True)
    p.add_argument("--pois", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_convert_mcq)

    p = sub.add_parser("evaluate", help="score a prediction transcript against MCQ items")
    p.add_argument("--items", required=True)
    p.add_argument("--predictions", required=True)
    p.add_argument("--weights", help="explicit 'w_text,w_vqa' instead of from-counts")
    p.add_argument("--out")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("plan", help="solve one planning instance")
    p.add_argument("--instance", required=True)
    p.add_argument("--beam", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("plan-session", help="run one agent session against a city fixture")
    p.add_argument("--query", default="")
    p.add_argument("--image")
    p.add_argument("--city-fixture", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--max-steps", type=int)
    p.add_argument("--beam", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_plan_session)

    p = sub.add_parser("serve", help="serve the session API over a city fixture")
    p.add_argument("--city-fixture", required=True)
    p.add_argument("--host")
    p.add_argument("--port", type=int)
    p.add_argument("--session-dir")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("sus-score", help="score SUS questionnaire responses")
    p.add_argument("--responses", required=True)
    p.add_argument("--group-by")
    p.add_argument("--out")
    p.set_defaults(func=cmd_sus_score)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not getattr(args, "func", None):
        parser.print_usage(sys.stderr)
        return 2
    try:
        config = _load_config(args.config)
        return args.func(args, config)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
