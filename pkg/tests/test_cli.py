import json
import subprocess
import sys

import pytest

from conftest import FIXTURES_DIR, make_poi
from travelkit.cli import main
from travelkit.dataset import Fact, fact_to_record
from travelkit.model import (
    ImageRef,
    poi_to_record,
    read_jsonl,
    write_jsonl,
)


@pytest.fixture()
def dataset_inputs(tmp_path):
    pois = [make_poi(f"p{i}", images=(ImageRef(f"img/{i}.jpg", "street"),)) for i in range(6)]
    facts = [Fact(id=f"f{i:02d}", text=f"Town fact number {i} worth knowing.") for i in range(10)]
    pois_path = tmp_path / "pois.jsonl"
    facts_path = tmp_path / "facts.jsonl"
    write_jsonl(pois_path, (poi_to_record(p) for p in pois))
    write_jsonl(facts_path, (fact_to_record(f) for f in facts))
    return pois_path, facts_path


def test_ingest_and_version(tmp_path, capsys):
    pois_path = tmp_path / "pois.jsonl"
    write_jsonl(pois_path, [poi_to_record(make_poi("p1"))])
    assert main(["ingest", "--pois", str(pois_path)]) == 0
    assert "ingested 1 POIs" in capsys.readouterr().out
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0


def test_unknown_command_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_convert_mcq_without_seed_names_the_field(dataset_inputs, tmp_path, capsys):
    pois_path, facts_path = dataset_inputs
    out_dir = tmp_path / "ds"
    assert main([
        "build-dataset", "--pois", str(pois_path), "--facts", str(facts_path),
        "--out", str(out_dir), "--seed", "3",
    ]) == 0
    code = main([
        "convert-mcq", "--qa", str(out_dir / "qa.jsonl"), "--pois", str(pois_path),
        "--out", str(tmp_path / "mcq.jsonl"),
    ])
    assert code == 1
    assert "seed" in capsys.readouterr().err


def test_build_dataset_split_report_pipeline(dataset_inputs, tmp_path, capsys):
    pois_path, facts_path = dataset_inputs
    out_dir = tmp_path / "ds"
    assert main([
        "build-dataset", "--pois", str(pois_path), "--facts", str(facts_path),
        "--out", str(out_dir), "--seed", "3", "--questions-per-fact", "5",
        "--augmented", "6", "--cot-chains", "2",
    ]) == 0
    qa_records = list(read_jsonl(out_dir / "qa.jsonl"))
    assert len(qa_records) == 10 * 5 + 6 + 6 * 3  # text + augmented + vl
    assert (out_dir / "manual_queue.jsonl").exists()
    assert (out_dir / "report.txt").exists()

    code = main([
        "report", "--qa", str(out_dir / "qa.jsonl"), "--pois", str(pois_path),
        "--facts", str(facts_path), "--cot", str(out_dir / "cot.jsonl"),
        "--questions-per-fact", "5",
    ])
    assert code == 0
    assert "[ok]" in capsys.readouterr().out


def test_report_identity_failure_exits_1(dataset_inputs, tmp_path, capsys):
    pois_path, facts_path = dataset_inputs
    out_dir = tmp_path / "ds"
    main([
        "build-dataset", "--pois", str(pois_path), "--facts", str(facts_path),
        "--out", str(out_dir), "--seed", "3",
    ])
    code = main([
        "report", "--qa", str(out_dir / "qa.jsonl"), "--pois", str(pois_path),
        "--expect", "total=99999",
    ])
    assert code == 1


def test_convert_and_evaluate_all_correct(dataset_inputs, tmp_path, capsys):
    pois_path, facts_path = dataset_inputs
    out_dir = tmp_path / "ds"
    main([
        "build-dataset", "--pois", str(pois_path), "--facts", str(facts_path),
        "--out", str(out_dir), "--seed", "3", "--augmented", "3",
    ])
    mcq_path = tmp_path / "mcq.jsonl"
    assert main([
        "convert-mcq", "--qa", str(out_dir / "qa.jsonl"), "--pois", str(pois_path),
        "--seed", "7", "--out", str(mcq_path),
    ]) == 0
    items = list(read_jsonl(mcq_path))
    predictions = tmp_path / "preds.jsonl"
    write_jsonl(predictions, ({"qa_id": it["qa_id"], "response": it["options"][it["correct_index"]]} for it in items))
    report_path = tmp_path / "score.txt"
    assert main([
        "evaluate", "--items", str(mcq_path), "--predictions", str(predictions),
        "--out", str(report_path),
    ]) == 0
    out = capsys.readouterr().out
    assert "full score: 100.0" in out
    assert report_path.read_text().startswith("text score: 100.0")


def test_cli_does_not_mutate_inputs(dataset_inputs, tmp_path):
    pois_path, facts_path = dataset_inputs
    before = pois_path.read_bytes(), facts_path.read_bytes()
    main([
        "build-dataset", "--pois", str(pois_path), "--facts", str(facts_path),
        "--out", str(tmp_path / "ds"), "--seed", "1",
    ])
    assert (pois_path.read_bytes(), facts_path.read_bytes()) == before


def test_build_dataset_reproducible_bytes(dataset_inputs, tmp_path):
    pois_path, facts_path = dataset_inputs
    outs = []
    for name in ("a", "b"):
        out_dir = tmp_path / name
        main([
            "build-dataset", "--pois", str(pois_path), "--facts", str(facts_path),
            "--out", str(out_dir), "--seed", "5", "--augmented", "4", "--cot-chains", "1",
        ])
        outs.append({p.name: p.read_bytes() for p in sorted(out_dir.iterdir())})
    assert outs[0] == outs[1]


def test_plan_command(tmp_path):
    from travelkit.model import ConstraintSet, Money, encode_line
    from travelkit.solver import PlanInstance, instance_to_record

    inst = PlanInstance(
        candidates=(make_poi("a", utility=5.0), make_poi("b", utility=2.0, lat=40.01)),
        constraints=ConstraintSet(budget=Money(5000)),
    )
    instance_path = tmp_path / "instance.json"
    instance_path.write_text(encode_line(instance_to_record(inst)) + "\n")
    out_path = tmp_path / "itinerary.json"
    assert main(["plan", "--instance", str(instance_path), "--out", str(out_path)]) == 0
    record = json.loads(out_path.read_text())
    assert [v[0] for v in record["visits"]] == ["a", "b"]


def test_plan_session_command(tmp_path, capsys):
    out_path = tmp_path / "trace.json"
    code = main([
        "plan-session", "--query", "a day in new york for $80",
        "--city-fixture", str(FIXTURES_DIR), "--out", str(out_path),
    ])
    assert code == 0
    assert "outcome: complete" in capsys.readouterr().out
    trace = json.loads(out_path.read_text())
    assert trace["itinerary"]["total_cost"]["amount"] <= 8000


def test_sus_score_command(tmp_path, capsys):
    rows = ["group," + ",".join(f"item{i}" for i in range(1, 11))]
    for g, base in (("ours", 5), ("baseline", 3)):
        for _ in range(8):
            rows.append(g + "," + ",".join(str(base if i % 2 == 1 else 6 - base) for i in range(1, 11)))
    responses = tmp_path / "responses.csv"
    responses.write_text("\n".join(rows) + "\n")
    assert main(["sus-score", "--responses", str(responses), "--group-by", "group"]) == 0
    out = capsys.readouterr().out
    assert "Cohen's d" in out


def test_config_file_provides_defaults(dataset_inputs, tmp_path):
    pois_path, facts_path = dataset_inputs
    config = tmp_path / "run.json"
    config.write_text(json.dumps({"seed": 9, "augmented": 3}))
    out_dir = tmp_path / "ds"
    assert main([
        "--config", str(config),
        "build-dataset", "--pois", str(pois_path), "--facts", str(facts_path), "--out", str(out_dir),
    ]) == 0
    qa_records = list(read_jsonl(out_dir / "qa.jsonl"))
    augmented = [r for r in qa_records if r["modality"] == "text" and r["source_fact_id"] is None]
    assert len(augmented) == 3


def test_console_entry_point_smoke():
    proc = subprocess.run(
        [sys.executable, "-m", "travelkit.cli", "--version"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert "travelkit" in proc.stdout
