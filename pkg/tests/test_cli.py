import hashlib
import json
import subprocess
import sys

import numpy as np
import pytest

from chromaloc.cli import main
from chromaloc.synth import make_card_spec, render_card, save_png


@pytest.fixture(scope="module")
def collection(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    images = root / "images"
    rc = main(["synth", str(images), "--groups", "3", "--variants", "4", "--seed", "11"])
    assert rc == 0
    index_file = root / "collection.idx"
    rc = main(["index", str(images), "-o", str(index_file)])
    assert rc == 0
    return {"root": root, "images": images, "index": index_file}


def test_synth_is_deterministic(tmp_path):
    args = ["--groups", "2", "--variants", "2", "--seed", "3"]
    assert main(["synth", str(tmp_path / "a"), *args]) == 0
    assert main(["synth", str(tmp_path / "b"), *args]) == 0
    for pa in sorted((tmp_path / "a").iterdir()):
        pb = tmp_path / "b" / pa.name
        assert hashlib.sha256(pa.read_bytes()).hexdigest() == \
            hashlib.sha256(pb.read_bytes()).hexdigest()


def test_synth_counts(tmp_path, capsys):
    rc = main(["synth", str(tmp_path / "out"), "--groups", "2", "--variants", "2",
               "--perturbations", "rotate90,brightness"])
    assert rc == 0
    err = capsys.readouterr().err
    assert "4 images" in err
    assert len(list((tmp_path / "out").glob("*.png"))) == 4  # no distractors


def test_index_rerun_identical(collection, tmp_path):
    out_a, out_b = tmp_path / "a.idx", tmp_path / "b.idx"
    assert main(["index", str(collection["images"]), "-o", str(out_a)]) == 0
    assert main(["index", str(collection["images"]), "-o", str(out_b)]) == 0
    assert out_a.read_bytes() == out_b.read_bytes()


def test_index_empty_dir_fails(tmp_path, capsys):
    (tmp_path / "empty").mkdir()
    rc = main(["index", str(tmp_path / "empty"), "-o", str(tmp_path / "x.idx")])
    assert rc == 1
    assert "no decodable images" in capsys.readouterr().err


def test_index_reports_skipped_files(tmp_path, capsys):
    rng = np.random.default_rng(0)
    save_png(render_card(make_card_spec(rng)), tmp_path / "ok.png")
    (tmp_path / "junk.png").write_bytes(b"\x89PNG but not really")
    rc = main(["index", str(tmp_path), "-o", str(tmp_path / "x.idx")])
    assert rc == 0
    err = capsys.readouterr().err
    assert "junk.png" in err and "indexed 1 images" in err


def test_query_self_retrieval_text(collection, capsys):
    probe = collection["images"] / "group00_v00.png"
    rc = main(["query", str(collection["index"]), str(probe), "--top-k", "5"])
    assert rc == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 5
    rank, dist, image_id = lines[0].split("\t")
    assert (rank, dist, image_id) == ("1", "0.000000000", "group00_v00.png")


def test_query_json_lines(collection, capsys):
    # v00 is alphabetically first among its distance-zero rotation twins,
    # so the id tiebreak cannot displace it from rank 1.
    probe = collection["images"] / "group01_v00.png"
    rc = main(["query", str(collection["index"]), str(probe),
               "--format", "json-lines", "--top-k", "3"])
    assert rc == 0
    rows = [json.loads(line) for line in capsys.readouterr().out.strip().splitlines()]
    assert [r["rank"] for r in rows] == [1, 2, 3]
    assert rows[0]["image_id"] == "group01_v00.png"
    assert rows[0]["distance"] < 1e-9


def test_query_html_gallery(collection, tmp_path):
    probe = collection["images"] / "group00_v01.png"
    out = tmp_path / "gallery.html"
    rc = main(["query", str(collection["index"]), str(probe),
               "--format", "html", "--images-root", str(collection["images"]),
               "--top-k", "4", "-o", str(out)])
    assert rc == 0
    page = out.read_text()
    assert page.count("data:image/png;base64,") == 5  # query + 4 hits
    assert "group00_v01.png" in page


def test_query_undecodable_probe_fails(collection, tmp_path, capsys):
    bad = tmp_path / "bad.png"
    bad.write_bytes(b"nope")
    rc = main(["query", str(collection["index"]), str(bad)])
    assert rc == 1
    assert capsys.readouterr().err


def test_query_more_locations_than_index_fails(collection, capsys):
    probe = collection["images"] / "group00_v00.png"
    rc = main(["query", str(collection["index"]), str(probe), "--locations", "9"])
    assert rc == 1
    assert "locations" in capsys.readouterr().err


def test_query_incompatible_index_fails(collection, tmp_path, capsys):
    text = collection["index"].read_text().splitlines()
    (tmp_path / "v9.idx").write_text("CHROMALOC 9 256 5\n" + "\n".join(text[1:]))
    probe = collection["images"] / "group00_v00.png"
    rc = main(["query", str(tmp_path / "v9.idx"), str(probe)])
    assert rc == 1
    assert "version" in capsys.readouterr().err


def test_eval_text_report(collection, capsys):
    gt = collection["images"] / "groundtruth.csv"
    rc = main(["eval", str(collection["index"]), str(gt), "--top-k", "3"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "average precision" in out
    assert "1.00" in out  # two-decimal display


def test_eval_json_lines(collection, capsys):
    gt = collection["images"] / "groundtruth.csv"
    rc = main(["eval", str(collection["index"]), str(gt), "--top-k", "3",
               "--format", "json-lines"])
    assert rc == 0
    rows = [json.loads(line) for line in capsys.readouterr().out.strip().splitlines()]
    assert "avg_precision" in rows[-1]
    assert all({"a", "b", "c"} <= set(r) for r in rows[:-1])


def test_eval_report_dir_writes_files_and_figures(collection, tmp_path, capsys):
    gt = collection["images"] / "groundtruth.csv"
    report_dir = tmp_path / "report"
    rc = main(["eval", str(collection["index"]), str(gt), "--top-k", "3",
               "--report-dir", str(report_dir)])
    assert rc == 0
    assert (report_dir / "report.txt").exists()
    assert (report_dir / "report.tsv").exists()
    assert (report_dir / "per_query.png").stat().st_size > 0
    assert (report_dir / "group_means.png").stat().st_size > 0
    tsv = (report_dir / "report.tsv").read_text().strip().splitlines()
    assert tsv[-1].startswith("average\t")


def test_eval_blended_beats_baseline_on_distractors(collection, capsys):
    gt = collection["images"] / "groundtruth.csv"
    avgs = {}
    for k in ("0.5", "1.0"):
        rc = main(["eval", str(collection["index"]), str(gt), "--top-k", "3",
                   "--k", k, "--format", "json-lines"])
        assert rc == 0
        rows = capsys.readouterr().out.strip().splitlines()
        avgs[k] = json.loads(rows[-1])["avg_precision"]
    assert avgs["0.5"] >= avgs["1.0"]


def test_eval_missing_id_fails(collection, tmp_path, capsys):
    bad_gt = tmp_path / "gt.csv"
    bad_gt.write_text("id,group\nnothere.png,g\nalsonot.png,g\n")
    rc = main(["eval", str(collection["index"]), str(bad_gt)])
    assert rc == 1
    assert "nothere.png" in capsys.readouterr().err


def test_module_entry_point_runs():
    proc = subprocess.run(
        [sys.executable, "-m", "chromaloc.cli", "--help"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert "index" in proc.stdout and "synth" in proc.stdout
