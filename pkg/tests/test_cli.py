from __future__ import annotations

import json
import subprocess
import sys
from pathlib import Path

import pytest

from arxmatch.cli import main

from conftest import CORPUS_DIR, GOLDEN_DIR

SEED = "42"
TS = "2024-01-01T00:00:00Z"


def run(*argv: str) -> int:
    return main(list(argv))


@pytest.fixture()
def small_corpus(tmp_path) -> Path:
    out = tmp_path / "corpus"
    assert run("gen", "--n", "60", "--seed", "7", "--out", str(out),
               "--doi-rate", "1.0") == 0
    return out


@pytest.fixture()
def small_store(tmp_path, small_corpus) -> Path:
    store = tmp_path / "store"
    assert run("ingest", "--preprints", str(small_corpus / "preprints.jsonl"),
               "--published", str(small_corpus / "published.jsonl"),
               "--store", str(store)) == 0
    return store


class TestExitCodes:
    def test_usage_error_is_2(self):
        with pytest.raises(SystemExit) as exc:
            run("match", "--store", "somewhere")  # --model missing
        assert exc.value.code == 2

    def test_unknown_command_is_2(self):
        with pytest.raises(SystemExit) as exc:
            run("frobnicate")
        assert exc.value.code == 2

    def test_runtime_error_is_1(self, tmp_path, capsys):
        assert run("stats", "--store", str(tmp_path / "missing")) == 1
        err = capsys.readouterr().err
        assert json.loads(err.strip())["error"]

    def test_match_with_missing_model_file_is_1(self, small_store, capsys):
        assert run("match", "--store", str(small_store),
                   "--model", str(small_store / "no-model.json")) == 1
        assert "not found" in capsys.readouterr().err

    def test_success_is_0(self, small_store):
        assert run("stats", "--store", str(small_store),
                   "--report", str(small_store / "stats.json")) == 0

    def test_ingest_without_inputs_is_1(self, tmp_path):
        assert run("ingest", "--store", str(tmp_path / "s")) == 1

    def test_eval_too_few_pairs_is_1(self, small_store, capsys):
        assert run("eval", "--store", str(small_store), "--seed", "1") == 1
        assert "too few" in capsys.readouterr().err


class TestLocking:
    def test_concurrent_lock_refused(self, small_corpus, tmp_path, capsys):
        store = tmp_path / "locked"
        store.mkdir()
        (store / ".lock").touch()
        code = run("ingest", "--preprints",
                   str(small_corpus / "preprints.jsonl"),
                   "--store", str(store))
        assert code == 1
        assert "locked" in capsys.readouterr().err

    def test_lock_released_after_run(self, small_store):
        assert not (small_store / ".lock").exists()


class TestPipeline:
    def test_full_pipeline_small(self, tmp_path, small_store, capsys):
        model = tmp_path / "model.json"
        assert run("train", "--store", str(small_store), "--model", str(model),
                   "--trees", "10", "--depth", "4", "--seed", "7") == 0
        assert run("match", "--store", str(small_store), "--model", str(model),
                   "--timestamp", TS,
                   "--report", str(tmp_path / "match.json")) == 0
        report = json.loads((tmp_path / "match.json").read_text())
        assert report["doi_matches"] + report["classifier_matches"] + \
            report["unmatched"] == report["total_preprints"] == 60
        assert run("merge", "--store", str(small_store)) == 0
        assert (small_store / "profiles.jsonl").exists()
        assert run("scope", "--store", str(small_store),
                   "--report", str(tmp_path / "scope.csv")) == 0
        assert (tmp_path / "scope.csv").read_text().startswith(
            "category,count,overlap_share,in_scope,reason")
        capsys.readouterr()
        assert run("stats", "--store", str(small_store)) == 0
        stats = json.loads(capsys.readouterr().out)
        assert stats["preprints_total"] == 60
        assert stats["merged"] == report["doi_matches"] + \
            report["classifier_matches"]

    def test_stats_subject_table_ranked(self, small_store, capsys):
        assert run("stats", "--store", str(small_store)) == 0
        stats = json.loads(capsys.readouterr().out)
        counts = [row["count"] for row in stats["subjects"]]
        assert counts == sorted(counts, reverse=True)
        for row in stats["subjects"]:
            assert set(row) == {"msc", "area", "count"}

    def test_scope_stdout(self, small_store, capsys):
        assert run("scope", "--store", str(small_store)) == 0
        out = capsys.readouterr().out
        assert out.startswith("category,count,overlap_share,in_scope,reason")


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    work = tmp_path_factory.mktemp("golden")
    store = work / "store"
    model = work / "model.json"
    assert run("ingest", "--preprints", str(CORPUS_DIR / "preprints.jsonl"),
               "--published", str(CORPUS_DIR / "published.jsonl"),
               "--store", str(store)) == 0
    assert run("train", "--store", str(store), "--model", str(model),
               "--seed", SEED) == 0
    assert run("match", "--store", str(store), "--model", str(model),
               "--timestamp", TS,
               "--report", str(work / "match_report.json")) == 0
    assert run("eval", "--store", str(store), "--seed", SEED,
               "--report", str(work / "eval_report.json")) == 0
    assert run("merge", "--store", str(store)) == 0
    assert run("stats", "--store", str(store),
               "--report", str(work / "stats.json")) == 0
    assert run("scope", "--store", str(store),
               "--report", str(work / "scope.csv")) == 0
    return work


class TestGoldenRun:
    """The committed fixture must reproduce the committed reference outputs."""

    @pytest.mark.parametrize("name", ["match_report.json", "eval_report.json",
                                      "stats.json", "scope.csv"])
    def test_reports_match_golden(self, pipeline, name):
        assert (pipeline / name).read_bytes() == \
            (GOLDEN_DIR / name).read_bytes()

    def test_artifact_hashes_match_golden(self, pipeline):
        import hashlib

        hashes = json.loads((GOLDEN_DIR / "hashes.json").read_text())
        for rel, want in hashes.items():
            got = hashlib.sha256((pipeline / rel).read_bytes()).hexdigest()
            assert got == want, rel


class TestCrossBackend:
    def test_numpy_fallback_pipeline_identical(self, tmp_path):
        """The numpy path must produce byte-identical artifacts."""
        results = {}
        for label, env_flag in (("numba", "0"), ("numpy", "1")):
            work = tmp_path / label
            corpus = work / "corpus"
            store = work / "store"
            import os

            env = dict(os.environ, ARXMATCH_NO_NUMBA=env_flag)
            script = (
                "from arxmatch.cli import main; import sys; "
                f"sys.exit(max(main(['gen','--n','120','--seed','11','--out',r'{corpus}']),"
                f"main(['ingest','--preprints',r'{corpus}/preprints.jsonl',"
                f"'--published',r'{corpus}/published.jsonl','--store',r'{store}']),"
                f"main(['train','--store',r'{store}','--model',r'{work}/model.json','--seed','11']),"
                f"main(['match','--store',r'{store}','--model',r'{work}/model.json',"
                f"'--timestamp','{TS}','--report',r'{work}/report.json'])))"
            )
            proc = subprocess.run([sys.executable, "-c", script], env=env,
                                  capture_output=True, text=True)
            assert proc.returncode == 0, proc.stderr
            results[label] = {
                "model": (work / "model.json").read_bytes(),
                "report": (work / "report.json").read_bytes(),
                "decisions": (store / "decisions.jsonl").read_bytes(),
            }
        assert results["numba"] == results["numpy"]
