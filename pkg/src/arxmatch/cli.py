"""arxmatch command line: ingest -> scope -> train -> match -> merge -> stats/eval.

Every command exits 0 on success, 1 on runtime failure (with a single
machine-readable JSON error line on stderr), and 2 on usage errors. All
randomized steps take an explicit --seed. The match timestamp can be
pinned with --timestamp or the SOURCE_DATE_EPOCH environment variable so
that repeated runs are byte-identical.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import os
import sys
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path

from .authors import build_profiles
from .candidates import DEFAULT_K, build_index
from .corpus import OUTCOME_UNMATCHED, CorpusStore
from .evaluate import evaluate
from .forest import (
    DEFAULT_MAX_DEPTH,
    DEFAULT_N_TREES,
    DEFAULT_NEG_PER_POS,
    DEFAULT_THRESHOLD,
    bootstrap_training_set,
    load_model,
    save_model,
    train_forest,
)
from .matcher import batch_match
from .scope import load_rules, scope_report
from .synth import PerturbationProfile, gen_synthetic_corpus

PROFILES_FILE = "profiles.jsonl"


class CliError(RuntimeError):
    """Runtime failure surfaced as exit code 1."""


@contextlib.contextmanager
def store_lock(directory: str | Path):
    """Advisory lock against concurrent runs touching one store directory."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    lock = directory / ".lock"
    try:
        fd = os.open(lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise CliError(f"store {directory} is locked by another run "
                       f"(remove {lock} if stale)") from None
    try:
        os.close(fd)
        yield
    finally:
        with contextlib.suppress(FileNotFoundError):
            os.unlink(lock)


def _load_store(directory: str) -> CorpusStore:
    path = Path(directory)
    if not path.is_dir():
        raise CliError(f"store directory not found: {directory}")
    return CorpusStore.load(path)


def _write_text(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    target = Path(path)
    tmp = target.with_name(target.name + ".tmp")
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    os.replace(tmp, target)


def _report_json(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, indent=2) + "\n"


def _run_timestamp(explicit: str | None) -> str:
    if explicit:
        return explicit
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch:
        dt = datetime.fromtimestamp(int(epoch), tz=timezone.utc)
    else:
        dt = datetime.now(tz=timezone.utc)
    return dt.strftime("%Y-%m-%dT%H:%M:%SZ")


# -- commands -----------------------------------------------------------------


def cmd_ingest(args) -> int:
    if not args.preprints and not args.published:
        raise CliError("nothing to ingest: pass --preprints and/or --published")
    with store_lock(args.store):
        store_dir = Path(args.store)
        store = CorpusStore.load(store_dir)
        result: dict = {}
        if args.preprints:
            _require_file(args.preprints)
            result["preprints"] = store.ingest_preprints(args.preprints).as_dict()
        if args.published:
            _require_file(args.published)
            result["published"] = store.ingest_published(args.published).as_dict()
        store.save(store_dir)
    sys.stdout.write(_report_json(result))
    return 0


def _require_file(path: str) -> None:
    if not Path(path).is_file():
        raise CliError(f"input file not found: {path}")


def cmd_scope(args) -> int:
    store = _load_store(args.store)
    rules = load_rules(args.rules)
    csv_text = scope_report(store, store.decisions, rules)
    _write_text(args.report, csv_text)
    return 0


def cmd_train(args) -> int:
    store = _load_store(args.store)
    index = build_index(store)
    data = bootstrap_training_set(store, index, neg_per_pos=args.neg_per_pos,
                                  seed=args.seed)
    model = train_forest(data, n_trees=args.trees, max_depth=args.depth,
                         seed=args.seed, decision_threshold=args.threshold)
    save_model(model, args.model)
    sys.stdout.write(_report_json({
        "model": args.model,
        "training_pairs": len(data),
        "positives": sum(1 for p in data if p.label),
        "negatives": sum(1 for p in data if not p.label),
        "n_trees": model.n_trees,
        "max_depth": model.max_depth,
        "seed": model.seed,
    }))
    return 0


def cmd_match(args) -> int:
    with store_lock(args.store):
        store = _load_store(args.store)
        _require_file(args.model)
        model = load_model(args.model)
        index = build_index(store)
        report = batch_match(store, index, model, k=args.candidates,
                             timestamp=_run_timestamp(args.timestamp))
        store.save(args.store)
    _write_text(args.report, _report_json(report.as_dict()))
    return 0


def cmd_merge(args) -> int:
    with store_lock(args.store):
        store = _load_store(args.store)
        profiles = build_profiles(store)
        merged = 0
        for pid in sorted(store.decisions):
            decision = store.decisions[pid]
            if decision.outcome == OUTCOME_UNMATCHED:
                continue
            store.merge_on_publication(decision)
            profiles.update_on_merge(decision, store)
            merged += 1
        profiles.check_invariants()
        store.save(args.store)
        profiles.export_jsonl(Path(args.store) / PROFILES_FILE)
    sys.stdout.write(_report_json({"merged": merged,
                                   "profiles": len(profiles.profiles)}))
    return 0


def _subject_table(store: CorpusStore) -> list[dict]:
    names = json.loads(
        resources.files("arxmatch.data").joinpath("msc_sections.json")
        .read_text("utf-8"))
    counts: dict[str, int] = {}
    for pid in store.unpublished_preprints():
        rec = store.preprints[pid]
        if rec.msc:
            area = rec.msc[0][:2]
            counts[area] = counts.get(area, 0) + 1
    return [
        {"msc": area, "area": names.get(area, f"msc-{area}"),
         "count": counts[area]}
        for area in sorted(counts, key=lambda a: (-counts[a], a))
    ]


def cmd_stats(args) -> int:
    store = _load_store(args.store)
    unpublished = store.unpublished_preprints()
    with_msc = sum(1 for pid in unpublished if store.preprints[pid].msc)
    stats = {
        "preprints_total": len(store.preprints),
        "published_total": len(store.published),
        "unpublished": len(unpublished),
        "matched": len(store.preprints) - len(unpublished),
        "merged": len(store.merges),
        "withdrawn": sum(1 for r in store.preprints.values() if r.withdrawn),
        "with_msc": with_msc,
        "subjects": _subject_table(store),
    }
    _write_text(args.report, _report_json(stats))
    return 0


def cmd_eval(args) -> int:
    store = _load_store(args.store)
    report = evaluate(store, seed=args.seed, n_trees=args.trees,
                      max_depth=args.depth, neg_per_pos=args.neg_per_pos,
                      k=args.candidates, decision_threshold=args.threshold)
    _write_text(args.report, _report_json(report.as_dict()))
    return 0


def cmd_gen(args) -> int:
    profile = PerturbationProfile(
        title_sub=args.title_sub,
        author_change=args.author_change,
        abstract_edit=args.abstract_edit,
        doi_rate=args.doi_rate,
        wrong_doi_rate=args.wrong_doi_rate,
    )
    truth = gen_synthetic_corpus(args.n, profile, args.seed, args.out)
    sys.stdout.write(_report_json({
        "out": args.out,
        "pairs": len(truth["pairs"]),
        "decoys": len(truth["decoys"]),
        "doi_assigned": len(truth["doi_assigned"]),
        "wrong_doi": len(truth["wrong_doi"]),
    }))
    return 0


# -- parser ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="arxmatch",
        description="Match preprint metadata against a published-literature corpus.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="load JSONL records into a store directory")
    p.add_argument("--preprints", help="preprint JSONL file")
    p.add_argument("--published", help="published-record JSONL file")
    p.add_argument("--store", required=True, help="store directory")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("scope", help="per-category scope report (CSV)")
    p.add_argument("--store", required=True)
    p.add_argument("--rules", help="scope rules JSON (default: packaged rules)")
    p.add_argument("--report", help="output CSV path (default: stdout)")
    p.set_defaults(func=cmd_scope)

    p = sub.add_parser("train", help="train the match classifier from DOI pairs")
    p.add_argument("--store", required=True)
    p.add_argument("--model", required=True, help="output model JSON path")
    p.add_argument("--trees", type=int, default=DEFAULT_N_TREES)
    p.add_argument("--depth", type=int, default=DEFAULT_MAX_DEPTH)
    p.add_argument("--neg-per-pos", type=int, default=DEFAULT_NEG_PER_POS)
    p.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD)
    p.add_argument("--seed", type=int, required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("match", help="run the two-step matcher over the store")
    p.add_argument("--store", required=True)
    p.add_argument("--model", required=True, help="trained model JSON path")
    p.add_argument("--candidates", type=int, default=DEFAULT_K,
                   help="candidates per preprint (default %(default)s)")
    p.add_argument("--report", help="report JSON path (default: stdout)")
    p.add_argument("--timestamp",
                   help="pin the decision timestamp (ISO-8601); default: "
                        "SOURCE_DATE_EPOCH or current time")
    p.set_defaults(func=cmd_match)

    p = sub.add_parser("merge", help="merge matched preprints into published entries")
    p.add_argument("--store", required=True)
    p.set_defaults(func=cmd_merge)

    p = sub.add_parser("stats", help="corpus statistics and MSC subject table")
    p.add_argument("--store", required=True)
    p.add_argument("--report", help="output JSON path (default: stdout)")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("eval", help="precision/recall on held-out DOI pairs")
    p.add_argument("--store", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--report", help="output JSON path (default: stdout)")
    p.add_argument("--trees", type=int, default=DEFAULT_N_TREES)
    p.add_argument("--depth", type=int, default=DEFAULT_MAX_DEPTH)
    p.add_argument("--neg-per-pos", type=int, default=DEFAULT_NEG_PER_POS)
    p.add_argument("--candidates", type=int, default=DEFAULT_K)
    p.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("gen", help="generate a synthetic evaluation corpus")
    p.add_argument("--n", type=int, required=True, help="number of pairs")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--title-sub", type=float, default=0.1)
    p.add_argument("--author-change", type=float, default=0.05)
    p.add_argument("--abstract-edit", type=float, default=0.2)
    p.add_argument("--doi-rate", type=float, default=0.3)
    p.add_argument("--wrong-doi-rate", type=float, default=0.01)
    p.set_defaults(func=cmd_gen)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(json.dumps({"error": str(exc)}), file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - uniform runtime failure surface
        print(json.dumps({"error": f"{type(exc).__name__}: {exc}"}),
              file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
