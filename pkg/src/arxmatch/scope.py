"""Editorial scope rules over arXiv category codes.

Which preprints enter the database is pure category-set policy: the
mathematics subcategories minus a fixed exclusion list, mathematical
physics as a whole, and statistics theory (math.ST / stat.TH) only when
the submission carries no cross-listing from a non-mathematical archive.
The rule sets ship as a versioned JSON data file so policy changes need
no code change; overlap_share is the analytic tool that justifies them
after a match run.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .corpus import OUTCOME_UNMATCHED, CorpusStore, MatchDecision, PreprintRecord

REASON_INCLUDED = "included_subcategory"
REASON_STANDALONE = "standalone_included"
REASON_CONDITIONAL_IN = "conditional_included"
REASON_CONDITIONAL_OUT = "conditional_crosslisted_nonmath"
REASON_EXCLUDED = "excluded_subcategory"
REASON_NO_MATH = "no_mathematical_category"

REASON_CODES = (
    REASON_INCLUDED,
    REASON_STANDALONE,
    REASON_CONDITIONAL_IN,
    REASON_CONDITIONAL_OUT,
    REASON_EXCLUDED,
    REASON_NO_MATH,
)

REPORT_HEADER = ("category", "count", "overlap_share", "in_scope", "reason")


@dataclass(frozen=True)
class ScopeRules:
    included: frozenset[str]
    excluded: frozenset[str]
    conditional: frozenset[str]
    standalone: frozenset[str]
    nonmath_prefixes: frozenset[str]

    def __post_init__(self):
        if self.included & self.excluded:
            raise ValueError("included and excluded category sets overlap")


@dataclass(frozen=True)
class ScopeDecision:
    in_scope: bool
    reason: str
    unknown_categories: tuple[str, ...] = ()

    def __bool__(self) -> bool:
        return self.in_scope


def load_rules(path: str | Path | None = None) -> ScopeRules:
    if path is None:
        text = resources.files("arxmatch.data").joinpath("scope_rules.json") \
            .read_text("utf-8")
    else:
        text = Path(path).read_text("utf-8")
    obj = json.loads(text)
    return ScopeRules(
        included=frozenset(obj["included"]),
        excluded=frozenset(obj["excluded"]),
        conditional=frozenset(obj["conditional"]),
        standalone=frozenset(obj["standalone"]),
        nonmath_prefixes=frozenset(obj["nonmath_prefixes"]),
    )


def _prefix(category: str) -> str:
    return category.split(".", 1)[0]


def _is_nonmath(category: str, rules: ScopeRules) -> tuple[bool, bool]:
    """(non-mathematical?, unknown?) for one category code."""
    if (category in rules.included or category in rules.excluded
            or category in rules.conditional or category in rules.standalone):
        return False, False
    prefix = _prefix(category)
    if prefix in ("math", "math-ph"):
        return False, False
    if prefix in rules.nonmath_prefixes:
        return True, False
    return True, True  # unknown codes count as non-mathematical, flagged


def in_scope(p: PreprintRecord, rules: ScopeRules) -> ScopeDecision:
    return decide_categories(p.categories, rules)


def decide_categories(categories, rules: ScopeRules) -> ScopeDecision:
    cats = list(categories)
    if not cats:
        raise ValueError("a preprint must carry at least one category")
    unknown = tuple(c for c in cats
                    if _is_nonmath(c, rules) == (True, True))
    if any(c in rules.included for c in cats):
        return ScopeDecision(True, REASON_INCLUDED, unknown)
    if any(c in rules.standalone for c in cats):
        return ScopeDecision(True, REASON_STANDALONE, unknown)
    if any(c in rules.conditional for c in cats):
        if any(_is_nonmath(c, rules)[0] for c in cats):
            return ScopeDecision(False, REASON_CONDITIONAL_OUT, unknown)
        return ScopeDecision(True, REASON_CONDITIONAL_IN, unknown)
    if any(c in rules.excluded for c in cats):
        return ScopeDecision(False, REASON_EXCLUDED, unknown)
    return ScopeDecision(False, REASON_NO_MATH, unknown)


def overlap_share(category: str, store: CorpusStore,
                  decisions: dict[str, MatchDecision]) -> float | None:
    """Fraction of preprints carrying the category that matched; None if absent."""
    carrying = [pid for pid in store.preprints
                if category in store.preprints[pid].categories]
    if not carrying:
        return None
    matched = sum(
        1 for pid in carrying
        if pid in decisions and decisions[pid].outcome != OUTCOME_UNMATCHED
    )
    return matched / len(carrying)


def scope_report(store: CorpusStore, decisions: dict[str, MatchDecision],
                 rules: ScopeRules) -> str:
    """Per-category CSV: count, overlap share, and the policy verdict."""
    counts: dict[str, int] = {}
    for rec in store.preprints.values():
        for cat in rec.categories:
            counts[cat] = counts.get(cat, 0) + 1
    rows = []
    for cat in sorted(counts, key=lambda c: (-counts[c], c)):
        share = overlap_share(cat, store, decisions)
        verdict = decide_categories([cat], rules)
        rows.append((
            cat,
            str(counts[cat]),
            f"{share:.4f}" if share is not None else "",
            "true" if verdict.in_scope else "false",
            verdict.reason,
        ))
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(REPORT_HEADER)
    writer.writerows(rows)
    return buf.getvalue()
