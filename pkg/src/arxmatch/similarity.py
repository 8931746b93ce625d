"""Title/author/abstract distances and the three-component feature vector.

All three distances live in [0, 1] with 0 meaning identical. Candidate
ranking and tie-breaking use lexicographic order over the vector
(title, authors, abstract), so FeatureVector is an ordered named tuple.

Metric choices: character-level Levenshtein scaled by the longer string
(title), one minus Jaccard overlap of normalized family names (authors),
and one minus the cosine of term-frequency vectors (abstract). A missing
abstract contributes the neutral value 0.5 so absence neither fakes
agreement nor vetoes a match.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from . import _kernels
from .corpus import PreprintRecord, PublishedRecord
from .normalize import AuthorName, NormalizedText, normalize_text

NEUTRAL_ABSTRACT_DISTANCE = 0.5


class FeatureVector(NamedTuple):
    title_d: float
    author_d: float
    abstract_d: float


def title_distance(a: NormalizedText, b: NormalizedText) -> float:
    """Levenshtein distance over characters, scaled to [0, 1]."""
    if not a.value and not b.value:
        return 0.0
    dist = _kernels.levenshtein(_kernels.str_to_codes(a.value),
                                _kernels.str_to_codes(b.value))
    return dist / max(len(a.value), len(b.value))


def family_set(authors) -> frozenset[str]:
    out = set()
    for name in authors:
        fam = normalize_text(name.family).value
        if fam:
            out.add(fam)
    return frozenset(out)


def author_distance(a: list[AuthorName], b: list[AuthorName]) -> float:
    """1 - Jaccard overlap of the normalized family-name sets."""
    fa, fb = family_set(a), family_set(b)
    if not fa and not fb:
        return 0.0
    if not fa or not fb:
        return 1.0
    return 1.0 - len(fa & fb) / len(fa | fb)


# token interning shared by every count vector; ids never leak into results
_TOKEN_IDS: dict[str, int] = {}


def token_counts(text: NormalizedText) -> tuple[np.ndarray, np.ndarray, int]:
    """(sorted token ids, counts, squared norm) for a TF vector."""
    counts: dict[int, int] = {}
    for tok in text.value.split():
        tid = _TOKEN_IDS.setdefault(tok, len(_TOKEN_IDS))
        counts[tid] = counts.get(tid, 0) + 1
    ids = np.array(sorted(counts), dtype=np.int64)
    cnt = np.array([counts[t] for t in ids], dtype=np.int64)
    sq = int(np.dot(cnt, cnt)) if cnt.size else 0
    return ids, cnt, sq


def _cosine_distance(va, vb) -> float:
    ids_a, cnt_a, sq_a = va
    ids_b, cnt_b, sq_b = vb
    dot = int(_kernels.sorted_dot(ids_a, cnt_a, ids_b, cnt_b))
    if dot == 0:
        return 1.0
    if dot * dot == sq_a * sq_b:  # proportional vectors: cosine exactly 1
        return 0.0
    cos = dot / math.sqrt(sq_a * sq_b)
    return min(1.0, max(0.0, 1.0 - cos))


def abstract_distance(a: NormalizedText, b: NormalizedText) -> float:
    """1 - TF cosine similarity; 0.5 when either abstract is missing."""
    if not a.value or not b.value:
        return NEUTRAL_ABSTRACT_DISTANCE
    return _cosine_distance(token_counts(a), token_counts(b))


def feature_vector(p: PreprintRecord, c: PublishedRecord) -> FeatureVector:
    return FeatureVector(
        title_d=title_distance(normalize_text(p.title), normalize_text(c.title)),
        author_d=author_distance(list(p.authors), list(c.authors)),
        abstract_d=abstract_distance(normalize_text(p.abstract),
                                     normalize_text(c.abstract or "")),
    )


def lex_compare(u: FeatureVector, v: FeatureVector) -> int:
    """-1, 0, or 1: standard lexicographic order over the components."""
    if u < v:
        return -1
    if u > v:
        return 1
    return 0


class RecordProjection(NamedTuple):
    """Precomputed normalized views of one record, reused across pairings."""

    title: NormalizedText
    title_codes: np.ndarray
    families: frozenset[str]
    abstract_vec: tuple[np.ndarray, np.ndarray, int] | None
    title_len: int


def project(title: str, authors, abstract: str | None) -> RecordProjection:
    ntitle = normalize_text(title)
    nabstract = normalize_text(abstract) if abstract else NormalizedText("")
    return RecordProjection(
        title=ntitle,
        title_codes=_kernels.str_to_codes(ntitle.value),
        families=family_set(authors),
        abstract_vec=token_counts(nabstract) if nabstract.value else None,
        title_len=len(ntitle.value),
    )


def feature_vector_projected(a: RecordProjection, b: RecordProjection) -> FeatureVector:
    """Same result as feature_vector, computed from cached projections."""
    if a.title_len == 0 and b.title_len == 0:
        t = 0.0
    else:
        dist = _kernels.levenshtein(a.title_codes, b.title_codes)
        t = dist / max(a.title_len, b.title_len)
    if not a.families and not b.families:
        au = 0.0
    elif not a.families or not b.families:
        au = 1.0
    else:
        au = 1.0 - len(a.families & b.families) / len(a.families | b.families)
    if a.abstract_vec is None or b.abstract_vec is None:
        ab = NEUTRAL_ABSTRACT_DISTANCE
    else:
        ab = _cosine_distance(a.abstract_vec, b.abstract_vec)
    return FeatureVector(t, au, ab)


def project_preprint(p: PreprintRecord) -> RecordProjection:
    return project(p.title, p.authors, p.abstract)


def project_published(c: PublishedRecord) -> RecordProjection:
    return project(c.title, c.authors, c.abstract)
