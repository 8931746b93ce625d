from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from arxmatch.normalize import NormalizedText, normalize_text, split_authors
from arxmatch.similarity import (
    NEUTRAL_ABSTRACT_DISTANCE,
    FeatureVector,
    abstract_distance,
    author_distance,
    feature_vector,
    feature_vector_projected,
    lex_compare,
    project_preprint,
    project_published,
    title_distance,
)

from conftest import make_preprint, make_published


def nt(s: str) -> NormalizedText:
    return normalize_text(s)


def edit_distance_oracle(a: str, b: str) -> int:
    """Textbook full-matrix DP."""
    n, m = len(a), len(b)
    d = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n + 1):
        d[i][0] = i
    for j in range(m + 1):
        d[0][j] = j
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            d[i][j] = min(
                d[i - 1][j] + 1,
                d[i][j - 1] + 1,
                d[i - 1][j - 1] + (a[i - 1] != b[j - 1]),
            )
    return d[n][m]


class TestTitleDistance:
    def test_identity(self):
        assert title_distance(nt("abc"), nt("abc")) == 0.0

    def test_single_substitution(self):
        assert title_distance(nt("abc"), nt("abd")) == pytest.approx(1 / 3)
        assert edit_distance_oracle("abc", "abd") == 1

    def test_empty_vs_full(self):
        assert title_distance(nt(""), nt("xyz")) == 1.0

    def test_both_empty(self):
        assert title_distance(nt(""), nt("")) == 0.0

    def test_against_dp_oracle(self):
        rng = np.random.default_rng(7)
        alphabet = "abcdef -"
        for _ in range(300):
            a = "".join(rng.choice(list(alphabet), rng.integers(0, 25)))
            b = "".join(rng.choice(list(alphabet), rng.integers(0, 25)))
            got = title_distance(NormalizedText(a), NormalizedText(b))
            want = edit_distance_oracle(a, b) / max(len(a), len(b)) \
                if (a or b) else 0.0
            assert got == want

    def test_monotone_degradation(self):
        # fresh sentinel substitutions at distinct positions: distance must
        # grow by exactly 1/len per edit (checked against the DP oracle)
        rng = np.random.default_rng(8)
        sentinels = "0123456789"
        for _ in range(50):
            length = int(rng.integers(5, 30))
            s = "".join(rng.choice(list("abcdefgh"), length))
            edited = list(s)
            positions = rng.permutation(length)[:min(10, length)]
            prev = 0.0
            for k, pos in enumerate(positions, 1):
                edited[pos] = sentinels[(k - 1) % 10]
                cur = title_distance(NormalizedText(s),
                                     NormalizedText("".join(edited)))
                assert cur >= prev
                assert edit_distance_oracle(s, "".join(edited)) == k
                prev = cur


class TestAuthorDistance:
    def _names(self, *raw):
        return [split_authors(r)[0] for r in raw]

    def test_identity(self):
        a = self._names("Jane Doe")
        assert author_distance(a, a) == 0.0

    def test_half_overlap(self):
        a = self._names("Jane Doe", "John Roe")
        b = self._names("Jane Doe")
        assert author_distance(a, b) == 0.5

    def test_disjoint(self):
        assert author_distance(self._names("Jane Doe"),
                               self._names("Al Smith")) == 1.0

    def test_both_empty(self):
        assert author_distance([], []) == 0.0

    def test_one_empty(self):
        assert author_distance([], self._names("Jane Doe")) == 1.0

    def test_case_and_diacritics_fold(self):
        assert author_distance(self._names("Ana Núñez"),
                               self._names("ana nunez")) == 0.0


class TestAbstractDistance:
    def test_identical(self):
        assert abstract_distance(nt("we study things"), nt("we study things")) == 0.0

    def test_disjoint_tokens(self):
        assert abstract_distance(nt("alpha beta"), nt("gamma delta")) == 1.0

    def test_half_cosine(self):
        # hand-computed: dot=1, |a|=|b|=sqrt(2) -> cos=1/2
        assert abstract_distance(nt("a b"), nt("a c")) == 0.5

    def test_neutral_when_missing(self):
        assert abstract_distance(nt(""), nt("something")) == \
            NEUTRAL_ABSTRACT_DISTANCE
        assert abstract_distance(nt("something"), nt("")) == \
            NEUTRAL_ABSTRACT_DISTANCE

    def test_brute_force_cosine_oracle(self):
        rng = np.random.default_rng(9)
        vocab = [f"w{i}" for i in range(12)]
        for _ in range(200):
            a = " ".join(rng.choice(vocab, rng.integers(1, 30)))
            b = " ".join(rng.choice(vocab, rng.integers(1, 30)))
            got = abstract_distance(nt(a), nt(b))
            ca: dict[str, int] = {}
            cb: dict[str, int] = {}
            for t in a.split():
                ca[t] = ca.get(t, 0) + 1
            for t in b.split():
                cb[t] = cb.get(t, 0) + 1
            dot = sum(ca[t] * cb.get(t, 0) for t in ca)
            na = sum(v * v for v in ca.values()) ** 0.5
            nb = sum(v * v for v in cb.values()) ** 0.5
            want = 1.0 - dot / (na * nb)
            assert got == pytest.approx(max(0.0, min(1.0, want)), abs=1e-12)


class TestFeatureVector:
    def test_identical_metadata(self):
        p = make_preprint()
        c = make_published()
        assert feature_vector(p, c) == FeatureVector(0.0, 0.0, 0.0)

    def test_missing_abstract_neutral(self):
        p = make_preprint()
        c = make_published(abstract=None)
        assert feature_vector(p, c) == FeatureVector(0.0, 0.0, 0.5)

    def test_unrelated_records(self):
        p = make_preprint(title="On elliptic curves over finite fields",
                          authors=("Jane Doe",),
                          abstract="We count points on curves.")
        c = make_published(title="Spectral gaps of random graph Laplacians",
                           authors=("Al Smith",),
                           abstract="Expansion properties of sparse matrices.")
        v = feature_vector(p, c)
        assert v.title_d >= 0.7 and v.author_d == 1.0 and v.abstract_d >= 0.9

    def test_author_order_invariant(self):
        p1 = make_preprint(authors=("Jane Doe", "John Roe"))
        p2 = make_preprint(authors=("John Roe", "Jane Doe"))
        c = make_published(authors=("Jane Doe", "John Roe"))
        assert feature_vector(p1, c) == feature_vector(p2, c)

    def test_projected_path_matches_plain(self):
        rng = np.random.default_rng(10)
        words = ["zeta", "curve", "group", "flow", "bound", "sharp"]
        for _ in range(50):
            p = make_preprint(
                title=" ".join(rng.choice(words, 4)),
                authors=("Jane Doe", "John Roe"),
                abstract=" ".join(rng.choice(words, 12)) if rng.random() < 0.8 else "",
            )
            c = make_published(
                title=" ".join(rng.choice(words, 4)),
                authors=("Jane Doe",),
                abstract=" ".join(rng.choice(words, 12)) if rng.random() < 0.8 else None,
            )
            assert feature_vector(p, c) == \
                feature_vector_projected(project_preprint(p), project_published(c))


vectors = st.tuples(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1)) \
    .map(lambda t: FeatureVector(*t))


class TestLexCompare:
    def test_first_component_decides(self):
        assert lex_compare(FeatureVector(0, 1, 1), FeatureVector(0.1, 0, 0)) == -1

    def test_equal(self):
        assert lex_compare(FeatureVector(0, 0, 0), FeatureVector(0, 0, 0)) == 0

    def test_third_component_decides(self):
        assert lex_compare(FeatureVector(0.2, 0.1, 0),
                           FeatureVector(0.2, 0.1, 0.3)) == -1

    @given(vectors, vectors)
    @settings(max_examples=200, deadline=None)
    def test_antisymmetric(self, u, v):
        assert lex_compare(u, v) == -lex_compare(v, u)

    @given(vectors, vectors, vectors)
    @settings(max_examples=200, deadline=None)
    def test_transitive(self, u, v, w):
        if lex_compare(u, v) <= 0 and lex_compare(v, w) <= 0:
            assert lex_compare(u, w) <= 0


norm_text = st.text(alphabet="abcde -", max_size=20).map(
    lambda s: normalize_text(s))


class TestDistanceProperties:
    @given(norm_text, norm_text)
    @settings(max_examples=200, deadline=None)
    def test_title_symmetric_bounded(self, a, b):
        d = title_distance(a, b)
        assert 0.0 <= d <= 1.0
        assert d == title_distance(b, a)
        assert title_distance(a, a) == 0.0

    @given(norm_text, norm_text)
    @settings(max_examples=200, deadline=None)
    def test_abstract_symmetric_bounded(self, a, b):
        d = abstract_distance(a, b)
        assert 0.0 <= d <= 1.0
        assert d == abstract_distance(b, a)
        assert abstract_distance(a, a) in (0.0, NEUTRAL_ABSTRACT_DISTANCE)
