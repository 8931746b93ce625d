"""Random-forest classifier over similarity vectors, built from scratch.

Training is fully deterministic: the dataset is first canonicalized into
sorted unique (vector, label) rows with integer multiplicities, so the
model depends only on the empirical distribution of the training pairs,
never on their order or duplication. Each tree draws its bootstrap sample
and per-node feature subsets from an independent PRNG stream keyed by
(seed, tree index), which makes tree-parallel training equivalent to the
serial loop.

Splits minimize weighted Gini impurity over 2 of the 3 features per node
(the rounded-up square-root rule); candidate thresholds are midpoints of
consecutive distinct feature values; leaves hold the weighted positive
fraction. Prediction is the mean leaf probability across trees.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _kernels
from .candidates import CandidateIndex, query_candidates
from .corpus import CorpusStore
from .similarity import FeatureVector, feature_vector

SCHEMA_VERSION = 1
FEATURE_NAMES = ("title_d", "author_d", "abstract_d")
N_SUBSET_FEATURES = 2  # ceil(sqrt(3))

DEFAULT_N_TREES = 100
DEFAULT_MAX_DEPTH = 6
DEFAULT_THRESHOLD = 0.5
DEFAULT_NEG_PER_POS = 3

ORIGIN_POSITIVE = "doi_positive"
ORIGIN_NEGATIVE = "sampled_negative"


class TrainingError(ValueError):
    """The training data or hyperparameters cannot produce a model."""


class ModelFormatError(ValueError):
    """A model file is unreadable, truncated, or has the wrong schema."""


@dataclass(frozen=True)
class TrainingPair:
    vector: FeatureVector
    label: bool
    origin: str

    def __post_init__(self):
        if self.origin not in (ORIGIN_POSITIVE, ORIGIN_NEGATIVE):
            raise ValueError(f"unknown origin {self.origin!r}")
        if self.label != (self.origin == ORIGIN_POSITIVE):
            raise ValueError("label must be true exactly for DOI positives")


@dataclass
class ForestModel:
    trees: list[list[dict]]
    n_trees: int
    max_depth: int
    seed: int
    decision_threshold: float = DEFAULT_THRESHOLD
    feature_names: tuple[str, ...] = FEATURE_NAMES
    _packed: tuple | None = field(default=None, repr=False, compare=False)

    def packed(self) -> tuple:
        if self._packed is None:
            self._packed = _pack_trees(self.trees)
        return self._packed


def doi_pairs(store: CorpusStore) -> list[tuple[str, str]]:
    """(preprint id, accession) for every DOI resolving to a unique record."""
    pairs = []
    for pid in sorted(store.preprints):
        rec = store.preprints[pid]
        if rec.doi is None:
            continue
        hits = store.doi_index.get(rec.doi, ())
        if len(hits) == 1:
            pairs.append((pid, next(iter(hits))))
    return pairs


def training_pairs_from(store: CorpusStore, index: CandidateIndex,
                        pairs: list[tuple[str, str]],
                        neg_per_pos: int) -> list[TrainingPair]:
    """Positives from the given (preprint, accession) pairs, plus the up-to
    neg_per_pos highest-ranked non-matching candidates of each preprint."""
    if neg_per_pos < 1:
        raise TrainingError("neg_per_pos must be >= 1")
    training: list[TrainingPair] = []
    for pid, accession in pairs:
        p = store.preprints[pid]
        training.append(TrainingPair(feature_vector(p, store.published[accession]),
                                     True, ORIGIN_POSITIVE))
        ranked = query_candidates(index, p, k=neg_per_pos + 1)
        for neg in [a for a in ranked if a != accession][:neg_per_pos]:
            training.append(TrainingPair(feature_vector(p, store.published[neg]),
                                         False, ORIGIN_NEGATIVE))
    return training


def bootstrap_training_set(store: CorpusStore, index: CandidateIndex,
                           neg_per_pos: int = DEFAULT_NEG_PER_POS,
                           seed: int = 0) -> list[TrainingPair]:
    """Label pairs from DOI matches plus hard negatives from the candidate list.

    Every unique DOI pair becomes a positive. Wrong DOIs are accepted
    untreated; the resulting label noise is part of the method.
    """
    pairs = doi_pairs(store)
    if not pairs:
        raise TrainingError("no training signal: no DOI-resolvable pairs in store")
    training = training_pairs_from(store, index, pairs, neg_per_pos)
    # order carries no meaning (training canonicalizes); shuffle documents that
    rng = np.random.default_rng(_mask_seed(seed))
    perm = rng.permutation(len(training))
    return [training[i] for i in perm]


def _mask_seed(seed: int) -> int:
    return int(seed) & 0xFFFFFFFFFFFFFFFF


def _canonicalize(data: list[TrainingPair]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    rows = np.array(
        [[p.vector.title_d, p.vector.author_d, p.vector.abstract_d, float(p.label)]
         for p in data],
        dtype=np.float64,
    )
    uniq, counts = np.unique(rows, axis=0, return_counts=True)
    values = uniq[:, :3]
    labels = uniq[:, 3] > 0.5
    return values, labels, counts.astype(np.float64)


@dataclass
class _Builder:
    values: np.ndarray
    pos_w: np.ndarray
    neg_w: np.ndarray
    max_depth: int
    rng: np.random.Generator
    nodes: list[dict] = field(default_factory=list)

    def build(self, rows: np.ndarray, depth: int) -> int:
        pos = float(np.sum(self.pos_w[rows]))
        neg = float(np.sum(self.neg_w[rows]))
        if depth >= self.max_depth or pos == 0.0 or neg == 0.0:
            return self._leaf(pos, neg)
        feats = np.sort(self.rng.choice(3, size=N_SUBSET_FEATURES, replace=False))
        f, thr, _cost = _kernels.best_split(
            self.values[rows], self.pos_w[rows], self.neg_w[rows],
            feats.astype(np.int64),
        )
        if f < 0:
            return self._leaf(pos, neg)
        idx = len(self.nodes)
        self.nodes.append({})  # patched below; keeps pre-order placement
        go_left = self.values[rows, f] <= thr
        left = self.build(rows[go_left], depth + 1)
        right = self.build(rows[~go_left], depth + 1)
        self.nodes[idx] = {"feature": int(f), "threshold": float(thr),
                           "left": left, "right": right}
        return idx

    def _leaf(self, pos: float, neg: float) -> int:
        self.nodes.append({"leaf": pos / (pos + neg)})
        return len(self.nodes) - 1


def train_forest(data: list[TrainingPair], n_trees: int = DEFAULT_N_TREES,
                 max_depth: int = DEFAULT_MAX_DEPTH, seed: int = 0,
                 decision_threshold: float = DEFAULT_THRESHOLD) -> ForestModel:
    if n_trees < 1:
        raise TrainingError("n_trees must be >= 1")
    if max_depth < 1:
        raise TrainingError("max_depth must be >= 1")
    if not 0.0 < decision_threshold < 1.0:
        raise TrainingError("decision_threshold must be in (0, 1)")
    if not data:
        raise TrainingError("empty training set")
    labels = {p.label for p in data}
    if len(labels) < 2:
        raise TrainingError("training data must contain both labels")

    values, is_pos, weights = _canonicalize(data)
    n = values.shape[0]
    probs = weights / weights.sum()
    trees: list[list[dict]] = []
    for t in range(n_trees):
        rng = np.random.default_rng([_mask_seed(seed), t])
        draw = rng.choice(n, size=n, replace=True, p=probs)
        sample_w = np.bincount(draw, minlength=n).astype(np.float64)
        rows = np.nonzero(sample_w > 0)[0]
        builder = _Builder(
            values=values,
            pos_w=np.where(is_pos, sample_w, 0.0),
            neg_w=np.where(is_pos, 0.0, sample_w),
            max_depth=max_depth,
            rng=rng,
        )
        root = builder.build(rows, 0)
        assert root == 0
        trees.append(builder.nodes)
    return ForestModel(trees=trees, n_trees=n_trees, max_depth=max_depth,
                       seed=int(seed), decision_threshold=decision_threshold)


def _pack_trees(trees: list[list[dict]]):
    total = sum(len(t) for t in trees)
    feat = np.full(total, -1, dtype=np.int64)
    thr = np.zeros(total, dtype=np.float64)
    left = np.full(total, -1, dtype=np.int64)
    right = np.full(total, -1, dtype=np.int64)
    prob = np.zeros(total, dtype=np.float64)
    roots = np.zeros(len(trees), dtype=np.int64)
    base = 0
    for ti, nodes in enumerate(trees):
        roots[ti] = base
        for i, node in enumerate(nodes):
            if "leaf" in node:
                prob[base + i] = node["leaf"]
            else:
                feat[base + i] = node["feature"]
                thr[base + i] = node["threshold"]
                left[base + i] = base + node["left"]
                right[base + i] = base + node["right"]
        base += len(nodes)
    return feat, thr, left, right, prob, roots


def predict_many(model: ForestModel, vectors: np.ndarray) -> np.ndarray:
    x = np.ascontiguousarray(vectors, dtype=np.float64)
    feat, thr, left, right, prob, roots = model.packed()
    return _kernels.forest_eval(feat, thr, left, right, prob, roots, x)


def predict(model: ForestModel, v: FeatureVector) -> float:
    return float(predict_many(model, np.array([list(v)], dtype=np.float64))[0])


def classify(model: ForestModel, v: FeatureVector) -> bool:
    return predict(model, v) >= model.decision_threshold


def save_model(model: ForestModel, path: str | Path) -> None:
    payload = {
        "schema_version": SCHEMA_VERSION,
        "n_trees": model.n_trees,
        "max_depth": model.max_depth,
        "seed": model.seed,
        "decision_threshold": model.decision_threshold,
        "feature_names": list(model.feature_names),
        "trees": model.trees,
    }
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, sort_keys=True, ensure_ascii=False)
        fh.write("\n")
    os.replace(tmp, path)


def load_model(path: str | Path) -> ForestModel:
    try:
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ModelFormatError(f"unreadable model file {path}: {exc}") from exc
    if not isinstance(payload, dict) or "schema_version" not in payload:
        raise ModelFormatError(f"{path}: not a forest model file")
    if payload["schema_version"] != SCHEMA_VERSION:
        raise ModelFormatError(
            f"{path}: unsupported schema version {payload['schema_version']!r}"
        )
    try:
        model = ForestModel(
            trees=payload["trees"],
            n_trees=payload["n_trees"],
            max_depth=payload["max_depth"],
            seed=payload["seed"],
            decision_threshold=payload["decision_threshold"],
            feature_names=tuple(payload.get("feature_names", FEATURE_NAMES)),
        )
    except KeyError as exc:
        raise ModelFormatError(f"{path}: missing field {exc.args[0]!r}") from exc
    if len(model.trees) != model.n_trees:
        raise ModelFormatError(f"{path}: tree count does not match n_trees")
    return model
