"""Random forest classifier over the four normalized features.

Trees are grown on bootstrap samples with Gini-impurity splits over a
random feature subset per node (thresholds midway between consecutive
sorted values), to purity unless capped.  Prediction is a majority vote
with lexicographic tie-breaking.  Per-tree seeds derive deterministically
from the master seed, so results are reproducible and trees could train
in any order.

Cross-validation is stratified k-fold by default ("100-fold" read
literally); a repeated-random-split mode (cv_mode="repeated": cv_folds
repeats of a stratified 90/10 split) covers the other common reading.

The growth kernel is plain scalar code: all randomness (bootstrap rows,
per-node feature subsets) is drawn up front, and split scores use the
class-count identity sum(c^2)/s_left + sum(c^2)/s_right, updated
incrementally per sample.  When numba is importable the kernel is JIT
compiled; otherwise the identical code object runs as pure Python, so
fitted trees are the same either way, just slower.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .corpus import NormalizedCorpus
from .errors import (
    InsufficientClassSamples,
    InvalidConfig,
    SingleClass,
    SmallSampleWarning,
)

try:
    from numba import njit as _njit
except ImportError:  # pragma: no cover - accelerator only
    _njit = None


def _maybe_jit(func):
    if _njit is None:
        return func
    return _njit(cache=True)(func)


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 100
    max_features: int = 2       # floor(sqrt(4))
    min_leaf: int = 1
    max_depth: int | None = None
    bootstrap: bool = True
    seed: int = 0
    cv_folds: int = 100
    cv_mode: str = "kfold"      # "kfold" | "repeated"
    test_fraction: float = 0.1  # repeated mode only

    def validate(self, n_features: int = 4) -> None:
        if self.n_trees < 1:
            raise InvalidConfig("n_trees must be >= 1")
        if not 1 <= self.max_features <= n_features:
            raise InvalidConfig(f"max_features must be in [1, {n_features}]")
        if self.min_leaf < 1:
            raise InvalidConfig("min_leaf must be >= 1")
        if self.max_depth is not None and self.max_depth < 1:
            raise InvalidConfig("max_depth must be >= 1 or None")
        if self.cv_folds < 2:
            raise InvalidConfig("cv_folds must be >= 2")
        if self.cv_mode not in ("kfold", "repeated"):
            raise InvalidConfig(f"unknown cv_mode {self.cv_mode!r}")
        if not 0.0 < self.test_fraction < 1.0:
            raise InvalidConfig("test_fraction must be in (0, 1)")


def gini_impurity(counts: np.ndarray) -> float:
    """1 - sum(p_k^2) for a vector of class counts."""
    total = counts.sum()
    if total == 0:
        return 0.0
    p = counts / total
    return float(1.0 - (p * p).sum())


@dataclass
class _Tree:
    """Flat array representation: node i is a leaf iff leaf_class[i] >= 0."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    leaf_class: np.ndarray


def _grow_kernel(x, y, k, idx, feat_subsets, min_leaf, max_depth,
                 feature_out, threshold_out, left_out, right_out, leaf_out):
    """Grow one tree over idx (partitioned in place); returns node count.

    Scalar loops only (numba-compatible).  Split quality is compared via
    score = sum(left_counts^2)/n_left + sum(right_counts^2)/n_right, whose
    maximization equals Gini minimization; counts stay integer and the two
    divisions are the only float work, so jitted and plain execution agree.
    """
    n_total = idx.shape[0]
    mf = feat_subsets.shape[1]
    cap = feature_out.shape[0]
    stack_node = np.empty(cap, np.int64)
    stack_start = np.empty(cap, np.int64)
    stack_end = np.empty(cap, np.int64)
    stack_depth = np.empty(cap, np.int64)
    counts = np.zeros(k, np.int64)
    left_counts = np.zeros(k, np.int64)
    right_counts = np.zeros(k, np.int64)
    vals = np.empty(n_total, np.float64)
    svals = np.empty(n_total, np.float64)
    labs = np.empty(n_total, np.int64)
    scratch = np.empty(n_total, np.int64)

    top = 0
    stack_node[0] = 0
    stack_start[0] = 0
    stack_end[0] = n_total
    stack_depth[0] = 0
    top = 1
    n_nodes = 1
    while top > 0:
        top -= 1
        node = stack_node[top]
        start = stack_start[top]
        end = stack_end[top]
        depth = stack_depth[top]
        n_node = end - start

        for c in range(k):
            counts[c] = 0
        for i in range(start, end):
            counts[y[idx[i]]] += 1
        majority = 0
        n_classes = 0
        parent_sq = 0
        for c in range(k):
            if counts[c] > 0:
                n_classes += 1
            if counts[c] > counts[majority]:
                majority = c
            parent_sq += counts[c] * counts[c]

        if (n_classes <= 1 or n_node < 2 * min_leaf
                or (max_depth >= 0 and depth >= max_depth)):
            leaf_out[node] = majority
            continue

        parent_score = parent_sq / n_node
        best_score = parent_score
        best_feature = -1
        best_threshold = 0.0
        for j in range(mf):
            f = feat_subsets[node, j]
            for i in range(n_node):
                vals[i] = x[idx[start + i], f]
            order = np.argsort(vals[:n_node])
            for i in range(n_node):
                svals[i] = vals[order[i]]
                labs[i] = y[idx[start + order[i]]]
            for c in range(k):
                left_counts[c] = 0
                right_counts[c] = counts[c]
            sq_l = 0
            sq_r = parent_sq
            for i in range(n_node - 1):
                c = labs[i]
                sq_l += 2 * left_counts[c] + 1
                left_counts[c] += 1
                sq_r += 1 - 2 * right_counts[c]
                right_counts[c] -= 1
                s = i + 1
                if (svals[i] != svals[i + 1] and s >= min_leaf
                        and n_node - s >= min_leaf):
                    score = sq_l / s + sq_r / (n_node - s)
                    if score > best_score:
                        best_score = score
                        best_feature = f
                        best_threshold = (svals[i] + svals[i + 1]) / 2.0

        if best_feature == -1:
            leaf_out[node] = majority
            continue

        # stable partition of idx[start:end) around the threshold
        p = 0
        for i in range(start, end):
            if x[idx[i], best_feature] <= best_threshold:
                scratch[p] = idx[i]
                p += 1
        q = p
        for i in range(start, end):
            if x[idx[i], best_feature] > best_threshold:
                scratch[q] = idx[i]
                q += 1
        for i in range(n_node):
            idx[start + i] = scratch[i]

        left_id = n_nodes
        right_id = n_nodes + 1
        n_nodes += 2
        feature_out[node] = best_feature
        threshold_out[node] = best_threshold
        left_out[node] = left_id
        right_out[node] = right_id
        stack_node[top] = right_id
        stack_start[top] = start + p
        stack_end[top] = end
        stack_depth[top] = depth + 1
        top += 1
        stack_node[top] = left_id
        stack_start[top] = start
        stack_end[top] = start + p
        stack_depth[top] = depth + 1
        top += 1
    return n_nodes


_grow_kernel_fast = _maybe_jit(_grow_kernel)


def _predict_kernel(feature, threshold, left, right, leaf_class, x, out):
    for i in range(x.shape[0]):
        node = 0
        while leaf_class[node] < 0:
            if x[i, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[i] = leaf_class[node]


_predict_kernel_fast = _maybe_jit(_predict_kernel)


def _grow_tree(x: np.ndarray, y: np.ndarray, k: int, config: ForestConfig,
               rng: np.random.Generator) -> _Tree:
    """Draw per-tree randomness, then hand off to the growth kernel."""
    n = y.size
    if config.bootstrap:
        idx = rng.integers(0, n, size=n)
    else:
        idx = np.arange(n, dtype=np.int64)
    cap = 2 * n + 1  # a binary tree over n samples cannot exceed 2n-1 nodes
    mf = min(config.max_features, x.shape[1])
    # uniformly ordered feature subset per potential node
    feat_subsets = np.ascontiguousarray(
        rng.random((cap, x.shape[1])).argsort(axis=1)[:, :mf])
    feature = np.full(cap, -1, dtype=np.int64)
    threshold = np.zeros(cap, dtype=np.float64)
    left = np.full(cap, -1, dtype=np.int64)
    right = np.full(cap, -1, dtype=np.int64)
    leaf = np.full(cap, -1, dtype=np.int64)
    max_depth = -1 if config.max_depth is None else config.max_depth
    n_nodes = _grow_kernel_fast(
        np.ascontiguousarray(x), np.ascontiguousarray(y, dtype=np.int64), k,
        idx.astype(np.int64), feat_subsets, config.min_leaf, max_depth,
        feature, threshold, left, right, leaf)
    n_nodes = int(n_nodes)
    return _Tree(feature=feature[:n_nodes].copy(),
                 threshold=threshold[:n_nodes].copy(),
                 left=left[:n_nodes].copy(),
                 right=right[:n_nodes].copy(),
                 leaf_class=leaf[:n_nodes].copy())


def _tree_predict(tree: _Tree, x: np.ndarray) -> np.ndarray:
    """Class index per row.

    Routing decisions are pure comparisons, so the jitted walk and the
    vectorized fallback are interchangeable.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    out = np.empty(x.shape[0], dtype=np.int64)
    if _njit is not None:
        _predict_kernel_fast(tree.feature, tree.threshold, tree.left,
                             tree.right, tree.leaf_class, x, out)
        return out
    stack = [(0, np.arange(x.shape[0]))]
    while stack:
        node, idx = stack.pop()
        if idx.size == 0:
            continue
        cls = tree.leaf_class[node]
        if cls >= 0:
            out[idx] = cls
            continue
        mask = x[idx, tree.feature[node]] <= tree.threshold[node]
        stack.append((tree.left[node], idx[mask]))
        stack.append((tree.right[node], idx[~mask]))
    return out


@dataclass
class Forest:
    classes: list[str]
    trees: list[_Tree]
    config: ForestConfig

    def class_index(self) -> dict[str, int]:
        return {c: i for i, c in enumerate(self.classes)}


def train_forest(features: np.ndarray, labels: Sequence[str],
                 config: ForestConfig) -> Forest:
    """Grow ``config.n_trees`` trees on bootstrap samples of the data."""
    x = np.asarray(features, dtype=float)
    labels = np.asarray(labels)
    config.validate(x.shape[1])
    classes = sorted(set(labels.tolist()))
    if len(classes) < 2:
        raise SingleClass(f"training labels contain {len(classes)} class(es)")
    index = {c: i for i, c in enumerate(classes)}
    y = np.array([index[c] for c in labels], dtype=np.int64)

    trees = _grow_trees(x, y, len(classes), config,
                        np.random.SeedSequence(config.seed))
    return Forest(classes=classes, trees=trees, config=config)


def _grow_trees(x: np.ndarray, y: np.ndarray, k: int, config: ForestConfig,
                root_seq: np.random.SeedSequence) -> list[_Tree]:
    return [_grow_tree(x, y, k, config, np.random.default_rng(seq))
            for seq in root_seq.spawn(config.n_trees)]


def predict(forest: Forest, features: np.ndarray) -> tuple[list[str], np.ndarray]:
    """Majority vote across trees; returns (tags, per-class vote fractions).

    Vote ties resolve to the lexicographically smallest class tag.
    """
    x = np.atleast_2d(np.asarray(features, dtype=float))
    votes = np.zeros((x.shape[0], len(forest.classes)))
    for tree in forest.trees:
        pred = _tree_predict(tree, x)
        votes[np.arange(x.shape[0]), pred] += 1.0
    winners = votes.argmax(axis=1)  # first max = lexicographically smallest
    tags = [forest.classes[w] for w in winners]
    return tags, votes / len(forest.trees)


# ---------------------------------------------------------------------------
# evaluation


@dataclass
class EvalReport:
    classes: list[str]
    confusion_counts: np.ndarray         # K x K, rows = true class
    confusion_percent: np.ndarray        # rows normalized to 100
    accuracy: tuple[float, float]        # (mean, std) across folds
    precision: tuple[float, float]
    recall: tuple[float, float]
    f1: tuple[float, float]
    train_accuracy: tuple[float, float]
    per_class_recall: np.ndarray
    n_folds: int


def _fold_metrics(conf: np.ndarray) -> tuple[float, float, float, float]:
    """(accuracy, macro precision, macro recall, macro f1); 0/0 counts as 0."""
    total = conf.sum()
    accuracy = float(np.trace(conf)) / total if total else 0.0
    diag = np.diag(conf).astype(float)
    rows = conf.sum(axis=1).astype(float)
    cols = conf.sum(axis=0).astype(float)
    recall = np.divide(diag, rows, out=np.zeros_like(diag), where=rows > 0)
    precision = np.divide(diag, cols, out=np.zeros_like(diag), where=cols > 0)
    pr = precision + recall
    f1 = np.divide(2.0 * precision * recall, pr, out=np.zeros_like(diag), where=pr > 0)
    return accuracy, float(precision.mean()), float(recall.mean()), float(f1.mean())


def _stratified_folds(y: np.ndarray, k_classes: int, folds: int,
                      rng: np.random.Generator) -> np.ndarray:
    """Fold id per sample; each class spread round-robin after a shuffle."""
    assignment = np.empty(y.size, dtype=np.int64)
    cursor = 0
    for cls in range(k_classes):
        idx = np.flatnonzero(y == cls)
        idx = rng.permutation(idx)
        for i, sample in enumerate(idx):
            assignment[sample] = (cursor + i) % folds
        cursor += idx.size
    return assignment


def cross_validate(features: np.ndarray, labels: Sequence[str],
                   config: ForestConfig) -> EvalReport:
    """Stratified cross-validation; metrics as mean +- std across folds.

    The confusion matrix is summed over all folds, then row-normalized to
    percentages.  Raises :class:`InsufficientClassSamples` when a class is
    too small for the requested stratification.
    """
    x = np.asarray(features, dtype=float)
    labels = np.asarray(labels)
    config.validate(x.shape[1])
    classes = sorted(set(labels.tolist()))
    if len(classes) < 2:
        raise SingleClass("cross-validation needs at least 2 classes")
    index = {c: i for i, c in enumerate(classes)}
    y = np.array([index[c] for c in labels], dtype=np.int64)
    k = len(classes)

    class_counts = np.bincount(y, minlength=k)
    if class_counts.min() < 2:
        lacking = classes[int(class_counts.argmin())]
        raise InsufficientClassSamples(f"class {lacking!r} has {class_counts.min()} sample(s)")

    if config.cv_mode == "kfold":
        if class_counts.min() < config.cv_folds:
            lacking = classes[int(class_counts.argmin())]
            raise InsufficientClassSamples(
                f"class {lacking!r} has {class_counts.min()} samples "
                f"< cv_folds={config.cv_folds}")
        assign_rng = np.random.default_rng(np.random.SeedSequence([config.seed, 0]))
        assignment = _stratified_folds(y, k, config.cv_folds, assign_rng)
        splits = [(np.flatnonzero(assignment != f), np.flatnonzero(assignment == f))
                  for f in range(config.cv_folds)]
    else:
        splits = []
        for rep in range(config.cv_folds):
            rng = np.random.default_rng(np.random.SeedSequence([config.seed, 0, rep]))
            test_sel = []
            for cls in range(k):
                idx = rng.permutation(np.flatnonzero(y == cls))
                n_test = max(1, int(round(idx.size * config.test_fraction)))
                if n_test >= idx.size:
                    raise InsufficientClassSamples(
                        f"class {classes[cls]!r} too small for test_fraction")
                test_sel.append(idx[:n_test])
            test = np.sort(np.concatenate(test_sel))
            mask = np.ones(y.size, dtype=bool)
            mask[test] = False
            splits.append((np.flatnonzero(mask), test))

    conf_total = np.zeros((k, k), dtype=np.int64)
    fold_stats = []
    train_accs = []
    for fold, (train_idx, test_idx) in enumerate(splits):
        # per-fold forest seeded from (master seed, fold number)
        fold_forest = _grow_trees(x[train_idx], y[train_idx], k, config,
                                  np.random.SeedSequence([config.seed, 1, fold]))
        pred_test = _vote(fold_forest, x[test_idx], k)
        conf = np.zeros((k, k), dtype=np.int64)
        np.add.at(conf, (y[test_idx], pred_test), 1)
        conf_total += conf
        fold_stats.append(_fold_metrics(conf))
        pred_train = _vote(fold_forest, x[train_idx], k)
        train_accs.append(float((pred_train == y[train_idx]).mean()))

    stats = np.array(fold_stats)
    mean = stats.mean(axis=0)
    std = stats.std(axis=0)
    rows = conf_total.sum(axis=1, keepdims=True).astype(float)
    percent = 100.0 * np.divide(conf_total, rows, out=np.zeros((k, k)), where=rows > 0)
    diag = np.diag(conf_total).astype(float)
    row_tot = conf_total.sum(axis=1).astype(float)
    per_class_recall = np.divide(diag, row_tot, out=np.zeros(k), where=row_tot > 0)
    return EvalReport(
        classes=classes,
        confusion_counts=conf_total,
        confusion_percent=percent,
        accuracy=(float(mean[0]), float(std[0])),
        precision=(float(mean[1]), float(std[1])),
        recall=(float(mean[2]), float(std[2])),
        f1=(float(mean[3]), float(std[3])),
        train_accuracy=(float(np.mean(train_accs)), float(np.std(train_accs))),
        per_class_recall=per_class_recall,
        n_folds=len(splits),
    )


def _vote(trees: list[_Tree], x: np.ndarray, k: int) -> np.ndarray:
    votes = np.zeros((x.shape[0], k))
    for tree in trees:
        pred = _tree_predict(tree, x)
        votes[np.arange(x.shape[0]), pred] += 1.0
    return votes.argmax(axis=1)


def style_report(corpus: NormalizedCorpus, nation: str,
                 config: ForestConfig) -> EvalReport:
    """Cross-validated style classification for one nation's tracks.

    Tracks without a style tag are excluded (they stay available to the
    nation/year analyses).  Classes are the style tags sorted
    lexicographically.
    """
    mask = np.array([r.nation == nation and r.style != "" for r in corpus.records])
    if not mask.any():
        raise InsufficientClassSamples(f"no styled tracks for nation {nation!r}")
    features = corpus.feature_matrix[mask]
    styles = [r.style for r, m in zip(corpus.records, mask) if m]
    if len(set(styles)) < 2:
        raise InsufficientClassSamples(
            f"nation {nation!r} has {len(set(styles))} style(s); need >= 2")
    if features.shape[0] < 10 * config.cv_folds:
        warnings.warn(f"only {features.shape[0]} tracks for {config.cv_folds}-fold CV",
                      SmallSampleWarning, stacklevel=2)
    return cross_validate(features, styles, config)
