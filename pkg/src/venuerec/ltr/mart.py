"""Gradient-boosted regression trees over the ranking features.

Pointwise least squares on the graded labels: each stage fits a small
regression tree to the current residuals and the ensemble accumulates
shrunken leaf outputs.  Validation-metric early stopping keeps the best
prefix of trees.
"""

import dataclasses
import logging

import numpy as np

from .. import _kernels
from ..errors import VenuerecError
from .data import METRICS, TopicBlocks

log = logging.getLogger(__name__)

_EPS = 1e-12


@dataclasses.dataclass(frozen=True)
class MARTConfig:
    n_trees: int = 100
    shrinkage: float = 0.1
    max_leaves: int = 7
    min_leaf: int = 1
    patience: int = 20      # 0 disables early stopping and keeps every tree
    metric: str = "p5"
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1:
            raise VenuerecError("n_trees must be >= 1, got %d" % self.n_trees)
        if not 0.0 < self.shrinkage <= 1.0:
            raise VenuerecError("shrinkage must be in (0, 1], got %r"
                                % (self.shrinkage,))
        if self.max_leaves < 2:
            raise VenuerecError("max_leaves must be >= 2")
        if self.min_leaf < 1:
            raise VenuerecError("min_leaf must be >= 1")
        if self.patience < 0:
            raise VenuerecError("patience must be >= 0")
        if self.metric not in METRICS:
            raise VenuerecError("unknown metric %r" % (self.metric,))


@dataclasses.dataclass(frozen=True)
class Tree:
    """One regression tree as parallel node arrays.

    ``feature[i] < 0`` marks a leaf; otherwise a row goes to
    ``left[i]`` when its feature value is <= ``threshold[i]``.
    """

    feature: tuple
    threshold: tuple
    left: tuple
    right: tuple
    value: tuple

    def arrays(self):
        return (np.asarray(self.feature, dtype=np.int64),
                np.asarray(self.threshold, dtype=np.float64),
                np.asarray(self.left, dtype=np.int64),
                np.asarray(self.right, dtype=np.int64),
                np.asarray(self.value, dtype=np.float64))

    def n_leaves(self):
        return sum(1 for f in self.feature if f < 0)


@dataclasses.dataclass(frozen=True)
class TreeEnsemble:
    trees: tuple
    shrinkage: float
    metric: str
    seed: int
    history: dict = dataclasses.field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if not self.trees:
            raise VenuerecError("ensemble needs at least one tree")


def _best_candidate(X, resid, idx, min_leaf):
    """Best split of the rows `idx`: (gain, feature, threshold, left, right)."""
    best = None
    for j in range(X.shape[1]):
        col = X[idx, j]
        order = np.argsort(col, kind="stable")
        gain, pos = _kernels.best_split(col[order], resid[idx][order],
                                        min_leaf)
        if pos == 0:
            continue
        if best is None or gain > best[0] + _EPS:
            sorted_idx = idx[order]
            threshold = 0.5 * (col[order[pos - 1]] + col[order[pos]])
            best = (gain, j, float(threshold),
                    sorted_idx[:pos], sorted_idx[pos:])
    return best


def fit_tree(X, resid, max_leaves=7, min_leaf=1):
    """Grow one least-squares tree best-first up to `max_leaves` leaves."""
    feature = [-1]
    threshold = [0.0]
    left = [0]
    right = [0]
    value = [float(resid.mean()) if resid.size else 0.0]
    all_idx = np.arange(X.shape[0], dtype=np.int64)
    candidates = {}
    cand = _best_candidate(X, resid, all_idx, min_leaf)
    if cand is not None:
        candidates[0] = cand
    n_leaves = 1
    while n_leaves < max_leaves and candidates:
        node = max(candidates, key=lambda nid: (candidates[nid][0], -nid))
        gain, j, thr, left_idx, right_idx = candidates.pop(node)
        if gain <= _EPS:
            break
        feature[node] = j
        threshold[node] = thr
        for side, idx in ((0, left_idx), (1, right_idx)):
            child = len(feature)
            feature.append(-1)
            threshold.append(0.0)
            left.append(0)
            right.append(0)
            value.append(float(resid[idx].mean()))
            if side == 0:
                left[node] = child
            else:
                right[node] = child
            cand = _best_candidate(X, resid, idx, min_leaf)
            if cand is not None:
                candidates[child] = cand
        n_leaves += 1
    return Tree(feature=tuple(feature), threshold=tuple(threshold),
                left=tuple(left), right=tuple(right), value=tuple(value))


def _tree_outputs(tree, X):
    if X.shape[0] == 0:
        return np.zeros(0)
    f, t, l, r, v = tree.arrays()
    return _kernels.apply_tree(f, t, l, r, v, np.ascontiguousarray(X))


def train_mart(train_rows, valid_rows, config=None):
    """Boost `config.n_trees` stages on the training rows.

    After each stage the validation ranking metric is computed on the
    accumulated model; when `patience` consecutive stages bring no
    improvement the loop stops and the ensemble is cut back to the best
    scoring prefix (ties to the shorter one).  Without validation rows
    the training metric stands in.
    """
    config = config or MARTConfig()
    blocks = TopicBlocks(train_rows)
    if not len(blocks):
        raise VenuerecError("no training rows")
    vblocks = TopicBlocks(valid_rows)

    X, y = blocks.X, blocks.y
    F = np.zeros(len(blocks))
    Fv = np.zeros(len(vblocks))
    trees = []
    train_mse = []
    valid_metric = []
    best_m = -np.inf
    best_stage = 0
    since_best = 0
    for stage in range(1, config.n_trees + 1):
        tree = fit_tree(X, y - F, config.max_leaves, config.min_leaf)
        trees.append(tree)
        F += config.shrinkage * _tree_outputs(tree, X)
        if len(vblocks):
            Fv += config.shrinkage * _tree_outputs(tree, vblocks.X)
        diff = y - F
        train_mse.append(float(diff @ diff) / len(blocks))
        if len(vblocks):
            vm = vblocks.metric(Fv, config.metric)
        else:
            vm = blocks.metric(F, config.metric)
        valid_metric.append(vm)
        if vm > best_m + _EPS:
            best_m = vm
            best_stage = stage
            since_best = 0
        else:
            since_best += 1
        if config.patience and since_best >= config.patience:
            log.info("early stop after stage %d (best was %d)",
                     stage, best_stage)
            break

    kept = len(trees) if config.patience == 0 else best_stage
    history = {"train_mse": tuple(train_mse),
               "valid_metric": tuple(valid_metric),
               "kept_trees": kept}
    return TreeEnsemble(trees=tuple(trees[:kept]),
                        shrinkage=config.shrinkage,
                        metric=config.metric, seed=config.seed,
                        history=history)
