"""Z-score normalization and Fuzzy C-Means clustering.

FCM minimizes sum_i sum_j u_ij^m ||x_i - c_j||^2 by alternating the
closed-form center update c_j = sum_i u_ij^m x_i / sum_i u_ij^m with
the membership update u_ij = 1 / sum_k (d_ij/d_ik)^(2/(m-1)), starting
from a seeded random column-stochastic partition. Iteration stops when
the objective improves by less than ``tol`` or ``max_iter`` is reached.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError
from .hrv_features import FEATURE_ORDER

# Point-at-center threshold for the membership singularity rule.
_COINCIDENT_DIST = 1e-12

# Pair order for the six 2-D projections: (x feature, y feature).
PAIRWISE_ORDER = (
    ("sdnn", "avnn"),
    ("rmssd", "avnn"),
    ("pnnx", "avnn"),
    ("rmssd", "sdnn"),
    ("pnnx", "sdnn"),
    ("pnnx", "rmssd"),
)


@dataclass(frozen=True)
class FcmConfig:
    n_clusters: int = 3
    fuzzifier_m: float = 2.0
    max_iter: int = 100
    tol: float = 1e-5
    seed: int = 0

    def __post_init__(self):
        if self.n_clusters < 2:
            raise ConfigError(f"n_clusters must be >= 2, got {self.n_clusters}")
        if self.fuzzifier_m <= 1:
            raise ConfigError(f"fuzzifier must be > 1, got {self.fuzzifier_m}")
        if self.max_iter < 1:
            raise ConfigError(f"max_iter must be >= 1, got {self.max_iter}")
        if self.tol <= 0:
            raise ConfigError(f"tol must be > 0, got {self.tol}")
        if self.seed < 0:
            raise ConfigError(f"seed must be non-negative, got {self.seed}")


@dataclass(frozen=True)
class FcmResult:
    centers: np.ndarray          # (n_clusters, n_features)
    partition: np.ndarray        # (n_clusters, n_points), columns sum to 1
    objective_trace: tuple[float, ...]
    iterations_run: int
    converged: bool


def zscore(matrix: np.ndarray, column_names=None):
    """Normalize columns to mean 0, sample std 1.

    Returns (normalized, means, stds). A zero-variance column raises
    DataError naming the offending column.
    """
    x = np.asarray(matrix, dtype=float)
    if x.ndim != 2 or x.shape[0] < 2:
        raise DataError(f"zscore needs a 2-D matrix with >= 2 rows, "
                        f"got shape {x.shape}")
    means = x.mean(axis=0)
    stds = x.std(axis=0, ddof=1)
    bad = np.flatnonzero(stds == 0)
    if bad.size:
        names = column_names or [f"column {j}" for j in range(x.shape[1])]
        raise DataError(
            "zero variance in " + ", ".join(str(names[j]) for j in bad)
            + "; cannot z-score"
        )
    return (x - means) / stds, means, stds


def init_partition(n_clusters: int, n_points: int, seed: int) -> np.ndarray:
    """Seeded random column-stochastic (n_clusters, n_points) matrix."""
    if n_clusters > n_points:
        raise DataError(
            f"n_clusters ({n_clusters}) exceeds n_points ({n_points})"
        )
    rng = np.random.default_rng(seed)
    u = rng.random((n_clusters, n_points))
    return u / u.sum(axis=0, keepdims=True)


def update_centers(data: np.ndarray, partition: np.ndarray,
                   m: float) -> np.ndarray:
    """Weighted means with weights u^m; each center is a convex
    combination of the data points."""
    w = partition ** m
    totals = w.sum(axis=1)
    if np.any(totals <= 0) or not np.all(np.isfinite(totals)):
        dead = np.flatnonzero(~(totals > 0))
        raise DataError(f"degenerate cluster(s) {dead.tolist()}: "
                        "total membership weight underflowed to zero")
    return (w @ data) / totals[:, None]


def _sq_distances(data: np.ndarray, centers: np.ndarray) -> np.ndarray:
    """(n_clusters, n_points) squared Euclidean distances."""
    diff = data[None, :, :] - centers[:, None, :]
    return np.einsum("cnd,cnd->cn", diff, diff)


def update_partition(data: np.ndarray, centers: np.ndarray,
                     m: float) -> np.ndarray:
    """Membership update; points coinciding with a center get their
    membership concentrated there (split equally over ties)."""
    d2 = _sq_distances(data, centers)
    coincident = d2 < _COINCIDENT_DIST ** 2

    # coincident points produce inf/inf columns here; they are replaced
    # by the hard singularity rule below
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = d2 ** (-1.0 / (m - 1.0))
        u = inv / inv.sum(axis=0, keepdims=True)

    singular = coincident.any(axis=0)
    if np.any(singular):
        hard = coincident[:, singular].astype(float)
        u[:, singular] = hard / hard.sum(axis=0, keepdims=True)
    return u


def objective(data: np.ndarray, centers: np.ndarray, partition: np.ndarray,
              m: float) -> float:
    """J = sum_ij u_ij^m ||x_i - c_j||^2."""
    return float(np.sum(partition ** m * _sq_distances(data, centers)))


def fcm(data: np.ndarray, config: FcmConfig,
        initial_partition: np.ndarray | None = None) -> FcmResult:
    """Run FCM on a (n_points, n_features) matrix.

    ``initial_partition`` overrides the seeded random start (used for
    reproducing a specific run); it must be column-stochastic with
    shape (n_clusters, n_points).
    """
    x = np.asarray(data, dtype=float)
    if x.ndim != 2:
        raise DataError(f"data must be 2-D, got shape {x.shape}")
    n_points = x.shape[0]
    if config.n_clusters > n_points:
        raise DataError(
            f"clustering: n_clusters ({config.n_clusters}) exceeds the "
            f"number of data points ({n_points})"
        )
    if np.unique(x, axis=0).shape[0] < config.n_clusters:
        raise DataError(
            "clustering: fewer distinct points than clusters requested"
        )

    if initial_partition is None:
        u = init_partition(config.n_clusters, n_points, config.seed)
    else:
        u = np.array(initial_partition, dtype=float)
        if u.shape != (config.n_clusters, n_points):
            raise ConfigError(
                f"initial partition shape {u.shape} does not match "
                f"({config.n_clusters}, {n_points})"
            )

    m = config.fuzzifier_m
    trace: list[float] = []
    centers = None
    converged = False
    prev_obj = np.inf
    for _ in range(config.max_iter):
        centers = update_centers(x, u, m)
        u = update_partition(x, centers, m)
        obj = objective(x, centers, u, m)
        trace.append(obj)
        if prev_obj - obj < config.tol:
            converged = True
            break
        prev_obj = obj

    return FcmResult(
        centers=centers,
        partition=u,
        objective_trace=tuple(trace),
        iterations_run=len(trace),
        converged=converged,
    )


def hard_labels(partition: np.ndarray) -> np.ndarray:
    """Argmax membership per point; ties go to the lowest cluster index."""
    return np.argmax(partition, axis=0)


def pairwise_plot_data(features: np.ndarray, partition: np.ndarray):
    """The six 2-D feature projections with hard cluster labels.

    Returns a list of (pair_names, points, labels) where points is an
    (n, 2) array in (x, y) order and labels the argmax cluster per row.
    """
    x = np.asarray(features, dtype=float)
    if x.ndim != 2 or x.shape[1] != 4:
        raise DataError(f"expected 4 feature columns, got shape {x.shape}")
    labels = hard_labels(partition)
    idx = {name: j for j, name in enumerate(FEATURE_ORDER)}
    out = []
    for xf, yf in PAIRWISE_ORDER:
        pts = np.column_stack([x[:, idx[xf]], x[:, idx[yf]]])
        out.append(((xf, yf), pts, labels.copy()))
    return out
