"""Snapshot matrices and POD bases from a truncated SVD."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import DegenerateInputError, InvalidArgumentError
from .model import Trajectory

__all__ = [
    "SnapshotMatrix",
    "PodBasis",
    "collect_snapshots",
    "pod_basis",
    "left_singular_vectors",
    "energy_dimension",
    "cumulative_energy",
    "fix_signs",
    "project",
    "lift",
]

TAGS = ("forward-state", "adjoint-state", "nonlinear-term", "dual-weighted-residual")


@dataclass
class SnapshotMatrix:
    """Snapshots stored column-wise with one source tag per column."""

    data: np.ndarray
    source_tags: list = field(default_factory=list)

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=float)
        if self.data.ndim != 2 or self.data.shape[1] < 1:
            raise InvalidArgumentError("snapshot matrix must be 2D with >= 1 column")
        if not np.all(np.isfinite(self.data)):
            raise InvalidArgumentError("snapshots contain non-finite values")
        if not self.source_tags:
            self.source_tags = [None] * self.data.shape[1]
        if len(self.source_tags) != self.data.shape[1]:
            raise InvalidArgumentError("need exactly one tag per column")

    @property
    def shape(self):
        return self.data.shape

    def count(self, tag) -> int:
        return sum(t == tag for t in self.source_tags)


def _as_columns(item) -> np.ndarray:
    if isinstance(item, Trajectory):
        return item.states.T
    if isinstance(item, SnapshotMatrix):
        return item.data
    arr = np.asarray(item, dtype=float)
    if arr.ndim == 1:
        return arr[:, None]
    if arr.ndim != 2:
        raise InvalidArgumentError("expected a state sequence")
    # a sequence of states: one state per row
    return arr.T


def collect_snapshots(items, tags=None) -> SnapshotMatrix:
    """Concatenate trajectories or state sequences into one snapshot matrix.

    Parameters
    ----------
    items : list
        Each entry is a :class:`Trajectory`, an ``(n_states, Ns)`` array of
        states (one per row) or a :class:`SnapshotMatrix`.
    tags : list of str, optional
        One tag per entry, repeated over that entry's columns.
    """
    items = list(items)
    if not items:
        raise InvalidArgumentError("no snapshots given")
    if tags is not None and len(tags) != len(items):
        raise InvalidArgumentError("need one tag per snapshot group")
    blocks = [_as_columns(it) for it in items]
    nrows = {b.shape[0] for b in blocks}
    if len(nrows) != 1:
        raise InvalidArgumentError(f"snapshot dimensions differ: {sorted(nrows)}")
    col_tags = []
    for j, b in enumerate(blocks):
        if isinstance(items[j], SnapshotMatrix) and tags is None:
            col_tags.extend(items[j].source_tags)
        else:
            col_tags.extend([None if tags is None else tags[j]] * b.shape[1])
    return SnapshotMatrix(np.hstack(blocks), col_tags)


def fix_signs(modes: np.ndarray) -> np.ndarray:
    """Flip columns so each one's largest-magnitude entry is positive."""
    modes = np.array(modes, dtype=float)
    if modes.size == 0:
        return modes
    rows = np.argmax(np.abs(modes), axis=0)
    signs = np.sign(modes[rows, np.arange(modes.shape[1])])
    signs[signs == 0] = 1.0
    return modes * signs


def left_singular_vectors(data: np.ndarray):
    """Thin SVD ``(U, s)`` with the deterministic sign convention applied."""
    data = np.asarray(data, dtype=float)
    U, s, _ = sla.svd(data, full_matrices=False, lapack_driver="gesdd")
    return fix_signs(U), s


def cumulative_energy(singular_values) -> np.ndarray:
    """``I(m) = sum_{i<=m} s_i / sum_i s_i`` for every ``m`` (unsquared values)."""
    s = np.asarray(singular_values, dtype=float)
    total = s.sum()
    if total <= 0:
        raise DegenerateInputError("all singular values are zero")
    return np.cumsum(s) / total


def energy_dimension(singular_values, gamma: float) -> int:
    """Smallest ``m`` with ``I(m) >= gamma``."""
    if not 0.0 <= gamma <= 1.0:
        raise InvalidArgumentError(f"gamma must lie in [0, 1], got {gamma}")
    energy = cumulative_energy(singular_values)
    # I(N) is 1 up to rounding; never ask for more modes than exist
    k = int(np.searchsorted(energy, gamma, side="left")) + 1
    return min(max(k, 1), energy.size)


@dataclass
class PodBasis:
    """Orthonormal POD modes plus the singular spectrum they came from."""

    modes: np.ndarray
    singular_values: np.ndarray
    gamma: float | None = None

    @property
    def k(self) -> int:
        return self.modes.shape[1]

    @property
    def dim(self) -> int:
        return self.modes.shape[0]

    def truncate(self, k: int) -> "PodBasis":
        """Leading ``k`` modes of this basis."""
        if not 1 <= k <= self.k:
            raise InvalidArgumentError(f"cannot keep {k} of {self.k} modes")
        return PodBasis(self.modes[:, :k].copy(), self.singular_values, None)

    def project(self, x):
        return project(self, x)

    def lift(self, xr):
        return lift(self, xr)


def pod_basis(snapshots, gamma: float | None = None, k: int | None = None) -> PodBasis:
    """POD basis of a snapshot matrix.

    Exactly one of ``gamma`` (energy fraction, default 0.99) and ``k`` (fixed
    dimension) selects the number of modes. The SVD is taken of the raw,
    uncentered snapshots.
    """
    data = snapshots.data if isinstance(snapshots, SnapshotMatrix) else np.asarray(
        snapshots, dtype=float
    )
    if data.ndim != 2 or data.size == 0:
        raise InvalidArgumentError("snapshots must be a non-empty 2D array")
    if gamma is not None and k is not None:
        raise InvalidArgumentError("give either gamma or k, not both")
    if not np.any(data):
        raise DegenerateInputError("snapshot matrix is identically zero")
    U, s = left_singular_vectors(data)
    if k is None:
        gamma = 0.99 if gamma is None else gamma
        k = energy_dimension(s, gamma)
    elif not 1 <= k <= U.shape[1]:
        raise InvalidArgumentError(
            f"k={k} exceeds the {U.shape[1]} available singular vectors"
        )
    return PodBasis(U[:, :k].copy(), s, gamma)


def project(basis: PodBasis, x) -> np.ndarray:
    """Reduced coordinates ``U^T x`` (also works column-wise on a matrix)."""
    x = np.asarray(x, dtype=float)
    if x.shape[0] != basis.dim:
        raise InvalidArgumentError(f"expected leading dimension {basis.dim}")
    return basis.modes.T @ x


def lift(basis: PodBasis, xr) -> np.ndarray:
    """Full state ``U x~``."""
    xr = np.asarray(xr, dtype=float)
    if xr.shape[0] != basis.k:
        raise InvalidArgumentError(f"expected leading dimension {basis.k}")
    return basis.modes @ xr
