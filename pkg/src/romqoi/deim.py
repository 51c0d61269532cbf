"""DEIM interpolation indices, standard and DWR-adaptive, and the DEIM operator.

Indices are 0-based row positions. The nonlinear term ``f`` is approximated
from its samples ``f[indices]`` by ``V (P^T V)^{-1} P^T f``; projected onto a
POD basis ``U`` this gives the precomputed ``k x m`` factor
``U^T V (P^T V)^{-1}``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError, LinearSolveError, SelectionError
from .pod import PodBasis

__all__ = [
    "DeimApproximation",
    "deim_indices",
    "adaptive_deim_indices",
    "build_deim_operator",
    "approximate_nonlinear",
    "selection_condition_number",
    "count_in_region",
]

# Residual peak below this fraction of the candidate vector's peak means the
# candidate is (numerically) in the span of the previous vectors.
_RANK_TOL = 1e-12


def _as_matrix(V, name="V") -> np.ndarray:
    V = np.asarray(V, dtype=float)
    if V.ndim == 1:
        V = V[:, None]
    if V.ndim != 2 or V.shape[1] < 1:
        raise InvalidArgumentError(f"{name} must be a 2D array with >= 1 column")
    if V.shape[1] > V.shape[0]:
        raise InvalidArgumentError(f"{name} has more columns than rows")
    return V


def _interp_residual(V, idx, v):
    """``v - V c`` with ``c`` solving ``V[idx] c = v[idx]``."""
    try:
        c = np.linalg.solve(V[idx, :], v[idx])
    except np.linalg.LinAlgError:
        return None
    return v - V @ c


def deim_indices(V) -> np.ndarray:
    """Greedy DEIM interpolation indices for the columns of ``V``.

    Each new index is the position of the largest-magnitude entry of the
    residual left after interpolating the next column at the indices chosen
    so far; ties go to the smallest index.

    Raises
    ------
    InvalidArgumentError
        If the columns of ``V`` are (numerically) linearly dependent.
    """
    V = _as_matrix(V)
    m = V.shape[1]
    if not np.any(V[:, 0]):
        raise InvalidArgumentError("first column of V is zero")
    idx = [int(np.argmax(np.abs(V[:, 0])))]
    for ell in range(1, m):
        v = V[:, ell]
        r = _interp_residual(V[:, :ell], idx, v)
        if r is None:
            raise InvalidArgumentError(f"singular interpolation matrix at column {ell}")
        a = np.abs(r)
        if a.max() <= _RANK_TOL * max(np.abs(v).max(), 1e-300):
            raise InvalidArgumentError(f"column {ell} of V is linearly dependent")
        idx.append(int(np.argmax(a)))
    return np.array(idx, dtype=int)


def adaptive_deim_indices(V, W, alpha: float = 0.5, normalize: bool = False) -> np.ndarray:
    """DEIM indices steered by a dual-weighted-residual basis ``W``.

    The first index is the peak of ``|v_1|`` or of ``|w_1|``, whichever peak
    is larger. Afterwards both ``v_l`` and ``w_l`` are interpolated in the
    span of the chosen ``V`` columns and the next index maximizes
    ``alpha |r_v| + (1 - alpha) |r_w|`` over rows not yet selected.

    Parameters
    ----------
    V : (Ns, m) array_like
        Nonlinear-term basis.
    W : (Ns, p) array_like
        Leading left singular vectors of the dual-weighted residuals. When
        ``p < m``, the steps ``l > p`` use ``|r_v|`` alone.
    alpha : float
        Blend weight in ``[0, 1]``; ``alpha = 1`` ignores ``W`` after the
        first index.
    normalize : bool
        Scale ``|r_v|`` and ``|r_w|`` to unit maximum before blending.

    Raises
    ------
    SelectionError
        ``P^T V`` became singular; ``err.step`` is the 1-based step.
    """
    V = _as_matrix(V)
    W = _as_matrix(W, "W")
    if W.shape[0] != V.shape[0]:
        raise InvalidArgumentError("V and W must have the same number of rows")
    if not 0.0 <= alpha <= 1.0:
        raise InvalidArgumentError(f"alpha must lie in [0, 1], got {alpha}")
    ns, m = V.shape
    p = W.shape[1]

    av, aw = np.abs(V[:, 0]), np.abs(W[:, 0])
    rho_v, rho_w = int(np.argmax(av)), int(np.argmax(aw))
    idx = [rho_v if av[rho_v] >= aw[rho_w] else rho_w]
    taken = np.zeros(ns, dtype=bool)
    taken[idx[0]] = True

    for ell in range(1, m):
        Vl = V[:, :ell]
        rv = _interp_residual(Vl, idx, V[:, ell])
        if rv is None:
            raise SelectionError(f"singular P^T V at step {ell + 1}", step=ell + 1)
        score = np.abs(rv)
        if normalize and score.max() > 0:
            score = score / score.max()
        if ell < p:
            rw = _interp_residual(Vl, idx, W[:, ell])
            sw = np.abs(rw)
            if normalize and sw.max() > 0:
                sw = sw / sw.max()
            score = alpha * score + (1.0 - alpha) * sw
        # a selected row can only win through r_w; keep P^T V nonsingular
        score = np.where(taken, -np.inf, score)
        rho = int(np.argmax(score))
        idx.append(rho)
        taken[rho] = True
    idx = np.array(idx, dtype=int)
    if not np.isfinite(selection_condition_number(V, idx)):
        raise SelectionError("final P^T V is singular", step=m)
    return idx


def selection_condition_number(V, indices) -> float:
    """2-norm condition number of ``P^T V`` (``inf`` if singular)."""
    V = _as_matrix(V)
    indices = np.asarray(indices, dtype=int)
    PtV = V[indices, :]
    if PtV.shape[0] != PtV.shape[1]:
        raise InvalidArgumentError("P^T V must be square")
    s = np.linalg.svd(PtV, compute_uv=False)
    if s[-1] == 0.0:
        return float("inf")
    return float(s[0] / s[-1])


@dataclass
class DeimApproximation:
    """Precomputed DEIM data for a POD basis.

    Attributes
    ----------
    nonlinear_modes : (Ns, m) ndarray
    indices : (m,) int ndarray
    projector : (k, m) ndarray
        ``U^T V (P^T V)^{-1}``.
    condition_number : float
        ``cond_2(P^T V)``.
    """

    nonlinear_modes: np.ndarray
    indices: np.ndarray
    projector: np.ndarray
    condition_number: float

    @property
    def m(self) -> int:
        return self.indices.size

    def sample(self, f) -> np.ndarray:
        """``P^T f``."""
        return np.asarray(f, dtype=float)[self.indices]

    def interpolate(self, f_sampled) -> np.ndarray:
        """Full-space reconstruction ``V (P^T V)^{-1} f_sampled``."""
        PtV = self.nonlinear_modes[self.indices, :]
        return self.nonlinear_modes @ np.linalg.solve(PtV, f_sampled)


def build_deim_operator(U, V, indices) -> DeimApproximation:
    """Assemble ``U^T V (P^T V)^{-1}`` once for repeated online use."""
    Umat = U.modes if isinstance(U, PodBasis) else np.asarray(U, dtype=float)
    V = _as_matrix(V)
    indices = np.asarray(indices, dtype=int)
    if Umat.shape[0] != V.shape[0]:
        raise InvalidArgumentError("U and V must have the same number of rows")
    if indices.shape != (V.shape[1],):
        raise InvalidArgumentError(f"need {V.shape[1]} indices, got {indices.size}")
    if indices.min() < 0 or indices.max() >= V.shape[0]:
        raise InvalidArgumentError("index out of range")
    if np.unique(indices).size != indices.size:
        raise InvalidArgumentError("indices must be pairwise distinct")
    cond = selection_condition_number(V, indices)
    if not np.isfinite(cond) or cond > 1e15:
        raise LinearSolveError(f"P^T V is singular (condition number {cond:.3e})")
    PtV = V[indices, :]
    projector = np.linalg.solve(PtV.T, (Umat.T @ V).T).T
    return DeimApproximation(V.copy(), indices.copy(), projector, cond)


def approximate_nonlinear(deim: DeimApproximation, f_sampled) -> np.ndarray:
    """Reduced nonlinear term ``projector @ P^T F``."""
    f_sampled = np.asarray(f_sampled, dtype=float)
    if f_sampled.shape[0] != deim.m:
        raise InvalidArgumentError(f"expected {deim.m} samples, got {f_sampled.shape[0]}")
    return deim.projector @ f_sampled


def count_in_region(coords, indices, lo: float, hi: float, atol: float = 1e-12) -> int:
    """Number of indices whose coordinate lies in ``[lo, hi]``."""
    x = np.asarray(coords)[np.asarray(indices, dtype=int)]
    return int(np.count_nonzero((x >= lo - atol) & (x <= hi + atol)))
