"""Entanglement measures and witnesses.

Every function accepts a :class:`~entlab.states.DensityMatrix`, a
:class:`~entlab.states.PureState`, or a raw array.  A raw array may carry
leading batch axes, in which case an array of values is returned.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import linalg
from .errors import DimensionMismatch, NotAState
from .states import STATE_TOL, DensityMatrix, PureState

CLAMP_TOL = 1e-10
# Eigenvalues of rho below this are treated as exact zeros before taking
# square roots; otherwise round-off of order 1e-17 turns into 3e-9 errors.
RANK_TOL = 1e-14

SIGMA_YY = np.kron(linalg.PAULI_Y, linalg.PAULI_Y)

MEASURE_RANGES = {
    "concurrence": (0.0, 1.0),
    "negativity": (0.0, np.inf),
    "log_negativity": (0.0, np.inf),
    "chsh_max": (0.0, 2.0 * np.sqrt(2.0)),
}


@dataclass(frozen=True)
class MeasureValue:
    name: str
    value: float
    cut: tuple[int, ...] = ()

    def __post_init__(self):
        if self.name not in MEASURE_RANGES:
            raise ValueError(f"unknown measure {self.name!r}")
        lo, hi = MEASURE_RANGES[self.name]
        if not lo - 1e-9 <= self.value <= hi + 1e-9:
            raise ValueError(f"{self.name}={self.value} outside [{lo}, {hi}]")


def _unpack(rho, dims=None):
    """Return ``(array, dims, is_single)``."""
    if isinstance(rho, PureState):
        rho = rho.density()
    if isinstance(rho, DensityMatrix):
        return rho.matrix, rho.dims, True
    m = linalg.as_matrix(rho)
    if dims is None:
        dims = (2, 2) if m.shape[-1] == 4 else (m.shape[-1],)
    return m, tuple(dims), m.ndim == 2


def _scalar(x, single):
    return float(x) if single else x


def _two_qubit(rho):
    m, dims, single = _unpack(rho)
    if m.shape[-1] != 4 or tuple(dims) != (2, 2):
        raise DimensionMismatch(f"two-qubit state required, got dims {dims}")
    return m, single


def _state_eig(m: np.ndarray) -> linalg.EigenDecomposition:
    """Eigendecomposition doubling as a state check for raw batches."""
    dec = linalg.hermitian_eig(m)
    tr = np.trace(m, axis1=-2, axis2=-1)
    if np.any(np.abs(tr - 1.0) > STATE_TOL):
        raise NotAState("trace differs from 1 by more than 1e-10")
    if np.any(dec.values[..., 0] < -STATE_TOL):
        raise NotAState(f"negative eigenvalue {dec.values.min():.3e}")
    return dec


def spin_flip(m: np.ndarray) -> np.ndarray:
    """``(sigma_y ⊗ sigma_y) rho^* (sigma_y ⊗ sigma_y)``, conjugation entry-wise."""
    return SIGMA_YY @ np.conj(m) @ SIGMA_YY


def spin_flip_roots(rho, method: str = "singular") -> np.ndarray:
    """Square roots of the eigenvalues of ``R = rho rho~``, descending.

    ``method="singular"`` (default) obtains them as the singular values of
    ``Y = sqrt(rho) (sigma_y ⊗ sigma_y) sqrt(rho)^*``, read off the spectrum
    of the Hermitian matrix ``[[0, Y], [Y^dagger, 0]]``.  ``Y Y^dagger`` equals
    ``sqrt(rho) rho~ sqrt(rho)``, so these are the same numbers as the
    eigenvalues of ``matrix_sqrt_psd(sqrt(rho) rho~ sqrt(rho))``
    (``method="sqrt"``), but without squaring, so roots near zero keep full
    absolute precision.
    """
    m, _ = _two_qubit(rho)
    dec = _state_eig(m)
    p = np.where(dec.values < RANK_TOL, 0.0, dec.values)
    sqrt_rho = linalg.EigenDecomposition(np.sqrt(p), dec.vectors).reconstruct()
    if method == "sqrt":
        inner = sqrt_rho @ spin_flip(m) @ sqrt_rho
        inner = 0.5 * (inner + linalg.dagger(inner))
        vals = linalg.hermitian_eig(linalg.matrix_sqrt_psd(inner, CLAMP_TOL)).values
        return np.clip(vals[..., ::-1], 0.0, None)
    if method != "singular":
        raise ValueError(f"unknown method {method!r}")
    y = sqrt_rho @ SIGMA_YY @ np.conj(sqrt_rho)
    batch = y.shape[:-2]
    h = np.zeros(batch + (8, 8), dtype=complex)
    h[..., :4, 4:] = y
    h[..., 4:, :4] = linalg.dagger(y)
    vals = linalg.hermitian_eig(h).values
    return np.clip(vals[..., 4:][..., ::-1], 0.0, None)


def concurrence(rho, method: str = "singular"):
    """Wootters concurrence ``max(0, mu1 - mu2 - mu3 - mu4)`` of a two-qubit state."""
    _, single = _two_qubit(rho)
    mu = spin_flip_roots(rho, method)
    c = mu[..., 0] - mu[..., 1] - mu[..., 2] - mu[..., 3]
    return _scalar(np.clip(c, 0.0, 1.0), single)


def _default_cut(dims, cut) -> tuple[int, ...]:
    if cut is None:
        if len(dims) != 2:
            raise DimensionMismatch("cut must be given for more than two subsystems")
        return (1,)
    if isinstance(cut, (int, np.integer)):
        cut = (int(cut),)
    cut = tuple(sorted(set(int(c) for c in cut)))
    if not cut or len(cut) >= len(dims) or any(c < 0 or c >= len(dims) for c in cut):
        raise DimensionMismatch(f"cut {cut} does not partition {len(dims)} subsystems")
    return cut


def _pt_trace_norm(rho, cut):
    m, dims, single = _unpack(rho)
    cut = _default_cut(dims, cut)
    pt = linalg.partial_transpose(m, dims, cut)
    return linalg.trace_norm(pt), single


def negativity(rho, cut: Sequence[int] | None = None):
    """``(||rho^{T_cut}||_1 - 1) / 2``; ``cut`` lists the transposed subsystems."""
    tn, single = _pt_trace_norm(rho, cut)
    return _scalar(np.clip((np.asarray(tn) - 1.0) / 2.0, 0.0, None), single)


def log_negativity(rho, cut: Sequence[int] | None = None):
    """``log2 ||rho^{T_cut}||_1``, additive on tensor products."""
    tn, single = _pt_trace_norm(rho, cut)
    return _scalar(np.clip(np.log2(np.asarray(tn)), 0.0, None), single)


def is_ppt(rho, cut: Sequence[int] | None = None, tol: float = CLAMP_TOL):
    m, dims, single = _unpack(rho)
    cut = _default_cut(dims, cut)
    vals = linalg.hermitian_eig(linalg.partial_transpose(m, dims, cut)).values
    res = vals[..., 0] >= -tol
    return bool(res) if single else res


def correlation_matrix(rho) -> np.ndarray:
    """``T_ij = Tr[rho sigma_i ⊗ sigma_j]`` for ``i, j`` in x, y, z."""
    m, _ = _two_qubit(rho)
    paulis = (linalg.PAULI_X, linalg.PAULI_Y, linalg.PAULI_Z)
    t = np.empty(m.shape[:-2] + (3, 3))
    for i, si in enumerate(paulis):
        for j, sj in enumerate(paulis):
            t[..., i, j] = np.real(np.trace(m @ np.kron(si, sj), axis1=-2, axis2=-1))
    return t


def chsh_max(rho):
    """Largest CHSH value over projective qubit measurements.

    Uses ``2 sqrt(u1 + u2)`` with ``u1 >= u2`` the two largest eigenvalues of
    ``T^T T``; values above 2 witness Bell nonlocality.
    """
    _, single = _two_qubit(rho)
    t = correlation_matrix(rho)
    tt = np.swapaxes(t, -1, -2) @ t
    u = linalg.hermitian_eig(tt.astype(complex)).values
    s = np.clip(u[..., -1] + u[..., -2], 0.0, None)
    return _scalar(np.minimum(2.0 * np.sqrt(s), 2.0 * np.sqrt(2.0)), single)


_MEASURES = {
    "concurrence": lambda rho, cut: concurrence(rho),
    "negativity": negativity,
    "log_negativity": log_negativity,
    "chsh_max": lambda rho, cut: chsh_max(rho),
}


def evaluate(name: str, rho, cut: Sequence[int] | None = None) -> MeasureValue:
    try:
        fn = _MEASURES[name]
    except KeyError:
        raise ValueError(f"unknown measure {name!r}") from None
    value = fn(rho, cut)
    cut_t = () if cut is None else tuple(np.atleast_1d(cut).tolist())
    return MeasureValue(name, float(value), cut_t)
