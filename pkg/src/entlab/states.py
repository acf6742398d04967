"""Bipartite state families and density-matrix validation.

Basis convention: computational basis ``|ab>`` with subsystem A as the left
(slow) index, and ``|psi+> = (|00> + |11>)/sqrt(2)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import linalg
from .errors import DimensionMismatch, NotAState, NotNormalized, NotUnitary, ParamOutOfRange

STATE_TOL = 1e-10
NORM_TOL = 1e-12


@dataclass(frozen=True)
class Diagnostics:
    hermiticity_defect: float
    trace_defect: float
    min_eigenvalue: float
    failures: tuple[str, ...] = ()

    @property
    def passed(self) -> bool:
        return not self.failures


def validate(matrix, dims: Sequence[int] | None = None, tol: float = STATE_TOL) -> Diagnostics:
    """Check Hermiticity, unit trace and positivity of a candidate state.

    Never raises for a numerically bad matrix; the outcome is reported in the
    returned record (``failures`` lists ``NotHermitian``, ``TraceDefect`` and
    ``NegativeEigenvalue`` as applicable).
    """
    m = linalg.as_matrix(matrix)
    if dims is not None:
        linalg._check_dims(m, dims)
    herm = float(linalg.hermiticity_defect(m))
    tr_def = float(abs(np.trace(m) - 1.0))
    h = 0.5 * (m + linalg.dagger(m))
    min_eig = float(linalg.hermitian_eig(h).values[0])
    failures = []
    if herm > tol:
        failures.append("NotHermitian")
    if tr_def > tol:
        failures.append("TraceDefect")
    if min_eig < -tol:
        failures.append("NegativeEigenvalue")
    return Diagnostics(herm, tr_def, min_eig, tuple(failures))


@dataclass(frozen=True)
class DensityMatrix:
    """A validated quantum state with its subsystem dimensions."""

    matrix: np.ndarray
    dims: tuple[int, ...]
    diagnostics: Diagnostics = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        m = linalg.as_matrix(self.matrix)
        if m.ndim != 2:
            raise DimensionMismatch("DensityMatrix holds a single matrix")
        dims = linalg._check_dims(m, self.dims)
        diag = validate(m, dims)
        if not diag.passed:
            raise NotAState(f"not a density matrix: {', '.join(diag.failures)}", diag)
        m = m.copy()
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "diagnostics", diag)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))

    def tensor(self, other: "DensityMatrix") -> "DensityMatrix":
        return DensityMatrix(np.kron(self.matrix, other.matrix), self.dims + other.dims)

    def reduced(self, keep) -> np.ndarray:
        return linalg.partial_trace(self.matrix, self.dims, keep)


@dataclass(frozen=True)
class PureState:
    amplitudes: np.ndarray
    dims: tuple[int, ...]

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if not np.all(np.isfinite(a)):
            raise ValueError("amplitudes must be finite")
        dims = tuple(int(d) for d in self.dims)
        if int(np.prod(dims)) != a.size:
            raise DimensionMismatch(f"dims {dims} do not match {a.size} amplitudes")
        if abs(np.linalg.norm(a) - 1.0) > NORM_TOL:
            raise NotNormalized(f"state norm {np.linalg.norm(a):.15g} != 1")
        a = a.copy()
        a.flags.writeable = False
        object.__setattr__(self, "amplitudes", a)
        object.__setattr__(self, "dims", dims)

    def projector(self) -> np.ndarray:
        return np.outer(self.amplitudes, np.conj(self.amplitudes))

    def density(self) -> DensityMatrix:
        return DensityMatrix(self.projector(), self.dims)

    def tensor(self, other: "PureState") -> "PureState":
        return PureState(np.kron(self.amplitudes, other.amplitudes), self.dims + other.dims)


def as_density(state) -> DensityMatrix:
    if isinstance(state, DensityMatrix):
        return state
    if isinstance(state, PureState):
        return state.density()
    raise TypeError(f"expected DensityMatrix or PureState, got {type(state).__name__}")


def basis_state(index: int, dims: Sequence[int]) -> PureState:
    a = np.zeros(int(np.prod(dims)), dtype=complex)
    a[index] = 1.0
    return PureState(a, tuple(dims))


def bell_psi_plus(d: int = 2) -> PureState:
    """``sum_i |ii> / sqrt(d)``; for ``d = 2`` this is ``(|00> + |11>)/sqrt(2)``."""
    a = np.eye(d, dtype=complex).reshape(-1) / np.sqrt(d)
    return PureState(a, (d, d))


def _check_unitary(u, tol: float = STATE_TOL) -> np.ndarray:
    u = linalg.as_matrix(u)
    if u.ndim != 2:
        raise DimensionMismatch("expected a single matrix")
    if np.max(np.abs(linalg.dagger(u) @ u - np.eye(u.shape[0]))) > tol:
        raise NotUnitary("matrix is not unitary within 1e-10")
    return u


def max_entangled(u) -> PureState:
    """``(I ⊗ u)|psi+>`` for a unitary ``u``."""
    u = _check_unitary(u)
    d = u.shape[0]
    psi = bell_psi_plus(d).amplitudes
    return PureState(np.kron(np.eye(d), u) @ psi, (d, d))


def _check_unit_interval(name: str, x: float) -> float:
    x = float(x)
    if not 0.0 <= x <= 1.0:
        raise ParamOutOfRange(f"{name}={x} outside [0, 1]")
    return x


def werner_state(q: float) -> DensityMatrix:
    """``q Psi+ + (1 - q) I/4``."""
    q = _check_unit_interval("q", q)
    m = q * bell_psi_plus().projector() + (1.0 - q) * np.eye(4) / 4.0
    return DensityMatrix(m, (2, 2))


def schmidt_pure(alpha: float) -> PureState:
    """``alpha|00> + beta|11>`` with ``beta = +sqrt(1 - alpha^2)``."""
    alpha = _check_unit_interval("alpha", alpha)
    beta = np.sqrt(1.0 - alpha * alpha)
    return PureState(np.array([alpha, 0.0, 0.0, beta], dtype=complex), (2, 2))


def schmidt_filter(phi: PureState) -> np.ndarray:
    """Operator ``A`` with ``(I ⊗ A)|psi+> = |phi>``.

    Writing ``|phi> = sum_ij c_ij |ij>`` and ``|psi+> = sum_i |ii>/sqrt(d)``
    gives ``A = sqrt(d) c^T``.  ``A`` is generally not unitary, so conjugation
    by ``I ⊗ A`` is a filter and not a channel.
    """
    if len(phi.dims) != 2 or phi.dims[0] != phi.dims[1]:
        raise DimensionMismatch("schmidt_filter needs a bipartite state with equal local dimensions")
    d = phi.dims[0]
    c = phi.amplitudes.reshape(d, d)
    return np.sqrt(d) * c.T


def random_pure_state(dims: Sequence[int], rng_state) -> PureState:
    rng = linalg.make_rng(rng_state)
    n = int(np.prod(dims))
    z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return PureState(z / np.linalg.norm(z), tuple(dims))


def random_density_matrix(dims: Sequence[int], rng_state) -> DensityMatrix:
    """Ginibre-induced random mixed state."""
    n = int(np.prod(dims))
    return DensityMatrix(linalg.ginibre_density(n, rng_state), tuple(dims))


# -- serialization -----------------------------------------------------------

def state_to_json(rho: DensityMatrix) -> dict:
    m = rho.matrix
    return {"dims": list(rho.dims),
            "re": [float(x) for x in m.real.reshape(-1)],
            "im": [float(x) for x in m.imag.reshape(-1)]}


def state_from_json(obj) -> DensityMatrix:
    """Inverse of :func:`state_to_json`; accepts a dict or a JSON string."""
    if isinstance(obj, (str, bytes)):
        obj = json.loads(obj)
    try:
        dims = [int(d) for d in obj["dims"]]
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj["im"], dtype=float)
    except (KeyError, TypeError) as exc:
        raise DimensionMismatch(f"malformed state record: {exc}") from exc
    n = int(np.prod(dims))
    if re.size != n * n or im.size != n * n:
        raise DimensionMismatch(f"expected {n * n} entries for dims {dims}, got re={re.size}, im={im.size}")
    return DensityMatrix((re + 1j * im).reshape(n, n), tuple(dims))
