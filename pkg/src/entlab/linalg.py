"""Dense complex linear algebra for small operators (dimension <= 16).

Matrices are plain ``numpy`` arrays of dtype ``complex128``.  Most routines
accept a stack of matrices with arbitrary leading batch axes, which is how
the experiments push thousands of two-qubit states through at once.

The eigensolver is a cyclic complex Jacobi method written here rather than
taken from LAPACK.  It is compiled with numba and runs matrix by matrix, so
a result never depends on what else was in the batch.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numba import njit

from .errors import DimensionMismatch, NoConvergence, NotHermitian, NotPSD

HERMITIAN_TOL = 1e-10
PSD_TOL = 1e-10
JACOBI_TOL = 1e-13
MAX_SWEEPS = 100

PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def as_matrix(m) -> np.ndarray:
    """Coerce ``m`` to a square complex128 array (batch axes allowed)."""
    a = np.asarray(m, dtype=complex)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise DimensionMismatch(f"expected square matrix, got shape {a.shape}")
    if a.shape[-1] < 1:
        raise DimensionMismatch("matrix dimension must be positive")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def hermiticity_defect(m: np.ndarray) -> np.ndarray:
    """Max-abs entry of ``m - m^dagger`` (per matrix for a batch)."""
    return np.max(np.abs(m - dagger(m)), axis=(-2, -1))


def tensor(a, b) -> np.ndarray:
    """Kronecker product ``a ⊗ b`` of two matrices."""
    return np.kron(as_matrix(a), as_matrix(b))


def tensor_all(*ms) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for m in ms:
        out = np.kron(out, m)
    return out


@dataclass(frozen=True)
class EigenDecomposition:
    """Ascending eigenvalues and matching orthonormal eigenvector columns."""

    values: np.ndarray
    vectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.vectors
        return (v * self.values[..., None, :]) @ dagger(v)


@njit(cache=True)
def _jacobi_one(a, v, tol, max_sweeps):
    """In-place cyclic Jacobi on one Hermitian matrix; returns sweeps used or -1."""
    n = a.shape[0]
    scale = 0.0
    for i in range(n):
        for j in range(n):
            scale += a[i, j].real ** 2 + a[i, j].imag ** 2
    scale = max(1.0, np.sqrt(scale))
    for sweep in range(max_sweeps + 1):
        off = 0.0
        for i in range(n):
            for j in range(n):
                if i != j:
                    off += a[i, j].real ** 2 + a[i, j].imag ** 2
        if np.sqrt(off) < tol * scale:
            return sweep
        if sweep == max_sweeps:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                r = abs(apq)
                if r == 0.0:
                    continue
                phase = apq / r
                ph_c = phase.conjugate()
                theta = (a[q, q].real - a[p, p].real) / (2.0 * r)
                sgn = 1.0 if theta >= 0.0 else -1.0
                t = sgn / (abs(theta) + np.hypot(theta, 1.0))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                # a <- G^dagger a G, G[:, p] = c e_p - s conj(phase) e_q,
                #                    G[:, q] = s e_p + c conj(phase) e_q
                for k in range(n):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = c * akp - s * ph_c * akq
                    a[k, q] = s * akp + c * ph_c * akq
                for k in range(n):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = c * apk - s * phase * aqk
                    a[q, k] = s * apk + c * phase * aqk
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                for k in range(n):
                    vkp = v[k, p]
                    vkq = v[k, q]
                    v[k, p] = c * vkp - s * ph_c * vkq
                    v[k, q] = s * vkp + c * ph_c * vkq
    return -1


@njit(cache=True)
def _jacobi_batch(a, tol, max_sweeps):
    batch, n, _ = a.shape
    values = np.empty((batch, n))
    vectors = np.zeros((batch, n, n), dtype=np.complex128)
    ok = True
    for b in range(batch):
        for i in range(n):
            vectors[b, i, i] = 1.0
        if _jacobi_one(a[b], vectors[b], tol, max_sweeps) < 0:
            ok = False
        for i in range(n):
            values[b, i] = a[b, i, i].real
    return values, vectors, ok


def hermitian_eig(m, tol: float = JACOBI_TOL, max_sweeps: int = MAX_SWEEPS) -> EigenDecomposition:
    """Eigendecomposition of a Hermitian matrix (or stack) by cyclic Jacobi.

    Convergence is declared when the off-diagonal Frobenius mass drops below
    ``tol * max(1, ||m||_F)``.

    Raises
    ------
    NotHermitian
        If any entry of ``m - m^dagger`` exceeds 1e-10 in modulus.
    NoConvergence
        If ``max_sweeps`` sweeps are not enough.
    """
    m = as_matrix(m)
    if np.any(hermiticity_defect(m) > HERMITIAN_TOL):
        raise NotHermitian("matrix is not Hermitian within 1e-10")
    batch_shape = m.shape[:-2]
    n = m.shape[-1]
    a = (0.5 * (m + dagger(m))).reshape(-1, n, n).copy()
    values, vectors, ok = _jacobi_batch(a, tol, max_sweeps)
    if not ok:
        raise NoConvergence(f"Jacobi did not converge in {max_sweeps} sweeps")
    order = np.argsort(values, axis=-1, kind="stable")
    values = np.take_along_axis(values, order, axis=-1)
    vectors = np.take_along_axis(vectors, order[:, None, :], axis=-1)
    return EigenDecomposition(values.reshape(batch_shape + (n,)),
                              vectors.reshape(batch_shape + (n, n)))


def eigvalsh(m) -> np.ndarray:
    return hermitian_eig(m).values


def matrix_sqrt_psd(m, tol: float = PSD_TOL) -> np.ndarray:
    """Hermitian PSD square root; eigenvalues in [-tol, 0) are clamped to 0."""
    dec = hermitian_eig(m)
    if np.any(dec.values < -tol):
        raise NotPSD(f"eigenvalue {dec.values.min():.3e} below -{tol:g}")
    root = np.sqrt(np.clip(dec.values, 0.0, None))
    return EigenDecomposition(root, dec.vectors).reconstruct()


def _check_dims(m: np.ndarray, dims: Sequence[int]) -> tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if not dims or any(d < 1 for d in dims):
        raise DimensionMismatch(f"invalid subsystem dimensions {dims}")
    if int(np.prod(dims)) != m.shape[-1]:
        raise DimensionMismatch(f"dims {dims} do not match matrix dimension {m.shape[-1]}")
    return dims


def _as_index_set(idx, n: int) -> tuple[int, ...]:
    if isinstance(idx, (int, np.integer)):
        idx = (int(idx),)
    out = tuple(sorted(set(int(i) for i in idx)))
    if any(i < 0 or i >= n for i in out):
        raise DimensionMismatch(f"subsystem index out of range in {idx}")
    return out


def partial_trace(m, dims: Sequence[int], keep) -> np.ndarray:
    """Trace out every subsystem not listed in ``keep``."""
    m = as_matrix(m)
    dims = _check_dims(m, dims)
    n = len(dims)
    keep = _as_index_set(keep, n)
    if not keep:
        raise DimensionMismatch("keep must name at least one subsystem")
    batch = m.shape[:-2]
    nb = len(batch)
    t = m.reshape(batch + dims + dims)
    # einsum letters: batch, row indices, column indices
    letters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
    b = letters[:nb]
    rows = list(letters[nb:nb + n])
    cols = list(letters[nb + n:nb + 2 * n])
    for i in range(n):
        if i not in keep:
            cols[i] = rows[i]
    out = b + "".join(rows[i] for i in keep) + "".join(cols[i] for i in keep)
    res = np.einsum(b + "".join(rows) + "".join(cols) + "->" + out, t)
    dk = int(np.prod([dims[i] for i in keep]))
    return res.reshape(batch + (dk, dk))


def partial_transpose(m, dims: Sequence[int], which) -> np.ndarray:
    """Transpose the tensor factor(s) ``which``; an involution."""
    m = as_matrix(m)
    dims = _check_dims(m, dims)
    n = len(dims)
    which = _as_index_set(which, n)
    batch = m.shape[:-2]
    nb = len(batch)
    t = m.reshape(batch + dims + dims)
    axes = list(range(nb + 2 * n))
    for i in which:
        axes[nb + i], axes[nb + n + i] = axes[nb + n + i], axes[nb + i]
    return t.transpose(axes).reshape(m.shape)


def trace_norm(m) -> np.ndarray | float:
    """Sum of absolute eigenvalues of a Hermitian matrix."""
    vals = hermitian_eig(m).values
    out = np.sum(np.abs(vals), axis=-1)
    return float(out) if np.ndim(out) == 0 else out


def make_rng(rng_state) -> np.random.Generator:
    """Accept a Generator, an int seed, or a sequence of ints (stream key)."""
    if isinstance(rng_state, np.random.Generator):
        return rng_state
    return np.random.default_rng(rng_state)


def ginibre(dim: int, rng, cols: int | None = None) -> np.ndarray:
    rng = make_rng(rng)
    cols = dim if cols is None else cols
    return (rng.standard_normal((dim, cols)) + 1j * rng.standard_normal((dim, cols))) / np.sqrt(2.0)


def haar_random_unitary(dim: int, rng_state) -> np.ndarray:
    """Haar-distributed unitary from a QR-decomposed Ginibre matrix.

    The phases of ``R``'s diagonal are pushed into ``Q`` so the result is
    Haar rather than QR-biased.
    """
    if dim < 1:
        raise DimensionMismatch("dim must be >= 1")
    z = ginibre(dim, rng_state)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))[None, :]


def ginibre_density(dim: int, rng_state) -> np.ndarray:
    """Random mixed state ``G G^dagger / Tr(G G^dagger)`` as a raw array."""
    g = ginibre(dim, rng_state)
    w = g @ dagger(g)
    w = 0.5 * (w + dagger(w))
    return w / np.trace(w).real
