"""Kraus-operator channels, local lifting and Choi states."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import linalg
from .errors import (
    DimensionMismatch,
    DimensionUnsupported,
    NotNormalized,
    NotTracePreserving,
    ParamOutOfRange,
)
from .states import (
    DensityMatrix,
    PureState,
    _check_unitary,
    as_density,
    bell_psi_plus,
)

TP_TOL = 1e-10
LOAD_TP_TOL = 1e-8

NAMED_GATES = {
    "I": linalg.PAULI_I,
    "X": linalg.PAULI_X,
    "Y": linalg.PAULI_Y,
    "Z": linalg.PAULI_Z,
    "H": np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2.0),
}


def tp_defect(kraus: Sequence[np.ndarray]) -> float:
    """Max-abs entry of ``sum K^dagger K - I``."""
    d_in = kraus[0].shape[1]
    s = sum(linalg.dagger(k) @ k for k in kraus)
    return float(np.max(np.abs(s - np.eye(d_in))))


@dataclass(frozen=True)
class QuantumChannel:
    """Completely positive trace-preserving map ``rho -> sum K rho K^dagger``."""

    kraus: tuple
    d_in: int
    d_out: int
    name: str = "channel"
    tol: float = TP_TOL

    def __post_init__(self):
        ks = tuple(np.array(k, dtype=complex) for k in self.kraus)
        if not ks:
            raise DimensionMismatch("a channel needs at least one Kraus operator")
        for k in ks:
            if k.shape != (self.d_out, self.d_in):
                raise DimensionMismatch(
                    f"Kraus operator shape {k.shape} != ({self.d_out}, {self.d_in})")
            if not np.all(np.isfinite(k)):
                raise ValueError("Kraus operator has non-finite entries")
            k.flags.writeable = False
        defect = tp_defect(ks)
        if defect > self.tol:
            raise NotTracePreserving(f"trace-preservation defect {defect:.3e} exceeds {self.tol:g}", defect)
        object.__setattr__(self, "kraus", ks)

    def __repr__(self):
        return f"QuantumChannel({self.name}, d_in={self.d_in}, d_out={self.d_out}, kraus={len(self.kraus)})"

    @property
    def defect(self) -> float:
        return tp_defect(self.kraus)

    def apply_array(self, rho: np.ndarray) -> np.ndarray:
        """Apply to a raw matrix or a stack of matrices; no validation."""
        out = 0
        for k in self.kraus:
            out = out + k @ rho @ linalg.dagger(k)
        return out


def identity_channel(d: int = 2) -> QuantumChannel:
    return QuantumChannel((np.eye(d),), d, d, name="identity")


def depolarizing(p: float) -> QuantumChannel:
    """Qubit channel ``rho -> p rho + (1 - p) I/2``.

    Kraus weights are ``(1 + 3p)/4`` on the identity and ``(1 - p)/4`` on each
    Pauli matrix.
    """
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ParamOutOfRange(f"p={p} outside [0, 1]")
    w0 = np.sqrt((1.0 + 3.0 * p) / 4.0)
    w = np.sqrt((1.0 - p) / 4.0)
    kraus = (w0 * linalg.PAULI_I, w * linalg.PAULI_X, w * linalg.PAULI_Y, w * linalg.PAULI_Z)
    return QuantumChannel(kraus, 2, 2, name=f"depolarizing(p={p!r})")


def unitary_channel(u, name: str | None = None) -> QuantumChannel:
    u = _check_unitary(u)
    d = u.shape[0]
    return QuantumChannel((u,), d, d, name=name or "unitary")


def named_unitary(gate: str) -> QuantumChannel:
    try:
        u = NAMED_GATES[gate.upper()]
    except KeyError:
        raise ParamOutOfRange(f"unknown gate {gate!r}; expected one of {sorted(NAMED_GATES)}") from None
    return unitary_channel(u, name=f"unitary({gate.upper()})")


def contraction_channel(xi, d_in: int | None = None, name: str | None = None) -> QuantumChannel:
    """Constant channel mapping every input to the pure state ``xi``.

    Kraus operators are ``|xi><i|`` over the computational basis of the input.
    """
    amps = xi.amplitudes if isinstance(xi, PureState) else np.asarray(xi, dtype=complex).reshape(-1)
    if abs(np.linalg.norm(amps) - 1.0) > 1e-12:
        raise NotNormalized(f"target norm {np.linalg.norm(amps):.15g} != 1")
    d_out = amps.size
    d_in = d_out if d_in is None else d_in
    kraus = tuple(np.outer(amps, np.eye(d_in)[i]) for i in range(d_in))
    return QuantumChannel(kraus, d_in, d_out, name=name or "contraction")


def basis_contraction(target: int = 0, d: int = 2) -> QuantumChannel:
    if not 0 <= target < d:
        raise ParamOutOfRange(f"target index {target} outside [0, {d})")
    return contraction_channel(np.eye(d)[target], name=f"contraction({target})")


def random_channel(rng_state, d: int = 2, env_dim: int = 4, name: str | None = None) -> QuantumChannel:
    """Random channel from a Haar unitary on system ⊗ environment.

    The environment starts in ``|0>`` and is traced out, giving Kraus
    operators ``K_e = (I ⊗ <e|) U (I ⊗ |0>)``.
    """
    u = linalg.haar_random_unitary(d * env_dim, rng_state)
    t = u.reshape(d, env_dim, d, env_dim)
    kraus = tuple(t[:, e, :, 0] for e in range(env_dim))
    return QuantumChannel(kraus, d, d, name=name or "stinespring")


def apply(ch: QuantumChannel, rho) -> DensityMatrix:
    """``sum K rho K^dagger``, returning a validated state."""
    rho = as_density(rho)
    if rho.dim != ch.d_in:
        raise DimensionMismatch(f"channel expects dimension {ch.d_in}, state has {rho.dim}")
    out = ch.apply_array(rho.matrix)
    out = 0.5 * (out + linalg.dagger(out))
    dims = rho.dims if ch.d_out == ch.d_in else (ch.d_out,)
    return DensityMatrix(out, dims)


def _side_index(side, n: int) -> int:
    if isinstance(side, str):
        key = side.upper()
        if key not in ("A", "B") or n != 2:
            raise DimensionMismatch(f"side {side!r} needs a bipartite system")
        return 0 if key == "A" else 1
    idx = int(side)
    if not 0 <= idx < n:
        raise DimensionMismatch(f"subsystem index {idx} out of range")
    return idx


def lift_local(ch: QuantumChannel, side="A", dims: Sequence[int] = (2, 2)) -> QuantumChannel:
    """Extend ``ch`` to act on one tensor factor of a composite system.

    ``side`` is ``"A"``/``"B"`` for a bipartite system or a subsystem index.
    Kraus operators become ``I ⊗ ... ⊗ K ⊗ ... ⊗ I``.
    """
    dims = tuple(int(d) for d in dims)
    k_idx = _side_index(side, len(dims))
    if dims[k_idx] != ch.d_in:
        raise DimensionMismatch(f"channel acts on dimension {ch.d_in}, factor {k_idx} has {dims[k_idx]}")
    left = int(np.prod(dims[:k_idx]))
    right = int(np.prod(dims[k_idx + 1:]))
    kraus = tuple(linalg.tensor_all(np.eye(left), k, np.eye(right)) for k in ch.kraus)
    d_in = int(np.prod(dims))
    d_out = left * ch.d_out * right
    label = side if isinstance(side, str) else str(k_idx)
    return LiftedChannel(kraus, d_in, d_out, name=f"{ch.name}⊗I[{label}]",
                         local=ch, position=k_idx, dims=dims)


@dataclass(frozen=True, repr=False)
class LiftedChannel(QuantumChannel):
    local: QuantumChannel = None
    position: int = 0
    dims: tuple = ()

    @property
    def out_dims(self) -> tuple[int, ...]:
        d = list(self.dims)
        d[self.position] = self.local.d_out
        return tuple(d)


def apply_lifted(ch: LiftedChannel, rho) -> DensityMatrix:
    rho = as_density(rho)
    if rho.dims != ch.dims:
        raise DimensionMismatch(f"lifted channel expects dims {ch.dims}, state has {rho.dims}")
    out = ch.apply_array(rho.matrix)
    return DensityMatrix(0.5 * (out + linalg.dagger(out)), ch.out_dims)


@dataclass(frozen=True)
class ChoiState:
    """``(E ⊗ I)[Psi+]``; the acted factor comes first, dims ``(d_out, d_in)``."""

    state: DensityMatrix
    d_in: int
    d_out: int

    def marginal(self) -> np.ndarray:
        """Reduced state of the untouched factor (``I/d_in`` for any channel)."""
        return self.state.reduced(1)


def choi(ch: QuantumChannel) -> ChoiState:
    lifted = lift_local(ch, "A", (ch.d_in, ch.d_in))
    psi = bell_psi_plus(ch.d_in).density()
    return ChoiState(apply_lifted(lifted, psi), ch.d_in, ch.d_out)


def is_entanglement_breaking(ch: QuantumChannel) -> bool:
    """PPT test on the Choi state; exact for qubit channels only."""
    if ch.d_in != 2 or ch.d_out != 2:
        raise DimensionUnsupported("PPT decides entanglement breaking only for qubit channels")
    from .measures import is_ppt

    return is_ppt(choi(ch).state)


# -- serialization -----------------------------------------------------------

def channel_to_json(ch: QuantumChannel) -> dict:
    return {"d_in": ch.d_in, "d_out": ch.d_out,
            "kraus": [{"re": [float(x) for x in k.real.reshape(-1)],
                       "im": [float(x) for x in k.imag.reshape(-1)]} for k in ch.kraus]}


def channel_from_json(obj, name: str = "file", tol: float = LOAD_TP_TOL) -> QuantumChannel:
    """Load a channel record, enforcing trace preservation within ``tol``."""
    if isinstance(obj, (str, bytes)):
        obj = json.loads(obj)
    try:
        d_in = int(obj["d_in"])
        d_out = int(obj["d_out"])
        records = list(obj["kraus"])
        kraus = []
        for rec in records:
            re = np.asarray(rec["re"], dtype=float)
            im = np.asarray(rec["im"], dtype=float)
            if re.size != d_in * d_out or im.size != d_in * d_out:
                raise DimensionMismatch(
                    f"Kraus record has {re.size}/{im.size} entries, expected {d_in * d_out}")
            kraus.append((re + 1j * im).reshape(d_out, d_in))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, DimensionMismatch):
            raise
        raise DimensionMismatch(f"malformed channel record: {exc}") from exc
    return QuantumChannel(tuple(kraus), d_in, d_out, name=name, tol=tol)
