"""Numerical experiments on entanglement under local channels ``E ⊗ I``.

All sampling routines derive one random stream per sample from
``(seed, stream, index)``, so results do not depend on evaluation order and
are bit-identical across runs with the same seed.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import linalg
from .channels import (
    QuantumChannel,
    apply_lifted,
    basis_contraction,
    choi,
    contraction_channel,
    depolarizing,
    is_entanglement_breaking,
    lift_local,
    random_channel,
)
from .errors import InvariantViolation, ParamOutOfRange
from .measures import chsh_max, concurrence, log_negativity
from .states import (
    DensityMatrix,
    PureState,
    basis_state,
    bell_psi_plus,
    max_entangled,
    schmidt_pure,
)

log = logging.getLogger(__name__)

BOUND_TOL = 1e-9
CLOSED_FORM_TOL = 1e-9
ISO_TOL = 1e-9

STREAM_STATES = 0
STREAM_UNITARIES = 1
STREAM_CHANNELS = 2
STREAM_PAIRS = 3


def sample_rng(seed: int, index: int, stream: int = STREAM_STATES) -> np.random.Generator:
    """Independent generator for sample ``index`` of ``stream`` under ``seed``."""
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(stream), int(index))))


@dataclass(frozen=True)
class EntanglementReport:
    """One point of the input/output entanglement diagram."""

    family: str
    family_param: float
    e_in: float
    e_out: float
    channel: str
    measure: str = "concurrence"


@dataclass(frozen=True)
class InversionWitness:
    state_1: DensityMatrix
    state_2: DensityMatrix
    e_in_1: float
    e_in_2: float
    e_out_1: float
    e_out_2: float
    label_1: str = ""
    label_2: str = ""

    @property
    def margin_in(self) -> float:
        return self.e_in_1 - self.e_in_2

    @property
    def margin_out(self) -> float:
        return self.e_out_2 - self.e_out_1

    def to_dict(self) -> dict:
        return {"state_1": self.label_1, "state_2": self.label_2,
                "e_in": [self.e_in_1, self.e_in_2], "e_out": [self.e_out_1, self.e_out_2],
                "margin_in": self.margin_in, "margin_out": self.margin_out}


# -- state families ----------------------------------------------------------

def werner_q_for(c_in: float) -> float:
    """Werner weight ``q`` whose input concurrence is ``c_in``."""
    return (2.0 * c_in + 1.0) / 3.0


def schmidt_alpha_for(c_in: float) -> float:
    """Schmidt coefficient ``alpha >= beta`` with ``2 alpha beta = c_in``."""
    return float(np.sqrt((1.0 + np.sqrt(1.0 - c_in * c_in)) / 2.0))


def werner_batch(q: np.ndarray) -> np.ndarray:
    psi = bell_psi_plus().projector()
    q = np.asarray(q, dtype=float)[:, None, None]
    return q * psi + (1.0 - q) * np.eye(4) / 4.0


def schmidt_batch(alpha: np.ndarray) -> np.ndarray:
    alpha = np.asarray(alpha, dtype=float)
    beta = np.sqrt(np.clip(1.0 - alpha * alpha, 0.0, None))
    amps = np.zeros((alpha.size, 4), dtype=complex)
    amps[:, 0] = alpha
    amps[:, 3] = beta
    return amps[:, :, None] * np.conj(amps[:, None, :])


def family_batch(family: str, params: np.ndarray) -> np.ndarray:
    if family == "werner":
        return werner_batch(params)
    if family == "schmidt":
        return schmidt_batch(params)
    raise ValueError(f"unknown family {family!r}")


def family_grid(family: str, grid_size: int) -> np.ndarray:
    """Parameter grid covering input concurrence 0..1 once per family."""
    if grid_size < 2:
        raise ParamOutOfRange("grid_size must be >= 2")
    if family == "werner":
        return np.linspace(0.0, 1.0, grid_size)
    if family == "schmidt":
        return np.linspace(0.0, 1.0 / np.sqrt(2.0), grid_size)
    raise ValueError(f"unknown family {family!r}")


def _lifted(ch: QuantumChannel):
    return lift_local(ch, "A", (ch.d_in, 2))


def _outputs(ch: QuantumChannel, rhos: np.ndarray) -> np.ndarray:
    out = _lifted(ch).apply_array(rhos)
    return 0.5 * (out + linalg.dagger(out))


def choi_bound(ch: QuantumChannel) -> float:
    """Concurrence of the Choi state, the ceiling on any output concurrence."""
    return concurrence(choi(ch).state)


# -- closed forms for the depolarizing channel ------------------------------

def werner_closed(p: float, q):
    """Input and output concurrence of Werner(q) under depolarizing(p) on A."""
    q = np.asarray(q, dtype=float)
    return np.maximum(0.0, (3.0 * q - 1.0) / 2.0), np.maximum(0.0, (3.0 * p * q - 1.0) / 2.0)


def schmidt_closed(p: float, alpha):
    alpha = np.asarray(alpha, dtype=float)
    beta = np.sqrt(np.clip(1.0 - alpha * alpha, 0.0, None))
    return 2.0 * alpha * beta, np.maximum(0.0, alpha * beta * (3.0 * p - 1.0))


def werner_line(p: float, c_in):
    """Output as a function of input concurrence along the Werner family."""
    return np.maximum(0.0, p * np.asarray(c_in) + 0.5 * (p - 1.0))


def schmidt_line(p: float, c_in):
    return np.maximum(0.0, (3.0 * p - 1.0) / 2.0 * np.asarray(c_in))


# -- choi bound --------------------------------------------------------------

@dataclass(frozen=True)
class BoundReport:
    channel: str
    bound: float
    max_output: float
    n_samples: int
    worst_margin: float
    violations: int

    @property
    def ok(self) -> bool:
        return self.violations == 0

    def require(self):
        if not self.ok:
            raise InvariantViolation(
                f"{self.violations} outputs exceed the Choi bound {self.bound:.12g} for {self.channel}")
        return self


def sample_states(n: int, seed: int, pure: bool = False, stream: int = STREAM_STATES) -> np.ndarray:
    """``n`` random two-qubit states, Ginibre-induced or Haar-pure."""
    out = np.empty((n, 4, 4), dtype=complex)
    for i in range(n):
        rng = sample_rng(seed, i, stream)
        if pure:
            z = rng.standard_normal(4) + 1j * rng.standard_normal(4)
            z /= np.linalg.norm(z)
            out[i] = np.outer(z, np.conj(z))
        else:
            out[i] = linalg.ginibre_density(4, rng)
    return out


def bound_check(ch: QuantumChannel, n_samples: int = 10_000, seed: int = 0,
                pure: bool = False, tol: float = BOUND_TOL) -> BoundReport:
    """Compare output concurrence of random inputs with the Choi-state value.

    A violation means the implementation is wrong, not that the bound fails;
    the count is reported rather than raised (see :meth:`BoundReport.require`).
    """
    bound = choi_bound(ch)
    rhos = sample_states(n_samples, seed, pure)
    outs = concurrence(_outputs(ch, rhos))
    margins = bound - outs
    report = BoundReport(ch.name, bound, float(outs.max()), n_samples,
                         float(margins.min()), int(np.sum(outs > bound + tol)))
    log.debug("bound_check %s: %s", ch.name, report)
    return report


@dataclass(frozen=True)
class IsoReport:
    channel: str
    values: np.ndarray = field(repr=False)
    choi_value: float

    @property
    def spread(self) -> float:
        return float(self.values.max() - self.values.min())

    @property
    def ok(self) -> bool:
        return self.spread < ISO_TOL

    def require(self):
        if not self.ok:
            raise InvariantViolation(f"iso-entangled image spread {self.spread:.3e} for {self.channel}")
        return self


def isoentangled_image_check(ch: QuantumChannel, n_unitaries: int = 100, seed: int = 0) -> IsoReport:
    """Concurrence of ``(E ⊗ I)[Psi_U]`` over Haar-random ``U``."""
    rhos = np.empty((n_unitaries, 4, 4), dtype=complex)
    for i in range(n_unitaries):
        u = linalg.haar_random_unitary(2, sample_rng(seed, i, STREAM_UNITARIES))
        rhos[i] = max_entangled(u).projector()
    values = concurrence(_outputs(ch, rhos))
    return IsoReport(ch.name, values, choi_bound(ch))


# -- example 1 ---------------------------------------------------------------

def example1_curves(p: float, grid_size: int = 101) -> list[EntanglementReport]:
    """Werner and Schmidt families through depolarizing(p), checked against closed forms.

    Raises
    ------
    InvariantViolation
        If any numerical value deviates from its closed form by more than 1e-9.
    """
    ch = depolarizing(p)
    rows = []
    for family, closed in (("werner", werner_closed), ("schmidt", schmidt_closed)):
        params = family_grid(family, grid_size)
        rhos = family_batch(family, params)
        e_in = concurrence(rhos)
        e_out = concurrence(_outputs(ch, rhos))
        c_in, c_out = closed(float(p), params)
        dev = max(np.max(np.abs(e_in - c_in)), np.max(np.abs(e_out - c_out)))
        if dev > CLOSED_FORM_TOL:
            raise InvariantViolation(f"{family} family deviates from closed form by {dev:.3e} at p={p}")
        rows.extend(EntanglementReport(family, float(x), float(a), float(b), ch.name)
                    for x, a, b in zip(params, e_in, e_out))
    return rows


@dataclass(frozen=True)
class EpsilonPair:
    p: float
    epsilon: float
    q: float
    alpha: float
    c1_in: float
    c2_in: float
    c1_out: float
    c2_out: float
    c1_out_closed: float
    c2_out_closed: float

    @property
    def inverted(self) -> bool:
        return self.c1_in > self.c2_in and self.c1_out < self.c2_out

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["inverted"] = self.inverted
        return d


def epsilon_pair(p: float = 0.5, epsilon: float = 0.1) -> EpsilonPair:
    """Werner state with concurrence 1/2 + eps against a Schmidt state with 1/2 - eps."""
    if not 0.0 <= epsilon <= 0.5:
        raise ParamOutOfRange(f"epsilon={epsilon} outside [0, 1/2]")
    ch = depolarizing(p)
    q = werner_q_for(0.5 + epsilon)
    alpha = schmidt_alpha_for(0.5 - epsilon)
    rhos = np.stack([werner_batch([q])[0], schmidt_batch([alpha])[0]])
    c_in = concurrence(rhos)
    c_out = concurrence(_outputs(ch, rhos))
    return EpsilonPair(float(p), float(epsilon), q, alpha,
                       float(c_in[0]), float(c_in[1]), float(c_out[0]), float(c_out[1]),
                       float(werner_line(p, 0.5 + epsilon)), float(schmidt_line(p, 0.5 - epsilon)))


# -- ordering inversion search ------------------------------------------------

def _first_witness(e_in: np.ndarray, e_out: np.ndarray, delta: float):
    cond = (e_in[:, None] >= e_in[None, :] + delta) & (e_out[None, :] >= e_out[:, None] + delta)
    hits = np.argwhere(cond)
    return None if hits.size == 0 else tuple(int(x) for x in hits[0])


def find_ordering_inversion(ch: QuantumChannel, mode: str = "families", delta: float = 1e-3,
                            n_samples: int = 1001, seed: int = 0) -> InversionWitness | None:
    """Search for two states whose concurrence order flips under ``E ⊗ I``.

    ``families`` mode puts the Werner and Schmidt families on a common grid
    of ``n_samples`` input concurrences in [0, 1], concatenates them (Werner
    first) and returns the lexicographically first ordered pair ``(i, j)``
    with ``e_in_i >= e_in_j + delta`` and ``e_out_j >= e_out_i + delta``.
    ``random`` mode draws ``n_samples`` pairs of Ginibre states and returns
    the first pair that flips, in either orientation.
    """
    if delta <= 0:
        raise ParamOutOfRange("delta must be positive")
    if mode == "families":
        c = np.linspace(0.0, 1.0, n_samples)
        q = werner_q_for(c)
        alpha = np.sqrt((1.0 + np.sqrt(np.clip(1.0 - c * c, 0.0, None))) / 2.0)
        rhos = np.concatenate([werner_batch(q), schmidt_batch(alpha)])
        labels = [f"werner(q={float(x)!r})" for x in q] + [f"schmidt(alpha={float(x)!r})" for x in alpha]
        e_in = concurrence(rhos)
        e_out = concurrence(_outputs(ch, rhos))
        hit = _first_witness(e_in, e_out, delta)
        if hit is None:
            return None
        i, j = hit
        return InversionWitness(DensityMatrix(rhos[i], (2, 2)), DensityMatrix(rhos[j], (2, 2)),
                                float(e_in[i]), float(e_in[j]), float(e_out[i]), float(e_out[j]),
                                labels[i], labels[j])
    if mode == "random":
        rhos = sample_states(2 * n_samples, seed, stream=STREAM_PAIRS)
        e_in = concurrence(rhos).reshape(n_samples, 2)
        e_out = concurrence(_outputs(ch, rhos)).reshape(n_samples, 2)
        for k in range(n_samples):
            for a, b in ((0, 1), (1, 0)):
                if e_in[k, a] >= e_in[k, b] + delta and e_out[k, b] >= e_out[k, a] + delta:
                    return InversionWitness(
                        DensityMatrix(rhos[2 * k + a], (2, 2)), DensityMatrix(rhos[2 * k + b], (2, 2)),
                        float(e_in[k, a]), float(e_in[k, b]), float(e_out[k, a]), float(e_out[k, b]),
                        f"random(seed={seed}, index={2 * k + a})", f"random(seed={seed}, index={2 * k + b})")
        return None
    raise ValueError(f"unknown mode {mode!r}")


# -- example 2 ---------------------------------------------------------------

# Qubit order L1 R1 L2 R2; the left party holds subsystems 0 and 2.
FOUR_QUBITS = (2, 2, 2, 2)
RIGHT_PARTY = (1, 3)


@dataclass(frozen=True)
class Example2Result:
    alpha2: float
    e1_before: float
    e2_before: float
    e1_after: float
    e2_after: float
    chsh_untouched: float
    measure: str = "log_negativity"

    @property
    def inverted(self) -> bool:
        return self.e1_before > self.e2_before and self.e1_after < self.e2_after

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["inverted"] = self.inverted
        d["bell_violation"] = self.chsh_untouched > 2.0
        return d


def example2_run(alpha2: float = 0.8, target: PureState | None = None) -> Example2Result:
    """Two pairs of qubits; contract ``R1`` to a fixed pure state.

    ``Omega_1 = Psi+ (L1 R1) ⊗ |00> (L2 R2)`` starts more entangled than
    ``Omega_2 = |00> (L1 R1) ⊗ phi (L2 R2)`` with ``phi = schmidt(sqrt(alpha2))``,
    and ends less entangled, measured by log-negativity across L|R.

    Raises
    ------
    InvariantViolation
        If the ordering does not flip or the untouched pair shows no CHSH
        violation.
    """
    alpha2 = float(alpha2)
    if not 0.0 < alpha2 < 1.0:
        raise ParamOutOfRange(f"alpha2={alpha2} outside (0, 1)")
    zero_zero = basis_state(0, (2, 2))
    omega_1 = bell_psi_plus().tensor(zero_zero).density()
    omega_2 = zero_zero.tensor(schmidt_pure(np.sqrt(alpha2))).density()
    if target is None:
        contraction = basis_contraction(0)
    else:
        contraction = contraction_channel(target, d_in=2)
    lifted = lift_local(contraction, 1, FOUR_QUBITS)
    omega_1p = apply_lifted(lifted, omega_1)
    omega_2p = apply_lifted(lifted, omega_2)
    res = Example2Result(
        alpha2,
        log_negativity(omega_1, RIGHT_PARTY), log_negativity(omega_2, RIGHT_PARTY),
        log_negativity(omega_1p, RIGHT_PARTY), log_negativity(omega_2p, RIGHT_PARTY),
        chsh_max(DensityMatrix(omega_2p.reduced((2, 3)), (2, 2))),
    )
    if not res.inverted:
        raise InvariantViolation(f"example 2 ordering did not invert: {res}")
    if res.chsh_untouched <= 2.0:
        raise InvariantViolation(f"untouched pair shows no CHSH violation: {res.chsh_untouched}")
    return res


# -- diagram -----------------------------------------------------------------

def diagram_scan(ch: QuantumChannel, families: Iterable[str] = ("werner", "schmidt"),
                 grid_size: int = 101, include_bound: bool = True) -> list[EntanglementReport]:
    """Rows of the input/output concurrence diagram for ``E ⊗ I``.

    With ``include_bound`` two reference groups of ``grid_size`` rows follow
    the data: ``bound`` (output equal to the Choi-state concurrence) and
    ``diagonal`` (output equal to input).
    """
    bound = choi_bound(ch)
    rows = []
    for family in families:
        params = family_grid(family, grid_size)
        rhos = family_batch(family, params)
        e_in = concurrence(rhos)
        e_out = concurrence(_outputs(ch, rhos))
        if np.any(e_out > e_in + BOUND_TOL):
            raise InvariantViolation(f"{family}: output concurrence exceeds input for {ch.name}")
        if np.any(e_out > bound + BOUND_TOL):
            raise InvariantViolation(f"{family}: output concurrence exceeds Choi bound for {ch.name}")
        rows.extend(EntanglementReport(family, float(x), float(a), float(b), ch.name)
                    for x, a, b in zip(params, e_in, e_out))
    if include_bound:
        line = np.linspace(0.0, 1.0, grid_size)
        rows.extend(EntanglementReport("bound", float(x), float(x), bound, ch.name) for x in line)
        rows.extend(EntanglementReport("diagonal", float(x), float(x), float(x), ch.name) for x in line)
    return rows


def random_channels(n: int, seed: int) -> list[QuantumChannel]:
    return [random_channel(sample_rng(seed, i, STREAM_CHANNELS), name=f"stinespring(seed={seed}, index={i})")
            for i in range(n)]


def bisect_eb_threshold(lo: float = 0.0, hi: float = 1.0, tol: float = 1e-9) -> float:
    """Smallest ``p`` at which depolarizing(p) stops being entanglement breaking."""
    if not is_entanglement_breaking(depolarizing(lo)) or is_entanglement_breaking(depolarizing(hi)):
        raise ValueError("bracket does not straddle the threshold")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if is_entanglement_breaking(depolarizing(mid)):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


__all__: Sequence[str] = [
    "EntanglementReport", "InversionWitness", "BoundReport", "IsoReport", "EpsilonPair",
    "Example2Result", "bound_check", "isoentangled_image_check", "example1_curves",
    "epsilon_pair", "find_ordering_inversion", "example2_run", "diagram_scan",
    "random_channels", "bisect_eb_threshold", "sample_rng",
]
