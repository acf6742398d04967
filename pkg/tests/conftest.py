import itertools

import numpy as np
import pytest

from entlab.linalg import PAULI_X, PAULI_Z

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


def random_hermitian(rng, n):
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return g + g.conj().T


# -- brute-force oracles, deliberately loop based ---------------------------

def brute_partial_trace(m, dims, keep):
    """Sum over traced-out multi-indices one entry at a time."""
    n = len(dims)
    keep = sorted(keep)
    traced = [i for i in range(n) if i not in keep]
    kdims = [dims[i] for i in keep]
    dk = int(np.prod(kdims))
    out = np.zeros((dk, dk), dtype=complex)
    strides = [int(np.prod(dims[i + 1:])) for i in range(n)]

    def flat(idx):
        return sum(i * s for i, s in zip(idx, strides))

    for r in itertools.product(*[range(d) for d in kdims]):
        for c in itertools.product(*[range(d) for d in kdims]):
            acc = 0j
            for t in itertools.product(*[range(dims[i]) for i in traced]):
                ri = [0] * n
                ci = [0] * n
                for pos, k in enumerate(keep):
                    ri[k] = r[pos]
                    ci[k] = c[pos]
                for pos, k in enumerate(traced):
                    ri[k] = t[pos]
                    ci[k] = t[pos]
                acc += m[flat(ri), flat(ci)]
            out[flat_k(r, kdims), flat_k(c, kdims)] = acc
    return out


def flat_k(idx, dims):
    v = 0
    for i, d in zip(idx, dims):
        v = v * d + i
    return v


def brute_partial_transpose(m, dims, which):
    n = len(dims)
    out = np.zeros_like(m)
    for r in itertools.product(*[range(d) for d in dims]):
        for c in itertools.product(*[range(d) for d in dims]):
            r2, c2 = list(r), list(c)
            for w in which:
                r2[w], c2[w] = c[w], r[w]
            out[flat_k(r2, dims), flat_k(c2, dims)] = m[flat_k(r, dims), flat_k(c, dims)]
    return out


def nonhermitian_concurrence(rho):
    """Wootters' original route: eigenvalues of R = rho (sy⊗sy) rho* (sy⊗sy)."""
    sy = np.array([[0, -1j], [1j, 0]])
    yy = np.kron(sy, sy)
    r = rho @ yy @ rho.conj() @ yy
    lam = np.sort(np.clip(np.linalg.eigvals(r).real, 0.0, None))[::-1]
    s = np.sqrt(lam)
    return max(0.0, s[0] - s[1] - s[2] - s[3]), s


def chsh_grid_oracle(rho, coarse=629, fine_halfwidth=0.01, fine_step=1e-3):
    """CHSH maximum over x-z plane measurements by explicit angle grid search.

    Correlations are taken directly as Tr[rho (n_a·sigma ⊗ n_b·sigma)].
    Coarse stage: a, a', b, b' on ``coarse`` angles in [0, 2pi); fine stage:
    a 1e-3 rad grid around the best coarse point.
    """
    def obs(theta):
        return np.cos(theta)[..., None, None] * PAULI_Z + np.sin(theta)[..., None, None] * PAULI_X

    def corr(ta, tb):
        oa, ob = obs(ta), obs(tb)
        e = np.empty((ta.size, tb.size))
        for i in range(ta.size):
            ops = np.einsum("ij,bkl->bikjl", oa[i], ob).reshape(tb.size, 4, 4)
            e[i] = np.real(np.einsum("ij,bji->b", rho, ops))
        return e

    th = np.linspace(0, 2 * np.pi, coarse, endpoint=False)
    e = corr(th, th)  # e[a, b]
    best = (-np.inf, None)
    # S = E(a,b) + E(a,b') + E(a',b) - E(a',b')
    for jb in range(coarse):
        plus = e[:, jb][:, None] + e           # over a, b'
        minus = e[:, jb][:, None] - e          # over a', b'
        s = plus.max(axis=0) + minus.max(axis=0)
        k = int(np.argmax(s))
        if s[k] > best[0]:
            ia = int(np.argmax(plus[:, k]))
            ia2 = int(np.argmax(minus[:, k]))
            best = (s[k], (th[ia], th[ia2], th[jb], th[k]))
    a0, a20, b0, b20 = best[1]
    off = np.arange(-fine_halfwidth, fine_halfwidth + 1e-12, fine_step)
    A, A2, B, B2 = a0 + off, a20 + off, b0 + off, b20 + off
    eab, eab2 = corr(A, B), corr(A, B2)
    ea2b, ea2b2 = corr(A2, B), corr(A2, B2)
    s = (eab[:, None, :, None] + eab2[:, None, None, :] + ea2b[None, :, :, None] - ea2b2[None, :, None, :])
    return float(max(best[0], s.max()))
