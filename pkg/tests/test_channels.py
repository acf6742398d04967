import json

import numpy as np
import pytest

from entlab import linalg
from entlab.channels import (
    apply,
    apply_lifted,
    basis_contraction,
    channel_from_json,
    channel_to_json,
    choi,
    contraction_channel,
    depolarizing,
    identity_channel,
    is_entanglement_breaking,
    lift_local,
    named_unitary,
    random_channel,
    unitary_channel,
)
from entlab.errors import (
    DimensionMismatch,
    DimensionUnsupported,
    NotNormalized,
    NotTracePreserving,
    NotUnitary,
    ParamOutOfRange,
)
from entlab.measures import concurrence
from entlab.states import (
    DensityMatrix,
    bell_psi_plus,
    max_entangled,
    random_density_matrix,
    schmidt_pure,
    werner_state,
)


def _qubit(rng):
    return DensityMatrix(linalg.ginibre_density(2, rng), (2,))


class TestDepolarizing:
    def test_action_matches_formula(self, rng):
        for p in (0.0, 0.2, 0.5, 1.0):
            ch = depolarizing(p)
            for _ in range(10):
                rho = _qubit(rng)
                expected = p * rho.matrix + (1 - p) * np.eye(2) / 2
                assert np.max(np.abs(apply(ch, rho).matrix - expected)) < 1e-12

    def test_identity_at_one(self, rng):
        rho = _qubit(rng)
        assert np.allclose(apply(depolarizing(1), rho).matrix, rho.matrix, atol=1e-15)

    def test_constant_at_zero(self, rng):
        assert np.allclose(apply(depolarizing(0), _qubit(rng)).matrix, np.eye(2) / 2, atol=1e-15)

    @pytest.mark.parametrize("q", [0.0, 0.3, 0.8, 1.0])
    def test_werner_image(self, q):
        out = apply_lifted(lift_local(depolarizing(0.5)), werner_state(q))
        assert np.max(np.abs(out.matrix - werner_state(0.5 * q).matrix)) < 1e-12

    def test_out_of_range(self):
        with pytest.raises(ParamOutOfRange):
            depolarizing(-0.01)


class TestUnitaryAndContraction:
    def test_contraction_of_mixed(self):
        out = apply(basis_contraction(0), DensityMatrix(np.eye(2) / 2, (2,)))
        assert np.allclose(out.matrix, np.diag([1, 0]), atol=0)

    def test_sigma_z_flips_plus(self):
        plus = np.full((2, 2), 0.5)
        minus = np.array([[0.5, -0.5], [-0.5, 0.5]])
        out = apply(unitary_channel(linalg.PAULI_Z), DensityMatrix(plus, (2,)))
        assert np.allclose(out.matrix, minus, atol=1e-15)

    def test_contraction_tp_defect(self):
        xi = np.array([0.6, 0.8j])
        assert contraction_channel(xi).defect < 1e-12

    def test_contraction_maps_everything_to_target(self, rng):
        xi = np.array([0.6, 0.8j])
        ch = contraction_channel(xi)
        for _ in range(10):
            assert np.max(np.abs(apply(ch, _qubit(rng)).matrix - np.outer(xi, xi.conj()))) < 1e-12

    def test_errors(self):
        with pytest.raises(NotUnitary):
            unitary_channel(np.diag([1, 2]))
        with pytest.raises(NotNormalized):
            contraction_channel([1, 1])
        with pytest.raises(ParamOutOfRange):
            named_unitary("T")


class TestApply:
    def test_identity_fixes_state(self, rng):
        rho = random_density_matrix((2, 2), rng)
        assert np.array_equal(apply(identity_channel(4), rho).matrix, rho.matrix)

    def test_dimension_mismatch(self, rng):
        with pytest.raises(DimensionMismatch):
            apply(depolarizing(0.5), random_density_matrix((2, 2), rng))

    def test_depolarized_schmidt_matrix(self):
        p, alpha = 0.5, np.sqrt(0.7)
        beta = np.sqrt(1 - alpha**2)
        expected = np.zeros((4, 4))
        expected[0, 0] = alpha**2 * (1 + p) / 2
        expected[1, 1] = beta**2 * (1 - p) / 2
        expected[2, 2] = alpha**2 * (1 - p) / 2
        expected[3, 3] = beta**2 * (1 + p) / 2
        expected[0, 3] = expected[3, 0] = p * alpha * beta
        out = apply_lifted(lift_local(depolarizing(p)), schmidt_pure(alpha))
        assert np.max(np.abs(out.matrix - expected)) < 1e-12

    def test_mixture_form(self):
        # p Phi + (1 - p) I/2 ⊗ Tr_A Phi
        p = 0.3
        phi = schmidt_pure(0.9).density()
        expected = p * phi.matrix + (1 - p) * np.kron(np.eye(2) / 2, phi.reduced(1))
        out = apply_lifted(lift_local(depolarizing(p)), phi)
        assert np.max(np.abs(out.matrix - expected)) < 1e-12

    def test_trace_and_hermiticity_100_pairs(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            ch = lift_local(random_channel(rng))
            rho = random_density_matrix((2, 2), rng)
            raw = ch.apply_array(rho.matrix)
            assert abs(np.trace(raw) - 1) < 1e-12
            assert np.max(np.abs(raw - raw.conj().T)) < 1e-14


class TestLift:
    def test_identity(self):
        lifted = lift_local(identity_channel(2))
        assert np.array_equal(lifted.kraus[0], np.eye(4))

    def test_side_b(self, rng):
        a = _qubit(rng)
        b = _qubit(rng)
        ch = random_channel(rng)
        out = apply_lifted(lift_local(ch, "B"), a.tensor(b))
        assert np.max(np.abs(out.matrix - np.kron(a.matrix, apply(ch, b).matrix))) < 1e-12

    def test_factorises_on_products(self):
        rng = np.random.default_rng(17)
        for _ in range(50):
            ch = random_channel(rng)
            a, b = _qubit(rng), _qubit(rng)
            out = apply_lifted(lift_local(ch, "A"), a.tensor(b))
            assert np.max(np.abs(out.matrix - np.kron(apply(ch, a).matrix, b.matrix))) < 1e-12

    def test_psi_plus_to_werner(self):
        for p in (0.1, 0.5, 0.9):
            out = apply_lifted(lift_local(depolarizing(p)), bell_psi_plus())
            assert np.max(np.abs(out.matrix - werner_state(p).matrix)) < 1e-12

    def test_subsystem_index(self, rng):
        dims = (2, 2, 2)
        lifted = lift_local(basis_contraction(1), 1, dims)
        rho = random_density_matrix(dims, rng)
        out = apply_lifted(lifted, rho)
        assert np.allclose(linalg.partial_trace(out.matrix, dims, [1]), np.diag([0, 1]), atol=1e-14)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            lift_local(depolarizing(0.5), "A", (3, 2))

    def test_local_unitary_equivalence_50_pairs(self):
        # (E⊗I)[Psi_U] = (I⊗U) Omega_E (I⊗U)^dagger
        rng = np.random.default_rng(23)
        for _ in range(50):
            ch = random_channel(rng)
            u = linalg.haar_random_unitary(2, rng)
            lifted = lift_local(ch)
            lhs = apply_lifted(lifted, max_entangled(u)).matrix
            iu = np.kron(np.eye(2), u)
            rhs = iu @ apply_lifted(lifted, bell_psi_plus()).matrix @ iu.conj().T
            assert np.max(np.abs(lhs - rhs)) < 1e-10


class TestChoi:
    def test_identity(self):
        assert np.allclose(choi(identity_channel()).state.matrix, bell_psi_plus().projector(), atol=1e-15)

    def test_depolarizing(self):
        assert np.max(np.abs(choi(depolarizing(0.4)).state.matrix - werner_state(0.4).matrix)) < 1e-12

    def test_contraction(self):
        xi = np.array([0.6, 0.8])
        expected = np.kron(np.outer(xi, xi), np.eye(2) / 2)
        assert np.max(np.abs(choi(contraction_channel(xi)).state.matrix - expected)) < 1e-12

    def test_marginal_random_channels(self):
        rng = np.random.default_rng(31)
        for _ in range(50):
            assert np.max(np.abs(choi(random_channel(rng)).marginal() - np.eye(2) / 2)) < 1e-10


class TestEntanglementBreaking:
    def test_contraction(self):
        assert is_entanglement_breaking(basis_contraction(0))

    def test_identity(self):
        assert not is_entanglement_breaking(depolarizing(1))

    @pytest.mark.parametrize("p,expected", [(0.0, True), (0.3, True), (1 / 3, True), (0.34, False), (0.8, False)])
    def test_depolarizing_threshold(self, p, expected):
        assert is_entanglement_breaking(depolarizing(p)) is expected

    def test_implies_zero_output_concurrence(self):
        rng = np.random.default_rng(2)
        lifted = lift_local(depolarizing(0.3))
        for _ in range(50):
            assert concurrence(apply_lifted(lifted, random_density_matrix((2, 2), rng))) == 0.0

    def test_qutrit_unsupported(self):
        with pytest.raises(DimensionUnsupported):
            is_entanglement_breaking(identity_channel(3))


class TestSerialization:
    def test_round_trip(self):
        ch = random_channel(9)
        back = channel_from_json(json.dumps(channel_to_json(ch)))
        for k1, k2 in zip(ch.kraus, back.kraus):
            assert np.array_equal(k1, k2)

    def test_tp_defect_reported(self):
        rec = channel_to_json(depolarizing(0.5))
        rec["kraus"][0]["re"][0] *= 1.01
        with pytest.raises(NotTracePreserving) as err:
            channel_from_json(rec)
        assert err.value.defect > 1e-3

    def test_loader_tolerance_is_1e8(self):
        rec = channel_to_json(identity_channel())
        rec["kraus"][0]["re"][0] = 1 + 1e-9
        assert channel_from_json(rec).defect < 1e-8

    def test_length_mismatch(self):
        rec = channel_to_json(depolarizing(0.5))
        rec["kraus"][1]["im"] = rec["kraus"][1]["im"][:3]
        with pytest.raises(DimensionMismatch):
            channel_from_json(rec)


def test_random_channels_are_tp():
    rng = np.random.default_rng(0)
    for _ in range(20):
        assert random_channel(rng).defect < 1e-10
