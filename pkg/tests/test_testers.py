"""Application testers: function isomorphism, eigenvector circuits, membership,
channel-state tests, productness and genuine entanglement."""

import itertools
import math

import numpy as np
import pytest

from seqmeas import (
    FunctionTable,
    PermutationAction,
    PureState,
    RegisterShape,
    UnitarySet,
    analytic_eigen_accept,
    basis_state,
    bell_pair,
    choi_state,
    choi_vector,
    cut_product_accept,
    cut_product_test,
    eigen_copies,
    eigen_measurement_cycle,
    eigen_or_accept_exact,
    eigen_test,
    eigen_tester_state,
    function_state,
    g_iso_accept_exact,
    g_iso_test,
    genuine_ent_accept_exact,
    genuine_ent_copies,
    genuine_ent_test,
    ghz_state,
    hs_distance,
    hs_inner,
    membership_accept_exact,
    membership_copies,
    mw_accept_exact,
    pair_state,
    product_state,
    proper_cuts,
    state_membership_test,
    subsystem_purity,
    trial_rng,
    unitary_s_iso_accept_exact,
    unitary_s_iso_test,
    unitary_set_test,
)
from seqmeas.gates import PAULI_X, PAULI_Z
from seqmeas.testers import (
    and_power_distribution,
    conjugation_unitary,
    eigen_measurement_projector,
    joint_projector_bits,
    pair_swap_gates,
    pair_swap_unitary,
    per_candidate_accept,
    swap_overlap_two_copies,
)
from seqmeas.gates import dense_gate_matrix
from seqmeas.sampling import random_pure_state, random_unitary

QUBIT = RegisterShape((2,))

BIT_SWAP = PermutationAction((0, 2, 1, 3))
DESK_GROUP = (PermutationAction.identity(4), BIT_SWAP)
F_ISO = FunctionTable(4, 2, (0, 1, 0, 1))
G_ISO = F_ISO.compose(BIT_SWAP)
F_FAR = FunctionTable(4, 2, (0, 0, 1, 1))
G_FAR = FunctionTable(4, 2, (0, 1, 1, 0))


class TestFunctionStates:
    def test_equal_functions(self):
        f = FunctionTable(4, 2, (0, 1, 1, 0))
        assert abs(function_state(f).overlap(function_state(f)) - 1.0) <= 1e-12

    def test_one_point_difference(self):
        f = FunctionTable(4, 2, (0, 1, 1, 0))
        g = FunctionTable(4, 2, (0, 1, 1, 1))
        assert abs(function_state(f).overlap(function_state(g)) - 0.75) <= 1e-12

    def test_disjoint_functions(self):
        f = FunctionTable(4, 2, (0, 0, 0, 0))
        g = FunctionTable(4, 2, (1, 1, 1, 1))
        assert abs(function_state(f).overlap(function_state(g))) <= 1e-12

    def test_overlap_equals_one_minus_distance_exhaustive(self):
        """<f|g> = 1 - d(f, g) over every pair with |X| <= 6, |Y| <= 3."""
        for nx, ny in ((2, 2), (3, 3), (4, 2), (6, 3)):
            tables = [
                FunctionTable(nx, ny, values)
                for values in itertools.product(range(ny), repeat=nx)
            ]
            states = np.stack([function_state(f).amplitudes for f in tables])
            overlaps = (states.conj() @ states.T).real
            values = np.array([f.values for f in tables])
            distances = (values[:, None, :] != values[None, :, :]).mean(axis=2)
            assert np.abs(overlaps - (1.0 - distances)).max() <= 1e-10

    def test_from_lines_round_trip(self):
        f = FunctionTable.from_lines(["0 1", "1 0", "2 1", "3 1"])
        assert f.values == (1, 0, 1, 1)
        assert f.codomain_size == 2

    def test_from_lines_rejects_gaps(self):
        with pytest.raises(ValueError):
            FunctionTable.from_lines(["0 1", "2 0"])


class TestPairSwapUnitary:
    def test_gate_decomposition_matches_dense(self):
        shape = RegisterShape((2, 4, 2))
        for sigma in (BIT_SWAP, PermutationAction((1, 2, 3, 0))):
            dense = pair_swap_unitary(sigma, 2)
            composed = np.eye(16, dtype=complex)
            for gate in pair_swap_gates(sigma):
                composed = dense_gate_matrix(gate, shape) @ composed
            np.testing.assert_allclose(composed, dense, atol=1e-12)

    def test_overlap_identity_exhaustive(self):
        """<psi|U'|psi> = 1 - d(f o sigma, g) over all (f, g, sigma), |X|=4, |Y|=2."""
        nx, ny = 4, 2
        tables = [FunctionTable(nx, ny, v) for v in itertools.product(range(ny), repeat=nx)]
        states = np.stack([function_state(f).amplitudes for f in tables])
        dim = states.shape[1]
        worst = 0.0
        for perm in itertools.permutations(range(nx)):
            sigma = PermutationAction(perm)
            u = pair_swap_unitary(sigma, ny)
            composed = np.stack(
                [function_state(f.compose(sigma)).amplitudes for f in tables]
            )
            for i in range(len(tables)):
                psi = np.zeros((len(tables), 2 * dim), dtype=np.complex128)
                psi[:, :dim] = states[i]
                psi[:, dim:] = states
                psi /= math.sqrt(2)
                vals = np.einsum("ij,ij->i", psi.conj(), psi @ u.T).real
                expected = (composed[i].conj() @ states.T).real
                worst = max(worst, np.abs(vals - expected).max())
        assert worst <= 1e-10

    def test_isomorphic_pair_is_fixed_point(self):
        psi = pair_state(F_ISO, G_ISO)
        u = pair_swap_unitary(BIT_SWAP, 2)
        np.testing.assert_allclose(u @ psi.amplitudes, psi.amplitudes, atol=1e-12)


class TestEigenCircuit:
    def test_identity_unitary_accepts_certainly(self):
        psi = random_pure_state(trial_rng(20, 0), QUBIT)
        phi = eigen_tester_state(psi, 3)
        _, prob, _ = eigen_measurement_cycle(phi, np.eye(2), psi.shape, 3, branch=1)
        assert abs(prob - 1.0) <= 1e-10

    def test_pauli_z_on_plus_two_copies(self):
        plus = PureState(QUBIT, np.array([1.0, 1.0]) / math.sqrt(2))
        assert abs(analytic_eigen_accept(PAULI_Z, plus, 2) - 0.25) <= 1e-12

    def test_pauli_x_on_plus(self):
        plus = PureState(QUBIT, np.array([1.0, 1.0]) / math.sqrt(2))
        assert abs(analytic_eigen_accept(PAULI_X, plus, 3) - 1.0) <= 1e-12

    def test_circuit_matches_analytic(self):
        for k in range(1, 7):
            rng = trial_rng(21, k)
            psi = random_pure_state(rng, QUBIT)
            u = random_unitary(rng, 2)
            phi = eigen_tester_state(psi, k)
            _, prob, _ = eigen_measurement_cycle(phi, u, psi.shape, k, branch=1)
            assert abs(prob - analytic_eigen_accept(u, psi, k)) <= 1e-9

    def test_far_case_decay(self):
        """Acceptance <= (1 - eps/2)^k when |<psi|U|psi>| <= 1 - eps."""
        rng = trial_rng(22, 0)
        psi = random_pure_state(rng, QUBIT)
        for k in range(1, 9):
            u = random_unitary(rng, 2)
            overlap = abs(np.vdot(psi.amplitudes, u @ psi.amplitudes))
            eps = 1.0 - overlap
            if eps <= 0:
                continue
            acc = analytic_eigen_accept(u, psi, k)
            assert acc <= (1 - eps / 2) ** k + 1e-12

    def test_dense_projector_matches_circuit(self):
        rng = trial_rng(23, 0)
        psi = random_pure_state(rng, QUBIT)
        u = random_unitary(rng, 2)
        k = 2
        p = eigen_measurement_projector(u, psi.shape, k)
        np.testing.assert_allclose(p @ p, p, atol=1e-10)
        phi = eigen_tester_state(psi, k)
        dense_prob = np.vdot(phi.amplitudes, p @ phi.amplitudes).real
        _, circuit_prob, _ = eigen_measurement_cycle(phi, u, psi.shape, k, branch=1)
        assert abs(dense_prob - circuit_prob) <= 1e-10

    def test_measurement_cycle_restores_layout(self):
        """After inversion the residual lives back in the original layout:
        accepting twice in a row on an eigenstate keeps probability 1."""
        psi = basis_state(QUBIT, (0,))
        phi = eigen_tester_state(psi, 2)
        u = np.diag([1.0, -1.0])  # psi is a +1 eigenvector
        _, p1, state = eigen_measurement_cycle(phi, u, psi.shape, 2, branch=1)
        _, p2, _ = eigen_measurement_cycle(state, u, psi.shape, 2, branch=1)
        assert abs(p1 - 1.0) <= 1e-10 and abs(p2 - 1.0) <= 1e-10

    def test_copy_rule(self):
        assert eigen_copies(2, 0.5) == 15  # least k with 8 (3/4)^k <= 1/8
        assert 4 * 2 * 0.75**15 <= 1 / 8
        assert 4 * 2 * 0.75**14 > 1 / 8


class TestJointBitOracle:
    def test_joint_bits_simple(self):
        p0 = np.diag([1.0, 0.0])
        p1 = np.diag([1.0, 1.0])
        vec = np.array([1.0, 1.0]) / math.sqrt(2)
        atoms = dict(joint_projector_bits([p0, p1], vec))
        assert abs(atoms[0b11] - 0.5) <= 1e-12  # |0>: both accept
        assert abs(atoms[0b10] - 0.5) <= 1e-12  # |1>: only the identity accepts

    def test_noncommuting_rejected(self):
        p0 = np.diag([1.0, 0.0])
        plus = np.full((2, 2), 0.5)
        with pytest.raises(ValueError):
            joint_projector_bits([p0, plus], np.array([1.0, 0.0]))

    def test_and_distribution_two_factors(self):
        atoms = [(0b11, 0.5), (0b10, 0.5)]
        dist = and_power_distribution(atoms, 2, 2)
        # bit 1 always set; bit 0 set iff both factors chose 0b11
        assert abs(dist[0b11] - 0.25) <= 1e-12
        assert abs(dist[0b10] - 0.75) <= 1e-12

    def test_oracle_matches_dense_on_commuting_instance(self):
        mats = [pair_swap_unitary(s, 2) for s in DESK_GROUP]
        psi = pair_state(F_FAR, G_FAR)
        for k in (1, 2):
            joint = eigen_or_accept_exact(mats, psi, k, method="joint")
            dense = eigen_or_accept_exact(mats, psi, k, method="dense")
            assert abs(joint - dense) <= 1e-10

    def test_zero_sector_reduction_matches_full_space(self):
        """The flag-0 block reduction agrees with the dense oracle run on the
        complete tester space including the flag qubit."""
        rng = trial_rng(24, 0)
        psi = random_pure_state(rng, QUBIT)
        mats = [random_unitary(rng, 2) for _ in range(2)]
        k = 2
        reduced = eigen_or_accept_exact(mats, psi, k, method="dense")
        lam = sum(eigen_measurement_projector(u, psi.shape, k) for u in mats) / 2
        phi = eigen_tester_state(psi, k)
        full = mw_accept_exact(lam, phi, 2)
        assert abs(reduced - full) <= 1e-10


class TestGIso:
    def test_desk_distances(self):
        assert F_FAR.distance(G_FAR) == 0.5
        assert F_FAR.compose(BIT_SWAP).distance(G_FAR) == 0.5
        assert F_ISO.compose(BIT_SWAP).distance(G_ISO) == 0.0

    def test_isomorphic_accepts(self):
        exact = g_iso_accept_exact(F_ISO, G_ISO, DESK_GROUP, 0.5)
        assert exact >= 1.0 / 7.0

    def test_far_pair_rejected_at_rule_k(self):
        exact = g_iso_accept_exact(F_FAR, G_FAR, DESK_GROUP, 0.5)
        assert exact <= 1.0 / 8.0

    def test_identity_group_equal_functions(self):
        group = (PermutationAction.identity(4),)
        run = g_iso_test(F_ISO, F_ISO, group, 0.5, trial_rng(25, 0), copies_k=2)
        assert run.accepted

    def test_query_accounting(self):
        run = g_iso_test(F_ISO, G_ISO, DESK_GROUP, 0.5, trial_rng(26, 0), copies_k=3)
        assert run.copies_used == 3
        assert run.queries_f == 3 and run.queries_g == 3

    def test_sampled_statistics_small_k(self):
        k = 2
        exact = g_iso_accept_exact(F_ISO, G_ISO, DESK_GROUP, 0.5, copies_k=k)
        trials = 2000
        count = sum(
            g_iso_test(F_ISO, G_ISO, DESK_GROUP, 0.5, trial_rng(27, t), copies_k=k).accepted
            for t in range(trials)
        )
        sigma = math.sqrt(exact * (1 - exact) / trials)
        assert abs(count / trials - exact) <= 4 * sigma + 1e-9


class TestMembership:
    def test_copy_rule(self):
        assert membership_copies(2, 0.5) == 15

    def test_member_accepts(self):
        phi0, phi1 = basis_state(QUBIT, (0,)), basis_state(QUBIT, (1,))
        k = membership_copies(2, 0.5)
        assert membership_accept_exact([phi0, phi1], phi0, k) >= 1.0 / 7.0

    def test_member_sampled(self):
        phi0, phi1 = basis_state(QUBIT, (0,)), basis_state(QUBIT, (1,))
        assert state_membership_test([phi0, phi1], phi0, 0.5, trial_rng(28, 0), copies_k=4) in (
            True,
            False,
        )

    def test_far_state_rejected_at_rule_k(self):
        phi0, phi1 = basis_state(QUBIT, (0,)), basis_state(QUBIT, (1,))
        far = PureState(QUBIT, np.array([math.sqrt(3) / 2, 0.5]))
        k = membership_copies(2, 0.5)
        per = per_candidate_accept(phi0, far, k)
        assert abs(per - 0.75**k) <= 1e-10
        exact = membership_accept_exact([phi0, phi1], far, k)
        assert exact <= 4 * 2 * 0.75**k
        assert exact <= 1.0 / 8.0

    def test_gram_matches_dense_small_k(self):
        rng = trial_rng(29, 0)
        candidates = [random_pure_state(rng, QUBIT) for _ in range(3)]
        psi = random_pure_state(rng, QUBIT)
        k = 2
        lam = sum(
            np.outer(np.kron(c.amplitudes, c.amplitudes), np.kron(c.amplitudes, c.amplitudes).conj())
            for c in candidates
        ) / 3
        big = product_state([psi] * k)
        dense = mw_accept_exact(lam, big, 3)
        gram = membership_accept_exact(candidates, psi, k)
        assert abs(gram - dense) <= 1e-10

    def test_sampled_statistics(self):
        phi0, phi1 = basis_state(QUBIT, (0,)), basis_state(QUBIT, (1,))
        k = 3
        exact = membership_accept_exact([phi0, phi1], phi0, k)
        trials = 2000
        count = sum(
            state_membership_test([phi0, phi1], phi0, 0.5, trial_rng(30, t), copies_k=k)
            for t in range(trials)
        )
        sigma = math.sqrt(exact * (1 - exact) / trials)
        assert abs(count / trials - exact) <= 4 * sigma + 1e-9

    def test_empty_candidates_rejected(self):
        with pytest.raises(ValueError):
            state_membership_test([], plus_state_local(), 0.5, trial_rng(0, 0))


def plus_state_local():
    return PureState(QUBIT, np.array([1.0, 1.0]) / math.sqrt(2))


class TestChoi:
    def test_distance_to_self(self):
        u = random_unitary(trial_rng(31, 0), 3)
        assert hs_distance(u, u) <= 1e-12

    def test_identity_vs_pauli_z(self):
        assert abs(hs_distance(np.eye(2), PAULI_Z) - 1.0) <= 1e-12

    def test_inner_product_identity_random(self):
        for t in range(100):
            rng = trial_rng(32, t)
            d = int(rng.integers(2, 5))
            u, v = random_unitary(rng, d), random_unitary(rng, d)
            assert abs(choi_state(u).overlap(choi_state(v)) - hs_inner(u, v)) <= 1e-10

    def test_local_action_identity_random(self):
        for t in range(100):
            rng = trial_rng(33, t)
            d = int(rng.integers(2, 5))
            v = random_unitary(rng, d)
            a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
            b = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
            lhs = np.kron(a, b) @ choi_vector(v)
            rhs = choi_vector(a @ v @ b.T)
            assert np.abs(lhs - rhs).max() <= 1e-10

    def test_distance_equals_state_trace_distance(self):
        from seqmeas import trace_distance_pure

        rng = trial_rng(34, 0)
        u, v = random_unitary(rng, 3), random_unitary(rng, 3)
        assert abs(
            hs_distance(u, v) - trace_distance_pure(choi_state(u), choi_state(v))
        ) <= 1e-10

    def test_rejects_non_unitary(self):
        with pytest.raises(ValueError):
            choi_state(np.diag([1.0, 2.0]))


class TestUnitarySetMembership:
    def test_member_accepts(self):
        s = UnitarySet((np.eye(2), PAULI_X))
        run = unitary_set_test(s, PAULI_X, 0.5, trial_rng(35, 0), copies_k=4)
        assert run.copies_used == 4 and run.oracle_uses == 4

    def test_far_unitary(self):
        assert hs_distance(np.eye(2), PAULI_Z) >= 1.0  # far case premise
        s = UnitarySet((np.eye(2),))
        k = membership_copies(1, 1.0)
        exact = membership_accept_exact([choi_state(np.eye(2))], choi_state(PAULI_Z), k)
        assert exact <= 1.0 / 8.0


class TestUnitarySIso:
    def test_conjugation_identity(self):
        rng = trial_rng(36, 0)
        u = random_unitary(rng, 2)
        v = random_unitary(rng, 2)
        w = u @ v @ u.conj().T
        psi = product_state([choi_state(v), choi_state(w)])
        up = conjugation_unitary(u)
        overlap = np.vdot(psi.amplitudes, up @ psi.amplitudes)
        assert abs(overlap - 1.0) <= 1e-10

    def test_overlap_is_squared_hs_inner(self):
        rng = trial_rng(37, 0)
        u, v, w = (random_unitary(rng, 2) for _ in range(3))
        psi = product_state([choi_state(v), choi_state(w)])
        overlap = np.vdot(psi.amplitudes, conjugation_unitary(u) @ psi.amplitudes)
        expected = abs(hs_inner(u @ v @ u.conj().T, w)) ** 2
        assert abs(overlap - expected) <= 1e-10

    def test_conjugate_pair_accepts(self):
        s = UnitarySet((np.eye(2), PAULI_X))
        v = random_unitary(trial_rng(38, 0), 2)
        exact = unitary_s_iso_accept_exact(s, v, v, 1.0)
        assert exact >= 1.0 / 7.0

    def test_far_pair_rejected(self):
        s = UnitarySet((np.eye(2), PAULI_X))
        exact = unitary_s_iso_accept_exact(s, np.eye(2), PAULI_Z, 1.0)
        assert exact <= 1.0 / 8.0

    def test_equal_unitaries_with_identity_set(self):
        s = UnitarySet((np.eye(2),))
        v = random_unitary(trial_rng(39, 0), 2)
        assert unitary_s_iso_test(s, v, v, 1.0, trial_rng(39, 1), copies_k=2)


class TestCutProduct:
    def test_product_state_certain(self):
        psi = product_state([plus_state_local(), bell_pair()])
        assert abs(cut_product_accept(psi, (0,)) - 1.0) <= 1e-10
        assert cut_product_test(psi, (0,), trial_rng(40, 0))

    def test_bell_pair_three_quarters(self):
        assert abs(cut_product_accept(bell_pair(), (0,)) - 0.75) <= 1e-12

    def test_ghz_single_cuts(self):
        ghz = ghz_state(3)
        for cut in ((0,), (1,), (2,)):
            assert abs(cut_product_accept(ghz, cut) - 0.75) <= 1e-12

    def test_acceptance_equals_purity_form(self):
        for t in range(20):
            psi = random_pure_state(trial_rng(41, t), RegisterShape((2, 2, 2)))
            for cut in proper_cuts(3):
                via_swap = 0.5 * (1.0 + swap_overlap_two_copies(psi, cut))
                via_purity = 0.5 * (1.0 + subsystem_purity(psi, cut))
                assert abs(via_swap - via_purity) <= 1e-10

    def test_invalid_cut(self):
        with pytest.raises(ValueError):
            cut_product_test(bell_pair(), (0, 1), trial_rng(0, 0))


class TestGenuineEntanglement:
    def test_cut_enumeration(self):
        assert proper_cuts(3) == [(0,), (0, 1), (0, 2)]
        assert len(proper_cuts(4)) == 7

    def test_fully_product_accepts(self):
        psi = basis_state(RegisterShape((2, 2, 2)), (0, 0, 0))
        assert genuine_ent_test(psi, 3, math.sqrt(0.5), trial_rng(42, 0), copies_k=4)

    def test_product_across_one_cut_case1(self):
        psi = product_state([basis_state(QUBIT, (0,)), bell_pair()])
        k = genuine_ent_copies(3, math.sqrt(0.5))
        exact = genuine_ent_accept_exact(psi, 3, k)
        assert exact >= 1.0 / 7.0

    def test_ghz_rejected_at_rule_k(self):
        k = genuine_ent_copies(3, math.sqrt(0.5))
        assert k == 32
        exact = genuine_ent_accept_exact(ghz_state(3), 3, k)
        per_cut = 0.75 ** (k // 2)
        assert exact <= 4 * 3 * per_cut + 1e-12
        assert exact <= 1.0 / 8.0

    def test_oracle_matches_dense_small_k(self):
        psi = random_pure_state(trial_rng(43, 0), RegisterShape((2, 2)))
        k = 2
        exact = genuine_ent_accept_exact(psi, 2, k)
        # dense route: single cut {0}; measurement = symmetriser on the pair
        d = psi.shape.total_dim
        swap = np.zeros((d * d, d * d))
        for a in range(d):
            for b in range(d):
                la, lb = divmod(a, 2), divmod(b, 2)
                a2 = lb[0] * 2 + la[1]
                b2 = la[0] * 2 + lb[1]
                swap[a2 * d + b2, a * d + b] = 1.0
        lam = 0.5 * (np.eye(d * d) + swap)
        big = product_state([psi] * k)
        dense = mw_accept_exact(lam, big, 1)
        assert abs(exact - dense) <= 1e-10

    def test_sampled_statistics_small_k(self):
        psi = product_state([basis_state(QUBIT, (0,)), bell_pair()])
        k = 4
        exact = genuine_ent_accept_exact(psi, 3, k)
        trials = 2000
        count = sum(
            genuine_ent_test(psi, 3, math.sqrt(0.5), trial_rng(44, t), copies_k=k)
            for t in range(trials)
        )
        sigma = math.sqrt(exact * (1 - exact) / trials)
        assert abs(count / trials - exact) <= 4 * sigma + 1e-9

    def test_odd_copy_count_rejected(self):
        with pytest.raises(ValueError):
            genuine_ent_test(ghz_state(3), 3, 0.5, trial_rng(0, 0), copies_k=3)


class TestEigenTestEndToEnd:
    def test_eigenvector_present_sampled(self):
        psi = basis_state(QUBIT, (0,))
        mats = [np.diag([1.0, -1.0]), PAULI_X]  # psi is fixed by the first
        exact = eigen_or_accept_exact(mats, psi, 3)
        trials = 2000
        count = sum(
            eigen_test(mats, psi, 0.5, trial_rng(45, t), copies_k=3) for t in range(trials)
        )
        sigma = math.sqrt(exact * (1 - exact) / trials)
        assert abs(count / trials - exact) <= 4 * sigma + 1e-9

    def test_dimension_guard(self):
        psi = random_pure_state(trial_rng(46, 0), RegisterShape((16,)))
        with pytest.raises(ValueError):
            eigen_test([np.eye(16)], psi, 0.5, trial_rng(46, 1), copies_k=6)
