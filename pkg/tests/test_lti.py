import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sysidlab import lti, matkit
from sysidlab.errors import InvalidInputError, ShapeError, WindowError
from sysidlab.experiments import sample_system
from sysidlab.seeding import generator


def noiseless(n=2, p=1, m=1, seed=0):
    model = sample_system(n, p, m, generator(1234, seed))
    return lti.StateSpaceModel(model.A, model.B, model.C, diagonal_flag=True)


def random_stable(n, p, m, seed):
    """Generic (non-diagonal) stable model via a random similarity."""
    rng = np.random.default_rng(seed)
    lam = rng.uniform(-0.95, 0.95, n)
    T = rng.standard_normal((n, n)) + np.eye(n) * 2
    A = T @ np.diag(lam) @ np.linalg.inv(T)
    return lti.StateSpaceModel(A, rng.standard_normal((n, p)), rng.standard_normal((m, n)))


class TestModelValidation:
    def test_dimension_mismatch(self):
        with pytest.raises(ShapeError):
            lti.StateSpaceModel(np.eye(2), np.ones((3, 1)), np.ones((1, 2)))

    def test_cov_not_psd(self):
        with pytest.raises(InvalidInputError):
            lti.StateSpaceModel(np.eye(2), np.ones((2, 1)), np.ones((1, 2)),
                                process_cov=-np.eye(2))

    def test_diagonal_flag_enforced(self):
        with pytest.raises(InvalidInputError):
            lti.StateSpaceModel(np.array([[0.5, 0.1], [0.0, 0.2]]),
                                np.ones((2, 1)), np.ones((1, 2)), diagonal_flag=True)
        with pytest.raises(InvalidInputError):
            lti.StateSpaceModel(np.diag([0.5, 0.5]), np.ones((2, 1)), np.ones((1, 2)),
                                diagonal_flag=True)

    def test_delta_bar(self):
        model = lti.StateSpaceModel(np.eye(2), np.array([[1.0], [-3.0]]),
                                    np.array([[0.5, 2.0]]))
        assert model.delta_bar == pytest.approx(6.0)


class TestTrajectory:
    def test_length_consistency(self):
        with pytest.raises(ShapeError):
            lti.Trajectory(np.zeros((3, 1)), np.zeros((3, 1)))

    def test_energy_constraint(self):
        lti.Trajectory(np.full((4, 1), 0.5), np.zeros((5, 1)), energy_constrained=True)
        with pytest.raises(InvalidInputError):
            lti.Trajectory(np.ones((4, 1)), np.zeros((5, 1)), energy_constrained=True)

    def test_dataset_uniform_length(self):
        t1 = lti.Trajectory(np.zeros((3, 1)), np.zeros((4, 1)))
        t2 = lti.Trajectory(np.zeros((5, 1)), np.zeros((6, 1)))
        with pytest.raises(InvalidInputError):
            lti.Dataset([t1, t2])
        with pytest.raises(InvalidInputError):
            lti.Dataset([])


class TestMarkovSequence:
    def test_nilpotent(self):
        model = lti.StateSpaceModel(np.zeros((2, 2)), np.ones((2, 1)),
                                    np.array([[1.0, 2.0]]))
        mk = lti.markov_sequence(model, 4)
        np.testing.assert_allclose(mk.blocks[0], model.C @ model.B)
        assert np.all(mk.blocks[1:] == 0.0)

    def test_scalar_closed_form(self):
        model = lti.StateSpaceModel([[0.5]], [[1.0]], [[1.0]])
        mk = lti.markov_sequence(model, 3)
        np.testing.assert_allclose(mk.blocks[:, 0, 0], [1.0, 0.5, 0.25])

    def test_similarity_invariance(self):
        model = random_stable(3, 2, 2, seed=11)
        rng = np.random.default_rng(12)
        T = rng.standard_normal((3, 3)) + 2 * np.eye(3)
        Ti = np.linalg.inv(T)
        sim = lti.StateSpaceModel(T @ model.A @ Ti, T @ model.B, model.C @ Ti)
        a = lti.markov_sequence(model, 10).blocks
        b = lti.markov_sequence(sim, 10).blocks
        assert np.max(np.abs(a - b)) <= 1e-10 * max(1.0, np.max(np.abs(a)))


class TestSimulate:
    def test_unforced_noiseless_is_zero(self):
        model = noiseless(2, 1, 1, seed=0)
        traj = lti.simulate(model, np.zeros((5, 1)), noise_seed=0)
        assert np.all(traj.outputs == 0.0)

    def test_impulse_response_equals_markov(self):
        model = noiseless(3, 2, 2, seed=1)
        u = lti.gen_inputs("impulse", 2, 6)
        traj = lti.simulate(model, u, noise_seed=0)
        mk = lti.markov_sequence(model, 6)
        for k in range(1, 7):
            np.testing.assert_allclose(traj.outputs[k], mk.blocks[k - 1][:, 0], atol=1e-12)

    def test_fixed_seed_bit_identical(self):
        model = sample_system(2, 1, 1, generator(77, 0))  # has meas noise R = I
        u = lti.gen_inputs("gaussian-unit", 1, 8, seed=5)
        a = lti.simulate(model, u, noise_seed=42)
        b = lti.simulate(model, u, noise_seed=42)
        assert a.outputs.tobytes() == b.outputs.tobytes()

    def test_zero_cov_matches_toeplitz_response(self):
        model = noiseless(3, 2, 1, seed=2)
        u = lti.gen_inputs("gaussian-unit", 2, 7, seed=9)
        traj = lti.simulate(model, u, noise_seed=0)
        mk = lti.markov_sequence(model, 7)
        mu = mk.block_toeplitz(7) @ u.reshape(-1)
        np.testing.assert_allclose(traj.outputs[1:].reshape(-1), mu, atol=1e-12)

    def test_shape_error(self):
        model = noiseless(2, 1, 1, seed=3)
        with pytest.raises(ShapeError):
            lti.simulate(model, np.zeros((4, 2)), 0)


class TestGenInputs:
    def test_energy_normalized(self):
        for seed in range(5):
            u = lti.gen_inputs("gaussian-energy-normalized", 3, 7, seed=seed)
            assert abs(np.sum(u ** 2) - 1.0) <= 1e-12

    def test_impulse_layout(self):
        u = lti.gen_inputs("impulse", 2, 3)
        np.testing.assert_allclose(u, [[1.0, 0.0], [0.0, 0.0], [0.0, 0.0]])

    def test_gaussian_unit_variance(self):
        u = lti.gen_inputs("gaussian-unit", 1, 10 ** 4, seed=0)
        assert 0.9 <= np.var(u) <= 1.1

    def test_unknown_kind(self):
        with pytest.raises(InvalidInputError):
            lti.gen_inputs("bogus", 1, 4)


class TestHankel:
    def test_minimal_window(self):
        mk = lti.markov_sequence(noiseless(2, 1, 1, seed=4), 1)
        hank = lti.build_hankel(mk, 1, 1)
        np.testing.assert_allclose(hank.H, mk.blocks[0])
        assert hank.H_plus.shape == (1, 0)
        assert hank.H_minus.shape == (1, 0)

    def test_scalar_model(self):
        model = lti.StateSpaceModel([[0.5]], [[1.0]], [[1.0]])
        hank = lti.build_hankel(lti.markov_sequence(model, 3), 2, 2)
        np.testing.assert_allclose(hank.H, [[1.0, 0.5], [0.5, 0.25]])

    def test_block_structure(self):
        rng = np.random.default_rng(13)
        mk = lti.MarkovSequence(rng.standard_normal((7, 2, 3)))
        hank = lti.build_hankel(mk, 3, 4)
        for i in range(3):
            for j in range(4):
                np.testing.assert_array_equal(
                    hank.H[2 * i:2 * i + 2, 3 * j:3 * j + 3], mk.blocks[i + j])
        # trimmed companions drop the left/right block column
        np.testing.assert_array_equal(hank.H_plus, hank.H[:, 3:])
        np.testing.assert_array_equal(hank.H_minus, hank.H[:, :-3])

    def test_insufficient_blocks(self):
        mk = lti.markov_sequence(noiseless(2, 1, 1, seed=5), 3)
        with pytest.raises(WindowError):
            lti.build_hankel(mk, 3, 2)

    def test_factorization_identity(self):
        for seed in range(8):
            n = 2 + seed % 7
            model = random_stable(n, 2, 2, seed=seed)
            hank = lti.build_hankel(lti.markov_sequence(model, 9), 5, 5)
            oc = lti.build_obsv_ctrb(model, 5, 5)
            err = np.linalg.norm(hank.H - oc.O @ oc.Q)
            assert err <= 1e-10 * max(1.0, np.linalg.norm(hank.H))


class TestObsvCtrb:
    def test_repeated_identity(self):
        model = lti.StateSpaceModel(np.eye(2), np.ones((2, 1)), np.eye(2))
        oc = lti.build_obsv_ctrb(model, 2, 1)
        np.testing.assert_allclose(oc.O, np.vstack([np.eye(2), np.eye(2)]))
        assert oc.cond_O == pytest.approx(1.0)
        assert oc.full_rank_O

    def test_scalar_powers(self):
        model = lti.StateSpaceModel([[0.5]], [[1.0]], [[1.0]])
        oc = lti.build_obsv_ctrb(model, 1, 3)
        np.testing.assert_allclose(oc.Q, [[1.0, 0.5, 0.25]])

    def test_frobenius_entry_bounds(self):
        # ||O||_F^2 <= cbar^2 m n K1 and ||Q||_F^2 <= bbar^2 p n K2 when |poles| <= 1
        for seed in range(20):
            model = sample_system(4, 2, 3, generator(500, seed))
            oc = lti.build_obsv_ctrb(model, 6, 5)
            cbar = np.max(np.abs(model.C))
            bbar = np.max(np.abs(model.B))
            assert np.linalg.norm(oc.O) ** 2 <= cbar ** 2 * 3 * 4 * 6 + 1e-9
            assert np.linalg.norm(oc.Q) ** 2 <= bbar ** 2 * 2 * 4 * 5 + 1e-9


class TestMinimalRealization:
    def test_already_minimal(self):
        model = random_stable(3, 1, 1, seed=21)
        red = lti.minimal_realization(model)
        assert red.n == 3

    def test_unreachable_block_removed(self):
        A = np.diag([0.5, -0.3, 0.8])
        B = np.array([[1.0], [1.0], [0.0]])  # third state unreachable
        C = np.array([[1.0, 1.0, 1.0]])
        model = lti.StateSpaceModel(A, B, C)
        red = lti.minimal_realization(model)
        assert red.n == 2
        a = lti.markov_sequence(model, 10).blocks
        b = lti.markov_sequence(red, 10).blocks
        assert np.max(np.abs(a - b)) <= 1e-9

    def test_unobservable_block_removed(self):
        A = np.diag([0.5, -0.3, 0.8])
        B = np.ones((3, 1))
        C = np.array([[1.0, 1.0, 0.0]])
        red = lti.minimal_realization(lti.StateSpaceModel(A, B, C))
        assert red.n == 2


class TestHausdorff:
    def test_identical(self):
        assert lti.hausdorff([0.1, 0.5], [0.5, 0.1]) == 0.0

    def test_single_points(self):
        assert lti.hausdorff([0.0], [0.85]) == pytest.approx(0.85)

    def test_asymmetric_sets(self):
        assert lti.hausdorff([0.0, 1.0], [0.5]) == pytest.approx(0.5)

    def test_empty_rejected(self):
        with pytest.raises(InvalidInputError):
            lti.hausdorff([], [1.0])

    @given(st.lists(st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False),
                    min_size=1, max_size=5),
           st.lists(st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False),
                    min_size=1, max_size=5),
           st.lists(st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False),
                    min_size=1, max_size=5))
    @settings(max_examples=50, deadline=None)
    def test_metric_properties(self, a, b, c):
        dab = lti.hausdorff(a, b)
        assert dab == pytest.approx(lti.hausdorff(b, a))
        assert lti.hausdorff(a, b) <= lti.hausdorff(a, c) + lti.hausdorff(c, b) + 1e-12
        if set(a) == set(b):
            assert dab == 0.0


class TestSerialization:
    def test_round_trip_exact(self, tmp_path):
        model = sample_system(3, 2, 2, generator(31, 0))
        path = tmp_path / "model.json"
        lti.save_model(model, path)
        back = lti.load_model(path)
        assert np.array_equal(model.A, back.A)
        assert np.array_equal(model.B, back.B)
        assert np.array_equal(model.C, back.C)
        assert np.array_equal(model.process_cov, back.process_cov)
        assert np.array_equal(model.meas_cov, back.meas_cov)
        assert back.diagonal_flag == model.diagonal_flag

    def test_missing_field(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"A": [[0.5]]}))
        with pytest.raises(InvalidInputError):
            lti.load_model(path)
