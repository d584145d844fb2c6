"""Core linear algebra: states, observables, products and invariants."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from weakmeas.errors import DimensionMismatchError
from weakmeas.qcore import (
    Observable,
    StateVector,
    apply,
    expectation,
    inner,
    op_tensor,
    projector,
    tensor,
)

SQRT3 = np.sqrt(3.0)

# computed by hand from the scenario amplitudes, frozen here as the oracle
HARDY_OVERLAP = -1.0 / (2.0 * SQRT3)


def hardy_pre():
    return StateVector(np.array([1, 1, 1, 0], dtype=complex) / SQRT3)


def hardy_post():
    return StateVector(np.array([1, -1, -1, 1], dtype=complex) / 2.0)


def amplitude_lists(dim):
    finite = st.floats(-3, 3, allow_nan=False, allow_infinity=False)
    return st.lists(st.tuples(finite, finite), min_size=dim, max_size=dim).map(
        lambda pairs: np.array([complex(re, im) for re, im in pairs]))


def nonzero_state(dim):
    return amplitude_lists(dim).filter(lambda a: np.linalg.norm(a) > 1e-3).map(
        lambda a: StateVector(a / np.linalg.norm(a)))


class TestStateVector:
    def test_normalized_flag(self):
        assert StateVector(np.array([1, 0], dtype=complex)).is_normalized
        assert not StateVector(np.array([1, 1], dtype=complex)).is_normalized

    def test_normalize(self):
        s = StateVector(np.array([3, 4], dtype=complex)).normalized()
        assert s.is_normalized
        np.testing.assert_allclose(s.amplitudes, [0.6, 0.8])

    def test_duplicate_labels_rejected(self):
        with pytest.raises(ValueError, match="unique"):
            StateVector(np.array([1, 0], dtype=complex), ("a", "a"))

    def test_immutable(self):
        s = StateVector(np.array([1, 0], dtype=complex))
        with pytest.raises(ValueError):
            s.amplitudes[0] = 2.0


class TestTensor:
    def test_basis_product(self):
        a = StateVector(np.array([1, 0], dtype=complex))
        out = tensor(a, a)
        np.testing.assert_allclose(out.amplitudes, [1, 0, 0, 0])

    def test_uniform_product(self):
        plus = StateVector(np.array([1, 1], dtype=complex) / np.sqrt(2))
        out = tensor(plus, plus)
        np.testing.assert_allclose(out.amplitudes, np.full(4, 0.25 * 2), atol=1e-15)

    def test_label_order_is_lexicographic(self):
        a = StateVector(np.array([1, 0], dtype=complex), ("x", "y"))
        b = StateVector(np.array([1, 0, 0], dtype=complex), ("0", "1", "2"))
        assert tensor(a, b).labels == ("x·0", "x·1", "x·2", "y·0", "y·1", "y·2")

    @given(nonzero_state(2), nonzero_state(3))
    def test_norm_multiplicative(self, a, b):
        raw_a = StateVector(2.0 * a.amplitudes)
        assert tensor(raw_a, b).norm == pytest.approx(raw_a.norm * b.norm, rel=1e-12)

    @given(nonzero_state(2), nonzero_state(2), nonzero_state(3))
    def test_associative_amplitudes(self, a, b, c):
        left = tensor(tensor(a, b), c)
        right = tensor(a, tensor(b, c))
        np.testing.assert_allclose(left.amplitudes, right.amplitudes, atol=1e-12)


class TestInner:
    def test_hardy_overlap(self):
        ov = inner(hardy_post(), hardy_pre())
        assert ov == pytest.approx(HARDY_OVERLAP, abs=1e-15)
        assert abs(ov) ** 2 == pytest.approx(1.0 / 12.0, abs=1e-15)

    def test_self_inner_is_one(self):
        s = StateVector(np.array([1, 1j], dtype=complex) / np.sqrt(2))
        assert inner(s, s) == pytest.approx(1.0, abs=1e-15)

    @given(nonzero_state(3), nonzero_state(3))
    def test_conjugate_symmetry(self, a, b):
        assert inner(a, b) == pytest.approx(np.conj(inner(b, a)), abs=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            inner(StateVector(np.ones(2, dtype=complex)),
                  StateVector(np.ones(3, dtype=complex)))


class TestProjector:
    def test_basis_state(self):
        p = projector(StateVector(np.array([1, 0], dtype=complex)))
        np.testing.assert_allclose(p.matrix, np.diag([1.0, 0.0]))
        assert p.eigenvalues == (0.0, 1.0)

    def test_uniform_state(self):
        p = projector(StateVector(np.array([1, 1], dtype=complex) / np.sqrt(2)))
        np.testing.assert_allclose(p.matrix, np.full((2, 2), 0.5), atol=1e-15)

    @given(nonzero_state(4))
    def test_idempotent(self, s):
        p = projector(s).matrix
        np.testing.assert_allclose(p @ p, p, atol=1e-12)

    def test_rejects_unnormalized(self):
        with pytest.raises(ValueError, match="normalized"):
            projector(StateVector(np.array([1, 1], dtype=complex)))


class TestObservable:
    def test_identity_tensor_identity(self):
        out = op_tensor(Observable.identity(2), Observable.identity(2))
        np.testing.assert_allclose(out.matrix, np.eye(4))
        assert out.eigenvalues == (1.0,)

    def test_hardy_expectation(self):
        # electron-in-O occupation: one amplitude of the pre-selected state squared
        n_minus_o = Observable.diagonal([0, 1, 0, 1])
        assert expectation(n_minus_o, hardy_pre()) == pytest.approx(1.0 / 3.0, abs=1e-15)

    def test_apply_then_inner_matches_branch_amplitude(self):
        obs = Observable.diagonal([0, 1, 0, 1])
        pre, post = hardy_pre(), hardy_post()
        via_ops = inner(post, apply(_eigproj(obs, 1.0), pre))
        direct = sum(np.conj(post.amplitudes[k]) * pre.amplitudes[k] for k in (1, 3))
        assert via_ops == pytest.approx(direct, abs=1e-15)

    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError, match="Hermitian"):
            Observable.from_matrix(np.array([[0, 1], [0, 0]], dtype=complex))

    def test_rejects_broken_projector_family(self):
        good = np.diag([1.0, 0.0]).astype(complex)
        with pytest.raises(ValueError):
            Observable(np.diag([1.0, 0.0]), (1.0, 0.0), (good, good))

    def test_spectral_reconstruction_random(self):
        rng = np.random.default_rng(11)
        for _ in range(25):
            dim = int(rng.integers(2, 7))
            g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
            obs = Observable.from_matrix((g + g.conj().T) / 2)
            recon = sum(a * p for a, p in zip(obs.eigenvalues, obs.projectors))
            np.testing.assert_allclose(recon, obs.matrix, atol=1e-12)
            np.testing.assert_allclose(sum(obs.projectors), np.eye(dim), atol=1e-12)

    def test_degenerate_grouping(self):
        obs = Observable.from_matrix(np.diag([1.0, 1.0 + 1e-12, 3.0]).astype(complex))
        assert len(obs.eigenvalues) == 2

    @given(nonzero_state(3), nonzero_state(3))
    def test_hermitian_adjoint_identity(self, a, b):
        rng = np.random.default_rng(5)
        g = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        obs = Observable.from_matrix((g + g.conj().T) / 2)
        lhs = inner(a, apply(obs, b))
        rhs = np.conj(inner(b, apply(obs, a)))
        assert lhs == pytest.approx(rhs, abs=1e-12)

    def test_apply_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            apply(Observable.identity(3), StateVector(np.ones(2, dtype=complex)))


def _eigproj(obs: Observable, eigenvalue: float) -> Observable:
    """Projector onto one eigenspace of ``obs`` wrapped as an observable."""
    idx = obs.eigenvalues.index(eigenvalue)
    return projector_from_matrix(obs.projectors[idx])


def projector_from_matrix(p: np.ndarray) -> Observable:
    comp = np.eye(p.shape[0], dtype=complex) - p
    return Observable(p, (0.0, 1.0), (comp, p))
