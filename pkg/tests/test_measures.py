import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qoneway import measures
from qoneway.linalg import is_psd
from qoneway.sampling import make_rng, random_density_matrix, random_projector

from conftest import seeds, states

KET0 = np.diag([1.0, 0.0])
KET1 = np.diag([0.0, 1.0])
PLUS = np.full((2, 2), 0.5)


def test_von_neumann_examples():
    assert measures.von_neumann_entropy(KET0) == 0.0
    assert measures.von_neumann_entropy(np.eye(2) / 2) == pytest.approx(1.0, abs=1e-12)
    assert measures.von_neumann_entropy(np.diag([0.75, 0.25])) == pytest.approx(0.811278, abs=1e-6)


def test_invalid_states_rejected():
    with pytest.raises(measures.InvalidStateError):
        measures.von_neumann_entropy(np.diag([0.6, 0.6]))
    with pytest.raises(measures.InvalidStateError):
        measures.von_neumann_entropy(np.diag([1.2, -0.2]))


def test_relative_entropy_examples():
    rho = random_density_matrix(3, make_rng(1))
    assert measures.relative_entropy(rho, rho) == pytest.approx(0.0, abs=1e-12)
    assert measures.relative_entropy(KET0, np.eye(2) / 2) == pytest.approx(1.0, abs=1e-12)
    assert measures.relative_entropy(KET0, KET1) == math.inf


def test_relative_entropy_rank_deficient_sigma_with_nested_support():
    sigma = np.diag([0.5, 0.5, 0.0])
    rho = np.diag([1.0, 0.0, 0.0])
    assert measures.relative_entropy(rho, sigma) == pytest.approx(1.0)
    assert measures.support_contained(rho, sigma)
    assert not measures.support_contained(np.diag([0, 0, 1.0]), sigma)


def test_relative_entropy_support_threshold_keeps_small_eigenvalues():
    sigma = np.diag([1 - 1e-14, 1e-14])
    rho = np.diag([1 - 1e-10, 1e-10])
    assert measures.relative_entropy(rho, sigma) == math.inf
    kept = measures.relative_entropy(rho, sigma, support_threshold=0.0)
    expected = (1 - 1e-10) * math.log2((1 - 1e-10) / (1 - 1e-14)) + 1e-10 * math.log2(1e-10 / 1e-14)
    assert kept == pytest.approx(expected, abs=1e-12)


def test_relative_min_entropy_examples():
    rho = random_density_matrix(2, make_rng(2))
    assert measures.relative_min_entropy(rho, rho) == pytest.approx(0.0, abs=1e-9)
    assert measures.relative_min_entropy(KET0, np.eye(2) / 2) == pytest.approx(1.0, abs=1e-12)
    assert measures.relative_min_entropy(KET0, KET1) == math.inf


@given(states(d=3, full_rank=True), seeds)
def test_relative_min_entropy_is_smallest_psd_exponent(rho, seed):
    sigma = random_density_matrix(3, make_rng(seed))
    c = measures.relative_min_entropy(rho, sigma)
    assert is_psd(sigma - rho / 2 ** (c + 1e-7), tol=1e-12)
    assert not is_psd(sigma - rho / 2 ** (c - 1e-3), tol=0.0)


def test_trace_distance_examples():
    rho = random_density_matrix(2, make_rng(3))
    assert measures.trace_distance(rho, rho) == pytest.approx(0.0, abs=1e-14)
    assert measures.trace_distance(KET0, KET1) == pytest.approx(2.0)
    assert measures.trace_distance(KET0, PLUS) == pytest.approx(math.sqrt(2), abs=1e-6)


def test_cross_binary_entropy_examples():
    assert measures.cross_binary_entropy(0.5, 0.5) == pytest.approx(1.0)
    assert measures.cross_binary_entropy(0.25, 0.25) == pytest.approx(0.811278, abs=1e-6)
    h = measures.cross_binary_entropy(1e-6, 0.01)
    assert h == pytest.approx(0.014507, abs=1e-6)
    assert h >= 0.01
    assert measures.cross_binary_entropy(0.5, 0.0) == math.inf
    assert measures.binary_entropy(0.0) == 0.0
    with pytest.raises(ValueError):
        measures.cross_binary_entropy(1.5, 0.5)


def test_pinch_examples():
    p = KET0
    block = np.diag([0.3, 0.7])
    assert np.allclose(measures.pinch(block, p), block)
    assert np.allclose(measures.pinch(PLUS, p), np.eye(2) / 2)


@given(states(), seeds)
def test_pinsker(rho, seed):
    sigma = random_density_matrix(rho.shape[0], make_rng(seed))
    s = measures.relative_entropy(rho, sigma)
    assert measures.trace_distance(rho, sigma) <= measures.pinsker_bound(s) + 1e-9


@given(states(), seeds)
def test_relative_entropy_below_min_entropy(rho, seed):
    sigma = random_density_matrix(rho.shape[0], make_rng(seed))
    assert measures.relative_entropy(rho, sigma) <= measures.relative_min_entropy(rho, sigma) + 1e-9


@given(states(), seeds, st.data())
def test_uhlmann_under_pinching(rho, seed, data):
    d = rho.shape[0]
    rng = make_rng(seed)
    sigma = random_density_matrix(d, rng)
    p = random_projector(d, data.draw(st.integers(1, d - 1)), rng)
    before = measures.relative_entropy(rho, sigma)
    after = measures.relative_entropy(measures.pinch(rho, p), measures.pinch(sigma, p))
    assert after <= before + 1e-9


@given(states(), seeds)
def test_klein(rho, seed):
    sigma = random_density_matrix(rho.shape[0], make_rng(seed))
    assert measures.relative_entropy(rho, sigma) >= 0.0
    assert abs(measures.relative_entropy(rho, rho)) <= 1e-9


@given(st.data())
def test_finite_iff_support_contained(data):
    d = data.draw(st.sampled_from([2, 3, 4]))
    rho = data.draw(states(d=d))
    sigma = data.draw(states(d=d))
    finite = math.isfinite(measures.relative_entropy(rho, sigma))
    assert finite == measures.support_contained(rho, sigma)


@given(states())
def test_maximally_mixed_reference(rho):
    d = rho.shape[0]
    s = measures.relative_entropy(rho, np.eye(d) / d)
    assert s == pytest.approx(math.log2(d) - measures.von_neumann_entropy(rho), abs=1e-9)
