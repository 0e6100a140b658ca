import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spinphonon.embed import (
    build_embedding,
    embed,
    embedding_to_dict,
    mode_entropy,
    naive_cutoff,
    roundtrip_check,
    svd_project,
)
from spinphonon.errors import EmptyProjectionError
from spinphonon.ingest import CouplingMatrix

from conftest import random_couplings


def _inf(a):
    return np.max(np.abs(a))


def test_generic_spin_half_has_rank_three(rng):
    g, w = random_couplings(rng, 3, 20)
    assert embed(g, w).rank == 3


def test_rank_one_coupling(rng):
    w = np.linspace(100, 900, 9)
    g = np.outer([1.0, 0.5, -0.2], rng.normal(size=9))
    emb = embed(g, w)
    assert emb.rank == 1
    assert emb.couplings.shape == (3, 1)


def test_max_rank_caps_primaries(rng):
    g, w = random_couplings(rng, 3, 10)
    assert embed(g, w, max_rank=2).rank == 2


def test_all_zero_coupling_raises():
    with pytest.raises(EmptyProjectionError):
        svd_project(np.zeros((3, 5)))


def test_threshold_drops_tiny_direction(rng):
    w = np.linspace(100, 900, 9)
    v = rng.normal(size=(3, 9))
    g = np.vstack([v[0], v[1], v[0] + 1e-13 * v[2]])
    assert svd_project(g, 1e-10)[0].rank == 2
    assert svd_project(g, 1e-15)[0].rank == 3


def test_projectors(rng):
    g, _ = random_couplings(rng, 3, 30)
    p, sigma, _ = svd_project(g)
    I = np.eye(30)
    assert _inf(p.P @ p.P - p.P) < 1e-12
    assert _inf(p.Q @ p.Q - p.Q) < 1e-12
    assert _inf(p.P @ p.Q) < 1e-12
    assert _inf(p.P + p.Q - I) < 1e-12
    assert np.trace(p.P) == pytest.approx(3.0)
    assert np.all(np.diff(sigma) <= 0)
    # coupling rows lie in ran(P)
    assert _inf(g @ p.Q) < 1e-15


def test_embedding_structure(rng):
    g, w = random_couplings(rng, 3, 25)
    emb = embed(g, w)
    T = emb.transform
    assert _inf(T.T @ T - np.eye(25)) < 1e-12
    # the transform is an exact congruence of the original Hessian
    assert _inf(T.T @ np.diag(w**2) @ T - emb.hessian()) / w.max() ** 2 < 1e-12
    # residual modes carry no spin coupling; primary couplings preserved
    assert _inf(g @ emb.residual_vectors) < 1e-15
    assert np.allclose(g @ emb.primary_vectors, emb.couplings)
    assert np.all(np.diff(emb.primary_freqs) >= 0)
    assert np.all(np.diff(emb.residual_freqs) >= 0)
    rep = roundtrip_check(emb, w)
    assert rep.ok(1e-10)


def test_coupling_matrix_input_uses_mass_weighted_frame(rng):
    vals, w = random_couplings(rng, 3, 8)
    emb = embed(CouplingMatrix(vals, w), w)
    assert np.allclose(emb.couplings, (vals * np.sqrt(w)) @ emb.primary_vectors)


def test_single_mode_bath_is_its_own_primary():
    emb = embed(np.array([[0.1], [0.0], [0.0]]), [200.0])
    assert emb.rank == 1
    assert emb.residual_freqs.size == 0
    assert emb.primary_freqs[0] == pytest.approx(200.0)


def test_primary_equal_to_original_when_couplings_localized():
    w = np.array([100.0, 150.0, 220.0, 400.0, 800.0])
    g = np.zeros((3, 5))
    g[0, 1], g[1, 3], g[2, 4] = 1e-3, 2e-3, 3e-3
    emb = embed(g, w)
    assert np.allclose(emb.primary_freqs, [150.0, 400.0, 800.0])
    assert np.allclose(emb.gamma, 0.0, atol=1e-9)
    assert np.allclose(emb.entropies(), 0.0, atol=1e-12)


def test_embedding_is_deterministic(rng):
    g, w = random_couplings(rng, 3, 40)
    a, b = embed(g, w), embed(g.copy(), w.copy())
    assert np.array_equal(a.transform, b.transform)
    assert np.array_equal(a.gamma, b.gamma)


def test_mode_entropy_limits():
    assert mode_entropy([0, 0, 1, 0]) == pytest.approx(0.0)
    assert mode_entropy(np.ones(8)) == pytest.approx(np.log(8))
    assert mode_entropy([3.0, 0, 0]) == pytest.approx(0.0)
    with pytest.raises(ValueError):
        mode_entropy(np.zeros(3))


def test_truncated_embedding_removes_coupling(rng):
    g, w = random_couplings(rng, 3, 12)
    emb = embed(g, w)
    t = emb.truncated([1, 2])
    assert np.all(t.couplings[:, 0] == 0)
    assert np.array_equal(t.couplings[:, 1:], emb.couplings[:, 1:])


def test_naive_cutoff_threshold():
    g = np.array([[1.0, 0.2, 0.5, 0.34, 0.36]])
    assert list(naive_cutoff(g, 0.35)) == [0, 2, 4]


def test_embedding_serialization(rng):
    g, w = random_couplings(rng, 3, 6)
    doc = embedding_to_dict(embed(g, w), w)
    assert doc["schema"] == "spd-emb-1"
    assert doc["rank"] == 3
    assert doc["roundtrip"]["max_rel_freq_error"] < 1e-10
    assert len(doc["entropies"]) == 3


@settings(max_examples=40, deadline=None)
@given(n_q=st.integers(1, 60), n_s=st.integers(1, 3), seed=st.integers(0, 2**31 - 1))
def test_embedding_properties(n_q, n_s, seed):
    rng = np.random.default_rng(seed)
    g, w = random_couplings(rng, n_s, n_q)
    proj, _, _ = svd_project(g)
    emb = build_embedding(proj, w, g)
    assert emb.rank == min(n_s, n_q)
    assert _inf(proj.P @ proj.Q) < 1e-12
    assert roundtrip_check(emb, w).max_rel_freq_error < 1e-10
