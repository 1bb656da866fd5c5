import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from clustermjd import (IllConditionedChannel, RdmaPart, SystemParams,
                        build_ia_precoding, build_profile_ia,
                        build_profile_mjd, build_profile_rdma, sample_channel,
                        zero_forcing_filter)
from clustermjd.montecarlo import trial_rng
from clustermjd.profiles import complex_gaussian, reference_vector


def params(M=4, K=5, alpha=0.5, gamma=100.0):
    return SystemParams.make(M=M, K=K, alpha=alpha, gamma=gamma)


# ---------------------------------------------------------------------------
# joint-decoding profile
# ---------------------------------------------------------------------------

def test_mjd_profile_is_banded_kron():
    alpha = 0.37
    p = params(M=3, K=1, alpha=alpha)
    base = np.array([[1, alpha, 0, 0],
                     [0, 1, alpha, 0],
                     [0, 0, 1, alpha]])
    expected = np.kron(base, np.ones((2, 2)))
    assert np.array_equal(build_profile_mjd(p).entries, expected)


def test_mjd_q_norm_closed_form(table1):
    prof = build_profile_mjd(table1)
    assert prof.q_norm == pytest.approx((1 + 0.5 ** 2) / 5, abs=1e-12)
    assert prof.q_norm == pytest.approx(0.25, abs=1e-12)


def test_mjd_q_norm_alpha_zero():
    p = params(M=6, K=3, alpha=0.0)
    assert build_profile_mjd(p).q_norm == pytest.approx(1 / 7, abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(M=st.integers(3, 9), K=st.integers(1, 7),
       alpha=st.floats(0.0, 1.0, allow_nan=False))
def test_mjd_q_norm_closed_form_everywhere(M, K, alpha):
    prof = build_profile_mjd(params(M=M, K=K, alpha=alpha))
    assert prof.q_norm == pytest.approx((1 + alpha ** 2) / (M + 1), abs=1e-12)


def test_mjd_alpha_zero_is_block_diagonal():
    p = params(M=4, K=2, alpha=0.0)
    e = build_profile_mjd(p).entries
    n, Kn = p.n, p.K * p.n
    for i in range(p.M):
        row = e[i * n:(i + 1) * n]
        assert np.all(row[:, i * Kn:(i + 1) * Kn] == 1.0)
        off = np.delete(row, np.s_[i * Kn:(i + 1) * Kn], axis=1)
        assert np.all(off == 0.0)


# ---------------------------------------------------------------------------
# alignment profile
# ---------------------------------------------------------------------------

def test_ia_profile_shapes():
    assert build_profile_ia(params(M=3, K=1)).entries.shape == (5, 5)
    assert build_profile_ia(params(M=4, K=5)).entries.shape == (23, 95)


def test_ia_last_block_row_sums(table1):
    e = build_profile_ia(table1).entries
    last = e[-(table1.n - 1):]
    assert np.allclose(last.sum(axis=1), table1.K * table1.n)
    nonzero_cols = np.nonzero(last.any(axis=0))[0]
    assert len(nonzero_cols) == table1.K * table1.n


def test_ia_first_block_structure(table1):
    e = build_profile_ia(table1).entries
    K, n = table1.K, table1.n
    assert np.all(e[:n, :K] == 1.0)
    assert np.all(e[:n, K:K + K * n] == table1.alpha)
    assert np.all(e[:n, K + K * n:] == 0.0)


# ---------------------------------------------------------------------------
# resource-division profiles
# ---------------------------------------------------------------------------

def test_rdma_active_shape_and_doubled_block():
    p = params()
    prof = build_profile_rdma(p, RdmaPart.ACTIVE)
    assert prof.entries.shape == (24, 120)
    assert np.all(prof.entries[-6:, -30:] == 2.0)
    assert np.all(prof.entries[-6:, :-30] == 0.0)


def test_rdma_inactive_shape():
    prof = build_profile_rdma(params(), RdmaPart.INACTIVE)
    assert prof.entries.shape == (18, 90)
    assert np.all(prof.entries[-6:, -30:] == 1.0)


def test_rdma_active_alpha_zero_blocks_only():
    p = params(alpha=0.0)
    e = build_profile_rdma(p, RdmaPart.ACTIVE).entries
    n, Kn = p.n, p.K * p.n
    for i in range(p.M):
        block = e[i * n:(i + 1) * n, i * Kn:(i + 1) * Kn]
        assert np.all(block == (2.0 if i == p.M - 1 else 1.0))
    total = np.count_nonzero(e)
    assert total == p.M * n * Kn


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------

def test_sample_zero_entries_stay_zero(table1):
    prof = build_profile_ia(table1)
    h = sample_channel(prof, trial_rng(5, 0), table1).matrix
    assert np.all(h[prof.entries == 0] == 0)


def test_sample_empirical_variance():
    p = params(M=3, K=1)
    prof = build_profile_mjd(p)
    rng = trial_rng(123, 0)
    draws = np.array([sample_channel(prof, rng, p).matrix[0, 0] for _ in range(10_000)])
    var = np.mean(np.abs(draws) ** 2)
    assert abs(var - 1.0) < 0.05


def test_sample_deterministic(table1):
    prof = build_profile_mjd(table1)
    a = sample_channel(prof, trial_rng(99, 7), table1).matrix
    b = sample_channel(prof, trial_rng(99, 7), table1).matrix
    assert np.array_equal(a, b)


# ---------------------------------------------------------------------------
# alignment precoding chain
# ---------------------------------------------------------------------------

def test_zero_forcing_filter_annihilates_reference():
    for n in (2, 4, 6, 9):
        q = zero_forcing_filter(n)
        assert q.shape == (n - 1, n)
        assert np.max(np.abs(q @ reference_vector(n))) < 1e-10
        assert np.max(np.abs(q @ q.conj().T - np.eye(n - 1))) < 1e-10


def test_precoding_power_normalization(table1):
    rng = trial_rng(3, 1)
    blocks = np.stack([complex_gaussian(6, 6, rng) for _ in range(5)])
    pre = build_ia_precoding(blocks, total_power=table1.gamma_tilde)
    powers = np.sum(np.abs(pre.precoding_vectors) ** 2, axis=1)
    assert np.allclose(powers, table1.gamma_tilde, rtol=1e-9)


def test_aligned_interference_is_rank_one(table1):
    n, K = table1.n, table1.K
    rng = trial_rng(4, 2)
    blocks = np.stack([complex_gaussian(n, n, rng) for _ in range(K)])
    pre = build_ia_precoding(blocks, total_power=table1.gamma_tilde)
    received = np.stack([blocks[j] @ pre.precoding_vectors[j] for j in range(K)], axis=1)
    sv = np.linalg.svd(received, compute_uv=False)
    assert sv[1] / sv[0] < 1e-12
    # what survives the filter is numerically zero
    assert np.linalg.norm(pre.zf_filter @ received) < 1e-10 * np.linalg.norm(received)


def test_precoding_rejects_singular_block(table1):
    rng = trial_rng(6, 3)
    blocks = np.stack([complex_gaussian(6, 6, rng) for _ in range(5)])
    blocks[2, :, 0] = blocks[2, :, 1]  # exactly dependent columns
    with pytest.raises(IllConditionedChannel):
        build_ia_precoding(blocks, total_power=table1.gamma_tilde)
