import math
from fractions import Fraction

import numpy as np
import pytest

from clustermjd import (MonteCarloConfig, RTransformSum, RTransformTerm,
                        SchemeKind, SystemParams, capacity, capacity_ci,
                        capacity_ia, capacity_mjd, capacity_rdma,
                        degrees_of_freedom, ia_gram_terms,
                        mp_shannon_transform, rdma_active_gram_terms,
                        rdma_inactive_gram_terms, simulate)
from clustermjd.analytic import Route
from clustermjd.freeprob import density_from_sum, shannon_integral


def params(M=4, K=5, alpha=0.5, gamma=100.0):
    return SystemParams.make(M=M, K=K, alpha=alpha, gamma=gamma)


# ---------------------------------------------------------------------------
# global joint decoding
# ---------------------------------------------------------------------------

def test_mjd_vanishes_at_zero_snr():
    assert capacity_mjd(params(gamma=1e-12)).value_nats < 1e-9


def test_mjd_increasing_in_alpha():
    low = capacity_mjd(params(alpha=0.0)).value_nats
    high = capacity_mjd(params(alpha=1.0)).value_nats
    assert high > low


def test_mjd_independent_of_cluster_size():
    values = [capacity_mjd(params(M=m)).value_nats for m in range(3, 11)]
    assert max(values) - min(values) < 1e-9


def test_bits_nats_ratio_exact(table1):
    res = capacity_mjd(table1)
    assert res.value_bits == res.value_nats / math.log(2.0)


def test_mjd_scaling_arbitration(table1):
    """The adopted wide-system form must track the Monte Carlo estimate more
    closely than either finite-cluster parameterization of the same closed
    form, and stay inside the 3% gate."""
    cfg = MonteCarloConfig(iterations=300, master_seed=2024,
                           scheme=SchemeKind.GLOBAL_MJD, params=table1)
    mc = simulate(cfg).value_nats
    M, K, n, g = table1.M, table1.K, table1.n, table1.gamma
    arg_clustered = M / (M + 1) * n * g * (1 + table1.alpha ** 2)
    alt_wide_ratio = K * n * mp_shannon_transform(arg_clustered, K * (M + 1) / M)
    alt_clustered = K * n * mp_shannon_transform(arg_clustered, K)
    adopted = capacity_mjd(table1).value_nats
    err = lambda v: abs(v - mc) / mc
    assert err(adopted) < 0.03
    assert err(adopted) < err(alt_wide_ratio)
    assert err(adopted) < err(alt_clustered)


# ---------------------------------------------------------------------------
# alignment
# ---------------------------------------------------------------------------

def test_ia_row_fractions_partition_rows(table1):
    """The three blocks partition the Mn-1 receive rows: the rank fractions
    k_i / beta_i sum to (Mn-1)/columns exactly."""
    rsum = ia_gram_terms(table1)
    total = sum((t.k / t.beta for t in rsum.terms), Fraction(0))
    M, K, n = table1.M, table1.K, table1.n
    assert total == Fraction(M * n - 1, (M - 1) * K * n + K)


def test_ia_below_global_bound():
    for alpha in (0.1, 0.5, 1.0):
        p = params(alpha=alpha)
        assert capacity_ia(p).value_nats <= capacity_mjd(p).value_nats


def test_ia_against_monte_carlo(table1):
    analytic = capacity_ia(table1).value_nats
    cfg = MonteCarloConfig(iterations=300, master_seed=77,
                           scheme=SchemeKind.IA, params=table1)
    mc = simulate(cfg).value_nats
    assert abs(analytic - mc) / mc < 0.04


# ---------------------------------------------------------------------------
# resource division
# ---------------------------------------------------------------------------

def test_rdma_normalization_arbitration(table1):
    """Block norms recomputed from the profiles must beat the alternative
    scaling (block norms inflated by the slot's cell count, unit-deviation
    bookkeeping for the doubled block) against the Monte Carlo estimate."""
    cfg = MonteCarloConfig(iterations=300, master_seed=55,
                           scheme=SchemeKind.RDMA, params=table1)
    mc = simulate(cfg).value_nats
    adopted = capacity_rdma(table1).value_nats

    M, K, n = table1.M, table1.K, table1.n
    a2 = Fraction(table1.alpha) ** 2
    alt_active = RTransformSum((
        RTransformTerm.plain(q=(M - 1) * (1 + a2), beta=Fraction(M * K, M - 1)),
        RTransformTerm.zero_padded(k=Fraction(1, M), beta=K, q=2),
    ))
    alt_inactive = RTransformSum((
        RTransformTerm.plain(q=(M - 2) * (1 + a2), beta=Fraction((M - 1) * K, M - 2)),
        RTransformTerm.zero_padded(k=Fraction(1, M - 1), beta=K, q=1),
    ))
    gt = table1.gamma_tilde
    alt_c1 = K * n * shannon_integral(density_from_sum(alt_active), gt)
    alt_c2 = K * n * (M - 1) / M * shannon_integral(density_from_sum(alt_inactive), gt)
    alternative = (alt_c1 + alt_c2) / 2

    err = lambda v: abs(v - mc) / mc
    assert err(adopted) < 0.03
    assert err(adopted) < err(alternative)


def test_rdma_against_monte_carlo(table1):
    analytic = capacity_rdma(table1).value_nats
    cfg = MonteCarloConfig(iterations=300, master_seed=56,
                           scheme=SchemeKind.RDMA, params=table1)
    mc = simulate(cfg).value_nats
    assert abs(analytic - mc) / mc < 0.03


def test_rdma_term_norms_match_profiles(table1):
    """q of every analytic block equals the Frobenius recomputation from the
    built profile, normalized by n times the block's nonzero columns."""
    from clustermjd import RdmaPart, build_profile_rdma
    M, K, n = table1.M, table1.K, table1.n
    active = build_profile_rdma(table1, RdmaPart.ACTIVE).entries
    banded, edge = active[:(M - 1) * n], active[(M - 1) * n:]
    terms = rdma_active_gram_terms(table1).terms
    assert np.sum(banded ** 2) / (n * M * K * n) == pytest.approx(float(terms[0].q))
    assert np.sum(edge ** 2) / (n * K * n) == pytest.approx(float(terms[1].q))
    inactive = build_profile_rdma(table1, RdmaPart.INACTIVE).entries
    banded2, edge2 = inactive[:(M - 2) * n], inactive[(M - 2) * n:]
    terms2 = rdma_inactive_gram_terms(table1).terms
    assert np.sum(banded2 ** 2) / (n * (M - 1) * K * n) == pytest.approx(float(terms2[0].q))
    assert np.sum(edge2 ** 2) / (n * K * n) == pytest.approx(float(terms2[1].q))


# ---------------------------------------------------------------------------
# cochannel allowance
# ---------------------------------------------------------------------------

def test_ci_equals_mjd_at_zero_alpha():
    p = params(alpha=0.0)
    assert capacity_ci(p).value_nats == capacity_mjd(p).value_nats


def test_ci_against_monte_carlo(table1):
    analytic = capacity_ci(table1).value_nats
    cfg = MonteCarloConfig(iterations=300, master_seed=58,
                           scheme=SchemeKind.CI, params=table1)
    mc = simulate(cfg).value_nats
    assert abs(analytic - mc) / mc < 0.03


def test_capacity_sandwich(table1):
    ci = capacity_ci(table1).value_nats
    ia = capacity_ia(table1).value_nats
    mjd = capacity_mjd(table1).value_nats
    assert ci <= ia <= mjd


def test_capacity_dispatch(table1):
    for scheme in SchemeKind:
        res = capacity(scheme, table1)
        assert res.scheme is scheme
        assert res.route is Route.ANALYTIC
        assert res.value_nats > 0


# ---------------------------------------------------------------------------
# degrees of freedom
# ---------------------------------------------------------------------------

def test_dof_closed_forms(table1):
    assert degrees_of_freedom(SchemeKind.GLOBAL_MJD, table1) == 1
    assert degrees_of_freedom(SchemeKind.IA, table1) == Fraction(23, 24)
    assert degrees_of_freedom(SchemeKind.RDMA, table1) == Fraction(7, 8)
    assert degrees_of_freedom(SchemeKind.CI, table1) == Fraction(3, 4)


def test_dof_ordering_exact():
    for M in range(3, 11):
        for K in range(1, 11):
            p = params(M=M, K=K)
            d_mjd = degrees_of_freedom(SchemeKind.GLOBAL_MJD, p)
            d_ia = degrees_of_freedom(SchemeKind.IA, p)
            d_rd = degrees_of_freedom(SchemeKind.RDMA, p)
            d_ci = degrees_of_freedom(SchemeKind.CI, p)
            assert d_mjd >= d_ia >= d_rd > d_ci


def test_dof_equality_single_user_two_antennas():
    for M in range(3, 11):
        p = params(M=M, K=1)
        assert (degrees_of_freedom(SchemeKind.IA, p)
                == degrees_of_freedom(SchemeKind.RDMA, p)
                == 1 - Fraction(1, 2 * M))


def test_ia_dof_approaches_one():
    p = params(M=4, K=1000)
    assert degrees_of_freedom(SchemeKind.IA, p) > Fraction(999, 1000)
