"""Asymptotic per-cell throughput of the four intercluster-interference
regimes, assembled from the free-probability engine.

Each scheme's per-cell throughput is

    C = (columns / M) * integral of log(1 + gamma_tilde * x) dF(x)

where F is the limiting eigenvalue law of the scheme's normalized Gram matrix
and `columns` counts the transmit dimensions of its channel matrix. Global
joint decoding and the cochannel baseline reduce to closed Marchenko-Pastur
forms; alignment and resource division go through the full R-transform
pipeline.

The per-block parameters follow one normalization rule throughout: for a row
block with r rows, m nonzero columns out of N total, and profile P,

    k = m / N,   beta = m / r,   q = ||P||_F^2 / (n m),

with n the per-BS antenna count that normalizes the Gram matrix. The q of a
multi-row-block profile folds the factor r/n into the block norm, which keeps
every term consistent with the (1/n)-normalized spectrum that the Shannon
integral assumes. Cross-checks of this normalization against the Monte Carlo
route live in the test suite.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .freeprob import (DensityGrid, RTransformSum, RTransformTerm,
                       density_from_sum, mp_shannon_transform, shannon_integral)
from .params import SystemParams

LN2 = math.log(2.0)


class SchemeKind(enum.Enum):
    """Intercluster-interference handling regimes."""
    GLOBAL_MJD = "mjd"
    IA = "ia"
    RDMA = "rdma"
    CI = "ci"


class Route(enum.Enum):
    ANALYTIC = "analytic"
    MONTE_CARLO = "mc"


@dataclass(frozen=True)
class ThroughputResult:
    """Per-cell ergodic throughput with provenance."""

    scheme: SchemeKind
    params: SystemParams
    value_nats: float
    route: Route
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.value_nats < 0:
            raise ValueError("throughput cannot be negative")

    @property
    def value_bits(self) -> float:
        return self.value_nats / LN2


# ---------------------------------------------------------------------------
# Term assembly (exact rational parameters)
# ---------------------------------------------------------------------------

def _alpha_sq(params: SystemParams) -> Fraction:
    return Fraction(params.alpha) ** 2


def mjd_gram_terms(params: SystemParams) -> RTransformSum:
    """Single plain term for the joint-decoding Gram matrix treated as one
    variance-profiled block: beta = (M+1)K/M, q = M(1+alpha^2)/(M+1)."""
    M, K = params.M, params.K
    a2 = _alpha_sq(params)
    return RTransformSum((RTransformTerm.plain(
        q=Fraction(M, M + 1) * (1 + a2), beta=Fraction((M + 1) * K, M)),))


def ia_gram_terms(params: SystemParams) -> RTransformSum:
    """Three zero-padded terms, one per row block of the alignment profile.

    Written with n eliminated through n = K + 1; the k_i are the blocks'
    nonzero-column fractions (their supports overlap, so they do not sum
    to one), the beta_i their aspect ratios, and the q_i their normalized
    block norms.
    """
    M, K = params.M, params.K
    a2 = _alpha_sq(params)
    den = M * K + M - K
    return RTransformSum((
        RTransformTerm.zero_padded(
            k=Fraction(K + 2, den),
            beta=Fraction(K, K + 1) + K,
            q=(1 + (K + 1) * a2) / (K + 2)),
        RTransformTerm.zero_padded(
            k=Fraction((M - 1) * (K + 1), den),
            beta=Fraction((M - 1) * K, M - 2),
            q=Fraction(M - 2, M - 1) * (1 + a2)),
        RTransformTerm.zero_padded(
            k=Fraction(K + 1, den),
            beta=Fraction(K + 1),
            q=Fraction(1)),
    ))


#: Squared deviation of the doubled-power block in the active RDMA profile.
RDMA_EDGE_Q = Fraction(4)


def rdma_active_gram_terms(params: SystemParams) -> RTransformSum:
    """Active slot: banded block over M-1 BS rows plus the doubled-power edge
    block, M*K*n columns total."""
    M, K = params.M, params.K
    a2 = _alpha_sq(params)
    return RTransformSum((
        RTransformTerm.plain(
            q=Fraction(M - 1, M) * (1 + a2), beta=Fraction(M * K, M - 1)),
        RTransformTerm.zero_padded(
            k=Fraction(1, M), beta=Fraction(K), q=RDMA_EDGE_Q),
    ))


def rdma_inactive_gram_terms(params: SystemParams) -> RTransformSum:
    """Inactive slot: banded block over M-2 BS rows plus the unit last block,
    (M-1)*K*n columns total."""
    M, K = params.M, params.K
    a2 = _alpha_sq(params)
    return RTransformSum((
        RTransformTerm.plain(
            q=Fraction(M - 2, M - 1) * (1 + a2), beta=Fraction((M - 1) * K, M - 2)),
        RTransformTerm.zero_padded(
            k=Fraction(1, M - 1), beta=Fraction(K), q=Fraction(1)),
    ))


# ---------------------------------------------------------------------------
# Per-scheme capacities
# ---------------------------------------------------------------------------

def capacity_mjd(params: SystemParams) -> ThroughputResult:
    """Global joint decoding: K n V(n gamma (1 + alpha^2), K) nats per cell.

    Global decoding spans the whole (unbounded) system, so its per-cell value
    carries no cluster-size dependence; the expression is the wide-system
    limit of the clustered formula and tracks the finite-cluster Monte Carlo
    estimate to well under a percent at the default scenario.
    """
    K, n = params.K, params.n
    arg = n * params.gamma * (1 + params.alpha ** 2)
    value = K * n * mp_shannon_transform(arg, K)
    return ThroughputResult(SchemeKind.GLOBAL_MJD, params, value, Route.ANALYTIC,
                            meta={"shannon_arg": arg, "shannon_beta": K})


def _integral_capacity(rsum: RTransformSum, params: SystemParams,
                       columns: int, grid: DensityGrid | None) -> tuple[float, dict]:
    density = density_from_sum(rsum, grid)
    integral = shannon_integral(density, params.gamma_tilde)
    value = columns / params.M * integral
    meta = {
        "columns": columns,
        "integral_nats": integral,
        "continuous_mass": density.continuous_mass,
        "zero_mass": density.zero_mass,
        "grid_points": len(density.grid),
        "x_max": float(density.grid[-1]),
    }
    return value, meta


def capacity_ia(params: SystemParams, grid: DensityGrid | None = None) -> ThroughputResult:
    """Alignment: ((M-1)Kn + K)/M times the Shannon integral of the
    three-block convolved law at gamma_tilde."""
    M, K, n = params.M, params.K, params.n
    cols = (M - 1) * K * n + K
    value, meta = _integral_capacity(ia_gram_terms(params), params, cols, grid)
    return ThroughputResult(SchemeKind.IA, params, value, Route.ANALYTIC, meta)


def capacity_rdma(params: SystemParams, grid: DensityGrid | None = None) -> ThroughputResult:
    """Resource division: average of the two orthogonal slots.

    Active slot: K n times its Shannon integral (M K n columns over M cells);
    inactive slot: K n (M-1)/M times its integral ((M-1) K n columns).
    """
    M, K, n = params.M, params.K, params.n
    c1, meta1 = _integral_capacity(rdma_active_gram_terms(params), params,
                                   M * K * n, grid)
    c2, meta2 = _integral_capacity(rdma_inactive_gram_terms(params), params,
                                   (M - 1) * K * n, grid)
    value = (c1 + c2) / 2.0
    meta = {"active_nats": c1, "inactive_nats": c2,
            "active": meta1, "inactive": meta2}
    return ThroughputResult(SchemeKind.RDMA, params, value, Route.ANALYTIC, meta)


def capacity_ci(params: SystemParams) -> ThroughputResult:
    """Cochannel allowance: global joint decoding minus the normalized rate
    of the tolerated edge interferers,

        C = C_mjd - (K n / M) V(alpha^2 n gamma, K).

    At alpha = 0 the subtracted term vanishes exactly.
    """
    M, K, n = params.M, params.K, params.n
    base = capacity_mjd(params).value_nats
    loss = K * n / M * mp_shannon_transform(params.alpha ** 2 * n * params.gamma, K)
    return ThroughputResult(SchemeKind.CI, params, base - loss, Route.ANALYTIC,
                            meta={"mjd_nats": base, "interference_nats": loss})


def capacity(scheme: SchemeKind, params: SystemParams,
             grid: DensityGrid | None = None) -> ThroughputResult:
    if scheme is SchemeKind.GLOBAL_MJD:
        return capacity_mjd(params)
    if scheme is SchemeKind.IA:
        return capacity_ia(params, grid)
    if scheme is SchemeKind.RDMA:
        return capacity_rdma(params, grid)
    if scheme is SchemeKind.CI:
        return capacity_ci(params)
    raise ValueError(f"unknown scheme {scheme}")


# ---------------------------------------------------------------------------
# Degrees of freedom
# ---------------------------------------------------------------------------

def degrees_of_freedom(scheme: SchemeKind, params: SystemParams) -> Fraction:
    """High-SNR capacity pre-log per BS antenna, as an exact rational.

    Counting receive dimensions of the equivalent channel matrices gives
    1 for global decoding, 1 - 1/(Mn) for alignment, 1 - 1/(2M) for resource
    division and 1 - 1/M for the cochannel baseline.
    """
    M, n = params.M, params.n
    if scheme is SchemeKind.GLOBAL_MJD:
        return Fraction(1)
    if scheme is SchemeKind.IA:
        return 1 - Fraction(1, M * n)
    if scheme is SchemeKind.RDMA:
        return 1 - Fraction(1, 2 * M)
    if scheme is SchemeKind.CI:
        return 1 - Fraction(1, M)
    raise ValueError(f"unknown scheme {scheme}")
