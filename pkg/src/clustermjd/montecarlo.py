"""Finite-size Monte Carlo throughput estimators.

Each scheme's ergodic per-cell throughput is estimated as the sample mean of
(1/M) log det(I + gamma H H^H) over independently sampled realizations. These
estimators are the independent oracle for every analytic expression in
`analytic`; the cross-validation tolerances live in the test suite and the
benchmark comparison report.

Reproducibility contract: trial t of stream s draws from a generator seeded
with (master_seed, s, t, attempt), so results are bit-identical regardless of
evaluation order or worker count, and degenerate redraws do not perturb other
trials.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .analytic import Route, SchemeKind, ThroughputResult
from .params import SystemParams
from .profiles import (ChannelRealization, IllConditionedChannel, RdmaPart,
                       build_ia_precoding, build_profile_ci_interference,
                       build_profile_mjd, build_profile_rdma, complex_gaussian,
                       sample_channel, zero_forcing_filter)

#: Give up on a trial after this many degenerate redraws.
MAX_REDRAWS_PER_TRIAL = 8


class NonFiniteLogDet(ArithmeticError):
    """Factorization of I + gamma H H^H failed; the draw is degenerate."""


@dataclass(frozen=True)
class MonteCarloConfig:
    """Estimator settings: trial count, master seed, scheme and scenario."""

    iterations: int
    master_seed: int
    scheme: SchemeKind
    params: SystemParams

    def __post_init__(self) -> None:
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")


def trial_rng(master_seed: int, trial: int, stream: int = 0,
              attempt: int = 0) -> np.random.Generator:
    """Deterministic per-trial generator, independent of evaluation order."""
    seq = np.random.SeedSequence((master_seed, stream, trial, attempt))
    return np.random.Generator(np.random.PCG64(seq))


def logdet_capacity(matrix: np.ndarray, gamma: float, normalizer: int) -> float:
    """(1/normalizer) log det(I + gamma H H^H) in nats.

    Computed through a Cholesky factorization of the receive-side Gram matrix
    (Hermitian positive definite by construction); raises NonFiniteLogDet when
    the factorization fails or overflows, signalling a degenerate draw.
    """
    rows = matrix.shape[0]
    gram = np.eye(rows) + gamma * (matrix @ matrix.conj().T)
    try:
        chol = np.linalg.cholesky(gram)
    except np.linalg.LinAlgError as exc:
        raise NonFiniteLogDet(str(exc)) from exc
    val = 2.0 * float(np.sum(np.log(np.real(np.diag(chol)))))
    if not np.isfinite(val):
        raise NonFiniteLogDet("log-determinant is not finite")
    return val / normalizer


def ergodic_logdet(realizations: Iterable[ChannelRealization], gamma: float,
                   normalizer: int) -> tuple[float, float]:
    """Sample mean and standard error of the per-cell log-det capacity over a
    stream of realizations. Raises NonFiniteLogDet on a degenerate draw."""
    values = [logdet_capacity(r.matrix, gamma, normalizer) for r in realizations]
    if not values:
        raise ValueError("no realizations supplied")
    arr = np.asarray(values)
    stderr = float(arr.std(ddof=1) / np.sqrt(len(arr))) if len(arr) > 1 else 0.0
    return float(arr.mean()), stderr


def _mean_stderr(values: list[float]) -> tuple[float, float]:
    arr = np.asarray(values)
    stderr = float(arr.std(ddof=1) / np.sqrt(len(arr))) if len(arr) > 1 else 0.0
    return float(arr.mean()), stderr


def _run_trials(cfg: MonteCarloConfig, one_trial, stream: int = 0):
    """Evaluate one_trial(rng) -> float over all trials with counted redraws."""
    values = []
    redraws = 0
    for t in range(cfg.iterations):
        for attempt in range(MAX_REDRAWS_PER_TRIAL):
            rng = trial_rng(cfg.master_seed, t, stream=stream, attempt=attempt)
            try:
                values.append(one_trial(rng))
                break
            except (IllConditionedChannel, NonFiniteLogDet):
                redraws += 1
        else:
            raise NonFiniteLogDet(
                f"trial {t} stayed degenerate after {MAX_REDRAWS_PER_TRIAL} redraws")
    return values, redraws


def _result(cfg: MonteCarloConfig, value: float, stderr: float,
            redraws: int, extra: dict | None = None) -> ThroughputResult:
    meta = {"iterations": cfg.iterations, "seed": cfg.master_seed,
            "stderr_nats": stderr, "redraws": redraws}
    if extra:
        meta.update(extra)
    return ThroughputResult(cfg.scheme, cfg.params, value, Route.MONTE_CARLO, meta)


# ---------------------------------------------------------------------------
# Scheme simulators
# ---------------------------------------------------------------------------

def simulate_mjd(cfg: MonteCarloConfig) -> ThroughputResult:
    """Global joint decoding over the banded (M+1)-group profile."""
    p = cfg.params
    profile = build_profile_mjd(p)

    def one_trial(rng: np.random.Generator) -> float:
        h = sample_channel(profile, rng, p)
        return logdet_capacity(h.matrix, p.gamma, p.M)

    values, redraws = _run_trials(cfg, one_trial)
    mean, stderr = _mean_stderr(values)
    return _result(cfg, mean, stderr, redraws)


def simulate_ia(cfg: MonteCarloConfig) -> ThroughputResult:
    """Alignment with the explicit precoding and zero-forcing chain.

    Per trial: the first user group precodes through the inverses of its
    actual blocks towards the neighbouring cluster (keeping K effective
    columns), interior groups transmit as in joint decoding, and the last BS
    applies the truncated-unitary filter, dropping one receive dimension
    together with the aligned out-of-cluster users. The residual leakage of
    the filtered interference is measured on every draw.
    """
    p = cfg.params
    M, K, n = p.M, p.K, p.n
    filt = zero_forcing_filter(n)
    rows = M * n - 1
    cols = (M - 1) * K * n + K
    sqrt_gamma = np.sqrt(p.gamma)
    leakage = []

    def one_trial(rng: np.random.Generator) -> float:
        # draw order is fixed: group-1 blocks, interior groups, edge blocks
        own_first = np.stack([complex_gaussian(n, n, rng) for _ in range(K)])
        toward_left = np.stack([complex_gaussian(n, n, rng) for _ in range(K)])
        direct = {j: complex_gaussian(n, K * n, rng) for j in range(2, M + 1)}
        cross = {j: complex_gaussian(n, K * n, rng) for j in range(2, M + 1)}
        edge_blocks = np.stack([complex_gaussian(n, n, rng) for _ in range(K)])

        h = np.zeros((rows, cols), dtype=complex)
        # first group: rank-one precoded columns at its own BS; the precoded
        # direction carries the power, so undo the gamma of the log-det
        precoding = build_ia_precoding(toward_left, total_power=p.gamma_tilde)
        for j in range(K):
            h[:n, j] = (own_first[j] @ precoding.precoding_vectors[j]) / sqrt_gamma
        # interior groups 2..M: direct block at BS g, attenuated block at BS g-1
        for g in range(2, M + 1):
            c0 = K + (g - 2) * K * n
            if g <= M - 1:
                h[(g - 1) * n: g * n, c0: c0 + K * n] = direct[g]
            h[(g - 2) * n: (g - 1) * n, c0: c0 + K * n] = p.alpha * cross[g]
        # last BS: filtered rows over its own group only
        c_last = K + (M - 2) * K * n
        filtered_signal = filt @ direct[M]
        h[(M - 1) * n:, c_last: c_last + K * n] = filtered_signal

        # out-of-cluster group, aligned by construction; measure the leakage
        # that survives the filter relative to the filtered signal power
        edge_precoding = build_ia_precoding(edge_blocks, total_power=p.gamma_tilde)
        aligned = np.stack([edge_blocks[j] @ edge_precoding.precoding_vectors[j]
                            for j in range(K)], axis=1)
        residual = np.linalg.norm(filt @ (p.alpha * aligned)) ** 2
        signal = p.gamma * np.linalg.norm(filtered_signal) ** 2
        leakage.append(residual / signal)

        return logdet_capacity(h, p.gamma, M)

    values, redraws = _run_trials(cfg, one_trial)
    mean, stderr = _mean_stderr(values)
    return _result(cfg, mean, stderr, redraws,
                   {"max_alignment_leakage": max(leakage),
                    "effective_rows": rows})


def simulate_rdma(cfg: MonteCarloConfig) -> ThroughputResult:
    """Resource division: independent estimates of the two orthogonal slots,
    both normalized by the full cluster size, then averaged."""
    p = cfg.params
    active = build_profile_rdma(p, RdmaPart.ACTIVE)
    inactive = build_profile_rdma(p, RdmaPart.INACTIVE)

    def trial_for(profile):
        def one_trial(rng: np.random.Generator) -> float:
            h = sample_channel(profile, rng, p)
            return logdet_capacity(h.matrix, p.gamma, p.M)
        return one_trial

    vals_a, redraws_a = _run_trials(cfg, trial_for(active), stream=0)
    vals_i, redraws_i = _run_trials(cfg, trial_for(inactive), stream=1)
    mean_a, se_a = _mean_stderr(vals_a)
    mean_i, se_i = _mean_stderr(vals_i)
    value = (mean_a + mean_i) / 2.0
    stderr = float(np.hypot(se_a, se_i) / 2.0)
    return _result(cfg, value, stderr, redraws_a + redraws_i,
                   {"active_nats": mean_a, "inactive_nats": mean_i})


def simulate_ci(cfg: MonteCarloConfig) -> ThroughputResult:
    """Cochannel allowance: joint-decoding estimate minus the normalized rate
    of the tolerated interferers, on independent streams."""
    p = cfg.params
    profile = build_profile_mjd(p)
    interference = build_profile_ci_interference(p)

    def mjd_trial(rng: np.random.Generator) -> float:
        return logdet_capacity(sample_channel(profile, rng, p).matrix, p.gamma, p.M)

    def interference_trial(rng: np.random.Generator) -> float:
        h = sample_channel(interference, rng, p)
        return logdet_capacity(h.matrix, p.gamma, p.M)

    vals_m, redraws_m = _run_trials(cfg, mjd_trial, stream=0)
    vals_i, redraws_i = _run_trials(cfg, interference_trial, stream=1)
    mean_m, se_m = _mean_stderr(vals_m)
    mean_i, se_i = _mean_stderr(vals_i)
    value = max(mean_m - mean_i, 0.0)
    stderr = float(np.hypot(se_m, se_i))
    return _result(cfg, value, stderr, redraws_m + redraws_i,
                   {"mjd_nats": mean_m, "interference_nats": mean_i})


_SIMULATORS = {
    SchemeKind.GLOBAL_MJD: simulate_mjd,
    SchemeKind.IA: simulate_ia,
    SchemeKind.RDMA: simulate_rdma,
    SchemeKind.CI: simulate_ci,
}


def simulate(cfg: MonteCarloConfig) -> ThroughputResult:
    """Dispatch to the scheme's simulator."""
    return _SIMULATORS[cfg.scheme](cfg)
