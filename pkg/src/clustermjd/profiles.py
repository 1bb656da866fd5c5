"""Deterministic variance profiles and random channel realizations.

Every scheme's aggregate channel matrix is H = P (.) G where P is a
deterministic non-negative profile of per-entry standard deviations and G has
i.i.d. CN(0, 1) entries. The four schemes differ only in the shape and fill
of P and, for interference alignment, in an explicit precoding/filtering
chain applied on top of the sampled blocks.

Column layout conventions (user group g occupies K*n adjacent columns):
  - joint decoding over the whole cluster sees M+1 groups (the extra group
    models the neighbouring cluster's edge users, decoded jointly);
  - the alignment profile keeps K effective columns for the first group
    (rank-one precoded users) followed by groups 2..M;
  - the resource-division profiles drop the out-of-cluster group entirely.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .params import SystemParams


class RdmaPart(enum.Enum):
    """Orthogonal resource slots of the resource-division scheme."""
    ACTIVE = "active"      # cluster-edge users transmit at doubled power
    INACTIVE = "inactive"  # cluster-edge cell silent


class IllConditionedChannel(RuntimeError):
    """A per-user channel block is numerically singular; redraw the trial."""


#: Condition-number guard for inverting per-user n x n blocks.
CONDITION_LIMIT = 1e8

#: Entry written into the doubled-power block of the active RDMA profile.
RDMA_EDGE_ENTRY = 2.0


@dataclass(frozen=True)
class VarianceProfile:
    """Matrix of per-entry standard deviations shaping a Gaussian channel."""

    entries: np.ndarray
    scheme: str

    def __post_init__(self) -> None:
        if self.entries.ndim != 2:
            raise ValueError("profile must be a matrix")
        if np.any(self.entries < 0):
            raise ValueError("profile entries must be non-negative")

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]

    @property
    def q_norm(self) -> float:
        """Squared Frobenius norm divided by rows*cols."""
        return float(np.sum(self.entries ** 2)) / (self.rows * self.cols)


@dataclass(frozen=True)
class ChannelRealization:
    """One sampled channel matrix, entry (i,j) ~ CN(0, P[i,j]^2)."""

    matrix: np.ndarray
    scheme: str
    params: SystemParams


def _toeplitz_two_band(rows: int, cols: int, alpha: float) -> np.ndarray:
    """rows x cols banded matrix with 1 on the diagonal, alpha above it."""
    t = np.zeros((rows, cols))
    for i in range(rows):
        t[i, i] = 1.0
        if i + 1 < cols:
            t[i, i + 1] = alpha
    return t


def build_profile_mjd(params: SystemParams) -> VarianceProfile:
    """Global joint-decoding profile, M*n rows by (M+1)*K*n columns.

    BS block i hears its own group at unit deviation and the next group at
    alpha; the (M+1)-th group is the neighbouring cluster's edge group,
    decoded jointly rather than treated as interference.
    """
    M, K, n = params.M, params.K, params.n
    base = _toeplitz_two_band(M, M + 1, params.alpha)
    entries = np.kron(base, np.ones((n, K * n)))
    assert entries.shape == (M * n, (M + 1) * K * n)
    return VarianceProfile(entries=entries, scheme="mjd")


def build_profile_ia(params: SystemParams) -> VarianceProfile:
    """Alignment profile, (M*n - 1) rows by ((M-1)*K*n + K) columns.

    Stacked row blocks:
      - first BS: unit deviations on the K precoded edge-user columns, alpha
        on the second group, zero elsewhere;
      - interior BSs 2..M-1: the usual two-band pattern over groups 2..M;
      - last BS after zero-forcing: n-1 rows of unit deviations over its own
        group only (the filter removes the aligned out-of-cluster users and
        one receive dimension with them).
    """
    M, K, n = params.M, params.K, params.n
    rows, cols = M * n - 1, (M - 1) * K * n + K
    entries = np.zeros((rows, cols))
    entries[:n, :K] = 1.0
    entries[:n, K:K + K * n] = params.alpha
    interior = _toeplitz_two_band(M - 2, M - 1, params.alpha)
    entries[n:n + (M - 2) * n, K:] = np.kron(interior, np.ones((n, K * n)))
    entries[n + (M - 2) * n:, K + (M - 2) * K * n:] = 1.0
    assert entries.shape == (rows, cols)
    return VarianceProfile(entries=entries, scheme="ia")


def build_profile_rdma(params: SystemParams, part: RdmaPart) -> VarianceProfile:
    """Resource-division profiles for the two orthogonal slots.

    ACTIVE: M*n rows by M*K*n columns; the last BS row block is
    [0 ... 0, 2*ones], the factor 2 reflecting the doubled transmit power of
    the edge users in their half of the resources. INACTIVE: the edge cell is
    silent, leaving (M-1)*n rows by (M-1)*K*n columns with a unit last block.
    """
    M, K, n = params.M, params.K, params.n
    if part is RdmaPart.ACTIVE:
        entries = np.zeros((M * n, M * K * n))
        band = _toeplitz_two_band(M - 1, M, params.alpha)
        entries[:(M - 1) * n, :] = np.kron(band, np.ones((n, K * n)))
        entries[(M - 1) * n:, (M - 1) * K * n:] = RDMA_EDGE_ENTRY
        scheme = "rdma_active"
    else:
        entries = np.zeros(((M - 1) * n, (M - 1) * K * n))
        band = _toeplitz_two_band(M - 2, M - 1, params.alpha)
        entries[:(M - 2) * n, :] = np.kron(band, np.ones((n, K * n)))
        entries[(M - 2) * n:, (M - 2) * K * n:] = 1.0
        scheme = "rdma_inactive"
    return VarianceProfile(entries=entries, scheme=scheme)


def build_profile_ci_interference(params: SystemParams) -> VarianceProfile:
    """Interference block seen by the last BS from the out-of-cluster group:
    n rows by K*n columns of deviation alpha."""
    entries = np.full((params.n, params.K * params.n), params.alpha)
    return VarianceProfile(entries=entries, scheme="ci_interference")


def complex_gaussian(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    """Standard circularly-symmetric complex Gaussian matrix, unit variance
    per complex entry (N(0, 1/2) per real part)."""
    re = rng.standard_normal((rows, cols))
    im = rng.standard_normal((rows, cols))
    return (re + 1j * im) / np.sqrt(2.0)


def sample_channel(profile: VarianceProfile, rng: np.random.Generator,
                   params: SystemParams | None = None) -> ChannelRealization:
    """Draw H = P (.) G with G i.i.d. CN(0,1); entry (i,j) ~ CN(0, P[i,j]^2)."""
    g = complex_gaussian(profile.rows, profile.cols, rng)
    return ChannelRealization(matrix=profile.entries * g, scheme=profile.scheme,
                              params=params)


# ---------------------------------------------------------------------------
# Alignment precoding chain
# ---------------------------------------------------------------------------

def reference_vector(n: int) -> np.ndarray:
    """All-ones reference direction with squared norm n (per-entry unit
    magnitude), the normalization the power bookkeeping assumes."""
    return np.ones(n)


def zero_forcing_filter(n: int) -> np.ndarray:
    """(n-1) x n truncated unitary filter annihilating the reference vector.

    Built from a QR factorization of [v | I] so the construction is
    deterministic; rows form an orthonormal basis of the orthogonal
    complement of v.
    """
    v = reference_vector(n)
    basis = np.column_stack([v / np.linalg.norm(v), np.eye(n)[:, : n - 1]])
    q, _ = np.linalg.qr(basis)
    filt = q[:, 1:].conj().T
    assert np.max(np.abs(filt @ v)) < 1e-10
    assert np.max(np.abs(filt @ filt.conj().T - np.eye(n - 1))) < 1e-10
    return filt


@dataclass(frozen=True)
class IAPrecodingSet:
    """Per-user rank-one precoders aligning K edge users onto span(v).

    precoding_vectors[j] is the full precoded direction for user j including
    the power scalar; the symbol stream on top has unit power, so the per-user
    transmit power is total_power for every user.
    """

    reference: np.ndarray
    precoding_vectors: np.ndarray   # K x n, rows w_j * v_j
    power_scalars: np.ndarray       # K positive reals v_j
    zf_filter: np.ndarray           # (n-1) x n truncated unitary
    total_power: float

    def __post_init__(self) -> None:
        n = self.reference.shape[0]
        assert self.zf_filter.shape == (n - 1, n)
        pw = np.sum(np.abs(self.precoding_vectors) ** 2, axis=1)
        assert np.allclose(pw, self.total_power, rtol=1e-9)


def build_ia_precoding(edge_channels: np.ndarray, total_power: float) -> IAPrecodingSet:
    """Invert each user's n x n channel block onto the reference direction.

    edge_channels -- array of K matrices (K, n, n), channel of user j towards
    the non-intended BS. Each precoded input is w_j * v_j with
    w_j = (G_j)^-1 v, and v_j scaled so the per-user transmit power equals
    total_power (trace constraint; a rank-one input cannot satisfy the full
    covariance constraint).

    Raises IllConditionedChannel when a block's condition number exceeds
    CONDITION_LIMIT, signalling that the realization must be redrawn.
    """
    K = edge_channels.shape[0]
    n = edge_channels.shape[1]
    if edge_channels.shape != (K, n, n):
        raise ValueError("edge_channels must be K square blocks")
    v = reference_vector(n)
    vectors = np.zeros((K, n), dtype=complex)
    scalars = np.zeros(K)
    for j in range(K):
        block = edge_channels[j]
        if np.linalg.cond(block) > CONDITION_LIMIT:
            raise IllConditionedChannel(f"edge block {j} condition number exceeds "
                                        f"{CONDITION_LIMIT:.0e}")
        w = np.linalg.solve(block, v)
        vj = np.sqrt(total_power) / np.linalg.norm(w)
        scalars[j] = vj
        vectors[j] = w * vj
    return IAPrecodingSet(reference=v, precoding_vectors=vectors,
                          power_scalars=scalars, zf_filter=zero_forcing_filter(n),
                          total_power=total_power)
