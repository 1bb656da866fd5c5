"""System parameters for the clustered uplink model.

A cluster of M adjacent base stations jointly decodes its users. K user
terminals sit between each pair of neighbouring BSs; every BS and UT carries
n = K + 1 antennas (required by the alignment precoder, which sacrifices one
spatial dimension per cluster edge). The intercell links are attenuated by a
factor alpha relative to the direct links, and gamma is the transmit SNR per
UT antenna in linear units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class SystemParams:
    """Scenario tuple (M, K, n, alpha, gamma) shared by every computation.

    M      -- cluster size in cells, M >= 3
    K      -- user terminals per cell, K >= 1
    n      -- antennas per UT and per BS; must equal K + 1
    alpha  -- intercell interference factor, 0 <= alpha <= 1
    gamma  -- transmit SNR per UT antenna (linear, > 0)
    """

    M: int
    K: int
    n: int
    alpha: float
    gamma: float

    def __post_init__(self) -> None:
        if self.M < 3:
            raise ValueError(f"cluster size M must be >= 3, got {self.M}")
        if self.K < 1:
            raise ValueError(f"users per cell K must be >= 1, got {self.K}")
        if self.n != self.K + 1:
            raise ValueError(
                f"antenna count n must equal K+1 (alignment needs one spare "
                f"dimension), got n={self.n}, K={self.K}"
            )
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        if not self.gamma > 0.0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")

    @property
    def gamma_tilde(self) -> float:
        """Total normalized UT transmit power, n * gamma."""
        return self.n * self.gamma

    @property
    def gamma_db(self) -> float:
        return 10.0 * math.log10(self.gamma)

    @classmethod
    def make(cls, M: int = 4, K: int = 5, alpha: float = 0.5,
             gamma: float = 100.0) -> "SystemParams":
        """Build params with n tied to K. Defaults are the standard scenario
        (M=4, K=5, n=6, alpha=0.5, gamma=20 dB)."""
        return cls(M=M, K=K, n=K + 1, alpha=alpha, gamma=gamma)


#: Standard scenario used throughout the benchmark presets.
DEFAULTS = dict(M=4, K=5, alpha=0.5, gamma=100.0)
