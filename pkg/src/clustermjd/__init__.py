"""Ergodic per-cell uplink throughput of clustered multicell joint-decoding
systems under four intercluster-interference regimes, computed both by an
asymptotic free-probability pipeline and by finite-size Monte Carlo
simulation that cross-validates it."""

from .analytic import (Route, SchemeKind, ThroughputResult, capacity,
                       capacity_ci, capacity_ia, capacity_mjd, capacity_rdma,
                       degrees_of_freedom, ia_gram_terms, mjd_gram_terms,
                       rdma_active_gram_terms, rdma_inactive_gram_terms)
from .freeprob import (DensityGrid, NoPhysicalRoot, PoleEncountered,
                       RTransformSum, RTransformTerm, SpectralDensity,
                       density_from_sum, eval_r_transform, mp_density,
                       mp_shannon_transform, shannon_integral, stieltjes_from_r)
from .montecarlo import (MonteCarloConfig, NonFiniteLogDet, ergodic_logdet,
                         simulate, simulate_ci, simulate_ia, simulate_mjd,
                         simulate_rdma, trial_rng)
from .params import SystemParams
from .profiles import (ChannelRealization, IAPrecodingSet,
                       IllConditionedChannel, RdmaPart, VarianceProfile,
                       build_ia_precoding, build_profile_ci_interference,
                       build_profile_ia, build_profile_mjd, build_profile_rdma,
                       sample_channel, zero_forcing_filter)

__version__ = "0.1.0"
