"""Storage, retrieval and frequency conversion of single photons in
inhomogeneously broadened solid-state emitter ensembles.

Spectral-kernel pipeline plus a time-domain Maxwell-Bloch reference solver.
Units: frequencies in rad/ns, times in ns, lengths in m, velocities in m/ns.
"""
from .distributions import (EmitterDistribution, SpatialProfile, SpectralProfile,
                            compose_broadening, load_profile, make_profile, profile_from_table,
                            separable, spatial_from_table, tabulated_distribution,
                            uniform_spatial)
from .errors import (ConfigError, InvalidArgument, InvalidDistribution, NumericFailure,
                     ResolutionWarning)
from .grids import (FrequencyGrid, GaussianPulse, SpaceGrid, SpectralField, default_grid,
                    make_symmetric_grid)
from .metrics import (MetricsReport, efficiency, fidelity, make_report,
                      retrieval_probability)
from .params import TransitionParams, derive, optical_depth
from .response import (MediumResponse, ResponseCache, response_C, response_H, response_h,
                       transmitted_field, transmitted_intensity)
from .retrieval import (BroadeningMap, KernelMatrix, apply_kernel, build_kernel_crib_uniform,
                        build_kernel_general, build_kernel_ideal)
from .storage import (SpinWave, StorageResponse, storage_leakage, storage_response,
                      storage_times, store_spin_wave)
from .transducer import (StoredExcitation, gaussian_excitation, load_excitation,
                         mw_output_approx, mw_output_general, mw_output_uniform,
                         normalize_excitation, tabulated_excitation)

__version__ = "0.1.0"
