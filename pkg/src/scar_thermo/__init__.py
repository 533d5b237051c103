"""Canonical and subsystem temperatures of scar and thermal eigenstates in
projector-embedded spin chains."""
__version__ = "0.1.0"

from .errors import (ConfigError, DegenerateScarError, InsufficientDataError,
                     InvalidInputError, NumericalError, OutOfRangeError,
                     ScarThermoError)
from .hilbert import (SectorBasis, SpinBasis, build_k0_sector, entanglement_entropy,
                      lift_to_full, partial_trace, trace_distance, translation_apply)
from .model import (LocalTerm, ProjectedHamiltonian, embed_projected_hamiltonian,
                    project_to_sector, sample_gue_term, xxz_term)
from .spectral import (ChaosReport, SpectralData, canonical_beta, diagonalize,
                       gibbs_energy, locate_qmbs, r_statistic, select_thermal_reference)
from .thermometry import (BetaSearchConfig, ThermometryResult, distance_objective,
                          reduced_canonical_dm, subsystem_temperature,
                          thermometry_for_state)
from .ensemble import (EnsembleConfig, EnsembleStats, InstanceRecord, acceptance_filter,
                       aggregate_stats, band_averages, fit_tail, fraction_of_spectrum,
                       pearson_corr,
                       run_ensemble, run_instance, run_model, scaling_sweep)
