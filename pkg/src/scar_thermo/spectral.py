"""
Exact diagonalization of the k=0 block, level-spacing diagnostics, the
canonical temperature of an energy, and location of the scar and of its
neighbouring thermal eigenstate.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import (DegenerateScarError, InsufficientDataError,
                     InvalidInputError, NumericalError, OutOfRangeError)
from .hilbert import SectorBasis, entanglement_entropy, lift_to_full, partial_trace

#: Eigenvalues with ``|E| <= ZERO_ENERGY`` count as the scar's zero.
ZERO_ENERGY = 1e-8

#: Mean gap ratio of large GUE matrices.
R_GUE = 0.5996
#: Mean gap ratio of uncorrelated (Poisson) levels, 2 ln 2 - 1.
R_POISSON = 2 * np.log(2) - 1

SUBSYSTEM_SITES = (0, 1)

_LIFT_CHUNK = 256


@dataclass(frozen=True, eq=False)
class SpectralData:
    """
    Eigen-decomposition of one sector Hamiltonian with per-state two-site
    RDMs on sites (0, 1) and half-chain entropies precomputed.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray = field(repr=False)
    two_site_rdms: np.ndarray = field(repr=False)
    entropies: np.ndarray = field(repr=False)
    sector: SectorBasis = field(repr=False)

    @property
    def dimension(self):
        return len(self.eigenvalues)

    @property
    def n_sites(self):
        return self.sector.n_sites

    @property
    def e_min(self):
        return float(self.eigenvalues[0])

    @property
    def e_max(self):
        return float(self.eigenvalues[-1])

    @property
    def width(self):
        return self.e_max - self.e_min

    def full_state(self, index):
        """Eigenvector ``index`` lifted to the full 2**N basis."""
        return lift_to_full(self.eigenvectors[:, index], self.sector)

    def rank_fraction(self, index):
        return index / (self.dimension - 1)


@dataclass(frozen=True)
class ChaosReport:
    mean_r: float
    n_gaps: int
    window: float
    n_degenerate: int = 0


@dataclass(frozen=True)
class ScarLocation:
    index: int
    overlap: float
    energy: float
    rank_fraction: float


def diagonalize(sector_matrix, sector):
    """
    Full eigendecomposition of a Hermitian sector matrix.

    Eigenvectors are lifted to the full basis in chunks to obtain their
    RDMs on sites (0, 1) and their half-chain entanglement entropies.
    """
    h = np.asarray(sector_matrix)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise InvalidInputError(f"sector matrix must be square, got {h.shape}")
    if h.shape[0] != sector.dimension:
        raise InvalidInputError(
            f"matrix size {h.shape[0]} does not match sector dimension {sector.dimension}")
    if np.max(np.abs(h - h.conj().T), initial=0.0) > 1e-10:
        raise InvalidInputError("sector matrix is not Hermitian")
    evals, evecs = np.linalg.eigh(h)
    n = sector.n_sites
    rdms = np.empty((len(evals), 4, 4), dtype=complex)
    entropies = np.empty(len(evals))
    for start in range(0, len(evals), _LIFT_CHUNK):
        cols = slice(start, start + _LIFT_CHUNK)
        psi = lift_to_full(evecs[:, cols], sector)
        rdms[cols] = partial_trace(psi, SUBSYSTEM_SITES, n)
        entropies[cols] = entanglement_entropy(psi, n)
    return SpectralData(evals, evecs, rdms, entropies, sector)


def r_statistic(eigenvalues, window=0.5, min_levels=50):
    """
    Mean ratio of consecutive level spacings on the central ``window``
    fraction of a sorted spectrum.

    Gaps below ``1e-12`` times the spectral width are dropped and counted
    in ``n_degenerate``.
    """
    e = np.sort(np.asarray(eigenvalues, dtype=float))
    if not 0 < window <= 1:
        raise InvalidInputError("window must lie in (0, 1]")
    cut = int(np.floor(len(e) * (1 - window) / 2))
    central = e[cut:len(e) - cut]
    if len(central) < max(min_levels, 3):
        raise InsufficientDataError(
            f"{len(central)} levels in the central window, need {max(min_levels, 3)}")
    gaps = np.diff(central)
    degenerate = gaps < 1e-12 * (e[-1] - e[0])
    gaps = gaps[~degenerate]
    if len(gaps) < 2:
        raise InsufficientDataError("fewer than two non-degenerate gaps")
    r = np.minimum(gaps[:-1], gaps[1:]) / np.maximum(gaps[:-1], gaps[1:])
    return ChaosReport(float(r.mean()), int(len(gaps)), float(window), int(degenerate.sum()))


def gibbs_weights(eigenvalues, beta):
    """Normalized Boltzmann weights, shifted for overflow safety."""
    e = np.asarray(eigenvalues, dtype=float)
    if not np.isfinite(beta):
        raise InvalidInputError(f"beta must be finite, got {beta}")
    ref = e.min() if beta >= 0 else e.max()
    w = np.exp(-beta * (e - ref))
    return w / w.sum()


def gibbs_energy(eigenvalues, beta):
    """Canonical mean energy ``Tr[sigma(beta) H]`` over the given spectrum."""
    e = np.asarray(eigenvalues, dtype=float)
    return float(gibbs_weights(e, beta) @ e)


def canonical_beta(eigenvalues, target_energy):
    """
    Inverse temperature whose canonical mean energy equals ``target_energy``.

    The mean energy is strictly decreasing in beta, so the root is unique.
    The bracket starts at ``[-1, 1] / W`` (W the spectral width) and doubles
    until it changes sign; Brent's method then converges to a relative
    tolerance of 1e-10 (absolute 1e-12 near zero).

    Raises
    ------
    OutOfRangeError
        If ``target_energy`` is not strictly inside ``(E_min, E_max)``.
    """
    e = np.asarray(eigenvalues, dtype=float)
    e_min, e_max = e.min(), e.max()
    width = e_max - e_min
    if not (e_min < target_energy < e_max) or width <= 0:
        raise OutOfRangeError(
            f"energy {target_energy} outside open interval ({e_min}, {e_max})")

    def f(beta):
        return gibbs_energy(e, beta) - target_energy

    f0 = f(0.0)
    if f0 == 0.0:
        return 0.0
    sign = 1.0 if f0 > 0 else -1.0
    lo, hi = 0.0, sign / width
    while f(hi) * sign > 0:
        lo, hi = hi, 2 * hi
        if abs(hi) * width > 1e6:
            raise NumericalError("failed to bracket canonical beta")
    a, b = sorted((lo, hi))
    beta = brentq(f, a, b, xtol=1e-12, rtol=1e-10, maxiter=500)
    if not np.isfinite(beta):
        raise NumericalError("canonical beta is not finite")
    return float(beta)


def locate_qmbs(spec):
    """
    Find the eigenstate with the largest overlap with ``|0...0>``.

    In the sector basis the all-zero orbit is column 0, so the overlap is
    the first component of each eigenvector.
    """
    col = spec.sector.column_of(0)
    overlaps = np.abs(spec.eigenvectors[col, :])
    index = int(np.argmax(overlaps))
    overlap = float(overlaps[index])
    if overlap < 0.999:
        raise DegenerateScarError(
            f"best overlap with |0...0> is {overlap:.6f}; zero-energy subspace is mixed")
    energy = float(spec.eigenvalues[index])
    if abs(energy) > ZERO_ENERGY:
        raise NumericalError(f"scar eigenvalue {energy:.3e} is not zero")
    return ScarLocation(index, overlap, energy, spec.rank_fraction(index))


def select_thermal_reference(eigenvalues):
    """Index of the smallest eigenvalue strictly above :data:`ZERO_ENERGY`."""
    e = np.asarray(eigenvalues, dtype=float)
    positive = np.flatnonzero(e > ZERO_ENERGY)
    if len(positive) == 0:
        raise InsufficientDataError("no eigenvalue above the zero threshold")
    return int(positive[np.argmin(e[positive])])
