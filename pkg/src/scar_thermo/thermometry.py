"""
Subsystem temperature of an eigenstate.

The reduced canonical state on sites (0, 1) is a Gibbs-weighted sum of the
eigenstates' own two-site RDMs,

    sigma_S(beta) = sum_a w_a(beta) rho_S(a),

so every objective evaluation costs O(dim).  The subsystem temperature is
the beta minimizing the unhalved trace distance ``||rho_S - sigma_S(beta)||_1``.
"""
from dataclasses import dataclass, field
import math

import numpy as np

from .errors import InvalidInputError, NumericalError, OutOfRangeError
from .hilbert import trace_distance
from .spectral import canonical_beta, gibbs_weights

INVPHI = (math.sqrt(5) - 1) / 2

CSV_COLUMNS = ("instance_id", "state_index", "energy", "beta_C", "beta_S",
               "delta_beta", "min_d1", "entropy", "flags")


@dataclass(frozen=True)
class BetaSearchConfig:
    """
    Search window and resolution for the subsystem-temperature minimizer.

    The window is ``[-range_scale / W, range_scale / W]`` with ``W`` the
    spectral width, unless ``beta_lo`` and ``beta_hi`` are both given.
    """

    range_scale: float = 40.0
    grid_points: int = 256
    tolerance: float = 1e-10
    beta_lo: float | None = None
    beta_hi: float | None = None

    def __post_init__(self):
        if self.grid_points < 64:
            raise InvalidInputError("grid_points must be at least 64")
        if not (self.range_scale > 0 and math.isfinite(self.range_scale)):
            raise InvalidInputError("range_scale must be positive and finite")
        if not 0 < self.tolerance < 1:
            raise InvalidInputError("tolerance must lie in (0, 1)")
        if (self.beta_lo is None) != (self.beta_hi is None):
            raise InvalidInputError("set both beta_lo and beta_hi, or neither")
        if self.beta_lo is not None and not (
                math.isfinite(self.beta_lo) and math.isfinite(self.beta_hi)
                and self.beta_lo < self.beta_hi):
            raise InvalidInputError("need finite beta_lo < beta_hi")

    def bounds(self, spec):
        if self.beta_lo is not None:
            return float(self.beta_lo), float(self.beta_hi)
        b = self.range_scale / spec.width
        return -b, b


@dataclass(frozen=True)
class SubsystemTemperature:
    beta: float
    min_distance: float
    boundary_hit: bool
    n_evaluations: int
    grid: np.ndarray | None = field(default=None, repr=False)
    grid_values: np.ndarray | None = field(default=None, repr=False)


@dataclass(frozen=True)
class ThermometryResult:
    eigenstate_index: int
    energy: float
    beta_canonical: float
    beta_subsystem: float
    delta_beta: float
    min_distance: float
    entropy_half_chain: float
    flags: tuple = ()
    objective_samples: np.ndarray | None = field(default=None, repr=False, compare=False)

    @property
    def computable(self):
        return "beta_c-out-of-range" not in self.flags

    def csv_row(self, instance_id):
        return [instance_id, self.eigenstate_index, fmt(self.energy),
                fmt(self.beta_canonical), fmt(self.beta_subsystem),
                fmt(self.delta_beta), fmt(self.min_distance),
                fmt(self.entropy_half_chain), ";".join(self.flags)]


def fmt(x):
    """Round-trip float text with 17 significant digits."""
    return format(float(x), ".17g")


def _check_beta(beta):
    if not np.all(np.isfinite(beta)):
        raise InvalidInputError(f"beta must be finite, got {beta}")


def reduced_canonical_dm(spec, beta):
    """Two-site reduced Gibbs state ``Tr_{rest} e^{-beta H} / Z``."""
    _check_beta(beta)
    w = gibbs_weights(spec.eigenvalues, float(beta))
    return np.einsum("a,aij->ij", w, spec.two_site_rdms)


def reduced_canonical_dms(spec, betas):
    """Vectorized :func:`reduced_canonical_dm` over an array of betas."""
    betas = np.asarray(betas, dtype=float)
    _check_beta(betas)
    e = spec.eigenvalues
    # per-beta reference energy keeps every exponent <= 0
    ref = np.where(betas >= 0, e.min(), e.max())
    logw = -betas[:, None] * (e[None, :] - ref[:, None])
    w = np.exp(logw)
    w /= w.sum(axis=1, keepdims=True)
    return np.einsum("ba,aij->bij", w, spec.two_site_rdms)


def distance_objective(spec, rho_s, beta):
    """``||rho_s - sigma_S(beta)||_1``."""
    rho_s = np.asarray(rho_s)
    if rho_s.shape != (4, 4):
        raise InvalidInputError(f"rho_s must be 4x4, got {rho_s.shape}")
    return float(trace_distance(rho_s, reduced_canonical_dm(spec, beta)))


def golden_section(f, a, b, tol, max_iter=500):
    """
    Golden-section search for a minimum of ``f`` on ``[a, b]``.

    Stops once the bracket is shorter than ``tol``.  Returns the best point
    evaluated, its value, and the number of evaluations.
    """
    c = b - INVPHI * (b - a)
    d = a + INVPHI * (b - a)
    fc, fd = f(c), f(d)
    best = min((fc, c), (fd, d))
    n_eval = 2
    while b - a > tol and n_eval < max_iter:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - INVPHI * (b - a)
            fc = f(c)
            best = min(best, (fc, c))
        else:
            a, c, fc = c, d, fd
            d = a + INVPHI * (b - a)
            fd = f(d)
            best = min(best, (fd, d))
        n_eval += 1
    return best[1], best[0], n_eval


def subsystem_temperature(spec, rho_s, search=BetaSearchConfig(), keep_grid=False):
    """
    Minimize the trace distance between ``rho_s`` and ``sigma_S(beta)``.

    A uniform scan of ``search.grid_points`` betas locates the basin; a
    golden-section search inside the two grid cells around the scan minimum
    refines it until the bracket is below ``tolerance * (beta_hi - beta_lo)``.
    The returned distance never exceeds any scanned value.
    """
    rho_s = np.asarray(rho_s)
    if rho_s.shape != (4, 4):
        raise InvalidInputError(f"rho_s must be 4x4, got {rho_s.shape}")
    lo, hi = search.bounds(spec)
    grid = np.linspace(lo, hi, search.grid_points)
    values = trace_distance(rho_s[None], reduced_canonical_dms(spec, grid))
    if not np.all(np.isfinite(values)):
        raise NumericalError("objective is not finite on the scan grid")
    i = int(np.argmin(values))
    a = grid[max(i - 1, 0)]
    b = grid[min(i + 1, len(grid) - 1)]

    def objective(beta):
        v = distance_objective(spec, rho_s, beta)
        if not math.isfinite(v):
            raise NumericalError(f"objective not finite at beta={beta}")
        return v

    beta, value, n_eval = golden_section(objective, a, b, search.tolerance * (hi - lo))
    if values[i] < value:
        beta, value = float(grid[i]), float(values[i])
    edge = 2 * search.tolerance * (hi - lo)
    boundary_hit = bool(beta - lo <= edge or hi - beta <= edge)
    return SubsystemTemperature(
        float(beta), float(value), boundary_hit, n_eval + len(grid),
        grid if keep_grid else None, values if keep_grid else None)


def thermometry_for_state(spec, index, search=BetaSearchConfig(), keep_samples=False):
    """
    Canonical and subsystem temperatures of eigenstate ``index``.

    Edge states whose energy has no finite canonical beta get NaN for
    ``beta_canonical`` and ``delta_beta`` and the flag
    ``beta_c-out-of-range``.
    """
    if not 0 <= index < spec.dimension:
        raise InvalidInputError(f"eigenstate index {index} out of range")
    energy = float(spec.eigenvalues[index])
    flags = []
    try:
        beta_c = canonical_beta(spec.eigenvalues, energy)
    except OutOfRangeError:
        beta_c = math.nan
        flags.append("beta_c-out-of-range")
    st = subsystem_temperature(spec, spec.two_site_rdms[index], search, keep_grid=keep_samples)
    if st.boundary_hit:
        flags.append("boundary-hit")
    samples = np.column_stack([st.grid, st.grid_values]) if keep_samples else None
    return ThermometryResult(
        eigenstate_index=int(index),
        energy=energy,
        beta_canonical=beta_c,
        beta_subsystem=st.beta,
        delta_beta=st.beta - beta_c,
        min_distance=st.min_distance,
        entropy_half_chain=float(spec.entropies[index]),
        flags=tuple(flags),
        objective_samples=samples,
    )
