"""
Random-instance ensembles: per-instance pipeline, acceptance filter, and
the aggregate statistics comparing scars with thermal eigenstates.
"""
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import lru_cache
import math

import numpy as np

from .errors import (DegenerateScarError, InsufficientDataError,
                     InvalidInputError)
from .hilbert import build_k0_sector
from .model import embed_projected_hamiltonian, project_to_sector, sample_gue_term, xxz_term
from .spectral import (R_GUE, diagonalize, gibbs_energy, locate_qmbs,
                       r_statistic, select_thermal_reference)
from .thermometry import BetaSearchConfig, thermometry_for_state

FAMILIES = ("scar", "thermal")

#: Default uniform-field XXZ couplings (b, J, delta).
XXZ_DEFAULT = (0.5, 1.0, 0.9)


@dataclass(frozen=True)
class EnsembleConfig:
    """
    Filters and search settings shared by every instance of a run.

    ``r_band`` is the allowed ``|mean_r - 0.5996|`` for ``N >= small_n``;
    those chains must also land inside ``gue_window``.  Smaller chains use
    ``r_band_small_n`` and may fall back to ``r_min_levels_small_n`` levels
    in the r-statistic window.
    """

    search: BetaSearchConfig = BetaSearchConfig()
    r_window: float = 0.5
    r_band: float = 0.02
    r_band_small_n: float = 0.04
    gue_window: tuple = (0.58, 0.62)
    small_n: int = 10
    r_min_levels: int = 50
    r_min_levels_small_n: int = 10
    scar_position_band: tuple = (0.25, 0.75)
    excited_band: tuple = (0.45, 0.55)
    compute_excited_band: bool = False
    keep_objective_samples: bool = False

    def r_band_for(self, n_sites):
        return self.r_band if n_sites >= self.small_n else self.r_band_small_n

    def r_min_levels_for(self, n_sites):
        return self.r_min_levels if n_sites >= self.small_n else self.r_min_levels_small_n


@dataclass(frozen=True)
class InstanceRecord:
    instance_id: int
    seed: int | None
    n_sites: int
    accepted: bool
    reason: str | None = None
    chaos: object = None
    scar_overlap: float = math.nan
    scar_rank_fraction: float = math.nan
    scar: object = None
    thermal: object = None
    excited_band: tuple = ()
    fractions: dict = field(default_factory=dict)
    spectrum_bounds: tuple = (math.nan, math.nan)


@lru_cache(maxsize=None)
def sector_for(n_sites):
    return build_k0_sector(n_sites)


def acceptance_filter(chaos, scar_rank_fraction, config=EnsembleConfig(), n_sites=None):
    """
    Accept an instance when its gap ratio is GUE-like and the scar sits in
    the central part of the spectrum.

    Returns
    -------
    (bool, str or None)
        Acceptance and the rejection reason (``"r-statistic"`` or
        ``"scar-position"``).
    """
    band = config.r_band if n_sites is None else config.r_band_for(n_sites)
    if chaos is None or abs(chaos.mean_r - R_GUE) > band:
        return False, "r-statistic"
    if n_sites is None or n_sites >= config.small_n:
        lo, hi = config.gue_window
        if not lo <= chaos.mean_r <= hi:
            return False, "r-statistic"
    lo, hi = config.scar_position_band
    if not lo <= scar_rank_fraction <= hi:
        return False, "scar-position"
    return True, None


def fraction_of_spectrum(spec, result):
    """
    Canonical and subsystem energies as fractions of the spectral range.

    ``e_C`` rescales the eigenvalue; ``e_S`` rescales the canonical mean
    energy at the subsystem temperature.
    """
    e_min, e_max = float(np.min(spec.eigenvalues)), float(np.max(spec.eigenvalues))
    width = e_max - e_min
    if not width > 0:
        raise InvalidInputError("spectrum has zero width")
    if not math.isfinite(result.beta_subsystem):
        raise InvalidInputError("beta_S must be finite")
    e_c = (result.energy - e_min) / width
    e_s = (gibbs_energy(spec.eigenvalues, result.beta_subsystem) - e_min) / width
    return e_c, e_s


def excited_band_indices(spec, band, exclude=()):
    lo, hi = band
    frac = np.arange(spec.dimension) / (spec.dimension - 1)
    sel = np.flatnonzero((frac >= lo) & (frac <= hi))
    return [int(i) for i in sel if i not in exclude]


def _analyze(term, n_sites, config, instance_id, seed, apply_filter):
    sector = sector_for(n_sites)
    h = embed_projected_hamiltonian(term, n_sites)
    spec = diagonalize(project_to_sector(h, sector), sector)
    bounds = (spec.e_min, spec.e_max)
    base = dict(instance_id=instance_id, seed=seed, n_sites=n_sites, spectrum_bounds=bounds)
    try:
        chaos = r_statistic(spec.eigenvalues, config.r_window,
                            config.r_min_levels_for(n_sites))
    except InsufficientDataError:
        chaos = None
    try:
        loc = locate_qmbs(spec)
    except DegenerateScarError:
        return InstanceRecord(accepted=False, reason="degenerate-scar", chaos=chaos, **base), spec
    accepted, reason = acceptance_filter(chaos, loc.rank_fraction, config, n_sites)
    base.update(chaos=chaos, scar_overlap=loc.overlap, scar_rank_fraction=loc.rank_fraction)
    if apply_filter and not accepted:
        return InstanceRecord(accepted=False, reason=reason, **base), spec

    keep = config.keep_objective_samples
    scar = thermometry_for_state(spec, loc.index, config.search, keep)
    thermal = thermometry_for_state(
        spec, select_thermal_reference(spec.eigenvalues), config.search, keep)
    band = ()
    if config.compute_excited_band:
        band = tuple(thermometry_for_state(spec, i, config.search)
                     for i in excited_band_indices(spec, config.excited_band, {loc.index}))
    fractions = {name: fraction_of_spectrum(spec, res)
                 for name, res in (("scar", scar), ("thermal", thermal))}
    return InstanceRecord(accepted=accepted, reason=reason, scar=scar, thermal=thermal,
                          excited_band=band, fractions=fractions, **base), spec


def run_instance(seed, n_sites, config=EnsembleConfig(), instance_id=0):
    """
    Full pipeline for one GUE-drawn local term.

    Rejected instances come back with ``accepted=False`` and a reason; their
    thermometry fields stay empty.  Deterministic in ``(seed, n_sites, config)``.
    """
    record, _ = _analyze(sample_gue_term(seed), n_sites, config, instance_id, seed, True)
    return record


def run_model(term, n_sites, config=EnsembleConfig(), instance_id=0):
    """Pipeline for a fixed local term; filters are reported but not applied."""
    return _analyze(term, n_sites, config, instance_id, None, False)


def _run_one(args):
    seed, n_sites, config, instance_id = args
    return run_instance(seed, n_sites, config, instance_id)


def run_ensemble(n_sites, n_instances, base_seed=0, config=EnsembleConfig(),
                 workers=1, first_id=0):
    """
    Run instances ``first_id .. first_id + n_instances - 1`` with seeds
    ``base_seed + instance_id``.  Output is sorted by instance id, so it does
    not depend on ``workers``.
    """
    jobs = [(base_seed + i, n_sites, config, i)
            for i in range(first_id, first_id + n_instances)]
    if workers <= 1:
        records = [_run_one(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_run_one, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    return sorted(records, key=lambda r: r.instance_id)


def run_until_accepted(n_sites, min_accepted, base_seed=0, config=EnsembleConfig(),
                       workers=1, batch=100, max_instances=20_000):
    """Extend the ensemble in fixed batches until ``min_accepted`` pass the filter."""
    records = []
    while sum(r.accepted for r in records) < min_accepted:
        if len(records) >= max_instances:
            raise InsufficientDataError(
                f"only {sum(r.accepted for r in records)} accepted in {len(records)} instances")
        records += run_ensemble(n_sites, batch, base_seed, config, workers, first_id=len(records))
    return records


# -- statistics -------------------------------------------------------------

def pearson_corr(x, y):
    """
    Sample Pearson correlation of ``x`` and ``y``.

    Returns NaN when either input has zero spread; callers report that as a
    degenerate case.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise InvalidInputError("x and y must be 1-D with equal length")
    if len(x) < 2:
        raise InsufficientDataError("need at least two samples")
    dx = x - x.mean()
    dy = y - y.mean()
    sx = math.sqrt(float(dx @ dx))
    sy = math.sqrt(float(dy @ dy))
    if sx == 0 or sy == 0:
        return math.nan
    return float(np.clip(dx @ dy / (sx * sy), -1.0, 1.0))


@dataclass(frozen=True)
class Histogram:
    edges: np.ndarray
    counts: np.ndarray

    @property
    def centers(self):
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    @property
    def width(self):
        return float(self.edges[1] - self.edges[0]) if len(self.edges) > 1 else math.nan


def fd_histogram(values):
    """Histogram with Freedman-Diaconis bin width."""
    values = np.asarray(values, dtype=float)
    edges = np.histogram_bin_edges(values, bins="fd")
    counts, edges = np.histogram(values, bins=edges)
    return Histogram(edges, counts)


@dataclass(frozen=True)
class TailFit:
    model: str
    gaussian_variance: float
    gaussian_residual: float
    exponential_lambda: float
    exponential_residual: float
    n_bins: int


def fit_tail(hist, scale, window=2.5, min_bins=8):
    """
    Compare Gaussian and exponential decay of a histogram around zero.

    Fits ``log n = c - x**2 / (2 v)`` and ``log n = c - lam |x| / scale``
    by count-weighted least squares over populated bins with
    ``|x| <= window * scale``; ``scale`` is the sample standard deviation.
    The model with the smaller residual wins.
    """
    x = hist.centers
    n = np.asarray(hist.counts, dtype=float)
    if not scale > 0:
        raise InsufficientDataError("tail fit needs a positive scale")
    sel = (n > 0) & (np.abs(x) <= window * scale)
    if sel.sum() < min_bins:
        raise InsufficientDataError(f"{int(sel.sum())} populated bins near zero, need {min_bins}")
    x, n = x[sel], n[sel]
    y = np.log(n)
    sw = np.sqrt(n)

    def lsq(feature):
        a = np.column_stack([np.ones_like(x), feature]) * sw[:, None]
        coef, *_ = np.linalg.lstsq(a, y * sw, rcond=None)
        resid = y * sw - a @ coef
        return coef, float(resid @ resid) / float(n.sum())

    (_, g), g_res = lsq(-x**2)
    (_, e), e_res = lsq(-np.abs(x) / scale)
    variance = 1 / (2 * g) if g > 0 else math.inf
    model = "gaussian" if g_res < e_res else "exponential"
    return TailFit(model, float(variance), g_res, float(e), e_res, int(sel.sum()))


@dataclass(frozen=True)
class FamilyStats:
    n: int
    mean_delta_beta: float
    variance_delta_beta: float
    stderr_delta_beta: float
    median_abs_delta_beta: float
    mean_min_distance: float
    median_min_distance: float
    pearson: float
    pearson_degenerate: bool
    delta_beta_histogram: Histogram
    distance_histogram: Histogram
    tail_fit: TailFit | None
    fraction_pairs: np.ndarray = field(repr=False)
    beta_pairs: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class EnsembleStats:
    n_sites: int
    n_accepted: int
    n_rejected: int
    rejections: dict
    families: dict


def family_stats(results, fractions=None, tail_window=2.5):
    """Statistics of one family of thermometry results."""
    beta_c = np.array([r.beta_canonical for r in results])
    beta_s = np.array([r.beta_subsystem for r in results])
    db = np.array([r.delta_beta for r in results])
    d1 = np.array([r.min_distance for r in results])
    if len(db) < 2:
        raise InsufficientDataError("need at least two results per family")
    var = float(np.var(db, ddof=1))
    corr = pearson_corr(beta_c, beta_s)
    db_hist = fd_histogram(db)
    try:
        tail = fit_tail(db_hist, math.sqrt(var), tail_window)
    except InsufficientDataError:
        tail = None
    pairs = np.asarray(fractions if fractions is not None else np.empty((0, 2)), dtype=float)
    return FamilyStats(
        n=len(db),
        mean_delta_beta=float(db.mean()),
        variance_delta_beta=var,
        stderr_delta_beta=math.sqrt(var / len(db)),
        median_abs_delta_beta=float(np.median(np.abs(db))),
        mean_min_distance=float(d1.mean()),
        median_min_distance=float(np.median(d1)),
        pearson=corr,
        pearson_degenerate=math.isnan(corr),
        delta_beta_histogram=db_hist,
        distance_histogram=fd_histogram(d1),
        tail_fit=tail,
        fraction_pairs=pairs,
        beta_pairs=np.column_stack([beta_c, beta_s]),
    )


def aggregate_stats(records, tail_window=2.5):
    """
    Reduce instance records to per-family statistics.

    Records are sorted by instance id first, so the result does not depend
    on the order in which instances finished.
    """
    records = sorted(records, key=lambda r: r.instance_id)
    accepted = [r for r in records if r.accepted]
    if len(accepted) < 2:
        raise InsufficientDataError(f"{len(accepted)} accepted instances, need at least 2")
    rejections = {}
    for r in records:
        if not r.accepted:
            rejections[r.reason] = rejections.get(r.reason, 0) + 1
    families = {}
    for name in FAMILIES:
        results = [getattr(r, name) for r in accepted]
        fractions = [r.fractions[name] for r in accepted]
        families[name] = family_stats(results, fractions, tail_window)
    return EnsembleStats(
        n_sites=accepted[0].n_sites,
        n_accepted=len(accepted),
        n_rejected=len(records) - len(accepted),
        rejections=dict(sorted(rejections.items())),
        families=families,
    )


# -- system-size sweep ------------------------------------------------------

def band_averages(records):
    """
    Per-instance means of ``|delta_beta|`` and ``min_d1`` over the computable
    excited-band states.  Instances without such states are skipped.
    """
    db, d1 = [], []
    for rec in records:
        band = [r for r in rec.excited_band if r.computable]
        if band:
            db.append(float(np.mean([abs(r.delta_beta) for r in band])))
            d1.append(float(np.mean([r.min_distance for r in band])))
    if not db:
        raise InsufficientDataError("no excited-band states computed")
    return np.array(db), np.array(d1)


@dataclass(frozen=True)
class SweepPoint:
    """One system size of a sweep; ``family`` is the row label."""

    n_sites: int
    family: str
    n: int
    median_abs_delta_beta: float
    median_min_distance: float
    variance_delta_beta: float = math.nan
    pearson: float = math.nan


def scaling_sweep(n_range, seeds_per_n, config=EnsembleConfig(), base_seed=0,
                  xxz=XXZ_DEFAULT, workers=1, min_accepted=None, ensembles=None):
    """
    Per-size summaries for the random ensemble and the fixed XXZ chain.

    For each ``N`` yields rows for the random-ensemble ``scar`` and
    ``thermal`` families, the random-ensemble ``band`` (central excited
    eigenstates averaged per instance, median over instances), the
    ``xxz-scar`` and the ``xxz-band`` (central excited eigenstates of the
    XXZ chain, scar excluded).  With ``min_accepted`` set, each ensemble
    grows until that many instances pass the filter.  ``ensembles`` maps
    ``N`` to already computed records (with excited bands) to reuse.
    """
    term = xxz_term(*xxz)
    band_config = replace(config, compute_excited_band=True)
    rows = []
    for n_sites in n_range:
        if ensembles is not None and n_sites in ensembles:
            records = ensembles[n_sites]
        elif min_accepted is None:
            records = run_ensemble(n_sites, seeds_per_n, base_seed, band_config, workers)
        else:
            records = run_until_accepted(n_sites, min_accepted, base_seed, band_config,
                                         workers, batch=seeds_per_n)
        stats = aggregate_stats(records)
        for name in FAMILIES:
            fs = stats.families[name]
            rows.append(SweepPoint(n_sites, name, fs.n, fs.median_abs_delta_beta,
                                   fs.median_min_distance, fs.variance_delta_beta,
                                   fs.pearson))
        db, d1 = band_averages([r for r in records if r.accepted])
        rows.append(SweepPoint(n_sites, "band", len(db), float(np.median(db)),
                               float(np.median(d1))))
        rec, _ = run_model(term, n_sites, band_config)
        rows.append(SweepPoint(n_sites, "xxz-scar", 1, abs(rec.scar.delta_beta),
                               rec.scar.min_distance))
        band = [r for r in rec.excited_band if r.computable]
        rows.append(SweepPoint(
            n_sites, "xxz-band", len(band),
            float(np.median([abs(r.delta_beta) for r in band])),
            float(np.median([r.min_distance for r in band]))))
    return rows
