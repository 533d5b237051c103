import math
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from scar_thermo.ensemble import (EnsembleConfig, InstanceRecord, acceptance_filter,
                                  aggregate_stats, excited_band_indices, fd_histogram,
                                  fit_tail, fraction_of_spectrum, pearson_corr,
                                  run_ensemble, run_instance, run_model, sector_for)
from scar_thermo.errors import InsufficientDataError, InvalidInputError
from scar_thermo.model import embed_projected_hamiltonian, project_to_sector, xxz_term
from scar_thermo.spectral import ChaosReport, diagonalize, gibbs_energy
from scar_thermo.thermometry import ThermometryResult


def chaos(r):
    return ChaosReport(mean_r=r, n_gaps=100, window=0.5, n_degenerate=0)


def result(beta_c, beta_s, energy=0.0, d1=0.1):
    return ThermometryResult(eigenstate_index=0, energy=energy, beta_canonical=beta_c,
                             beta_subsystem=beta_s, delta_beta=beta_s - beta_c,
                             min_distance=d1, entropy_half_chain=0.0)


def synthetic_records(beta_c, beta_s, start=0):
    recs = []
    for i, (c, s) in enumerate(zip(beta_c, beta_s)):
        res = result(float(c), float(s))
        recs.append(InstanceRecord(instance_id=start + i, seed=start + i, n_sites=12,
                                   accepted=True, scar=res, thermal=res,
                                   fractions={"scar": (0.5, 0.5), "thermal": (0.5, 0.5)}))
    return recs


# -- acceptance filter ---------------------------------------------------------

@pytest.mark.parametrize("r, rank, expected", [
    (0.60, 0.5, (True, None)),
    (0.45, 0.5, (False, "r-statistic")),
    (0.60, 0.1, (False, "scar-position")),
    (0.60, 0.9, (False, "scar-position")),
    (0.615, 0.25, (True, None)),
    (0.625, 0.5, (False, "r-statistic")),
    # inside the 0.02 band but below the GUE window
    (0.5797, 0.5, (False, "r-statistic")),
])
def test_acceptance_filter_examples(r, rank, expected):
    assert acceptance_filter(chaos(r), rank) == expected


def test_acceptance_filter_small_chain_band():
    config = EnsembleConfig()
    assert acceptance_filter(chaos(0.57), 0.5, config, n_sites=8) == (True, None)
    assert acceptance_filter(chaos(0.57), 0.5, config, n_sites=12)[1] == "r-statistic"


def test_acceptance_filter_missing_chaos_report():
    assert acceptance_filter(None, 0.5) == (False, "r-statistic")


# -- pearson ---------------------------------------------------------------------

def test_pearson_examples():
    x = np.linspace(-1, 3, 50)
    assert pearson_corr(x, 2 * x + 3) == pytest.approx(1.0)
    assert pearson_corr(x, -x) == pytest.approx(-1.0)


def test_pearson_independent_samples():
    rng = np.random.default_rng(0)
    assert abs(pearson_corr(rng.uniform(size=10_000), rng.uniform(size=10_000))) < 0.05


def test_pearson_zero_spread_is_nan():
    assert math.isnan(pearson_corr([1.0, 1.0, 1.0], [0.0, 1.0, 2.0]))


def test_pearson_input_errors():
    with pytest.raises(InvalidInputError):
        pearson_corr([1, 2, 3], [1, 2])
    with pytest.raises(InsufficientDataError):
        pearson_corr([1.0], [2.0])


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3)), min_size=3, max_size=40))
def test_pearson_bounded(pairs):
    x, y = map(np.array, zip(*pairs))
    c = pearson_corr(x, y)
    assert math.isnan(c) or -1 <= c <= 1


# -- tail fit --------------------------------------------------------------------

def _fit(samples):
    return fit_tail(fd_histogram(samples), float(np.std(samples, ddof=1)))


def test_tail_fit_gaussian_samples():
    rng = np.random.default_rng(1)
    fit = _fit(rng.normal(scale=0.3, size=10_000))
    assert fit.model == "gaussian"
    assert fit.exponential_residual > 2 * fit.gaussian_residual
    assert fit.gaussian_variance == pytest.approx(0.09, rel=0.1)


def test_tail_fit_laplace_samples():
    rng = np.random.default_rng(2)
    fit = _fit(rng.laplace(scale=0.2, size=10_000))
    assert fit.model == "exponential"
    # Laplace(b): log p = -|x|/b = -lambda |x|/std with std = sqrt(2) b
    assert fit.exponential_lambda == pytest.approx(math.sqrt(2), rel=0.15)


def test_tail_fit_needs_bins():
    with pytest.raises(InsufficientDataError):
        _fit(np.array([-0.1, 0.0, 0.0, 0.1]))


def test_fd_histogram_counts_everything():
    rng = np.random.default_rng(3)
    x = rng.normal(size=777)
    h = fd_histogram(x)
    assert h.counts.sum() == 777
    assert np.allclose(np.diff(h.edges), h.width)


# -- aggregation -----------------------------------------------------------------

def test_aggregate_equal_betas_is_degenerate():
    c = np.linspace(-1, 1, 20)
    stats = aggregate_stats(synthetic_records(c, c))
    fam = stats.families["scar"]
    assert fam.variance_delta_beta == 0
    assert fam.pearson == pytest.approx(1.0)
    # beta_S = beta_C = const: undefined correlation, reported not raised
    const = aggregate_stats(synthetic_records(np.zeros(5), np.zeros(5))).families["scar"]
    assert const.pearson_degenerate and math.isnan(const.pearson)
    assert const.variance_delta_beta == 0


def test_aggregate_planted_noise():
    rng = np.random.default_rng(4)
    c = rng.uniform(-2, 2, size=2000)
    stats = aggregate_stats(synthetic_records(c, c + rng.normal(scale=0.1, size=2000)))
    fam = stats.families["thermal"]
    assert fam.variance_delta_beta == pytest.approx(0.01, rel=0.1)
    assert abs(fam.mean_delta_beta) < 3 * fam.stderr_delta_beta + 1e-12
    assert fam.pearson == pytest.approx(1.0, abs=0.01)
    assert fam.tail_fit.model == "gaussian"


def test_aggregate_is_order_independent():
    rng = np.random.default_rng(5)
    c = rng.normal(size=60)
    recs = synthetic_records(c, c + rng.normal(scale=0.2, size=60))
    recs.append(InstanceRecord(instance_id=999, seed=999, n_sites=12, accepted=False,
                               reason="r-statistic"))
    a = aggregate_stats(recs)
    shuffled = recs[:]
    random.Random(0).shuffle(shuffled)
    b = aggregate_stats(shuffled)
    assert a.rejections == b.rejections == {"r-statistic": 1}
    for name in ("scar", "thermal"):
        fa, fb = a.families[name], b.families[name]
        assert fa.variance_delta_beta == fb.variance_delta_beta
        assert fa.pearson == fb.pearson
        assert np.array_equal(fa.beta_pairs, fb.beta_pairs)


def test_aggregate_needs_accepted_records():
    rej = [InstanceRecord(instance_id=i, seed=i, n_sites=8, accepted=False,
                          reason="scar-position") for i in range(5)]
    with pytest.raises(InsufficientDataError):
        aggregate_stats(rej)


# -- fraction of spectrum ---------------------------------------------------------

@pytest.fixture(scope="module")
def xxz8():
    n = 8
    sector = sector_for(n)
    h = embed_projected_hamiltonian(xxz_term(0.5, 1.0, 0.9), n)
    return diagonalize(project_to_sector(h, sector), sector)


def test_fraction_of_spectrum_edges(xxz8):
    spec = xxz8
    lo = result(0.0, 0.0, energy=spec.e_min)
    hi = result(0.0, 0.0, energy=spec.e_max)
    assert fraction_of_spectrum(spec, lo)[0] == 0.0
    assert fraction_of_spectrum(spec, hi)[0] == 1.0
    e_s = fraction_of_spectrum(spec, lo)[1]
    assert e_s == pytest.approx((spec.eigenvalues.mean() - spec.e_min) / spec.width)


def test_fraction_of_spectrum_symmetric_spectrum():
    class Spec:
        eigenvalues = np.array([-2.0, -0.5, 0.5, 2.0])
    assert fraction_of_spectrum(Spec, result(0.0, 0.0, energy=0.0)) == (0.5, 0.5)


def test_fraction_of_spectrum_monotone_in_beta(xxz8):
    betas = np.linspace(-5, 5, 41) / xxz8.width
    e_s = [fraction_of_spectrum(xxz8, result(0.0, b))[1] for b in betas]
    assert np.all(np.diff(e_s) < 0)
    assert all(0 <= v <= 1 for v in e_s)


def test_fraction_of_spectrum_errors(xxz8):
    with pytest.raises(InvalidInputError):
        fraction_of_spectrum(xxz8, result(0.0, math.nan))

    class Flat:
        eigenvalues = np.zeros(3)
    with pytest.raises(InvalidInputError):
        fraction_of_spectrum(Flat, result(0.0, 0.0))


def test_excited_band_indices(xxz8):
    idx = excited_band_indices(xxz8, (0.45, 0.55), exclude={xxz8.dimension // 2})
    frac = np.array(idx) / (xxz8.dimension - 1)
    assert np.all((frac >= 0.45) & (frac <= 0.55))
    assert xxz8.dimension // 2 not in idx


# -- instance pipeline ------------------------------------------------------------

def _first_accepted(n, start=0):
    for seed in range(start, start + 100):
        rec = run_instance(seed, n, instance_id=seed)
        if rec.accepted:
            return rec
    raise AssertionError("no accepted instance")


def test_run_instance_accepted_fields():
    rec = _first_accepted(10)
    assert rec.reason is None
    assert rec.scar_overlap > 0.999
    assert 0.25 <= rec.scar_rank_fraction <= 0.75
    assert abs(rec.scar.energy) < 1e-8
    assert rec.scar.entropy_half_chain < 1e-10
    assert rec.thermal.energy > 1e-8
    assert rec.scar.min_distance > rec.thermal.min_distance
    for e_c, e_s in rec.fractions.values():
        assert 0 <= e_c <= 1 and 0 <= e_s <= 1
    e_min, e_max = rec.spectrum_bounds
    assert e_min < 0 < e_max


def test_run_instance_deterministic():
    a = run_instance(123, 9)
    b = run_instance(123, 9)
    assert a == b


def test_rejected_instances_carry_reason():
    recs = run_ensemble(8, 30)
    assert [r.instance_id for r in recs] == list(range(30))
    for r in recs:
        if not r.accepted:
            assert r.reason in ("r-statistic", "scar-position", "degenerate-scar")
            assert r.scar is None


def test_run_ensemble_seed_scheme():
    recs = run_ensemble(8, 3, base_seed=40, first_id=5)
    assert [(r.instance_id, r.seed) for r in recs] == [(5, 45), (6, 46), (7, 47)]


def test_run_model_reports_without_filtering():
    rec, spec = run_model(xxz_term(0.5, 1.0, 0.9), 8,
                          EnsembleConfig(compute_excited_band=True))
    assert rec.seed is None
    assert rec.scar is not None and rec.thermal is not None
    assert len(rec.excited_band) > 0
    assert all(abs(r.energy) > 1e-8 or r.eigenstate_index != rec.scar.eigenstate_index
               for r in rec.excited_band)
    assert spec.dimension == sector_for(8).dimension


def test_gibbs_energy_used_for_e_s(xxz8):
    res = result(0.0, 0.3)
    e_s = fraction_of_spectrum(xxz8, res)[1]
    assert e_s == pytest.approx((gibbs_energy(xxz8.eigenvalues, 0.3) - xxz8.e_min) / xxz8.width)
