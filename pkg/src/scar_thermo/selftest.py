"""Seconds-scale invariant checks behind ``scar-thermo selftest``."""
import math

import numpy as np
from scipy.linalg import expm

from .ensemble import sector_for
from .hilbert import partial_trace
from .model import embed_projected_hamiltonian, project_to_sector, sample_gue_term
from .spectral import canonical_beta, diagonalize, gibbs_energy
from .thermometry import reduced_canonical_dm, subsystem_temperature


def _scar_exact():
    for n in (6, 8):
        h = embed_projected_hamiltonian(sample_gue_term(n), n).full_matrix
        scar = np.zeros(1 << n)
        scar[0] = 1
        if np.linalg.norm(h @ scar) >= 1e-12:
            return False, f"N={n}: |H|0..0>| too large"
    return True, ""


def _two_level():
    beta = canonical_beta([0.0, 1.0], 0.25)
    return abs(beta - math.log(3)) < 1e-9, f"beta={beta!r}"


def _gibbs_oracle():
    n = 6
    sector = sector_for(n)
    ham = embed_projected_hamiltonian(sample_gue_term(7), n)
    spec = diagonalize(project_to_sector(ham, sector), sector)
    v = sector.isometry.toarray()
    proj = v @ v.conj().T
    hd = ham.full_matrix.toarray()
    worst = 0.0
    for beta in (-1.0, 0.3, 2.0):
        g = proj @ expm(-beta * hd) @ proj
        g /= np.trace(g)
        # rho = sum_k lambda_k |k><k|; trace each eigen-projector separately
        lam, vec = np.linalg.eigh(0.5 * (g + g.conj().T))
        direct = sum(l * partial_trace(vec[:, k], (0, 1)) for k, l in enumerate(lam))
        worst = max(worst, np.abs(direct - reduced_canonical_dm(spec, beta)).max())
    return worst < 1e-9, f"max deviation {worst:.2e}"


def _planted():
    n = 8
    sector = sector_for(n)
    spec = diagonalize(project_to_sector(
        embed_projected_hamiltonian(sample_gue_term(11), n), sector), sector)
    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(10):
        e = rng.uniform(0.2, 0.8) * spec.width + spec.e_min
        beta = canonical_beta(spec.eigenvalues, e)
        st = subsystem_temperature(spec, reduced_canonical_dm(spec, beta))
        worst = max(worst, abs(st.beta - beta))
        if st.min_distance >= 1e-8:
            return False, f"min d1 {st.min_distance:.2e}"
    return worst < 1e-6, f"max |beta_S - beta*| {worst:.2e}"


def _round_trip():
    e = np.sort(np.random.default_rng(1).normal(size=200))
    worst = 0.0
    for beta in np.linspace(-3, 3, 13):
        worst = max(worst, abs(canonical_beta(e, gibbs_energy(e, beta)) - beta))
    return worst < 1e-8, f"max error {worst:.2e}"


CHECKS = (
    ("scar annihilated by H", _scar_exact),
    ("two-level canonical beta", _two_level),
    ("canonical beta round trip", _round_trip),
    ("weighted RDMs match dense Gibbs state", _gibbs_oracle),
    ("planted subsystem temperature", _planted),
)


def run_selftest(out=print):
    ok = True
    for name, check in CHECKS:
        passed, detail = check()
        ok = ok and bool(passed)
        out(f"{'PASS' if passed else 'FAIL'} {name}" + ("" if passed else f": {detail}"))
    return ok
