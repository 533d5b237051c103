# # One random chain, one scar
#
# A two-site Hermitian term h is drawn at random and sandwiched between
# projectors P = 1 - |00><00| on every bond of a periodic chain.  Whatever h
# is, the all-zero product state is annihilated: it sits at E = 0 with zero
# entanglement, in the middle of an otherwise chaotic spectrum.
#
# Run with `python3 demos/01_single_instance.py`.

import numpy as np

from scar_thermo import (build_k0_sector, canonical_beta, diagonalize,
                         embed_projected_hamiltonian, locate_qmbs, project_to_sector,
                         r_statistic, sample_gue_term)

N = 12
SEED = 7

# ## Build the Hamiltonian

term = sample_gue_term(SEED)
ham = embed_projected_hamiltonian(term, N)
print(f"full space: {ham.dimension} states, {ham.full_matrix.nnz} nonzeros")

zero = np.zeros(ham.dimension)
zero[0] = 1.0
print("||H |0...0>|| =", np.linalg.norm(ham.full_matrix @ zero))

# ## Restrict to zero momentum
#
# H commutes with translations, and the scar has k = 0, so the k = 0 block
# (orbit sums of bit strings) is all we need.

sector = build_k0_sector(N)
spec = diagonalize(project_to_sector(ham, sector), sector)
print(f"k=0 block: {spec.dimension} states, E in [{spec.e_min:.3f}, {spec.e_max:.3f}]")

# ## Is the block chaotic?

chaos = r_statistic(spec.eigenvalues)
print(f"mean gap ratio r = {chaos.mean_r:.4f}  (GUE 0.5996, Poisson 0.3863)")

# ## Where is the scar?

scar = locate_qmbs(spec)
print(f"scar: index {scar.index}, E = {scar.energy:.2e}, "
      f"rank fraction {scar.rank_fraction:.3f}, overlap {scar.overlap:.6f}")

# ## Entanglement: one outlier among volume-law states

order = np.argsort(spec.entropies)
print("lowest half-chain entropies (E, S):")
for i in order[:5]:
    print(f"  {spec.eigenvalues[i]:+.4f}  {spec.entropies[i]:.4f}")
central = slice(spec.dimension // 4, 3 * spec.dimension // 4)
print(f"median entropy in the central half: {np.median(spec.entropies[central]):.3f} nats "
      f"(Page value {N / 2 * np.log(2) - 0.5:.3f})")

# ## Canonical temperature versus energy
#
# beta_C(E) solves Tr[H exp(-beta H)] / Z = E over the k = 0 spectrum.  It is
# positive below the infinite-temperature energy and negative above it.

for frac in (0.1, 0.3, 0.5, 0.7, 0.9):
    e = spec.e_min + frac * spec.width
    print(f"  E = {e:+8.3f}   beta_C = {canonical_beta(spec.eigenvalues, e):+.4f}")
print(f"scar: beta_C(0) = {canonical_beta(spec.eigenvalues, 0.0):+.4f}")
