"""
Two-site local terms and the projector-embedded periodic chain

    H = sum_n P_{n,n+1} h_{n,n+1} P_{n,n+1},   P = 1 - |00><00|,

for which ``|0...0>`` is a zero-energy eigenstate for every ``h``.
"""
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import InvalidInputError
from .hilbert import SectorBasis

#: RNG used for every random draw; recorded in run manifests.
RNG_ALGORITHM = "numpy.random.Generator(PCG64)"

#: Variance convention of :func:`sample_gue_term`; recorded in run manifests.
GUE_CONVENTION = "h=(A+A^H)/2, A_ij=(x+iy)/sqrt(2), x,y~N(0,1)"

PROJECTOR = np.diag([0.0, 1.0, 1.0, 1.0]).astype(complex)

SX = np.array([[0, 1], [1, 0]], dtype=complex) / 2
SY = np.array([[0, -1j], [1j, 0]], dtype=complex) / 2
SZ = np.array([[1, 0], [0, -1]], dtype=complex) / 2
ID2 = np.eye(2, dtype=complex)


@dataclass(frozen=True, eq=False)
class LocalTerm:
    """4x4 Hermitian two-site term ``h`` in the basis {00, 01, 10, 11}."""

    matrix: np.ndarray
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (4, 4):
            raise InvalidInputError(f"local term must be 4x4, got {m.shape}")
        if np.max(np.abs(m - m.conj().T)) > 1e-14:
            raise InvalidInputError("local term is not Hermitian")
        m = m.copy()
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    def to_manifest(self):
        """JSON-ready dict: row-major ``[re, im]`` pairs plus provenance."""
        return {
            "entries": [[float(z.real), float(z.imag)] for z in self.matrix.ravel()],
            "provenance": dict(self.provenance),
        }

    @classmethod
    def from_manifest(cls, doc):
        entries = np.array(doc["entries"], dtype=float)
        if entries.shape != (16, 2):
            raise InvalidInputError("local term manifest needs 16 [re, im] pairs")
        matrix = (entries[:, 0] + 1j * entries[:, 1]).reshape(4, 4)
        return cls(matrix, dict(doc.get("provenance", {})))


def _seed64(seed):
    return int(seed) & 0xFFFF_FFFF_FFFF_FFFF


def sample_gue_term(seed):
    """
    Draw ``h = (A + A^H) / 2`` with ``A_ij = (x + i y) / sqrt(2)``.

    Off-diagonal entries of ``h`` then have variance 1/4 per real component
    and diagonal entries variance 1/2.  Deterministic in ``seed``.
    """
    rng = np.random.default_rng(_seed64(seed))
    a = (rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))) / np.sqrt(2)
    return LocalTerm((a + a.conj().T) / 2, {"kind": "gue", "seed": _seed64(seed)})


def xxz_term(b, J, delta):
    """XXZ coupling with a uniform transverse field; spin operators are sigma/2."""
    h = (b * (np.kron(SX, ID2) + np.kron(ID2, SX))
         + J * (np.kron(SX, SX) + np.kron(SY, SY))
         + delta * np.kron(SZ, SZ))
    return LocalTerm(h, {"kind": "xxz", "b": float(b), "J": float(J), "delta": float(delta)})


@dataclass(frozen=True, eq=False)
class ProjectedHamiltonian:
    n_sites: int
    local_term: LocalTerm
    full_matrix: sp.csr_matrix = field(repr=False)

    @property
    def projected_term(self):
        return PROJECTOR @ self.local_term.matrix @ PROJECTOR

    @property
    def dimension(self):
        return 1 << self.n_sites


def bond_operator(term, n_sites, site):
    """Sparse ``term`` acting on sites ``(site, site+1 mod N)`` of the full chain."""
    term = np.asarray(term, dtype=complex)
    dim = 1 << n_sites
    idx = np.arange(dim, dtype=np.int64)
    first, second = site, (site + 1) % n_sites
    local = 2 * ((idx >> first) & 1) + ((idx >> second) & 1)
    cleared = idx & ~((1 << first) | (1 << second))
    rows, cols, vals = [], [], []
    for l_in in range(4):
        sel = local == l_in
        src, base = idx[sel], cleared[sel]
        for l_out in range(4):
            v = term[l_out, l_in]
            if v == 0:
                continue
            rows.append(base | ((l_out >> 1) << first) | ((l_out & 1) << second))
            cols.append(src)
            vals.append(np.full(len(src), v))
    if not rows:
        return sp.csr_matrix((dim, dim), dtype=complex)
    return sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(dim, dim))


def embed_projected_hamiltonian(term, n_sites):
    """Assemble the periodic chain Hamiltonian as a sparse 2**N x 2**N matrix."""
    n_sites = int(n_sites)
    if n_sites < 3:
        raise InvalidInputError("periodic chain needs n_sites >= 3")
    pht = PROJECTOR @ term.matrix @ PROJECTOR
    h = bond_operator(pht, n_sites, 0)
    for n in range(1, n_sites):
        h = h + bond_operator(pht, n_sites, n)
    h = h.tocsr()
    h.sum_duplicates()
    h.eliminate_zeros()
    return ProjectedHamiltonian(n_sites, term, h)


def project_to_sector(h, sector: SectorBasis):
    """Dense ``V^H H V`` restricted to the k=0 sector."""
    if sector.n_sites != h.n_sites:
        raise InvalidInputError(
            f"sector built for N={sector.n_sites}, Hamiltonian has N={h.n_sites}")
    v = sector.isometry
    hs = (v.conj().T @ (h.full_matrix @ v)).toarray()
    return 0.5 * (hs + hs.conj().T)
