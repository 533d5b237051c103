"""
Spin-1/2 chain kernels: basis labels, translations, the zero-momentum
sector, partial traces, trace distance and entanglement entropy.

Basis convention
----------------
A basis index is the bit string of local states with site 0 as the least
significant bit, and local state ``|0>`` stored as bit 0.  A state of ``N``
sites is a complex vector of length ``2**N``.  Reduced density matrices on an
ordered list of kept sites use the first kept site as the most significant
tensor factor, so the RDM on ``[n, n+1]`` is written in the local basis
``{|s_n s_{n+1}>} = {00, 01, 10, 11}``.
"""
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import InvalidInputError

#: Largest chain handled by :func:`build_k0_sector`.
MAX_SITES = 20

#: Reduced-state eigenvalues below this are treated as exact zeros.
ENTROPY_CUTOFF = 1e-14


@dataclass(frozen=True)
class SpinBasis:
    """Full computational basis of ``n_sites`` spins-1/2."""

    n_sites: int

    def __post_init__(self):
        if self.n_sites < 1:
            raise InvalidInputError("n_sites must be positive")

    @property
    def dimension(self):
        return 1 << self.n_sites

    def bits(self, index):
        """Local states of ``index`` as a tuple ordered by site (site 0 first)."""
        if not 0 <= index < self.dimension:
            raise InvalidInputError(f"index {index} outside [0, {self.dimension})")
        return tuple((index >> s) & 1 for s in range(self.n_sites))

    def index(self, bits):
        if len(bits) != self.n_sites or any(b not in (0, 1) for b in bits):
            raise InvalidInputError("bits must be a 0/1 sequence of length n_sites")
        return sum(int(b) << s for s, b in enumerate(bits))


def n_sites_of(state):
    """Number of sites implied by the leading dimension of ``state``."""
    dim = np.shape(state)[0]
    n = int(dim).bit_length() - 1
    if dim < 2 or (1 << n) != dim:
        raise InvalidInputError(f"state dimension {dim} is not a power of two >= 2")
    return n


def _check_sites(state, n_sites):
    n = n_sites_of(state)
    if n_sites is not None and n_sites != n:
        raise InvalidInputError(
            f"state has dimension {np.shape(state)[0]}, expected 2**{n_sites}")
    return n


def rotate_indices(indices, n_sites, shift=1):
    """Cyclically move the bit on site ``s`` to site ``s + shift`` (mod N)."""
    indices = np.asarray(indices, dtype=np.int64)
    shift %= n_sites
    if shift == 0:
        return indices.copy()
    mask = (1 << n_sites) - 1
    return ((indices << shift) | (indices >> (n_sites - shift))) & mask


def translation_apply(state, n_sites=None):
    """
    Apply the one-site translation T to a full-basis state.

    T carries the local state of site ``n`` to site ``n + 1 (mod N)``.

    Parameters
    ----------
    state : ndarray, shape (2**N,) or (2**N, m)
        Amplitudes, or a matrix whose columns are states.
    n_sites : int, optional
        Expected chain length; checked against the state dimension.

    Returns
    -------
    ndarray
        ``T @ state`` with the same shape.
    """
    state = np.asarray(state)
    n = _check_sites(state, n_sites)
    idx = np.arange(1 << n, dtype=np.int64)
    out = np.empty_like(state)
    out[rotate_indices(idx, n)] = state
    return out


@dataclass(frozen=True, eq=False)
class SectorBasis:
    """
    Zero-momentum (translation-invariant) sector of an ``N``-site chain.

    Attributes
    ----------
    representatives : ndarray of int64
        Minimal index of each cyclic-shift orbit, ascending.
    periods : ndarray of int64
        Orbit sizes; each divides ``n_sites``.
    isometry : scipy.sparse.csr_matrix, shape (2**N, dim)
        Columns are normalized equal-weight orbit sums.
    orbit_of : ndarray of int64, shape (2**N,)
        Column index of the orbit that contains each full-basis state.
    """

    n_sites: int
    representatives: np.ndarray
    periods: np.ndarray
    isometry: sp.csr_matrix = field(repr=False)
    orbit_of: np.ndarray = field(repr=False)
    momentum_index: int = 0

    @property
    def dimension(self):
        return len(self.representatives)

    @property
    def full_dimension(self):
        return 1 << self.n_sites

    def column_of(self, index):
        """Sector column holding the orbit of full-basis ``index``."""
        return int(self.orbit_of[index])


def build_k0_sector(n_sites):
    """
    Enumerate cyclic-shift orbits and build the k=0 isometry.

    Every orbit is admissible at zero momentum, so the sector dimension is
    the number of binary necklaces of length ``n_sites``.
    """
    n_sites = int(n_sites)
    if n_sites < 2:
        raise InvalidInputError("k=0 sector needs at least 2 sites")
    if n_sites > MAX_SITES:
        raise InvalidInputError(f"n_sites={n_sites} exceeds cap {MAX_SITES}")
    dim = 1 << n_sites
    idx = np.arange(dim, dtype=np.int64)
    rep = idx.copy()
    period = np.full(dim, n_sites, dtype=np.int64)
    r = idx
    for shift in range(1, n_sites):
        r = rotate_indices(r, n_sites)
        np.minimum(rep, r, out=rep)
        # first return to the start fixes the period
        hit = (r == idx) & (period == n_sites)
        period[hit] = shift
    reps, orbit_of = np.unique(rep, return_inverse=True)
    periods = period[reps]
    values = 1.0 / np.sqrt(periods[orbit_of])
    isometry = sp.csr_matrix((values, (idx, orbit_of)), shape=(dim, len(reps)))
    return SectorBasis(n_sites, reps, periods, isometry, orbit_of.astype(np.int64))


def lift_to_full(state, sector):
    """Map sector amplitudes (or columns of them) to the full basis: ``V @ state``."""
    state = np.asarray(state)
    if state.shape[0] != sector.dimension:
        raise InvalidInputError(
            f"sector state has length {state.shape[0]}, sector dimension is {sector.dimension}")
    return np.asarray(sector.isometry @ state)


def _reduced(state, keep_sites, n):
    """Shared reshape-and-contract for one state or a column batch."""
    keep = list(keep_sites)
    if len(set(keep)) != len(keep) or any(not 0 <= s < n for s in keep):
        raise InvalidInputError(f"keep_sites {keep} must be distinct sites in [0, {n})")
    batch = state.shape[1:]
    # axis N-1-s holds site s (site 0 is the last, fastest axis)
    tensor = state.reshape((2,) * n + batch)
    kept_axes = [n - 1 - s for s in keep]
    rest = [a for a in range(n) if a not in kept_axes]
    tail = list(range(n, n + len(batch)))
    mat = tensor.transpose(kept_axes + rest + tail).reshape(
        (1 << len(keep), 1 << (n - len(keep))) + batch)
    return np.einsum("ir...,jr...->...ij", mat, mat.conj())


def partial_trace(state, keep_sites, n_sites=None):
    """
    Reduced density matrix of a pure state on ``keep_sites``.

    Parameters
    ----------
    state : ndarray, shape (2**N,) or (2**N, m)
        Full-basis amplitudes; a 2-D input is treated as ``m`` column states.
    keep_sites : sequence of int
        Distinct sites; the first is the most significant factor of the result.

    Returns
    -------
    ndarray, shape (2**k, 2**k) or (m, 2**k, 2**k)
    """
    state = np.asarray(state, dtype=complex)
    n = _check_sites(state, n_sites)
    return _reduced(state, keep_sites, n)


def check_density_matrix(rho, atol=1e-12, eig_floor=-1e-10):
    """Raise :class:`InvalidInputError` unless ``rho`` is a valid density matrix."""
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise InvalidInputError(f"density matrix must be square, got shape {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > atol:
        raise InvalidInputError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1) > atol:
        raise InvalidInputError(f"density matrix has trace {np.trace(rho).real:.3g}")
    if np.linalg.eigvalsh(rho).min() < eig_floor:
        raise InvalidInputError("density matrix has a negative eigenvalue")


def trace_distance(a, b):
    """
    Unhalved trace distance ``||a - b||_1``, the sum of absolute eigenvalues
    of the Hermitian difference.  Ranges over [0, 2] for density matrices.

    Leading batch dimensions broadcast.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape[-2:] != b.shape[-2:] or a.shape[-1] != a.shape[-2]:
        raise InvalidInputError(f"shape mismatch {a.shape} vs {b.shape}")
    diff = a - b
    diff = 0.5 * (diff + np.swapaxes(diff, -1, -2).conj())
    return np.abs(np.linalg.eigvalsh(diff)).sum(axis=-1)


def entanglement_entropy(state, n_sites=None, n_left=None):
    """
    Von Neumann entropy (nats) of the sites ``0 .. n_left-1``.

    ``n_left`` defaults to ``N // 2``, the contiguous half chain; for odd
    ``N`` the smaller half is kept.  Computed from the Schmidt values of the
    reshaped amplitude matrix.  A 2-D input returns one entropy per column.
    """
    state = np.asarray(state, dtype=complex)
    n = _check_sites(state, n_sites)
    k = n // 2 if n_left is None else int(n_left)
    if not 0 <= k <= n:
        raise InvalidInputError(f"n_left={k} outside [0, {n}]")
    batch = state.shape[1:]
    # C-order reshape: row = high sites, column = low sites
    mat = state.reshape((1 << (n - k), 1 << k) + batch)
    mat = np.moveaxis(mat, (0, 1), (-2, -1))
    sv = np.linalg.svd(mat, compute_uv=False)
    p = sv**2
    p = np.where(p > ENTROPY_CUTOFF, p, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0, -p * np.log(np.where(p > 0, p, 1.0)), 0.0)
    s = terms.sum(axis=-1)
    return float(s) if s.ndim == 0 else s
