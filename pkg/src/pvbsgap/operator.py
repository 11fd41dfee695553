"""Sparse PVBS Hamiltonians in fixed-particle-number sectors.

The two-site interaction on an edge in direction j is the rank-2 projection
onto span{(|01> - lambda_j |10>)/sqrt(1+lambda_j^2), |11>}.  Total particle
number is conserved, so H decomposes over occupation sectors; each sector is
assembled as a sparse symmetric matrix over bit-pattern basis states.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb

import numpy as np
import scipy.sparse as sp

from .errors import DimensionMismatch, SectorTooLarge
from .geometry import Region

SECTOR_CAP = 5_000_000


def interaction_matrix(lam_j):
    """4x4 edge projection in the basis {00, 01, 10, 11} (left site first)."""
    if lam_j <= 0:
        raise ValueError("lambda must be positive")
    h = np.zeros((4, 4))
    denom = 1.0 + lam_j * lam_j
    h[1, 1] = 1.0 / denom
    h[1, 2] = h[2, 1] = -lam_j / denom
    h[2, 2] = lam_j * lam_j / denom
    h[3, 3] = 1.0
    return h


def lattice_edges(points, directions=None):
    """Nearest-neighbor edges (i, k, j): site indices and axis j (0-based)."""
    pts = points.points if isinstance(points, Region) else tuple(points)
    index = {p: i for i, p in enumerate(pts)}
    d = len(pts[0])
    dirs = range(d) if directions is None else directions
    edges = []
    for i, x in enumerate(pts):
        for j in dirs:
            y = x[:j] + (x[j] + 1,) + x[j + 1:]
            k = index.get(y)
            if k is not None:
                edges.append((i, k, j))
    return edges


def occupation_states(n_sites, n_particles, cap=SECTOR_CAP):
    """All n-particle bit patterns over n_sites, ascending (site i = bit i).

    Regions beyond 63 sites fall back to arbitrary-precision integers.
    """
    size = comb(n_sites, n_particles)
    if size > cap:
        raise SectorTooLarge(
            f"sector has {size} states, above the cap of {cap}")
    dtype = np.uint64 if n_sites <= 63 else object
    if n_particles == 0:
        return np.zeros(1, dtype=dtype)
    masks = np.fromiter(
        (sum(1 << i for i in c) for c in combinations(range(n_sites), n_particles)),
        dtype=dtype, count=size)
    masks.sort()  # canonical order: ascending bit patterns
    return masks


@dataclass(frozen=True)
class OccupationBasis:
    region: Region
    particle_count: int
    states: np.ndarray

    @property
    def size(self):
        return len(self.states)


@dataclass(frozen=True)
class SectorOperator:
    basis: OccupationBasis
    matrix: sp.csr_matrix
    assembled_edge_count: int

    @property
    def dim(self):
        return self.matrix.shape[0]


def assemble_on_states(states, edges, lam):
    """Sparse H = sum of edge projections, restricted to the given bit patterns.

    ``states`` must be sorted ascending; hopping targets are then located by
    binary search, which is their rank in the canonical order.
    """
    m = len(states)
    diag = np.zeros(m)
    rows, cols, vals = [], [], []
    wide = states.dtype == object
    for a, b, j in edges:
        lj = lam[j]
        denom = 1.0 + lj * lj
        bit_a = (1 << a) if wide else np.uint64(1 << a)
        bit_b = (1 << b) if wide else np.uint64(1 << b)
        pair = bit_a | bit_b
        occ_a = (states & bit_a) != 0
        occ_b = (states & bit_b) != 0
        both = occ_a & occ_b
        only_a = occ_a & ~occ_b
        only_b = occ_b & ~occ_a
        diag[both] += 1.0
        diag[only_a] += lj * lj / denom       # |10> on (a, b)
        diag[only_b] += 1.0 / denom           # |01> on (a, b)
        src = np.nonzero(only_a)[0]
        if len(src):
            targets = states[src] ^ pair
            tgt = np.searchsorted(states, targets)
            ok = (tgt < m)
            ok[ok] = states[tgt[ok]] == targets[ok]
            src, tgt = src[ok], tgt[ok]
            amp = np.full(len(src), -lj / denom)
            rows.extend((src, tgt))
            cols.extend((tgt, src))
            vals.extend((amp, amp))
    if rows:
        rows = np.concatenate(rows)
        cols = np.concatenate(cols)
        vals = np.concatenate(vals)
    else:
        rows = cols = np.zeros(0, dtype=int)
        vals = np.zeros(0)
    mat = sp.coo_matrix((vals, (rows, cols)), shape=(m, m)).tocsr()
    mat += sp.diags(diag)
    return sp.csr_matrix(mat)


def assemble_sector(region, params, n, cap=SECTOR_CAP):
    """H^Lambda restricted to the n-particle sector of the region."""
    if region.dim != params.d:
        raise DimensionMismatch("region and params disagree on dimension")
    if not 0 <= n <= region.size:
        raise ValueError(f"no {n}-particle sector on {region.size} sites")
    states = occupation_states(region.size, n, cap)
    edges = lattice_edges(region)
    basis = OccupationBasis(region, n, states)
    mat = assemble_on_states(states, edges, params.lam)
    return SectorOperator(basis, mat, len(edges))


def apply_operator(op, v):
    v = np.asarray(v, dtype=float)
    if v.shape != (op.dim,):
        raise DimensionMismatch(f"vector of length {len(v)} against dim {op.dim}")
    return op.matrix @ v


def dense_hamiltonian(region, params):
    """Full 2^N Hamiltonian via Kronecker embedding; cross-check oracle only."""
    n = region.size
    if n > 14:
        raise SectorTooLarge("dense cross-check limited to 14 sites")
    dim = 1 << n
    h_full = np.zeros((dim, dim))
    # embed each edge term by explicit index arithmetic; handles any (a, b) pair
    for a, b, j in lattice_edges(region):
        h4 = interaction_matrix(params.lam[j])
        for s in range(dim):
            ia = (s >> a) & 1
            ib = (s >> b) & 1
            row = 2 * ia + ib
            for ja_ in (0, 1):
                for jb_ in (0, 1):
                    col = 2 * ja_ + jb_
                    if h4[row, col] == 0.0:
                        continue
                    t = (s & ~(1 << a) & ~(1 << b)) | (ja_ << a) | (jb_ << b)
                    h_full[s, t] += h4[row, col]
    return h_full


def sector_permutation(n_sites):
    """Permutation sorting the 2^N basis by particle number (then by pattern)."""
    order = sorted(range(1 << n_sites), key=lambda s: (bin(s).count("1"), s))
    return np.array(order)


def kernel_dimension(region, params, max_n=None, zero_threshold=1e-8, cap=SECTOR_CAP):
    """Count zero modes across sectors n = 0..max_n (default: all sectors)."""
    from .spectra import sector_eigenvalues

    if max_n is None:
        max_n = region.size
    total = 0
    for n in range(min(max_n, region.size) + 1):
        op = assemble_sector(region, params, n, cap)
        vals = sector_eigenvalues(op, k=min(op.dim, 8))
        below = int(np.sum(vals < zero_threshold))
        while below == len(vals) and len(vals) < op.dim:
            vals = sector_eigenvalues(op, k=min(op.dim, 2 * len(vals)))
            below = int(np.sum(vals < zero_threshold))
        total += below
    return total


def write_matrix_market(op, path):
    """Export the sector matrix in MatrixMarket coordinate format."""
    from scipy.io import mmwrite

    mmwrite(str(path), sp.coo_matrix(op.matrix), symmetry="symmetric")
