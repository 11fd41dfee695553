"""Low-lying spectra and spectral gaps of assembled sector Hamiltonians.

gamma(H) = sup{delta > 0 : spec(H) has no point in (0, delta)}, taken as 0
when nothing sits above the kernel.  Sectors below ``dense_threshold`` states
are solved densely; larger ones with ARPACK (smallest-algebraic, fixed
starting vector for reproducibility).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
import scipy.sparse.linalg as spla

from .errors import SolverFailure
from .operator import assemble_sector

ZERO_THRESHOLD = 1e-8
DENSE_THRESHOLD = 4096
DEGENERACY_TOL = 1e-10


@dataclass(frozen=True)
class GapResult:
    gap: float
    kernel_dim: int
    low_eigenvalues: tuple
    sectors_scanned: tuple
    solver: str
    zero_threshold: float

    def to_json_dict(self):
        return {
            "schema": "pvbs-gap/1",
            "gap": self.gap,
            "kernel_dim": self.kernel_dim,
            "low_eigenvalues": list(self.low_eigenvalues),
            "sectors_scanned": list(self.sectors_scanned),
            "solver": self.solver,
            "zero_threshold": self.zero_threshold,
        }

    def to_json(self):
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True)


def _iterative_lowest(matrix, k, tol=1e-10, maxiter=10_000):
    dim = matrix.shape[0]
    k = min(k, dim - 1)
    rng = np.random.default_rng(0)
    v0 = rng.standard_normal(dim)
    try:
        vals = spla.eigsh(matrix, k=k, which="SA", tol=tol, maxiter=maxiter,
                          v0=v0, return_eigenvectors=False)
    except spla.ArpackNoConvergence as err:
        raise SolverFailure(f"ARPACK did not converge: {err}") from err
    return np.sort(vals)


def sector_eigenvalues(op, k=8, dense_threshold=DENSE_THRESHOLD):
    """The k lowest eigenvalues of a sector (all of them on the dense path)."""
    dim = op.dim
    if dim <= dense_threshold:
        return np.linalg.eigvalsh(op.matrix.toarray())
    return _iterative_lowest(op.matrix, k)


def sector_gap(op, dense_threshold=DENSE_THRESHOLD):
    """(lowest eigenvalue, second distinct level or None)."""
    vals = sector_eigenvalues(op, k=8, dense_threshold=dense_threshold)
    lowest = float(vals[0])
    for v in vals[1:]:
        if v - lowest > DEGENERACY_TOL:
            return lowest, float(v)
    if len(vals) < op.dim:
        vals = sector_eigenvalues(op, k=min(op.dim, 64), dense_threshold=dense_threshold)
        for v in vals[1:]:
            if v - vals[0] > DEGENERACY_TOL:
                return float(vals[0]), float(v)
    return lowest, None


def spectral_gap(region, params, sectors=None, *, zero_threshold=ZERO_THRESHOLD,
                 dense_threshold=DENSE_THRESHOLD, k_low=8, exhaustive=False,
                 sector_cap=None):
    """Gap and kernel count over the requested particle-number sectors.

    Default scan covers n = 0..min(|Lambda|, 4); the low-energy PVBS
    excitations live in small sectors, and ``exhaustive=True`` scans all of
    them when that assumption needs checking.
    """
    from .operator import SECTOR_CAP

    cap = SECTOR_CAP if sector_cap is None else sector_cap
    if sectors is None:
        top = region.size if exhaustive else min(region.size, 4)
        sectors = range(top + 1)
    sectors = tuple(int(n) for n in sectors)
    kernel = 0
    low = []
    solvers = set()
    for n in sectors:
        op = assemble_sector(region, params, n, cap)
        dense = op.dim <= dense_threshold
        solvers.add("dense" if dense else "iterative")
        vals = sector_eigenvalues(op, k=k_low, dense_threshold=dense_threshold)
        below = int(np.sum(vals < zero_threshold))
        while not dense and below == len(vals) and len(vals) < op.dim:
            # widen until the scan sees past the kernel
            vals = sector_eigenvalues(op, k=min(op.dim, 2 * len(vals)),
                                      dense_threshold=dense_threshold)
            below = int(np.sum(vals < zero_threshold))
        kernel += below
        low.extend(float(v) for v in vals[: max(below + 4, 8)])
    low.sort()
    positive = [v for v in low if v > zero_threshold]
    gap = positive[0] if positive else 0.0
    solver = solvers.pop() if len(solvers) == 1 else "mixed"
    return GapResult(gap, kernel, tuple(low[:16]), sectors, solver, zero_threshold)
