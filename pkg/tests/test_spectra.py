"""Spectral gaps against brute-force full diagonalization."""

import json

import numpy as np
import pytest

from pvbsgap import (
    ModelParams,
    PARALLELOTOPE,
    RegionSpec,
    assemble_sector,
    build_region,
    explicit_region,
    sector_gap,
    spectral_gap,
)
from pvbsgap.operator import dense_hamiltonian

ZT = 1e-8


def chain(n):
    return explicit_region([(k,) for k in range(n)])


def box(params, lengths):
    return build_region(RegionSpec(PARALLELOTOPE, base=(0,) * len(lengths),
                                   lengths=lengths), params)


def brute_force_gap(region, params, zero_threshold=ZT):
    vals = np.linalg.eigvalsh(dense_hamiltonian(region, params))
    positive = vals[vals > zero_threshold]
    kernel = int(np.sum(vals <= zero_threshold))
    return (float(positive[0]) if len(positive) else 0.0), kernel


class TestSpectralGap:
    def test_single_edge_gap_one(self):
        p = ModelParams.make((2.0,), (1,))
        res = spectral_gap(chain(2), p, exhaustive=True)
        assert abs(res.gap - 1.0) < 1e-12
        assert res.kernel_dim == 2

    def test_three_site_chain_matches_brute_force(self):
        p = ModelParams.make((1.0,), (1,))
        region = chain(3)
        res = spectral_gap(region, p, exhaustive=True)
        gap, kernel = brute_force_gap(region, p)
        assert abs(res.gap - gap) < 1e-10
        assert res.kernel_dim == kernel == 2

    def test_two_by_two_box_matches_brute_force(self):
        p = ModelParams.make((1.0, 1.0), (1, 0))
        region = box(p, (2, 2))
        res = spectral_gap(region, p, exhaustive=True)
        gap, _ = brute_force_gap(region, p)
        assert abs(res.gap - gap) < 1e-10

    def test_random_small_regions_match_brute_force(self):
        rng = np.random.default_rng(29)
        for _ in range(8):
            lam = tuple(float(np.exp(rng.uniform(-1, 1))) for _ in range(2))
            p = ModelParams.make(lam, (1, 0))
            region = box(p, (int(rng.integers(2, 4)), int(rng.integers(2, 3))))
            res = spectral_gap(region, p, exhaustive=True)
            gap, kernel = brute_force_gap(region, p)
            assert abs(res.gap - gap) < 1e-10
            assert res.kernel_dim == kernel

    def test_positive_gap_and_kernel_two_when_connected(self):
        rng = np.random.default_rng(41)
        for _ in range(10):
            lam = (float(np.exp(rng.uniform(0.1, 1.0))),
                   float(np.exp(rng.uniform(-1.0, -0.1))))
            p = ModelParams.make(lam, (1, 0))
            region = box(p, (int(rng.integers(2, 4)), int(rng.integers(2, 4))))
            res = spectral_gap(region, p, exhaustive=True)
            assert res.gap > 1e-3
            assert res.kernel_dim == 2

    def test_gap_zero_when_only_kernel(self):
        p = ModelParams.make((2.0,), (1,))
        res = spectral_gap(chain(1), p, exhaustive=True)
        assert res.gap == 0.0
        assert res.kernel_dim == 2

    def test_reflection_invariance(self):
        p = ModelParams.make((2.0, 0.4), (1, 0))
        region = box(p, (3, 2))
        flipped = explicit_region([(x, -y) for (x, y) in region.points])
        p_flip = ModelParams.make((2.0, 2.5), (1, 0))
        a = spectral_gap(region, p, sectors=(1, 2))
        b = spectral_gap(flipped, p_flip, sectors=(1, 2))
        assert abs(a.gap - b.gap) < 1e-9

    def test_json_fields(self):
        p = ModelParams.make((2.0,), (1,))
        res = spectral_gap(chain(2), p)
        data = json.loads(res.to_json())
        assert data["schema"] == "pvbs-gap/1"
        assert set(data) >= {"gap", "kernel_dim", "low_eigenvalues",
                             "sectors_scanned", "solver", "zero_threshold"}


class TestSectorGap:
    def test_one_by_one(self):
        p = ModelParams.make((2.0,), (1,))
        lowest, second = sector_gap(assemble_sector(chain(2), p, 2))
        assert lowest == 1.0 and second is None

    def test_single_edge_sector(self):
        p = ModelParams.make((2.0,), (1,))
        lowest, second = sector_gap(assemble_sector(chain(2), p, 1))
        assert abs(lowest) < 1e-12 and abs(second - 1.0) < 1e-12

    def test_against_dense_oracle(self):
        p = ModelParams.make((2.0, 1.0), (1, 0))
        region = box(p, (2, 3))
        op = assemble_sector(region, p, 1)
        vals = np.linalg.eigvalsh(op.matrix.toarray())
        lowest, second = sector_gap(op)
        assert abs(lowest - vals[0]) < 1e-10
        distinct = vals[vals > vals[0] + 1e-10]
        assert abs(second - distinct[0]) < 1e-10

    def test_dense_vs_iterative(self):
        p = ModelParams.make((1.7, 0.8), (1, 0))
        region = box(p, (4, 3))
        op = assemble_sector(region, p, 2)  # 66 states
        dense_lo, dense_hi = sector_gap(op, dense_threshold=4096)
        it_lo, it_hi = sector_gap(op, dense_threshold=8)
        assert abs(dense_lo - it_lo) < 1e-8
        assert abs(dense_hi - it_hi) < 1e-8
