import json
import math

import numpy as np
import pytest

from softgait import ConfigError, ValidationError
from softgait.evaluation import GaitResult
from softgait.morphology import Genotype
from softgait.optimize import Archive, DescriptorBounds, bin_index

BOUNDS = DescriptorBounds((0.0, 1.0), (0.0, 2.0))


def result(fitness=1.0, squish=0.5, wobble=1.0, failed=False):
    return GaitResult(fitness, squish, wobble, 0.0, fitness * 25.0, 500, failed)


def genotype(seed=0):
    rng = np.random.default_rng(seed)
    return Genotype(tuple(rng.random(5)))


class TestBinIndex:
    def test_lower_edge(self):
        assert bin_index(result(squish=0.0, wobble=0.0), BOUNDS) == (0, 0)

    def test_upper_edge_clamps_to_last_bin(self):
        assert bin_index(result(squish=1.0, wobble=2.0), BOUNDS) == (9, 9)

    def test_interior(self):
        assert bin_index(result(squish=0.55, wobble=2.0 * 0.55), BOUNDS) == (5, 5)

    def test_out_of_bounds_clamp(self):
        assert bin_index(result(squish=-3.0, wobble=99.0), BOUNDS) == (0, 9)

    def test_nonfinite_rejected(self):
        with pytest.raises(ValidationError):
            bin_index(result(squish=math.nan), BOUNDS)

    def test_bounds_validation(self):
        with pytest.raises(ConfigError):
            DescriptorBounds((0.0, 0.0), (0.0, 1.0))


class TestOffer:
    def test_insert_into_empty_cell(self):
        archive = Archive(BOUNDS)
        assert archive.offer(genotype(), result()) is True
        assert archive.occupancy == 1
        assert archive.stats.inserted == 1

    def test_fitter_replaces(self):
        archive = Archive(BOUNDS)
        archive.offer(genotype(1), result(fitness=0.3))
        assert archive.offer(genotype(2), result(fitness=0.5)) is True
        assert archive.stats.replaced == 1
        assert archive.best().result.fitness == 0.5

    def test_tie_keeps_incumbent(self):
        archive = Archive(BOUNDS)
        first = genotype(1)
        archive.offer(first, result(fitness=0.3))
        assert archive.offer(genotype(2), result(fitness=0.3)) is False
        assert archive.best().genotype == first
        assert archive.stats.rejected_worse == 1

    def test_failed_rejected_outright(self):
        archive = Archive(BOUNDS)
        assert archive.offer(genotype(), result(failed=True, fitness=0.0)) is False
        assert archive.occupancy == 0
        assert archive.stats.rejected_failed == 1


class TestRandomizedPropertySuite:
    def test_ten_thousand_offers(self):
        rng = np.random.default_rng(42)
        archive = Archive(BOUNDS)
        oracle: dict[tuple[int, int], float] = {}  # independent per-cell max tracker
        prev_qd = 0.0
        prev_occ = 0
        for k in range(10_000):
            failed = rng.random() < 0.05
            r = GaitResult(
                fitness=float(rng.random() * 3.0),
                squish=float(rng.uniform(-0.2, 1.4)),
                wobble=float(rng.uniform(-0.5, 2.6)),
                com_start_x=0.0,
                com_end_x=1.0,
                sample_count=500,
                failed=failed,
            )
            g = Genotype(tuple(rng.random(5)))
            accepted = archive.offer(g, r)
            if not failed:
                cell = bin_index(r, BOUNDS)
                if r.fitness > oracle.get(cell, -math.inf):
                    assert accepted
                    oracle[cell] = r.fitness
                else:
                    assert not accepted
            else:
                assert not accepted
            if k % 500 == 0:
                occ = archive.occupancy
                qd = archive.qd_score()
                assert occ <= 100
                assert occ >= prev_occ
                assert qd >= prev_qd - 1e-12
                prev_occ, prev_qd = occ, qd
                archive.validate()
        assert archive.occupancy == len(oracle)
        for elite in archive.elites():
            assert elite.result.fitness == oracle[elite.cell]
        stats = archive.stats
        assert stats.offers == 10_000
        assert stats.inserted + stats.replaced + stats.rejected_worse + stats.rejected_failed == 10_000

    def test_cell_fitness_monotone(self):
        rng = np.random.default_rng(7)
        archive = Archive(BOUNDS)
        history: dict[tuple[int, int], float] = {}
        for _ in range(2000):
            r = result(
                fitness=float(rng.random()),
                squish=float(rng.random()),
                wobble=float(rng.random() * 2),
            )
            archive.offer(genotype(int(rng.integers(1e9))), r)
            for elite in archive.elites():
                if elite.cell in history:
                    assert elite.result.fitness >= history[elite.cell]
                history[elite.cell] = elite.result.fitness


class TestSerialization:
    def build(self):
        rng = np.random.default_rng(3)
        archive = Archive(BOUNDS)
        for _ in range(300):
            archive.offer(
                Genotype(tuple(rng.random(5))),
                result(
                    fitness=float(rng.random()),
                    squish=float(rng.random()),
                    wobble=float(rng.random() * 2),
                ),
            )
        return archive

    def test_roundtrip_lossless(self):
        archive = self.build()
        clone = Archive.from_lines(archive.to_lines())
        assert clone.bounds == archive.bounds
        assert clone.grid_size == archive.grid_size
        assert clone.stats == archive.stats
        a, b = archive.elites(), clone.elites()
        assert len(a) == len(b)
        for ea, eb in zip(a, b):
            assert ea.cell == eb.cell
            assert ea.genotype.genes == eb.genotype.genes  # bit-exact floats
            assert ea.result == eb.result

    def test_file_roundtrip(self, tmp_path):
        archive = self.build()
        path = tmp_path / "archive.jsonl"
        archive.save(path)
        clone = Archive.load(path)
        assert clone.to_lines() == archive.to_lines()

    def test_header_required(self):
        with pytest.raises(ValidationError):
            Archive.from_lines([json.dumps({"kind": "elite"})])
        with pytest.raises(ValidationError):
            Archive.from_lines([])

    def test_elite_records_have_contract_fields(self):
        archive = self.build()
        lines = archive.to_lines()
        header = json.loads(lines[0])
        assert header["bounds"]["squish"] == [0.0, 1.0]
        elite = json.loads(lines[1])
        assert set(elite) >= {"kind", "cell", "genes", "fitness", "squish", "wobble"}
        assert len(elite["genes"]) == 5
