import numpy as np
import pytest

from softgait import ConfigError, ProtocolError
from softgait.evaluation import GaitResult
from softgait.morphology import Genotype
from softgait.optimize import DescriptorBounds, QdOptimizer

BOUNDS = DescriptorBounds((0.0, 1.0), (0.0, 1.0))


def result(fitness, squish, wobble, failed=False):
    return GaitResult(fitness, squish, wobble, 0.0, 0.0, 500, failed)


def make_opt(**kwargs):
    defaults = dict(bounds=BOUNDS, batch_size=20, mutation_sigma=0.1, init_budget=100, seed=0)
    defaults.update(kwargs)
    return QdOptimizer(**defaults)


class TestAsk:
    def test_initialization_phase_is_uniform(self):
        opt = make_opt()
        batch = opt.ask()
        assert len(batch) == 20
        genes = np.array([g.genes for g in batch])
        assert genes.min() >= 0.0 and genes.max() <= 1.0
        assert genes.std() > 0.15  # spread out, not clustered around one parent

    def test_deterministic_by_seed(self):
        assert [g.genes for g in make_opt(seed=5).ask()] == [g.genes for g in make_opt(seed=5).ask()]
        assert [g.genes for g in make_opt(seed=5).ask()] != [g.genes for g in make_opt(seed=6).ask()]

    def test_single_elite_parents_all_candidates(self):
        opt = make_opt(init_budget=0, mutation_sigma=1e-6)
        parent = Genotype((0.5, 0.5, 0.5, 0.5, 0.5))
        opt.archive.offer(parent, result(1.0, 0.5, 0.5))
        batch = opt.ask()
        for g in batch:
            assert np.abs(g.as_array() - parent.as_array()).max() < 1e-4

    def test_empty_archive_falls_back_to_uniform(self):
        opt = make_opt(init_budget=0)
        batch = opt.ask()
        genes = np.array([g.genes for g in batch])
        assert genes.std() > 0.15

    def test_clipping_after_mutation(self):
        opt = make_opt(init_budget=0, mutation_sigma=3.0)
        opt.archive.offer(Genotype((0.0, 1.0, 0.0, 1.0, 0.5)), result(1.0, 0.5, 0.5))
        for g in opt.ask():
            assert all(0.0 <= v <= 1.0 for v in g.genes)

    def test_switches_to_mutation_after_init_budget(self):
        opt = make_opt(init_budget=40, mutation_sigma=1e-6)
        parent = Genotype((0.25, 0.25, 0.25, 0.25, 0.25))
        opt.archive.offer(parent, result(1.0, 0.1, 0.1))
        first, second = opt.ask(), opt.ask()  # asked = 40 after these
        third = opt.ask()  # past the init budget: perturbations of the sole elite
        spread = np.array([g.genes for g in first + second]).std()
        assert spread > 0.15
        for g in third:
            assert np.abs(g.as_array() - parent.as_array()).max() < 1e-4


class TestTell:
    def test_offers_batch_to_archive(self):
        opt = make_opt()
        batch = opt.ask()
        # 20 results in 20 distinct cells: squish bin i%10, wobble bin i//10
        telling = [
            (g, result(1.0, (i % 10 + 0.5) / 10.0, (i // 10 + 0.5) / 10.0))
            for i, g in enumerate(batch)
        ]
        opt.tell(telling)
        assert opt.archive.occupancy == 20

    def test_same_bin_keeps_fitter(self):
        opt = make_opt()
        batch = opt.ask()
        rs = [result(float(i), 0.5, 0.5) for i in range(20)]
        opt.tell(list(zip(batch, rs)))
        assert opt.archive.occupancy == 1
        assert opt.archive.best().result.fitness == 19.0

    def test_failed_results_change_nothing(self):
        opt = make_opt()
        batch = opt.ask()
        opt.tell([(g, result(1.0, 0.5, 0.5, failed=True)) for g in batch])
        assert opt.archive.occupancy == 0
        assert opt.archive.stats.rejected_failed == 20

    def test_batch_size_mismatch_rejected(self):
        opt = make_opt()
        batch = opt.ask()
        with pytest.raises(ProtocolError):
            opt.tell([(batch[0], result(1.0, 0.5, 0.5))])

    def test_monotone_qd_score_and_occupancy(self):
        opt = make_opt()
        rng = np.random.default_rng(0)
        prev_qd, prev_occ = 0.0, 0
        for _ in range(20):
            batch = opt.ask()
            rs = [
                result(float(rng.random()), float(rng.random()), float(rng.random()),
                       failed=bool(rng.random() < 0.1))
                for _ in batch
            ]
            opt.tell(list(zip(batch, rs)))
            qd, occ = opt.archive.qd_score(), opt.archive.occupancy
            assert qd >= prev_qd - 1e-12 and occ >= prev_occ
            prev_qd, prev_occ = qd, occ


def test_config_validation():
    with pytest.raises(ConfigError):
        make_opt(mutation_sigma=0.0)
    with pytest.raises(ConfigError):
        make_opt(batch_size=0)
    with pytest.raises(ConfigError):
        make_opt(init_budget=-1)
