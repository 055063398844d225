"""Shared-ledger pandemics: PZ spreading, concurrency, aggregation."""

from random import Random

import pytest

import cvoa.engine
from cvoa import (
    BinaryCodec,
    Disposition,
    EpidemicParameters,
    EvaluationError,
    MultiStrainConfig,
    PandemicResult,
    PzStrategy,
    Termination,
    run_pandemic,
    run_strain,
    seed_patient_zeros,
)


class TestSeedPatientZeros:
    def test_single_pz_matches_plain_draw(self):
        codec = BinaryCodec(bits=10)
        for strategy in PzStrategy:
            assert seed_patient_zeros(1, codec, strategy, Random(5)) == [
                codec.generate_patient_zero(Random(5))
            ]

    def test_spread_pairs_are_far_apart(self):
        codec = BinaryCodec(bits=10)
        far = 0
        trials = 200
        for seed in range(trials):
            a, b = seed_patient_zeros(2, codec, PzStrategy.MAX_HAMMING_SPREAD, Random(seed))
            far += codec.distance(a, b) >= 5
        assert far / trials >= 0.95

    def test_spreading_beats_random_on_average(self):
        codec = BinaryCodec(bits=20)

        def min_pairwise(pzs):
            return min(
                codec.distance(a, b)
                for i, a in enumerate(pzs)
                for b in pzs[i + 1 :]
            )

        spread_total = random_total = 0
        for seed in range(100):
            spread_total += min_pairwise(
                seed_patient_zeros(5, codec, PzStrategy.MAX_HAMMING_SPREAD, Random(seed))
            )
            random_total += min_pairwise(
                seed_patient_zeros(5, codec, PzStrategy.RANDOM, Random(seed))
            )
        assert spread_total >= random_total

    def test_more_zeros_than_genotypes_rejected(self):
        codec = BinaryCodec(bits=8)
        with pytest.raises(ValueError):
            seed_patient_zeros(257, codec, PzStrategy.RANDOM, Random(0))

    def test_count_and_validity(self):
        codec = BinaryCodec(bits=10)
        pzs = seed_patient_zeros(5, codec, PzStrategy.MAX_HAMMING_SPREAD, Random(1))
        assert len(pzs) == 5
        assert all(g.length == 10 for g in pzs)


class TestMultiStrainConfig:
    def test_uniform_fans_out_distinct_seeds(self):
        config = MultiStrainConfig.uniform(EpidemicParameters(seed=3, strains=5))
        seeds = [p.seed for p in config.parameters]
        assert len(config.parameters) == 5
        assert len(set(seeds)) == 5
        assert seeds[0] == 3

    def test_duplicate_seeds_rejected(self):
        with pytest.raises(ValueError):
            MultiStrainConfig(parameters=(EpidemicParameters(seed=1), EpidemicParameters(seed=1)))

    def test_empty_config_rejected(self):
        with pytest.raises(ValueError):
            MultiStrainConfig(parameters=())

    def test_uniform_validates_parameters(self):
        from cvoa import ParameterError

        with pytest.raises(ParameterError):
            MultiStrainConfig.uniform(EpidemicParameters(p_die=2.0, strains=2))


class TestRunPandemic:
    def test_single_strain_path_equals_run_strain(self):
        codec = BinaryCodec(bits=20)
        for seed in (1, 2, 3):
            pandemic = run_pandemic(
                MultiStrainConfig.uniform(EpidemicParameters(seed=seed, strains=1)), codec
            )
            standalone = run_strain(EpidemicParameters(seed=seed), codec, Random(seed))
            assert pandemic.strains[0] == standalone
            assert pandemic.history == standalone.history
            assert pandemic.best == standalone.best

    def test_single_strain_path_is_deterministic(self):
        codec = BinaryCodec(bits=20)
        config = MultiStrainConfig.uniform(EpidemicParameters(seed=11, strains=1))
        a = run_pandemic(config, codec)
        b = run_pandemic(config, codec)
        assert a.history == b.history
        assert a.best == b.best

    def test_distinct_per_strain_parameters_complete(self):
        strains = tuple(
            EpidemicParameters(p_die=p_die, seed=seed)
            for seed, p_die in enumerate((0.01, 0.03, 0.05, 0.07, 0.09))
        )
        config = MultiStrainConfig(parameters=strains, pz_strategy=PzStrategy.MAX_HAMMING_SPREAD)
        result = run_pandemic(config, BinaryCodec(bits=20))
        assert len(result.strains) == 5
        strain_bests = [s.best.fitness for s in result.strains if s.best is not None]
        assert result.best.fitness == min(strain_bests)
        assert all(result.best.fitness <= f for f in strain_bests)

    def test_merged_history_sums_infected_counts(self):
        config = MultiStrainConfig.uniform(EpidemicParameters(seed=2, strains=5))
        result = run_pandemic(config, BinaryCodec(bits=20))
        for i, row in enumerate(result.history):
            expected = sum(
                s.history[i].infected_count for s in result.strains if len(s.history) > i
            )
            assert row.infected_count == expected
            assert row.iteration == i + 1

    def test_merged_history_counters_monotone(self):
        config = MultiStrainConfig.uniform(EpidemicParameters(seed=4, strains=5))
        result = run_pandemic(config, BinaryCodec(bits=20))
        for earlier, later in zip(result.history, result.history[1:]):
            assert later.deaths_total >= earlier.deaths_total
            assert later.recovered_total >= earlier.recovered_total
            assert later.best_fitness <= earlier.best_fitness

    def test_initial_best_no_better_than_final(self):
        config = MultiStrainConfig.uniform(EpidemicParameters(seed=6, strains=5))
        result = run_pandemic(config, BinaryCodec(bits=20))
        assert result.initial_best >= result.best.fitness

    def test_totals_come_from_the_shared_ledger(self):
        config = MultiStrainConfig.uniform(EpidemicParameters(seed=8, strains=5))
        result = run_pandemic(config, BinaryCodec(bits=20))
        assert result.evaluations_total >= result.history[-1].evaluations_total
        assert result.dead_total >= 0
        assert result.recovered_total > 0

    def test_termination_aggregation(self):
        # a short pandemic cannot go extinct everywhere; a long one usually does
        short = run_pandemic(
            MultiStrainConfig.uniform(
                EpidemicParameters(seed=1, strains=5, pandemic_duration=2, p_die=0.0,
                                   p_isolation=0.0)
            ),
            BinaryCodec(bits=20),
        )
        assert short.termination is Termination.DURATION_REACHED
        long = run_pandemic(
            MultiStrainConfig.uniform(
                EpidemicParameters(seed=1, strains=5, p_isolation=1.0, p_reinfection=0.0)
            ),
            BinaryCodec(bits=20),
        )
        assert long.termination is Termination.EXTINCTION

    def test_dead_genotypes_stay_out_of_circulation_under_contention(self, monkeypatch):
        # tiny space + many strains forces heavy ledger contention
        original = cvoa.engine.new_infection
        violations = []

        def checked(candidate, ledger, params, rng):
            disposition = original(candidate, ledger, params, rng)
            with ledger.shared.lock:
                if candidate in ledger.shared.dead and disposition is not Disposition.IGNORED:
                    violations.append(candidate)
                if ledger.shared.dead & ledger.shared.recovered:
                    violations.append("overlap")
            return disposition

        monkeypatch.setattr(cvoa.engine, "new_infection", checked)
        codec = BinaryCodec(bits=8, target=15)
        for seed in range(3):
            config = MultiStrainConfig.uniform(
                EpidemicParameters(seed=seed, strains=8, p_die=0.2)
            )
            result = run_pandemic(config, codec)
            assert len(result.strains) == 8
        assert violations == []

    def test_evaluation_error_cancels_and_reports_partials(self):
        class FailingCodec(BinaryCodec):
            def fitness(self, genotype):
                value = super().fitness(genotype)
                if value == 0:
                    raise EvaluationError("synthetic failure at the optimum")
                return value

        codec = FailingCodec(bits=10, target=15)
        config = MultiStrainConfig.uniform(EpidemicParameters(seed=1, strains=5))
        with pytest.raises(EvaluationError) as err:
            run_pandemic(config, codec)
        partial = err.value.partial
        assert isinstance(partial, PandemicResult)
        assert partial.termination is None
        assert len(partial.strains) <= 5
