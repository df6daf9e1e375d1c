import logging

import numpy as np
import pytest

from scenario_risk.choquet import choquet_integral, coherence_probe, distorted_set_function
from scenario_risk.errors import CapExceededError, InvalidInputError
from scenario_risk.measure_core import EmpiricalDistribution, OutcomeTable, ScenarioSet
from scenario_risk.representation import (
    MC_BLOCK,
    EsMixture,
    PsiBarSpec,
    es_mixture_eval,
    expected_max_by_cells,
    psi_from_psibar,
    rho_psi,
    sup_mixture_eval,
    vertex_mixtures,
)
from scenario_risk.scenario_measures import ScenarioDistributions, imes, max_law, mes, mvar, vector_measure
from strategies import LEVELS, random_scenarios, random_singular_scenarios

Q2 = EmpiricalDistribution(np.array([0.0, 2.0]), np.array([0.75, 0.25]))


def two_regime_laws(two_regime):
    return ScenarioDistributions.from_table(two_regime.table, two_regime.scenarios, "X")


class TestExactForms:
    def test_point_mass_is_mvar(self, rng):
        for _ in range(100):
            sd = random_scenarios(rng)
            p = float(rng.choice(LEVELS))
            result = rho_psi(sd, PsiBarSpec.point_mass([p] * len(sd)))
            assert result.method == "exact"
            assert result.value == pytest.approx(mvar(sd, p), abs=1e-12)

    def test_diagonal_is_imes(self, rng):
        for _ in range(100):
            sd = random_scenarios(rng)
            p = float(rng.choice(LEVELS))
            assert rho_psi(sd, PsiBarSpec.diagonal(len(sd), p)).value == pytest.approx(imes(sd, p), abs=1e-12)

    def test_product_on_two_regime(self, two_regime):
        sd = two_regime_laws(two_regime)
        assert rho_psi(sd, PsiBarSpec.product(2)).value == pytest.approx(1.25, abs=1e-12)
        assert expected_max_by_cells(sd) == pytest.approx(1.25, abs=1e-12)

    def test_product_matches_cell_sum(self, rng):
        for _ in range(50):
            sd = random_scenarios(rng, max_n=3, max_support=20)
            exact = rho_psi(sd, PsiBarSpec.product(len(sd))).value
            assert exact == pytest.approx(expected_max_by_cells(sd), abs=1e-9)

    def test_cell_cap(self, rng):
        sd = ScenarioDistributions(tuple((f"Q{i}", EmpiricalDistribution(np.arange(10.0), np.full(10, 0.1)))
                                         for i in range(4)))
        with pytest.raises(CapExceededError):
            expected_max_by_cells(sd, cap=1000)

    def test_arity_mismatch(self, two_regime):
        with pytest.raises(InvalidInputError):
            rho_psi(two_regime_laws(two_regime), PsiBarSpec.product(3))


class TestPsiBarSpec:
    def test_parse_point_masses(self):
        spec = PsiBarSpec.parse({"form": "point_masses", "n": 2, "points": [[0.9, 0.5], [1.0, 1.0]],
                                 "masses": [0.5, 0.5]})
        assert spec.n == 2

    @pytest.mark.parametrize("data", [
        {"form": "point_masses", "n": 2, "points": [[0.0, 0.5]], "masses": [1.0]},
        {"form": "point_masses", "n": 2, "points": [[0.5, 0.5]], "masses": [0.9]},
        {"form": "point_masses", "n": 2, "points": [[0.5]], "masses": [1.0]},
        {"form": "diagonal_uniform", "n": 2, "p": 1.0},
        {"form": "custom_sampler", "n": 2, "sampler": "nope"},
        {"form": "spiral", "n": 2},
    ])
    def test_rejects_bad_forms(self, data):
        with pytest.raises(InvalidInputError):
            PsiBarSpec.parse(data)

    def test_sampler_shape_checked(self, two_regime):
        spec = PsiBarSpec.custom(2, lambda rng, size: rng.random((size, 3)))
        with pytest.raises(InvalidInputError):
            rho_psi(two_regime_laws(two_regime), spec, mc_samples=10)

    def test_monte_carlo_needs_samples(self, two_regime):
        spec = PsiBarSpec.parse({"form": "custom_sampler", "n": 2, "sampler": "product_uniform"})
        with pytest.raises(InvalidInputError):
            rho_psi(two_regime_laws(two_regime), spec)


class TestMonteCarlo:
    def test_product_sampler_within_four_standard_errors(self, rng):
        hits = 0
        for seed in range(100):
            sd = random_scenarios(rng, max_n=3, max_support=20)
            spec = PsiBarSpec.parse({"form": "custom_sampler", "n": len(sd), "sampler": "product_uniform"})
            estimate = rho_psi(sd, spec, mc_samples=100_000, seed=seed)
            exact = max_law(sd.dists).mean()
            assert estimate.method == "monte_carlo"
            hits += abs(estimate.value - exact) <= 4 * estimate.std_error + 1e-9
        assert hits >= 95

    def test_diagonal_sampler_approaches_imes(self, two_regime):
        sd = two_regime_laws(two_regime)
        spec = PsiBarSpec.parse({"form": "custom_sampler", "n": 2, "sampler": "diagonal_uniform",
                                 "sampler_params": {"p": 0.5}})
        estimate = rho_psi(sd, spec, mc_samples=50_000, seed=11)
        assert abs(estimate.value - 1.5) <= 5 * estimate.std_error + 1e-9

    def test_worker_count_does_not_change_estimate(self, two_regime):
        sd = two_regime_laws(two_regime)
        spec = PsiBarSpec.parse({"form": "custom_sampler", "n": 2, "sampler": "beta",
                                 "sampler_params": {"a": 2.0, "b": 1.0}})
        size = 2 * MC_BLOCK + 100
        one = rho_psi(sd, spec, mc_samples=size, seed=5, n_jobs=1)
        three = rho_psi(sd, spec, mc_samples=size, seed=5, n_jobs=3)
        assert one == three

    def test_seed_changes_estimate(self, two_regime):
        sd = two_regime_laws(two_regime)
        spec = PsiBarSpec.custom(2, lambda rng, size: 1.0 - rng.random((size, 2)))
        assert rho_psi(sd, spec, mc_samples=1000, seed=1).value != rho_psi(sd, spec, mc_samples=1000, seed=2).value


class TestPsiFromPsiBar:
    def test_choquet_of_derived_psi_matches(self, rng):
        for _ in range(60):
            m, n = int(rng.integers(2, 10)), int(rng.integers(1, 4))
            weights = rng.dirichlet(np.ones(m), size=n)
            s = ScenarioSet(tuple(f"Q{i + 1}" for i in range(n)), weights)
            x = rng.integers(-4, 5, size=m).astype(float)
            sd = ScenarioDistributions.from_table(OutcomeTable(m, {"X": x}), s, "X")
            points = rng.uniform(0.05, 1.0, size=(2, n))
            specs = [
                PsiBarSpec(form="point_masses", n=n, points=points.tolist(), masses=[0.3, 0.7]),
                PsiBarSpec.diagonal(n, float(rng.choice(LEVELS))),
                PsiBarSpec.product(n),
            ]
            for spec in specs:
                c = distorted_set_function(psi_from_psibar(spec), s)
                assert choquet_integral(x, c) == pytest.approx(rho_psi(sd, spec).value, abs=1e-9)

    def test_custom_sampler_has_no_closed_form(self):
        with pytest.raises(InvalidInputError):
            psi_from_psibar(PsiBarSpec.custom(2, lambda rng, size: rng.random((size, 2))))


class TestEsMixtures:
    def test_two_regime_equal_weights(self, two_regime):
        sd = two_regime_laws(two_regime)
        assert es_mixture_eval(sd, EsMixture.point([0.5, 0.5], 0.5)) == pytest.approx(1.0, abs=1e-12)

    def test_level_law_is_averaged(self):
        sd = ScenarioDistributions((("Q2", Q2),))
        mix = EsMixture.parse({"w": [1.0], "h": [[0.5, 0.5], [0.9, 0.5]]})
        assert es_mixture_eval(sd, mix) == pytest.approx(0.5 * 1.0 + 0.5 * 2.0)

    def test_single_atom_list_is_broadcast(self):
        mix = EsMixture.parse({"w": [0.5, 0.5], "h": [[0.9, 1.0]]})
        assert mix.h == [[(0.9, 1.0)], [(0.9, 1.0)]]

    @pytest.mark.parametrize("data", [
        {"w": [0.6, 0.6], "h": [[0.9, 1.0]]},
        {"w": [1.0], "h": [[0.0, 1.0]]},
        {"w": [1.0], "h": [[0.5, 0.4]]},
        {"w": [0.5, 0.5], "h": [[[0.9, 1.0]], [[0.9, 1.0]], [[0.9, 1.0]]]},
    ])
    def test_rejects_bad_mixtures(self, data):
        with pytest.raises(InvalidInputError):
            EsMixture.parse(data)

    def test_sup_over_vertices_is_mes(self, rng):
        for _ in range(100):
            sd = random_scenarios(rng)
            p = float(rng.choice(LEVELS))
            result = sup_mixture_eval(sd, vertex_mixtures(len(sd), p), non_singular="ignore")
            assert result.value == pytest.approx(mes(sd, p), abs=1e-12)

    def test_ties_go_to_first_index(self):
        sd = ScenarioDistributions((("A", Q2), ("B", Q2)), mutually_singular=True)
        assert sup_mixture_eval(sd, vertex_mixtures(2, 0.5)).index == 0

    def test_non_singular_modes(self, caplog):
        sd = ScenarioDistributions((("A", Q2), ("B", Q2)), mutually_singular=False)
        mixes = vertex_mixtures(2, 0.5)
        with pytest.raises(InvalidInputError):
            sup_mixture_eval(sd, mixes, non_singular="error")
        with caplog.at_level(logging.WARNING, logger="scenario_risk.representation"):
            sup_mixture_eval(sd, mixes, non_singular="warn")
        assert "not mutually singular" in caplog.text
        caplog.clear()
        with caplog.at_level(logging.WARNING, logger="scenario_risk.representation"):
            sup_mixture_eval(sd, mixes, non_singular="ignore")
        assert caplog.text == ""

    def test_empty_family_rejected(self, two_regime):
        with pytest.raises(InvalidInputError):
            sup_mixture_eval(two_regime_laws(two_regime), [])

    def test_parallel_sup_matches_serial(self, rng):
        sd = random_scenarios(rng, max_n=4)
        mixes = [EsMixture(w=rng.dirichlet(np.ones(len(sd))).tolist(), h=[[(0.9, 1.0)]] * len(sd))
                 for _ in range(20)]
        assert sup_mixture_eval(sd, mixes, non_singular="ignore", n_jobs=1) == \
            sup_mixture_eval(sd, mixes, non_singular="ignore", n_jobs=2)

    def test_mixture_is_coherent(self, rng):
        m, n = 10, 3
        s = ScenarioSet(("Q1", "Q2", "Q3"), random_singular_scenarios(rng, m, n))
        mix = EsMixture(w=[0.2, 0.3, 0.5], h=[[(0.5, 0.5), (0.95, 0.5)]] * n)
        report = coherence_probe(vector_measure(es_mixture_eval, s, mix=mix), m, trials=300, seed=2)
        assert report.holds, report.to_dict()
