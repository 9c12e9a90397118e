from fractions import Fraction

import numpy as np
import pytest

from multiplicity.branch_bound import solve
from multiplicity.core import (
    Dataset,
    Example,
    LinearClassifier,
    conflict_count,
    empirical_risk,
)
from multiplicity.formulations import (
    FormulationParams,
    assignment_from_classifier,
    build_baseline_mip,
    build_disc_mip,
    build_flip_mip,
    classifier_from_solution,
    compute_big_m,
    export_mps,
    margin_clearance,
)
from multiplicity.simplex import LinearProgram, solve_lp
from conftest import random_binary_dataset
from mps_reader import read_mps
from oracles import oracle_disc, oracle_flip, prediction_pattern


H_A = LinearClassifier((-0.2, 0.4, 0.4))  # optimal on XOR, errs on cell (1,1)


class TestBigM:
    def test_binary_features_value(self, xor):
        m = compute_big_m(xor, 1e-4)
        assert np.allclose(m, 1.0001)

    def test_larger_feature_scale(self):
        data = Dataset.build([Example((1.0, 3.0), 1), Example((1.0, 0.0), -1)])
        assert np.allclose(compute_big_m(data, 1e-4), 3.0001)

    def test_holder_bound_over_random_classifiers(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            data = random_binary_dataset(rng)
            m = compute_big_m(data, 1e-4)
            for _ in range(20):
                raw = rng.uniform(-1, 1, size=data.d + 1)
                if np.abs(raw).sum() == 0:
                    continue
                h = LinearClassifier.from_raw(raw)
                scores = data.X @ np.asarray(h.coefficients)
                assert np.all(np.abs(scores) + 1e-4 <= m + 1e-12)

    def test_tight_override(self):
        data = Dataset.build([Example((1.0, 3.0), 1), Example((1.0, 0.0), -1)])
        model = build_baseline_mip(
            data, FormulationParams(big_m_override="tight")
        )
        assert np.allclose(model.metadata["big_m"], [3.0001, 1.0001])


class TestBaselineModel:
    def test_model_size_accounting(self, xor):
        model = build_baseline_mip(xor)
        n, nc = len(xor.examples), xor.d + 1
        assert model.lp.n_vars == n + 2 * nc
        assert len(model.binary_vars) == n

    def test_separable_optimum_zero(self):
        data = Dataset.build(
            [
                Example((1.0, 0.0), -1),
                Example((1.0, 0.2), -1),
                Example((1.0, 0.8), 1),
                Example((1.0, 1.0), 1),
            ]
        )
        assert solve(build_baseline_mip(data)).upper_bound == 0.0

    def test_xor_optimum_25(self, xor):
        assert solve(build_baseline_mip(xor)).upper_bound == 25.0

    def test_conflict_pair_forces_one_even_in_relaxation(self):
        data = Dataset.build([Example((1.0, 2.0), 1), Example((1.0, 2.0), -1)])
        model = build_baseline_mip(data)
        relaxed = solve_lp(model.lp)
        assert relaxed.objective_value >= 1.0 - 1e-9
        assert solve(model).upper_bound == 1.0

    def test_decoded_risk_matches_objective_under_margin(self):
        rng = np.random.default_rng(17)
        for _ in range(15):
            data = random_binary_dataset(rng)
            model = build_baseline_mip(data)
            res = solve(model)
            h = classifier_from_solution(model, res.incumbent)
            _, clear = margin_clearance(h, data, model.metadata["gamma"])
            if clear:
                assert empirical_risk(h, data).mistakes == res.upper_bound


class TestDiscModel:
    def test_trivial_full_flip_at_eps_one(self, xor):
        model = build_disc_mip(xor, H_A, 1)
        res = solve(model)
        assert res.upper_bound == 0.0  # the negated baseline flips everything

    def test_xor_discrepancy_fifty(self, xor):
        res = solve(build_disc_mip(xor, H_A, 0))
        assert res.status == "certified_optimal"
        assert xor.n - res.upper_bound == 50

    def test_negative_epsilon_rejected(self, xor):
        with pytest.raises(ValueError):
            build_disc_mip(xor, H_A, -0.01)

    def test_random_optima_match_oracle(self):
        rng = np.random.default_rng(23)
        for _ in range(12):
            data = random_binary_dataset(rng)
            base_model = build_baseline_mip(data)
            base = solve(base_model)
            h0 = classifier_from_solution(base_model, base.incumbent)
            pattern = prediction_pattern(h0, data)
            for k in (0, 1, 2):
                eps = Fraction(k, data.n)
                res = solve(build_disc_mip(data, h0, eps))
                assert res.status == "certified_optimal"
                assert data.n - res.upper_bound == oracle_disc(data, pattern, eps)

    def test_semantics_bridge_decode_and_recompute(self):
        rng = np.random.default_rng(29)
        for _ in range(10):
            data = random_binary_dataset(rng)
            base_model = build_baseline_mip(data)
            base = solve(base_model)
            h0 = classifier_from_solution(base_model, base.incumbent)
            model = build_disc_mip(data, h0, Fraction(1, data.n))
            res = solve(model)
            h = classifier_from_solution(model, res.incumbent)
            _, clear = margin_clearance(h, data, model.metadata["gamma"])
            if not clear:
                continue
            agreements = res.upper_bound
            assert conflict_count(h, h0, data).mistakes == data.n - agreements
            ident = model.metadata["risk_identity"]
            n_idx = len(data.examples)
            a = np.round(res.incumbent[:n_idx])
            risk_from_identity = ident["base_mistakes"] + int(
                (ident["signed_weights"] * (1 - a)).sum()
            )
            assert empirical_risk(h, data).mistakes == risk_from_identity


class TestFlipModel:
    def test_xor_flip_costs_25(self, xor):
        idx = next(
            i for i, ex in enumerate(xor.examples) if ex.features == (1.0, 1.0, 1.0)
        )
        res = solve(build_flip_mip(xor, H_A, idx))
        assert res.status == "certified_optimal"
        assert res.upper_bound == 25.0

    def test_incumbent_satisfies_flip_constraint(self, xor):
        from multiplicity.core import predictions

        base = predictions(H_A, xor)
        for i in range(len(xor.examples)):
            model = build_flip_mip(xor, H_A, i)
            res = solve(model)
            h = classifier_from_solution(model, res.incumbent)
            score = h.score(xor.examples[i].features)
            assert base[i] * score <= -model.metadata["gamma"] / 2

    def test_bad_index_rejected(self, xor):
        with pytest.raises(IndexError):
            build_flip_mip(xor, H_A, 99)

    def test_random_optima_match_oracle(self):
        rng = np.random.default_rng(31)
        for _ in range(10):
            data = random_binary_dataset(rng)
            base_model = build_baseline_mip(data)
            base = solve(base_model)
            h0 = classifier_from_solution(base_model, base.incumbent)
            pattern = prediction_pattern(h0, data)
            seen = set()
            for i, ex in enumerate(data.examples):
                if ex.features in seen:
                    continue
                seen.add(ex.features)
                res = solve(build_flip_mip(data, h0, i))
                assert res.status == "certified_optimal"
                assert res.upper_bound == oracle_flip(data, pattern, i)


class TestWarmStartEncoding:
    def test_round_trip_assignment_is_feasible(self, xor):
        from multiplicity.branch_bound import check_feasible

        model = build_baseline_mip(xor)
        values = assignment_from_classifier(model, xor, H_A)
        ok, report = check_feasible(model, values)
        assert ok, report
        assert float(model.lp.objective @ values) == 25.0

    def test_disc_assignment_counts_agreements(self, xor):
        from multiplicity.branch_bound import check_feasible

        model = build_disc_mip(xor, H_A, 0)
        values = assignment_from_classifier(model, xor, H_A)
        ok, report = check_feasible(model, values)
        assert ok, report
        assert float(model.lp.objective @ values) == 100.0


class TestMpsExport:
    def test_round_trip_preserves_optimum(self, tmp_path):
        rng = np.random.default_rng(37)
        for trial in range(6):
            data = random_binary_dataset(rng)
            model = build_baseline_mip(data)
            path = tmp_path / f"model_{trial}.mps"
            export_mps(model, path)
            reimported = read_mps(path)
            a = solve(model)
            b = solve(reimported)
            assert a.status == b.status == "certified_optimal"
            assert a.upper_bound == b.upper_bound

    def test_single_variable_golden_sections(self, tmp_path):
        lp = LinearProgram(
            objective=np.array([2.0]),
            row_coefs=np.array([[1.0]]),
            row_relations=(">=",),
            row_rhs=np.array([0.5]),
            var_lo=np.array([0.0]),
            var_hi=np.array([1.0]),
        )
        from multiplicity.branch_bound import MipModel

        model = MipModel(lp=lp, binary_vars=(), metadata={"kind": "tiny"})
        path = tmp_path / "tiny.mps"
        export_mps(model, path)
        text = path.read_text()
        lines = text.splitlines()
        assert lines[0].startswith("NAME")
        for section in ("ROWS", "COLUMNS", "RHS", "BOUNDS", "ENDATA"):
            assert any(line == section for line in lines), section
        order = [lines.index(s) for s in ("ROWS", "COLUMNS", "RHS", "BOUNDS", "ENDATA")]
        assert order == sorted(order)
        assert " N  OBJ" in lines
        assert " G  R0001" in lines

    def test_xor_model_reimports_to_25(self, tmp_path, xor):
        model = build_baseline_mip(xor)
        path = tmp_path / "xor.mps"
        export_mps(model, path)
        res = solve(read_mps(path))
        assert res.status == "certified_optimal"
        assert res.upper_bound == 25.0
