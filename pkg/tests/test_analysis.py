import math
from itertools import combinations

import numpy as np
import pytest

import prmkit as pk
from prmkit.analysis import ClusterQuality, band_masks, parse_predicate
from prmkit.errors import DomainError, StructuralError

from conftest import TRUTH_CUTS, make_binary, simple_model


def brute_force_auc(scores, labels):
    scores = np.asarray(scores)
    labels = np.asarray(labels)
    pos = scores[labels == 1]
    neg = scores[labels == 0]
    wins = 0.0
    for p in pos:
        for q in neg:
            if p > q:
                wins += 1.0
            elif p == q:
                wins += 0.5
    return wins / (len(pos) * len(neg))


class TestAuc:
    def test_perfect_separation(self):
        assert pk.auc([0.1, 0.2, 0.8, 0.9], [0, 0, 1, 1]) == 1.0

    def test_all_ties(self):
        assert pk.auc([3.0] * 6, [0, 1, 0, 1, 1, 0]) == 0.5

    def test_matches_brute_force(self):
        rng = np.random.default_rng(17)
        for _ in range(50):
            n = int(rng.integers(10, 200))
            scores = rng.choice([0.1, 0.25, 0.5, 0.7], size=n) + rng.normal(0, 0.2, n).round(2)
            labels = (rng.random(n) < 0.4).astype(float)
            if labels.min() == labels.max():
                labels[0] = 1 - labels[0]
            assert pk.auc(scores, labels) == pytest.approx(
                brute_force_auc(scores, labels), abs=1e-12
            )

    def test_monotone_transform_invariance(self):
        rng = np.random.default_rng(3)
        scores = rng.normal(0, 1, 300)
        labels = (rng.random(300) < 0.3).astype(float)
        base = pk.auc(scores, labels)
        assert pk.auc(3 * scores + 7, labels) == pytest.approx(base, abs=1e-12)
        assert pk.auc(np.exp(scores), labels) == pytest.approx(base, abs=1e-12)

    def test_single_class_error(self):
        with pytest.raises(DomainError):
            pk.auc([0.1, 0.2], [1, 1])


class TestBandReport:
    def test_rows_cover_dataset_and_average(self, fitted_experiment, two_regime_50k):
        _, _, pipeline, _ = fitted_experiment
        _, regime2, _ = two_regime_50k
        report = pk.band_report(pipeline, regime2, "cscore", [640, 706, 760])
        counts = sum(r.count for r in report.rows)
        assert counts == regime2.row_count
        weighted = sum(r.count * r.observed_rate for r in report.rows if r.count) / counts
        assert weighted == pytest.approx(regime2.target().mean(), abs=1e-12)

    def test_single_band_equals_overall(self, fitted_experiment, two_regime_50k):
        _, _, pipeline, _ = fitted_experiment
        _, regime2, _ = two_regime_50k
        report = pk.band_report(pipeline, regime2, "cscore", [])
        assert len(report.rows) == 1
        assert report.rows[0].observed_rate == pytest.approx(regime2.target().mean(), abs=1e-12)

    def test_empty_band_reported_null(self, fitted_experiment, two_regime_50k):
        _, _, pipeline, _ = fitted_experiment
        _, regime2, _ = two_regime_50k
        report = pk.band_report(pipeline, regime2, "cscore", [100, 640])
        empty = report.rows[0]
        assert empty.count == 0 and empty.observed_rate is None

    def test_missing_band_variable_collected(self, fitted_experiment, two_regime_50k):
        _, _, pipeline, _ = fitted_experiment
        _, regime2, _ = two_regime_50k
        sample = regime2.select(range(100))
        cs = np.asarray(sample.columns["cscore"], dtype=float).copy()
        cs[:7] = math.nan
        sample.columns["cscore"] = cs
        rows = band_masks(sample, "cscore", [706])
        assert rows[-1][0] == "cscore missing"
        assert rows[-1][3].sum() == 7


class TestGroupRates:
    def test_all_records(self, two_regime_50k):
        regime1, regime2, _ = two_regime_50k
        rates = pk.group_rates(regime1, regime2, "all")
        assert rates.rate_1 == pytest.approx(regime1.target().mean(), abs=1e-12)
        assert rates.rate_2 == pytest.approx(regime2.target().mean(), abs=1e-12)
        assert rates.rate_2 < rates.rate_1  # stricter policy cuts the raw rate

    def test_low_score_predicate(self, two_regime_50k):
        regime1, regime2, _ = two_regime_50k
        rates = pk.group_rates(regime1, regime2, "cscore<706")
        mask = np.asarray(regime1.columns["cscore"]) < 706
        assert rates.count_1 == int(mask.sum())
        assert rates.rate_1 == pytest.approx(regime1.target()[mask].mean(), abs=1e-12)

    def test_empty_group_null(self, two_regime_50k):
        regime1, regime2, _ = two_regime_50k
        rates = pk.group_rates(regime1, regime2, "cscore<0")
        assert rates.rate_1 is None and rates.count_1 == 0

    def test_conjunction_and_membership(self, two_regime_50k):
        regime1, _, _ = two_regime_50k
        fn = parse_predicate("cscore<706 & prop_type in [SF,MH]")
        mask = fn(regime1)
        cs = np.asarray(regime1.columns["cscore"]) < 706
        pt = np.isin(np.asarray(regime1.columns["prop_type"], dtype=object), ["SF", "MH"])
        np.testing.assert_array_equal(mask, cs & pt)

    def test_unparseable_atom(self):
        with pytest.raises(DomainError):
            parse_predicate("cscore ~ 7")


class TestImpactTable:
    def test_sorted_with_intercept_last(self, table_model, demo_2010):
        # the bundled discretizer's features cover the model's premises
        spec = pk.load_pipeline(pk.fixture_path("demo_pipeline.json")).discretizer
        binary = pk.transform(spec, demo_2010)
        rows = pk.impact_table(table_model, binary)
        assert rows[-1].rule_id == "R-16"
        body = rows[:-1]
        impacts = [r.impact for r in body]
        assert impacts == sorted(impacts, reverse=True)
        for row in body:
            assert row.impact == pytest.approx(abs(row.points) * row.coverage, abs=1e-12)

    def test_zero_coverage_bottom(self):
        model = simple_model([0.9, 0.2, 0.5], n_features=2)
        data = make_binary([[0, 1], [0, 1], [0, 0]], target=[0, 1, 0])
        rows = pk.impact_table(model, data)
        assert rows[-2].coverage == 0.0 and rows[-2].impact == 0.0
        assert rows[-1].rule_id == "R-03"

    def test_forced_ordering(self):
        model = pk.RuleModel(
            [
                pk.Rule("R-01", (pk.Literal(0),), pk.weight_from_points(2.0)),
                pk.Rule("R-02", (pk.Literal(1),), pk.weight_from_points(-2.0)),
                pk.Rule("R-03", (), 0.5),
            ],
            ["a", "b"],
            1.0,
            "classifier",
        )
        records = np.zeros((10, 2), dtype=np.uint8)
        records[:5, 0] = 1  # coverage 0.5
        records[0, 1] = 1  # coverage 0.1
        data = make_binary(records, target=[0] * 10, feature_names=("a", "b"))
        rows = pk.impact_table(model, data)
        assert [r.rule_id for r in rows] == ["R-01", "R-02", "R-03"]


def combo_model(n_rules=5, seed=0):
    rng = np.random.default_rng(seed)
    n = 3000
    records = (rng.random((n, n_rules)) < rng.uniform(0.2, 0.6, n_rules)).astype(np.uint8)
    logit = -2.0 + records @ rng.normal(0.5, 0.4, n_rules)
    p = 1 / (1 + np.exp(-logit))
    y = (rng.random(n) < p).astype(float)
    weights = [float(w) for w in rng.uniform(0.3, 0.7, n_rules + 1)]
    model = simple_model(weights)
    data = make_binary(records, target=y)
    return model, data


class TestFrequentRuleCombos:
    def test_matches_brute_force_enumeration(self):
        model, data = combo_model()
        min_support, max_size = 0.03, 4
        combos = pk.frequent_rule_combos(model, data, min_support, max_size)
        got = {c.rule_ids: c.support for c in combos}
        trig = model.trigger_matrix(data.records)
        ids = [r.id for r in model.rules if not r.is_intercept]
        expected = {}
        for size in range(2, max_size + 1):
            for subset in combinations(range(len(ids)), size):
                mask = np.ones(data.n_records, dtype=bool)
                for j in subset:
                    mask &= trig[:, j]
                support = mask.mean()
                if support >= min_support:
                    expected[tuple(ids[j] for j in subset)] = support
        assert got == pytest.approx(expected)

    def test_downward_closure(self):
        model, data = combo_model(seed=4)
        combos = pk.frequent_rule_combos(model, data, 0.05, 4)
        supports = {c.rule_ids: c.support for c in combos}
        singles_ok = {
            r.id
            for j, r in enumerate(model.rules)
            if not r.is_intercept and model.trigger_matrix(data.records)[:, j].mean() >= 0.05
        }
        for combo in combos:
            assert set(combo.rule_ids) <= singles_ok
            for size in range(2, len(combo.rule_ids)):
                for sub in combinations(combo.rule_ids, size):
                    assert sub in supports

    def test_disjoint_rules_no_pair(self):
        records = np.zeros((100, 2), dtype=np.uint8)
        records[:50, 0] = 1
        records[50:, 1] = 1
        model = simple_model([0.6, 0.4, 0.5])
        data = make_binary(records, target=[0] * 100)
        assert pk.frequent_rule_combos(model, data, 0.01, 2) == []

    def test_rates_within_population(self):
        model, data = combo_model(seed=9)
        combos = pk.frequent_rule_combos(model, data, 0.05, 2)
        assert combos
        probs = np.asarray(model.predict_proba(data.records))
        trig = model.trigger_matrix(data.records)
        ids = [r.id for r in model.rules if not r.is_intercept]
        for c in combos:
            mask = np.ones(data.n_records, dtype=bool)
            for rid in c.rule_ids:
                mask &= trig[:, ids.index(rid)]
            assert c.predicted_rate == pytest.approx(probs[mask].mean(), abs=1e-12)
            assert c.observed_rate == pytest.approx(data.target[mask].mean(), abs=1e-12)

    def test_size_bounds(self):
        model, data = combo_model()
        with pytest.raises(DomainError):
            pk.frequent_rule_combos(model, data, 0.05, 5)


class TestClusterQuality:
    def test_well_calibrated_cluster_no_suggestion(self, fitted_experiment, two_regime_50k):
        _, _, pipeline, _ = fitted_experiment
        _, regime2, _ = two_regime_50k
        binary = pk.transform(pipeline.discretizer, regime2)
        probs = pk.apply_corrected(pipeline, regime2).combined_probability
        combos = pk.frequent_rule_combos(
            pipeline.correction, binary, 0.05, 2, probabilities=probs
        )
        assert combos
        best = min(combos, key=lambda c: c.gap)
        quality = pk.cluster_quality(best, pipeline, regime2, gap_threshold=0.5)
        assert quality.suggestion is None
        assert quality.gap == pytest.approx(best.gap, abs=1e-12)

    @staticmethod
    def interaction_pipeline(seed=8, n=20_000):
        """Truth is driven by the flag f2 ~= f0 & f1; the correction layer
        prices f2 exactly but leaves the f2=0 remainder of the (f0, f1)
        cluster at a wrong constant, so refining by R-03 closes the gap."""
        rng = np.random.default_rng(seed)
        f0 = (rng.random(n) < 0.5).astype(np.uint8)
        f1 = (rng.random(n) < 0.5).astype(np.uint8)
        f2 = (f0 & f1 & (rng.random(n) < 0.9)).astype(np.uint8)
        y = (rng.random(n) < np.where(f2 == 1, 0.8, 0.2)).astype(float)
        raw = pk.RawDataset(
            columns={
                "f0": f0.astype(float),
                "f1": f1.astype(float),
                "f2": f2.astype(float),
                "default": y,
            },
            kinds={"f0": "numeric", "f1": "numeric", "f2": "numeric", "default": "numeric"},
            target_name="default",
            record_ids=tuple(str(i) for i in range(n)),
        )
        disc_doc = {"variables": {v: {"cuts": [1]} for v in ("f0", "f1", "f2")}}
        spec = pk.fit_discretizer(raw, disc_doc)
        names = spec.feature_names
        idx = {name: i for i, name in enumerate(names)}
        correction = pk.RuleModel(
            [
                pk.Rule("R-01", (pk.Literal(idx["f0>=1"]),), 0.5),
                pk.Rule("R-02", (pk.Literal(idx["f1>=1"]),), 0.5),
                pk.Rule("R-03", (pk.Literal(idx["f2>=1"]),), pk.weight_from_points(-math.log(4.0))),
                pk.Rule("R-04", (), 0.5),
            ],
            names,
            1.0,
            "regressor",
        )
        base = pk.RuleModel([pk.Rule("R-01", (), 0.5)], names, 1.0, "classifier")
        m1 = pk.BaseScorer.from_model(base, spec)
        pipeline = pk.CorrectionPipeline(m1=m1, m2=m1, correction=correction, discretizer=spec)
        return pipeline, raw

    def test_hidden_interaction_recovered(self):
        pipeline, raw = self.interaction_pipeline()
        binary = pk.transform(pipeline.discretizer, raw)
        probs = pk.apply_corrected(pipeline, raw).combined_probability
        combos = pk.frequent_rule_combos(
            pipeline.correction, binary, 0.01, 2, probabilities=probs
        )
        pair = next(c for c in combos if set(c.rule_ids) == {"R-01", "R-02"})
        quality = pk.cluster_quality(pair, pipeline, raw, gap_threshold=0.01)
        assert quality.gap > 0.01
        assert quality.suggestion == "R-03"

    def test_all_rules_in_combo_null_suggestion(self):
        pipeline, raw = self.interaction_pipeline(seed=9)
        binary = pk.transform(pipeline.discretizer, raw)
        probs = pk.apply_corrected(pipeline, raw).combined_probability
        combos = pk.frequent_rule_combos(pipeline.correction, binary, 0.01, 3, probabilities=probs)
        full = next(c for c in combos if set(c.rule_ids) == {"R-01", "R-02", "R-03"})
        quality = pk.cluster_quality(full, pipeline, raw, gap_threshold=0.0)
        assert isinstance(quality, ClusterQuality)
        assert quality.suggestion is None


class TestLearningCurve:
    def test_flat_when_models_equal(self):
        config = pk.default_two_regime_config(4000, 4000, seed=31)
        r1, r2, _ = pk.generate_synthetic(config)
        mining = pk.MiningConfig(max_rules=4)
        calib = pk.CalibrationConfig(mode="regressor")
        from prmkit.data import split_indices

        tr, _ = split_indices(r1.record_ids, 0.2, 13)
        m1 = pk.build_base_model(r1.select(tr), mining, disc_config=TRUTH_CUTS)
        rows = pk.learning_curve(r1, r2, m1, m1, mining, calib, [0, 2, 4], TRUTH_CUTS)
        for row in rows:
            assert row["auc_combined"] == pytest.approx(row["auc_m1"], abs=5e-3)

    def test_intercept_only_equals_m1(self, fitted_experiment, two_regime_50k):
        regime1, regime2, _ = two_regime_50k
        m1, m2, pipeline, _ = fitted_experiment
        mining = pk.MiningConfig(max_rules=4)
        rows = pk.learning_curve(
            regime1, regime2, m1, m2, mining,
            pk.CalibrationConfig(mode="regressor"), [0], TRUTH_CUTS,
        )
        assert rows[0]["auc_combined"] == pytest.approx(rows[0]["auc_m1"], abs=1e-12)

    def test_unsorted_ks_rejected(self, fitted_experiment, two_regime_50k):
        regime1, regime2, _ = two_regime_50k
        m1, m2, _, _ = fitted_experiment
        with pytest.raises(DomainError):
            pk.learning_curve(
                regime1, regime2, m1, m2, pk.MiningConfig(max_rules=4),
                pk.CalibrationConfig(mode="regressor"), [3, 1], TRUTH_CUTS,
            )
