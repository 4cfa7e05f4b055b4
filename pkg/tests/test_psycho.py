import io
import math

import numpy as np
import pytest

from pareidolia._errors import DataError, IngestionError, ParameterError
from pareidolia.curve import Curve
from pareidolia.gaussian_model import GaussianModelConfig
from pareidolia.psycho import (
    DESIGN_WIDTHS,
    Design,
    TrialRecord,
    aggregate_curve,
    clean_trials,
    compare_groups,
    fit_gaussian_model,
    model_predictions,
    planted_means,
    read_trials,
    rt_curve,
    synth_trials,
    write_trials,
)
from pareidolia.seeding import child_seed

# a single-mode model keeps predictions O(1) so small additive noise is meaningful
SMALL_CFG = GaussianModelConfig(modes=1, amplitude=10.0, s0=10.0)
GRID = tuple(float(g) for g in range(1, 13))


def trial(rt=1000.0, subject="S01", width=16.0, image=0, rep=0, response=3, group="A", gender=None):
    return TrialRecord(subject, group, gender, width, image, rep, response, rt)


class TestTrialRecord:
    @pytest.mark.parametrize("kw", [{"response": 10}, {"response": -1}, {"rt": 0.0}, {"width": 0.0}])
    def test_invariants(self, kw):
        with pytest.raises(ParameterError):
            trial(**kw)

    def test_csv_header(self):
        trials = synth_trials(Design(n_subjects=2, n_female=1, images_per_width=2, repeats=1), seed=3)
        buf = io.StringIO()
        write_trials(trials, buf)
        lines = buf.getvalue().splitlines()
        assert lines[0] == "subject_id,group,gender,width_level,image_index,repetition,response,rt_ms"
        assert len(lines) == len(trials) + 1

    def test_read_back(self, tmp_path):
        trials = synth_trials(Design(n_subjects=3, n_female=1, images_per_width=2, repeats=2), seed=4)
        p = tmp_path / "t.csv"
        with open(p, "w", newline="") as fh:
            write_trials(trials, fh)
        assert read_trials(p) == trials

    def test_read_rejects_bad_rows(self, tmp_path):
        p = tmp_path / "t.csv"
        p.write_text("subject_id,group\nS1,A\n")
        with pytest.raises(IngestionError):
            read_trials(p)
        p.write_text("subject_id,group,gender,width_level,image_index,repetition,response,rt_ms\n"
                     "S1,A,,16,0,0,12,500\n")
        with pytest.raises(IngestionError, match="line 2"):
            read_trials(p)


class TestCleanTrials:
    def test_boundaries(self):
        kept, dropped = clean_trials([trial(99), trial(100), trial(120_000), trial(120_001)])
        assert [t.rt_ms for t in kept] == [100, 120_000]
        assert [(t.rt_ms, why) for t, why in dropped] == [(99, "too-fast"), (120_001, "break")]

    def test_partition_and_order(self, rng):
        trials = [trial(float(v), image=k) for k, v in enumerate(rng.uniform(1, 200_000, 500))]
        kept, dropped = clean_trials(trials)
        assert len(kept) + len(dropped) == len(trials)
        assert sorted(kept + [t for t, _ in dropped], key=lambda t: t.image_index) == trials
        assert [t.image_index for t in kept] == sorted(t.image_index for t in kept)


class TestAggregate:
    def test_one_subject_mean(self):
        c = aggregate_curve([trial(response=2), trial(response=4, image=1)], level="subject")
        assert c["S01"].y == (3.0,)

    def test_all_zero(self):
        trials = [trial(response=0, subject=s, width=w) for s in ("a", "b", "c") for w in (1.0, 2.0)]
        c = aggregate_curve(trials)
        assert c.y == (0.0, 0.0) and c.ci == (0.0, 0.0)

    def test_population_ci(self):
        trials = [trial(subject=s, response=r) for s, r in (("a", 1), ("b", 3), ("c", 8))]
        c = aggregate_curve(trials)
        assert c.y == (4.0,)
        assert c.ci[0] == pytest.approx(1.96 * np.std([1, 3, 8], ddof=1) / math.sqrt(3))
        assert aggregate_curve(trials, band="sd").ci[0] == pytest.approx(np.std([1, 3, 8], ddof=1))

    def test_repetitions_averaged_first(self):
        # image 0 shown three times, image 1 once: each image counts once
        trials = [trial(response=0, rep=k) for k in range(3)] + [trial(response=6, image=1)]
        assert aggregate_curve(trials, level="subject")["S01"].y == (3.0,)

    def test_unbalanced_subjects(self):
        base = [trial(subject="a", response=2), trial(subject="b", response=6)]
        extra = [trial(subject="a", response=2, image=k) for k in range(1, 40)]
        assert aggregate_curve(base).y == aggregate_curve(base + extra).y == (4.0,)

    def test_missing_width_warns(self):
        with pytest.warns(UserWarning, match="excluded"):
            c = aggregate_curve([trial(width=1.0), trial(width=4.0)], widths=(1.0, 2.0, 4.0))
        assert c.x == (1.0, 4.0)

    def test_empty(self):
        with pytest.raises(DataError):
            aggregate_curve([])

    def test_recovers_planted_peak(self):
        design = Design(n_subjects=20, n_female=10)
        hits = 0
        for r in range(100):
            kept, _ = clean_trials(synth_trials(design, seed=child_seed(11, r)))
            c = aggregate_curve(kept)
            hits += c.x[int(np.argmax(c.y))] == 16.0
        assert hits >= 95


class TestRtCurve:
    def test_single_trial_zero_band(self):
        c = rt_curve([trial(rt=800.0, width=w) for w in (1.0, 2.0)])
        assert c.ci == (0.0, 0.0)

    def test_equal_rts_flat(self):
        trials = [trial(rt=700.0, subject=s, width=w, response=r)
                  for s in ("a", "b") for w, r in ((1.0, 0), (2.0, 5))]
        assert rt_curve(trials).y == (700.0, 700.0)

    def test_mirrors_face_count(self):
        agree = 0
        for r in range(100):
            kept, _ = clean_trials(synth_trials(Design(), seed=child_seed(12, r)))
            agree += int(np.argmax(rt_curve(kept).y)) == int(np.argmax(aggregate_curve(kept).y))
        assert agree >= 90


class TestCompareGroups:
    def test_relabelled_copy(self):
        kept, _ = clean_trials(synth_trials(Design(n_subjects=4, n_female=2), seed=5))
        twin = [TrialRecord(t.subject_id + "x", "B", t.gender, t.width_level, t.image_index,
                            t.repetition, t.response, t.rt_ms) for t in kept]
        same = [TrialRecord(t.subject_id, "A", t.gender, t.width_level, t.image_index,
                            t.repetition, t.response, t.rt_ms) for t in kept]
        g = compare_groups(same + twin)
        assert g.curves["A"].y == g.curves["B"].y
        assert all(d[3] == 0.0 for d in g.differences)

    def test_single_group(self):
        g = compare_groups([trial(subject="a"), trial(subject="b")])
        assert list(g.curves) == ["A"] and g.differences == [] and g.flagged == []

    def test_small_group_flagged(self):
        g = compare_groups([trial(subject="a"), trial(subject="b"), trial(subject="c", group="B")])
        assert g.flagged == ["B"]
        assert len(g.differences) == 1

    def test_gender_factor_needs_values(self):
        with pytest.raises(DataError):
            compare_groups([trial()], factor="gender")

    def test_null_groups(self):
        # 20 subjects per group; with 7 per group the per-width claim holds
        # only about half the time, since |diff| / pooled sd ~ t / sqrt(n / 2)
        design = Design(n_subjects=40, n_female=20)
        ok = 0
        for r in range(100):
            kept, _ = clean_trials(synth_trials(design, seed=child_seed(13, r)))
            ok += all(d[3] < d[4] for d in compare_groups(kept).differences)
        assert ok >= 90


def _self_curve(gamma, k, widths=DESIGN_WIDTHS, cfg=SMALL_CFG):
    return Curve(widths, tuple(k * model_predictions(widths, gamma, cfg)))


class TestFit:
    @pytest.mark.parametrize("cfg", [SMALL_CFG, GaussianModelConfig()], ids=["one-mode", "default"])
    def test_self_consistent(self, cfg):
        res = fit_gaussian_model(_self_curve(6.0, 5.0, cfg=cfg), GRID, cfg)
        assert res.gamma_hat == 6.0
        assert res.scale_hat == pytest.approx(5.0, rel=1e-12)
        assert res.rss < 1e-18

    def test_noise_recovery(self):
        curve = _self_curve(6.0, 5.0)
        rng = np.random.default_rng(14)
        hits = 0
        for _ in range(100):
            noisy = Curve(curve.x, tuple(np.array(curve.y) + rng.normal(0, 0.01, len(curve))))
            hits += abs(fit_gaussian_model(noisy, GRID, SMALL_CFG).gamma_hat - 6.0) <= 1.0
        assert hits >= 95

    def test_doubling(self, rng):
        curve = Curve(DESIGN_WIDTHS, tuple(np.array(_self_curve(4.0, 2.0).y) + rng.normal(0, 0.05, 9)))
        a = fit_gaussian_model(curve, GRID, SMALL_CFG)
        b = fit_gaussian_model(Curve(curve.x, tuple(2 * np.array(curve.y))), GRID, SMALL_CFG)
        assert b.gamma_hat == a.gamma_hat
        assert b.scale_hat == pytest.approx(2 * a.scale_hat, rel=1e-12)

    def test_rss_recomputed(self, rng):
        curve = Curve(DESIGN_WIDTHS, tuple(rng.uniform(0, 4, 9)))
        res = fit_gaussian_model(curve, GRID, SMALL_CFG)
        p = model_predictions(curve.x, res.gamma_hat, SMALL_CFG)
        assert abs(res.rss - float(np.sum((np.array(curve.y) - res.scale_hat * p) ** 2))) < 1e-12
        assert res.gamma_hat in GRID and res.rss >= 0
        assert [g for g, _ in res.grid] == list(GRID)

    def test_negative_correlation_clamps_scale(self):
        p = model_predictions(DESIGN_WIDTHS, 3.0, SMALL_CFG)
        res = fit_gaussian_model(Curve(DESIGN_WIDTHS, tuple(-p)), (3.0,), SMALL_CFG)
        assert res.scale_hat == 0.0
        assert res.rss == pytest.approx(float(np.sum(p * p)))

    def test_ties_go_to_smaller_gamma(self):
        flat = Curve((1.0, 2.0, 3.0), (0.0, 0.0, 0.0))
        assert fit_gaussian_model(flat, (5.0, 2.0, 9.0), SMALL_CFG).gamma_hat == 2.0

    def test_preconditions(self):
        with pytest.raises(ParameterError):
            fit_gaussian_model(Curve((1.0, 2.0), (1.0, 1.0)), GRID)
        with pytest.raises(ParameterError):
            fit_gaussian_model(_self_curve(6.0, 1.0), ())

    def test_all_zero_predictions_skipped(self):
        # a template far outside the generator's spread underflows to exactly zero
        cfg = GaussianModelConfig(modes=1, amplitude=1000.0, s0=10.0)
        curve = Curve((0.25, 0.5, 1.0), (1.0, 2.0, 1.0))
        res = fit_gaussian_model(curve, (1e-3, 1e3), cfg)
        assert res.skipped == (1e-3,)
        assert res.gamma_hat == 1e3
        with pytest.raises(DataError):
            fit_gaussian_model(curve, (1e-3,), cfg)


class TestSynth:
    def test_design_shape(self):
        trials = synth_trials(Design(), seed=1)
        assert len(trials) == 14 * 270
        subjects = {t.subject_id for t in trials}
        assert len(subjects) == 14
        assert sum(1 for s in subjects if next(t for t in trials if t.subject_id == s).gender == "female") == 6
        assert {t.width_level for t in trials} == set(DESIGN_WIDTHS)

    def test_deterministic(self):
        assert synth_trials(seed=9) == synth_trials(seed=9)

    def test_planted_peak(self):
        mu = planted_means(Design())
        assert DESIGN_WIDTHS[int(np.argmax(mu))] == 16.0

    def test_some_trials_need_cleaning(self):
        _, dropped = clean_trials(synth_trials(seed=2))
        assert {why for _, why in dropped} == {"too-fast", "break"}
