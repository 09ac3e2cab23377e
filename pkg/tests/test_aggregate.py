import numpy as np
import pytest

from rispoison.harness.aggregate import AggregateCurve, aggregate, final_mean_rate, moving_average
from rispoison.harness.runner import RunLog


def fake_log(seed, r_true, warm=50):
    n = len(r_true)
    return RunLog(seed=seed, warm_steps=warm, t=np.arange(n, dtype=np.int64),
                  r_true=np.asarray(r_true, dtype=np.float64),
                  r_train=np.asarray(r_true, dtype=np.float64) - 1.0)


class TestMovingAverage:
    def test_matches_windowed_sum_oracle(self):
        rng = np.random.default_rng(0)
        x = rng.normal(size=500)
        for window in (1, 7, 50, 200, 600):
            got = moving_average(x, window)
            want = np.array([x[max(0, i - window + 1):i + 1].mean()
                             for i in range(len(x))])
            assert np.allclose(got, want, atol=1e-10)

    def test_step_function(self):
        x = np.array([0.0] * 10 + [1.0] * 10)
        ma = moving_average(x, 5)
        assert ma[9] == 0.0
        assert ma[14] == 1.0
        assert ma[11] == pytest.approx(2 / 5)

    def test_bad_window(self):
        with pytest.raises(ValueError):
            moving_average(np.ones(5), 0)


class TestAggregate:
    def test_constant_reward(self):
        curve = aggregate([fake_log(0, np.full(100, 3.0))], window=10)
        assert np.allclose(curve.mean, 3.0)
        assert np.allclose(curve.std, 0.0)

    def test_two_constant_seeds(self):
        logs = [fake_log(0, np.full(50, 2.0)), fake_log(1, np.full(50, 4.0))]
        curve = aggregate(logs, window=5)
        assert np.allclose(curve.mean, 3.0)
        assert np.allclose(curve.std, 1.0)

    def test_uses_clean_reward_only(self):
        log = fake_log(0, np.full(60, 5.0))
        log.r_train = np.zeros(60)  # heavily poisoned; must not leak into the curve
        curve = aggregate([log], window=10)
        assert np.allclose(curve.mean, 5.0)

    def test_mismatched_lengths_rejected(self):
        with pytest.raises(ValueError, match="lengths"):
            aggregate([fake_log(0, np.ones(10)), fake_log(1, np.ones(12))], window=3)

    def test_failed_runs_excluded(self):
        good = fake_log(0, np.full(40, 2.0))
        bad = fake_log(1, np.full(17, 9.0))
        bad.failed = True
        curve = aggregate([good, bad], window=4)
        assert np.allclose(curve.mean, 2.0)

    def test_all_failed_rejected(self):
        bad = fake_log(0, np.ones(5))
        bad.failed = True
        with pytest.raises(ValueError, match="no successful"):
            aggregate([bad], window=2)


class TestFinalMeanRate:
    def test_manual_computation(self):
        r = np.concatenate([np.zeros(90), np.full(10, 4.0)])
        got = final_mean_rate(fake_log(0, r), window=1)
        assert got == pytest.approx(4.0)  # last 10% of a window-1 MA

    def test_tail_fraction(self):
        r = np.arange(200, dtype=np.float64)
        got = final_mean_rate(fake_log(0, r), window=1)
        assert got == pytest.approx(np.mean(np.arange(180, 200)))


class TestCsv:
    def test_curve_csv_schema_and_determinism(self):
        curve = AggregateCurve(t=np.arange(3), mean=np.array([1.0, 2.0, 3.0]),
                               std=np.array([0.1, 0.2, 0.3]))
        text = curve.to_csv()
        assert text.splitlines()[0] == "t,mean,std"
        assert text == curve.to_csv()
        assert text.splitlines()[1] == "0,1.0,0.1"
