import numpy as np
import pytest

from rispoison.harness.config import RunConfig, apply_override, parse_config
from rispoison.harness.runner import RunLog, derive_streams, run_many, run_training

TINY = ("run.total_steps = 300\n"
        "attack.t_warm = 20\n"
        "attack.w = 40\n"
        "sac.warm_start = 30\n"
        "env.R = 3\n")


def tiny_cfg(extra: str = "") -> RunConfig:
    return parse_config(TINY + extra)


class TestDeterminism:
    def test_same_seed_identical_traces(self):
        log1 = run_training(tiny_cfg(), 3)
        log2 = run_training(tiny_cfg(), 3)
        assert log1.to_trace_csv() == log2.to_trace_csv()
        assert np.array_equal(log1.eval_rate, log2.eval_rate)

    def test_different_seeds_differ(self):
        log1 = run_training(tiny_cfg(), 0)
        log2 = run_training(tiny_cfg(), 1)
        assert log1.to_trace_csv() != log2.to_trace_csv()

    def test_stream_derivation_prefix_stable(self):
        a = derive_streams(5)
        b = derive_streams(5)
        for name in ("env", "agent_init", "agent_sample", "attack", "eval"):
            assert a[name].random() == b[name].random()


class TestAttackWiring:
    def test_no_attack_training_reward_is_clean(self):
        log = run_training(tiny_cfg(), 0)
        assert np.array_equal(log.r_true, log.r_train)
        assert log.total_fires == 0

    def test_dgrp_p_zero_matches_no_attack_exactly(self):
        clean = run_training(tiny_cfg("attack.kind = none\n"), 4)
        gated = run_training(tiny_cfg("attack.kind = dgrp\nattack.p = 0\n"), 4)
        assert gated.total_fires == 0
        assert np.array_equal(clean.r_true, gated.r_true)
        assert np.array_equal(clean.p_s, gated.p_s)
        assert np.array_equal(clean.eval_rate, gated.eval_rate)

    def test_poisoned_reward_only_on_fired_steps(self):
        log = run_training(tiny_cfg("attack.kind = dgrp\nattack.delta = 1.5\n"), 1)
        fired = log.fired.astype(bool)
        assert np.array_equal(log.r_train[~fired], log.r_true[~fired])
        assert np.allclose(log.r_true[fired] - log.r_train[fired], 1.5)

    def test_fire_rate_accounting(self):
        log = run_training(tiny_cfg("attack.kind = periodic\n"), 2)
        assert log.fire_rate == log.total_fires / (300 - 20)

    def test_dgrp_never_fires_before_window_or_warmup(self):
        log = run_training(tiny_cfg("attack.kind = dgrp\nattack.p = 1\n"), 0)
        first_possible = max(20, 40 - 1)
        assert log.fired[:first_possible].sum() == 0

    def test_constraint_safety_every_step(self):
        log = run_training(tiny_cfg("attack.kind = dgrp\n"), 5)
        assert np.all(log.p_s >= 0)
        assert np.all(log.rate >= 0)


class TestFailureHandling:
    def test_divergent_run_marked_failed(self):
        log = run_training(tiny_cfg("sac.lr = 1e300\n"), 0)
        assert log.failed
        assert log.failure_reason
        assert len(log) < 300

    def test_healthy_run_not_failed(self):
        assert not run_training(tiny_cfg(), 0).failed


class TestRunMany:
    def test_parallel_equals_serial(self):
        cfg = tiny_cfg()
        serial = run_many(cfg, seeds=(0, 1))
        parallel_cfg = apply_override(cfg, "run.workers", "2")
        parallel = run_many(parallel_cfg, seeds=(0, 1))
        for a, b in zip(serial, parallel):
            assert a.seed == b.seed
            assert a.to_trace_csv() == b.to_trace_csv()


class TestTraceCsv:
    def test_header_schema(self):
        log = run_training(tiny_cfg(), 0)
        header = log.to_trace_csv().splitlines()[0]
        assert header == "seed,t,r_true,r_train,fired,eligible,signal,threshold,p_s,rate"

    def test_round_trip(self):
        log = run_training(tiny_cfg("attack.kind = dgrp\n"), 1)
        back = RunLog.from_trace_csv(log.to_trace_csv(), warm_steps=20)
        assert np.array_equal(back.r_true, log.r_true)
        assert np.array_equal(back.fired, log.fired)
        assert np.array_equal(back.threshold, log.threshold, equal_nan=True)
        assert back.seed == log.seed
        assert back.to_trace_csv() == log.to_trace_csv()

    def test_rejects_garbage(self):
        with pytest.raises(ValueError):
            RunLog.from_trace_csv("not,a,trace\n1,2,3\n")
