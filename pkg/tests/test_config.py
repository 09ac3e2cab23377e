import pytest

from rispoison.harness.config import ConfigError, RunConfig, apply_override, parse_config, parse_seeds


class TestDefaults:
    def test_empty_text_gives_simulation_defaults(self):
        cfg = parse_config("")
        assert cfg.attack.window == 200
        assert cfg.attack.warm_steps == 50
        assert cfg.attack.quantile == 0.75
        assert cfg.sac.gamma == 1.0
        assert cfg.sac.lr == 1e-3
        assert cfg.sac.entropy_coef == 0.2
        assert cfg.sac.buffer_capacity == 20_000
        assert cfg.sac.batch_size == 16
        assert cfg.env.max_power_db == 1.0
        assert cfg.env.interference_db == 10.0
        assert cfg.env.noise_var == 1e-2
        assert cfg.env.num_elements == 6
        assert cfg.seeds == tuple(range(10))
        assert cfg.total_steps == 5000
        assert cfg.ma_window == 200

    def test_comments_and_blank_lines(self):
        cfg = parse_config("# a comment\n\nenv.R = 4  # trailing comment\n")
        assert cfg.env.num_elements == 4


class TestParsing:
    def test_attack_keys(self):
        cfg = parse_config("attack.kind = dgrp\nattack.p = 0.5\nattack.delta = 2.5\n")
        assert cfg.attack.kind == "dgrp"
        assert cfg.attack.p == 0.5
        assert cfg.attack.delta == 2.5

    def test_seed_range(self):
        assert parse_seeds("0..9") == tuple(range(10))
        assert parse_seeds("3..5") == (3, 4, 5)
        assert parse_seeds("0,2,7") == (0, 2, 7)
        cfg = parse_config("run.seeds = 0..9\n")
        assert len(cfg.seeds) == 10

    def test_unknown_key_named_in_error(self):
        with pytest.raises(ConfigError, match="env.bogus"):
            parse_config("env.bogus = 3\n")

    def test_bad_value_reports_key(self):
        with pytest.raises(ConfigError, match="attack.p"):
            parse_config("attack.p = banana\n")

    def test_malformed_line(self):
        with pytest.raises(ConfigError, match="line 1"):
            parse_config("this is not a key value pair\n")

    def test_overrides_win(self):
        cfg = parse_config("env.R = 4\n", overrides={"env.R": "8"})
        assert cfg.env.num_elements == 8

    def test_boolean_values(self):
        cfg = parse_config("sac.auto_entropy = true\nsac.normalize_rewards = off\n")
        assert cfg.sac.auto_entropy is True
        assert cfg.sac.normalize_rewards is False


class TestValidation:
    def test_total_steps_must_exceed_warmup(self):
        with pytest.raises(ConfigError, match="total_steps"):
            parse_config("run.total_steps = 40\n")  # t_warm default 50

    def test_duplicate_seeds(self):
        with pytest.raises(ConfigError, match="seeds"):
            parse_config("run.seeds = 1,1,2\n")

    def test_empty_seeds(self):
        with pytest.raises(ConfigError, match="seeds"):
            parse_config("run.seeds = ,\n")

    def test_batch_larger_than_buffer(self):
        with pytest.raises(ConfigError, match="batch_size"):
            parse_config("sac.batch_size = 100\nsac.buffer_capacity = 10\n")

    def test_bad_attack_kind(self):
        with pytest.raises(ConfigError, match="kind"):
            parse_config("attack.kind = nosuch\n")

    def test_env_invariants(self):
        with pytest.raises(ConfigError):
            parse_config("env.R = 0\n")
        with pytest.raises(ConfigError):
            parse_config("env.n0 = 0\n")


def test_apply_override_does_not_mutate_base():
    base = RunConfig()
    derived = apply_override(base, "env.R", "12")
    assert base.env.num_elements == 6
    assert derived.env.num_elements == 12
    assert derived.sac is not base.sac or derived.env is not base.env
