import pytest

from msana.config import ConfigError, PipelineConfig, from_dict, load_config


def test_defaults_validate():
    cfg = from_dict({}, environ={})
    assert cfg.ensemble.epsilon == 0.001 and cfg.ensemble.alpha_ratio == 0.1
    assert cfg.drift.dual_window == 100 and cfg.feature_selection.fs_k == 20
    assert cfg.learners.arf.lam == 6.0 and cfg.evaluation.train_fraction == 0.1


@pytest.mark.parametrize("data,needle", [
    ({"bogus": 1}, "bogus"),
    ({"ensemble": {"epsiloon": 1}}, "ensemble.epsiloon"),
    ({"learners": {"arf": {"trees": 3}}}, "learners.arf.trees"),
])
def test_unknown_keys_named(data, needle):
    with pytest.raises(ConfigError, match=needle):
        from_dict(data, environ={})


@pytest.mark.parametrize("data", [
    {"seed": "one"},
    {"ensemble": {"window_from_drift_index": "yes"}},
    {"preprocessing": {"scaler": "robust"}},
    {"drift": {"eddm_alpha": 0.8, "eddm_beta": 0.9}},
    {"evaluation": {"train_fraction": 1.5}},
    {"stream": {"source": "csv"}},
    {"threads": 0},
    {"ensemble": 3},
])
def test_invalid_values(data):
    with pytest.raises(ConfigError):
        from_dict(data, environ={})


def test_env_override():
    env = {"MSANA_CFG__ENSEMBLE__EPSILON": "0.01", "MSANA_CFG__SEED": "9", "OTHER": "x"}
    data = {"ensemble": {"alpha_ratio": 0.2}}
    cfg = from_dict(data, environ=env)
    assert cfg.ensemble.epsilon == 0.01 and cfg.seed == 9 and cfg.ensemble.alpha_ratio == 0.2
    assert data == {"ensemble": {"alpha_ratio": 0.2}}


def test_env_override_unknown_key_rejected():
    with pytest.raises(ConfigError, match="drift.nope"):
        from_dict({}, environ={"MSANA_CFG__DRIFT__NOPE": "1"})


def test_load_resolves_relative_paths(tmp_path):
    (tmp_path / "cfg.yaml").write_text("stream:\n  source: csv\n  path: data/x.csv\n  schema: s.yaml\n")
    cfg = load_config(tmp_path / "cfg.yaml", environ={})
    assert cfg.stream.path == str(tmp_path / "data" / "x.csv")
    assert cfg.stream.schema == str(tmp_path / "s.yaml")


def test_load_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.yaml", environ={})
    (tmp_path / "bad.yaml").write_text("a: [1,\n")
    with pytest.raises(ConfigError):
        load_config(tmp_path / "bad.yaml", environ={})


def test_round_trip_dict():
    cfg = PipelineConfig()
    assert from_dict(cfg.to_dict(), environ={}).to_dict() == cfg.to_dict()
