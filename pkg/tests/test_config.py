import json

import pytest

from config import CONFIG_PATH, build_run_config, config_path, load_config, section
from deps import parallel_map, resolve_threads
from errors import DataFormatError, UsageError


def test_repo_config_has_all_sections():
    cfg = load_config(str(CONFIG_PATH))
    for name in ("herglotz", "farfield", "eigen", "quadrature", "verify", "cache", "logging"):
        assert section(cfg, name), name
    assert section(cfg, "missing") == {}


def test_env_override(monkeypatch, tmp_path):
    alt = tmp_path / "alt.json"
    alt.write_text(json.dumps({"threads": 3}), encoding="utf-8")
    monkeypatch.setenv("SCATLAB_CONFIG", str(alt))
    assert config_path() == alt
    assert load_config()["threads"] == 3
    assert config_path("other.json").name == "other.json"


def test_missing_and_invalid_config(tmp_path):
    assert load_config(str(tmp_path / "none.json")) == {}
    bad = tmp_path / "bad.json"
    bad.write_text('{"a": 1,\n oops}', encoding="utf-8")
    with pytest.raises(DataFormatError) as err:
        load_config(str(bad))
    assert err.value.line == 2


def test_run_config_names_fields():
    with pytest.raises(UsageError, match="dim_n"):
        build_run_config(command="herglotz", dim_n=5, kappa=1.0)
    with pytest.raises(UsageError, match="kappa"):
        build_run_config(command="farfield", dim_n=2, kappa=0.0)
    with pytest.raises(UsageError, match="kappa_list"):
        build_run_config(command="sweep", kappa_list=[1.0, -2.0])
    with pytest.raises(UsageError):
        build_run_config(command="fit")
    assert build_run_config(command="herglotz", dim_n=3, kappa=2.0).kappa == 2.0


def test_parallel_map_keeps_order():
    items = list(range(50))
    assert parallel_map(lambda x: x * x, items, 8) == [x * x for x in items]
    assert parallel_map(lambda x: x, [], 4) == []
    assert resolve_threads(0) >= 1
    assert resolve_threads(3) == 3


def test_verify_fields_are_checked():
    with pytest.raises(UsageError, match="resolution"):
        build_run_config(command="verify", identity="coarea2", resolution=2)
    with pytest.raises(UsageError, match="ell"):
        build_run_config(command="verify", identity="ah-limit", ell=-1)
    with pytest.raises(UsageError, match="trials"):
        build_run_config(command="verify", identity="determinant", seed=1, trials=0)
    with pytest.raises(UsageError, match="seed"):
        build_run_config(command="verify", identity="determinant")
    with pytest.raises(UsageError, match="递增"):
        build_run_config(command="verify", identity="ah-limit", kappa_list=[10.0, 10.0])
    run = build_run_config(command="verify", identity="ah-limit", ell=3, kappa_list=[10.0, 40.0])
    assert run.ell == 3 and run.resolution is None


def test_sweep_needs_distinct_kappas():
    with pytest.raises(UsageError, match="重复"):
        build_run_config(command="sweep", dim_n=2, kappa_list=[2.0, 2.0])
    assert build_run_config(command="sweep", dim_n=2, kappa_list=[2.0, 2.0000001]).kappa_list[1] == 2.0000001
