import numpy as np
import pytest

import main


@pytest.fixture
def rng():
    return np.random.default_rng(20240501)


@pytest.fixture
def cli(monkeypatch, tmp_path):
    """运行 CLI，返回退出码；默认不读写缓存，配置指向仓库内 config.json"""
    monkeypatch.delenv("SCATLAB_CONFIG", raising=False)

    def run(*argv: str) -> int:
        args = list(argv)
        if "--no-cache" not in args and args and args[0] in ("herglotz", "sweep", "verify"):
            args.append("--no-cache")
        return main.run(args)

    return run
