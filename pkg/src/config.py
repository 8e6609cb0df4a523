"""
配置 - config.json 读取与单次运行参数 RunConfig

优先级：命令行参数 > config.json > 代码默认值；环境变量 SCATLAB_CONFIG 可指向另一份配置文件
"""
import json
import logging
import os
from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from errors import DataFormatError, UsageError

logger = logging.getLogger(__name__)

ROOT_DIR = Path(__file__).parent.parent
CONFIG_PATH = ROOT_DIR / "config.json"
DATA_DIR = ROOT_DIR / "data"


def config_path(override: Optional[str] = None) -> Path:
    if override:
        return Path(override)
    env = os.environ.get("SCATLAB_CONFIG")
    return Path(env) if env else CONFIG_PATH


def load_config(path: Optional[str] = None) -> dict:
    """读取 JSON 配置；文件不存在时返回空字典（全部走代码默认值）"""
    p = config_path(path)
    if not p.exists():
        logger.debug(f"配置文件 {p} 不存在，使用默认值")
        return {}
    try:
        return json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise DataFormatError(f"配置文件不是合法 JSON: {e.msg}", str(p), e.lineno)


def section(cfg: dict, name: str) -> dict:
    return dict(cfg.get(name) or {})


class RunConfig(BaseModel):
    """一次 CLI 调用的全部参数，分发前整体校验"""
    command: Literal["herglotz", "farfield", "verify", "fit", "plot", "sweep"]
    identity: Optional[str] = None
    dim_n: Optional[int] = None
    kappa: Optional[float] = None
    kappa_list: list[float] = Field(default_factory=list)
    grid_m: Optional[int] = None
    max_count: Optional[int] = None
    sigma_floor: Optional[float] = None
    resolution: Optional[int] = None
    ell: int = 0
    ellmax: int = 50
    trials: int = 1000
    out: Optional[str] = None
    inputs: list[str] = Field(default_factory=list)
    logx: bool = True
    logy: bool = True
    threads: int = 0
    seed: Optional[int] = None

    @field_validator("dim_n")
    @classmethod
    def check_dim(cls, v):
        if v is not None and v not in (2, 3):
            raise ValueError("只支持 n = 2 或 3")
        return v

    @field_validator("kappa")
    @classmethod
    def check_kappa(cls, v):
        if v is not None and not v > 0:
            raise ValueError("κ 必须为正")
        return v

    @field_validator("kappa_list")
    @classmethod
    def check_kappa_list(cls, v):
        if any(not k > 0 for k in v):
            raise ValueError("κ 列表中的值必须全部为正")
        return v

    @field_validator("grid_m", "max_count")
    @classmethod
    def check_positive_int(cls, v):
        if v is not None and v < 1:
            raise ValueError("必须为正整数")
        return v

    @field_validator("sigma_floor")
    @classmethod
    def check_floor(cls, v):
        if v is not None and not v > 0:
            raise ValueError("必须为正")
        return v

    @field_validator("resolution")
    @classmethod
    def check_resolution(cls, v):
        if v is not None and v < 4:
            raise ValueError("至少为 4")
        return v

    @field_validator("ell", "ellmax")
    @classmethod
    def check_degree(cls, v):
        if v < 0:
            raise ValueError("球谐次数不能为负")
        return v

    @field_validator("trials")
    @classmethod
    def check_trials(cls, v):
        if v < 1:
            raise ValueError("至少 1 次")
        return v

    @model_validator(mode="after")
    def check_combination(self):
        if self.command in ("herglotz", "farfield") and (self.dim_n is None or self.kappa is None):
            raise ValueError(f"{self.command} 需要 n 与 kappa")
        if self.command == "sweep" and (self.dim_n is None or not self.kappa_list):
            raise ValueError("sweep 需要 n 与 kappa_list")
        if self.command == "sweep" and len(set(self.kappa_list)) != len(self.kappa_list):
            raise ValueError("kappa_list 中有重复的 κ")
        if self.command == "verify":
            if self.identity == "ah-limit" and any(b <= a for a, b in zip(self.kappa_list, self.kappa_list[1:])):
                raise ValueError("ah-limit 的 kappa_list 必须严格递增")
            if self.identity == "determinant" and self.seed is None:
                raise ValueError("determinant 随机试验必须显式给出 seed")
        if self.command in ("fit", "plot") and not self.inputs:
            raise ValueError(f"{self.command} 需要至少一个输入文件 (inputs)")
        return self


def build_run_config(**fields) -> RunConfig:
    """构造 RunConfig，校验失败转为 UsageError，消息点名字段"""
    try:
        return RunConfig(**fields)
    except ValidationError as e:
        parts = []
        for err in e.errors():
            loc = ".".join(str(p) for p in err["loc"]) or "config"
            parts.append(f"{loc}: {err['msg']}")
        raise UsageError("; ".join(parts))
