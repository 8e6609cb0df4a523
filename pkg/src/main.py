"""
命令行主入口 - 散射奇异值实验室 v0.1

退出码：0 成功 / 1 用法错误 / 2 计算失败 / 3 校验未通过
"""
import argparse
import logging
import sys
from typing import Optional, Sequence

from config import load_config, section
from errors import LabError, UsageError

# 子命令模块
from commands import farfield, fit, herglotz, plot, sweep, verify

logger = logging.getLogger(__name__)


class ArgumentParser(argparse.ArgumentParser):
    """argparse 的错误改为抛 UsageError，统一走退出码 1"""

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def common_parser() -> argparse.ArgumentParser:
    p = ArgumentParser(add_help=False)
    p.add_argument("--threads", type=int, default=None, help="线程数，0 表示 CPU 核数")
    p.add_argument("--seed", type=int, help="随机种子（随机化校验必填）")
    p.add_argument("--config", help="配置文件路径，缺省为 config.json 或 $SCATLAB_CONFIG")
    p.add_argument("--verbose", action="store_true", help="DEBUG 级别日志")
    p.add_argument("--no-cache", action="store_true", help="不读写 Λ 表缓存")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = ArgumentParser(prog="scatlab", description="Herglotz 与远场算子的奇异值谱实验")
    subparsers = parser.add_subparsers(dest="command", required=True, parser_class=ArgumentParser)
    parents = [common_parser()]

    # ==================== 注册子命令 ====================
    herglotz.register(subparsers, parents)
    farfield.register(subparsers, parents)
    verify.register(subparsers, parents)
    fit.register(subparsers, parents)
    plot.register(subparsers, parents)
    sweep.register(subparsers, parents)
    return parser


def setup_logging(cfg: dict, verbose: bool):
    level = "DEBUG" if verbose else section(cfg, "logging").get("level", "INFO")
    logging.basicConfig(level=level, stream=sys.stderr, force=True,
                        format="%(levelname)s %(name)s: %(message)s")


def run(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        cfg = load_config(args.config)
        setup_logging(cfg, args.verbose)
        if args.threads is None:
            args.threads = int(cfg.get("threads", 0))
        logger.debug(f"🚀 {args.command} 开始")
        return args.func(args, cfg)
    except LabError as e:
        if not logging.getLogger().handlers:
            logging.basicConfig(level=logging.INFO, stream=sys.stderr)
        logger.error(f"❌ {e.detail}")
        return e.exit_code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
