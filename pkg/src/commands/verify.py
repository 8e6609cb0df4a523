"""
verify 子命令 - 恒等式校验，JSON lines 输出；任一未通过时退出码 3
"""
import argparse
import logging
import sys

from commands.common import float_list, herglotz_quad
from config import RunConfig, build_run_config, section
from data import write_json_lines
from deps import parallel_map, resolve_threads
from errors import UsageError, VerificationError
from identities import (
    HS_PROFILES,
    PROFILES,
    IdentityReport,
    check_ah_limit,
    check_coarea,
    check_hs_norm,
    cross_check,
    determinant_trials,
)

logger = logging.getLogger(__name__)

IDENTITIES = ["coarea1", "coarea2", "hs-norm", "determinant", "ah-limit", "cross-check"]

DEFAULT_THRESHOLDS = {
    "coarea1": 1e-6,
    "coarea2": 1e-6,
    "hs_norm": 1e-6,
    "determinant": 1e-10,
    "ah_limit_rate": 2.0,
    "cross_check": 1e-8,
}


def register(subparsers, parents):
    p = subparsers.add_parser("verify", parents=parents, help="数值校验积分与代数恒等式")
    p.add_argument("identity", choices=IDENTITIES)
    p.add_argument("--n", type=int, help="维数；缺省时 2 和 3 都校验")
    p.add_argument("--h", help=f"径向剖面，coarea: {','.join(PROFILES)}；hs-norm: {','.join(HS_PROFILES)}；缺省全部")
    p.add_argument("--kappa", type=float, help="hs-norm / cross-check 的波数")
    p.add_argument("--kappas", type=float_list, default=[10.0, 40.0, 160.0], help="ah-limit 的递增 κ 列表")
    p.add_argument("--ell", type=int, default=0, help="ah-limit 的球谐次数")
    p.add_argument("--ellmax", type=int, default=50, help="cross-check 的最大 ℓ")
    p.add_argument("--trials", type=int, default=1000, help="determinant 随机试验次数")
    p.add_argument("--resolution", type=int, help="球面规则分辨率")
    p.add_argument("--out", help="输出 JSON lines 路径，缺省写到 stdout")
    p.set_defaults(func=run)


def _dims(run: RunConfig) -> list[int]:
    return [2, 3] if run.dim_n is None else [run.dim_n]


def _profiles(args, table: dict) -> list[str]:
    if args.h is None:
        return list(table)
    if args.h not in table:
        raise UsageError(f"--h: 未知剖面 {args.h}，可选 {', '.join(table)}")
    return [args.h]


def collect_reports(run: RunConfig, args: argparse.Namespace, cfg: dict) -> list[IdentityReport]:
    thresholds = {**DEFAULT_THRESHOLDS, **section(cfg, "verify")}
    quad_cfg = section(cfg, "quadrature")
    resolution = run.resolution or quad_cfg.get("sphere_resolution", 24)
    sphere_opts = {"resolution": resolution,
                   "radial_panels": quad_cfg.get("radial_panels", 8),
                   "gl_points": quad_cfg.get("gl_points", 16)}
    threads = resolve_threads(run.threads)

    if run.identity in ("coarea1", "coarea2"):
        which = 1 if run.identity == "coarea1" else 2
        jobs = [(n, name) for n in _dims(run) for name in _profiles(args, PROFILES)]
        reports = parallel_map(
            lambda job: check_coarea(job[0], which, PROFILES[job[1]], profile_name=job[1], **sphere_opts),
            jobs, threads)
        return [r.judged(thresholds[run.identity]) for r in reports]

    if run.identity == "hs-norm":
        kappa = run.kappa or 1.0
        jobs = [(n, name) for n in _dims(run) for name in _profiles(args, HS_PROFILES)]
        reports = parallel_map(
            lambda job: check_hs_norm(job[0], kappa, HS_PROFILES[job[1]], profile_name=job[1], **sphere_opts),
            jobs, threads)
        return [r.judged(thresholds["hs_norm"]) for r in reports]

    if run.identity == "determinant":
        return [r.judged(thresholds["determinant"]) for r in determinant_trials(run.trials, run.seed)]

    quad = herglotz_quad(cfg, args)
    if run.identity == "ah-limit":
        reports = []
        for n in _dims(run):
            for r in check_ah_limit(n, run.ell, run.kappa_list, **quad):
                # O(1/κ) 速率：κ·rel_diff 有界
                bound = thresholds["ah_limit_rate"] * (1 + run.ell)
                r.parameters["rate_bound"] = bound
                reports.append(r.model_copy(update={"passed": r.rel_diff * r.parameters["kappa"] <= bound}))
        return reports

    kappa = run.kappa or 5.0
    reports = []
    for r in cross_check(kappa, run.ellmax, threads=threads, **quad):
        ok = r.parameters["below_floor"] or r.rel_diff <= thresholds["cross_check"]
        reports.append(r.model_copy(update={"passed": bool(ok)}))
    return reports


def run(args: argparse.Namespace, cfg: dict) -> int:
    run_cfg = build_run_config(command="verify", identity=args.identity, dim_n=args.n, kappa=args.kappa,
                               kappa_list=args.kappas, ell=args.ell, ellmax=args.ellmax, trials=args.trials,
                               resolution=args.resolution, out=args.out, threads=args.threads, seed=args.seed)
    reports = collect_reports(run_cfg, args, cfg)
    text = write_json_lines((r.as_record() for r in reports), run_cfg.out)
    if run_cfg.out is None:
        sys.stdout.write(text)
    failed = [r for r in reports if not r.passed]
    logger.info(f"{args.identity}: {len(reports) - len(failed)}/{len(reports)} 通过")
    if failed:
        worst = max(failed, key=lambda r: r.rel_diff)
        raise VerificationError(f"{args.identity}: {len(failed)} 项未通过，最大 rel_diff = {worst.rel_diff:.3e}")
    return 0
