"""Command-line surface: one subcommand per experiment, reproducible output."""
import argparse
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from loguru import logger
from pydantic import ValidationError

from sturmian_targets.api.schemas import (
    ConvergentRow,
    CountOut,
    ErrorResponse,
    RationalOut,
    RunConfig,
    ThmBConfig,
)
from sturmian_targets.config.settings import settings
from sturmian_targets.models.cf_core import PRESETS, Alpha, make_alpha, parse_alpha, theta
from sturmian_targets.models.errors import ConfigError, SturmianError, VerificationError
from sturmian_targets.models.intervals import frac_part
from sturmian_targets.models.rotation_coder import atoms
from sturmian_targets.models.targets import count_undetermined, j_intervals, measure_V, per_j_rows
from sturmian_targets.services import experiments, monte_carlo
from sturmian_targets.services.export import exporter, to_jsonable
from sturmian_targets.services.sampling import sample_alpha
from sturmian_targets.services.verification import run_suites

EXIT_CODES = {"config": 2, "domain": 2, "horizon": 2, "verification": 1, "sampling": 1}


@dataclass
class Outcome:
    result: Any
    rows: List[Dict[str, Any]]
    plot: List[Tuple[Any, Any]] = field(default_factory=list)
    plot_columns: Tuple[str, str] = ("x", "y")
    failed: Optional[str] = None  ## set when a verification failed after the output was built


def parse_point(text: str) -> Fraction:
    """'rat:1/3' or '1/3' as a point of [0, 1)."""
    body = text.strip()
    if body.startswith("rat:"):
        body = body[4:]
    try:
        return frac_part(Fraction(body))
    except (ValueError, ZeroDivisionError) as e:
        raise ConfigError(f"cannot parse point {text!r}: {e}") from e


def parse_rational_flag(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as e:
        raise ConfigError(f"cannot parse rational {text!r}: {e}") from e


def parse_checkpoints(text: str, alpha: Alpha) -> List[int]:
    """Comma-separated times; a token qK stands for N = q_K - 1."""
    checkpoints = []
    for token in filter(None, (tok.strip() for tok in text.split(","))):
        try:
            checkpoints.append(alpha.q(int(token[1:])) - 1 if token[0] == "q" else int(token))
        except ValueError as e:
            raise ConfigError(f"cannot parse checkpoint {token!r}: {e}") from e
    if not checkpoints:
        raise ConfigError("no checkpoints given")
    return checkpoints


def _rows(models: Sequence[Any]) -> List[Dict[str, Any]]:
    return to_jsonable(list(models))


def run_cf(args, alpha: Alpha) -> Outcome:
    rows = []
    for k in range(0, alpha.horizon_k + 1):
        c = alpha.convergent(k)
        rows.append(ConvergentRow(
            k=k, a=alpha.a(k) if k >= 1 else None, p=str(c.p), q=str(c.q), theta=RationalOut.of(theta(alpha, k)),
        ))
    plot = [(row.k, row.theta.approx) for row in rows]
    return Outcome({"alpha": alpha.to_json(), "convergents": to_jsonable(rows)}, _rows(rows), plot, ("k", "theta"))


def run_targets(args, alpha: Alpha) -> Outcome:
    if args.atoms is not None:
        rows = atoms(alpha, args.atoms).rows()
        return Outcome({"alpha": alpha.spec, "j": args.atoms, "atoms": rows}, rows)
    N = args.N or 50
    x = parse_point(args.x) if args.x else None
    if args.dump_per_j:
        rows = per_j_rows(alpha, N, x)
        plot = [(row["j"], row["chi"] if x is not None else row["lambda_num"] + "/" + row["lambda_den"]) for row in rows]
        return Outcome({"alpha": alpha.spec, "N": N, "rows": rows}, rows, plot, ("j", "chi" if x is not None else "lambda"))
    rows = []
    for block in j_intervals(alpha, N):
        measure = measure_V(alpha, block.start)
        rows.append({
            "i": block.i, "b": block.b, "start": block.start, "stop": block.stop,
            "in_partition": block.in_partition, "lambda": to_jsonable(RationalOut.of(measure)),
        })
    return Outcome({"alpha": alpha.spec, "N": N, "blocks": rows}, rows)


def run_count(args, alpha: Alpha) -> Outcome:
    if not args.x or args.N is None:
        raise ConfigError("count needs --x and --N")
    report = count_undetermined(alpha, parse_point(args.x), args.N)
    out = CountOut(alpha=alpha.spec, x=RationalOut.of(report.x), N=report.N, count=report.count,
                   measure_sum=RationalOut.of(report.measure_sum))
    return Outcome(out, _rows([out]))


def _verify_alphas(args) -> List[Alpha]:
    if args.alpha:
        return [parse_alpha(args.alpha, args.tail)]
    alphas = [make_alpha(name, args.tail) for name in ("golden-40", "twos-30", "pattern-123-30")]
    alphas += [sample_alpha(args.seed, 30, idx, args.tail) for idx in range(args.samples or 20)]
    return alphas


def run_verify(args, alpha: Optional[Alpha]) -> Outcome:
    suites = run_suites(_verify_alphas(args), args.oracle_max, args.seed, args.jobs)
    failed = [s.name for s in suites if not s.passed]
    outcome = Outcome(suites, _rows(suites))
    if failed:
        outcome.failed = f"suites failed: {', '.join(failed)}"
    return outcome


def run_thmA(args, alpha: Alpha) -> Outcome:
    checkpoints = parse_checkpoints(args.checkpoints or "q15,q20,q25,q30", alpha)
    if args.x:
        series = experiments.theorem_a_ratio(alpha, parse_point(args.x), checkpoints)
        plot = [(p.N, p.ratio) for p in series.points]
        return Outcome(series, _rows(series.points), plot, ("N", "ratio"))
    sweep = experiments.theorem_a_sweep(alpha, checkpoints, args.samples or 100, args.seed, args.jobs)
    medians = [experiments.median_distance_from_one(sweep, pos) for pos in range(len(checkpoints))]
    rows = [
        dict(sample=idx, x=to_jsonable(s.x), **to_jsonable(point))
        for idx, s in enumerate(sweep) for point in s.points
    ]
    result = {"series": to_jsonable(sweep), "median_distance_from_one": dict(zip(map(str, checkpoints), medians))}
    return Outcome(result, rows, list(zip(checkpoints, medians)), ("N", "median_abs_ratio_minus_one"))


def _thmb_config(args, m: int) -> ThmBConfig:
    values = {"m": m}
    for name in ("rho", "sigma", "C"):
        if getattr(args, name):
            values[name] = parse_rational_flag(getattr(args, name))
    try:
        return ThmBConfig(**values)
    except ValidationError as e:
        raise ConfigError(f"invalid thmB parameters: {e.errors()[0]['msg']}") from e


def run_thmB(args, alpha: Optional[Alpha]) -> Outcome:
    if args.oscillation:
        kwargs = {"seed": args.seed}
        if args.alpha:
            if not (args.m and args.m2):
                raise ConfigError("--oscillation with --alpha needs --m and --m2")
            kwargs.update(alpha=alpha, m1=args.m, m2=args.m2)
        for name in ("rho", "sigma", "C"):
            if getattr(args, name):
                kwargs[name] = parse_rational_flag(getattr(args, name))
        report = experiments.theorem_b_oscillation(**kwargs)
        outcome = Outcome(report, _rows([report]))
    else:
        if args.alpha:
            if not args.m:
                raise ConfigError("thmB with --alpha needs --m")
            cfg = _thmb_config(args, args.m)
        else:
            cfg = _thmb_config(args, 11)
            alpha = experiments.theorem_b_alpha(k=10, C=cfg.C, tail=args.tail)
        report = experiments.theorem_b_experiment(alpha, cfg, args.samples or 50, args.seed, args.jobs)
        outcome = Outcome(report, _rows(report.pairs))
    if not report.ok:
        outcome.failed = "thmB construction check failed"
    return outcome


def run_mc_wn(args, alpha: Optional[Alpha]) -> Outcome:
    estimate = monte_carlo.monte_carlo_Wn(args.n or 10, args.samples or 10_000, args.seed, args.jobs)
    return Outcome(estimate, _rows([estimate]))


def run_mc_bigtime(args, alpha: Optional[Alpha]) -> Outcome:
    C = parse_rational_flag(args.C) if args.C else Fraction(1)
    stats = monte_carlo.find_large_element(args.seed, C, args.n or 50, args.samples or 10_000, args.jobs)
    result: Dict[str, Any] = {"large_element": to_jsonable(stats)}
    rows = [{"m": m, "first_m": count, "g_m_hits": stats.g_m_hits.get(m, 0)} for m, count in stats.first_m.items()]
    if args.growth:
        result["growth"] = to_jsonable(monte_carlo.sum_ai_growth(args.seed, samples=args.samples or 1000, jobs=args.jobs))
    if args.gauss_kuzmin:
        result["gauss_kuzmin"] = to_jsonable(monte_carlo.gauss_kuzmin_check(args.samples or 10_000, args.seed, jobs=args.jobs))
    plot = sorted(stats.first_m.items())
    outcome = Outcome(result, rows, plot, ("m", "first_m"))
    if not stats.implication_ok:
        outcome.failed = "G_m held without a large element"
    return outcome


HANDLERS: Dict[str, Callable[[argparse.Namespace, Optional[Alpha]], Outcome]] = {
    "cf": run_cf,
    "targets": run_targets,
    "count": run_count,
    "verify": run_verify,
    "thmA": run_thmA,
    "thmB": run_thmB,
    "mc-wn": run_mc_wn,
    "mc-bigtime": run_mc_bigtime,
}
NEEDS_ALPHA = {"cf", "targets", "count", "thmA"}


class CliParser(argparse.ArgumentParser):
    """Usage errors become ConfigError so they leave through the JSON error line."""

    def error(self, message: str):
        raise ConfigError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--alpha", help="cf:1,2,3 | rat:p/q | preset:NAME " f"({', '.join(sorted(PRESETS))})")
    common.add_argument("--tail", type=int, default=None, help="tail element M of the rational proxy")
    common.add_argument("--x", help="point of the circle as p/q or rat:p/q")
    common.add_argument("--N", type=int)
    common.add_argument("--n", type=int)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--samples", type=int)
    common.add_argument("--jobs", type=int, default=None)
    common.add_argument("--format", dest="fmt", choices=("csv", "json"), default="json")
    common.add_argument("--output", help="output file; relative paths land under the output directory")
    common.add_argument("--plot-data", help="also write two-column plot data to this file")
    common.add_argument("--verbose", action="store_true")

    parser = CliParser(prog="sturmian-targets", description="Exact Sturmian shrinking-target experiments")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    sub.add_parser("cf", parents=[common], help="convergents and approximation errors")
    targets = sub.add_parser("targets", parents=[common], help="J-interval blocks or a per-time dump")
    targets.add_argument("--dump-per-j", action="store_true")
    targets.add_argument("--atoms", type=int, metavar="J", help="dump the atoms of the step-J coding partition")
    sub.add_parser("count", parents=[common], help="hits of x against the measure sum up to N")
    verify = sub.add_parser("verify", parents=[common], help="run every invariant suite")
    verify.add_argument("--oracle-max", type=int, default=None)
    thm_a = sub.add_parser("thmA", parents=[common], help="log-ratio series")
    thm_a.add_argument("--checkpoints", help="comma-separated N or qK tokens")
    thm_b = sub.add_parser("thmB", parents=[common], help="gap construction around a huge element")
    thm_b.add_argument("--m", type=int)
    thm_b.add_argument("--m2", type=int)
    thm_b.add_argument("--rho")
    thm_b.add_argument("--sigma")
    thm_b.add_argument("--C")
    thm_b.add_argument("--oscillation", action="store_true")
    sub.add_parser("mc-wn", parents=[common], help="Monte Carlo estimate of the small-sum set")
    bigtime = sub.add_parser("mc-bigtime", parents=[common], help="Monte Carlo search for a dominating element")
    bigtime.add_argument("--C")
    bigtime.add_argument("--growth", action="store_true")
    bigtime.add_argument("--gauss-kuzmin", action="store_true")
    return parser


def run_config(args: argparse.Namespace) -> RunConfig:
    flags = [name.replace("_", "-") for name in ("dump_per_j", "oscillation", "growth", "gauss_kuzmin")
             if getattr(args, name, False)]
    if getattr(args, "atoms", None) is not None:
        flags.append(f"atoms:{args.atoms}")
    if getattr(args, "m2", None):
        flags.append(f"m2:{args.m2}")
    if args.tail is not None:
        flags.append(f"tail:{args.tail}")
    return RunConfig(
        subcommand=args.subcommand, alpha=args.alpha, x=args.x, N=args.N, n=args.n,
        m=getattr(args, "m", None), rho=getattr(args, "rho", None), sigma=getattr(args, "sigma", None),
        C=getattr(args, "C", None), seed=args.seed, samples=args.samples,
        checkpoints=getattr(args, "checkpoints", None), oracle_max=getattr(args, "oracle_max", None),
        extra=",".join(flags) or None, fmt=args.fmt,
    )


def setup_logging(verbose: bool):
    logger.remove()
    logger.add(sys.stderr, level="DEBUG" if verbose else settings.log_level)


def _fail(error: SturmianError) -> int:
    logger.error(f"{error.code}: {error}")
    sys.stderr.write(ErrorResponse(error=error.code, message=str(error)).model_dump_json() + "\n")
    return EXIT_CODES.get(error.code, 1)


def run(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except ConfigError as e:
        setup_logging(False)
        return _fail(e)
    setup_logging(args.verbose)
    started = time.perf_counter()
    try:
        config = run_config(args)
        alpha = None
        if args.alpha:
            alpha = parse_alpha(args.alpha, args.tail)
        elif args.subcommand in NEEDS_ALPHA:
            alpha = make_alpha("golden-40", args.tail)
        logger.info(f"{args.subcommand}: {config.canonical()}")
        outcome = HANDLERS[args.subcommand](args, alpha)

        if args.fmt == "csv":
            text = exporter.table(outcome.rows, config)
        else:
            text = exporter.document(outcome.result, config)
        elapsed = time.perf_counter() - started
        exporter.emit(text, args.output, config, elapsed)
        if args.plot_data:
            if outcome.plot:
                exporter.emit(exporter.plot_data(outcome.plot, outcome.plot_columns, config), args.plot_data, config, elapsed)
            else:
                logger.warning(f"{args.subcommand} has no plot data")
        if outcome.failed:
            raise VerificationError(outcome.failed)
    except SturmianError as e:
        return _fail(e)
    except ValidationError as e:
        return _fail(ConfigError(str(e)))
    logger.info(f"{args.subcommand} finished in {time.perf_counter() - started:.2f}s")
    return 0


def main():
    sys.exit(run())
