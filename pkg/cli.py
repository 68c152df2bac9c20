import argparse
import sys
from dataclasses import dataclass
from typing import Optional, Sequence, TextIO

from curve import CurveEngine
from derham import TwistedDeRham
from errors import DimensionDeficiencyError, ExpHodgeError, IntegrityError, LaurentParseError
from laurent import LaurentPolynomial, format_laurent, parse_laurent
from models import CheckResult
from nondegen import DEGENERATE, is_nondegenerate
from polytope import contains_origin_interior, newton_polytope, normalized_volume
from report_manager import ReportManager
from settings import DEFAULT_PRIME_COUNT, configure_logging, create_logger, resolve_seed
from spectrum import MODES, AnalysisOptions, AnalysisService

logger = create_logger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_PARSE = 2
EXIT_DEGENERATE = 3
EXIT_DIMENSION = 4
EXIT_INTEGRITY = 5


@dataclass
class CliConfig:
    command: str
    poly: str
    var_names: Optional[tuple[str, ...]] = None
    mode: str = "both"
    certify: bool = False
    seed: Optional[int] = None
    primes: int = DEFAULT_PRIME_COUNT
    truncation: Optional[int] = None
    output: str = "text"
    threads: int = 1
    require_nondegenerate: bool = False
    plot: Optional[str] = None
    timing: bool = False
    dump_matrices: Optional[str] = None
    accelerated_rank: bool = False
    verbosity: int = 0

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "CliConfig":
        names = tuple(name.strip() for name in args.vars.split(",") if name.strip()) if args.vars else None
        return cls(command=args.command, poly=args.poly, var_names=names, mode=args.mode, certify=args.certify,
                   seed=resolve_seed(args.seed), primes=args.primes, truncation=args.truncation,
                   output="json" if args.json else "text", threads=args.threads,
                   require_nondegenerate=args.require_nondegenerate, plot=args.plot, timing=args.timing,
                   dump_matrices=args.dump_matrices, accelerated_rank=args.accelerated_rank,
                   verbosity=args.verbose)

    def analysis_options(self, **overrides) -> AnalysisOptions:
        options = AnalysisOptions(mode=self.mode, certify=self.certify, seed=self.seed, primes=self.primes,
                                  threads=self.threads, truncation=self.truncation,
                                  accelerated_rank=self.accelerated_rank, timing=self.timing)
        for key, value in overrides.items():
            setattr(options, key, value)
        return options


class BaseCommand:
    def __init__(self, config: CliConfig):
        self.config = config

    def input_dict(self, f: LaurentPolynomial) -> dict:
        return ReportManager.input_to_dict(format_laurent(f), f.var_names, f.nvars)

    def dump(self, f: LaurentPolynomial) -> None:
        if self.config.dump_matrices:
            paths = TwistedDeRham(f).dump(0, self.config.dump_matrices)
            logger.info("wrote %s", ", ".join(paths))

    def execute(self, f: LaurentPolynomial) -> tuple[dict, str, int]:
        raise NotImplementedError


class AnalyzeCommand(BaseCommand):
    def execute(self, f: LaurentPolynomial) -> tuple[dict, str, int]:
        report = AnalysisService(self.config.analysis_options()).analyze(f)
        self.dump(f)
        if self.config.plot:
            from plotting import plot_report

            spectrum = report.spectra.get("rank") or report.spectra.get("euler")
            plot_report(self.config.plot, report.polytope, spectrum)
        code = EXIT_OK
        if self.config.require_nondegenerate and report.nondegeneracy.verdict == DEGENERATE:
            code = EXIT_DEGENERATE
        return ReportManager.report_to_dict(report), ReportManager.render_text(report), code


class SpectrumCommand(BaseCommand):
    def execute(self, f: LaurentPolynomial) -> tuple[dict, str, int]:
        report = AnalysisService(self.config.analysis_options(checks=False, curve=False)).analyze(f)
        self.dump(f)
        if self.config.plot:
            from plotting import plot_report

            plot_report(self.config.plot, report.polytope, report.spectra.get("rank") or report.spectra.get("euler"))
        payload = {"input": self.input_dict(f),
                   "spectrum": {route: ReportManager.spectrum_to_list(s) for route, s in report.spectra.items()},
                   "warnings": list(report.warnings),
                   "timing_ms": report.timing_ms}
        lines = [ReportManager.spectrum_line(route, s) for route, s in report.spectra.items()]
        lines += [f"warning: {w}" for w in report.warnings]
        code = EXIT_OK
        if self.config.require_nondegenerate and report.nondegeneracy.verdict == DEGENERATE:
            code = EXIT_DEGENERATE
        return payload, "\n".join(lines) + "\n", code


class NondegenCommand(BaseCommand):
    def execute(self, f: LaurentPolynomial) -> tuple[dict, str, int]:
        report = is_nondegenerate(f, primes=self.config.primes, seed=self.config.seed, certify=self.config.certify,
                                  threads=self.config.threads)
        code = EXIT_DEGENERATE if self.config.require_nondegenerate and report.verdict == DEGENERATE else EXIT_OK
        payload = {"input": self.input_dict(f), "nondegeneracy": ReportManager.nondegeneracy_to_dict(report)}
        return payload, ReportManager.nondegeneracy_line(report) + "\n", code


class VolumeCommand(BaseCommand):
    def execute(self, f: LaurentPolynomial) -> tuple[dict, str, int]:
        polytope = newton_polytope(f)
        polytope.require_full_dimension()
        nvol = normalized_volume(polytope)
        interior = contains_origin_interior(polytope)
        if self.config.plot:
            from plotting import plot_report

            plot_report(self.config.plot, polytope)
        payload = {"input": self.input_dict(f), "polytope": ReportManager.polytope_to_dict(polytope, nvol, interior)}
        return payload, "\n".join(ReportManager.polytope_lines(polytope, nvol, interior)) + "\n", EXIT_OK


class CurveCommand(BaseCommand):
    def execute(self, f: LaurentPolynomial) -> tuple[dict, str, int]:
        curve = CurveEngine(f, self.config.truncation).compare()
        checks = {"curve_comparison": CheckResult(curve.passed),
                  "curve_duality": CheckResult(curve.duality.passed)}
        payload = {"input": self.input_dict(f), "curve": ReportManager.curve_to_dict(curve),
                   "checks": ReportManager.checks_to_dict(checks)}
        lines = ReportManager.curve_lines(curve) + [ReportManager.check_line(k, v) for k, v in checks.items()]
        return payload, "\n".join(lines) + "\n", EXIT_OK


class BettiCommand(BaseCommand):
    def execute(self, f: LaurentPolynomial) -> tuple[dict, str, int]:
        betti = TwistedDeRham(f, accelerated=self.config.accelerated_rank, seed=self.config.seed).betti_numbers()
        self.dump(f)
        payload = {"input": self.input_dict(f), "betti": betti}
        return payload, "betti: " + " ".join(str(b) for b in betti) + "\n", EXIT_OK


command_classes = {
    "analyze": AnalyzeCommand,
    "spectrum": SpectrumCommand,
    "nondegen": NondegenCommand,
    "volume": VolumeCommand,
    "curve": CurveCommand,
    "betti": BettiCommand,
}

command_help = {
    "analyze": "full report",
    "spectrum": "irregular Hodge spectrum only",
    "nondegen": "nondegeneracy verdict",
    "volume": "Newton polytope summary and normalized volume",
    "curve": "n = 1 filtration comparison and duality",
    "betti": "dimensions of H^i",
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("poly", help='Laurent polynomial, e.g. "x + x^-1"')
    common.add_argument("--vars", help="comma-separated variable names in order")
    common.add_argument("--mode", choices=MODES, default="both")
    common.add_argument("--certify", action="store_true", help="exact Gröbner bases over QQ for every face")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--primes", type=int, default=DEFAULT_PRIME_COUNT)
    common.add_argument("--truncation", type=int, default=None, help="Čech truncation bound B")
    common.add_argument("--json", action="store_true")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--require-nondegenerate", action="store_true")
    common.add_argument("--plot", metavar="FILE")
    common.add_argument("--timing", action="store_true")
    common.add_argument("--dump-matrices", metavar="DIR")
    common.add_argument("--accelerated-rank", action="store_true")
    common.add_argument("-v", "--verbose", action="count", default=0)

    parser = argparse.ArgumentParser(prog="exphodge",
                                     description="Irregular Hodge spectra of Laurent polynomials")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name in command_classes:
        subparsers.add_parser(name, parents=[common], help=command_help[name])
    return parser


def run(argv: Optional[Sequence[str]] = None, stdout: Optional[TextIO] = None,
        stderr: Optional[TextIO] = None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_PARSE
    configure_logging(args.verbose)

    try:
        config = CliConfig.from_args(args)
        f = parse_laurent(config.poly, config.var_names)
        payload, text, code = command_classes[config.command](config).execute(f)
    except LaurentParseError as e:
        print(f"parse error: {e}", file=stderr)
        return EXIT_PARSE
    except DimensionDeficiencyError as e:
        print(f"error: {e}", file=stderr)
        return EXIT_DIMENSION
    except IntegrityError as e:
        logger.error("integrity failure: %s", e)
        print(f"integrity failure: {e}", file=stderr)
        return EXIT_INTEGRITY
    except ExpHodgeError as e:
        print(f"error: {e}", file=stderr)
        return EXIT_FAILURE

    if config.output == "json":
        stdout.write(ReportManager.to_json(payload) + "\n")
    else:
        stdout.write(text)
    return code


def main() -> int:
    return run(sys.argv[1:])
