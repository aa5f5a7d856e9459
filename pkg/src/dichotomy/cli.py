"""
Command-line front end: ``dichotomy spectral|certify|sweep|verify``.
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import Any
from typing import Dict
from typing import List
from typing import NoReturn
from typing import Optional
from typing import Sequence

import numpy as np

from dichotomy.config import ConfigError
from dichotomy.config import RunConfig
from dichotomy.linear import WindowTooSmallError
from dichotomy.mesh import make_torus_mesh
from dichotomy.mesh import MeshError
from dichotomy.mesh import ParameterMesh
from dichotomy.models import build_model
from dichotomy.nonlinear import certify_bifurcation
from dichotomy.nonlinear import Conclusion
from dichotomy.nonlinear import EvaluatorFailure
from dichotomy.nonlinear import NewtonOptions
from dichotomy.nonlinear import scan
from dichotomy.report import dump_document
from dichotomy.report import report_document
from dichotomy.report import write_document
from dichotomy.report import write_sweep_csv
from dichotomy.report import write_sweep_file
from dichotomy.spectral import as_real_matrix
from dichotomy.spectral import DichotomyError
from dichotomy.spectral import hyperbolic_splitting
from dichotomy.spectral import HyperbolicityViolation
from dichotomy.spectral import MatrixShapeError
from dichotomy.spectral import NotInvertibleError
from dichotomy.spectral import RealMatrix
from dichotomy.summary import render_summary
from dichotomy.verify import run_suites
from dichotomy.verify import SUITES
from dichotomy.verify import UnknownSuiteError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_NO_CERTIFICATE = 1
EXIT_ASSUMPTIONS = 2
EXIT_NUMERICAL = 3
EXIT_USAGE = 64
EXIT_IO = 74

CONCLUSION_EXIT_CODES = {
    Conclusion.CERTIFIED_BIFURCATION: EXIT_OK,
    Conclusion.NO_CERTIFICATE: EXIT_NO_CERTIFICATE,
    Conclusion.ASSUMPTIONS_VIOLATED: EXIT_ASSUMPTIONS,
    Conclusion.NUMERICAL_FAILURE: EXIT_NUMERICAL,
}

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


class ParseError(DichotomyError, ValueError):
    """Raised when a matrix argument cannot be parsed."""


class UsageError(Exception):
    """Raised by the argument parser instead of exiting."""


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def parse_matrix(text: str) -> RealMatrix:
    """Parses ``"0.5 0; 0 2"`` style input, or the contents of the file
    named by ``text``. Rows are separated by ``;`` or newlines."""
    candidate = Path(text)
    if "\n" not in text and ";" not in text and candidate.is_file():
        text = candidate.read_text(encoding="utf-8")
    rows: List[List[float]] = []
    for chunk in text.replace(";", "\n").splitlines():
        entries = chunk.replace(",", " ").split()
        if not entries:
            continue
        try:
            rows.append([float(entry) for entry in entries])
        except ValueError as error:
            raise ParseError(f"cannot parse row {chunk.strip()!r}") from error
    if not rows or any(len(row) != len(rows[0]) for row in rows):
        raise ParseError("rows must be non-empty and of equal length")
    try:
        return as_real_matrix(rows)
    except MatrixShapeError as error:
        raise ParseError(str(error)) from error


def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    k = getattr(args, "k", None)
    return {
        "model": {"name": args.model, "k": k},
        "mesh": {"M": args.mesh_m, "k": k},
        "window": args.window,
        "seed": args.seed,
        "outputs": {"report": args.out, "csv": args.csv},
    }


def _load(args: argparse.Namespace) -> RunConfig:
    return RunConfig.from_path(args.config, _overrides(args))


def _mesh(config: RunConfig) -> ParameterMesh:
    return make_torus_mesh(config.model.k, config.mesh.resolution)


def cmd_spectral(args: argparse.Namespace) -> int:
    matrix = parse_matrix(args.matrix)
    try:
        split = hyperbolic_splitting(matrix)
    except (HyperbolicityViolation, NotInvertibleError) as error:
        print(f"not hyperbolic: {error}")
        return EXIT_ASSUMPTIONS
    values = {
        "N": split.N,
        "margin": split.margin,
        "k_s": split.k_s,
        "k_u": split.k_u,
        "Vs": split.Vs,
        "Vu": split.Vu,
    }
    sys.stdout.write(render_summary("spectral.txt.j2", "hyperbolic splitting", values))
    return EXIT_OK


def cmd_certify(args: argparse.Namespace) -> int:
    config = _load(args)
    fam = build_model(config.model)
    report = certify_bifurcation(
        fam,
        _mesh(config),
        config.window,
        config.tolerances,
        NewtonOptions(tol=config.tolerances.newton),
        amplitude=config.seed_amplitude,
        seeds=config.newton_seeds,
        seed=config.seed,
    )
    document = report_document(report)
    if config.outputs.report is None:
        dump_document(document, sys.stdout)
    else:
        write_document(document, config.outputs.report)
        values = {**config.get_render_context(), "report": report}
        title = f"certification of {report.model}"
        sys.stdout.write(render_summary("certify.txt.j2", title, values))
    if config.outputs.csv is not None:
        write_sweep_file(report.sweep, fam.k, config.outputs.csv)
    return CONCLUSION_EXIT_CODES[report.conclusion]


def cmd_sweep(args: argparse.Namespace) -> int:
    config = _load(args)
    fam = build_model(config.model)
    result = scan(fam, _mesh(config), config.window, config.tolerances)
    if config.outputs.csv is None:
        write_sweep_csv(result.records, fam.k, sys.stdout)
    else:
        write_sweep_file(result.records, fam.k, config.outputs.csv)
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    results = run_suites(args.suite, args.cases, args.seed or 0)
    summary = render_summary("verify.txt.j2", "verification", {"results": results})
    sys.stdout.write(summary)
    return EXIT_OK if all(result.passed for result in results) else EXIT_NO_CERTIFICATE


def _common_options() -> argparse.ArgumentParser:
    parent = _ArgumentParser(add_help=False)
    parent.add_argument(
        "-v", "--verbose", action="count", default=0, help="-v for info, -vv for debug"
    )
    parent.add_argument("--config", help="YAML or JSON run configuration")
    parent.add_argument("--model", help="built-in model name")
    parent.add_argument("--k", type=int, help="torus dimension of the parameter space")
    parent.add_argument("--mesh-m", type=int, help="vertices per generator loop")
    parent.add_argument(
        "--window", type=int, help="half width M of the truncation window"
    )
    parent.add_argument(
        "--seed", type=int, help="base seed for Newton seeds and verify corpora"
    )
    parent.add_argument("--out", help="report path (.json, .yaml or .yml)")
    parent.add_argument("--csv", help="sweep CSV path")
    return parent


def build_parser() -> argparse.ArgumentParser:
    common = _common_options()
    parser = _ArgumentParser(
        prog="dichotomy", description="Bifurcation of homoclinic solutions"
    )
    commands = parser.add_subparsers(
        dest="command", required=True, parser_class=_ArgumentParser
    )

    spectral = commands.add_parser(
        "spectral", parents=[common], help="split a matrix into E^s and E^u"
    )
    spectral.add_argument(
        "matrix", help='inline matrix such as "0.5 0; 0 2" or a file path'
    )
    spectral.set_defaults(handler=cmd_spectral)

    certify = commands.add_parser(
        "certify", parents=[common], help="certify bifurcation from w1"
    )
    certify.set_defaults(handler=cmd_certify)

    sweep = commands.add_parser(
        "sweep", parents=[common], help="tabulate sigma_min over the mesh"
    )
    sweep.set_defaults(handler=cmd_sweep)

    verify = commands.add_parser("verify", parents=[common], help="run oracle suites")
    verify.add_argument("suite", help=f"one of {', '.join(sorted(SUITES))} or all")
    verify.add_argument("--cases", type=int, help="number of random cases per suite")
    verify.set_defaults(handler=cmd_verify)
    return parser


def _configure_logging(verbosity: int) -> None:
    level = logging.DEBUG
    if verbosity <= 0:
        level = logging.WARNING
    elif verbosity == 1:
        level = logging.INFO
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr)


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as error:
        print(error, file=sys.stderr)
        return EXIT_USAGE
    _configure_logging(args.verbose)
    try:
        return int(args.handler(args))
    except (ConfigError, ParseError, UnknownSuiteError, MeshError) as error:
        print(f"error: {error}", file=sys.stderr)
        return EXIT_USAGE
    except (HyperbolicityViolation, NotInvertibleError) as error:
        print(f"error: {error}", file=sys.stderr)
        return EXIT_ASSUMPTIONS
    except (
        WindowTooSmallError,
        EvaluatorFailure,
        DichotomyError,
        np.linalg.LinAlgError,
    ) as error:
        print(f"error: {error}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as error:
        print(f"error: {error}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
