"""
Command-line front end.

    python -m app.cli fe-check --builtin zeta --grid 0.7,1,1.4
    python -m app.cli converse-check --config delta.cfg --out runs/
    python -m app.cli stats --nf --builtin zeta --xmax 1e6

Each command writes <out>/<command>.csv and <out>/<command>.txt and exits 0
only when every check is within tolerance.
"""
import argparse
import csv
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import structlog
from pydantic import BaseModel, ValidationError, field_validator, model_validator

from app.config import settings
from app.services import converse, degree_gate, lfunc, stats
from app.services.config_parser import parse_config, parse_document
from app.services.converse import GL2Params
from app.services.lfunc import SelbergFunction
from app.services.specfun import Accuracy, default_accuracy
from app.utils.errors import (
    EXIT_CHECK_FAILED,
    EXIT_UNEXPECTED,
    ConfigError,
    LabError,
    map_lab_error_to_exit,
)
from app.utils.logging import configure_logging

logger = structlog.get_logger()

COMMANDS = (
    "fe-check", "converse-check", "stats", "degree-audit",
    "axioms", "specfun-test", "list-builtins",
)

# check thresholds when --tol is not given
DEFAULT_TOLERANCES = {
    "fe-check": 1e-8,
    "converse-check": 1e-8,
    "stats": 0.5,
}
# closed-form errors are relative to max(|value|, J_SCALE_FLOOR); |x j_5(x)| is O(1) for large x
J_SCALE_FLOOR = 1e-3


def _split_tag(tag: str) -> Tuple[str, Optional[int], Optional[int]]:
    """'zeta', 'delta', 'counterexample' or 'dirichlet:q:i'"""
    name, *rest = tag.split(":")
    if name == "dirichlet":
        if len(rest) != 2:
            raise ValueError(f"expected dirichlet:modulus:index, got {tag!r}")
        try:
            return name, int(rest[0]), int(rest[1])
        except ValueError:
            raise ValueError(f"expected integer modulus and index in {tag!r}")
    if rest:
        raise ValueError(f"only the dirichlet builtin takes parameters, got {tag!r}")
    return name, None, None


class RunConfig(BaseModel):
    command: str
    config_path: Optional[Path] = None
    builtin: Optional[str] = None
    modulus: Optional[int] = None
    index: Optional[int] = None
    out: Path = Path(settings.OUTPUT_DIR or ".")
    tol: Optional[float] = None
    xmax: Optional[float] = None
    grid: Optional[List[float]] = None
    max_terms: Optional[int] = None
    nf: bool = False
    target: Optional[float] = None
    orthogonality: Optional[str] = None
    pole_alpha: Optional[float] = None

    @field_validator("command")
    @classmethod
    def known_command(cls, v: str) -> str:
        if v not in COMMANDS:
            raise ValueError(f"unknown command {v!r}")
        return v

    @field_validator("tol", "xmax")
    @classmethod
    def positive(cls, v: Optional[float]) -> Optional[float]:
        if v is not None and not v > 0:
            raise ValueError("must be positive")
        return v

    @field_validator("max_terms")
    @classmethod
    def positive_terms(cls, v: Optional[int]) -> Optional[int]:
        if v is not None and v < 1:
            raise ValueError("must be at least 1")
        return v

    @field_validator("orthogonality")
    @classmethod
    def other_function_tag(cls, v: Optional[str]) -> Optional[str]:
        if v is not None:
            _split_tag(v)
        return v

    @field_validator("grid")
    @classmethod
    def non_empty(cls, v: Optional[List[float]]) -> Optional[List[float]]:
        if v is not None and not v:
            raise ValueError("grid must not be empty")
        return v

    @model_validator(mode="after")
    def one_stats_mode(self) -> "RunConfig":
        modes = [self.nf, self.orthogonality is not None, self.pole_alpha is not None]
        if sum(modes) > 1:
            raise ValueError("--nf, --orthogonality and --pole-alpha are exclusive")
        return self

    @model_validator(mode="after")
    def writable_output(self) -> "RunConfig":
        self.out.mkdir(parents=True, exist_ok=True)
        if not os.access(self.out, os.W_OK):
            raise ValueError(f"output directory {self.out} is not writable")
        return self

    def accuracy(self) -> Accuracy:
        acc = default_accuracy()
        if self.max_terms is not None:
            acc = acc.model_copy(update={"max_terms": self.max_terms})
        return acc

    def threshold(self, default: float) -> float:
        return self.tol if self.tol is not None else default


@dataclass
class CommandResult:
    columns: List[str]
    rows: List[Sequence] = field(default_factory=list)
    report: List[str] = field(default_factory=list)
    failures: List[str] = field(default_factory=list)
    # secondary tables, written to <command>-<name>.csv
    extra: Dict[str, Tuple[List[str], List[Sequence]]] = field(default_factory=dict)


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------

def format_value(value) -> str:
    """17 significant digits for floats; true/false for booleans; empty for None"""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def write_csv(path: Path, columns: Sequence[str], rows: Sequence[Sequence]) -> None:
    with path.open("w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([format_value(v) for v in row])


def write_report(path: Path, command: str, result: CommandResult) -> None:
    lines = [f"command: {command}", *result.report]
    lines.extend(f"FAIL {line}" for line in result.failures)
    lines.append("status: " + ("fail" if result.failures else "pass"))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# Inputs
# ---------------------------------------------------------------------------

def _config_text(config: RunConfig) -> Optional[str]:
    if config.config_path is None:
        return None
    try:
        return config.config_path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read {config.config_path}: {e.strerror}")


def _checks(config: RunConfig) -> Dict[str, str]:
    text = _config_text(config)
    return parse_document(text).checks if text else {}


def _check_floats(checks: Dict[str, str], key: str) -> Optional[List[float]]:
    if key not in checks:
        return None
    try:
        return [float(v) for v in checks[key].split(",")]
    except ValueError:
        raise ConfigError("expected comma-separated numbers", field=key)


def load_function(config: RunConfig, N: int = lfunc.DEFAULT_REALIZATION) -> SelbergFunction:
    text = _config_text(config)
    if text is not None:
        parsed = parse_config(text)
        if not isinstance(parsed, SelbergFunction):
            raise ConfigError(f"{config.command} needs a [function] section")
        return parsed
    return lfunc.builtin(config.builtin or "zeta", N, config.modulus, config.index)


def load_params(config: RunConfig) -> GL2Params:
    text = _config_text(config)
    if text is not None:
        parsed = parse_config(text)
        if not isinstance(parsed, GL2Params):
            raise ConfigError(f"{config.command} needs a [converse] section")
        return parsed
    if config.builtin not in (None, "delta"):
        raise ConfigError("converse-check knows only builtin delta", field="builtin")
    return converse.delta_params()


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_fe_check(config: RunConfig) -> CommandResult:
    F = load_function(config)
    tol = config.threshold(DEFAULT_TOLERANCES["fe-check"])
    xs = config.grid or _check_floats(_checks(config), "xs") or [0.7, 1.0, 1.4]
    acc = config.accuracy()
    result = CommandResult(columns=[
        "x", "re_residual", "im_residual", "abs_residual", "re_direct", "im_direct",
        "re_reflected", "im_reflected", "error_bound", "pass",
    ])
    worst = 0.0
    for x in xs:
        r = lfunc.fe_residual_report(F, x, acc)
        size = abs(r.residual)
        worst = max(worst, size)
        ok = size <= tol
        result.rows.append((
            x, r.residual.real, r.residual.imag, size, r.direct.real, r.direct.imag,
            r.reflected.real, r.reflected.imag, r.error, ok,
        ))
        if not ok:
            result.failures.append(f"x = {x:g}: |residual| = {size:.3e} > {tol:g}")
    result.report += [f"function: {F.name}", f"max |residual|: {worst:.6e}", f"tolerance: {tol:g}"]
    return result


def cmd_converse_check(config: RunConfig) -> CommandResult:
    params = load_params(config)
    checks = _checks(config)
    tol = config.threshold(DEFAULT_TOLERANCES["converse-check"])
    rs = config.grid or _check_floats(checks, "rs") or [1.2, 2.0, 3.0]
    thetas = _check_floats(checks, "thetas") or [math.pi / 6, math.pi / 4, math.pi / 3]
    report = converse.symmetry_report(params, rs, thetas, config.accuracy())
    result = CommandResult(
        columns=["r", "theta", "re_inner", "im_inner", "re_outer", "im_outer", "residual", "terms"],
        rows=report.rows(),
    )
    for p in report.points:
        if p.residual > tol:
            result.failures.append(f"r = {p.r:g}, theta = {p.theta:.6g}: residual {p.residual:.3e} > {tol:g}")
    result.report += [
        f"alpha: {params.alpha:g}, beta: {params.beta}, q: {params.q:g}, coefficients: {params.N}",
        f"max residual: {report.max_residual:.6e}",
        f"tolerance: {tol:g}",
    ]
    return result


def cmd_stats(config: RunConfig) -> CommandResult:
    X = config.xmax or 1e6
    F = load_function(config, N=int(X))
    result = CommandResult(columns=["x", "re_sum", "im_sum", "loglog_x"])
    if config.nf:
        estimate = stats.estimate_nF(F, X)
        result.rows = estimate.series.rows()
        result.report += [
            f"function: {F.name}",
            f"slope: {estimate.slope:.6f}",
            f"nearest integer: {estimate.nearest_integer}",
            f"residual rms: {estimate.residual_rms:.3e}",
        ]
        if config.target is not None:
            tol = config.threshold(DEFAULT_TOLERANCES["stats"])
            if abs(estimate.slope - config.target) > tol:
                result.failures.append(
                    f"slope {estimate.slope:.4f} differs from {config.target:g} by more than {tol:g}"
                )
        return result
    xs = config.grid or stats.geometric_checkpoints(X, start=2.0)
    result.report.append(f"function: {F.name}")
    if config.orthogonality is not None:
        name, modulus, index = _split_tag(config.orthogonality)
        G = lfunc.builtin(name, F.N, modulus, index)
        series = stats.orthogonality_sum(F, G, xs)
        result.report.append(f"other: {G.name}")
    elif config.pole_alpha is not None:
        series = stats.pole_divergence_sum(F, config.pole_alpha, xs)
        result.report.append(f"alpha: {config.pole_alpha:g}")
    else:
        series = stats.selberg_sum(F, xs)
    result.rows = series.rows()
    result.report += [f"sum: {series.kind}", f"checkpoints: {len(series.checkpoints)}"]
    return result


def cmd_degree_audit(config: RunConfig) -> CommandResult:
    F = load_function(config)
    prime_limit = int(config.xmax) if config.xmax else 50
    report = degree_gate.degree_gate_report(F, prime_limit=prime_limit)
    result = CommandResult(columns=["p", "theta", "admissible"])
    result.rows = [(v.p, v.theta, v.admissible) for v in report.verdicts]
    if report.decay is not None:
        result.extra["decay"] = (["n", "log_ratio"], report.decay.rows())
    result.extra["bj"] = (["p", "j", "bj_root"], report.growth_rows())
    exponent = report.decay.exponent if report.decay is not None else None
    result.report += [
        f"function: {F.name}",
        f"degree: {report.degree}",
        f"decay exponent: {exponent}",
        f"unverifiable primes: {report.unverifiable}",
    ]
    if report.q_bound is not None:
        result.report.append(f"Q bound: {report.q_bound.status} (Q = {report.q_bound.Q:.12g})")
    for v in report.verdicts:
        if not v.admissible:
            result.failures.append(f"p = {v.p}: Euler factor forces theta = {v.theta:.6g} >= 1/2")
    return result


def cmd_axioms(config: RunConfig) -> CommandResult:
    F = load_function(config)
    N = min(F.N, int(config.xmax)) if config.xmax else F.N
    report = lfunc.axiom_audit(F, N)
    result = CommandResult(columns=["axiom", "passed", "witness", "detail"])
    result.rows = [(c.axiom, c.passed, c.witness, c.detail) for c in report.checks]
    result.report += [f"function: {F.name}", f"terms: {N}", f"degree: {report.degree}"]
    for c in report.checks:
        if c.passed is False:
            result.failures.append(f"{c.axiom}: {c.detail} (witness n = {c.witness})")
    return result


def _identity_row(result: CommandResult, check: str, params: str, lhs: complex, rhs: complex,
                  tol: float, scale: Optional[float] = None) -> None:
    lhs, rhs = complex(lhs), complex(rhs)
    error = abs(lhs - rhs) / (scale if scale is not None else max(1.0, abs(rhs)))
    ok = error <= tol
    result.rows.append((check, params, lhs.real, lhs.imag, rhs.real, rhs.imag, error, ok))
    if not ok:
        result.failures.append(f"{check} [{params}]: error {error:.3e} > {tol:g}")


def cmd_specfun_test(config: RunConfig) -> CommandResult:
    """Closed-form and transformation identities for the special-function kernel."""
    result = CommandResult(columns=["check", "parameters", "re_lhs", "im_lhs", "re_rhs", "im_rhs", "error", "pass"])
    acc = config.accuracy()

    for x in np.arange(1.0, 60.5, 0.5):
        closed, generic, _ = converse.j_closed_form_check(float(x), acc)
        _identity_row(result, "j_closed_form", f"x={x:g}", closed, generic,
                      config.threshold(1e-9), scale=max(abs(generic), J_SCALE_FLOOR))

    for alpha in (0.5, 5.5):
        for beta in (0.5, 0.5j):
            for theta in (math.pi / 6, math.pi / 4, math.pi / 3):
                for s in (0.3, 0.3 + 0.7j, 0.8 + 2j):
                    left, right, _ = converse.t_symmetry_check(alpha, beta, theta, s)
                    _identity_row(result, "t_symmetry", f"alpha={alpha:g} beta={beta} theta={theta:.6g} s={s}",
                                  left, right, config.threshold(1e-9), scale=max(1.0, abs(left)))

    for alpha, beta in ((0.5, 0.5), (5.5, 0.5)):
        for a, b in ((1.0, 1.0), (1.0, 2.0), (0.5, 1.0)):
            for s in (1.0, 1.5 + 0.5j):
                lhs, rhs, _ = converse.mellin_pair_check(alpha, beta, a, b, s, acc)
                _identity_row(result, "mellin_pair", f"alpha={alpha:g} beta={beta:g} a={a:g} b={b:g} s={s}",
                              lhs, rhs, config.threshold(1e-6), scale=max(abs(rhs), 1e-300))
    _identity_row(result, "mellin_pair_spot", "alpha=0.5 beta=0.5 a=1 b=1 s=1",
                  converse.mellin_pair_check(0.5, 0.5, 1.0, 1.0, 1.0, acc)[0], math.pi / 4,
                  config.threshold(1e-6), scale=math.pi / 4)

    for y in (1.0, 1.5, 2.0, 3.0):
        lhs, rhs, _ = converse.delta_transform_check(y, acc)
        _identity_row(result, "delta_transform", f"y={y:g}", lhs, rhs, config.threshold(1e-10), scale=abs(rhs))

    result.report.append(f"identities checked: {len(result.rows)}")
    return result


def cmd_list_builtins(config: RunConfig) -> CommandResult:
    result = CommandResult(columns=["name", "description"])
    result.rows = [(b["name"], b["description"]) for b in lfunc.list_builtins()]
    result.report += [f"{name}: {text}" for name, text in result.rows]
    return result


HANDLERS: Dict[str, Callable[[RunConfig], CommandResult]] = {
    "fe-check": cmd_fe_check,
    "converse-check": cmd_converse_check,
    "stats": cmd_stats,
    "degree-audit": cmd_degree_audit,
    "axioms": cmd_axioms,
    "specfun-test": cmd_specfun_test,
    "list-builtins": cmd_list_builtins,
}


def run(config: RunConfig) -> int:
    """Execute one command, write CSV and report, return the exit status."""
    log = logger.bind(command=config.command)
    try:
        result = HANDLERS[config.command](config)
    except LabError as e:
        status = map_lab_error_to_exit(str(e))
        log.error("command_refused", error=str(e), exit_status=status)
        print(str(e), file=sys.stderr)
        return status
    except Exception as e:
        log.exception("command_crashed", error=str(e))
        print(f"INTERNAL_ERROR: {e}", file=sys.stderr)
        return EXIT_UNEXPECTED

    stem = config.out / config.command
    write_csv(stem.with_suffix(".csv"), result.columns, result.rows)
    write_report(stem.with_suffix(".txt"), config.command, result)
    for name, (columns, rows) in result.extra.items():
        write_csv(config.out / f"{config.command}-{name}.csv", columns, rows)
    for line in result.failures:
        print(f"FAIL {line}", file=sys.stderr)
    log.info("command_completed", rows=len(result.rows), failures=len(result.failures))
    return EXIT_CHECK_FAILED if result.failures else 0


def _grid(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="selberg-lab", description="Selberg-class verification commands")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", dest="config_path", type=Path, help="candidate description file")
        p.add_argument("--builtin", help="builtin function tag (see list-builtins)")
        p.add_argument("--modulus", type=int, help="character modulus for the dirichlet builtin")
        p.add_argument("--index", type=int, help="character index for the dirichlet builtin")
        p.add_argument("--out", type=Path, default=Path(settings.OUTPUT_DIR or "."), help="output directory")
        p.add_argument("--tol", type=float, help="check tolerance")
        p.add_argument("--xmax", type=float, help="range limit (X for stats, primes for degree-audit, terms for axioms)")
        p.add_argument("--grid", type=_grid, help="comma-separated evaluation points")
        p.add_argument("--max-terms", dest="max_terms", type=int, help="cap on series terms")
        if name == "stats":
            p.add_argument("--nf", action="store_true", help="estimate n_F from the Selberg sum")
            p.add_argument("--target", type=float, help="expected n_F; a miss beyond --tol fails")
            p.add_argument("--orthogonality", metavar="G",
                           help="sum a_p(F) conj(a_p(G)) / p against builtin G (dirichlet:q:i for characters)")
            p.add_argument("--pole-alpha", dest="pole_alpha", type=float, metavar="A",
                           help="sum a_p / p^(1 + iA)")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    configure_logging()
    args = build_parser().parse_args(argv)
    try:
        config = RunConfig(**{k: v for k, v in vars(args).items() if v is not None})
    except ValidationError as e:
        print(f"CONFIG_ERROR: {e.errors()[0]['msg']}", file=sys.stderr)
        return map_lab_error_to_exit("CONFIG_ERROR")
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
