"""``dirac`` command-line entry point.

Exit codes: 0 success, 2 file problems, 3 invalid input, 4 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .admissibility import summability_report, verify_counterexample
from .construction import ConstructionData, build_construction, verify_construction
from .core import (
    DEFAULT_TOLERANCES,
    SCHEMA_VERSION,
    BoundaryKind,
    Tolerances,
    _fmt,
    _read_json,
    dumps,
    load_potential,
    load_spectrum,
)
from .determinant import DeterminantModel, delta_from_spectrum, f_at_integers
from .errors import ComputationError, ValidationError
from .forward import char_det, locate_spectrum
from .glm import DEFAULT_FLOOR, GlmData, default_x_grid, solvability_check

log = logging.getLogger("dirac_spectra")

EXIT_FILE = 2
EXIT_VALIDATION = 3
EXIT_COMPUTATION = 4
THREADS_ENV = "DIRAC_SPECTRA_THREADS"
COMMANDS = ("forward", "det", "det-from-spectrum", "f-sums", "admissible", "construct",
            "glm-check", "counterexample")


@dataclasses.dataclass(frozen=True)
class RunConfig:
    command: str
    args: argparse.Namespace
    tolerances: Tolerances
    threads: int
    out: Path | None


# -- output ------------------------------------------------------------------

def _csv_text(header: list[str], rows) -> str:
    buf = io.StringIO()
    buf.write(f"# schema_version={SCHEMA_VERSION}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    return v if isinstance(v, str) else _fmt(v)


def _table(header: list[str], rows, out: Path | None) -> str:
    """CSV, or JSON rows when the output file ends in ``.json``."""
    if out is not None and out.suffix.lower() == ".json":
        recs = [dict(zip(header, [bool(v) if isinstance(v, np.bool_) else v for v in row])) for row in rows]
        return _json_text({"columns": header, "rows": recs})
    return _csv_text(header, rows)


def _json_text(payload: dict) -> str:
    return dumps({"schema_version": SCHEMA_VERSION, **payload})


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


# -- parsing helpers -----------------------------------------------------------

def parse_grid(text: str) -> np.ndarray:
    """``a:b:step`` to the inclusive real grid ``a, a + step, ..., b``."""
    try:
        a, b, step = (float(x) for x in text.split(":"))
    except ValueError as exc:
        raise ValidationError(f"grid must look like a:b:step, got {text!r}") from exc
    if step <= 0 or b < a:
        raise ValidationError("grid needs step > 0 and b >= a")
    count = int(np.floor((b - a) / step + 1e-9)) + 1
    return a + step * np.arange(count)


def parse_xgrid(text: str) -> np.ndarray:
    """An integer ``m`` (meaning ``pi k / m``, ``k = 1..m``) or a comma list of values."""
    try:
        if "," not in text:
            return default_x_grid(int(text))
        return np.array([float(x) for x in text.split(",")])
    except ValueError as exc:
        raise ValidationError(f"bad --xgrid {text!r}") from exc


def _threads(value: int | None) -> int:
    if value is not None:
        t = value
    else:
        env = os.environ.get(THREADS_ENV)
        try:
            t = int(env) if env else 1
        except ValueError as exc:
            raise ValidationError(f"{THREADS_ENV} must be an integer, got {env!r}") from exc
    if t < 1:
        raise ValidationError("thread count must be >= 1")
    return t


def _tolerances(args: argparse.Namespace) -> Tolerances:
    overrides = {}
    for f in dataclasses.fields(Tolerances):
        v = getattr(args, "tol_" + f.name, None)
        if v is not None:
            overrides[f.name] = v
    return DEFAULT_TOLERANCES.replace(**overrides) if overrides else DEFAULT_TOLERANCES


def _need(path: Path | None, flag: str) -> Path:
    if path is None:
        raise ValidationError(f"{flag} is required")
    if not path.is_file():
        raise FileNotFoundError(f"{flag}: no such file {path}")
    return path


# -- commands ------------------------------------------------------------------

def cmd_forward(cfg: RunConfig) -> str:
    a = cfg.args
    pot = load_potential(_need(a.potential, "--potential"))
    sp = locate_spectrum(pot, a.theta, a.nmax, cfg.tolerances, threads=cfg.threads)
    return _json_text({**sp.to_dict(), "meta": {"disk_radii": sp.meta.get("radii", []),
                                             "tolerances": cfg.tolerances.to_dict()}})


def cmd_det(cfg: RunConfig) -> str:
    a = cfg.args
    pot = load_potential(_need(a.potential, "--potential"))
    lam = parse_grid(a.grid)
    d = char_det(pot, a.theta, lam.astype(complex), cfg.tolerances.integrator_steps)
    return _table(["lam_re", "lam_im", "delta_re", "delta_im"],
                  zip(lam, np.zeros_like(lam), d.real, d.imag), cfg.out)


def _model(cfg: RunConfig) -> DeterminantModel:
    sp = load_spectrum(_need(cfg.args.spectrum, "--spectrum"))
    T = cfg.args.N if cfg.args.N is not None else cfg.tolerances.truncation_N
    return DeterminantModel(sp, T)


def cmd_det_from_spectrum(cfg: RunConfig) -> str:
    model = _model(cfg)
    lam = parse_grid(cfg.args.grid)
    d = delta_from_spectrum(model, lam.astype(complex))
    return _table(["lam_re", "lam_im", "delta_re", "delta_im"],
                  zip(lam, np.zeros_like(lam), d.real, d.imag), cfg.out)


def cmd_f_sums(cfg: RunConfig) -> str:
    model = _model(cfg)
    if cfg.args.K is None or cfg.args.K < 0:
        raise ValidationError("--K must be a non-negative integer")
    fs = f_at_integers(model, cfg.args.K)
    return _table(["k", "f_re", "f_im", "partial_sum"],
                  ((k, f.real, f.imag, ps) for k, f, ps in fs.rows()), cfg.out)


def cmd_admissible(cfg: RunConfig) -> str:
    sp = load_spectrum(_need(cfg.args.spectrum, "--spectrum"))
    if cfg.args.K is None:
        raise ValidationError("--K is required")
    rep = summability_report(sp, cfg.args.K)
    return _json_text(rep.to_dict())


def cmd_construct(cfg: RunConfig) -> str:
    a = cfg.args
    path = a.target if a.target is not None else a.spectrum
    sp = load_spectrum(_need(path, "--target"))
    if a.N is None:
        raise ValidationError("--N is required")
    T = min(cfg.tolerances.truncation_N, sp.N) if a.tol_truncation_N is None else cfg.tolerances.truncation_N
    model = DeterminantModel(sp, T)
    if a.N0 == "auto":
        N0 = "auto"
    else:
        try:
            N0 = int(a.N0)
        except ValueError as exc:
            raise ValidationError(f"--N0 must be an integer or 'auto', got {a.N0!r}") from exc
    data = build_construction(model, a.N, N0)
    rep = verify_construction(data)
    payload = data.to_dict()
    payload["meta"] = {"target_truncation_N": T}
    payload["verification"] = rep.to_dict()
    return _json_text(payload)


def cmd_glm_check(cfg: RunConfig) -> str:
    a = cfg.args
    data = ConstructionData.from_dict(_read_json(_need(a.construction, "--construction")))
    T = a.N if a.N is not None else min(cfg.tolerances.truncation_N, data.N)
    glm = GlmData.from_construction(data, T)
    rows = solvability_check(glm, parse_xgrid(a.xgrid), a.grid_points, a.floor, cfg.threads)
    return _table(["x", "sigma_min", "pass"], ((r.x, r.sigma_min, r.passed) for r in rows), cfg.out)


def cmd_counterexample(cfg: RunConfig) -> str:
    a = cfg.args
    rows = verify_counterexample(a.pmin, a.pmax, cfg.tolerances.tail_tol)
    return _table(["p", "gamma", "sigma1", "sigma2", "sigma1_bound", "sigma2_bound", "pass"],
                  ((r.p, r.gamma, r.sigma1, r.sigma2, r.sigma1_bound, r.sigma2_bound, r.passed)
                   for r in rows), cfg.out)


HANDLERS = {
    "forward": cmd_forward,
    "det": cmd_det,
    "det-from-spectrum": cmd_det_from_spectrum,
    "f-sums": cmd_f_sums,
    "admissible": cmd_admissible,
    "construct": cmd_construct,
    "glm-check": cmd_glm_check,
    "counterexample": cmd_counterexample,
}


# -- argument parser -----------------------------------------------------------

def _theta(value: str) -> int:
    try:
        return BoundaryKind(int(value)).theta
    except (ValueError, ValidationError) as exc:
        raise argparse.ArgumentTypeError("theta must be 0 or 1") from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", type=Path, help="output file (default: stdout)")
    common.add_argument("--threads", type=int, help=f"worker threads (fallback: ${THREADS_ENV}, then 1)")
    common.add_argument("-v", "--verbose", action="count", default=0)
    tol = common.add_argument_group("tolerance overrides")
    for f in dataclasses.fields(Tolerances):
        tol.add_argument("--tol-" + f.name.replace("_", "-"), dest="tol_" + f.name, type=type(f.default),
                         help=f"default {f.default}")

    p = argparse.ArgumentParser(prog="dirac", description="Periodic/antiperiodic Dirac spectra toolkit")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("forward", parents=[common], help="eigenvalues of a potential")
    s.add_argument("--potential", type=Path)
    s.add_argument("--theta", type=_theta, default=0)
    s.add_argument("--nmax", type=int, default=8)

    s = sub.add_parser("det", parents=[common], help="characteristic determinant on a real grid")
    s.add_argument("--potential", type=Path)
    s.add_argument("--theta", type=_theta, default=0)
    s.add_argument("--grid", required=True, help="a:b:step")

    s = sub.add_parser("det-from-spectrum", parents=[common], help="product determinant of a spectrum")
    s.add_argument("--spectrum", type=Path)
    s.add_argument("--grid", required=True, help="a:b:step")
    s.add_argument("--N", type=int, help="truncation index (default: --tol-truncation-N)")

    s = sub.add_parser("f-sums", parents=[common], help="f(k) = Delta(k) - Delta0(k) and partial sums")
    s.add_argument("--spectrum", type=Path)
    s.add_argument("--K", type=int, required=True)
    s.add_argument("--N", type=int, help="truncation index (default: --tol-truncation-N)")

    s = sub.add_parser("admissible", parents=[common], help="summability evidence for gamma_k")
    s.add_argument("--spectrum", type=Path)
    s.add_argument("--K", type=int, required=True)

    s = sub.add_parser("construct", parents=[common], help="nodes, s', c_n, z_n, beta_n from a target spectrum")
    s.add_argument("--target", type=Path)
    s.add_argument("--spectrum", type=Path, help="alias for --target")
    s.add_argument("--N0", default="auto")
    s.add_argument("--N", type=int)

    s = sub.add_parser("glm-check", parents=[common], help="smallest singular values of I + K_x")
    s.add_argument("--construction", type=Path)
    s.add_argument("--xgrid", default="8", help="count m (x = pi k/m) or comma list")
    s.add_argument("--grid", dest="grid_points", type=int, default=256)
    s.add_argument("--N", type=int, help="kernel truncation (default: min(--tol-truncation-N, stored N))")
    s.add_argument("--floor", type=float, default=DEFAULT_FLOOR)

    s = sub.add_parser("counterexample", parents=[common], help="gamma_{2^p} bounds for the counterexample")
    s.add_argument("--pmin", type=int, default=10)
    s.add_argument("--pmax", type=int, default=16)
    return p


def run(cfg: RunConfig) -> int:
    text = HANDLERS[cfg.command](cfg)
    _emit(text, cfg.out)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = RunConfig(args.command, args, _tolerances(args), _threads(args.threads), args.out)
        return run(cfg)
    except (FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        print(f"dirac: file error: {exc}", file=sys.stderr)
        return EXIT_FILE
    except ValidationError as exc:
        print(f"dirac: invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ComputationError as exc:
        print(f"dirac: computation failed: {exc}", file=sys.stderr)
        return EXIT_COMPUTATION


if __name__ == "__main__":
    sys.exit(main())
