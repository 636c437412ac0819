"""Command-line entry point: ``nessdual <command> ...``.

Exit codes: 0 success, 1 usage or input error, 2 verification failure.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import io
import json
import math
import os
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .absorption import (
    covariance_matrix,
    stationary_moment,
    temperature_profile,
    write_covariance_csv,
    write_profile_csv,
)
from .diffusion import ObservationSeries, run_ensemble
from .duality import (
    RotationFrame,
    all_configurations,
    check_change_of_coordinates,
    check_duality,
    check_intertwiner,
    check_su11,
)
from .errors import NessError
from .estimators import merge_estimates, transport_summary
from .jumps import absorption_ensemble, write_absorption_csv
from .model import Boundary, ChainSpec, DualConfig, Family, spec_from_json, spec_to_dict
from .streams import StepParams

__all__ = ["main", "build_parser", "RunManifest"]

SERIES_GLOB = "trajectory_*.csv"
MANIFEST = "manifest.json"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


class RunManifest(dict):
    """Key-value record written next to every output file."""

    @classmethod
    def start(cls, command: str, argv: list[str], spec: ChainSpec | None, seed=None, **parameters):
        return cls(
            command=command,
            argv=list(argv),
            spec=spec_to_dict(spec) if spec else None,
            seed=seed,
            parameters=parameters,
            tool_version=__version__,
            started=_now(),
            finished=None,
        )

    def finish(self) -> "RunManifest":
        self["finished"] = _now()
        return self

    def write(self, path: Path) -> None:
        path.write_text(json.dumps(self, indent=2) + "\n")


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


# --------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="nessdual", description="Boundary-driven BMP/BEP/SIP chains and their dualities.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sim = sub.add_parser("simulate", help="integrate BMP, BEP, KMP or the L3 rotor")
    sim.add_argument("model", choices=["bmp", "bep", "kmp", "l3"])
    sim.add_argument("--spec", required=True, type=Path)
    sim.add_argument("--dt", type=float, default=1e-3)
    sim.add_argument("--steps", type=int, required=True)
    sim.add_argument("--observe-every", type=int, default=1)
    sim.add_argument("--trajectories", type=int, default=1)
    sim.add_argument("--workers", type=int, default=None, help="process count (default: all cores)")
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--init", default=None, help="comma-separated initial state")
    sim.add_argument("--weights", default="", help="duality weights to record, e.g. '0;1,1;0|0;2,0;0'")
    sim.add_argument("--out", required=True, type=Path)

    sip = sub.add_parser("sip", help="absorbing SIP walkers by Gillespie simulation")
    sip.add_argument("--spec", required=True, type=Path)
    sip.add_argument("--eta", required=True)
    sip.add_argument("--runs", type=int, default=1000)
    sip.add_argument("--seed", type=int, default=0)
    sip.add_argument("--max-events", type=int, default=10**8)
    sip.add_argument("--out", type=Path, default=None)

    solve = sub.add_parser("solve", help="exact stationary quantities from absorption probabilities")
    solve.add_argument("quantity", choices=["profile", "covariance", "moment"])
    solve.add_argument("--spec", required=True, type=Path)
    solve.add_argument("--eta", default=None)
    solve.add_argument("--exact", action="store_true", help="rational arithmetic (moment only)")
    solve.add_argument("--out", type=Path, default=None)

    ver = sub.add_parser("verify", help="exact duality and algebra checks")
    ver.add_argument("check", choices=["duality", "su11", "intertwiner", "change-of-coords"])
    ver.add_argument("--pair", choices=["bmp-sip1", "bep-sip", "l3-rotated"], default="bmp-sip1")
    ver.add_argument("--phi", default="symbolic", help="'symbolic', 'pi/6'-style exact angle, or a float")
    ver.add_argument("--float", dest="float_mode", action="store_true", help="evaluate the angle numerically")
    ver.add_argument("--max-eta", type=int, default=3)
    ver.add_argument("--L", default=None, help="comma-separated chain lengths")
    ver.add_argument("--m", default=None, help="'m' for formal, or a rational value")
    ver.add_argument("--rep", choices=["differential", "discrete"], default="differential")
    ver.add_argument("--sites", type=int, default=2)
    ver.add_argument("--weight", choices=["gamma", "duality"], default="gamma")
    ver.add_argument("--degree", type=int, default=6, help="monomial degree for the operator relation")
    ver.add_argument("--out", type=Path, default=None)

    rep = sub.add_parser("report", help="summaries of simulation output")
    rep.add_argument("kind", choices=["transport"])
    rep.add_argument("--in", dest="indir", required=True, type=Path)
    rep.add_argument("--burn-in", type=int, default=None, help="observations dropped per trajectory")
    rep.add_argument("--batches", type=int, default=32)
    rep.add_argument("--out", type=Path, default=None)

    rerun = sub.add_parser("rerun", help="repeat the command recorded in a manifest")
    rerun.add_argument("manifest", type=Path)
    return p


# --------------------------------------------------------------------------
# helpers


def _load_spec(path: Path) -> ChainSpec:
    try:
        text = path.read_text()
    except OSError as exc:
        raise UsageError(f"--spec: cannot read {path}: {exc.strerror}") from None
    try:
        return spec_from_json(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"--spec: {path} is not valid JSON ({exc.msg})") from None


def _parse_eta(text: str, L: int | None = None) -> DualConfig:
    try:
        eta = DualConfig.parse(text)
    except (ValueError, NessError) as exc:
        raise UsageError(f"--eta: {exc}; expected 'eta0;eta1,...,etaL;etaL+1'") from None
    if L is not None and eta.L != L:
        raise UsageError(f"--eta has {eta.L} bulk sites but the spec has L={L}")
    return eta


def _parse_m(text):
    if text is None or text == "m":
        return "m"
    try:
        return Fraction(text)
    except ValueError:
        raise UsageError(f"--m: expected 'm' or a rational like 3/2, got {text!r}") from None


def _parse_frame(text: str, float_mode: bool) -> RotationFrame:
    t = text.strip().lower().replace(" ", "")
    if t == "symbolic":
        if float_mode:
            raise UsageError("--phi symbolic cannot be combined with --float")
        return RotationFrame.symbolic()
    if "pi" in t:
        num, _, den = t.partition("/")
        num = num.replace("*", "").replace("pi", "") or "1"
        try:
            mult = Fraction(num) / Fraction(den or 1)
        except (ValueError, ZeroDivisionError):
            raise UsageError(f"--phi: cannot parse {text!r}; use e.g. pi/6, 0.5236 or symbolic") from None
        if float_mode:
            return RotationFrame.numeric(float(mult) * math.pi)
        try:
            return RotationFrame.exact(mult)
        except NessError:
            return RotationFrame.numeric(float(mult) * math.pi)
    try:
        phi = float(t)
    except ValueError:
        raise UsageError(f"--phi: cannot parse {text!r}; use e.g. pi/6, 0.5236 or symbolic") from None
    if phi == 0 and not float_mode:
        return RotationFrame.exact(0)
    return RotationFrame.numeric(phi)


def _default_init(spec: ChainSpec) -> np.ndarray:
    if spec.family is Family.BMP:
        return np.full(spec.L, math.sqrt(0.5 * (spec.T_left + spec.T_right)))
    if spec.family is Family.L3:
        return np.array([1.0, 0.0, 0.0])
    return np.ones(spec.L)


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text)


# --------------------------------------------------------------------------
# commands


def cmd_simulate(a, argv) -> int:
    spec = _load_spec(a.spec)
    if spec.family.value.lower() != a.model:
        raise UsageError(f"simulate {a.model}: spec family is {spec.family.value}")
    if a.steps < 1 or a.observe_every < 1 or a.trajectories < 1:
        raise UsageError("--steps, --observe-every and --trajectories must be >= 1")
    init = _default_init(spec)
    if a.init:
        try:
            init = np.array([float(v) for v in a.init.split(",")])
        except ValueError:
            raise UsageError(f"--init: expected comma-separated numbers, got {a.init!r}") from None
    weights = tuple(_parse_eta(w, spec.L) for w in a.weights.split("|") if w.strip())
    workers = a.workers if a.workers is not None else (os.cpu_count() or 1)
    manifest = RunManifest.start(
        "simulate", argv, spec, a.seed, model=a.model, dt=a.dt, steps=a.steps,
        observe_every=a.observe_every, trajectories=a.trajectories, init=[float(v) for v in init],
        weights=[w.format() for w in weights],
    )
    runs = run_ensemble(spec, init, StepParams(a.dt, a.seed), a.trajectories, a.steps, a.observe_every, weights, workers)
    a.out.mkdir(parents=True, exist_ok=True)
    for r, series in enumerate(runs):
        buf = io.StringIO()
        series.to_csv(buf)
        (a.out / f"trajectory_{r:04d}.csv").write_text(buf.getvalue())
    manifest["parameters"]["rejected_steps"] = [s.rejected for s in runs]
    manifest.finish().write(a.out / MANIFEST)
    return 0


def cmd_sip(a, argv) -> int:
    spec = _load_spec(a.spec)
    if spec.family is not Family.SIP or spec.boundary is not Boundary.ABSORBING:
        raise UsageError("sip: the spec must describe an absorbing SIP chain")
    eta = _parse_eta(a.eta, spec.L)
    if a.runs < 1:
        raise UsageError("--runs must be >= 1")
    manifest = RunManifest.start("sip", argv, spec, a.seed, eta=eta.format(), runs=a.runs, max_events=a.max_events)
    rows = absorption_ensemble(eta, spec, a.runs, a.seed, a.max_events)
    buf = io.StringIO()
    write_absorption_csv(rows, buf)
    _emit(buf.getvalue(), a.out)
    if a.out is not None:
        manifest.finish().write(a.out.with_name(a.out.name + ".manifest.json"))
    return 0


def cmd_solve(a, argv) -> int:
    spec = _load_spec(a.spec)
    buf = io.StringIO()
    if a.quantity == "profile":
        write_profile_csv(spec, temperature_profile(spec), buf)
    elif a.quantity == "covariance":
        write_covariance_csv(spec, covariance_matrix(spec), buf)
    else:
        if a.eta is None:
            raise UsageError("solve moment needs --eta 'eta0;eta1,...,etaL;etaL+1'")
        eta = _parse_eta(a.eta, spec.L)
        value = stationary_moment(eta, spec, exact=a.exact)
        buf.write("# spec: " + json.dumps(spec_to_dict(spec)) + "\n")
        buf.write("eta,value\n")
        buf.write(f"{eta.format()},{value if a.exact else repr(float(value))}\n")
    _emit(buf.getvalue(), a.out)
    return 0


def cmd_verify(a, argv) -> int:
    if a.max_eta < 0:
        raise UsageError("--max-eta must be >= 0")
    if a.check == "duality":
        if a.pair == "bmp-sip1":
            Ls = _int_list(a.L, [2, 3, 4])
            etas = [e for L in Ls for e in all_configurations(L, a.max_eta)]
            report = check_duality("bmp-sip1", etas)
        elif a.pair == "bep-sip":
            Ls = _int_list(a.L, [2, 3])
            etas = [e for L in Ls for e in all_configurations(L, a.max_eta, cemeteries=False)]
            report = check_duality("bep-sip", etas, m=_parse_m(a.m))
        else:
            frame = _parse_frame(a.phi, a.float_mode)
            pairs = _walker_pairs(a.max_eta)
            report = check_duality("l3-rotated", pairs, frame=frame)
    elif a.check == "su11":
        m = None if a.m is None else _parse_m(a.m)
        report = check_su11(a.rep, a.sites, m=m, max_degree=min(a.max_eta, 8) if a.max_eta else 8)
    elif a.check == "intertwiner":
        m = None if a.m is None else _parse_m(a.m)
        if a.max_eta > 10:
            raise UsageError("--max-eta is capped at 10 for the intertwiner check")
        report = check_intertwiner(m, a.max_eta, weight=a.weight)
    else:
        frame = _parse_frame(a.phi, a.float_mode)
        report = check_change_of_coordinates(frame, _walker_pairs(a.max_eta), max_degree=a.degree)
    _emit(report.to_json() + "\n", a.out)
    return 0 if report.passed else 2


def _walker_pairs(max_total: int):
    return [(n1, t - n1) for t in range(1, max_total + 1) for n1 in range(t + 1)]


def _int_list(text, default):
    if text is None:
        return default
    try:
        return [int(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"--L: expected comma-separated integers, got {text!r}") from None


def cmd_report(a, argv) -> int:
    path = a.indir / MANIFEST
    if not path.exists():
        raise UsageError(f"--in: {a.indir} has no {MANIFEST}")
    manifest = json.loads(path.read_text())
    spec = spec_from_json(json.dumps(manifest["spec"]))
    files = sorted(a.indir.glob(SERIES_GLOB))
    if not files:
        raise UsageError(f"--in: no {SERIES_GLOB} files in {a.indir}")
    estimates = []
    for f in files:
        with f.open() as fh:
            series = ObservationSeries.from_csv(fh, spec)
        estimates.append(transport_summary(series, spec, burn_in=a.burn_in, n_batches=a.batches))
    n = len(estimates)
    J = sum(e.J for e in estimates) / n
    J_err = math.sqrt(sum(e.J_stderr**2 for e in estimates)) / n
    kappa = None if estimates[0].kappa_L is None else J * (spec.L + 1) / (spec.T_left - spec.T_right)
    profile = [merge_estimates([e.profile[i] for e in estimates]) for i in range(spec.L)]
    doc = {
        "spec": spec_to_dict(spec),
        "J": J,
        "J_stderr": J_err,
        "kappa_L": kappa,
        "profile": [[i, p.value, p.stderr] for i, p in enumerate(profile, start=1)],
    }
    _emit(json.dumps(doc, indent=2) + "\n", a.out)
    return 0


def cmd_rerun(a, argv) -> int:
    try:
        manifest = json.loads(a.manifest.read_text())
        recorded = manifest["argv"]
    except (OSError, ValueError, KeyError):
        raise UsageError(f"{a.manifest} is not a readable run manifest") from None
    return main(recorded)


COMMANDS = {
    "simulate": cmd_simulate,
    "sip": cmd_sip,
    "solve": cmd_solve,
    "verify": cmd_verify,
    "report": cmd_report,
    "rerun": cmd_rerun,
}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[a.command](a, argv)
    except UsageError as exc:
        print(f"nessdual {a.command}: {exc}", file=sys.stderr)
        return 1
    except NessError as exc:
        print(f"nessdual {a.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
