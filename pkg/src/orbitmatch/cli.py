"""Command line entry point: ``orbitmatch <subcommand> ...``.

Exit codes: 0 success, 1 estimation/runtime failure, 2 usage or config error.
"""
from __future__ import annotations

import argparse
import json
import sys
from contextlib import contextmanager

import numpy as np

from . import diagnostics, experiment, orbitdist, renyi, systems
from .errors import ConfigError, DomainError, OrbitMatchError
from .plotting import emit_plot

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@contextmanager
def _sink(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", newline="\n") as fh:
            yield fh


def _write_csv(path, header, rows):
    with _sink(path) as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_cell(v) for v in row) + "\n")


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _write_json(path, obj):
    text = json.dumps(obj, sort_keys=True)
    if path:
        with open(path, "w", newline="\n") as fh:
            fh.write(text + "\n")
    else:
        sys.stderr.write(text + "\n")


def _point(text):
    parts = [p.strip() for p in text.split(",")]
    try:
        coords = [systems.as_exact(p) for p in parts]
    except ValueError:
        raise ConfigError(f"bad point {text!r}") from None
    return coords[0] if len(coords) == 1 else tuple(coords)


def _int_list(text):
    """'1,2,5' or 'a:b' (inclusive range) or 'a:b:step'."""
    try:
        if ":" in text:
            parts = [int(p) for p in text.split(":")]
            lo, hi = parts[0], parts[1]
            step = parts[2] if len(parts) > 2 else 1
            return list(range(lo, hi + 1, step))
        return [int(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise ConfigError(f"bad integer list {text!r}") from None


def _float_list(text):
    try:
        return [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise ConfigError(f"bad number list {text!r}") from None


def _checkpoints(text, N):
    if text is None:
        return orbitdist.geometric_checkpoints(N)
    if text.startswith("geom:"):
        try:
            _, n0, ratio = text.split(":")
            return orbitdist.geometric_checkpoints(N, int(n0), float(ratio))
        except ValueError:
            raise ConfigError(f"bad checkpoint grid {text!r}") from None
    return _int_list(text)


def _start(system, text, seed, stream, width):
    if text is not None:
        return _point(text)
    if seed is None:
        raise ConfigError("give a starting point or --seed for a stationary start")
    return systems.stationary_start(system, seed, stream, width)


# --------------------------------------------------------------------------
# subcommands

def cmd_simulate(args):
    if args.base:
        sp = systems.make_skew_product(args.base, args.system)
        if args.x is None or args.omega is None:
            raise ConfigError("skew-product simulation needs --omega and --x")
        pts = systems.skew_orbit(sp, (_point(args.omega), _point(args.x)), args.n)
        _write_csv(args.out, ["i", "omega", "x"],
                   ([i, w, x] for i, (w, x) in enumerate(pts)))
        return EXIT_OK
    sys_ = systems.parse_system(args.system)
    start = _start(sys_, args.x, args.seed, args.stream, args.width)
    if isinstance(start, systems.DigitStream):
        pts = systems.digit_orbit(start, args.n)
    else:
        pts = systems.orbit(sys_, start, args.n)
    pts = np.asarray(pts)
    if pts.ndim == 1:
        _write_csv(args.out, ["i", "x"], ([i, v] for i, v in enumerate(pts)))
    else:
        header = ["i"] + [f"x{k}" for k in range(pts.shape[1])]
        _write_csv(args.out, header, ([i, *row] for i, row in enumerate(pts)))
    return EXIT_OK


def cmd_distance(args):
    T = systems.parse_system(args.system_t)
    S = systems.parse_system(args.system_s)
    obs = systems.parse_observation(args.obs, T.dim)
    x = _start(T, args.x, args.seed, 0, args.width)
    y = _start(S, args.y, args.seed, 1, args.width)
    cp = _checkpoints(args.checkpoints, args.n)
    curve = orbitdist.shortest_distance_curve(T, S, obs, x, y, args.n, cp)
    expo = orbitdist.exponent_curve(curve)
    _write_csv(args.out, ["n", "prefix_min", "exponent", "floor_applied"],
               zip(curve.checkpoints.tolist(), curve.prefix_min.tolist(),
                   expo.exponent.tolist(), expo.floor_applied.tolist()))
    if args.plot:
        emit_plot(expo.checkpoints.tolist(), {"exponent": expo.exponent.tolist()},
                  args.plot, reference=args.reference, title="log m_n / (-log n)",
                  y_label="exponent")
    return EXIT_OK


def _samples(spec, system, obs, seed, stream):
    try:
        count = int(spec)
    except ValueError:
        try:
            data = np.loadtxt(spec, delimiter=",", ndmin=1)
        except OSError as exc:
            raise ConfigError(f"cannot read samples {spec}: {exc}") from None
        return obs(data)
    if count < 1:
        raise ConfigError("sample count must be positive")
    return obs(systems.sample_invariant(system, seed, count, stream=stream))


def cmd_renyi(args):
    T = systems.parse_system(args.system_t)
    S = systems.parse_system(args.system_s)
    obs = systems.parse_observation(args.obs, T.dim)
    U = _samples(args.samples_mu, T, obs, args.seed, 0)
    V = _samples(args.samples_eta, S, obs, args.seed, 1)
    sched = renyi.RadiiSchedule(args.r_max, args.k, args.ratio)
    est = renyi.cross_correlation_curve(U, V, sched)
    _write_csv(args.out, ["r", "count", "value"],
               zip(est.radii.tolist(), est.pair_counts.tolist(),
                   est.values.tolist()))
    if args.plot:
        emit_plot(est.radii.tolist(), {"C(r)": est.values.tolist()}, args.plot,
                  log_y=True, title="cross-correlation integral", x_label="r")
    fit = renyi.fit_divergence(est)
    _write_json(args.fit, fit.as_dict())
    return EXIT_OK


def cmd_diagnose(args):
    sys_ = systems.parse_system(args.system)
    if args.mode == "h1":
        psi = systems.parse_observation(args.psi, sys_.dim)
        phi = systems.parse_observation(args.phi, sys_.dim)
        fit = diagnostics.correlation_decay(sys_, psi, phi, _int_list(args.lags),
                                            args.M, args.seed)
        _write_csv(args.out, ["lag", "cov"], fit.rows())
        _write_json(args.summary, {
            "a": fit.a, "alpha": fit.alpha, "noise_floor": fit.noise_floor,
            "envelope_ok": fit.envelope_ok, "violations": list(fit.violations),
            "indistinguishable_from_zero": fit.indistinguishable_from_zero})
        return EXIT_OK
    obs = systems.parse_observation(args.obs, sys_.dim)
    samples = obs(systems.sample_invariant(sys_, args.seed, args.M, stream=0))
    centers = obs(systems.sample_invariant(sys_, args.seed, args.centers, stream=1))
    rep = diagnostics.annuli_regularity(samples, centers, _float_list(args.r_grid),
                                        _float_list(args.rho_grid), args.xi,
                                        args.beta)
    _write_csv(args.out, ["r", "rho", "mass", "bound", "ratio"], rep.rows())
    _write_json(args.summary, {"xi": rep.xi, "beta": rep.beta,
                               "max_violation_ratio": rep.max_violation_ratio})
    return EXIT_OK


def cmd_experiment(args):
    config = experiment.ExperimentConfig.from_json(args.config)
    report = experiment.run_experiment(config, workers=args.workers)
    with _sink(config.out_csv) as fh:
        fh.write(report.to_csv())
    if config.out_json:
        with open(config.out_json, "w", newline="\n") as fh:
            fh.write(report.to_json())
    else:
        sys.stderr.write(report.to_json())
    if args.plot:
        emit_plot(report.checkpoints,
                  {"q10": report.q10, "median": report.median, "q90": report.q90},
                  args.plot, reference=report.reference_inverse,
                  title="exponent quantiles across pairs", y_label="exponent")
    return EXIT_OK


# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="orbitmatch",
                description="Shortest distance between observed orbits.")
    sub = p.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    s = sub.add_parser("simulate", help="emit an orbit as CSV")
    s.add_argument("--system", required=True, help="system id (fiber id with --base)")
    s.add_argument("--base", help="base system id: simulate the skew product")
    s.add_argument("--x", help="initial point (comma-separated coordinates)")
    s.add_argument("--omega", help="initial noise state for skew products")
    s.add_argument("--seed", type=int, help="stationary start from this seed")
    s.add_argument("--stream", type=int, default=0)
    s.add_argument("--width", type=int, default=96)
    s.add_argument("-n", type=int, required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("distance", help="shortest distance curve of two orbits")
    s.add_argument("--system-t", required=True)
    s.add_argument("--system-s", required=True)
    s.add_argument("--obs", default="identity")
    s.add_argument("--x")
    s.add_argument("--y")
    s.add_argument("--seed", type=int, help="stationary starts when --x/--y are omitted")
    s.add_argument("--width", type=int, default=96)
    s.add_argument("-n", type=int, required=True)
    s.add_argument("--checkpoints", help="'10,100,1000', 'a:b[:step]' or 'geom:n0:ratio'")
    s.add_argument("--out")
    s.add_argument("--plot", help="write an SVG of the exponent curve")
    s.add_argument("--reference", type=float, help="reference line 1/C on the plot")
    s.set_defaults(func=cmd_distance)

    s = sub.add_parser("renyi", help="cross-correlation integral and divergence fit")
    s.add_argument("--samples-mu", required=True, help="sample count or CSV file")
    s.add_argument("--samples-eta", required=True, help="sample count or CSV file")
    s.add_argument("--system-t", default="doubling")
    s.add_argument("--system-s", default="tripling")
    s.add_argument("--obs", default="identity")
    s.add_argument("--r-max", type=float, default=0.25)
    s.add_argument("--k", type=int, default=8)
    s.add_argument("--ratio", type=float, default=0.5)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out")
    s.add_argument("--fit", help="path for the JSON fit record (default: stderr)")
    s.add_argument("--plot")
    s.set_defaults(func=cmd_renyi)

    s = sub.add_parser("diagnose", help="check the mixing or annulus hypotheses")
    s.add_argument("mode", choices=["h1", "h2"])
    s.add_argument("--system", default="doubling")
    s.add_argument("--psi", default="dist:0")
    s.add_argument("--phi", default="dist:0")
    s.add_argument("--lags", default="1:20")
    s.add_argument("--obs", default="identity")
    s.add_argument("-M", type=int, default=10 ** 5)
    s.add_argument("--centers", type=int, default=1000)
    s.add_argument("--r-grid", default="0.01,0.02,0.04")
    s.add_argument("--rho-grid", default="0.001,0.002,0.005")
    s.add_argument("--xi", type=float, default=0.5)
    s.add_argument("--beta", type=float, default=1.0)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out")
    s.add_argument("--summary", help="path for the JSON summary (default: stderr)")
    s.set_defaults(func=cmd_diagnose)

    s = sub.add_parser("experiment", help="run a limit-law experiment from JSON")
    s.add_argument("config")
    s.add_argument("--workers", type=int)
    s.add_argument("--plot")
    s.set_defaults(func=cmd_experiment)
    return p


def dispatch(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ConfigError, DomainError) as exc:
        sys.stderr.write(f"orbitmatch: error: {exc}\n")
        return EXIT_USAGE
    except OrbitMatchError as exc:
        sys.stderr.write(f"orbitmatch: {exc}\n")
        return EXIT_RUNTIME


def main(argv=None) -> int:
    return dispatch(sys.argv[1:] if argv is None else argv)
