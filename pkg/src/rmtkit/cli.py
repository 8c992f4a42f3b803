"""Command-line front end.

Subcommands: spectrum, clean, backtest, svd, simulate, dynamics, spikes.
Exit codes: 0 success, 1 input error, 2 numerical failure.  Configuration
precedence: command-line flags > config file (plain ``key = value`` lines) >
built-in defaults.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import crosscorr, dynamics, fileio, portfolio, spectra, spikes, synth
from .cleaning import SCHEME_KINDS, CleaningScheme, apply_scheme
from .density import DensityError
from .estimators import EstimatorError, pearson, standardize
from .kernels import KernelConvergenceError
from .transforms import TransformError

__all__ = ["main", "run"]


class _InputError(Exception):
    """User-facing input problem -> exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _InputError(message)


def _build_parser() -> _Parser:
    p = _Parser(prog="rmtkit", description=__doc__,
                formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--config", help="file of 'key = value' overrides")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("spectrum", help="emit an asymptotic density as CSV")
    sp.add_argument("--law", choices=["mp", "ewma", "wigner", "elliptic",
                                      "rsvd", "powerlaw-dressed"])
    sp.add_argument("--q", type=float)
    sp.add_argument("--mu", type=float)
    sp.add_argument("--alpha", type=float)
    sp.add_argument("--n", type=float, help="N/T for the rsvd law")
    sp.add_argument("--m", type=float, help="M/T for the rsvd law")
    sp.add_argument("--out")

    cl = sub.add_parser("clean", help="clean a correlation matrix")
    cl.add_argument("--matrix", help="dense correlation CSV")
    cl.add_argument("--panel", help="panel CSV (Pearson estimate is cleaned)")
    cl.add_argument("--scheme", choices=list(SCHEME_KINDS))
    cl.add_argument("--alpha", type=float)
    cl.add_argument("--mu", type=float)
    cl.add_argument("--out")

    bt = sub.add_parser("backtest", help="rolling minimum-variance backtest")
    bt.add_argument("--panel", required=True)
    bt.add_argument("--scheme", choices=["raw", *SCHEME_KINDS])
    bt.add_argument("--alpha", type=float)
    bt.add_argument("--mu", type=float)
    bt.add_argument("--window", type=int)
    bt.add_argument("--horizon", type=int)
    bt.add_argument("--step", type=int)
    bt.add_argument("--predictor", choices=["momentum", "random"])
    bt.add_argument("--seed", type=int)
    bt.add_argument("--out")

    sv = sub.add_parser("svd", help="cross-correlation singular spectrum")
    sv.add_argument("--x", required=True, help="input panel CSV")
    sv.add_argument("--y", required=True, help="output panel CSV")
    sv.add_argument("--out")

    si = sub.add_parser("simulate", help="generate a synthetic panel")
    si.add_argument("--spec", choices=["identity", "spike", "powerlaw"])
    si.add_argument("--rho", type=float, help="off-diagonal correlation")
    si.add_argument("--alpha", type=float)
    si.add_argument("--mu", type=float,
                    help="heavy-tail index; omit for Gaussian returns")
    si.add_argument("--N", type=int)
    si.add_argument("--T", type=int)
    si.add_argument("--seed", type=int)
    si.add_argument("--out")

    dy = sub.add_parser("dynamics", help="track the top eigenpair, emit variograms")
    dy.add_argument("--panel", required=True)
    dy.add_argument("--epsilon", type=float)
    dy.add_argument("--tau-max", type=int)
    dy.add_argument("--out")

    sk = sub.add_parser("spikes", help="detect outlier eigenvalues")
    sk.add_argument("--panel", help="panel CSV (q inferred from the shape)")
    sk.add_argument("--matrix", help="dense correlation CSV (requires --q)")
    sk.add_argument("--q", type=float)
    sk.add_argument("--u", type=float)
    sk.add_argument("--out")
    return p


DEFAULTS = {
    "spectrum": {"law": "mp", "q": 0.5, "mu": 4.0, "alpha": 0.35,
                 "n": 0.125, "m": 0.085, "out": "spectrum.csv"},
    "clean": {"scheme": "clip", "alpha": 0.5, "mu": 2.0, "out": "cleaned.csv"},
    "backtest": {"scheme": "raw", "alpha": 0.5, "mu": 2.0, "window": 1000,
                 "horizon": 99, "step": 100, "predictor": "momentum",
                 "out": "backtest.csv"},
    "svd": {"out": "svd.csv"},
    "simulate": {"spec": "identity", "rho": 0.3, "alpha": 0.35,
                 "N": 100, "T": 500, "out": "panel.csv"},
    "dynamics": {"epsilon": 0.02, "tau_max": 250, "out": "variogram.csv"},
    "spikes": {"q": None, "u": 3.0, "out": None},
}


def _load_config(path) -> dict:
    out = {}
    try:
        with open(path) as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise _InputError(
                        f"{path}:{lineno}: expected 'key = value'")
                key, value = line.split("=", 1)
                out[key.strip().replace("-", "_")] = value.strip()
    except OSError as exc:
        raise _InputError(f"cannot read config file: {exc}") from exc
    return out


def _resolve(args: argparse.Namespace, config: dict) -> argparse.Namespace:
    """Apply precedence flags > config > defaults for every None field."""
    defaults = DEFAULTS.get(args.command, {})
    for key, fallback in defaults.items():
        if getattr(args, key, None) is not None:
            continue
        if key in config:
            raw = config[key]
            caster = type(fallback) if fallback is not None else str
            try:
                value = caster(raw) if caster is not bool else raw == "true"
            except ValueError as exc:
                raise _InputError(f"config field {key}: {exc}") from exc
            setattr(args, key, value)
        else:
            setattr(args, key, fallback)
    return args


# ---------------------------------------------------------------------------
# Subcommand implementations

def _cmd_spectrum(args) -> int:
    if args.law == "mp":
        dens = spectra.mp_density(args.q)
    elif args.law == "ewma":
        dens = spectra.ewma_density(args.q)
    elif args.law == "wigner":
        dens = spectra.wigner_semicircle()
    elif args.law == "elliptic":
        dens = spectra.elliptic_student_density(
            spectra.EllipticParams(args.q, args.mu))
    elif args.law == "rsvd":
        dens = spectra.rsvd_benchmark(args.n, args.m)
    else:  # powerlaw-dressed
        prior = spectra.powerlaw_prior_density(
            spectra.PowerLawPrior(args.alpha))
        dens = spectra.dressed_spectrum(prior, args.q)
    dens.to_csv(args.out)
    print(f"wrote {args.out}")
    return 0


def _require_matrix(args):
    if args.matrix:
        return fileio.read_matrix_csv(args.matrix)
    if args.panel:
        return pearson(standardize(fileio.read_panel_csv(args.panel)))
    raise _InputError("need --matrix or --panel")


def _cmd_clean(args) -> int:
    E = _require_matrix(args)
    scheme = CleaningScheme(args.scheme, args.alpha, args.mu)
    cleaned = apply_scheme(E, scheme)
    fileio.write_matrix_csv(
        args.out, cleaned,
        header_lines=fileio.metadata_header(
            "clean", {"scheme": args.scheme, "alpha": args.alpha}))
    print(f"wrote {args.out}")
    return 0


def _cmd_backtest(args) -> int:
    panel = fileio.read_panel_csv(args.panel)
    scheme = (None if args.scheme == "raw"
              else CleaningScheme(args.scheme, args.alpha, args.mu))
    if args.predictor == "random" and args.seed is None:
        raise _InputError("field seed: required for the random predictor")
    _, mean_in, mean_out = portfolio.backtest(
        panel, scheme, window=args.window, horizon=args.horizon,
        step=args.step, predictor=args.predictor, seed=args.seed)
    portfolio.write_backtest_csv(
        args.out,
        [(args.alpha, args.scheme, np.sqrt(mean_in), np.sqrt(mean_out))])
    print(f"wrote {args.out} (in {np.sqrt(mean_in):.4f}, "
          f"out {np.sqrt(mean_out):.4f})")
    return 0


def _cmd_svd(args) -> int:
    X = fileio.read_panel_csv(args.x)
    Y = fileio.read_panel_csv(args.y)
    Xh = crosscorr.normalize_principal_components(standardize(X))
    Yh = crosscorr.normalize_principal_components(standardize(Y))
    result = crosscorr.cross_singulars(Xh, Yh)
    with open(args.out, "w") as fh:
        fh.write(f"# null band [{result.null_band[0]:.12g},"
                 f" {result.null_band[1]:.12g}]"
                 f" threshold {result.threshold:.12g}\n")
        fh.write(f"# significant {result.significant_count}\n")
        fh.write("rank,singular_value\n")
        for i, s in enumerate(result.singular_values, start=1):
            fh.write(f"{i},{s:.12g}\n")
    print(f"wrote {args.out} ({result.significant_count} significant)")
    return 0


def _cmd_simulate(args) -> int:
    if args.seed is None:
        raise _InputError("field seed: required for simulate")
    if args.spec == "identity":
        spec = synth.TrueCorrelationSpec("identity", args.N)
    elif args.spec == "spike":
        spec = synth.TrueCorrelationSpec("single_spike", args.N,
                                         rho_bar=args.rho)
    else:
        spec = synth.TrueCorrelationSpec("powerlaw", args.N, alpha=args.alpha)
    C = synth.build_true_correlation(spec, args.seed)
    if args.mu is None:
        panel = synth.gaussian_panel(C, args.T, args.seed + 1)
    else:
        panel = synth.student_panel(C, args.mu, args.T, args.seed + 1)
    params = {"spec": args.spec, "N": args.N, "T": args.T, "seed": args.seed,
              "generator": synth.GENERATOR_ID}
    if args.spec == "spike":
        params["rho"] = args.rho
    if args.spec == "powerlaw":
        params["alpha"] = args.alpha
    if args.mu is not None:
        params["mu"] = args.mu
    fileio.write_panel_csv(args.out, panel,
                           fileio.metadata_header("simulate", params))
    print(f"wrote {args.out}")
    return 0


def _cmd_dynamics(args) -> int:
    panel = fileio.read_panel_csv(args.panel)
    v_ref = pearson(standardize(panel)).eigenvectors[:, 0]
    track = dynamics.track_top(panel, args.epsilon, v_ref)
    tau = np.unique(np.geomspace(1, args.tau_max, 40).astype(int))
    val, vec = dynamics.empirical_variogram(track, tau)
    dynamics.write_variogram_csv(
        args.out, tau, val, vec,
        header_comment=f"epsilon={args.epsilon:.12g}")
    print(f"wrote {args.out}")
    return 0


def _cmd_spikes(args) -> int:
    if args.panel:
        panel = standardize(fileio.read_panel_csv(args.panel))
        E = pearson(panel)
        q = args.q if args.q is not None else panel.N / panel.T
    elif args.matrix:
        if args.q is None:
            raise _InputError("field q: required with --matrix")
        E = fileio.read_matrix_csv(args.matrix)
        q = args.q
    else:
        raise _InputError("need --panel or --matrix")
    report = spikes.detect_spikes(E, q, u_threshold=args.u)
    text = report.to_text()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        print(f"wrote {args.out} ({len(report.outliers)} outliers)")
    else:
        sys.stdout.write(text)
    return 0


_COMMANDS = {
    "spectrum": _cmd_spectrum,
    "clean": _cmd_clean,
    "backtest": _cmd_backtest,
    "svd": _cmd_svd,
    "simulate": _cmd_simulate,
    "dynamics": _cmd_dynamics,
    "spikes": _cmd_spikes,
}

_NUMERICAL_ERRORS = (KernelConvergenceError, TransformError, DensityError,
                     np.linalg.LinAlgError, FloatingPointError)


def run(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        config = _load_config(args.config) if args.config else {}
        args = _resolve(args, config)
        return _COMMANDS[args.command](args)
    except (_InputError, EstimatorError, OSError, ValueError) as exc:
        if isinstance(exc, _NUMERICAL_ERRORS):
            print(f"rmtkit: numerical failure: {exc}", file=sys.stderr)
            return 2
        print(f"rmtkit: error: {exc}", file=sys.stderr)
        return 1
    except _NUMERICAL_ERRORS as exc:
        print(f"rmtkit: numerical failure: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())
