"""Command-line interface.

Exit codes: 0 on success, 1 for data or numerical errors, 2 for usage errors.
"""

import argparse
import sys
from pathlib import Path

import numpy as np

from . import io
from .complex import random_complex, read_scf, write_scf
from .errors import ConfigError, TopoStatError
from .estimation import (
    COV_METHODS,
    correlogram,
    estimate_covariance,
    periodogram,
    periodogram_subspace,
    sample_covariance,
)
from .experiments import (
    EXPERIMENTS,
    ExperimentConfig,
    make_config,
    parse_config_text,
    run_experiment,
    signal_model,
)
from .recovery import (
    FromCovariance,
    Mixed,
    SelectionMask,
    Sem,
    Smoothness,
    interpolate_map,
    interpolate_regularized,
    interpolate_subspace,
    wiener_denoise,
)
from .signals import SignalEnsemble, generate
from .spectral import dirac, eigendecompose, hodge_laplacian


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(2)


def _operator(complex_, text):
    text = text.strip().lower()
    if text == "dirac":
        return dirac(complex_)
    if text.startswith("hodge:"):
        try:
            k = int(text.split(":", 1)[1])
        except ValueError:
            raise UsageError(f"bad operator {text!r}; use 'dirac' or 'hodge:<k>'") from None
        return hodge_laplacian(complex_, k)
    raise UsageError(f"bad operator {text!r}; use 'dirac' or 'hodge:<k>'")


def _floats(text):
    return tuple(float(v) for v in text.split(",") if v.strip())


def _load(args):
    complex_ = read_scf(args.complex)
    op = _operator(complex_, args.operator)
    basis = eigendecompose(op)
    return complex_, op, basis


def _signals(args, basis):
    ens = io.read_signals(args.signals)
    if ens.shape[0] != basis.size:
        raise TopoStatError(f"signal file has {ens.shape[0]} rows but the operator has size {basis.size}")
    return ens.data


def cmd_gen_complex(args):
    complex_ = random_complex(args.n0, args.p_edge, args.p_tri, args.seed)
    write_scf(complex_, args.out)


def cmd_gen_signals(args):
    complex_, op, basis = _load(args)
    if args.coeffs:
        coeffs = _floats(args.coeffs)
    else:
        coeffs = {"ma": (0.1, 0.1, 0.1), "ar": (0.3,)}.get(args.model, ())
    cfg = ExperimentConfig(model=args.model, coeffs=coeffs)
    S = generate(basis, signal_model(cfg), args.m, args.seed)
    offsets = complex_.offsets if op.kind == "dirac" else None
    io.write_signals(SignalEnsemble(S, offsets=offsets, operator_kind=op.kind), args.out)


def cmd_estimate(args):
    _, _, basis = _load(args)
    S = _signals(args, basis)
    cov = None
    if args.method == "correlogram":
        p = correlogram(basis, sample_covariance(S))
    elif args.method == "periodogram" and args.subspace:
        p = periodogram_subspace(basis, S, args.subspace)
    elif args.method == "periodogram":
        p = periodogram(basis, S)
    else:
        cov = estimate_covariance(args.method, S, basis, args.order, args.kernel_model)
        p = cov.psd
        if p is None:
            p = np.diag(basis.eigenvectors.T @ cov.matrix @ basis.eigenvectors)
    if args.params_out and (cov is None or cov.params is None):
        raise UsageError(f"method {args.method!r} has no fitted parameters")
    # write only once everything has been computed
    if args.cov_out:
        U = basis.eigenvectors
        io.write_matrix((U * p) @ U.T if cov is None else cov.matrix, args.cov_out)
    if args.params_out:
        io.write_vector(cov.params, args.params_out)
    io.write_vector(p, args.out)


def _psd_arg(args, basis):
    if args.psd:
        p = io.read_vector(args.psd)
        if p.shape[0] != basis.size:
            raise TopoStatError(f"PSD file has {p.shape[0]} entries but the operator has size {basis.size}")
        return p
    return None


def cmd_denoise(args):
    _, _, basis = _load(args)
    Y = _signals(args, basis)
    p = _psd_arg(args, basis)
    if p is None:
        # periodogram of the noisy data minus the noise floor
        p = np.maximum(periodogram(basis, Y) - args.noise_var, 0.0)
    out = wiener_denoise(basis, p, args.noise_var, Y, args.path)
    io.write_signals(SignalEnsemble(out), args.out)


def cmd_interpolate(args):
    complex_, op, basis = _load(args)
    observed = io.read_mask_indices(args.mask)
    mask = SelectionMask(tuple(observed), basis.size)
    ens = io.read_signals(args.signals)
    data = ens.data
    if data.shape[0] == basis.size and len(mask) != basis.size:
        data = data[mask.index]
    elif data.shape[0] != len(mask):
        raise TopoStatError(f"signal file has {data.shape[0]} rows; expected {len(mask)} observed rows or {basis.size}")
    method = args.method
    if method == "zero":
        out = mask.zero_fill(data)
    elif method == "smooth":
        out = interpolate_regularized(Smoothness(op), mask, args.noise_var, data)
    elif method == "sem":
        if args.alpha is None:
            raise UsageError("--alpha is required for method sem")
        out = interpolate_regularized(Sem(args.alpha, op), mask, args.noise_var, data)
    else:
        p = _psd_arg(args, basis)
        if p is None:
            raise UsageError(f"--psd is required for method {method}")
        if method == "map":
            U = basis.eigenvectors
            out = interpolate_map((U * p) @ U.T, mask, args.noise_var, data)
        elif method == "subspace":
            if args.subspace:
                idx = basis.indices(args.subspace)
            else:
                idx = np.flatnonzero(p > 0)
            out = interpolate_subspace(basis.eigenvectors[:, idx], p[idx], mask, args.noise_var, data)
        else:
            prec = Mixed(((1.0, FromCovariance(basis=basis, psd=p)), (args.gamma, Smoothness(op))))
            out = interpolate_regularized(prec, mask, args.noise_var, data)
    offsets = complex_.offsets if op.kind == "dirac" else None
    io.write_signals(SignalEnsemble(out, offsets=offsets), args.out)


_EXPERIMENT_FLAGS = (
    "n0", "p_edge", "p_tri", "complex_path", "operator", "model", "coeffs", "fit_order", "m_values", "m",
    "snr_db", "noise_vars", "fractions", "mask_order", "noise_var", "sem_alpha", "mixed_gammas", "methods",
    "trials", "workers",
)


def cmd_experiment(args):
    values = {}
    kind = args.kind
    if args.config:
        file_values = parse_config_text(Path(args.config).read_text(encoding="utf-8"))
        kind = file_values.pop("experiment", kind)
    else:
        file_values = {}
    if kind is None:
        raise UsageError("experiment kind required (--kind or 'experiment = ...' in --config)")
    if kind not in EXPERIMENTS:
        raise UsageError(f"unknown experiment {kind!r}; choose from {EXPERIMENTS}")
    base = ExperimentConfig.full(kind) if args.full_scale else ExperimentConfig.desk(kind)
    for name in _EXPERIMENT_FLAGS:
        value = getattr(args, name, None)
        if value is not None:
            values[name] = value
    if args.seed is not None:
        values["master_seed"] = args.seed
    if args.timing:
        values["timing"] = True
    values.update(file_values)
    cfg = make_config(values, base)
    text = run_experiment(cfg)
    Path(args.out).write_text(text, encoding="utf-8")


def build_parser():
    parser = _Parser(prog="topostat", description="Stationary random signals on simplicial complexes.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, needs_complex=True):
        p.add_argument("--seed", type=int, default=0)
        if needs_complex:
            p.add_argument("--complex", required=True, help="SCF file")
            p.add_argument("--operator", default="dirac", help="dirac or hodge:<k>")

    p = sub.add_parser("gen-complex", help="random order-2 complex")
    common(p, needs_complex=False)
    p.add_argument("--n0", type=int, required=True)
    p.add_argument("--p-edge", type=float, required=True)
    p.add_argument("--p-tri", type=float, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_complex)

    p = sub.add_parser("gen-signals", help="stationary realizations")
    common(p)
    p.add_argument("--model", default="ma", choices=("ma", "ar", "lowpass", "exponential", "sigmoid", "gaussian", "laplacian"))
    p.add_argument("--coeffs", help="comma-separated coefficients or parameters (default: ma 0.1,0.1,0.1; ar 0.3; model defaults otherwise)")
    p.add_argument("--m", type=int, default=1000)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_signals)

    p = sub.add_parser("estimate", help="PSD / covariance estimation")
    common(p)
    p.add_argument("--signals", required=True)
    p.add_argument("--method", required=True, choices=COV_METHODS)
    p.add_argument("--order", type=int, default=1, help="model order R for parametric fits")
    p.add_argument("--kernel-model", default="gaussian", choices=("gaussian", "laplacian"))
    p.add_argument("--subspace", choices=("gradient", "curl", "harmonic"), help="restrict the periodogram")
    p.add_argument("--out", required=True, help="PSD CSV (index,value)")
    p.add_argument("--cov-out", help="covariance matrix CSV")
    p.add_argument("--params-out", help="fitted coefficient CSV (index,value)")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("denoise", help="Wiener denoising")
    common(p)
    p.add_argument("--signals", required=True)
    p.add_argument("--noise-var", type=float, required=True)
    p.add_argument("--psd", help="PSD CSV; default: periodogram minus the noise variance")
    p.add_argument("--path", default="spectral", choices=("spectral", "spatial"))
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_denoise)

    p = sub.add_parser("interpolate", help="recover unobserved simplices")
    common(p)
    p.add_argument("--signals", required=True, help="observed rows (P) or full-size rows (N)")
    p.add_argument("--mask", required=True, help="one observed row index per line")
    p.add_argument("--method", default="map", choices=("map", "smooth", "sem", "zero", "subspace", "mixed"))
    p.add_argument("--noise-var", type=float, default=0.01)
    p.add_argument("--psd", help="PSD CSV (map, subspace, mixed)")
    p.add_argument("--alpha", type=float, help="AR(1) coefficient for sem")
    p.add_argument("--gamma", type=float, default=0.1, help="smoothness weight for mixed")
    p.add_argument("--subspace", choices=("gradient", "curl", "harmonic"))
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_interpolate)

    p = sub.add_parser("experiment", help="seeded Monte Carlo study to CSV")
    p.add_argument("--kind", choices=EXPERIMENTS)
    p.add_argument("--config", help="flat 'key = value' file; overrides flags")
    p.add_argument("--full-scale", action="store_true", help="50 vertices, 50 trials")
    p.add_argument("--seed", type=int, default=None, help="master seed")
    p.add_argument("--workers", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--n0", type=int)
    p.add_argument("--p-edge", type=float)
    p.add_argument("--p-tri", type=float)
    p.add_argument("--complex", dest="complex_path")
    p.add_argument("--operator")
    p.add_argument("--model")
    p.add_argument("--coeffs")
    p.add_argument("--fit-order", type=int)
    p.add_argument("--m-values")
    p.add_argument("--m", type=int)
    p.add_argument("--snr-db")
    p.add_argument("--noise-vars")
    p.add_argument("--fractions")
    p.add_argument("--mask-order", type=int)
    p.add_argument("--noise-var", type=float)
    p.add_argument("--sem-alpha", type=float)
    p.add_argument("--mixed-gammas")
    p.add_argument("--methods")
    p.add_argument("--timing", action="store_true", help="record wall-clock runtimes (output no longer byte-reproducible)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"topostat: error: {exc}", file=sys.stderr)
        return 2
    except (TopoStatError, ValueError, ArithmeticError, OSError, np.linalg.LinAlgError) as exc:
        print(f"topostat: error: {exc}", file=sys.stderr)
        return 1
    return 0


cli_main = main

if __name__ == "__main__":
    sys.exit(main())
