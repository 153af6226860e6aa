"""Seeded Monte Carlo experiments producing plot-ready CSV rows.

Three studies: covariance error versus the number of realizations, denoising
error versus SNR and interpolation error versus the observed fraction. Trials
run independently from seeds derived from (master_seed, trial), can be spread
over threads, and their rows are emitted in a fixed order, so output bytes do
not depend on the worker count (unless wall-clock timing is requested).
"""

import dataclasses
import math
import threading
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .complex import random_complex, read_scf
from .errors import ConfigError, DegenerateRecoveryWarning, FitWarning, TopoStatError
from .estimation import COV_METHODS, estimate_covariance, periodogram, rel_error, sample_covariance
from .recovery import (
    FromCovariance,
    Mixed,
    SelectionMask,
    Sem,
    Smoothness,
    interpolate_map,
    interpolate_regularized,
    wiener_denoise,
)
from .signals import AutoRegressive, Polynomial, SPECTRAL_MODELS, SpectralResponse, generate, make_rng, true_cov_psd
from .spectral import dirac, eigendecompose, hodge_laplacian

EXPERIMENTS = ("cov", "denoise", "interp")
SIGNAL_MODELS = ("ma", "ar") + SPECTRAL_MODELS
DENOISE_METHODS = ("noisy", "wiener", "wiener_pg", "smooth")
INTERP_METHODS = ("map", "smooth", "sem", "zero", "mixed")
HEADER = "method,sweep_param,sweep_value,trial,error,runtime_s,flag"


@dataclass
class ExperimentConfig:
    experiment: str = "cov"
    n0: int = 20
    p_edge: float = 0.3
    p_tri: float = 0.4
    complex_path: str = None
    operator: str = "dirac"
    model: str = "ma"
    coeffs: tuple = (0.1, 0.1, 0.1)
    fit_order: int = None
    m_values: tuple = (100, 1000, 10000)
    m: int = 1000
    snr_db: tuple = (1.0, 5.0, 10.0, 20.0, 30.0)
    noise_vars: tuple = None
    fractions: tuple = (0.2, 0.3, 0.4, 0.5, 0.6, 0.7)
    mask_order: int = None
    noise_var: float = 0.01
    sem_alpha: float = None
    smooth_gamma: float = 0.1
    mixed_gammas: tuple = (0.0, 0.1, 1.0)
    kernel_model: str = "gaussian"
    methods: tuple = ("sample", "correlogram", "periodogram", "ma_spatial", "ma_spectral", "ar_spatial", "ar_spectral")
    trials: int = 10
    master_seed: int = 0
    workers: int = 1
    timing: bool = False
    output: str = None

    @classmethod
    def full(cls, experiment, **overrides):
        """Full-scale settings: 50 vertices, edge prob. 0.2, triangle prob. 0.3, 50 trials."""
        base = dict(experiment=experiment, n0=50, p_edge=0.2, p_tri=0.3, trials=50, m=10000)
        if experiment == "cov":
            base["m_values"] = (100, 300, 1000, 3000, 10000)
        if experiment == "denoise":
            base["methods"] = ("noisy", "wiener")
        if experiment == "interp":
            base.update(model="ma", coeffs=(0.3, 0.3, 0.3), methods=INTERP_METHODS[:4])
        base.update(overrides)
        return cls(**base)

    @classmethod
    def desk(cls, experiment, **overrides):
        base = dict(experiment=experiment)
        if experiment == "denoise":
            base["methods"] = ("noisy", "wiener")
        if experiment == "interp":
            base.update(model="ma", coeffs=(0.3, 0.3, 0.3), methods=INTERP_METHODS[:4], m=200)
        base.update(overrides)
        return cls(**base)

    @property
    def order(self):
        return self.fit_order if self.fit_order is not None else len(self.coeffs)


# ---- config parsing and validation ---------------------------------------------

_TUPLE_FIELDS = {"coeffs", "m_values", "snr_db", "noise_vars", "fractions", "mixed_gammas", "methods"}


def _convert(name, value, current):
    if value is None or (isinstance(value, str) and value.strip().lower() in ("none", "")):
        return None
    if name in _TUPLE_FIELDS:
        if isinstance(value, str):
            value = [v for v in value.replace(";", ",").split(",") if v.strip()]
        items = list(value)
        if name == "methods":
            return tuple(str(v).strip() for v in items)
        if name == "m_values":
            return tuple(int(float(v)) for v in items)
        return tuple(float(v) for v in items)
    if name in ("n0", "fit_order", "m", "mask_order", "trials", "master_seed", "workers"):
        return int(float(value))
    if name in ("p_edge", "p_tri", "noise_var", "sem_alpha", "smooth_gamma"):
        return float(value)
    if name == "timing":
        if isinstance(value, str):
            return value.strip().lower() in ("1", "true", "yes", "on")
        return bool(value)
    return str(value).strip() if isinstance(value, str) else value


def parse_config_text(text):
    """Parse flat ``key = value`` lines ('#' starts a comment)."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", "expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def make_config(values=None, base=None):
    cfg = base if base is not None else ExperimentConfig()
    names = {f.name for f in dataclasses.fields(ExperimentConfig)}
    changes = {}
    for key, value in (values or {}).items():
        if key not in names:
            raise ConfigError(key, "unknown configuration key")
        try:
            changes[key] = _convert(key, value, getattr(cfg, key))
        except (TypeError, ValueError) as exc:
            raise ConfigError(key, f"cannot parse {value!r}: {exc}") from None
    cfg = dataclasses.replace(cfg, **changes)
    validate_config(cfg)
    return cfg


def _parse_operator(text):
    text = text.strip().lower()
    if text == "dirac":
        return "dirac", None
    if text.startswith("hodge:"):
        try:
            return "hodge", int(text.split(":", 1)[1])
        except ValueError:
            pass
    raise ConfigError("operator", f"expected 'dirac' or 'hodge:<k>', got {text!r}")


def validate_config(cfg):
    if cfg.experiment not in EXPERIMENTS:
        raise ConfigError("experiment", f"must be one of {EXPERIMENTS}")
    if cfg.trials < 1:
        raise ConfigError("trials", "must be at least 1")
    if cfg.workers < 1:
        raise ConfigError("workers", "must be at least 1")
    if cfg.complex_path is None:
        if cfg.n0 < 1:
            raise ConfigError("n0", "must be at least 1")
        for name in ("p_edge", "p_tri"):
            if not 0.0 <= getattr(cfg, name) <= 1.0:
                raise ConfigError(name, "must lie in [0, 1]")
    _parse_operator(cfg.operator)
    if cfg.model not in SIGNAL_MODELS:
        raise ConfigError("model", f"must be one of {SIGNAL_MODELS}")
    if not cfg.coeffs and cfg.model in ("ma", "ar"):
        raise ConfigError("coeffs", "MA/AR models need coefficients")
    if cfg.order < 1:
        raise ConfigError("fit_order", "must be at least 1")
    if not cfg.methods:
        raise ConfigError("methods", "must not be empty")
    if cfg.experiment == "cov":
        if not cfg.m_values or min(cfg.m_values) < 1:
            raise ConfigError("m_values", "must be a non-empty list of positive integers")
        bad = [m for m in cfg.methods if m not in COV_METHODS]
        if bad:
            raise ConfigError("methods", f"unknown covariance methods {bad}")
    elif cfg.experiment == "denoise":
        if cfg.m < 1:
            raise ConfigError("m", "must be at least 1")
        sweep = cfg.noise_vars if cfg.noise_vars is not None else cfg.snr_db
        if not sweep:
            raise ConfigError("snr_db", "sweep list must not be empty")
        if cfg.noise_vars is not None and not all(v > 0 and math.isfinite(v) for v in cfg.noise_vars):
            raise ConfigError("noise_vars", "noise variance must be positive and finite")
        if cfg.noise_vars is None and not all(math.isfinite(v) for v in cfg.snr_db):
            raise ConfigError("snr_db", "SNR must be finite (noise variance must be positive)")
        for m in cfg.methods:
            if m not in DENOISE_METHODS and not (m.startswith("cov:") and m[4:] in COV_METHODS + ("wiener_sample",)):
                raise ConfigError("methods", f"unknown denoising method {m!r}")
    else:
        if cfg.m < 1:
            raise ConfigError("m", "must be at least 1")
        if not cfg.fractions or not all(0.0 <= f <= 1.0 for f in cfg.fractions):
            raise ConfigError("fractions", "must be a non-empty list of values in [0, 1]")
        if not (cfg.noise_var > 0 and math.isfinite(cfg.noise_var)):
            raise ConfigError("noise_var", "noise variance must be positive")
        bad = [m for m in cfg.methods if m not in INTERP_METHODS]
        if bad:
            raise ConfigError("methods", f"unknown interpolation methods {bad}")


# ---- shared trial machinery ---------------------------------------------------


def trial_seeds(master_seed, trial, n=4):
    """Independent integer seeds for one trial, derived from (master_seed, trial)."""
    state = np.random.SeedSequence([int(master_seed), int(trial)]).generate_state(n, dtype=np.uint64)
    return [int(s) for s in state]


def signal_model(cfg):
    if cfg.model == "ma":
        return Polynomial(cfg.coeffs)
    if cfg.model == "ar":
        return AutoRegressive(cfg.coeffs)
    return SpectralResponse(cfg.model, cfg.coeffs if cfg.coeffs else None)


def build_setup(cfg, seed):
    """Complex, operator, basis, filter, true covariance and PSD for one trial."""
    complex_ = read_scf(cfg.complex_path) if cfg.complex_path else random_complex(cfg.n0, cfg.p_edge, cfg.p_tri, seed)
    kind, k = _parse_operator(cfg.operator)
    op = dirac(complex_) if kind == "dirac" else hodge_laplacian(complex_, k)
    basis = eigendecompose(op)
    spec = signal_model(cfg)
    C, p = true_cov_psd(basis, spec)
    return dict(complex=complex_, operator=op, basis=basis, spec=spec, C=C, p=p)


@dataclass(order=True)
class Row:
    method_rank: int
    sweep_rank: int
    trial: int
    method: str = field(compare=False)
    sweep_param: str = field(compare=False)
    sweep_value: float = field(compare=False)
    error: float = field(compare=False)
    runtime: float = field(compare=False, default=None)
    flag: str = field(compare=False, default="")


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _median_lower(values):
    values = sorted(values)
    return values[(len(values) - 1) // 2]


def format_csv(cfg, rows, sweep_param, sweep_values):
    """Data rows in (method, sweep, trial) order, then per-(method, sweep) lower-median rows."""
    rows = sorted(rows)
    lines = [
        f"# topostat experiment={cfg.experiment} operator={cfg.operator} model={cfg.model} "
        f"trials={cfg.trials} master_seed={cfg.master_seed}",
        "# summary rows (trial=median) use the lower median for even counts over finite errors",
    ]
    if cfg.experiment == "denoise":
        lines.append("# snr_db = 10*log10((trace(C)/N) / noise_var)")
    lines.append(HEADER)
    for r in rows:
        lines.append(",".join([r.method, r.sweep_param, _fmt(r.sweep_value), str(r.trial), _fmt(r.error), _fmt(r.runtime), r.flag]))
    groups = {}
    for r in rows:
        groups.setdefault((r.method_rank, r.sweep_rank), []).append(r)
    for key in sorted(groups):
        grp = groups[key]
        finite = [r.error for r in grp if r.error is not None and math.isfinite(r.error)]
        err = _median_lower(finite) if finite else float("nan")
        times = [r.runtime for r in grp if r.runtime is not None]
        runtime = _median_lower(times) if times else None
        flag = "" if len(finite) == len(grp) else f"nonfinite_{len(grp) - len(finite)}"
        head = grp[0]
        lines.append(",".join([head.method, head.sweep_param, _fmt(head.sweep_value), "median", _fmt(err), _fmt(runtime), flag]))
    return "\n".join(lines) + "\n"


def _flag_from(categories):
    names = []
    for category in categories:
        name = "degenerate" if issubclass(category, DegenerateRecoveryWarning) else "fit_warning" if issubclass(category, FitWarning) else None
        if name and name not in names:
            names.append(name)
    return ";".join(names)


# Warnings raised inside a trial are routed to that thread's own list. The
# stdlib catch_warnings context swaps process-wide state, so it cannot be
# entered per trial once trials run on several threads.
_caught = threading.local()


def _route_warning(message, category, filename, lineno, file=None, line=None):
    log = getattr(_caught, "log", None)
    if log is not None:
        log.append(category)


def _timed(cfg, fn):
    _caught.log = []
    try:
        t0 = time.perf_counter()
        out = fn()
        elapsed = time.perf_counter() - t0
        categories = _caught.log
    finally:
        _caught.log = None
    return out, (elapsed if cfg.timing else None), _flag_from(categories)


def _failed_rows(cfg, trial, methods, sweep_param, sweep_values, exc):
    flag = type(exc).__name__
    return [
        Row(mi, si, trial, m, sweep_param, v, float("nan"), None, flag)
        for mi, m in enumerate(methods)
        for si, v in enumerate(sweep_values)
    ]


def _run(cfg, trial_fn, methods, sweep_param, sweep_values):
    def guarded(trial):
        try:
            return trial_fn(trial)
        except TopoStatError as exc:
            return _failed_rows(cfg, trial, methods, sweep_param, sweep_values, exc)

    with warnings.catch_warnings():
        warnings.simplefilter("always")
        warnings.showwarning = _route_warning
        if cfg.workers > 1:
            with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
                results = list(pool.map(guarded, range(cfg.trials)))
        else:
            results = [guarded(t) for t in range(cfg.trials)]
    rows = [r for trial_rows in results for r in trial_rows]
    return format_csv(cfg, rows, sweep_param, sweep_values)


# ---- the three studies ----------------------------------------------------------


def run_experiment_cov(cfg):
    """Covariance error (and optional runtime) per method and number of realizations."""
    validate_config(cfg)
    if cfg.experiment != "cov":
        raise ConfigError("experiment", "run_experiment_cov needs experiment = cov")
    methods = list(cfg.methods)
    m_values = list(cfg.m_values)

    def trial_fn(trial):
        seeds = trial_seeds(cfg.master_seed, trial)
        setup = build_setup(cfg, seeds[0])
        basis, C = setup["basis"], setup["C"]
        S = generate(basis, setup["spec"], max(m_values), seeds[1])
        rows = []
        for si, M in enumerate(m_values):
            S_m = S[:, :M]
            for mi, method in enumerate(methods):
                est, runtime, flag = _timed(cfg, lambda: estimate_covariance(method, S_m, basis, cfg.order, cfg.kernel_model))
                err = rel_error(est, C)
                flag = ";".join(f for f in [flag] + [f for f in est.flags if f not in flag] if f)
                if not math.isfinite(err) and not flag:
                    flag = "nonfinite"
                rows.append(Row(mi, si, trial, method, "M", M, err, runtime, flag))
        return rows

    return _run(cfg, trial_fn, methods, "M", m_values)


def noise_variance_for_snr(C, snr_db):
    """Noise variance giving SNR_dB = 10 log10((tr C / N) / noise_var)."""
    power = float(np.trace(C)) / C.shape[0]
    return power / 10.0 ** (snr_db / 10.0)


def run_experiment_denoise(cfg):
    """Signal error of noisy data and denoisers, plus covariance error of estimates from noisy data."""
    validate_config(cfg)
    if cfg.experiment != "denoise":
        raise ConfigError("experiment", "run_experiment_denoise needs experiment = denoise")
    methods = list(cfg.methods)
    by_noise = cfg.noise_vars is not None
    sweep_param = "noise_var" if by_noise else "snr_db"
    sweep = list(cfg.noise_vars if by_noise else cfg.snr_db)

    def trial_fn(trial):
        seeds = trial_seeds(cfg.master_seed, trial)
        setup = build_setup(cfg, seeds[0])
        basis, C, p, op = setup["basis"], setup["C"], setup["p"], setup["operator"]
        S = generate(basis, setup["spec"], cfg.m, seeds[1])
        noise = make_rng(seeds[2]).standard_normal((cfg.m, basis.size)).T
        rows = []
        for si, value in enumerate(sweep):
            noise_var = value if by_noise else noise_variance_for_snr(C, value)
            if not (noise_var > 0 and math.isfinite(noise_var)):
                raise ConfigError(sweep_param, f"noise variance {noise_var} must be positive")
            Y = S + math.sqrt(noise_var) * noise
            wiener_out = None
            for mi, method in enumerate(methods):
                flag = ""
                runtime = None
                if method == "noisy":
                    err = rel_error(Y, S)
                elif method in ("wiener", "wiener_pg"):
                    if method == "wiener":
                        psd = p
                    else:
                        psd = np.maximum(periodogram(basis, Y) - noise_var, 0.0)
                    out, runtime, flag = _timed(cfg, lambda: wiener_denoise(basis, psd, noise_var, Y))
                    if method == "wiener":
                        wiener_out = out
                    err = rel_error(out, S)
                elif method == "smooth":
                    T = op.matrix
                    Q = T @ T if op.kind == "dirac" else T
                    A = np.eye(basis.size) + cfg.smooth_gamma * Q
                    out, runtime, flag = _timed(cfg, lambda: np.linalg.solve(A, Y))
                    err = rel_error(out, S)
                else:
                    tag = method[4:]
                    if tag == "wiener_sample":
                        if wiener_out is None:
                            wiener_out = wiener_denoise(basis, p, noise_var, Y)
                        est, runtime, flag = _timed(cfg, lambda: sample_covariance(wiener_out))
                    else:
                        est, runtime, flag = _timed(cfg, lambda: estimate_covariance(tag, Y, basis, cfg.order, cfg.kernel_model))
                    err = rel_error(est, C)
                    flag = ";".join(f for f in [flag] + list(est.flags) if f)
                rows.append(Row(mi, si, trial, method, sweep_param, value, err, runtime, flag))
        return rows

    return _run(cfg, trial_fn, methods, sweep_param, sweep)


def random_mask(size, fraction, rng, offsets=None, order=None):
    """Uniform mask of floor(fraction * size) rows, or, with ``order``, all rows of
    other orders plus floor(fraction * N_order) rows of that order."""
    if order is None:
        P = int(math.floor(fraction * size + 1e-9))
        observed = np.sort(rng.choice(size, size=P, replace=False))
        return SelectionMask(tuple(observed), size)
    lo, hi = offsets[order], offsets[order + 1]
    P = int(math.floor(fraction * (hi - lo) + 1e-9))
    chosen = lo + rng.choice(hi - lo, size=P, replace=False)
    observed = np.sort(np.concatenate([np.arange(0, lo), chosen, np.arange(hi, size)]).astype(int))
    return SelectionMask(tuple(observed), size)


def _sem_alpha(cfg):
    if cfg.sem_alpha is not None:
        return cfg.sem_alpha
    if cfg.model == "ar" and len(cfg.coeffs) == 1:
        return cfg.coeffs[0]
    return 0.3


def _interp_method_names(cfg):
    names = []
    for m in cfg.methods:
        if m == "mixed":
            names.extend(f"mixed:{g:g}" for g in cfg.mixed_gammas)
        else:
            names.append(m)
    return names


def run_experiment_interp(cfg):
    """Reconstruction error per method and observed fraction."""
    validate_config(cfg)
    if cfg.experiment != "interp":
        raise ConfigError("experiment", "run_experiment_interp needs experiment = interp")
    names = _interp_method_names(cfg)
    fractions = list(cfg.fractions)
    alpha = _sem_alpha(cfg)

    def trial_fn(trial):
        seeds = trial_seeds(cfg.master_seed, trial)
        setup = build_setup(cfg, seeds[0])
        basis, C, op = setup["basis"], setup["C"], setup["operator"]
        if cfg.mask_order is not None and op.kind != "dirac":
            raise ConfigError("mask_order", "order-restricted masks need the Dirac operator")
        S = generate(basis, setup["spec"], cfg.m, seeds[1])
        noise = make_rng(seeds[2]).standard_normal((cfg.m, basis.size)).T
        mask_rng = make_rng(seeds[3])
        p_pg = periodogram(basis, S) if any(n.startswith("mixed:") for n in names) else None
        offsets = setup["complex"].offsets
        rows = []
        for si, frac in enumerate(fractions):
            mask = random_mask(basis.size, frac, mask_rng, offsets, cfg.mask_order)
            s_bar = S[mask.index] + math.sqrt(cfg.noise_var) * noise[mask.index]
            for mi, name in enumerate(names):
                if name == "map":
                    fn = lambda: interpolate_map(C, mask, cfg.noise_var, s_bar)
                elif name == "smooth":
                    fn = lambda: interpolate_regularized(Smoothness(op), mask, cfg.noise_var, s_bar)
                elif name == "sem":
                    fn = lambda: interpolate_regularized(Sem(alpha, op), mask, cfg.noise_var, s_bar)
                elif name == "zero":
                    fn = lambda: mask.zero_fill(s_bar)
                else:
                    gamma = float(name.split(":", 1)[1])
                    prec = Mixed(((1.0, FromCovariance(basis=basis, psd=p_pg)), (gamma, Smoothness(op))))
                    fn = lambda prec=prec: interpolate_regularized(prec, mask, cfg.noise_var, s_bar)
                out, runtime, flag = _timed(cfg, fn)
                rows.append(Row(mi, si, trial, name, "fraction", frac, rel_error(out, S), runtime, flag))
        return rows

    return _run(cfg, trial_fn, names, "fraction", fractions)


def run_experiment(cfg):
    runner = {"cov": run_experiment_cov, "denoise": run_experiment_denoise, "interp": run_experiment_interp}
    validate_config(cfg)
    return runner[cfg.experiment](cfg)


def read_experiment_csv(text):
    """Parse experiment CSV text into a list of dicts (comment lines skipped)."""
    lines = [line for line in text.splitlines() if line and not line.startswith("#")]
    keys = lines[0].split(",")
    return [dict(zip(keys, line.split(","))) for line in lines[1:]]
