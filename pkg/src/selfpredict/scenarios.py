"""Named experiment scenarios with a deterministic parallel runner.

Each scenario expands into one or more variants (ablation arms or sweep
cells), runs n_runs independent trials per variant, and writes one CSV per
variant plus a summary.json under out_dir/<scenario>/.

Determinism contract: every trial derives all of its randomness from
(master_seed, run_index, stream) through the seeding module, trials are
dispatched in fixed chunks of CHUNK_SIZE runs, and output is assembled in
submission order.  Byte-identical artifacts therefore do not depend on the
worker count.

CSV schema (one header line, then one row per record):

    run_id, step_or_time, f, f_ratio, f_tilde, covariance_drift,
    max_abs_cosine, residual

f_tilde is empty for single-representation runs.  Floats are written with
17 significant digits; divergent runs may carry inf.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .bidirectional import BidirState, integrate_bidir
from .dynamics import (
    DynamicsConfig,
    flow_residual,
    integrate_ode,
    orthonormal_init,
    run_discrete_batch,
)
from .errors import InvalidInputError, UnknownScenarioError
from .markov import (
    fixed_example_2x2,
    fixed_example_3x3,
    gen_doubly_stochastic,
    gen_symmetric,
    n_step_matrix,
    spectral,
    uniform_distribution,
)
from .metrics import trace_objective
from .seeding import (
    STREAM_INIT_LEFT,
    STREAM_INIT_RIGHT,
    STREAM_MATRIX,
    STREAM_NOISE,
    stream_rng,
    stream_seed,
)

CHUNK_SIZE = 25

DEFAULT_ETA = 1e-3
DEFAULT_ITERS = 10_000
DEFAULT_RECORD_EVERY = 100
DEFAULT_T_END = 100.0
DEFAULT_N_RECORDS = 100
FIG2_NOISE_SIGMA = 0.1
FINITE_LR_BUDGET = 10_000.0

SIGMA_GRID = (0.0, 0.01, 0.1, 1.0)
BETA_GRID = (0.0, 0.1, 1.0, 10.0, 100.0)
ETA_GRID = (0.01, 0.1, 1.0, 10.0)

SCENARIOS = {
    "fig2_collapse": "collapse diagnostics: semi vs full gradient and a noisy predictor",
    "fig4_trace_ratio": "continuous-time trace objective ratio on random chains",
    "fig5_failure_mode": "single vs paired dynamics on the fixed three-state chain",
    "example1_critical_points": "flow residuals over the two-state critical point catalog",
    "appendix_target_beta": "sweep of the slow-target tracking rate",
    "appendix_finite_lr": "step size sweep at a matched total step budget",
    "appendix_noisy_predictor": "sweep of the predictor noise scale",
}


@dataclass(frozen=True)
class ScenarioConfig:
    """Runner settings; None means the scenario default applies.

    For grid scenarios a concrete eta, sigma, or beta collapses the grid
    to that single cell.  appendix_finite_lr reads iters as the total step
    budget at unit step size and scales the per-cell iteration count as
    budget / eta.  Flags a scenario does not consume are ignored.
    """

    scenario: str
    master_seed: int = 0
    n_runs: int = 100
    out_dir: str = "artifacts"
    n_states: int = 20
    k: int = 2
    eta: float | None = None
    iters: int | None = None
    sigma: float | None = None
    beta: float | None = None
    n_step: int = 1
    t_end: float | None = None
    n_records: int | None = None
    record_every: int | None = None
    workers: int = 1

    def __post_init__(self):
        if self.n_runs < 1:
            raise InvalidInputError("n_runs must be at least 1")
        if self.n_states < 2:
            raise InvalidInputError("n_states must be at least 2")
        if not 1 <= self.k <= self.n_states:
            raise InvalidInputError(f"need 1 <= k <= n_states, got k={self.k}")
        if self.workers < 1:
            raise InvalidInputError("workers must be at least 1")
        if self.n_step < 1:
            raise InvalidInputError("n_step must be at least 1")
        for name in ("eta", "sigma", "t_end"):
            v = getattr(self, name)
            if v is not None and (not np.isfinite(v) or v <= 0):
                raise InvalidInputError(f"{name} must be positive and finite when given")
        if self.beta is not None and (not np.isfinite(self.beta) or self.beta < 0):
            raise InvalidInputError("beta must be nonnegative and finite when given")
        for name in ("iters", "n_records", "record_every"):
            v = getattr(self, name)
            if v is not None and v < 1:
                raise InvalidInputError(f"{name} must be at least 1 when given")


@dataclass(frozen=True)
class RunArtifact:
    scenario: str
    out_dir: Path
    csv_paths: dict
    summary_path: Path


def _resolve(cfg: ScenarioConfig) -> dict:
    """Expand a config into ordered variant parameter dicts."""
    eta = cfg.eta if cfg.eta is not None else DEFAULT_ETA
    iters = cfg.iters if cfg.iters is not None else DEFAULT_ITERS
    rec = cfg.record_every if cfg.record_every is not None else DEFAULT_RECORD_EVERY
    t_end = cfg.t_end if cfg.t_end is not None else DEFAULT_T_END
    n_rec = cfg.n_records if cfg.n_records is not None else DEFAULT_N_RECORDS
    s = cfg.scenario

    def discrete(chain, grad="semi", pmode="optimal", sigma=0.0, beta=None,
                 eta_=None, iters_=None, rec_=None):
        return dict(mode="discrete", chain=chain, gradient_mode=grad,
                    predictor_mode=pmode, sigma=sigma, target_beta=beta,
                    eta=eta_ if eta_ is not None else eta,
                    iters=iters_ if iters_ is not None else iters,
                    record_every=rec_ if rec_ is not None else rec)

    if s == "fig2_collapse":
        sig = cfg.sigma if cfg.sigma is not None else FIG2_NOISE_SIGMA
        return {
            "semi_optimal": discrete("symmetric"),
            "full_optimal": discrete("symmetric", grad="full"),
            "semi_noisy": discrete("symmetric", pmode="noisy", sigma=sig),
        }
    if s == "fig4_trace_ratio":
        ode = dict(mode="ode", t_end=t_end, n_records=n_rec)
        return {
            "symmetric": dict(ode, chain="symmetric"),
            "doubly_stochastic": dict(ode, chain="doubly_stochastic"),
        }
    if s == "fig5_failure_mode":
        if cfg.k > 3:
            raise InvalidInputError("the fixed three-state chain supports k <= 3")
        return {
            "single": dict(mode="ode", chain="fixed3", t_end=t_end, n_records=n_rec),
            "bidir": dict(mode="bidir_ode", chain="fixed3", t_end=t_end, n_records=n_rec),
        }
    if s == "example1_critical_points":
        return {"points": dict(mode="catalog")}
    if s == "appendix_target_beta":
        grid = (cfg.beta,) if cfg.beta is not None else BETA_GRID
        return {f"beta_{b:g}": discrete("symmetric", beta=b) for b in grid}
    if s == "appendix_finite_lr":
        grid = (cfg.eta,) if cfg.eta is not None else ETA_GRID
        budget = float(cfg.iters) if cfg.iters is not None else FINITE_LR_BUDGET
        out = {}
        for e in grid:
            cell_iters = max(1, int(round(budget / e)))
            out[f"eta_{e:g}"] = discrete("symmetric", eta_=e, iters_=cell_iters,
                                         rec_=cell_iters)
        return out
    if s == "appendix_noisy_predictor":
        grid = (cfg.sigma,) if cfg.sigma is not None else SIGMA_GRID
        return {f"sigma_{v:g}": discrete("symmetric", pmode="noisy", sigma=v)
                for v in grid}
    raise UnknownScenarioError(
        f"unknown scenario {s!r}; available: {', '.join(sorted(SCENARIOS))}")


def _make_chain(kind: str, n: int, master_seed: int, run_index: int):
    if kind == "fixed3":
        return fixed_example_3x3()
    seed = stream_seed(master_seed, run_index, STREAM_MATRIX)
    if kind == "symmetric":
        return gen_symmetric(n, seed)
    if kind == "doubly_stochastic":
        return gen_doubly_stochastic(n, seed)
    raise InvalidInputError(f"unknown chain kind {kind!r}")


def _tuples(records) -> list:
    return [(r.step_or_time, r.bundle.f, r.bundle.f_ratio, r.bundle.f_tilde,
             r.bundle.covariance_drift, r.bundle.max_abs_cosine, r.bundle.residual)
            for r in records]


def _run_chunk(cfg: ScenarioConfig, variant_key: str, lo: int, hi: int) -> list:
    """Run trials lo..hi-1 of one variant; the unit of parallel dispatch."""
    params = _resolve(cfg)[variant_key]
    mode = params["mode"]
    n = 3 if params.get("chain") == "fixed3" else cfg.n_states
    k = cfg.k
    ms = cfg.master_seed
    idxs = list(range(lo, hi))
    d = uniform_distribution(n)

    if mode == "discrete":
        tms = [_make_chain(params["chain"], n, ms, i) for i in idxs]
        phi0 = np.stack([orthonormal_init(n, k, stream_seed(ms, i, STREAM_INIT_LEFT))
                         for i in idxs])
        dcfg = DynamicsConfig(
            eta=params["eta"], iters=params["iters"], record_every=params["record_every"],
            gradient_mode=params["gradient_mode"], predictor_mode=params["predictor_mode"],
            sigma=params["sigma"], target_beta=params["target_beta"], n_step=cfg.n_step)
        rngs = None
        if params["predictor_mode"] == "noisy":
            rngs = [stream_rng(ms, i, STREAM_NOISE) for i in idxs]
        records, _ = run_discrete_batch(phi0, tms, d, dcfg, rngs, run_offset=lo)
        return [_tuples(rs) for rs in records]

    if mode == "ode":
        out = []
        for i in idxs:
            tm = _make_chain(params["chain"], n, ms, i)
            if cfg.n_step > 1:
                tm = n_step_matrix(tm, cfg.n_step)
            phi0 = orthonormal_init(n, k, stream_seed(ms, i, STREAM_INIT_LEFT))
            records, _ = integrate_ode(phi0, tm, t_end=params["t_end"],
                                       n_records=params["n_records"])
            out.append(_tuples(records))
        return out

    if mode == "bidir_ode":
        out = []
        for i in idxs:
            tm = _make_chain(params["chain"], n, ms, i)
            if cfg.n_step > 1:
                tm = n_step_matrix(tm, cfg.n_step)
            state0 = BidirState(
                orthonormal_init(n, k, stream_seed(ms, i, STREAM_INIT_LEFT)),
                orthonormal_init(n, k, stream_seed(ms, i, STREAM_INIT_RIGHT)))
            records, _ = integrate_bidir(state0, tm, t_end=params["t_end"],
                                         n_records=params["n_records"])
            out.append(_tuples(records))
        return out

    raise InvalidInputError(f"unknown variant mode {mode!r}")


def _critical_points(cfg: ScenarioConfig):
    """Rows and side data for the two-state critical point catalog.

    The catalog holds the four unit eigenvectors and the four mixed unit
    vectors with eigenbasis coordinates (plus or minus 2/3, plus or minus
    sqrt(5)/3); probe rows are random unit vectors for contrast.  All are
    stationary checks of the flow, so step_or_time is 0 throughout.
    """
    tm = fixed_example_2x2()
    basis = spectral(tm, "eigen").right_vectors
    u1, u2 = basis[:, :1], basis[:, 1:2]
    a, b = 2.0 / 3.0, math.sqrt(5.0) / 3.0
    catalog = [
        ("eigenvector", u1), ("eigenvector", -u1),
        ("eigenvector", u2), ("eigenvector", -u2),
        ("mixed", a * u1 + b * u2), ("mixed", a * u1 - b * u2),
        ("mixed", -a * u1 + b * u2), ("mixed", -a * u1 - b * u2),
    ]
    rows = []
    points = []
    for rid, (kind, phi) in enumerate(catalog):
        resid = flow_residual(phi, tm)
        f = trace_objective(phi, tm)
        rows.append((0.0, f, f, None, 0.0, 0.0, resid))
        points.append({"run_id": rid, "kind": kind, "residual": resid, "f": f})
    probe_resids = []
    for j in range(cfg.n_runs):
        phi = orthonormal_init(2, 1, stream_seed(cfg.master_seed, j, STREAM_INIT_LEFT))
        resid = flow_residual(phi, tm)
        f = trace_objective(phi, tm)
        rows.append((0.0, f, f, None, 0.0, 0.0, resid))
        probe_resids.append(resid)
    extras = {
        "points": points,
        "catalog_residual_max": max(p["residual"] for p in points),
        "probe_residual_min": min(probe_resids),
    }
    return [[row] for row in rows], extras


def _fmt(v: float) -> str:
    return "%.17g" % v


def _write_csv(path: Path, per_run: list) -> None:
    lines = ["run_id,step_or_time,f,f_ratio,f_tilde,covariance_drift,max_abs_cosine,residual"]
    for rid, records in enumerate(per_run):
        for (t, f, ratio, ftilde, drift, cos, resid) in records:
            ft = "" if ftilde is None else _fmt(ftilde)
            lines.append(f"{rid},{_fmt(t)},{_fmt(f)},{_fmt(ratio)},{ft},"
                         f"{_fmt(drift)},{_fmt(cos)},{_fmt(resid)}")
    path.write_text("\n".join(lines) + "\n")


def _summarize(cfg: ScenarioConfig, variants: dict, per_variant: dict, extras=None) -> dict:
    out_variants = {}
    for key, params in variants.items():
        runs = per_variant[key]
        lengths = {len(r) for r in runs}
        if len(lengths) != 1:
            raise InvalidInputError(f"variant {key!r} produced ragged record lists")
        times = [row[0] for row in runs[0]]
        ratio = np.array([[row[2] for row in r] for r in runs])
        cos = np.array([[row[5] for row in r] for r in runs])
        drift = np.array([[row[4] for row in r] for r in runs])
        curve = {
            "step_or_time": times,
            "f_ratio": np.median(ratio, axis=0).tolist(),
            "max_abs_cosine": np.median(cos, axis=0).tolist(),
        }
        if params.get("mode") == "bidir_ode":
            ftilde = np.array([[row[3] for row in r] for r in runs])
            curve["f_tilde"] = np.median(ftilde, axis=0).tolist()
        out_variants[key] = {
            "params": {k: v for k, v in params.items()},
            "n_runs": len(runs),
            "median_curve": curve,
            "final": {
                "median_f_ratio": float(np.median(ratio[:, -1])),
                "median_max_abs_cosine": float(np.median(cos[:, -1])),
                "median_covariance_drift": float(np.median(drift[:, -1])),
                "per_run_f_ratio": ratio[:, -1].tolist(),
                "per_run_max_abs_cosine": cos[:, -1].tolist(),
                "per_run_covariance_drift": drift[:, -1].tolist(),
            },
        }
    # The echo covers every field that determines artifact content; workers
    # and out_dir are execution details and would break the guarantee that
    # (scenario, master_seed) yields byte-identical artifacts.
    config_echo = asdict(cfg)
    config_echo.pop("workers")
    config_echo.pop("out_dir")
    summary = {
        "schema_version": 1,
        "package_version": __version__,
        "scenario": cfg.scenario,
        "config": config_echo,
        "variants": out_variants,
    }
    if extras:
        summary.update(extras)
    return summary


def run_scenario(cfg: ScenarioConfig) -> RunArtifact:
    """Execute one scenario end to end and write its artifacts."""
    if cfg.scenario not in SCENARIOS:
        raise UnknownScenarioError(
            f"unknown scenario {cfg.scenario!r}; available: {', '.join(sorted(SCENARIOS))}")
    variants = _resolve(cfg)
    extras = None
    per_variant: dict = {}
    if cfg.scenario == "example1_critical_points":
        per_variant["points"], extras = _critical_points(cfg)
    else:
        tasks = []
        for key in variants:
            for lo in range(0, cfg.n_runs, CHUNK_SIZE):
                tasks.append((key, lo, min(lo + CHUNK_SIZE, cfg.n_runs)))
        if cfg.workers <= 1 or len(tasks) == 1:
            results = [_run_chunk(cfg, *task) for task in tasks]
        else:
            with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
                futures = [pool.submit(_run_chunk, cfg, *task) for task in tasks]
                results = [f.result() for f in futures]
        per_variant = {key: [] for key in variants}
        for task, chunk in zip(tasks, results):
            per_variant[task[0]].extend(chunk)

    out_root = Path(cfg.out_dir) / cfg.scenario
    out_root.mkdir(parents=True, exist_ok=True)
    csv_paths = {}
    for key in variants:
        path = out_root / f"{key}.csv"
        _write_csv(path, per_variant[key])
        csv_paths[key] = path
    summary = _summarize(cfg, variants, per_variant, extras)
    summary_path = out_root / "summary.json"
    summary_path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return RunArtifact(cfg.scenario, out_root, csv_paths, summary_path)
