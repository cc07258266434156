"""Monte-Carlo experiment runner behind the command line interface.

Every realization ``r`` draws its channels from substream ``r`` of the base
seed and is processed independently, so results are identical for any
number of worker processes.  Rows are merged in realization order.
"""
from __future__ import annotations

import csv
import dataclasses
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import __version__
from .baselines import DEFAULT_ALPHA_GRID, optimal_alpha_search
from .channel import RNG_DESCRIPTION, sample_channels
from .complexity import complexity_count
from .rates import LN2, RateReport, RateWeights, rate_report
from .signal_model import SignalModelParams
from .solver import SolverConfig, iterate

SCENARIOS = ("converge", "sweep_snr", "sweep_delta", "alpha_cdf", "complexity")

COLUMNS = ("scenario", "algorithm", "M", "K", "L", "snr_db", "delta", "alpha", "R_c_bits",
           "sum_Ru_bits", "wsr_bits", "iters", "seed", "realization", "a", "b",
           "weighted_Ru_bits", "converged")
TRACE_COLUMNS = ("algorithm", "realization", "iter", "wsr_nats", "wsr_bits",
                 "delta_precoder_norm")

SOLVER_PRESETS = {
    "safeguarded": {},
    "literal": {"multiplier_damping": "none", "safeguard": False},
}


def fmt(x) -> str:
    """Nine significant digits for floats; integers and text unchanged."""
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".9g")
    return str(x)


@dataclass(frozen=True)
class AlgoSpec:
    """One algorithm token: ``wmmse1-opt``, ``wmmse1-fixed=<alpha>``,
    ``wmmse2``, ``zf`` or ``mrt``."""

    kind: str
    alpha: float | None = None

    @classmethod
    def parse(cls, token: str) -> "AlgoSpec":
        tok = token.strip().lower()
        if tok.startswith("wmmse1-fixed"):
            _, sep, val = tok.partition("=")
            if not sep:
                raise ValueError(f"{token!r}: use wmmse1-fixed=<alpha>")
            alpha = float(val)
            if not 0.0 < alpha < 1.0:
                raise ValueError(f"{token!r}: alpha must lie in (0, 1)")
            return cls("wmmse1-fixed", alpha)
        if tok in ("wmmse1-opt", "wmmse2", "zf", "mrt"):
            return cls(tok)
        raise ValueError(f"unknown algorithm {token!r}; expected wmmse1-opt, "
                         "wmmse1-fixed=<alpha>, wmmse2, zf or mrt")

    @property
    def label(self) -> str:
        if self.kind == "wmmse1-fixed":
            return f"WMMSE1-fixed({fmt(self.alpha)})"
        return {"wmmse1-opt": "WMMSE1-opt", "wmmse2": "WMMSE2", "zf": "ZF", "mrt": "MRT"}[self.kind]


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: str
    M: int = 2
    K: int = 2
    L: int = 2
    snr_db: tuple[float, ...] = (15.0,)
    delta: tuple[float, ...] = (0.0,)
    realizations: int = 100
    seed: int = 1
    weights: tuple[float, ...] = (1.0, 1.0)
    algorithms: tuple[AlgoSpec, ...] = (AlgoSpec("wmmse1-opt"), AlgoSpec("wmmse2"))
    alpha_grid: tuple[float, ...] = DEFAULT_ALPHA_GRID
    output_path: str = "results.csv"
    workers: int = 1
    solver: str = "safeguarded"
    max_iters: int = 100
    # only used by the complexity scenario
    dims: tuple[tuple[int, int, int], ...] = field(default=())

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ValueError(f"unknown scenario {self.scenario!r}; choose from {SCENARIOS}")
        if self.scenario == "complexity":
            return
        if min(self.M, self.K, self.L) < 1:
            raise ValueError("M, K and L must be >= 1")
        if self.realizations < 1:
            raise ValueError("realizations must be >= 1")
        if not self.snr_db:
            raise ValueError("need at least one SNR point")
        if not self.delta or any(not 0.0 <= d <= 1.0 for d in self.delta):
            raise ValueError("delta values must lie in [0, 1]")
        if not self.algorithms:
            raise ValueError("need at least one algorithm")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.solver not in SOLVER_PRESETS:
            raise ValueError(f"solver must be one of {tuple(SOLVER_PRESETS)}")
        if self.scenario == "alpha_cdf" and any(
                a.kind not in ("wmmse1-opt", "zf", "mrt") for a in self.algorithms):
            raise ValueError("alpha_cdf needs algorithms with an alpha search "
                             "(wmmse1-opt, zf, mrt)")
        if self.scenario == "converge" and any(a.kind in ("zf", "mrt") for a in self.algorithms):
            raise ValueError("converge traces exist only for the WMMSE algorithms")
        self.rate_weights()

    def rate_weights(self) -> RateWeights:
        """``weights`` holds ``(a, b)`` with ``a`` broadcast, or ``(a_1..a_K, b)``."""
        w = self.weights
        if len(w) == 2:
            return RateWeights.uniform(self.K, w[0], w[1])
        if len(w) == self.K + 1:
            return RateWeights(np.array(w[:-1]), w[-1])
        raise ValueError(f"weights need 2 or K+1={self.K + 1} values, got {len(w)}")

    def solver_kwargs(self) -> dict:
        return dict(SOLVER_PRESETS[self.solver], max_iters=self.max_iters)


@dataclass
class _Design:
    algo: AlgoSpec
    ps: object
    sm: SignalModelParams
    alpha: float | None
    iters: int
    converged: bool
    trace: list | None


def _design(ch, E_tx, weights, algo: AlgoSpec, cfg: ExperimentConfig) -> _Design:
    kw = cfg.solver_kwargs()
    if algo.kind in ("wmmse1-opt", "zf", "mrt"):
        designer = {"wmmse1-opt": "WMMSE1", "zf": "ZF", "mrt": "MRT"}[algo.kind]
        alpha, ps, _, res = optimal_alpha_search(ch, E_tx, weights, designer, cfg.alpha_grid, **kw)
        sm = SignalModelParams.sm1(alpha)
        if res is None:
            return _Design(algo, ps, sm, alpha, 0, True, None)
        return _Design(algo, ps, sm, alpha, res.iters, res.converged, res.trace)
    sm = (SignalModelParams.sm1(algo.alpha) if algo.kind == "wmmse1-fixed"
          else SignalModelParams.sm2())
    res = iterate(ch, SolverConfig(E_tx=E_tx, weights=weights, sm=sm, **kw))
    return _Design(algo, res.ps, sm, algo.alpha, res.iters, res.converged, res.trace)


def _row(cfg, weights, d: _Design, snr, delta, rep: RateReport, r) -> list:
    a = weights.a
    a_txt = fmt(a[0]) if np.all(a == a[0]) else ";".join(fmt(x) for x in a)
    return [cfg.scenario, d.algo.label, cfg.M, cfg.K, cfg.L, float(snr), float(delta),
            "" if d.alpha is None else float(d.alpha), rep.R_c_bits, rep.sum_R_u_bits,
            rep.wsr_bits, d.iters, cfg.seed, r, a_txt, float(weights.b),
            float(np.dot(a, rep.R_u)) / LN2, d.converged]


def run_realization(cfg: ExperimentConfig, r: int) -> tuple[list, list]:
    """All rows (and trace rows) for realization ``r``."""
    ch = sample_channels(cfg.seed, cfg.M, cfg.K, cfg.L, stream=r)
    weights = cfg.rate_weights()
    rows, traces = [], []
    if cfg.scenario in ("sweep_snr", "alpha_cdf"):
        points = [(s, cfg.delta[0]) for s in cfg.snr_db]
    else:
        points = [(cfg.snr_db[0], None)]
    for snr, delta in points:
        E_tx = 10.0 ** (snr / 10.0)
        for algo in cfg.algorithms:
            d = _design(ch, E_tx, weights, algo, cfg)
            for dl in (cfg.delta if delta is None else (delta,)):
                rep = rate_report(ch, d.ps, d.sm, weights, dl)
                rows.append(_row(cfg, weights, d, snr, dl, rep, r))
            if cfg.scenario == "converge":
                traces.extend([d.algo.label, r, t.iter, t.wsr, t.wsr_bits, t.delta_norm]
                              for t in d.trace)
    return rows, traces


def _write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(header)
        for row in rows:
            wr.writerow([fmt(v) for v in row])


def _sidecar(path: Path, suffix: str) -> Path:
    return path.with_name(path.stem + suffix)


def mean_trace(traces: list, max_iters: int) -> list:
    """Per-iteration mean WSR per algorithm.  A run that stopped early
    holds its final value for the remaining iterations."""
    by_algo: dict[str, dict[int, list]] = {}
    for algo, r, it, wsr, _, _ in traces:
        by_algo.setdefault(algo, {}).setdefault(r, []).append((it, wsr))
    out = []
    for algo, runs in by_algo.items():
        last = max(it for run in runs.values() for it, _ in run)
        mat = np.empty((len(runs), last + 1))
        for i, r in enumerate(sorted(runs)):
            vals = [w for _, w in sorted(runs[r])]
            mat[i, :len(vals)] = vals
            mat[i, len(vals):] = vals[-1]
        for it in range(last + 1):
            out.append([algo, it, mat[:, it].mean(), mat[:, it].mean() / LN2, len(runs)])
    return out


def alpha_cdf_rows(rows: list, grid: Sequence[float]) -> list:
    """Empirical CDF of the selected alpha at every grid point, per
    algorithm and SNR."""
    groups: dict[tuple, list] = {}
    for row in rows:
        groups.setdefault((row[1], row[5]), []).append(row[7])
    out = []
    for (algo, snr), alphas in groups.items():
        arr = np.asarray(alphas, dtype=float)
        for g in sorted(grid):
            out.append([algo, snr, g, float(np.mean(arr <= g + 1e-12)), arr.size])
    return out


def _meta(cfg: ExperimentConfig) -> dict:
    d = dataclasses.asdict(cfg)
    d["algorithms"] = [a.label for a in cfg.algorithms]
    return {"package_version": __version__, "rng": RNG_DESCRIPTION, "config": d,
            "solver_settings": cfg.solver_kwargs(), "rates": "bits; designs assume perfect SIC",
            "columns": list(COLUMNS)}


def run(cfg: ExperimentConfig) -> dict[str, Path]:
    """Run a scenario and write its CSV files; returns the written paths."""
    out = Path(cfg.output_path)
    if not out.parent.exists():
        raise FileNotFoundError(f"output directory {out.parent} does not exist")
    written = {"results": out}
    if cfg.scenario == "complexity":
        rows = [[M, K, L, complexity_count("WMMSE1", M, K, L), complexity_count("WMMSE2", M, K, L)]
                for M, K, L in (cfg.dims or ((cfg.M, cfg.K, cfg.L),))]
        _write_csv(out, ("M", "K", "L", "WMMSE1", "WMMSE2"), rows)
        return written
    idx = range(cfg.realizations)
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            parts = list(pool.map(run_realization, [cfg] * len(idx), idx))
    else:
        parts = [run_realization(cfg, r) for r in idx]
    rows = [row for p in parts for row in p[0]]
    traces = [t for p in parts for t in p[1]]
    _write_csv(out, COLUMNS, rows)
    if cfg.scenario == "converge":
        written["trace"] = _sidecar(out, ".trace.csv")
        _write_csv(written["trace"], TRACE_COLUMNS, traces)
        written["mean_trace"] = _sidecar(out, ".mean_trace.csv")
        _write_csv(written["mean_trace"],
                   ("algorithm", "iter", "mean_wsr_nats", "mean_wsr_bits", "runs"),
                   mean_trace(traces, cfg.max_iters))
    if cfg.scenario == "alpha_cdf":
        written["cdf"] = _sidecar(out, ".cdf.csv")
        _write_csv(written["cdf"], ("algorithm", "snr_db", "alpha", "cdf", "runs"),
                   alpha_cdf_rows(rows, cfg.alpha_grid))
    written["meta"] = _sidecar(out, ".meta.json")
    written["meta"].write_text(json.dumps(_meta(cfg), indent=2, sort_keys=True) + "\n")
    return written


SUMMARY_KEYS = ("scenario", "algorithm", "M", "K", "L", "snr_db", "delta")
SUMMARY_VALUES = ("alpha", "R_c_bits", "sum_Ru_bits", "wsr_bits", "iters")


def summarize(paths: Sequence[str | Path]) -> list[dict]:
    """Mean and standard error over realizations for every
    ``(scenario, algorithm, M, K, L, snr_db, delta)`` group, sorted by key."""
    groups: dict[tuple, dict[str, list]] = {}
    for path in paths:
        with open(path, newline="") as fh:
            rd = csv.DictReader(fh)
            missing = set(SUMMARY_KEYS + SUMMARY_VALUES) - set(rd.fieldnames or ())
            if missing:
                raise ValueError(f"{path}: not a results CSV (missing {sorted(missing)})")
            for row in rd:
                key = (row["scenario"], row["algorithm"], int(row["M"]), int(row["K"]),
                       int(row["L"]), float(row["snr_db"]), float(row["delta"]))
                g = groups.setdefault(key, {v: [] for v in SUMMARY_VALUES})
                for v in SUMMARY_VALUES:
                    g[v].append(float(row[v]) if row[v] != "" else math.nan)
    table = []
    for key in sorted(groups):
        entry = dict(zip(SUMMARY_KEYS, key))
        for v, vals in groups[key].items():
            arr = np.asarray(vals)
            entry[f"{v}_mean"] = float(arr.mean())
            entry[f"{v}_stderr"] = float(arr.std(ddof=1) / math.sqrt(arr.size)) if arr.size > 1 else 0.0
        entry["n"] = len(groups[key]["wsr_bits"])
        table.append(entry)
    return table


def write_summary(table: list[dict], path: str | Path) -> None:
    if not table:
        raise ValueError("nothing to summarize")
    header = list(table[0])
    _write_csv(Path(path), header, ([e[h] for h in header] for e in table))
