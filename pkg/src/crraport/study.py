"""Desk-scale study harness.

Draws capped random asset subsets from a returns panel (CSV or
synthetic), solves the closed-form optimal portfolio across a gamma
grid for each subset, screens the realized optimal-portfolio log gross
returns for normality, tracks how often the existence and efficiency
conditions fail, and compares the naive / Sharpe / optimal strategies
by their expected-utility samples. Emits one CSV per table plus a JSON
summary; everything is deterministic given the seed (per-k subset
draws use independent child streams, so evaluation order never matters).
"""

from __future__ import annotations

import csv
import itertools
import json
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .crra import gamma_min, objective_value, power_solution
from .frontier import Weights, efficient_constants, portfolio_moments, sharpe_weights
from .market import ReturnMatrix, SynthSpec, estimate_params, load_returns_csv, synth_market
from .stats import quantile, shapiro_wilk

__all__ = ["StudyConfig", "StudyReport", "run_study", "default_synth_spec"]

SCHEMA_VERSION = "1"

_CSV_FILES = {
    "pvalue_quantiles": ("k", "gamma", "quantile", "n", "value"),
    "condition_failure_rates": (
        "k",
        "gamma",
        "n_subsets",
        "n_evaluated",
        "rate_gamma_min_violated",
        "rate_mv_violated",
    ),
    "frontier_locations": ("k", "portfolio", "gamma", "x", "v"),
    "strategy_utilities": (
        "k",
        "gamma",
        "subset_index",
        "utility_naive",
        "utility_sharpe",
        "utility_optimal",
    ),
    "cell_errors": ("k", "subset_index", "gamma", "code"),
}


def default_synth_spec() -> SynthSpec:
    """Shipped synthetic calibration: 17 assets at weekly scale."""
    payload = json.loads(
        (Path(__file__).parent / "data" / "default_synth.json").read_text()
    )
    return SynthSpec.from_dict(payload)


@dataclass(frozen=True, eq=False)
class StudyConfig:
    """Configuration of one study run."""

    seed: int
    k_range: tuple[int, ...]
    gamma_grid: tuple[float, ...]
    output_dir: Path
    data_csv: Path | None = None
    synth: SynthSpec | None = None
    n_subsets_cap: int = 200
    w0: float = 1.0
    quantiles: tuple[float, ...] = (0.05, 0.25, 0.5)

    def __post_init__(self) -> None:
        object.__setattr__(self, "k_range", tuple(int(k) for k in self.k_range))
        object.__setattr__(self, "gamma_grid", tuple(float(g) for g in self.gamma_grid))
        object.__setattr__(self, "quantiles", tuple(float(q) for q in self.quantiles))
        object.__setattr__(self, "output_dir", Path(self.output_dir))
        if (self.data_csv is None) == (self.synth is None):
            raise ValueError("exactly one of data_csv / synth must be given")
        if not self.k_range or any(k < 2 for k in self.k_range):
            raise ValueError("k_range entries must be >= 2")
        if not self.gamma_grid or any(g <= 0.0 for g in self.gamma_grid):
            raise ValueError("gamma_grid entries must be positive")
        if self.n_subsets_cap < 1:
            raise ValueError("n_subsets_cap must be at least 1")
        if self.w0 <= 0.0:
            raise ValueError("w0 must be positive")
        if any(not 0.0 <= q <= 1.0 for q in self.quantiles):
            raise ValueError("quantiles must lie in [0, 1]")


@dataclass(frozen=True, eq=False)
class StudyReport:
    """Aggregated study results plus per-cell error codes."""

    metadata: dict
    pvalue_quantiles: list = field(default_factory=list)
    condition_failure_rates: list = field(default_factory=list)
    frontier_locations: list = field(default_factory=list)
    strategy_utilities: list = field(default_factory=list)
    cell_errors: list = field(default_factory=list)

    def write(self, output_dir: Path) -> dict[str, Path]:
        """Write one CSV per table plus summary.json; returns the paths."""
        output_dir = Path(output_dir)
        output_dir.mkdir(parents=True, exist_ok=True)
        paths: dict[str, Path] = {}
        for name, header in _CSV_FILES.items():
            path = output_dir / f"{name}.csv"
            with path.open("w", newline="", encoding="utf-8") as fh:
                writer = csv.writer(fh, lineterminator="\n")
                writer.writerow(header)
                for row in getattr(self, name):
                    writer.writerow([_cell_str(row[col]) for col in header])
            paths[name] = path
        summary = {
            "schema_version": SCHEMA_VERSION,
            "metadata": self.metadata,
            "tables": {name: f"{name}.csv" for name in _CSV_FILES},
            "counts": {name: len(getattr(self, name)) for name in _CSV_FILES},
        }
        path = output_dir / "summary.json"
        path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
        paths["summary"] = path
        return paths


def _cell_str(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(float(value))  # plain-float repr even for numpy scalars
    return str(value)


def _draw_subsets(n_assets: int, k: int, cap: int, seed: int) -> list[tuple[int, ...]]:
    """Seeded sampling of distinct k-subsets, without replacement."""
    total = math.comb(n_assets, k)
    take = min(cap, total)
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(k,)))
    if total <= 100_000:
        combos = list(itertools.combinations(range(n_assets), k))
        chosen = np.sort(rng.choice(total, size=take, replace=False))
        return [combos[i] for i in chosen]
    seen: set[tuple[int, ...]] = set()
    out: list[tuple[int, ...]] = []
    while len(out) < take:
        pick = tuple(sorted(rng.choice(n_assets, size=k, replace=False).tolist()))
        if pick not in seen:
            seen.add(pick)
            out.append(pick)
    return out


def _load_source(cfg: StudyConfig) -> tuple[ReturnMatrix, str]:
    if cfg.data_csv is not None:
        return load_returns_csv(cfg.data_csv), f"csv:{cfg.data_csv}"
    return synth_market(cfg.synth, cfg.seed), f"synth:k={cfg.synth.k},n={cfg.synth.n}"


def run_study(cfg: StudyConfig) -> StudyReport:
    """Run the full pipeline and write its outputs to cfg.output_dir."""
    returns, source = _load_source(cfg)
    if any(k > returns.n_assets for k in cfg.k_range):
        raise ValueError("k_range exceeds the number of assets in the data")
    sw_ok = 3 <= returns.n_periods <= 5000

    report = StudyReport(
        metadata={
            "source": source,
            "seed": cfg.seed,
            "n_assets": returns.n_assets,
            "n_periods": returns.n_periods,
            "k_range": list(cfg.k_range),
            "gamma_grid": list(cfg.gamma_grid),
            "n_subsets_cap": cfg.n_subsets_cap,
            "w0": cfg.w0,
            "quantiles": list(cfg.quantiles),
            "timestamp": datetime.now(timezone.utc).isoformat(),
        }
    )

    for k in cfg.k_range:
        subsets = _draw_subsets(returns.n_assets, k, cfg.n_subsets_cap, cfg.seed)
        pvals: dict[float, list[float]] = {g: [] for g in cfg.gamma_grid}
        gamma_fail: dict[float, int] = {g: 0 for g in cfg.gamma_grid}
        mv_fail: dict[float, int] = {g: 0 for g in cfg.gamma_grid}
        evaluated: dict[float, int] = {g: 0 for g in cfg.gamma_grid}

        for si, sub in enumerate(subsets):
            sub_values = returns.values[:, list(sub)]
            try:
                params = estimate_params(ReturnMatrix(sub_values))
            except ValueError:
                for g in cfg.gamma_grid:
                    report.cell_errors.append(
                        {"k": k, "subset_index": si, "gamma": g, "code": "singular_covariance"}
                    )
                continue
            constants = efficient_constants(params)
            try:
                gm = gamma_min(constants)
            except ValueError:
                for g in cfg.gamma_grid:
                    report.cell_errors.append(
                        {"k": k, "subset_index": si, "gamma": g, "code": "degenerate_frontier"}
                    )
                continue
            try:
                sharpe_w = sharpe_weights(params)
            except ValueError:
                sharpe_w = None
            naive_w = Weights(np.full(k, 1.0 / k))
            gross = sub_values + 1.0

            for g in cfg.gamma_grid:
                evaluated[g] += 1
                exists = g >= gm
                if not exists:
                    gamma_fail[g] += 1
                if not (exists and constants.r_gmv > 0.0):
                    mv_fail[g] += 1
                if not exists:
                    report.cell_errors.append(
                        {"k": k, "subset_index": si, "gamma": g, "code": "below_gamma_min"}
                    )
                    continue
                try:
                    sol = power_solution(g, params, cfg.w0)
                except (ValueError, ArithmeticError):
                    report.cell_errors.append(
                        {"k": k, "subset_index": si, "gamma": g, "code": "solve_failed"}
                    )
                    continue

                realized = gross @ sol.weights.w
                if not sw_ok:
                    report.cell_errors.append(
                        {"k": k, "subset_index": si, "gamma": g, "code": "sw_sample_size"}
                    )
                elif np.min(realized) <= 0.0:
                    report.cell_errors.append(
                        {
                            "k": k,
                            "subset_index": si,
                            "gamma": g,
                            "code": "nonpositive_realized_gross_return",
                        }
                    )
                else:
                    try:
                        pvals[g].append(shapiro_wilk(np.log(realized)).p_value)
                    except ValueError:
                        report.cell_errors.append(
                            {"k": k, "subset_index": si, "gamma": g, "code": "sw_degenerate"}
                        )

                utilities = {"utility_optimal": sol.expected_utility}
                for name, w in (("utility_naive", naive_w), ("utility_sharpe", sharpe_w)):
                    if w is None:
                        report.cell_errors.append(
                            {"k": k, "subset_index": si, "gamma": g, "code": "sharpe_undefined"}
                        )
                        continue
                    try:
                        utilities[name] = objective_value(w, params, g, cfg.w0)
                    except ValueError:
                        report.cell_errors.append(
                            {
                                "k": k,
                                "subset_index": si,
                                "gamma": g,
                                "code": f"{name.removeprefix('utility_')}_outside_domain",
                            }
                        )
                if len(utilities) == 3:
                    report.strategy_utilities.append(
                        {"k": k, "gamma": g, "subset_index": si, **utilities}
                    )

        for g in cfg.gamma_grid:
            n_eval = evaluated[g]
            report.condition_failure_rates.append(
                {
                    "k": k,
                    "gamma": g,
                    "n_subsets": len(subsets),
                    "n_evaluated": n_eval,
                    "rate_gamma_min_violated": gamma_fail[g] / n_eval if n_eval else None,
                    "rate_mv_violated": mv_fail[g] / n_eval if n_eval else None,
                }
            )
            for q in cfg.quantiles:
                sample = pvals[g]
                report.pvalue_quantiles.append(
                    {
                        "k": k,
                        "gamma": g,
                        "quantile": q,
                        "n": len(sample),
                        "value": quantile(sample, q) if sample else None,
                    }
                )

        _frontier_rows(report, returns, k, cfg)

    report.write(cfg.output_dir)
    return report


def _frontier_rows(report: StudyReport, returns: ReturnMatrix, k: int, cfg: StudyConfig) -> None:
    """Frontier locations of the GMV / Sharpe / optimal portfolios for
    the deterministic first-k-assets market (subset_index -1)."""
    try:
        params = estimate_params(ReturnMatrix(returns.values[:, :k]))
    except ValueError:
        report.cell_errors.append(
            {"k": k, "subset_index": -1, "gamma": None, "code": "singular_covariance"}
        )
        return
    constants = efficient_constants(params)
    report.frontier_locations.append(
        {"k": k, "portfolio": "gmv", "gamma": None, "x": constants.r_gmv, "v": constants.v_gmv}
    )
    try:
        x, v = portfolio_moments(sharpe_weights(params), params)
        report.frontier_locations.append(
            {"k": k, "portfolio": "sharpe", "gamma": None, "x": x, "v": v}
        )
    except ValueError:
        report.cell_errors.append(
            {"k": k, "subset_index": -1, "gamma": None, "code": "sharpe_undefined"}
        )
    for g in cfg.gamma_grid:
        try:
            sol = power_solution(g, params, cfg.w0)
        except (ValueError, ArithmeticError):
            report.cell_errors.append(
                {"k": k, "subset_index": -1, "gamma": g, "code": "below_gamma_min"}
            )
            continue
        report.frontier_locations.append(
            {"k": k, "portfolio": "optimal", "gamma": g, "x": sol.x, "v": sol.v}
        )
