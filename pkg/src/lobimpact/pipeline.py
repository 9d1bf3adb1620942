"""Staged analysis driver: events -> trades -> impact / collapse / tails.

Every stage reads its inputs from files in the output directory (or the
configured event file) and writes its own outputs plus a stage record under
``stages/``. ``summary.json`` is rebuilt from whatever stage records exist, so
any stage can be rerun alone and reproduces its files byte for byte.
"""

from __future__ import annotations

import dataclasses
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from . import io as lio
from .collapse import compare_normalizations, double_points, lc_points, lfm_points
from .errors import ConfigError, LobImpactError, ParseError
from .impact import bin_mixture, build_all_curves, fit_power_law
from .orderflow import FlowConfig, generate_arrays
from .reference import CODES, STOCK_META
from .tails import fit_tail, select_range
from .trades import (MIXED_TYPES, TRADE_TYPES, SkipReport, StockMeta, classify_counts,
                     empty_trades, invariant_violations, reconstruct_trades,
                     trade_type_mask, zero_shift_fraction)

STAGES = ("generate", "trades", "impact", "collapse", "tails")
EXIT_OK, EXIT_VALIDATION, EXIT_STAGE = 0, 2, 3


@dataclass
class PipelineConfig:
    input: str = ""
    synthetic: bool = False
    meta: str = ""
    out: str = "out"
    seed: int = 0
    stocks: int = 3
    events: int = 10_000
    p_cancel: float = 0.3
    marketable_fraction: float = 0.3
    size_tail: float = 1.5
    placement_width: float = 3.0
    events_per_day: int = 2_000
    lot_rule: str = "BuyLots100"
    bins: int = 20
    mixed_fit_lo: float = 100.0
    collapse_bins: int = 50
    collapse_step: float = 0.01
    collapse_fine_step: float = 0.001
    collapse_bound: float = 1.0
    collapse_binning: str = "equal_count"
    collapse_surface: bool = False
    tail_lo: float = 15.9
    tail_hi: float = 141.0
    tail_method: str = "ccdf"
    tail_min_points: int = 50
    backend: str = "auto"
    workers: int = 1

    def validate(self) -> None:
        if not self.synthetic and not self.input:
            raise ConfigError("either input or synthetic must be set")
        if self.synthetic and self.input:
            raise ConfigError("input and synthetic are mutually exclusive")
        if self.input and not Path(self.input).is_file():
            raise ConfigError(f"input file {self.input!r} does not exist")
        if self.meta and not Path(self.meta).is_file():
            raise ConfigError(f"meta file {self.meta!r} does not exist")
        if self.stocks < 0 or self.events < 0:
            raise ConfigError("stocks and events must be >= 0")
        if self.bins < 2 or self.collapse_bins < 2:
            raise ConfigError("bin counts must be >= 2")
        if not 0 < self.tail_lo < self.tail_hi:
            raise ConfigError("need 0 < tail_lo < tail_hi")
        if self.tail_method not in ("ccdf", "hill"):
            raise ConfigError(f"unknown tail_method {self.tail_method!r}")
        if self.collapse_binning not in ("equal_count", "equal_width"):
            raise ConfigError(f"unknown collapse_binning {self.collapse_binning!r}")
        if self.lot_rule not in ("BuyLots100", "none"):
            raise ConfigError(f"unknown lot_rule {self.lot_rule!r}")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.backend not in ("auto", "compiled", "python"):
            raise ConfigError(f"unknown backend {self.backend!r}")

    @property
    def lot(self) -> str | None:
        return None if self.lot_rule == "none" else self.lot_rule

    def record(self) -> dict:
        """Settings that shape results; the output location is left out."""
        d = dataclasses.asdict(self)
        for key in ("out", "workers", "backend"):
            d.pop(key)
        return d


def _coerce(name: str, text: str, kind: type):
    text = text.strip()
    try:
        if kind is bool:
            low = text.lower()
            if low not in ("1", "0", "true", "false", "yes", "no"):
                raise ValueError
            return low in ("1", "true", "yes")
        return kind(text)
    except ValueError:
        raise ConfigError(f"{name}: cannot read {text!r} as {kind.__name__}") from None


_TYPES = {f.name: {"str": str, "bool": bool, "int": int, "float": float}[f.type]
          for f in dataclasses.fields(PipelineConfig)}


def parse_config_text(text: str) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config line {n}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _TYPES:
            raise ConfigError(f"config line {n}: unknown key {key!r}")
        out[key] = _coerce(key, value, _TYPES[key])
    return out


def load_config(path: str | os.PathLike | None = None, **overrides) -> PipelineConfig:
    values = {}
    if path:
        try:
            values.update(parse_config_text(Path(path).read_text(encoding="utf-8")))
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
    for key, value in overrides.items():
        if value is None:
            continue
        if key not in _TYPES:
            raise ConfigError(f"unknown setting {key!r}")
        values[key] = _coerce(key, value, _TYPES[key]) if isinstance(value, str) else value
    cfg = PipelineConfig(**values)
    cfg.validate()
    return cfg


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else None
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_json(path: Path, obj) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_clean(obj), sort_keys=True, indent=2) + "\n", encoding="utf-8")


def _read_json(path: Path):
    return json.loads(path.read_text(encoding="utf-8"))


# ---------------------------------------------------------------- generate

def synthetic_plan(cfg: PipelineConfig) -> list[tuple[FlowConfig, StockMeta]]:
    """Per-stock flow settings and metadata.

    Codes and capitalizations come from the reference table; price level and
    minimum order size are drawn from an independent stream, so scale is
    uncorrelated with capitalization.
    """
    ss = np.random.SeedSequence(cfg.seed)
    scale_rng = np.random.Generator(np.random.Philox(ss.spawn(1)[0]))
    children = ss.spawn(cfg.stocks)
    plan = []
    for i in range(cfg.stocks):
        code = CODES[i] if i < len(CODES) else f"9{i:05d}"
        ref = STOCK_META[CODES[i % len(CODES)]]
        meta = StockMeta(code, ref.C_tot, ref.C, ref.z, ref.N)
        mid = int(round(float(np.exp(scale_rng.uniform(np.log(300), np.log(3000))))))
        size_min = int(round(float(np.exp(scale_rng.uniform(np.log(50), np.log(500))))))
        flow = FlowConfig(
            seed=int(children[i].generate_state(1)[0]), n_events=cfg.events,
            p_cancel=cfg.p_cancel, size_tail=cfg.size_tail, size_min=size_min,
            placement_width=cfg.placement_width,
            marketable_fraction=cfg.marketable_fraction, initial_mid=mid,
            lot_rule=cfg.lot, events_per_day=cfg.events_per_day, stock=code)
        plan.append((flow, meta))
    return plan


def stage_generate(cfg: PipelineConfig, out: Path) -> dict:
    if not cfg.synthetic:
        return {"skipped": "event input given; nothing to generate"}
    plan = synthetic_plan(cfg)
    streams = [generate_arrays(flow, cfg.backend) for flow, _ in plan]
    lio.write_events(out / "events.csv", streams)
    lio.write_meta(out / "meta.csv", [m for _, m in plan])
    return {"stocks": [m.code for _, m in plan], "events": {s.stock: len(s) for s in streams},
            "flow": {f.stock: dataclasses.asdict(f) for f, _ in plan}}


# ---------------------------------------------------------------- trades

def _events_path(cfg: PipelineConfig, out: Path) -> Path:
    return out / "events.csv" if cfg.synthetic else Path(cfg.input)


def _replay_one(args) -> tuple[pd.DataFrame, SkipReport]:
    events, backend = args
    return reconstruct_trades(events, backend)


def stage_trades(cfg: PipelineConfig, out: Path) -> dict:
    path = _events_path(cfg, out)
    if not path.is_file():
        raise LobImpactError(f"event file {str(path)!r} missing; run the generate stage")
    streams = lio.ingest_events(path, cfg.lot)
    jobs = [(streams[s], cfg.backend) for s in sorted(streams)]
    if cfg.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            results = list(pool.map(_replay_one, jobs))
    else:
        results = [_replay_one(j) for j in jobs]
    frames = [df for df, _ in results if len(df)]
    trades = pd.concat(frames, ignore_index=True) if frames else empty_trades()
    lio.write_trades(out / "trades.csv", trades)
    record = {"stocks": sorted(streams), "skips": {r.stock: r.as_dict() for _, r in results},
              "n_trades": len(trades)}
    if len(trades):
        stats = classify_counts(trades, sorted(streams))
        stats.table.reset_index().to_csv(out / "type_stats.csv", index=False,
                                         lineterminator="\n")
        record["empty_cells"] = [list(c) for c in stats.empty_cells]
        record["invariant_violations"] = invariant_violations(trades)
    else:
        record["empty_cells"] = []
        record["invariant_violations"] = {}
    return record


def _load_trades(out: Path) -> pd.DataFrame:
    path = out / "trades.csv"
    if not path.is_file():
        raise LobImpactError("trades.csv missing; run the trades stage")
    return lio.read_trades(path)


# ---------------------------------------------------------------- impact

def stage_impact(cfg: PipelineConfig, out: Path) -> dict:
    trades = _load_trades(out)
    cdir = out / "curves"
    cdir.mkdir(parents=True, exist_ok=True)
    if len(trades) == 0:
        write_json(out / "impact_fits.json", {})
        write_json(out / "mixture.json", {})
        return {"curves": 0, "excluded": [], "fit_errors": []}
    stats = classify_counts(trades)
    curves = build_all_curves(trades, stats, cfg.bins)
    fits, errors = {}, []
    for (stock, kind, normalized), curve in sorted(curves.curves.items()):
        tag = "norm" if normalized else "raw"
        curve.to_frame().to_csv(cdir / f"{stock}_{kind}_{tag}.csv", index=False,
                                lineterminator="\n")
        rng = (float(np.nextafter(cfg.mixed_fit_lo, np.inf)), np.inf) \
            if kind in MIXED_TYPES else None
        try:
            fit = fit_power_law(curve, rng)
        except LobImpactError as exc:
            errors.append({"stock": stock, "type": kind, "curve": tag, "reason": str(exc)})
            continue
        fits.setdefault(stock, {}).setdefault(kind, {})[tag] = fit.as_dict()

    mixture = {}
    for kind in MIXED_TYPES:
        cell = trades[trade_type_mask(trades, kind)]
        try:
            tab = bin_mixture(cell["omega"].to_numpy(float), cell["r"].abs().to_numpy(),
                              (cell["aggressiveness"] == "F").to_numpy(), cfg.bins)
        except LobImpactError as exc:
            mixture[kind] = {"error": str(exc)}
            continue
        tab.to_csv(cdir / f"ALL_{kind}_mixture.csv", index=False, lineterminator="\n")
        mixture[kind] = {"x": tab["x"].tolist(), "mean_omega": tab["mean_omega"].tolist(),
                         "mean_r": tab["mean_r"].tolist()}
    for kind in ("FB", "FS"):
        try:
            mixture.setdefault("zero_shift_fraction", {})[kind] = zero_shift_fraction(trades, kind)
        except LobImpactError as exc:
            mixture.setdefault("zero_shift_fraction", {})[kind] = None
            errors.append({"stock": "ALL", "type": kind, "curve": "zero_shift", "reason": str(exc)})
    write_json(out / "impact_fits.json", fits)
    write_json(out / "mixture.json", mixture)
    return {"curves": len(curves.curves), "excluded": curves.excluded, "fit_errors": errors}


# ---------------------------------------------------------------- collapse

def _metas(cfg: PipelineConfig, out: Path) -> dict[str, StockMeta]:
    if cfg.meta:
        return lio.read_meta(cfg.meta)
    if cfg.synthetic and (out / "meta.csv").is_file():
        return lio.read_meta(out / "meta.csv")
    return dict(STOCK_META)


def stage_collapse(cfg: PipelineConfig, out: Path) -> dict:
    trades = _load_trades(out)
    metas = _metas(cfg, out)
    missing = sorted(set(trades["stock"]) - set(metas))
    trades = trades[~trades["stock"].isin(missing)]
    results, errors = {}, []
    for kind in TRADE_TYPES:
        if not trade_type_mask(trades, kind).any():
            errors.append({"type": kind, "reason": "no trades"})
            continue
        try:
            rep = compare_normalizations(
                lfm_points(trades, metas, kind), lc_points(trades, metas, kind),
                double_points(trades, metas, kind), cfg.collapse_bins,
                search=dict(coarse_step=cfg.collapse_step, fine_step=cfg.collapse_fine_step,
                            bound=cfg.collapse_bound, binning=cfg.collapse_binning),
                keep_surfaces=cfg.collapse_surface)
        except LobImpactError as exc:
            errors.append({"type": kind, "reason": str(exc)})
            continue
        surfaces = rep.pop("surfaces", {})
        for method, frame in surfaces.items():
            frame.to_csv(out / f"collapse_surface_{method}_{kind}.csv", index=False,
                         lineterminator="\n")
        results[kind] = rep
    write_json(out / "collapse.json", results)
    return {"types": sorted(results), "errors": errors, "stocks_without_meta": missing}


# ---------------------------------------------------------------- tails

_REL_KEYS = ("alpha_omega", "alpha_r", "ratio", "alpha", "D")


def _relation(omega: np.ndarray, r: np.ndarray, alpha: float | None, cfg: PipelineConfig,
              fixed_range: bool) -> dict:
    """Tail exponents of normalized sizes and nonzero normalized |r|."""
    rec: dict = {"alpha": alpha}
    for name, sample in (("omega", omega), ("r", r[r > 0])):
        try:
            rng = (cfg.tail_lo, cfg.tail_hi) if fixed_range else \
                select_range(sample, cfg.tail_min_points)
            fit = fit_tail(sample, rng, cfg.tail_method, cfg.tail_min_points)
            rec[f"{name}_tail"] = fit.as_dict()
            rec[f"alpha_{name}"] = fit.exponent
        except LobImpactError as exc:
            rec[f"{name}_tail"] = {"error": str(exc)}
            rec[f"alpha_{name}"] = None
    if rec["alpha_omega"] is not None and rec["alpha_r"] is not None:
        rec["ratio"] = rec["alpha_omega"] / rec["alpha_r"]
        rec["D"] = (rec["ratio"] - alpha) / alpha if alpha else None
    else:
        rec["ratio"] = rec["D"] = None
    return rec


def stage_tails(cfg: PipelineConfig, out: Path) -> dict:
    trades = _load_trades(out)
    fits_path = out / "impact_fits.json"
    if not fits_path.is_file():
        raise LobImpactError("impact_fits.json missing; run the impact stage")
    fits = _read_json(fits_path)
    result: dict = {}
    pooled: dict[str, list] = {"FB": [], "FS": []}
    for stock in sorted(set(trades["stock"])):
        sub = trades[trades["stock"] == stock]
        for kind in ("FB", "FS"):
            cell = sub[sub["type"] == kind]
            if len(cell) == 0:
                continue
            omega = cell["omega"].to_numpy(float)
            r = cell["r"].abs().to_numpy()
            if r.mean() == 0:
                result.setdefault(stock, {})[kind] = {"error": "average return is zero"}
                continue
            omega, r = omega / omega.mean(), r / r.mean()
            pooled[kind].append((omega, r))
            alpha = fits.get(stock, {}).get(kind, {}).get("raw", {}).get("alpha")
            result.setdefault(stock, {})[kind] = _relation(omega, r, alpha, cfg, False)
    for kind, parts in pooled.items():
        if not parts:
            continue
        alpha = fits.get("ALL", {}).get(kind, {}).get("norm", {}).get("alpha")
        result.setdefault("ALL", {})[kind] = _relation(
            np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts]),
            alpha, cfg, True)
    write_json(out / "tails.json", result)
    relation_table(result).to_csv(out / "relation_table.csv", index=False,
                                  lineterminator="\n", float_format="%.4f")
    return {"stocks": sorted(k for k in result if k != "ALL"),
            "errors": sorted(f"{s}/{k}" for s, v in result.items() for k, rec in v.items()
                             if "error" in rec or rec.get("D") is None)}


def relation_table(result: dict) -> pd.DataFrame:
    """Per-stock rows, then MEAN and STD over stocks, then the pooled ALL row."""
    cols = ["code"] + [f"{side}_{k}" for side in ("buy", "sell") for k in _REL_KEYS]
    rows = []
    for stock in sorted(k for k in result if k != "ALL"):
        rows.append(_table_row(stock, result[stock]))
    body = pd.DataFrame(rows, columns=cols)
    extra = []
    if len(body):
        num = body[cols[1:]].astype(float)
        mean = {"code": "MEAN", **num.mean().to_dict()}
        std = {"code": "STD", **num.std(ddof=0).to_dict()}
        for side in ("buy", "sell"):
            mean[f"{side}_D"] = np.nan
            std[f"{side}_D"] = np.nan
        extra += [mean, std]
    if "ALL" in result:
        extra.append(_table_row("ALL", result["ALL"]))
    return pd.concat([body, pd.DataFrame(extra, columns=cols)], ignore_index=True) \
        if extra else body


def _table_row(code: str, rec: dict) -> dict:
    row = {"code": code}
    for side, kind in (("buy", "FB"), ("sell", "FS")):
        r = rec.get(kind, {})
        for k in _REL_KEYS:
            v = r.get(k)
            row[f"{side}_{k}"] = np.nan if v is None else v
    return row


# ---------------------------------------------------------------- driver

_RUNNERS = {"generate": stage_generate, "trades": stage_trades, "impact": stage_impact,
            "collapse": stage_collapse, "tails": stage_tails}


@dataclass
class PipelineOutcome:
    exit_code: int
    stages_run: list[str] = field(default_factory=list)
    failure: dict | None = None


def run_pipeline(cfg: PipelineConfig, stage: str = "all") -> PipelineOutcome:
    """Run one stage or all of them; failures are written to ``failure.json``."""
    if stage != "all" and stage not in STAGES:
        raise ConfigError(f"unknown stage {stage!r}")
    out = lio.ensure_dir(cfg.out)
    fail_path = out / "failure.json"
    if fail_path.exists():
        fail_path.unlink()
    todo = STAGES if stage == "all" else (stage,)
    outcome = PipelineOutcome(EXIT_OK)
    for name in todo:
        try:
            record = _RUNNERS[name](cfg, out)
        except (ParseError, ConfigError) as exc:
            outcome.failure = {"stage": name, "type": type(exc).__name__, "error": str(exc)}
            outcome.exit_code = EXIT_VALIDATION
            break
        except (LobImpactError, ValueError, OSError) as exc:
            outcome.failure = {"stage": name, "type": type(exc).__name__, "error": str(exc)}
            outcome.exit_code = EXIT_STAGE
            break
        write_json(out / "stages" / f"{name}.json", record)
        outcome.stages_run.append(name)
    if outcome.failure is not None:
        write_json(fail_path, outcome.failure)
    write_summary(cfg, out)
    return outcome


def write_summary(cfg: PipelineConfig, out: Path) -> dict:
    stages = {}
    for name in STAGES:
        p = out / "stages" / f"{name}.json"
        if p.is_file():
            stages[name] = _read_json(p)
    summary = {"config": cfg.record(), "stages": stages}
    trades_rec = stages.get("trades", {})
    summary["skips"] = trades_rec.get("skips", {})
    summary["n_trades"] = trades_rec.get("n_trades")
    if (out / "failure.json").is_file():
        summary["failure"] = _read_json(out / "failure.json")
    write_json(out / "summary.json", summary)
    return summary
