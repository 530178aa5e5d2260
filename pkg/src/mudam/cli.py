"""Scenario runner.

``mudam run <config>`` reads a YAML scenario (a path, or the name of a
bundled one such as ``fig5_desk``), evaluates every sweep point and seed,
and writes one long-format CSV.  Three scenario kinds exist:

sweep
    Spectral efficiency of every scheme/beamformer pair against transmit
    power, path count or antenna count.
region
    Pareto boundary of the two-user rate region over an alpha grid,
    plus the RZF sum-rate operating point of each scheme.
papr
    PAPR CCDF of each scheme with MRT beams.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from . import benchmarks as bm
from .beamforming import mrt_per_path, rzf_per_path, zf_per_path
from .channel import GeometryConfig, ofdm_channel, synthesize_channel
from .conic import SolverSettings
from .dam import dam_sinr
from .exceptions import ConfigurationError, ScaError, ZeroForcingInfeasible
from .metrics import (
    OverheadConfig,
    PaprConfig,
    effective_spectral_efficiency,
    efficiency_factor,
    mrt_papr_source,
    papr_ccdf,
    papr_trials,
)
from .rate_region import (
    dam_pareto_point,
    ofdm_pareto_point,
    simplex_grid,
    sp_pareto_point,
)

log = logging.getLogger("mudam")

KINDS = ("sweep", "region", "papr")
SCHEMES = ("DAM", "SP", "OFDM")
BEAMFORMERS = ("MRT", "ZF", "RZF")
SWEEP_VARIABLES = ("power_dbm", "paths", "num_antennas", "alpha")
SWEEP_COLUMNS = ["sweep_var", "sweep_value", "scheme", "beamformer", "metric", "seed", "value", "status"]
PAPR_COLUMNS = ["sweep_var", "sweep_value", "scheme", "beamformer", "threshold_db", "prob"]


def dbm_to_watt(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    kind: str
    geometry: GeometryConfig
    power_dbm: float
    noise_dbm: float
    schemes: tuple[str, ...]
    beamformers: tuple[str, ...]
    sweep_variable: str
    sweep_values: tuple
    seeds: tuple[int, ...]
    output: str
    num_subcarriers: int = 512
    coherence_samples: int = 128_000
    papr: PaprConfig | None = None
    thresholds_db: tuple[float, ...] = field(default=tuple(np.round(np.arange(0.0, 16.01, 0.1), 2)))

    @property
    def power_w(self) -> float:
        return dbm_to_watt(self.power_dbm)

    @property
    def noise_w(self) -> float:
        return dbm_to_watt(self.noise_dbm)

    def with_seed_offset(self, offset: int) -> "ScenarioConfig":
        papr = None if self.papr is None else replace(self.papr, rng_seed=self.papr.rng_seed + offset)
        return replace(self, seeds=tuple(s + offset for s in self.seeds), papr=papr)


# --- parsing --------------------------------------------------------------


class ConfigError(ConfigurationError):
    """Invalid scenario file; ``issues`` lists (line, field, message)."""

    def __init__(self, source: str, issues: list[tuple[int | None, str, str]]):
        self.source = source
        self.issues = issues
        super().__init__("\n".join(self.lines()))

    def lines(self) -> list[str]:
        out = []
        for line, fld, msg in self.issues:
            where = f"{self.source}:{line}" if line is not None else self.source
            out.append(f"{where}: {fld}: {msg}" if fld else f"{where}: {msg}")
        return out


def _locate(node, path: tuple) -> int | None:
    """1-based line of the YAML node at ``path`` (or of its nearest parent)."""
    line = node.start_mark.line + 1 if node is not None else None
    for key in path:
        if isinstance(node, yaml.MappingNode):
            for k, v in node.value:
                if k.value == key:
                    line, node = k.start_mark.line + 1, v
                    break
            else:
                return line
        elif isinstance(node, yaml.SequenceNode) and isinstance(key, int) and key < len(node.value):
            node = node.value[key]
            line = node.start_mark.line + 1
        else:
            return line
    return line


class _Validator:
    def __init__(self, raw: dict, root, source: str):
        self.raw, self.root, self.source = raw, root, source
        self.issues: list[tuple[int | None, str, str]] = []

    def fail(self, path: tuple, msg: str):
        self.issues.append((_locate(self.root, path), ".".join(str(p) for p in path), msg))

    def get(self, path: tuple, default=None, required=False):
        cur = self.raw
        for key in path:
            if not isinstance(cur, dict) or key not in cur:
                if required:
                    self.fail(path, "missing required field")
                return default
            cur = cur[key]
        return cur

    def number(self, path, default=None, required=False, integer=False, positive=False, nonneg=False):
        v = self.get(path, default, required)
        if v is None:
            return None
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            self.fail(path, f"expected a number, got {v!r}")
            return None
        if integer and not float(v).is_integer():
            self.fail(path, f"expected an integer, got {v!r}")
            return None
        if not math.isfinite(v):
            self.fail(path, "must be finite")
            return None
        if positive and not v > 0:
            self.fail(path, f"must be positive, got {v!r}")
        if nonneg and v < 0:
            self.fail(path, f"must be non-negative, got {v!r}")
        return int(v) if integer else float(v)


def _seed_list(v: _Validator) -> tuple[int, ...]:
    raw = v.get(("seeds",), [0])
    if isinstance(raw, dict):
        start = v.number(("seeds", "start"), 0, integer=True, nonneg=True)
        count = v.number(("seeds", "count"), required=True, integer=True, positive=True)
        if start is None or count is None:
            return ()
        return tuple(range(start, start + count))
    if isinstance(raw, int) and not isinstance(raw, bool):
        raw = [raw]
    if not isinstance(raw, list) or not raw:
        v.fail(("seeds",), "expected a non-empty list of seeds or {start, count}")
        return ()
    out = []
    for i, s in enumerate(raw):
        if isinstance(s, bool) or not isinstance(s, int) or s < 0:
            v.fail(("seeds", i), f"seed must be a non-negative integer, got {s!r}")
        else:
            out.append(s)
    if len(set(out)) != len(out):
        v.fail(("seeds",), "seeds must be distinct")
    return tuple(out)


def _name_list(v: _Validator, key: str, allowed: tuple[str, ...], default) -> tuple[str, ...]:
    raw = v.get((key,), default)
    if isinstance(raw, str):
        raw = [raw]
    if not isinstance(raw, list) or not raw:
        v.fail((key,), f"expected a non-empty list drawn from {list(allowed)}")
        return ()
    out = []
    for i, s in enumerate(raw):
        name = str(s).upper()
        if name not in allowed:
            v.fail((key, i), f"unknown value {s!r}; expected one of {list(allowed)}")
        elif name in out:
            v.fail((key, i), f"duplicate value {s!r}")
        else:
            out.append(name)
    return tuple(out)


def parse_config(text: str, source: str = "<config>") -> ScenarioConfig:
    try:
        root = yaml.compose(text)
        raw = yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        line = exc.problem_mark.line + 1 if exc.problem_mark else None
        raise ConfigError(source, [(line, "", f"YAML syntax error: {exc.problem}")]) from None
    if not isinstance(raw, dict):
        raise ConfigError(source, [(1, "", "top level must be a mapping")])
    v = _Validator(raw, root, source)
    known = {
        "name", "kind", "description", "geometry", "power_dbm", "noise_dbm", "schemes", "beamformers",
        "sweep", "seeds", "output", "num_subcarriers", "coherence_samples", "papr", "thresholds_db",
    }
    for key in raw:
        if key not in known:
            v.fail((key,), "unknown field")

    name = str(v.get(("name",), required=True) or "")
    kind = v.get(("kind",), "sweep")
    if kind not in KINDS:
        v.fail(("kind",), f"expected one of {list(KINDS)}, got {kind!r}")

    g = ("geometry",)
    if not isinstance(v.get(g, required=True), dict):
        v.fail(g, "expected a mapping")
    Mt = v.number(g + ("num_antennas",), required=True, integer=True, positive=True)
    K = v.number(g + ("num_users",), required=True, integer=True, positive=True)
    paths_raw = v.get(g + ("paths_per_user",), required=True)
    paths: tuple[int, ...] = ()
    if isinstance(paths_raw, int) and not isinstance(paths_raw, bool) and K:
        paths = (paths_raw,) * K
    elif isinstance(paths_raw, list):
        paths = tuple(paths_raw)
    elif paths_raw is not None:
        v.fail(g + ("paths_per_user",), "expected an integer or a list of integers")
    delay_range = v.get(g + ("delay_range",), [0, 80])
    aod_range = v.get(g + ("aod_range",), [-90.0, 90.0])
    spacing = v.number(g + ("antenna_spacing",), 0.5, positive=True)
    path_loss = v.number(g + ("path_loss_db",), 0.0)
    for key, val in (("delay_range", delay_range), ("aod_range", aod_range)):
        if not (isinstance(val, list) and len(val) == 2 and all(isinstance(x, (int, float)) for x in val)):
            v.fail(g + (key,), "expected a two-element list [low, high]")

    power_dbm = v.number(("power_dbm",), 30.0)
    noise_dbm = v.number(("noise_dbm",), -93.0)
    M = v.number(("num_subcarriers",), 512, integer=True, positive=True)
    Gc = v.number(("coherence_samples",), 128_000, integer=True, positive=True)
    schemes = _name_list(v, "schemes", SCHEMES, list(SCHEMES))
    beamformers = _name_list(v, "beamformers", BEAMFORMERS, ["MRT"] if kind == "papr" else list(BEAMFORMERS))
    seeds = _seed_list(v)
    output = v.get(("output",), f"{name}.csv")
    if not isinstance(output, str) or not output or Path(output).is_absolute() or ".." in Path(output).parts:
        v.fail(("output",), "expected a relative file name inside the output directory")

    s = ("sweep",)
    sweep_var, sweep_vals = "power_dbm", (power_dbm,)
    if v.get(s) is not None:
        sweep_var = v.get(s + ("variable",), required=True)
        vals = v.get(s + ("values",))
        if sweep_var not in SWEEP_VARIABLES:
            v.fail(s + ("variable",), f"expected one of {list(SWEEP_VARIABLES)}, got {sweep_var!r}")
        elif sweep_var == "alpha":
            steps = v.number(s + ("steps",), required=True, integer=True, positive=True)
            sweep_vals = tuple(p.alpha for p in simplex_grid(K, steps)) if (steps and K) else ()
            if kind != "region":
                v.fail(s + ("variable",), "an alpha sweep needs kind: region")
        else:
            if not isinstance(vals, list) or not vals:
                v.fail(s + ("values",), "expected a non-empty list")
                vals = []
            clean = []
            for i, x in enumerate(vals):
                if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
                    v.fail(s + ("values", i), f"sweep value must be a finite number, got {x!r}")
                elif sweep_var in ("paths", "num_antennas") and (not float(x).is_integer() or x < 1):
                    v.fail(s + ("values", i), f"{sweep_var} values must be positive integers, got {x!r}")
                else:
                    clean.append(int(x) if sweep_var != "power_dbm" else float(x))
            if any(b <= a for a, b in zip(clean, clean[1:])):
                v.fail(s + ("values",), "sweep values must be strictly increasing")
            sweep_vals = tuple(clean)
    if kind == "region" and sweep_var != "alpha":
        v.fail(s, "kind: region needs an alpha sweep")

    papr = None
    if kind == "papr":
        p = ("papr",)
        try:
            papr = PaprConfig(
                qam_order=v.number(p + ("qam_order",), 4, integer=True) or 4,
                num_trials=v.number(p + ("num_trials",), 200, integer=True, positive=True) or 1,
                samples_per_trial=v.number(p + ("samples_per_trial",), 4096, integer=True, positive=True) or 1,
                rng_seed=seeds[0] if seeds else 0,
            )
        except ConfigurationError as exc:
            v.fail(p, str(exc))
        if sweep_var != "power_dbm" or len(sweep_vals) != 1:
            v.fail(s, "kind: papr takes no sweep")
    thresholds = v.get(("thresholds_db",))
    if thresholds is not None:
        if not isinstance(thresholds, list) or not thresholds or any(
            isinstance(x, bool) or not isinstance(x, (int, float)) for x in thresholds
        ):
            v.fail(("thresholds_db",), "expected a non-empty list of numbers")
            thresholds = None
        elif any(b <= a for a, b in zip(thresholds, thresholds[1:])):
            v.fail(("thresholds_db",), "thresholds must be strictly increasing")

    geometry = None
    if not v.issues:
        try:
            geometry = GeometryConfig(
                Mt, K, paths, tuple(int(x) for x in delay_range), tuple(float(x) for x in aod_range),
                spacing, 0, path_loss,
            )
        except ConfigurationError as exc:
            v.fail(g, str(exc))
    if not v.issues:
        # Every sweep point must itself be a valid geometry.
        for i, val in enumerate(sweep_vals):
            try:
                _geometry_at(geometry, sweep_var, val, 0)
            except ConfigurationError as exc:
                v.fail(s + ("values", i), str(exc))
        if "OFDM" in schemes and kind != "papr" and M <= delay_range[1]:
            v.fail(("num_subcarriers",), f"must exceed the largest delay {delay_range[1]}")
        if "OFDM" in schemes and kind == "papr" and M <= delay_range[1]:
            v.fail(("num_subcarriers",), f"must exceed the largest delay {delay_range[1]}")
        if Gc < 2 * delay_range[1]:
            v.fail(("coherence_samples",), "shorter than the DAM guard interval")
    if v.issues:
        raise ConfigError(source, v.issues)

    cfg = ScenarioConfig(
        name=name, kind=kind, geometry=geometry, power_dbm=power_dbm, noise_dbm=noise_dbm,
        schemes=schemes, beamformers=beamformers, sweep_variable=sweep_var, sweep_values=sweep_vals,
        seeds=seeds, output=output, num_subcarriers=M, coherence_samples=Gc, papr=papr,
        **({"thresholds_db": tuple(float(x) for x in thresholds)} if thresholds else {}),
    )
    log.info("%s: P = %.2f dBm -> %.6g W, noise = %.2f dBm -> %.6g W",
             name, power_dbm, cfg.power_w, noise_dbm, cfg.noise_w)
    if sweep_var == "power_dbm" and kind != "papr":
        for val in sweep_vals:
            log.info("%s: sweep P = %.2f dBm -> %.6g W", name, val, dbm_to_watt(val))
    return cfg


def bundled_scenarios() -> list[str]:
    root = resources.files("mudam") / "scenarios"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".yaml"))


def load_config(spec: str) -> ScenarioConfig:
    """Parse a scenario from a file path or a bundled scenario name."""
    path = Path(spec)
    if path.is_file():
        return parse_config(path.read_text(encoding="utf-8"), str(path))
    res = resources.files("mudam") / "scenarios" / f"{spec}.yaml"
    if res.is_file():
        return parse_config(res.read_text(encoding="utf-8"), f"{spec}.yaml")
    raise ConfigError(spec, [(None, "", f"no such file or bundled scenario; bundled: {', '.join(bundled_scenarios())}")])


# --- evaluation -----------------------------------------------------------


def _geometry_at(base: GeometryConfig, var: str, value, seed: int) -> GeometryConfig:
    g = replace(base, rng_seed=seed)
    if var == "paths":
        g = replace(g, paths_per_user=(int(value),) * g.num_users)
    elif var == "num_antennas":
        g = replace(g, num_antennas=int(value))
    return g


def _power_at(cfg: ScenarioConfig, value) -> float:
    return dbm_to_watt(float(value)) if cfg.sweep_variable == "power_dbm" else cfg.power_w


def _fmt(x) -> str:
    if isinstance(x, (tuple, list)):
        return ";".join(_fmt(v) for v in x)
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _sweep_task(cfg: ScenarioConfig, value, seed: int) -> list[list]:
    g = _geometry_at(cfg.geometry, cfg.sweep_variable, value, seed)
    ch = synthesize_channel(g, cfg.noise_w)
    P = _power_at(cfg, value)
    ov = OverheadConfig(ch.n_max, cfg.coherence_samples, cfg.num_subcarriers)
    ofdm = ofdm_channel(ch, cfg.num_subcarriers) if "OFDM" in cfg.schemes else None
    settings = SolverSettings()
    rows = []
    for scheme in cfg.schemes:
        for bf in cfg.beamformers:
            status, se, raw = "ok", math.nan, math.nan
            try:
                if scheme == "DAM":
                    beams = {
                        "MRT": lambda: mrt_per_path(ch, P),
                        "ZF": lambda: zf_per_path(ch, P).beams,
                        "RZF": lambda: rzf_per_path(ch, P, settings).beams,
                    }[bf]()
                    sinr = np.array([r.sinr for r in dam_sinr(ch, beams)])
                elif scheme == "SP":
                    fn = {"MRT": bm.sp_mrt, "ZF": bm.sp_zf, "RZF": lambda c, p: bm.sp_rzf(c, p, settings)}[bf]
                    sinr = np.array([r.sinr for r in bm.sp_sinr(ch, fn(ch, P).beams)])
                else:
                    fn = {"MRT": bm.ofdm_mrt, "ZF": bm.ofdm_zf, "RZF": lambda o, p: bm.ofdm_rzf(o, p, settings)}[bf]
                    sinr = bm.ofdm_sinr(ofdm, fn(ofdm, P).beams).sinr
                se = effective_spectral_efficiency(sinr, scheme, ov)
                raw = float(np.sum(np.log2(1.0 + sinr)))
                if scheme == "OFDM":
                    raw /= cfg.num_subcarriers
            except ZeroForcingInfeasible as exc:
                status = "infeasible"
                log.debug("%s-%s infeasible at %s=%s seed %d: %s", scheme, bf, cfg.sweep_variable, value, seed, exc)
            except ScaError as exc:
                status = "solver_error"
                log.warning("%s-%s SCA failure at seed %d: %s", scheme, bf, seed, exc)
            for metric, val in (("spectral_efficiency", se), ("sum_rate", raw)):
                rows.append([cfg.sweep_variable, _fmt(value), scheme, bf, metric, seed, _fmt(val), status])
    return rows


def _region_task(cfg: ScenarioConfig, alpha, seed: int) -> list[list]:
    g = replace(cfg.geometry, rng_seed=seed)
    ch = synthesize_channel(g, cfg.noise_w)
    P = cfg.power_w
    ov = OverheadConfig(ch.n_max, cfg.coherence_samples, cfg.num_subcarriers)
    settings = SolverSettings()
    rows = []
    for scheme in cfg.schemes:
        factor = float(efficiency_factor(scheme, ov))
        try:
            if scheme == "DAM":
                pt = dam_pareto_point(ch, alpha, P, settings)
            elif scheme == "SP":
                pt = sp_pareto_point(ch, alpha, P, settings)
            else:
                pt = ofdm_pareto_point(ofdm_channel(ch, cfg.num_subcarriers), alpha, P, settings)
            pt = pt.scaled(factor)
            vals = [(f"rate_{k + 1}", r) for k, r in enumerate(pt.rates)] + [("r_star", pt.r_star)]
            status = "ok" if pt.status == "optimal" else pt.status
        except ScaError as exc:
            log.warning("%s region point failed at seed %d: %s", scheme, seed, exc)
            vals = [(f"rate_{k + 1}", math.nan) for k in range(ch.num_users)] + [("r_star", math.nan)]
            status = "solver_error"
        for metric, val in vals:
            rows.append(["alpha", _fmt(alpha), scheme, "optimal", metric, seed, _fmt(val), status])
    return rows


def _rzf_point_task(cfg: ScenarioConfig, seed: int) -> list[list]:
    """RZF operating point of each scheme, reported next to the boundary."""
    g = replace(cfg.geometry, rng_seed=seed)
    ch = synthesize_channel(g, cfg.noise_w)
    P = cfg.power_w
    ov = OverheadConfig(ch.n_max, cfg.coherence_samples, cfg.num_subcarriers)
    rows = []
    for scheme in cfg.schemes:
        factor = float(efficiency_factor(scheme, ov))
        if scheme == "DAM":
            rates = rzf_per_path(ch, P).rates
        elif scheme == "SP":
            rates = bm.sp_rzf(ch, P).rates
        else:
            rates = bm.ofdm_rzf(ofdm_channel(ch, cfg.num_subcarriers), P).rates
        for k, r in enumerate(rates):
            rows.append(["alpha", "rzf", scheme, "RZF", f"rate_{k + 1}", seed, _fmt(factor * r), "ok"])
    return rows


def _papr_task(cfg: ScenarioConfig, scheme: str, trials: range) -> np.ndarray:
    src = mrt_papr_source(scheme, cfg.geometry, cfg.power_w, cfg.noise_w, cfg.num_subcarriers)
    return papr_trials(src, cfg.papr, trials)


def _tasks(cfg: ScenarioConfig):
    if cfg.kind == "sweep":
        return [(_sweep_task, (cfg, v, s)) for v in cfg.sweep_values for s in cfg.seeds]
    if cfg.kind == "region":
        tasks = [(_region_task, (cfg, a, s)) for a in cfg.sweep_values for s in cfg.seeds]
        if "RZF" in cfg.beamformers:
            tasks += [(_rzf_point_task, (cfg, s)) for s in cfg.seeds]
        return tasks
    chunk = 25
    n = cfg.papr.num_trials
    return [
        (_papr_task, (cfg, sch, range(i, min(i + chunk, n))))
        for sch in cfg.schemes
        for i in range(0, n, chunk)
    ]


def _call(item):
    fn, args = item
    return fn(*args)


def run_scenario(cfg: ScenarioConfig, out_dir: Path, jobs: int = 1) -> Path:
    """Evaluate every task and write the CSV; returns its path.

    Results are merged in task order, so the file is identical for any
    ``jobs``.
    """
    tasks = _tasks(cfg)
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_call, tasks))
    else:
        results = [_call(t) for t in tasks]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if cfg.kind == "papr":
        w.writerow(PAPR_COLUMNS)
        for sch in cfg.schemes:
            vals = np.concatenate([r for (fn, a), r in zip(tasks, results) if a[1] == sch])
            curve = papr_ccdf(None, cfg.papr, cfg.thresholds_db, samples_db=vals)
            for t, p in zip(curve.thresholds_db, curve.probabilities):
                w.writerow(["power_dbm", _fmt(cfg.power_dbm), sch, "MRT", _fmt(float(t)), _fmt(float(p))])
    else:
        w.writerow(SWEEP_COLUMNS)
        for rows in results:
            w.writerows(rows)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / cfg.output
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(buf.getvalue(), encoding="utf-8")
    return path


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mudam", description="Multi-user DAM experiment runner")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run a scenario file or bundled scenario")
    r.add_argument("config", help="YAML file or bundled name (" + ", ".join(bundled_scenarios()) + ")")
    r.add_argument("--validate-only", action="store_true", help="parse and validate, write nothing")
    r.add_argument("--seed-offset", type=int, default=0, metavar="N", help="add N to every seed")
    r.add_argument("--out", default="results", metavar="DIR", help="output directory (default: results)")
    r.add_argument("--jobs", type=int, default=1, metavar="N", help="worker processes (default: 1)")
    sub.add_parser("list", help="list bundled scenarios")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s"
    )
    if args.command == "list":
        for name in bundled_scenarios():
            print(name)
        return 0
    if args.jobs < 1:
        print("error: --jobs must be at least 1", file=sys.stderr)
        return 2
    if args.seed_offset < 0:
        print("error: --seed-offset must be non-negative", file=sys.stderr)
        return 2
    try:
        cfg = load_config(args.config).with_seed_offset(args.seed_offset)
    except ConfigError as exc:
        for line in exc.lines():
            print(line, file=sys.stderr)
        return 2
    if args.validate_only:
        print(f"ok: {cfg.name} ({cfg.kind}, {len(_tasks(cfg))} tasks)")
        return 0
    path = run_scenario(cfg, Path(args.out), args.jobs)
    print(path)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
