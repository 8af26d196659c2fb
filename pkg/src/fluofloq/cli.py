"""コマンドライン: 設定ファイルの読み込み、各計算経路の実行、比較レポートとファイル出力。

設定はJSONで、物理量は κ 単位、角度は π 単位（φ = 0.5 は π/2）です。
"""

import argparse
import csv
import dataclasses
import json
import logging
import os
import warnings
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from contextlib import suppress
from dataclasses import dataclass, field
from functools import cached_property
from importlib import resources
from itertools import combinations
from pathlib import Path
from typing import Any, Final

import numpy as np

from . import __version__
from .elements import TransitionElements, parity_analysis, transition_elements
from .errors import ConfigError, FluofloqError
from .exact import exact_route
from .floquet import Branch, FloquetSolution, solve_floquet, solve_floquet_sambe
from .model import Harmonic, Modulation, SystemParams, classify_parity
from .secular import Spectrum, rates, secular_spectrum, symmetric_grid
from .vanvleck import vanvleck_elements, vanvleck_solution

logger = logging.getLogger(__name__)

EXIT_OK: Final = 0
EXIT_CONFIG: Final = 2
EXIT_NUMERICAL: Final = 3
THREADS_ENV: Final = "FLUOFLOQ_THREADS"
SWEEP_AXES: Final = ("omega_x", "detuning", "phi", "r")
REPORTED_HARMONICS: Final = (-2, -1, 1, 2)
TOP_LEVEL_KEYS: Final = frozenset({"name", "description", "system", "modulation", "routes", "numerics", "outputs", "sweep"})


@dataclass(frozen=True)
class NumericsConfig:
    """数値計算の設定。格子の広がりは ω_z 単位です。"""

    steps_per_period: int = 4096
    n_time_samples: int = 256
    l_max: int = 16
    j_max: int = 16
    harmonic_cutoff: int | None = None
    tau_max: float = 40.0
    n_tprime: int = 32
    grid_extent: float = 4.0
    grid_points: int = 8001
    apodization: float = 0.0


@dataclass(frozen=True)
class OutputConfig:
    """出力の設定。`line_positions`は線の強度を報告する位置（ω_z 単位）です。"""

    line_positions: tuple[float, ...] = (-1.0, 1.0)
    spectra: bool = True


@dataclass(frozen=True)
class SweepConfig:
    """掃引の設定。`axis`は掃引するパラメーター名、`values`はその値の並びです。"""

    axis: str
    values: tuple[float, ...]


@dataclass(frozen=True)
class RunConfig:
    """検証済みの実行設定。イミュータブルです。"""

    name: str
    params: SystemParams
    modulation: Modulation
    routes: tuple[str, ...]
    numerics: NumericsConfig = field(default_factory=NumericsConfig)
    outputs: OutputConfig = field(default_factory=OutputConfig)
    sweep: SweepConfig | None = None
    description: str = ""

    def with_axis(self, axis: str, value: float) -> "RunConfig":
        """掃引軸の1点に置き換えた設定を返します。`phi`は π 単位です。"""
        match axis:
            case "omega_x":
                return dataclasses.replace(self, params=dataclasses.replace(self.params, omega_x=value))
            case "detuning":
                return dataclasses.replace(self, params=dataclasses.replace(self.params, detuning=value))
            case "phi" | "r":
                harmonics = list(self.modulation.harmonics)
                if len(harmonics) < 2:
                    raise ConfigError([f"sweep axis {axis!r} needs at least two harmonics"])
                second = harmonics[1]
                if axis == "phi":
                    harmonics[1] = dataclasses.replace(second, phase=value * np.pi)
                else:
                    harmonics[1] = dataclasses.replace(second, amplitude=value * harmonics[0].amplitude)
                return dataclasses.replace(self, modulation=dataclasses.replace(self.modulation, harmonics=tuple(harmonics)))
            case _:
                raise ConfigError([f"sweep axis must be one of {', '.join(SWEEP_AXES)}: {axis!r}"])

    def to_dict(self) -> dict[str, Any]:
        """展開済みの設定をJSON形式（角度は π 単位）で返します。"""
        numerics = dataclasses.asdict(self.numerics)
        outputs = dataclasses.asdict(self.outputs)
        outputs["line_positions"] = list(self.outputs.line_positions)
        out: dict[str, Any] = {
            "name": self.name,
            "system": dataclasses.asdict(self.params),
            "modulation": {
                "omega_z": self.modulation.fundamental_freq,
                "harmonics": [
                    {"multiple": h.multiple, "amplitude": h.amplitude, "phase": h.phase / np.pi}
                    for h in self.modulation.harmonics
                ],
            },
            "routes": list(self.routes),
            "numerics": numerics,
            "outputs": outputs,
        }
        if self.description:
            out["description"] = self.description
        if self.sweep is not None:
            out["sweep"] = {"axis": self.sweep.axis, "values": list(self.sweep.values)}
        return out


class _Problems:
    """フィールド単位の検証エラーを集めます。"""

    __slots__ = ("items",)

    def __init__(self) -> None:
        self.items: list[str] = []

    def add(self, where: str, message: str) -> None:
        self.items.append(f"{where}: {message}")

    def number(self, section: dict[str, Any], key: str, where: str, default: float | None = None) -> float:
        value = section.get(key, default)
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            self.add(f"{where}.{key}", f"expected a number, got {value!r}")
            return float("nan")
        return float(value)

    def integer(self, section: dict[str, Any], key: str, where: str, default: int, minimum: int) -> int:
        value = section.get(key, default)
        if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
            self.add(f"{where}.{key}", f"expected an integer >= {minimum}, got {value!r}")
            return default
        return value

    def section(self, raw: dict[str, Any], key: str, required: bool = False) -> dict[str, Any]:
        value = raw.get(key)
        if value is None:
            if required:
                self.add(key, "missing section")
            return {}
        if not isinstance(value, dict):
            self.add(key, f"expected an object, got {type(value).__name__}")
            return {}
        return value


def _parse_modulation(problems: _Problems, section: dict[str, Any]) -> Modulation | None:
    omega_z = problems.number(section, "omega_z", "modulation")
    if not omega_z > 0.0:
        problems.add("modulation.omega_z", f"must be positive, got {section.get('omega_z')!r}")
        return None
    if "amplitude" in section:
        if "harmonics" in section:
            problems.add("modulation", "give either harmonics or the biharmonic shorthand, not both")
            return None
        amplitude = problems.number(section, "amplitude", "modulation")
        p = problems.integer(section, "p", "modulation", 2, 2)
        r = problems.number(section, "r", "modulation", 1.0)
        phi = problems.number(section, "phi", "modulation", 0.0)
        return Modulation.biharmonic(omega_z, amplitude, p, r, phi * np.pi)

    harmonics = section.get("harmonics", [])
    if not isinstance(harmonics, list):
        problems.add("modulation.harmonics", "expected a list")
        return None
    parsed = []
    for i, item in enumerate(harmonics):
        where = f"modulation.harmonics[{i}]"
        if not isinstance(item, dict):
            problems.add(where, "expected an object")
            continue
        multiple = problems.integer(item, "multiple", where, 0, 1)
        amplitude = problems.number(item, "amplitude", where)
        phase = problems.number(item, "phase", where, 0.0)
        if multiple >= 1:
            parsed.append(Harmonic(multiple, amplitude, phase * np.pi))
    return Modulation(omega_z, tuple(parsed))


def _parse_numerics(problems: _Problems, section: dict[str, Any]) -> NumericsConfig:
    base = NumericsConfig()
    samples = problems.integer(section, "n_time_samples", "numerics", base.n_time_samples, 128)
    if samples & (samples - 1):
        problems.add("numerics.n_time_samples", f"must be a power of two, got {samples}")
    steps = problems.integer(section, "steps_per_period", "numerics", base.steps_per_period, 256)
    if steps % samples:
        problems.add("numerics.steps_per_period", f"must be a multiple of n_time_samples ({samples}), got {steps}")
    n_tprime = problems.integer(section, "n_tprime", "numerics", base.n_tprime, 16)
    if samples % n_tprime:
        problems.add("numerics.n_tprime", f"must divide n_time_samples ({samples}), got {n_tprime}")
    points = problems.integer(section, "grid_points", "numerics", base.grid_points, 3)
    if points % 2 == 0:
        problems.add("numerics.grid_points", f"must be odd so the grid is symmetric, got {points}")
    cutoff = section.get("harmonic_cutoff")
    if cutoff is not None:
        cutoff = problems.integer(section, "harmonic_cutoff", "numerics", 24, 1)
    tau_max = problems.number(section, "tau_max", "numerics", base.tau_max)
    extent = problems.number(section, "grid_extent", "numerics", base.grid_extent)
    if not extent > 0.0:
        problems.add("numerics.grid_extent", f"must be positive, got {extent}")
    apodization = problems.number(section, "apodization", "numerics", base.apodization)
    if apodization < 0.0:
        problems.add("numerics.apodization", f"must be non-negative, got {apodization}")
    for key in set(section) - {f.name for f in dataclasses.fields(NumericsConfig)}:
        problems.add(f"numerics.{key}", "unknown key")
    return NumericsConfig(
        steps,
        samples,
        problems.integer(section, "l_max", "numerics", base.l_max, 1),
        problems.integer(section, "j_max", "numerics", base.j_max, 1),
        cutoff,
        tau_max,
        n_tprime,
        extent,
        points,
        apodization,
    )


def _check_bounds(
    problems: _Problems,
    params: SystemParams | None,
    modulation: Modulation | None,
    numerics: NumericsConfig,
    outputs: OutputConfig,
) -> None:
    """実行時に`ValueError`となる値の組み合わせを、設定の段階で検出します。"""
    fourier_cutoff = numerics.n_time_samples // 2 - 1
    if numerics.l_max > fourier_cutoff:
        problems.add(
            "numerics.l_max",
            f"must not exceed n_time_samples/2 - 1 ({fourier_cutoff}), got {numerics.l_max}",
        )
    for pos in outputs.line_positions:
        if abs(pos) > numerics.grid_extent:
            problems.add("outputs.line_positions", f"{pos:g} lies outside the grid extent ±{numerics.grid_extent:g}")
    if params is not None and numerics.tau_max < 10.0 / params.kappa:
        problems.add("numerics.tau_max", f"must be >= 10/kappa ({10.0 / params.kappa:g}), got {numerics.tau_max:g}")
    if modulation is not None and numerics.harmonic_cutoff is not None:
        floor = 2.0 * modulation.total_amplitude / modulation.fundamental_freq
        if numerics.harmonic_cutoff < floor:
            problems.add(
                "numerics.harmonic_cutoff",
                f"must be >= 2·Σ|amplitude|/omega_z ({floor:.2f}), got {numerics.harmonic_cutoff}",
            )


def parse_config(raw: Any, name: str = "run") -> RunConfig:
    """JSONから読んだ値を検証して`RunConfig`にします。

    Raises:
        ConfigError: 検証に失敗したフィールドがある場合。すべての問題をまとめて報告します。
    """
    problems = _Problems()
    if not isinstance(raw, dict):
        raise ConfigError([f"config: expected an object, got {type(raw).__name__}"])
    for key in set(raw) - TOP_LEVEL_KEYS:
        problems.add(key, "unknown key")

    system = problems.section(raw, "system", required=True)
    omega_x = problems.number(system, "omega_x", "system")
    detuning = problems.number(system, "detuning", "system", 0.0)
    kappa = problems.number(system, "kappa", "system", 1.0)
    params = None
    try:
        params = SystemParams(omega_x, detuning, kappa)
    except ValueError as e:
        problems.add("system", str(e))

    modulation = None
    try:
        modulation = _parse_modulation(problems, problems.section(raw, "modulation", required=True))
    except ValueError as e:
        problems.add("modulation", str(e))

    routes = raw.get("routes", list(ROUTES))
    if not isinstance(routes, list) or not routes:
        problems.add("routes", "expected a non-empty list")
        routes = []
    for route in routes:
        if route not in ROUTES:
            problems.add("routes", f"unknown route {route!r}; choose from {', '.join(ROUTES)}")

    numerics = _parse_numerics(problems, problems.section(raw, "numerics"))
    out_section = problems.section(raw, "outputs")
    positions = out_section.get("line_positions", [-1.0, 1.0])
    if not isinstance(positions, list) or not all(isinstance(p, (int, float)) for p in positions):
        problems.add("outputs.line_positions", "expected a list of numbers")
        positions = []
    outputs = OutputConfig(tuple(float(p) for p in positions), bool(out_section.get("spectra", True)))
    _check_bounds(problems, params, modulation, numerics, outputs)

    sweep = None
    if sweep_section := problems.section(raw, "sweep"):
        axis = sweep_section.get("axis")
        values = sweep_section.get("values")
        if axis not in SWEEP_AXES:
            problems.add("sweep.axis", f"must be one of {', '.join(SWEEP_AXES)}, got {axis!r}")
        if not isinstance(values, list) or not values or not all(isinstance(v, (int, float)) for v in values):
            problems.add("sweep.values", "expected a non-empty list of numbers")
        else:
            sweep = SweepConfig(str(axis), tuple(float(v) for v in values))

    if problems.items:
        raise ConfigError(problems.items)
    return RunConfig(
        str(raw.get("name", name)),
        params,
        modulation,
        tuple(dict.fromkeys(routes)),
        numerics,
        outputs,
        sweep,
        str(raw.get("description", "")),
    )


def recipe_names() -> list[str]:
    """同梱のレシピ名を返します。"""
    return sorted(p.name.removesuffix(".json") for p in resources.files("fluofloq.recipes").iterdir() if p.name.endswith(".json"))


def load_config(source: str | os.PathLike[str]) -> RunConfig:
    """ファイルパス、または同梱レシピ名から設定を読み込みます。"""
    path = Path(source)
    if path.is_file():
        text = path.read_text(encoding="utf-8")
        name = path.stem
    elif str(source) in recipe_names():
        text = resources.files("fluofloq.recipes").joinpath(f"{source}.json").read_text(encoding="utf-8")
        name = str(source)
    else:
        raise ConfigError([f"config: no such file or bundled recipe: {source}"])
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError([f"config: invalid JSON at line {e.lineno}: {e.msg}"]) from e
    return parse_config(raw, name)


@dataclass(frozen=True)
class RouteResult:
    """1つの計算経路の結果。"""

    route: str
    spectrum: Spectrum
    splitting: float | None = None
    elements: TransitionElements | None = None
    details: dict[str, float] = field(default_factory=dict)


class RunContext:
    """1点分の計算で経路間に共有する値を保持します。"""

    def __init__(self, config: RunConfig) -> None:
        self.config = config
        self.grid = symmetric_grid(config.numerics.grid_extent * config.modulation.fundamental_freq, config.numerics.grid_points)

    @cached_property
    def monodromy(self) -> FloquetSolution:
        n = self.config.numerics
        return solve_floquet(self.config.params, self.config.modulation, n.steps_per_period, n.n_time_samples)

    @cached_property
    def monodromy_elements(self) -> TransitionElements:
        return transition_elements(self.monodromy, self.config.numerics.l_max)


def _secular_result(ctx: RunContext, route: str, elems: TransitionElements, splitting: float) -> RouteResult:
    params = ctx.config.params
    r = rates(elems, params.kappa)
    spectrum = secular_spectrum(elems, r, splitting, ctx.config.modulation.fundamental_freq, ctx.grid, route)
    details = {
        "gamma_rel": r.gamma_rel,
        "gamma_deph": r.gamma_deph,
        "gamma_s": r.gamma_s,
        "rho_pp_ss": r.rho_pp_ss,
        "parseval": elems.parseval(),
    }
    return RouteResult(route, spectrum, splitting, elems, details)


def _route_exact(ctx: RunContext) -> RouteResult:
    cfg, n = ctx.config, ctx.config.numerics
    spectrum, trace = exact_route(
        cfg.params, cfg.modulation, ctx.grid, n.n_tprime, n.tau_max, n.steps_per_period, n.n_time_samples, n.apodization
    )
    details = {
        "g1_zero": float(trace.g1[0].real),
        "imaginary_ratio": trace.imaginary_ratio(),
        "mean_excited_population": trace.steady.mean_excited_population(),
    }
    return RouteResult("exact", spectrum, None, None, details)


def _route_secular_monodromy(ctx: RunContext) -> RouteResult:
    return _secular_result(ctx, "secular_monodromy", ctx.monodromy_elements, ctx.monodromy.splitting)


def _route_secular_sambe(ctx: RunContext) -> RouteResult:
    cfg, n = ctx.config, ctx.config.numerics
    sol = solve_floquet_sambe(cfg.params, cfg.modulation, n.harmonic_cutoff, n.n_time_samples)
    return _secular_result(ctx, "secular_sambe", transition_elements(sol, n.l_max), sol.splitting)


def _route_secular_vanvleck(ctx: RunContext) -> RouteResult:
    cfg, n = ctx.config, ctx.config.numerics
    vv = vanvleck_solution(cfg.params, cfg.modulation, n.j_max, n.l_max)
    result = _secular_result(ctx, "secular_vanvleck", vanvleck_elements(vv, n.l_max), vv.Omega_m)
    result.details["validity_margin"] = vv.validity_margin
    return result


ROUTES: Final[dict[str, Callable[[RunContext], RouteResult]]] = {
    "exact": _route_exact,
    "secular_monodromy": _route_secular_monodromy,
    "secular_sambe": _route_secular_sambe,
    "secular_vanvleck": _route_secular_vanvleck,
}


@dataclass(frozen=True)
class ComparisonReport:
    """全経路の結果と比較。イミュータブルです。"""

    config: RunConfig
    results: dict[str, RouteResult]
    errors: dict[str, str]
    parity: dict[str, Any]
    parity_report: dict[str, Any] | None
    line_half_width: float

    @property
    def ok(self) -> bool:
        return not self.errors

    def line_weights(self, route: str) -> dict[float, float]:
        """各報告位置 (ω_z 単位) の線の積分強度を返します。"""
        spectrum = self.results[route].spectrum
        w = self.config.modulation.fundamental_freq
        return {pos: spectrum.window_weight(pos * w, self.line_half_width) for pos in self.config.outputs.line_positions}

    def deviations(self) -> dict[str, float]:
        """経路の組ごとの max|S_a − S_b| / max(S_a, S_b) を返します。"""
        out = {}
        for a, b in combinations(sorted(self.results), 2):
            sa, sb = self.results[a].spectrum.s_inc, self.results[b].spectrum.s_inc
            scale = max(float(np.max(sa)), float(np.max(sb)))
            out[f"{a}|{b}"] = float(np.max(np.abs(sa - sb)) / scale) if scale > 0.0 else 0.0
        return out

    def to_dict(self) -> dict[str, Any]:
        routes = {}
        for name, result in self.results.items():
            spectrum = result.spectrum
            routes[name] = {
                "asymmetry": spectrum.asymmetry(),
                "splitting": result.splitting,
                "total_incoherent_weight": spectrum.total_incoherent_weight(),
                "peak_positions": [float(p) for p in spectrum.peak_positions()],
                "line_weights": {f"{pos:g}": w for pos, w in self.line_weights(name).items()},
                "coherent_lines": [[c.position, c.weight] for c in spectrum.coherent_lines],
                "details": dict(result.details),
            }
            if result.elements is not None:
                routes[name]["x_pp"] = _x_pp_columns(result.elements)
        return {
            "config": self.config.to_dict(),
            "version": __version__,
            "parity": self.parity,
            "parity_report": self.parity_report,
            "routes": routes,
            "errors": dict(self.errors),
            "deviations": self.deviations(),
            "line_half_width": self.line_half_width,
        }

    def lines_dict(self) -> dict[str, Any]:
        return {
            name: {
                "lines": [
                    {
                        "position": line.position,
                        "weight": line.weight,
                        "width": line.width,
                        "family": str(line.family),
                        "harmonic": line.harmonic,
                    }
                    for line in result.spectrum.line_table
                ],
                "coherent": [
                    {"position": c.position, "weight": c.weight, "harmonic": c.harmonic}
                    for c in result.spectrum.coherent_lines
                ],
            }
            for name, result in self.results.items()
        }


def _x_pp_columns(elems: TransitionElements) -> dict[str, float]:
    out = {}
    for l in REPORTED_HARMONICS:
        x = elems.element(Branch.PLUS, Branch.PLUS, l)
        out[f"x_pp_{l}_re"] = x.real
        out[f"x_pp_{l}_im"] = x.imag
    return out


def _half_width(ctx: RunContext, results: dict[str, RouteResult]) -> float:
    """線の強度を積分する窓の半幅 min(Δ₊₋, ω_z − Δ₊₋)/2（上限 ω_z/4）を返します。"""
    w = ctx.config.modulation.fundamental_freq
    splitting = next((r.splitting for r in results.values() if r.splitting is not None), None)
    if splitting is None:
        try:
            splitting = ctx.monodromy.splitting
        except FluofloqError:
            splitting = 0.5 * w
    step = float(ctx.grid[1] - ctx.grid[0])
    folded = splitting % w
    return max(min(0.5 * min(folded, w - folded), 0.25 * w), 4.0 * step)


def _run_route(ctx: RunContext, route: str) -> RouteResult | str:
    logger.info("%s: running route %s", ctx.config.name, route)
    try:
        return ROUTES[route](ctx)
    except FluofloqError as e:
        logger.error("%s: route %s failed: %s", ctx.config.name, route, e)
        return f"{type(e).__name__}: {e}"


def evaluate(config: RunConfig, threads: int = 1) -> ComparisonReport:
    """設定にあるすべての経路を実行します。経路ごとの数値エラーは記録して続行します。"""
    ctx = RunContext(config)
    # 経路のスレッドが同じ値を二重に計算しないよう先に求めておく
    with suppress(FluofloqError):
        ctx.monodromy_elements
    with ThreadPoolExecutor(max_workers=max(1, threads)) as executor:
        outcomes = list(executor.map(lambda route: _run_route(ctx, route), config.routes))
    results: dict[str, RouteResult] = {}
    errors: dict[str, str] = {}
    for route, outcome in zip(config.routes, outcomes):
        if isinstance(outcome, str):
            errors[route] = outcome
        else:
            results[route] = outcome

    parity = classify_parity(config.params, config.modulation)
    parity_dict = {
        "has_generalized_parity": parity.has_generalized_parity,
        "case": str(parity.case_label),
        "waveform_residual": parity.waveform_residual,
        "detuning_residual": parity.detuning_residual,
        "tolerance": parity.tolerance,
    }
    parity_report = None
    try:
        parity_report = parity_analysis(
            ctx.monodromy, ctx.monodromy_elements, parity, config.modulation, config.params
        ).to_dict()
    except FluofloqError as e:
        logger.warning("%s: parity analysis skipped: %s", config.name, e)
    return ComparisonReport(config, results, errors, parity_dict, parity_report, _half_width(ctx, results))


def _provenance(config: RunConfig) -> list[str]:
    return [f"# fluofloq {__version__}", "# config: " + json.dumps(config.to_dict(), sort_keys=True)]


def _format(value: Any) -> str:
    if isinstance(value, str):
        return value
    return "%.12e" % value


def write_spectra(report: ComparisonReport, path: Path) -> None:
    names = list(report.results)
    with path.open("w", newline="", encoding="utf-8") as fp:
        for line in _provenance(report.config):
            fp.write(line + "\n")
        writer = csv.writer(fp)
        writer.writerow(["delta", *(f"s_inc_{name}" for name in names)])
        grid = next(iter(report.results.values())).spectrum.delta_grid if names else np.empty(0)
        columns = [report.results[name].spectrum.s_inc for name in names]
        for i, delta in enumerate(grid):
            writer.writerow([_format(delta), *(_format(c[i]) for c in columns)])


def _write_json(data: Any, path: Path) -> None:
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def run(config: RunConfig, out_dir: Path, threads: int = 1) -> tuple[ComparisonReport, list[Path]]:
    """1点を計算してスペクトル・線の表・比較レポートを書き出します。"""
    out_dir.mkdir(parents=True, exist_ok=True)
    report = evaluate(config, threads)
    written = []
    if config.outputs.spectra and report.results:
        written.append(out_dir / f"{config.name}_spectrum.csv")
        write_spectra(report, written[-1])
    written.append(out_dir / f"{config.name}_lines.json")
    _write_json(report.lines_dict(), written[-1])
    written.append(out_dir / f"{config.name}_report.json")
    _write_json(report.to_dict(), written[-1])
    for path in written:
        logger.info("wrote %s", path)
    return report, written


def sweep_columns(config: RunConfig, axis: str) -> list[str]:
    columns = [axis, "status", "splitting"]
    for route in config.routes:
        columns.append(f"{route}_asymmetry")
        columns.extend(f"{route}_weight_{pos:g}" for pos in config.outputs.line_positions)
        if route != "exact":
            columns.extend(f"{route}_{key}" for key in _x_pp_columns_names())
    return columns


def _x_pp_columns_names() -> list[str]:
    return [f"x_pp_{l}_{part}" for l in REPORTED_HARMONICS for part in ("re", "im")]


def sweep_row(config: RunConfig, axis: str, value: float) -> dict[str, Any]:
    """掃引の1点を計算して行を返します。失敗した点はエラー行になります。"""
    row: dict[str, Any] = {axis: value}
    try:
        report = evaluate(config.with_axis(axis, value))
    except (FluofloqError, ValueError) as e:
        row["status"] = f"error: {type(e).__name__}: {e}"
        return row
    row["status"] = "ok" if report.ok else "error: " + "; ".join(f"{k}: {v}" for k, v in sorted(report.errors.items()))
    splittings = [r.splitting for r in report.results.values() if r.splitting is not None]
    if splittings:
        row["splitting"] = splittings[0]
    for route, result in report.results.items():
        row[f"{route}_asymmetry"] = result.spectrum.asymmetry()
        try:
            weights = report.line_weights(route)
        except ValueError as e:
            row["status"] = f"error: {route}: {e}"
            weights = {}
        for pos, weight in weights.items():
            row[f"{route}_weight_{pos:g}"] = weight
        if result.elements is not None:
            row.update({f"{route}_{k}": v for k, v in _x_pp_columns(result.elements).items()})
    logger.info("%s: %s=%g %s", config.name, axis, value, row["status"])
    return row


def sweep(
    config: RunConfig, axis: str, values: Sequence[float], out_dir: Path, threads: int = 1
) -> tuple[Path, list[dict[str, Any]]]:
    """掃引の各点を並列に計算し、掃引順に行を書き出します。書き出したパスと行を返します。"""
    out_dir.mkdir(parents=True, exist_ok=True)
    columns = sweep_columns(config, axis)
    with ThreadPoolExecutor(max_workers=max(1, threads)) as executor:
        rows = list(executor.map(lambda v: sweep_row(config, axis, v), values))

    path = out_dir / f"{config.name}_sweep_{axis}.csv"
    with path.open("w", newline="", encoding="utf-8") as fp:
        for line in _provenance(config):
            fp.write(line + "\n")
        writer = csv.writer(fp)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_format(row.get(c, float("nan"))) for c in columns])
    logger.info("wrote %s", path)
    return path, rows


def _threads(option: int | None) -> int:
    if option is not None:
        return option
    env = os.environ.get(THREADS_ENV)
    if env is None:
        return 1
    try:
        return max(1, int(env))
    except ValueError:
        raise ConfigError([f"{THREADS_ENV}: expected an integer, got {env!r}"]) from None


def _parse_values(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError([f"--values: expected comma-separated numbers, got {text!r}"]) from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fluofloq", description="周期的に周波数変調された二準位系の共鳴蛍光スペクトル")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="ログを詳しくします（-vv でデバッグ）")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run_parser = sub.add_parser("run", help="設定ファイル1つ分を計算します")
    run_parser.add_argument("config", help="設定ファイルのパス、または同梱レシピ名")
    run_parser.add_argument("--out-dir", type=Path, default=Path("."))
    run_parser.add_argument("--threads", type=int, default=None)

    sweep_parser = sub.add_parser("sweep", help="パラメーターを掃引します")
    sweep_parser.add_argument("config", help="設定ファイルのパス、または同梱レシピ名")
    sweep_parser.add_argument("--axis", choices=SWEEP_AXES)
    sweep_parser.add_argument("--values", help="カンマ区切りの値（phi は π 単位）")
    sweep_parser.add_argument("--out-dir", type=Path, default=Path("."))
    sweep_parser.add_argument("--threads", type=int, default=None)

    sub.add_parser("recipes", help="同梱のレシピを一覧します")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    level = (logging.WARNING, logging.INFO, logging.DEBUG)[min(args.verbose, 2)]
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    logging.captureWarnings(True)
    warnings.simplefilter("default")

    try:
        match args.command:
            case "recipes":
                for name in recipe_names():
                    description = load_config(name).description
                    print(f"{name}\t{description}")
                return EXIT_OK
            case "run":
                config = load_config(args.config)
                report, _ = run(config, args.out_dir, _threads(args.threads))
                return EXIT_OK if report.ok else EXIT_NUMERICAL
            case "sweep":
                config = load_config(args.config)
                if args.axis is not None and args.values is not None:
                    axis, values = args.axis, _parse_values(args.values)
                elif config.sweep is not None and args.axis is None and args.values is None:
                    axis, values = config.sweep.axis, list(config.sweep.values)
                else:
                    raise ConfigError(["sweep: give both --axis and --values, or a sweep section in the config"])
                _, rows = sweep(config, axis, values, args.out_dir, _threads(args.threads))
                failed = any(row["status"] != "ok" for row in rows)
                return EXIT_NUMERICAL if failed else EXIT_OK
    except ConfigError as e:
        for problem in e.problems:
            logger.error("config: %s", problem)
        return EXIT_CONFIG
    except FluofloqError as e:
        logger.error("%s: %s", type(e).__name__, e)
        return EXIT_NUMERICAL
    return EXIT_OK
