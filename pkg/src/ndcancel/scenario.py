"""INI scenarios: parsing, canonical formatting, execution and file output.

A scenario file has the sections ``[source]``, ``[arm.1]`` .. ``[arm.N]``,
``[mode]``, and optionally ``[grid]`` and ``[postselect]``::

    [source]
    omega0 = 1.0        ; default 1
    n_photons = 3       ; default 3
    sigma_f = 0.1       ; required

    [arm.1]
    dispersion = 100    ; required, B_i = beta_i x_i
    group_delay = 0     ; default 0, A_i = alpha_i x_i

    [mode]
    mode = quantum3     ; quantum3 | quantum3-full | classical3 | postselect
                        ; | nphoton | exact-numeric | compare
    normalization = peak
    oracle_check = false
    bounds_mode = paper ; exact-numeric only: paper | physical | wide

    [grid]              ; every key optional
    t_min = -60
    t_max = 60
    t_count = 201
    tau_min = -60
    tau_max = 60
    tau_count = 201

    [postselect]
    omega3_tilde = 0.3

Grid defaults span six analytic standard deviations either side of the
distribution centre with 201 points per axis.
"""

from __future__ import annotations

import configparser
import dataclasses
import io
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import analysis, classical, quantum
from .analysis import FitError, Grid2D, grid_from_axes
from .params import (
    NORMALIZATIONS,
    ArmConfig,
    PostSelection,
    SourceConfig,
)

MODES = (
    "quantum3",
    "quantum3-full",
    "classical3",
    "postselect",
    "nphoton",
    "exact-numeric",
    "compare",
)
DEFAULT_POINTS = 201
DEFAULT_HALF_WIDTH = 6.0  # analytic standard deviations
ORACLE_FLOOR = 1e-10  # relative-error denominators are floored at this fraction of the peak

_KEYS = {
    "source": {"omega0", "n_photons", "sigma_f"},
    "arm": {"dispersion", "group_delay"},
    "grid": {"t_min", "t_max", "t_count", "tau_min", "tau_max", "tau_count"},
    "mode": {"mode", "normalization", "oracle_check", "bounds_mode"},
    "postselect": {"omega3_tilde"},
}


class ScenarioError(ValueError):
    """Invalid scenario text; the message carries the section, key and line."""


@dataclass(frozen=True)
class GridSpec:
    t_min: float
    t_max: float
    t_count: int
    tau_min: float
    tau_max: float
    tau_count: int

    @property
    def t_axis(self) -> np.ndarray:
        return _axis(self.t_min, self.t_max, self.t_count)

    @property
    def tau_axis(self) -> np.ndarray:
        return _axis(self.tau_min, self.tau_max, self.tau_count)


def _axis(lo, hi, count):
    if count == 1:
        return np.array([float(lo)])
    return np.linspace(lo, hi, count)


@dataclass(frozen=True)
class Scenario:
    source: SourceConfig
    arms: tuple
    mode: str
    grid: GridSpec
    post_selection: Optional[PostSelection] = None
    normalization: str = "peak"
    oracle_check: bool = False
    bounds_mode: str = "paper"

    def replace(self, **changes) -> "Scenario":
        return dataclasses.replace(self, **changes)


# -- parsing ----------------------------------------------------------------


def _line_index(text):
    """Map (section, key) -> line number, and section -> header line number."""
    index, section = {}, None
    header = re.compile(r"^\s*\[([^\]]+)\]")
    option = re.compile(r"^\s*([^=:;#\s][^=:]*?)\s*[=:]")
    for lineno, line in enumerate(text.splitlines(), start=1):
        m = header.match(line)
        if m:
            section = m.group(1).strip()
            index[section] = lineno
            continue
        m = option.match(line)
        if m and section is not None:
            index[(section, m.group(1).strip().lower())] = lineno
    return index


class _Reader:
    def __init__(self, text):
        self.lines = _line_index(text)
        self.cp = configparser.ConfigParser(
            interpolation=None, inline_comment_prefixes=(";", "#"), default_section="\0"
        )
        try:
            self.cp.read_string(text)
        except configparser.Error as exc:
            raise ScenarioError(f"malformed scenario: {exc}") from None

    def where(self, section, key=None):
        line = self.lines.get((section, key) if key else section)
        loc = f"[{section}]" + (f" {key}" if key else "")
        return f"{loc} (line {line})" if line else loc

    def has(self, section, key):
        return self.cp.has_section(section) and self.cp.has_option(section, key)

    def raw(self, section, key, default=None, required=False):
        if self.has(section, key):
            return self.cp.get(section, key).strip()
        if required:
            raise ScenarioError(f"missing required key {key!r} in {self.where(section)}")
        return default

    def number(self, section, key, default=None, required=False, kind=float):
        value = self.raw(section, key, None, required)
        if value is None:
            return default
        try:
            if kind is int:
                number = float(value)
                if number != int(number):
                    raise ValueError
                return int(number)
            number = float(value)
        except ValueError:
            raise ScenarioError(
                f"{self.where(section, key)}: expected {'an integer' if kind is int else 'a number'}, "
                f"got {value!r}"
            ) from None
        if not np.isfinite(number):
            raise ScenarioError(f"{self.where(section, key)}: value must be finite, got {value!r}")
        return number

    def boolean(self, section, key, default):
        value = self.raw(section, key)
        if value is None:
            return default
        lowered = value.lower()
        if lowered in ("true", "yes", "on", "1"):
            return True
        if lowered in ("false", "no", "off", "0"):
            return False
        raise ScenarioError(f"{self.where(section, key)}: expected true/false, got {value!r}")


def _kind(section):
    if re.fullmatch(r"arm\.\d+", section):
        return "arm"
    return section


def parse_scenario(config_text: str) -> Scenario:
    """Parse and validate scenario text; raises :class:`ScenarioError`."""
    r = _Reader(config_text)
    for section in r.cp.sections():
        kind = _kind(section)
        if kind not in _KEYS:
            raise ScenarioError(f"unknown section {r.where(section)}")
        for key in r.cp.options(section):
            if key not in _KEYS[kind]:
                raise ScenarioError(f"unknown key {key!r} in {r.where(section, key)}")
    if not r.cp.has_section("source"):
        raise ScenarioError("missing required section [source]")
    if not r.cp.has_section("mode"):
        raise ScenarioError("missing required section [mode]")

    try:
        source = SourceConfig(
            r.number("source", "omega0", 1.0),
            r.number("source", "n_photons", 3, kind=int),
            r.number("source", "sigma_f", required=True),
        )
    except ValueError as exc:
        if isinstance(exc, ScenarioError):
            raise
        key = next((k for k in sorted(_KEYS["source"]) if str(exc).startswith(k)), None)
        raise ScenarioError(f"{r.where('source', key)}: {exc}") from None

    arm_sections = sorted(
        (s for s in r.cp.sections() if _kind(s) == "arm"), key=lambda s: int(s.split(".")[1])
    )
    numbers = [int(s.split(".")[1]) for s in arm_sections]
    if numbers != list(range(1, len(numbers) + 1)):
        raise ScenarioError(f"arm sections must be numbered arm.1 .. arm.N, found {arm_sections}")
    if len(arm_sections) != source.n_photons:
        raise ScenarioError(
            f"n_photons = {source.n_photons} but {len(arm_sections)} arm sections are given "
            f"({r.where('source', 'n_photons')})"
        )
    arms = tuple(
        ArmConfig(r.number(s, "dispersion", required=True), r.number(s, "group_delay", 0.0))
        for s in arm_sections
    )

    mode = r.raw("mode", "mode", required=True)
    if mode not in MODES:
        raise ScenarioError(f"{r.where('mode', 'mode')}: unknown mode {mode!r}; expected one of {MODES}")
    normalization = r.raw("mode", "normalization", "peak")
    if normalization not in NORMALIZATIONS:
        raise ScenarioError(
            f"{r.where('mode', 'normalization')}: expected one of {NORMALIZATIONS}, got {normalization!r}"
        )
    bounds_mode = r.raw("mode", "bounds_mode", "paper")
    if bounds_mode not in quantum.BOUNDS_MODES:
        raise ScenarioError(
            f"{r.where('mode', 'bounds_mode')}: expected one of {quantum.BOUNDS_MODES}, got {bounds_mode!r}"
        )
    oracle_check = r.boolean("mode", "oracle_check", False)

    if mode == "nphoton":
        pass
    elif source.n_photons != 3:
        raise ScenarioError(f"mode {mode!r} needs n_photons = 3 ({r.where('source', 'n_photons')})")

    post_selection = None
    if r.cp.has_section("postselect"):
        post_selection = PostSelection(r.number("postselect", "omega3_tilde", required=True))
        try:
            post_selection.validate(source)
        except ValueError as exc:
            raise ScenarioError(f"{r.where('postselect', 'omega3_tilde')}: {exc}") from None
    if mode == "postselect" and post_selection is None:
        raise ScenarioError("mode 'postselect' needs a [postselect] section with omega3_tilde")

    partial = Scenario(source, arms, mode, GridSpec(0, 1, 2, 0, 1, 2), post_selection,
                       normalization, oracle_check, bounds_mode)
    grid = _resolve_grid(partial, r)
    return partial.replace(grid=grid)


def _centre_and_width(scenario):
    """Default grid centre and standard deviation per axis (None = degenerate axis)."""
    src, arms, mode = scenario.source, scenario.arms, scenario.mode
    if mode in ("quantum3", "exact-numeric"):
        return (0.0, 0.0), tuple(np.sqrt(analysis.quantum_distribution(src, arms).variances))
    if mode == "quantum3-full":
        dist = analysis.covariance_from_coefficients(quantum.quantum_coefficients_full(src, arms))
        return tuple(dist.mean), tuple(np.sqrt(dist.variances))
    if mode == "classical3":
        return (0.0, 0.0), tuple(np.sqrt(analysis.classical_distribution(src, arms).variances))
    if mode == "compare":
        report = analysis.compare(src, arms)
        var = np.maximum(report.quantum.variances, report.classical.variances)
        return (0.0, 0.0), tuple(np.sqrt(var))
    if mode == "postselect":
        ps = scenario.post_selection
        mean = quantum.postselected_mean(src, arms[0], arms[1], ps)
        return (mean, 0.0), (np.sqrt(quantum.postselected_variance(src, arms[0], arms[1])), None)
    mean, cov = quantum.nphoton_moments(src, arms)
    sd = np.sqrt(np.diag(cov))
    if src.n_photons == 2:
        return (mean[0], 0.0), (sd[0], None)
    return (mean[0], mean[1]), (sd[0], sd[1])


def _resolve_grid(scenario, r):
    centre, sd = _centre_and_width(scenario)
    values = {}
    for axis, c, s in (("t", centre[0], sd[0]), ("tau", centre[1], sd[1])):
        if s is None:
            for key in (f"{axis}_min", f"{axis}_max", f"{axis}_count"):
                if r.has("grid", key):
                    raise ScenarioError(
                        f"{r.where('grid', key)}: mode {scenario.mode!r} has no {axis} axis"
                    )
            values[axis] = (0.0, 0.0, 1)
            continue
        lo = r.number("grid", f"{axis}_min", c - DEFAULT_HALF_WIDTH * s)
        hi = r.number("grid", f"{axis}_max", c + DEFAULT_HALF_WIDTH * s)
        count = r.number("grid", f"{axis}_count", DEFAULT_POINTS, kind=int)
        if count < 2:
            raise ScenarioError(f"{r.where('grid', f'{axis}_count')}: need at least 2 points")
        if not lo < hi:
            raise ScenarioError(f"{r.where('grid')}: {axis}_min must be below {axis}_max")
        values[axis] = (float(lo), float(hi), int(count))
    return GridSpec(*values["t"], *values["tau"])


# -- canonical form ---------------------------------------------------------


def format_number(x) -> str:
    """Shortest round-trip decimal; integral values lose their ``.0``."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if x == 0:
        return "0"
    text = repr(x)
    if text.endswith(".0"):
        text = text[:-2]
    return text


def format_scenario(scenario: Scenario) -> str:
    """Canonical scenario text; ``parse_scenario(format_scenario(s)) == s``."""
    f = format_number
    s = scenario
    out = [
        "[source]",
        f"omega0 = {f(s.source.omega0)}",
        f"n_photons = {s.source.n_photons}",
        f"sigma_f = {f(s.source.sigma_f)}",
    ]
    for i, arm in enumerate(s.arms, start=1):
        out += ["", f"[arm.{i}]", f"dispersion = {f(arm.dispersion)}",
                f"group_delay = {f(arm.group_delay)}"]
    out += ["", "[mode]", f"mode = {s.mode}", f"normalization = {s.normalization}",
            f"oracle_check = {f(s.oracle_check)}", f"bounds_mode = {s.bounds_mode}"]
    if s.post_selection is not None:
        out += ["", "[postselect]", f"omega3_tilde = {f(s.post_selection.omega3_tilde)}"]
    g = s.grid
    out += ["", "[grid]"]
    for axis in ("t", "tau"):
        lo, hi, count = (getattr(g, f"{axis}_{k}") for k in ("min", "max", "count"))
        if count == 1 and _centre_and_width(s)[1][0 if axis == "t" else 1] is None:
            continue
        out += [f"{axis}_min = {f(lo)}", f"{axis}_max = {f(hi)}", f"{axis}_count = {count}"]
    return "\n".join(out) + "\n"


# -- output -----------------------------------------------------------------


def _comment_block(lines):
    return "".join(f"# {line}\n" if line else "#\n" for line in lines)


def emit_grid_csv(grid: Grid2D, destination, comments=()) -> None:
    """Write ``t,tau,P`` rows in t-major order with LF endings.

    ``comments`` are written first as ``# `` lines; without them the output
    starts directly with the header.
    """
    buf = io.StringIO()
    buf.write(_comment_block(comments))
    buf.write("t,tau,P\n")
    f = format_number
    for i, t in enumerate(grid.t_axis):
        ft = f(t)
        for j, tau in enumerate(grid.tau_axis):
            buf.write(f"{ft},{f(tau)},{f(grid.values[i, j])}\n")
    _write(destination, buf.getvalue())


def emit_series_csv(header, columns, destination, comments=()) -> None:
    buf = io.StringIO()
    buf.write(_comment_block(comments))
    buf.write(",".join(header) + "\n")
    for row in zip(*columns):
        buf.write(",".join(format_number(v) for v in row) + "\n")
    _write(destination, buf.getvalue())


def _write(destination, text):
    if hasattr(destination, "write"):
        destination.write(text)
        return
    with open(destination, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def emit_report(items, destination, comments=()) -> None:
    text = _comment_block(comments) + "".join(f"{k} = {format_number(v) if not isinstance(v, str) else v}\n"
                                              for k, v in items)
    _write(destination, text)


# -- execution --------------------------------------------------------------


def _density_callable(scenario, kind):
    """Density of the given kind as f(t, tau), before grid normalization.

    For ``peak`` and ``integral`` output the unit-peak shape is sampled, so
    that equal shapes give bit-equal grids; ``none`` keeps the raw values.
    """
    src, arms = scenario.source, scenario.arms
    base = "none" if scenario.normalization == "none" else "peak"
    if kind == "quantum":
        return lambda t, tau: quantum.quantum_density(src, arms, t, tau, base)
    if kind == "classical":
        return lambda t, tau: classical.classical_density(src, arms, t, tau, base)
    if kind == "quantum-full":
        return lambda t, tau: quantum.quantum_density_full(src, arms, 0.0 * t, t, t + tau, base)
    raise ValueError(kind)


def _oracle_stats(values, oracle):
    values = np.asarray(values, dtype=float)
    oracle = np.asarray(oracle, dtype=float)
    peak = float(np.max(np.abs(oracle)))
    denom = np.maximum(np.abs(oracle), ORACLE_FLOOR * peak)
    rel = np.abs(values - oracle) / denom
    return rel, [
        ("oracle_max_rel_err", float(rel.max())),
        ("oracle_mean_rel_err", float(rel.mean())),
        ("oracle_max_abs_err_over_peak", float(np.max(np.abs(values - oracle)) / peak)),
        ("oracle_points", int(rel.size)),
    ]


def _emit_oracle(grid, oracle_values, path, comments):
    rel, stats = _oracle_stats(grid.values, oracle_values)
    T, TAU = np.meshgrid(grid.t_axis, grid.tau_axis, indexing="ij")
    emit_series_csv(
        ("t", "tau", "P", "P_oracle", "rel_err"),
        (T.ravel(), TAU.ravel(), grid.values.ravel(), np.asarray(oracle_values).ravel(), rel.ravel()),
        path,
        comments,
    )
    return stats


def _normalize(values, axes, normalization):
    if len(axes[1]) == 1:
        # single tau sample (two photons): normalize along t alone
        values = _normalize_1d(np.asarray(values).reshape(-1), axes[0], normalization)
        return Grid2D(axes[0], axes[1], values.reshape(-1, 1), normalization)
    return grid_from_axes(lambda t, tau: values, axes[0], axes[1], normalization)


def _dist_items(prefix, dist):
    return [
        (f"mean_t_{prefix}", dist.mean[0]),
        (f"mean_tau_{prefix}", dist.mean[1]),
        (f"var_t_{prefix}", dist.covariance[0, 0]),
        (f"var_tau_{prefix}", dist.covariance[1, 1]),
        (f"cov_t_tau_{prefix}", dist.covariance[0, 1]),
    ]


def run_scenario(scenario: Scenario, out_dir, log: Callable[[str], None] = lambda msg: None) -> dict:
    """Evaluate a scenario and write its grid, report and oracle files.

    Returns a mapping from artifact name to path.  Output bytes depend only on
    the scenario.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    s = scenario
    header = ["scenario (canonical form)", *format_scenario(s).rstrip("\n").split("\n")]
    t_axis, tau_axis = s.grid.t_axis, s.grid.tau_axis
    axes = (t_axis, tau_axis)
    norm = s.normalization
    written = {}
    report = [("mode", s.mode), ("normalization", norm),
              ("narrowband", s.source.narrowband)]

    def grid_file(name, grid):
        path = out_dir / f"{name}.csv"
        emit_grid_csv(grid, path, header)
        written[name] = path

    def oracle_file(grid, oracle_values):
        path = out_dir / "oracle_diff.csv"
        stats = _emit_oracle(grid, oracle_values, path, header)
        written["oracle_diff"] = path
        return stats

    T, TAU = np.meshgrid(t_axis, tau_axis, indexing="ij")

    if s.mode in ("quantum3", "classical3", "quantum3-full", "compare"):
        kinds = {"quantum3": ["quantum"], "classical3": ["classical"],
                 "quantum3-full": ["quantum-full"], "compare": ["quantum", "classical"]}[s.mode]
        oracle_stats = []
        for kind in kinds:
            log(f"evaluating {kind} grid")
            grid = grid_from_axes(_density_callable(s, kind), t_axis, tau_axis, norm)
            grid_file(kind.replace("-", "_"), grid)
            if s.oracle_check:
                log(f"running {kind} oracle")
                if kind == "quantum":
                    raw = quantum.exact_density_grid(s.source, s.arms, t_axis, tau_axis, "wide")
                elif kind == "classical":
                    raw = classical.classical_density_numeric(s.source, s.arms, T, TAU)
                else:
                    A = [a.group_delay for a in s.arms]
                    raw = quantum.quantum_density(
                        s.source, s.arms, T - (A[1] - A[0]), TAU - (A[2] - A[1]), "none"
                    )
                oracle_stats.append(_oracle_stats(grid.values, _normalize(raw, axes, norm).values))
                if len(kinds) == 1:
                    oracle_file(grid, _normalize(raw, axes, norm).values)
        if s.mode == "quantum3-full":
            dist = analysis.covariance_from_coefficients(
                quantum.quantum_coefficients_full(s.source, s.arms))
            report += _dist_items("quantum", dist)
        if s.mode in ("quantum3", "compare"):
            report += _dist_items("quantum", analysis.quantum_distribution(s.source, s.arms))
        if s.mode in ("classical3", "compare"):
            report += _dist_items("classical", analysis.classical_distribution(s.source, s.arms))
        if s.mode == "compare":
            cmp = analysis.compare(s.source, s.arms)
            report += [("ratio_t", cmp.variance_ratios[0]), ("ratio_tau", cmp.variance_ratios[1]),
                       ("cancellation_flag", cmp.cancellation_flag)]
        if oracle_stats:
            merged = oracle_stats[0][1]
            if len(oracle_stats) > 1:
                # worst case over both densities
                merged = [(k, max(a[1][i][1] for a in oracle_stats) if k != "oracle_mean_rel_err"
                           else float(np.mean([a[1][i][1] for a in oracle_stats])))
                          for i, (k, _) in enumerate(merged)]
                merged[-1] = ("oracle_points", sum(a[1][-1][1] for a in oracle_stats))
            report += merged

    elif s.mode == "exact-numeric":
        log(f"finite-range quadrature ({s.bounds_mode} bounds)")
        raw = quantum.exact_density_grid(s.source, s.arms, t_axis, tau_axis, s.bounds_mode)
        grid = _normalize(raw, axes, norm)
        grid_file("exact_numeric", grid)
        report.append(("bounds_mode", s.bounds_mode))
        report += _dist_items("analytic", analysis.quantum_distribution(s.source, s.arms))
        report += _dist_items("classical", analysis.classical_distribution(s.source, s.arms))
        unit = _normalize(raw, axes, "integral")
        try:
            report += _dist_items("numeric", analysis.fit_gaussian(unit))
        except FitError as exc:
            report.append(("numeric_fit_error", str(exc)))
        # moments of the mass inside the grid, reported even when the fit is refused
        mean, cov = analysis.grid_moments(unit)
        analytic_var = analysis.quantum_distribution(s.source, s.arms).variances
        report += [("var_t_numeric_in_grid", cov[0, 0]), ("var_tau_numeric_in_grid", cov[1, 1]),
                   ("width_ratio_t_numeric_over_analytic", float(np.sqrt(cov[0, 0] / analytic_var[0]))),
                   ("width_ratio_tau_numeric_over_analytic", float(np.sqrt(cov[1, 1] / analytic_var[1])))]
        if s.oracle_check:
            analytic = _normalize(quantum.quantum_density(s.source, s.arms, T, TAU, "none"), axes, norm)
            report += oracle_file(grid, analytic.values)

    elif s.mode == "postselect":
        a1, a2 = s.arms[0], s.arms[1]
        ps = s.post_selection
        values = quantum.postselected_density(s.source, a1, a2, ps, t_axis, "none")
        values = _normalize_1d(values, t_axis, norm)
        path = out_dir / "postselect.csv"
        emit_series_csv(("t", "P"), (t_axis, values), path, header)
        written["postselect"] = path
        mean = quantum.postselected_mean(s.source, a1, a2, ps)
        var = quantum.postselected_variance(s.source, a1, a2)
        report += [("postselect_mean", mean), ("postselect_variance", var),
                   ("postselect_variance_undispersed", 1.0 / s.source.sigma_f ** 2)]
        if s.oracle_check:
            log("running conditioned quadrature oracle")
            oracle = quantum.postselected_density_numeric(s.source, a1, a2, ps, t_axis)
            oracle = _normalize_1d(oracle, t_axis, norm)
            rel, stats = _oracle_stats(values, oracle)
            emit_series_csv(("t", "P", "P_oracle", "rel_err"), (t_axis, values, oracle, rel),
                            out_dir / "oracle_diff.csv", header)
            written["oracle_diff"] = out_dir / "oracle_diff.csv"
            report += stats

    elif s.mode == "nphoton":
        n = s.source.n_photons
        mean, cov = quantum.nphoton_moments(s.source, s.arms)
        delays = np.broadcast_to(mean, T.shape + (n - 1,)).copy()
        delays[..., 0] = T
        if n >= 3:
            delays[..., 1] = TAU
        log(f"evaluating {n}-photon grid")
        raw = quantum.nphoton_density(s.source, s.arms, delays, "none")
        grid = _normalize(raw, axes, norm)
        grid_file("nphoton", grid)
        for k in range(n - 1):
            report += [(f"mean_delay_{k + 1}", mean[k]), (f"var_delay_{k + 1}", cov[k, k])]
        if s.oracle_check:
            log("running N-photon oracle")
            report += _nphoton_oracle(s, grid, delays, raw, oracle_file)

    path = out_dir / "report.txt"
    emit_report(report, path, header)
    written["report"] = path
    return written


def _normalize_1d(values, axis, normalization):
    values = np.asarray(values, dtype=float)
    if normalization == "peak":
        return values / values.max()
    if normalization == "integral" and axis.size > 1:
        return values / np.trapezoid(values, axis)
    return values


def _nphoton_oracle(s, grid, delays, raw, oracle_file):
    n = s.source.n_photons
    if n == 3:
        A = [a.group_delay for a in s.arms]
        oracle = quantum.quantum_density(
            s.source, s.arms, delays[..., 0] - (A[1] - A[0]), delays[..., 1] - (A[2] - A[1]), "none"
        )
        return oracle_file(grid, _normalize(oracle, (grid.t_axis, grid.tau_axis), s.normalization).values)
    # one-variable-at-a-time elimination, independent of the factorized closed form
    from .gaussmath import iterated_gaussian_integral

    flat = delays.reshape(-1, n - 1)
    oracle = np.empty(flat.shape[0])
    for k, d in enumerate(flat):
        form = quantum.build_nphoton_form(s.source, s.arms, np.concatenate([[0.0], np.cumsum(d)]))
        oracle[k] = abs(iterated_gaussian_integral(form.M, form.b, form.c)) ** 2
    oracle = _normalize(oracle.reshape(delays.shape[:-1]), (grid.t_axis, grid.tau_axis), s.normalization)
    return oracle_file(grid, oracle.values)


# -- pre-baked figure parameter sets ----------------------------------------

FIGURE_SETS = {
    "3": (0.1, {"ab": (0.0, 0.0, 0.0), "cd": (100.0, -50.0, -50.0), "ef": (200.0, -100.0, -100.0)}),
    "4": (0.5, {"ab": (0.0, 0.0, 0.0), "cd": (12.5, -25.0, -37.5), "ef": (50.0, -100.0, -150.0)}),
}


def figure_scenarios(figure_set: str, normalization="peak", oracle_check=False) -> dict:
    """Scenario texts keyed by output sub-directory name."""
    texts = {}
    if figure_set in FIGURE_SETS:
        sigma, panels = FIGURE_SETS[figure_set]
        for panel, B in panels.items():
            texts[f"set{figure_set}-{panel}"] = _figure_text(sigma, B, "compare", normalization, oracle_check)
    elif figure_set == "5":
        texts["set5"] = _figure_text(0.5, FIGURE_SETS["4"][1]["cd"], "exact-numeric",
                                      normalization, True)
    else:
        raise ScenarioError(f"unknown figure set {figure_set!r}; expected 3, 4 or 5")
    return texts


def _figure_text(sigma, B, mode, normalization, oracle_check):
    lines = ["[source]", "omega0 = 1", "n_photons = 3", f"sigma_f = {format_number(sigma)}"]
    for i, b in enumerate(B, start=1):
        lines += [f"[arm.{i}]", f"dispersion = {format_number(b)}"]
    lines += ["[mode]", f"mode = {mode}", f"normalization = {normalization}",
              f"oracle_check = {format_number(oracle_check)}"]
    return "\n".join(lines) + "\n"
