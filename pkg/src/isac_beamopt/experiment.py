"""
Experiment harness: configuration parsing, Monte-Carlo runs and CSV output.

Config files are flat ``key = value`` documents, one pair per line, ``#``
starting a comment. Keys ending in ``_dbm`` are converted to linear mW.
"""

import csv
import dataclasses
import io
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import BeamoptError, ConfigError, InvalidInputError
from .model import GENERATOR_ID, SystemConfig, build_scene, generate_channels
from .sgpi import solve

logger = logging.getLogger(__name__)

MODES = ("single", "sweep-delta", "sweep-k", "trace")
DEFAULT_DELTA_GRID = "1e-7:1e1:20log"
DEFAULT_K_GRID = "2,4,6,8,10,12"

_INT_KEYS = ("n_tx", "n_rx", "n_users", "n_slots", "inner_iters", "max_outer", "seed",
             "realizations")
_FLOAT_KEYS = ("p_tx", "sigma_s_sq", "delta", "theta", "outer_tol")
_DBM_KEYS = {"p_tx_dbm": ("p_tx",), "sigma_s_dbm": ("sigma_s_sq",),
             "sigma_c_dbm": ("sigma_c_sq",), "sigma_dbm": ("sigma_s_sq", "sigma_c_sq")}
KNOWN_KEYS = frozenset(_INT_KEYS + _FLOAT_KEYS + tuple(_DBM_KEYS) + (
    "sigma_c_sq", "alpha", "init", "mode", "delta_grid", "k_grid", "output"))


@dataclass
class ExperimentSpec:
    config: SystemConfig = field(default_factory=SystemConfig)
    mode: str = "single"
    delta_grid: list = field(default_factory=lambda: parse_grid(DEFAULT_DELTA_GRID))
    k_grid: list = field(default_factory=lambda: parse_grid(DEFAULT_K_GRID, integer=True))
    realizations: int = 100
    output: str = "-"

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError("mode", f"must be one of {', '.join(MODES)}")
        if not self.delta_grid:
            raise ConfigError("delta_grid", "grid is empty")
        if not self.k_grid:
            raise ConfigError("k_grid", "grid is empty")
        if self.realizations < 1:
            raise ConfigError("realizations", "must be >= 1")

    def grid(self):
        """(delta, K) pairs visited by the current mode."""
        cfg = self.config
        if self.mode == "sweep-delta":
            return [(float(d), cfg.n_users) for d in self.delta_grid]
        if self.mode == "sweep-k":
            return [(cfg.delta, int(k)) for k in self.k_grid]
        return [(cfg.delta, cfg.n_users)]

    def n_realizations(self):
        return self.realizations if self.mode.startswith("sweep") else 1


@dataclass
class ResultRow:
    mode: str
    seed: int
    realization: int
    delta: float
    k: int
    sum_rate_nats: float
    sum_rate_bits: float
    crlb_theta: float
    trace_f_inv: float
    objective: float
    outer_iters: int
    total_inner_iters: int
    converged: bool
    runtime_ms: float


ROW_FIELDS = tuple(f.name for f in dataclasses.fields(ResultRow))


def dbm_to_mw(dbm):
    return 10.0 ** (dbm / 10.0)


def parse_grid(text, integer=False):
    """Parse ``start:stop:Nlog``, ``start:stop:Nlin``, ``start:stop:step`` or a comma list.

    The three-field integer form is an inclusive range with the given step.
    """
    text = str(text).strip()
    parts = text.split(":")
    if len(parts) == 3:
        start, stop, third = (p.strip() for p in parts)
        if third.endswith("log") or third.endswith("lin"):
            n = int(third[:-3])
            if n < 1:
                raise ValueError("grid needs at least one point")
            if third.endswith("log"):
                values = np.logspace(math.log10(float(start)), math.log10(float(stop)), n)
            else:
                values = np.linspace(float(start), float(stop), n)
        else:
            step = float(third)
            if step <= 0:
                raise ValueError("grid step must be positive")
            values = np.arange(float(start), float(stop) + step / 2, step)
    elif len(parts) == 1:
        values = [float(v) for v in text.split(",") if v.strip()]
    else:
        raise ValueError(f"cannot parse grid {text!r}")
    if integer:
        out = [int(round(v)) for v in values]
        if any(abs(o - v) > 1e-9 for o, v in zip(out, values)):
            raise ValueError("grid values must be integers")
        return out
    return [float(v) for v in values]


def read_config_file(path):
    """Return ordered (key, value) pairs from a flat key-value file."""
    pairs = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}", f"expected 'key = value', got {raw.strip()!r}")
            key, value = line.split("=", 1)
            pairs.append((key.strip(), value.strip()))
    return pairs


def _convert(key, value):
    try:
        if key in _INT_KEYS:
            number = float(value)
            if not number.is_integer():
                raise ValueError("not an integer")
            return int(number)
        if key in _FLOAT_KEYS or key in _DBM_KEYS:
            number = float(value)
            if not math.isfinite(number):
                raise ValueError("not finite")
            return number
        if key == "sigma_c_sq":
            return tuple(float(v) for v in value.split(","))
        if key == "alpha":
            return complex(value.replace(" ", ""))
        if key == "delta_grid":
            return parse_grid(value)
        if key == "k_grid":
            return parse_grid(value, integer=True)
    except ValueError as exc:
        raise ConfigError(key, f"cannot parse {value!r} ({exc})") from None
    return value


def parse_config(path=None, overrides=(), mode=None, seed=None):
    """Build an :class:`ExperimentSpec` from a config file plus ``key=value`` overrides.

    Overrides win over the file; ``mode`` and ``seed`` arguments win over both.
    Unspecified keys keep the reference-experiment defaults.
    """
    pairs = list(read_config_file(path)) if path else []
    for item in overrides:
        if "=" not in item:
            raise ConfigError(item, "override must look like key=value")
        key, value = item.split("=", 1)
        pairs.append((key.strip(), value.strip()))

    settings = {}
    for key, raw in pairs:
        if key not in KNOWN_KEYS:
            raise ConfigError(key, "unknown key")
        value = _convert(key, raw)
        if key in _DBM_KEYS:
            for target in _DBM_KEYS[key]:
                settings[target] = dbm_to_mw(value)
        else:
            settings[key] = value
    if mode is not None:
        settings["mode"] = mode
    if seed is not None:
        settings["seed"] = seed

    spec_keys = {"mode", "delta_grid", "k_grid", "realizations", "output"}
    spec_kwargs = {k: settings.pop(k) for k in list(settings) if k in spec_keys}

    for key in ("n_tx", "n_rx", "n_users", "n_slots", "inner_iters", "max_outer"):
        if key in settings and settings[key] < 1:
            raise ConfigError(key, "must be a positive integer")
    for key in ("p_tx", "sigma_s_sq", "outer_tol"):
        if key in settings and settings[key] <= 0:
            raise ConfigError(key, "must be > 0")
    if "sigma_c_sq" in settings:
        sigma_c = settings["sigma_c_sq"]
        if np.isscalar(sigma_c):
            sigma_c = (sigma_c,)
        if any(s <= 0 for s in sigma_c):
            raise ConfigError("sigma_c_sq", "must be > 0")
        if len(sigma_c) == 1:
            settings["sigma_c_sq"] = sigma_c[0]
    if settings.get("delta", 0.0) < 0:
        raise ConfigError("delta", "must be >= 0")
    if abs(settings.get("theta", 0.0)) > math.pi / 2:
        raise ConfigError("theta", "must lie in [-pi/2, pi/2]")
    if not 0 <= settings.get("seed", 0) < 2**64:
        raise ConfigError("seed", "must be a 64-bit unsigned integer")
    if spec_kwargs.get("realizations", 1) < 1:
        raise ConfigError("realizations", "must be >= 1")

    try:
        config = SystemConfig(**settings)
    except InvalidInputError as exc:
        raise ConfigError("config", str(exc)) from None
    return ExperimentSpec(config=config, **spec_kwargs)


def _config_for(base, delta, k, seed):
    sigma_c = base.sigma_c_sq
    if len(sigma_c) != k:
        if len(set(sigma_c)) > 1:
            raise ConfigError("sigma_c_sq", "per-user noise list does not match the K grid")
        sigma_c = (sigma_c[0],) * k
    return dataclasses.replace(base, delta=delta, n_users=k, sigma_c_sq=sigma_c, seed=seed)


def run_single(mode, realization, cfg):
    """Solve one channel realization and summarise it as a :class:`ResultRow`."""
    h = generate_channels(cfg)
    scene = build_scene(cfg)
    start = time.perf_counter()
    try:
        _, trace = solve(cfg, h, scene)
    except BeamoptError as exc:
        logger.warning("seed %d, delta %g, K %d failed: %s", cfg.seed, cfg.delta, cfg.n_users, exc)
        nan = float("nan")
        return ResultRow(mode, cfg.seed, realization, cfg.delta, cfg.n_users, nan, nan, nan,
                         nan, nan, 0, 0, False, (time.perf_counter() - start) * 1e3), None
    elapsed = (time.perf_counter() - start) * 1e3
    sum_rate = trace.sum_rates[-1]
    row = ResultRow(mode=mode, seed=cfg.seed, realization=realization, delta=cfg.delta,
                    k=cfg.n_users, sum_rate_nats=sum_rate, sum_rate_bits=sum_rate / math.log(2),
                    crlb_theta=trace.crlb_thetas[-1], trace_f_inv=trace.trace_crlbs[-1],
                    objective=trace.outer_objectives[-1], outer_iters=trace.outer_count,
                    total_inner_iters=sum(trace.inner_counts), converged=trace.converged,
                    runtime_ms=elapsed)
    return row, trace


def _task(args):
    return run_single(*args)


def run_experiment(spec, jobs=1, keep_traces=False):
    """Run every (grid point, realization) pair of ``spec``.

    Realization r uses seed ``base seed + r`` at every grid point, so all grid
    points share the same channel draws. Rows come back ordered by
    (grid point, realization) whatever ``jobs`` is.
    """
    base = spec.config
    tasks = []
    for delta, k in spec.grid():
        for r in range(spec.n_realizations()):
            tasks.append((spec.mode, r, _config_for(base, delta, k, (base.seed + r) % 2**64)))

    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_task, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        results = [_task(t) for t in tasks]

    rows = [row for row, _ in results]
    if keep_traces:
        return rows, [trace for _, trace in results]
    return rows


def _fmt(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def describe_config(spec):
    cfg = spec.config
    items = []
    for f in dataclasses.fields(cfg):
        value = getattr(cfg, f.name)
        text = ",".join(_fmt(v) for v in value) if isinstance(value, tuple) else _fmt(value)
        items.append(f"{f.name}={text}")
    items.append(f"mode={spec.mode}")
    if spec.mode == "sweep-delta":
        items.append("delta_grid=" + ",".join(_fmt(d) for d in spec.delta_grid))
    if spec.mode == "sweep-k":
        items.append("k_grid=" + ",".join(str(k) for k in spec.k_grid))
    items.append(f"realizations={spec.n_realizations()}")
    items.append("seeds=base+realization (shared across grid points)")
    return "; ".join(items)


def format_csv(rows, spec=None):
    """Render rows as CSV text: one ``#`` metadata line, the header, the rows."""
    buf = io.StringIO()
    meta = f"# isac-beamopt {__version__}; generator={GENERATOR_ID}"
    if spec is not None:
        meta += f"; {describe_config(spec)}"
    buf.write(meta + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(ROW_FIELDS)
    for row in rows:
        writer.writerow([_fmt(getattr(row, name)) for name in ROW_FIELDS])
    return buf.getvalue()


def write_csv(rows, path, spec=None):
    text = format_csv(rows, spec)
    if str(path) == "-":
        import sys
        sys.stdout.write(text)
        return
    Path(path).write_text(text)


def read_csv(path):
    """Parse a result CSV back into :class:`ResultRow` objects."""
    with open(path) as fh:
        lines = [line for line in fh if not line.startswith("#")]
    rows = []
    for rec in csv.DictReader(lines):
        values = {}
        for f in dataclasses.fields(ResultRow):
            raw = rec[f.name]
            if f.type in (int, "int"):
                values[f.name] = int(raw)
            elif f.type in (float, "float"):
                values[f.name] = float(raw)
            elif f.type in (bool, "bool"):
                values[f.name] = raw == "true"
            else:
                values[f.name] = raw
        rows.append(ResultRow(**values))
    return rows


def inner_trace_path(path):
    path = Path(path)
    return path.with_name(f"{path.stem}_inner{path.suffix or '.csv'}")


def emit_trace(trace, path):
    """Write the outer curve to ``path`` and the inner curves next to it.

    Outer file: ``iteration,objective`` with iteration 0 the starting point.
    Inner file (``<stem>_inner.csv``): ``outer,inner,subobjective`` long form.
    Returns both paths.
    """
    path = Path(path)
    outer = ["iteration,objective"]
    outer += [f"{i},{_fmt(v)}" for i, v in enumerate(trace.outer_objectives)]
    inner = ["outer,inner,subobjective"]
    for t, values in enumerate(trace.inner_objectives, 1):
        inner += [f"{t},{n},{_fmt(v)}" for n, v in enumerate(values)]
    path.write_text("\n".join(outer) + "\n")
    inner_path = inner_trace_path(path)
    inner_path.write_text("\n".join(inner) + "\n")
    return path, inner_path


def summarize_runtime(rows):
    times = [r.runtime_ms for r in rows if math.isfinite(r.runtime_ms)]
    if not times:
        return "no timed solves"
    return (f"{len(rows)} solves, median runtime {np.median(times):.3f} ms, "
            f"{sum(r.converged for r in rows)} converged")
