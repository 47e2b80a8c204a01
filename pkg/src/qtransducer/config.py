"""INI-style simulation configuration.

Sections and keys (numbers accept arithmetic with `pi`, e.g. ``-2*pi*30``):

    [run]                     pipeline = transduce | retrieve | oracle-compare
                              scenario = leakage | crib | transduce (oracle-compare)
    [storage], [retrieval]    gamma, length, d or mu0 (+ n0), c, c_prime or cutoff, k, k_prime
    [storage_distribution],
    [retrieval_distribution]  shape, width, center, truncation, table, spatial_table
    [excitation]              width, t_c, center, or table (three columns)
    [input]                   t_center, duration, carrier
    [grid]                    half_width, points
    [protocol]                map, T_S, delta_t, kernel, include_exit_phase, g0_shape, g0_width
    [sweep]                   parameter, values or start/stop/points/spacing
    [oracle]                  t_start, t_end, n_z, courant, n_delta
    [output]                  spectrum, metrics, sweep

Relative table paths are resolved against the config file's directory.
"""
import ast
import configparser
import hashlib
import operator
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .distributions import (load_profile, make_profile, separable, spatial_from_table,
                            _load_columns)
from .errors import ConfigError, InvalidArgument
from .grids import GaussianPulse, make_symmetric_grid
from .params import derive
from .transducer import gaussian_excitation, load_excitation

PIPELINES = ("transduce", "retrieve", "oracle-compare")
SCENARIOS = ("leakage", "crib", "transduce")
KERNELS = ("general", "crib_uniform", "ideal")
SWEEP_PARAMETERS = ("d", "storage.d", "retrieval.d", "T_S", "gamma")

TRANSITION_KEYS = ("gamma", "length", "d", "mu0", "n0", "c", "c_prime", "cutoff", "k",
                   "k_prime")
DISTRIBUTION_KEYS = ("shape", "width", "center", "truncation", "table", "spatial_table")
SECTIONS = {
    "run": ("pipeline", "scenario"),
    "storage": TRANSITION_KEYS,
    "retrieval": TRANSITION_KEYS,
    "storage_distribution": DISTRIBUTION_KEYS,
    "retrieval_distribution": DISTRIBUTION_KEYS,
    "excitation": ("width", "t_c", "center", "table"),
    "input": ("t_center", "duration", "carrier"),
    "grid": ("half_width", "points"),
    "protocol": ("map", "t_s", "delta_t", "kernel", "include_exit_phase", "g0_shape",
                 "g0_width"),
    "sweep": ("parameter", "values", "start", "stop", "points", "spacing"),
    "oracle": ("t_start", "t_end", "n_z", "courant", "n_delta"),
    "output": ("spectrum", "metrics", "sweep"),
}

_SECTION_RE = re.compile(r"^\s*\[([^\]]+)\]")
_KEY_RE = re.compile(r"^\s*([^=:#;\s\[][^=:]*?)\s*[=:]")

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_UNOPS = {ast.UAdd: operator.pos, ast.USub: operator.neg}
_NAMES = {"pi": np.pi, "inf": np.inf}


def _eval_number(node):
    if isinstance(node, ast.Expression):
        return _eval_number(node.body)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        return float(node.value)
    if isinstance(node, ast.Name) and node.id in _NAMES:
        return _NAMES[node.id]
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_eval_number(node.left), _eval_number(node.right))
    if isinstance(node, ast.UnaryOp) and type(node.op) in _UNOPS:
        return _UNOPS[type(node.op)](_eval_number(node.operand))
    raise ValueError("not a number")


def parse_number(text):
    """Float from a literal or a small arithmetic expression in `pi`/`inf`."""
    try:
        return float(_eval_number(ast.parse(text.strip(), mode="eval")))
    except (SyntaxError, ValueError, ZeroDivisionError, TypeError, OverflowError) as exc:
        raise ValueError(f"cannot read {text!r} as a number") from exc


def _line_index(text):
    """(section, key) -> line number, and section -> line number of its header."""
    index = {}
    section = None
    for i, line in enumerate(text.splitlines(), 1):
        m = _SECTION_RE.match(line)
        if m:
            section = m.group(1).strip().lower()
            index.setdefault((section, None), i)
            continue
        m = _KEY_RE.match(line)
        if m and section is not None:
            index.setdefault((section, m.group(1).strip().lower()), i)
    return index


@dataclass
class SimConfig:
    path: str
    text: str
    pipeline: str
    scenario: str = None
    storage: object = None
    retrieval: object = None
    storage_dist: object = None
    retrieval_dist: object = None
    excitation: object = None
    input_pulse: object = None
    half_width: float = None
    points: int = 2001
    bmap: str = "negate"
    g0: object = None
    T_S: float = 0.0
    delta_t: float = None
    kernel: str = "general"
    include_exit_phase: bool = False
    sweep_parameter: str = None
    sweep_values: np.ndarray = None
    oracle: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)

    @property
    def sha256(self):
        return hashlib.sha256(self.text.encode()).hexdigest()

    def grid(self, points=None):
        return make_symmetric_grid(self.half_width, int(points or self.points))


class _Reader:
    """Typed access to a parsed config with line-anchored errors."""

    def __init__(self, parser, index, path):
        self.parser = parser
        self.index = index
        self.path = path
        self.base = Path(path).parent

    def error(self, message, section=None, key=None):
        line = self.index.get((section, key)) or self.index.get((section, None))
        return ConfigError(message, line, self.path)

    def has(self, section, key=None):
        if not self.parser.has_section(section):
            return False
        return key is None or self.parser.has_option(section, key)

    def raw(self, section, key, default=None, required=False):
        if self.has(section, key):
            return self.parser.get(section, key).strip()
        if required:
            raise self.error(f"missing key '{key}' in [{section}]", section)
        return default

    def number(self, section, key, default=None, required=False):
        text = self.raw(section, key, required=required)
        if text is None:
            return default
        try:
            return parse_number(text)
        except ValueError as exc:
            raise self.error(f"[{section}] {key}: {exc}", section, key) from None

    def integer(self, section, key, default=None):
        v = self.number(section, key)
        if v is None:
            return default
        if v != int(v):
            raise self.error(f"[{section}] {key} must be an integer", section, key)
        return int(v)

    def choice(self, section, key, options, default=None, required=False):
        v = self.raw(section, key, default, required)
        if v is not None and v not in options:
            raise self.error(f"[{section}] {key} = {v!r}; expected one of {options}",
                             section, key)
        return v

    def boolean(self, section, key, default=False):
        v = self.raw(section, key)
        if v is None:
            return default
        try:
            return self.parser.getboolean(section, key)
        except ValueError:
            raise self.error(f"[{section}] {key} must be true or false", section, key) from None

    def file(self, section, key):
        v = self.raw(section, key)
        if v is None:
            return None
        p = Path(v)
        if not p.is_absolute():
            p = self.base / p
        if not p.is_file():
            raise self.error(f"[{section}] {key}: file not found: {p}", section, key)
        return str(p)

    def wrap(self, section, key=None):
        """Context for converting InvalidArgument into an anchored ConfigError."""
        reader = self

        class _Ctx:
            def __enter__(self):
                return self

            def __exit__(self, typ, exc, tb):
                if exc is not None and isinstance(exc, (InvalidArgument, ValueError)) \
                        and not isinstance(exc, ConfigError):
                    raise reader.error(f"[{section}] {exc}", section, key) from exc
                return False
        return _Ctx()


def _transition(r, section, length_default=None):
    if not r.has(section):
        return None
    if r.has(section, "d") and r.has(section, "mu0"):
        raise r.error(f"[{section}] both 'd' and 'mu0' given; supply exactly one",
                      section, "mu0")
    if not (r.has(section, "d") or r.has(section, "mu0")):
        raise r.error(f"[{section}] needs one of 'd' or 'mu0'", section)
    if r.has(section, "c_prime") and r.has(section, "cutoff"):
        raise r.error(f"[{section}] both 'c_prime' and 'cutoff' given; supply at most one",
                      section, "cutoff")
    kw = {k: r.number(section, k) for k in TRANSITION_KEYS if r.has(section, k)}
    kw.setdefault("length", length_default)
    for k in ("gamma", "length"):
        if kw.get(k) is None:
            raise r.error(f"missing key '{k}' in [{section}]", section)
    with r.wrap(section):
        return derive(**kw)


def _distribution(r, section, length):
    if not r.has(section):
        return None
    table = r.file(section, "table")
    with r.wrap(section):
        if table is not None:
            spectral = load_profile(table)
        else:
            shape = r.choice(section, "shape", ("gaussian", "sech", "lorentzian", "uniform"),
                             required=True)
            spectral = make_profile(shape, r.number(section, "width", required=True),
                                    r.number(section, "center", 0.0),
                                    r.number(section, "truncation"))
    spatial = None
    sp = r.file(section, "spatial_table")
    if sp is not None:
        with r.wrap(section, "spatial_table"):
            z, y = _load_columns(sp, 2)
            spatial = spatial_from_table(length, z, y)
    with r.wrap(section):
        return separable(length, spectral, spatial)


def _excitation(r):
    s = "excitation"
    if not r.has(s):
        return None
    table = r.file(s, "table")
    with r.wrap(s):
        if table is not None:
            return load_excitation(table)
        return gaussian_excitation(r.number(s, "width", required=True),
                                   r.number(s, "t_c", 0.0), r.number(s, "center", 0.0))


def _sweep_values(r):
    s = "sweep"
    if r.has(s, "values"):
        try:
            vals = [parse_number(v) for v in r.raw(s, "values").split(",") if v.strip()]
        except ValueError as exc:
            raise r.error(f"[sweep] values: {exc}", s, "values") from None
        if not vals:
            raise r.error("[sweep] values is empty", s, "values")
        return np.sort(np.array(vals, float))
    start = r.number(s, "start", required=True)
    stop = r.number(s, "stop", required=True)
    n = r.integer(s, "points", 11)
    spacing = r.choice(s, "spacing", ("log", "linear"), "linear")
    if n < 1:
        raise r.error("[sweep] points must be >= 1", s, "points")
    if spacing == "log":
        if not (start > 0 and stop > 0):
            raise r.error("[sweep] log spacing needs positive start and stop", s, "start")
        vals = np.geomspace(start, stop, n)
    else:
        vals = np.linspace(start, stop, n)
    return np.sort(vals)


def _require(r, cfg, names):
    for attr, section in names:
        if getattr(cfg, attr) is None:
            raise r.error(f"pipeline {cfg.pipeline!r} needs a [{section}] section", "run",
                          "pipeline")


def load_config(path):
    """Parse and validate a config file; raises ConfigError with a line number."""
    path = str(path)
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}", None, path) from None
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str.lower
    try:
        parser.read_string(text, source=path)
    except configparser.Error as exc:
        line = getattr(exc, "lineno", None)
        msg = exc.message.splitlines()[0] if hasattr(exc, "message") else str(exc)
        raise ConfigError(msg, line, path) from None
    index = _line_index(text)
    r = _Reader(parser, index, path)
    for section in parser.sections():
        if section not in SECTIONS:
            raise r.error(f"unknown section [{section}]", section)
        for key in parser.options(section):
            if key not in SECTIONS[section]:
                raise r.error(f"unknown key '{key}' in [{section}]", section, key)

    cfg = SimConfig(path=path, text=text,
                    pipeline=r.choice("run", "pipeline", PIPELINES, required=True))
    cfg.scenario = r.choice("run", "scenario", SCENARIOS)
    cfg.storage = _transition(r, "storage")
    cfg.retrieval = _transition(r, "retrieval",
                                cfg.storage.length if cfg.storage is not None else None)
    if cfg.storage is not None and cfg.retrieval is not None \
            and abs(cfg.storage.length - cfg.retrieval.length) > 1e-12 * cfg.storage.length:
        raise r.error("storage and retrieval lengths differ", "retrieval", "length")
    length = (cfg.retrieval or cfg.storage).length if (cfg.retrieval or cfg.storage) else None
    if length is None and (r.has("storage_distribution") or r.has("retrieval_distribution")):
        raise r.error("distributions need a [storage] or [retrieval] section with a length",
                      "storage_distribution" if r.has("storage_distribution")
                      else "retrieval_distribution")
    cfg.storage_dist = _distribution(r, "storage_distribution", length)
    cfg.retrieval_dist = _distribution(r, "retrieval_distribution", length)
    if cfg.retrieval_dist is None:
        cfg.retrieval_dist = cfg.storage_dist
    cfg.excitation = _excitation(r)
    if r.has("input"):
        with r.wrap("input"):
            cfg.input_pulse = GaussianPulse(r.number("input", "t_center", 0.0),
                                            r.number("input", "duration", required=True),
                                            r.number("input", "carrier", 0.0))
    cfg.half_width = r.number("grid", "half_width", required=True)
    cfg.points = r.integer("grid", "points", 2001)
    with r.wrap("grid"):
        cfg.grid()
    cfg.bmap = r.choice("protocol", "map", ("negate", "identity", "uncorrelated"), "negate")
    cfg.T_S = r.number("protocol", "t_s", 0.0)
    cfg.delta_t = r.number("protocol", "delta_t")
    cfg.kernel = r.choice("protocol", "kernel", KERNELS, "general")
    cfg.include_exit_phase = r.boolean("protocol", "include_exit_phase", False)
    if cfg.bmap == "uncorrelated":
        with r.wrap("protocol", "g0_width"):
            cfg.g0 = make_profile(r.raw("protocol", "g0_shape", "gaussian"),
                                  r.number("protocol", "g0_width", required=True))
    if r.has("sweep"):
        cfg.sweep_parameter = r.choice("sweep", "parameter", SWEEP_PARAMETERS, "d")
        cfg.sweep_values = _sweep_values(r)
    if r.has("oracle"):
        cfg.oracle = {"t_start": r.number("oracle", "t_start", required=True),
                      "t_end": r.number("oracle", "t_end", required=True),
                      "n_z": r.integer("oracle", "n_z", 256),
                      "courant": r.number("oracle", "courant", 1.0),
                      "n_delta": r.integer("oracle", "n_delta")}
    cfg.outputs = {"spectrum": r.raw("output", "spectrum", "spectrum.csv"),
                   "metrics": r.raw("output", "metrics", "metrics.txt"),
                   "sweep": r.raw("output", "sweep", "sweep.csv")}

    if cfg.pipeline == "transduce":
        _require(r, cfg, [("retrieval", "retrieval"), ("retrieval_dist", "retrieval_distribution"),
                          ("excitation", "excitation")])
    elif cfg.pipeline == "retrieve":
        _require(r, cfg, [("storage", "storage"), ("retrieval", "retrieval"),
                          ("storage_dist", "storage_distribution"), ("input_pulse", "input")])
    else:
        if cfg.scenario is None:
            raise r.error("oracle-compare needs 'scenario' in [run]", "run", "pipeline")
        if not cfg.oracle:
            raise r.error("oracle-compare needs an [oracle] section", "run", "scenario")
        if cfg.scenario == "leakage":
            _require(r, cfg, [("storage", "storage"), ("storage_dist", "storage_distribution"),
                              ("input_pulse", "input")])
        elif cfg.scenario == "crib":
            _require(r, cfg, [("storage", "storage"), ("retrieval", "retrieval"),
                              ("storage_dist", "storage_distribution"), ("input_pulse", "input")])
        else:
            _require(r, cfg, [("retrieval", "retrieval"),
                              ("retrieval_dist", "retrieval_distribution"),
                              ("excitation", "excitation")])
    if cfg.sweep_parameter in ("d", "storage.d", "retrieval.d") and cfg.sweep_values is not None \
            and np.any(cfg.sweep_values < 0):
        raise r.error("[sweep] optical depths must be >= 0", "sweep", "values")
    return cfg
