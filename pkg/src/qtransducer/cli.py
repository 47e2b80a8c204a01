"""Command line entry point: run, sweep, figure and oracle-compare.

Exit codes: 0 success, 2 configuration or usage error, 3 numeric failure.
The output directory is --out, else $QTRANSDUCER_OUT, else ./out.
"""
import argparse
import csv
import hashlib
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import figures
from .config import load_config
from .errors import ConfigError, InvalidArgument, NumericFailure
from .grids import SpectralField
from .metrics import (excitation_reference, fidelity, make_report, profile_reference,
                      reversed_reference)
from .quadrature import DEFAULT_RTOL

OUT_ENV = "QTRANSDUCER_OUT"
PRECISION = "%.12g"
SWEEP_COLUMNS = ("W", "efficiency", "fidelity_f", "fidelity_n", "leakage")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


def _fmt(v):
    return PRECISION % v


def write_csv(path, header, rows, digest):
    """CSV with a config-hash comment line, a header row and 12 significant digits."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(f"# config-sha256: {digest}\n")
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(header)
        for row in rows:
            out.writerow([v if isinstance(v, str) else _fmt(v) for v in row])
    return path


def spectrum_rows(E):
    a = E.amplitude
    return zip(E.grid.points, a.real, a.imag, np.abs(a) ** 2)


# ---------------------------------------------------------------- pipelines

def _transduce(cfg, grid, rtol, f=None):
    from .transducer import mw_output_general, mw_output_uniform, normalize_excitation

    params, dist = cfg.retrieval, cfg.retrieval_dist
    if f is None:
        f = cfg.excitation
        if not f.is_zero:
            f = normalize_excitation(f, dist, params)
    if f.is_zero or params.d == 0:
        E = SpectralField(grid, np.zeros(grid.n_points, complex))
        return make_report(E), E
    uniform = dist.is_separable and dist.spatial.is_uniform and params.delta_k == 0
    if uniform:
        E = mw_output_uniform(f, dist.spectral, params, grid, cfg.include_exit_phase, rtol)
    else:
        E = mw_output_general(f, dist, params, grid, cfg.include_exit_phase, rtol)
    ref_f = excitation_reference(f, grid)
    ref_n = profile_reference(dist.marginal_spectral(), grid, phase_from=f)
    return make_report(E, None, ref_f, ref_n), E


def _retrieve(cfg, grid, rtol):
    from .retrieval import (BroadeningMap, apply_kernel, build_kernel_crib_uniform,
                            build_kernel_general, build_kernel_ideal)
    from .storage import storage_leakage

    E_in = cfg.input_pulse.field(grid)
    if cfg.kernel == "ideal":
        K = build_kernel_ideal(cfg.storage, cfg.T_S, grid, grid)
    elif cfg.kernel == "crib_uniform":
        K = build_kernel_crib_uniform(cfg.storage, cfg.retrieval, cfg.T_S, grid, grid)
    else:
        K = build_kernel_general(cfg.storage, cfg.retrieval, cfg.storage_dist, cfg.retrieval_dist,
                                 BroadeningMap(cfg.bmap, cfg.g0), cfg.T_S, grid, grid, rtol)
    E = apply_kernel(K, E_in)
    leak = storage_leakage(E_in, cfg.storage, cfg.storage_dist, rtol)
    rep = make_report(E, E_in, leakage=leak)
    if rep.retrieval_probability > 0:
        # the echo carries a large linear phase, so spectra are compared by magnitude
        mag = SpectralField(grid, np.abs(E.amplitude))
        if grid.is_symmetric():
            rep.fidelity_f = fidelity(mag, reversed_reference(E_in))
        rep.fidelity_n = fidelity(mag, profile_reference(cfg.retrieval_dist.marginal_spectral(),
                                                         grid))
    return rep, E


def evaluate(cfg, grid_points=None, rtol=DEFAULT_RTOL):
    """MetricsReport and output spectrum for a transduce or retrieve config."""
    grid = cfg.grid(grid_points)
    if cfg.pipeline == "transduce":
        return _transduce(cfg, grid, rtol)
    if cfg.pipeline == "retrieve":
        return _retrieve(cfg, grid, rtol)
    raise InvalidArgument(f"pipeline {cfg.pipeline!r} has no single spectral output")


def oracle_compare(cfg, grid_points=None):
    from .oracle import ComparisonConfig, OracleConfig, compare_with_spectral
    from .retrieval import BroadeningMap
    from .transducer import normalize_excitation

    o = cfg.oracle
    length = (cfg.storage or cfg.retrieval).length
    oc = OracleConfig(length, o["t_start"], o["t_end"], storage=cfg.storage,
                      G_S=cfg.storage_dist, retrieval=cfg.retrieval, G_R=cfg.retrieval_dist,
                      n_z=o["n_z"], courant=o["courant"], n_delta=o["n_delta"])
    exc = None
    if cfg.scenario == "transduce":
        exc = normalize_excitation(cfg.excitation, cfg.retrieval_dist, cfg.retrieval)
    bmap = BroadeningMap(cfg.bmap, cfg.g0)
    cc = ComparisonConfig(cfg.scenario, cfg.grid(grid_points), oc, cfg.T_S, bmap,
                          cfg.input_pulse, exc)
    return compare_with_spectral(cc)


# ---------------------------------------------------------------- sweeps

def _with_value(cfg, name, value):
    if name == "T_S":
        return replace(cfg, T_S=float(value))
    if name == "gamma":
        return replace(cfg, storage=cfg.storage and cfg.storage.with_gamma(value),
                       retrieval=cfg.retrieval and cfg.retrieval.with_gamma(value))
    if name == "storage.d" or (name == "d" and cfg.pipeline == "retrieve"):
        cfg = replace(cfg, storage=cfg.storage.with_d(value))
    if name == "retrieval.d" or name == "d":
        cfg = replace(cfg, retrieval=cfg.retrieval.with_d(value))
    return cfg


def run_sweep(cfg, grid_points=None, rtol=DEFAULT_RTOL, threads=1):
    """One row per sweep value, ascending; failures are marked per row."""
    if cfg.sweep_values is None:
        raise ConfigError("sweep needs a [sweep] section", None, cfg.path)
    if cfg.pipeline not in ("transduce", "retrieve"):
        raise ConfigError(f"sweep is not available for pipeline {cfg.pipeline!r}", None,
                          cfg.path)
    grid = cfg.grid(grid_points)
    f = None
    if cfg.pipeline == "transduce" and not cfg.excitation.is_zero:
        from .transducer import normalize_excitation
        # the normalization depends on c and L only, so one object serves every row
        f = normalize_excitation(cfg.excitation, cfg.retrieval_dist, cfg.retrieval)

    def row(value):
        sub = _with_value(cfg, cfg.sweep_parameter, value)
        try:
            if sub.pipeline == "transduce":
                rep, _ = _transduce(sub, grid, rtol, f)
            else:
                rep, _ = _retrieve(sub, grid, rtol)
        except NumericFailure as exc:
            return [value] + [np.nan] * len(SWEEP_COLUMNS) + [f"numeric_failure: {exc}"]
        except InvalidArgument as exc:
            return [value] + [np.nan] * len(SWEEP_COLUMNS) + [f"invalid: {exc}"]
        return [value, rep.retrieval_probability, rep.efficiency, rep.fidelity_f,
                rep.fidelity_n, rep.leakage, "ok"]

    values = list(cfg.sweep_values)
    rows = [row(values[0])]  # warms the response caches shared by later rows
    if len(values) > 1:
        with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
            rows += list(pool.map(row, values[1:]))
    return rows


# ---------------------------------------------------------------- figures

def _figure_digest(name, n_points):
    desc = (f"{name};cutoff={figures.CUTOFF!r};length={figures.LENGTH!r};"
            f"gamma={figures.GAMMA!r};t_c={figures.EMISSION_TIME!r};c={figures.DEFAULT_C!r};"
            f"curves={figures.CURVES!r};d={figures.D_GRIDS[name]!r};points={n_points}")
    return hashlib.sha256(desc.encode()).hexdigest()


def reproduce_figure(name, out_dir, n_points=figures.DEFAULT_GRID_POINTS, threads=1):
    """Write <name>.csv with one block of rows per curve; returns (path, curves)."""
    if name not in figures.D_GRIDS:
        raise InvalidArgument(f"unknown figure {name!r}")
    ds = np.geomspace(*figures.D_GRIDS[name])
    if name == "fig3":
        jobs = [("narrow_emitters", s) for s in figures.FIG3_SHAPES]
    else:
        jobs = [(k, "gaussian") for k in figures.CURVES]
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        curves = list(pool.map(lambda j: figures.curve(j[0], j[1], ds, n_points), jobs))
    if name == "fig3":
        header = ("shape", "d", "W")
        rows = [(s, d, W) for (_, s), c in zip(jobs, curves) for d, W in zip(c.d, c.W)]
    elif name == "fig2a":
        header = ("curve", "d", "W")
        rows = [(k, d, W) for (k, _), c in zip(jobs, curves) for d, W in zip(c.d, c.W)]
    else:
        header = ("curve", "d", "W", "fidelity_f", "fidelity_n")
        rows = [(k, d, W, ff, fn) for (k, _), c in zip(jobs, curves)
                for d, W, ff, fn in zip(c.d, c.W, c.fidelity_f, c.fidelity_n)]
    path = write_csv(Path(out_dir) / f"{name}.csv", header, rows, _figure_digest(name, n_points))
    return path, curves


# ---------------------------------------------------------------- entry point

def _out_dir(args):
    if args.out is not None:
        return Path(args.out)
    return Path(os.environ.get(OUT_ENV) or "out")


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", metavar="DIR", default=None,
                        help=f"output directory (default ${OUT_ENV} or ./out)")
    common.add_argument("--grid-points", type=int, metavar="N", default=None,
                        help="frequency grid points (odd)")
    common.add_argument("--tolerance", type=float, metavar="EPS", default=DEFAULT_RTOL,
                        help="relative quadrature tolerance")
    common.add_argument("--threads", type=int, metavar="N", default=1,
                        help="worker threads for sweeps and figures")
    common.add_argument("--quiet", action="store_true", help="suppress the summary on stdout")
    p = argparse.ArgumentParser(prog="qtransducer",
                                description="Photon storage, retrieval and transduction "
                                            "in inhomogeneously broadened media.")
    sub = p.add_subparsers(dest="command", required=True)
    for name, text in (("run", "compute one output spectrum and its metrics"),
                       ("sweep", "metrics over the [sweep] values"),
                       ("oracle-compare", "time-domain cross-check of the spectral result")):
        s = sub.add_parser(name, parents=[common], help=text)
        s.add_argument("config")
    s = sub.add_parser("figure", parents=[common], help="optical-depth curves as CSV")
    s.add_argument("name", choices=sorted(figures.D_GRIDS))
    return p


def _say(args, text):
    if not args.quiet:
        print(text, end="" if text.endswith("\n") else "\n")


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    out = _out_dir(args)
    try:
        if args.grid_points is not None and (args.grid_points < 3 or args.grid_points % 2 == 0):
            raise ConfigError("--grid-points must be an odd integer >= 3")
        if not args.tolerance > 0:
            raise ConfigError("--tolerance must be positive")
        if args.command == "figure":
            n = args.grid_points or figures.DEFAULT_GRID_POINTS
            path, curves = reproduce_figure(args.name, out, n, args.threads)
            for c in curves:
                d, W = c.peak
                _say(args, f"{c.label}: peak W={W:.4f} at d={d:.4g}")
            _say(args, f"wrote {path}")
            return EXIT_OK
        cfg = load_config(args.config)
        if args.command == "run" and cfg.pipeline == "oracle-compare":
            args.command = "oracle-compare"
        if args.command == "run":
            rep, E = evaluate(cfg, args.grid_points, args.tolerance)
            sp = write_csv(out / cfg.outputs["spectrum"], ("omega", "re", "im", "intensity"),
                           spectrum_rows(E), cfg.sha256)
            mp = out / cfg.outputs["metrics"]
            mp.write_text(f"# config-sha256: {cfg.sha256}\n" + rep.to_text())
            _say(args, rep.to_text())
            _say(args, f"wrote {sp} and {mp}")
        elif args.command == "sweep":
            rows = run_sweep(cfg, args.grid_points, args.tolerance, args.threads)
            header = (cfg.sweep_parameter,) + SWEEP_COLUMNS + ("status",)
            path = write_csv(out / cfg.outputs["sweep"], header, rows, cfg.sha256)
            n_bad = sum(r[-1] != "ok" for r in rows)
            _say(args, f"wrote {path} ({len(rows)} rows, {n_bad} failed)")
        else:
            if cfg.pipeline != "oracle-compare":
                raise ConfigError("oracle-compare needs pipeline = oracle-compare", None,
                                  cfg.path)
            rep = oracle_compare(cfg, args.grid_points)
            for tag, E in (("oracle", rep.oracle_spectrum), ("spectral", rep.spectral)):
                write_csv(out / f"{tag}_{cfg.outputs['spectrum']}",
                          ("omega", "re", "im", "intensity"), spectrum_rows(E), cfg.sha256)
            (out / cfg.outputs["metrics"]).write_text(
                f"# config-sha256: {cfg.sha256}\n" + rep.to_text())
            _say(args, rep.to_text())
    except (ConfigError, InvalidArgument) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericFailure as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


__all__ = ["main", "evaluate", "run_sweep", "reproduce_figure", "oracle_compare", "write_csv"]


def main_exit():
    sys.exit(main())
