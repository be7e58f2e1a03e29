"""Command-line front end.

    oval-billiards <command> [--config FILE] [--table ...] [--curve ...] [--law ...] [--out DIR] ...

Exit codes: 0 success, 1 configuration error, 2 numerical failure.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import artifacts
from .analysis import MapConfig, basin_grid, default_workers, iterate, iterate_arrays, rotation_number
from .classical import PhaseState
from .config import COMMANDS, ConfigError, ExperimentConfig, build_config, fmt, format_config, read_config_lines
from .curves import ellipse_first_integral, lower_bound_l
from .errors import BilliardError
from .geometry import Ellipse
from .nonelastic import certify_strip, contraction_threshold

log = logging.getLogger("oval_billiards")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message, "command line")


# flag -> config key, per command
_COMMON = ["table", "curve", "law", "out"]
_FLAGS = {
    "orbit": ["phi0", "alpha0", "n"],
    "rotation": ["phi0", "alpha0", "n"],
    "basin": ["res", "region", "max_iter", "tol_curve", "tol_period", "window", "max_period"],
    "certify": ["max_halfwidth", "samples"],
    "threshold": [],
    "phase": ["phi0", "starts", "iterations", "seed", "random_starts", "region"],
}
_MULTI = {"table", "curve", "law"}


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="oval-billiards", description="Classical and non-elastic billiards on ovals.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    for cmd in COMMANDS:
        sp = sub.add_parser(cmd)
        sp.add_argument("--config", help="file of 'key = value' lines; flags override it")
        for key in _COMMON + _FLAGS[cmd]:
            flag = "--" + key.replace("_", "-")
            if key in _MULTI:
                sp.add_argument(flag, nargs="+", dest=key, help=f"{key} spec, e.g. 'ellipse e=0.35'")
            else:
                sp.add_argument(flag, dest=key)
    return p


def parse_args(argv) -> ExperimentConfig:
    ns = build_parser().parse_args(argv)
    if ns.command is None:
        raise ConfigError(f"expected a subcommand: {', '.join(COMMANDS)}", "command line")
    raw = {}
    if ns.config:
        try:
            text = Path(ns.config).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}", "--config") from None
        raw.update(read_config_lines(text.splitlines(), ns.config))
    raw["command"] = (ns.command, "command line")
    for key in _COMMON + _FLAGS[ns.command]:
        value = getattr(ns, key, None)
        if value is None:
            continue
        if isinstance(value, list):
            value = " ".join(value)
        raw[key] = (value, "--" + key.replace("_", "-"))
    return build_config(raw)


def _map(cfg: ExperimentConfig) -> MapConfig:
    return MapConfig(cfg.table, cfg.curve, cfg.law)


def _start(cfg: ExperimentConfig) -> PhaseState:
    alpha0 = cfg.alpha0 if cfg.alpha0 is not None else float(cfg.curve.value(cfg.phi0))
    return PhaseState(cfg.phi0, alpha0)


def _first_integral(cfg):
    if isinstance(cfg.table, Ellipse):
        e = cfg.table.e
        return lambda p, a: ellipse_first_integral(e, p, a)
    return None


def cmd_orbit(cfg, out):
    rec = iterate(_map(cfg), _start(cfg), cfg.n)
    files = [artifacts.write_orbit_csv(out / "orbit.csv", rec, _first_integral(cfg))]
    if rec.escaped:
        s = rec.states[-1]
        log.error("orbit stopped after %d steps at phi=%s alpha=%s", len(rec.states) - 1, fmt(s.phi), fmt(s.alpha))
        return files, 2
    return files, 0


def cmd_rotation(cfg, out):
    rec = iterate(_map(cfg), _start(cfg), cfg.n)
    if rec.escaped:
        s = rec.states[-1]
        log.error("orbit stopped after %d steps at phi=%s alpha=%s", len(rec.states) - 1, fmt(s.phi), fmt(s.alpha))
        return [], 2
    rho = rotation_number(rec)
    print(fmt(rho))
    path = out / "rotation.txt"
    path.write_text(f"rotation_number = {fmt(rho)}\nsteps = {len(rec.states) - 1}\n")
    return [path], 0


def cmd_basin(cfg, out):
    grid = basin_grid(_map(cfg), cfg.curve, cfg.region, cfg.res, cfg.classifier, workers=default_workers())
    csv_path = artifacts.write_basin_csv(out / "basin.csv", grid)
    pgm_path = artifacts.write_pgm(out / "basin.pgm", artifacts.basin_image(grid))
    summary = [f"fraction_to_curve = {fmt(grid.fraction_to_curve)}"]
    summary += [f"count_{k.lower()} = {v}" for k, v in grid.counts().items()]
    txt = out / "basin.txt"
    txt.write_text("\n".join(summary) + "\n")
    print(fmt(grid.fraction_to_curve))
    return [csv_path, pgm_path, txt], 0


def cmd_certify(cfg, out):
    cert = certify_strip(cfg.table, cfg.curve, cfg.law, cfg.max_halfwidth, samples=cfg.samples)
    txt, csv_path = out / "certificate.txt", out / "certificate.csv"
    artifacts.write_certificate(txt, csv_path, cert)
    print("\n".join(cert.report_lines()))
    return [txt, csv_path], 0


def cmd_threshold(cfg, out):
    thr = contraction_threshold(cfg.table, cfg.curve)
    print(fmt(thr))
    path = out / "threshold.txt"
    path.write_text(f"threshold = {fmt(thr)}\nlower_bound_l = {fmt(lower_bound_l(cfg.table, cfg.curve))}\n")
    return [path], 0


def phase_portrait(cfg: ExperimentConfig, out: Path):
    """Iterate a bundle of classical orbits and dump every visited state.

    Starts lie on the vertical line ``phi = phi0`` with evenly spaced
    ``alpha`` in (0, pi), or are drawn uniformly from ``region`` when
    ``random_starts`` is set.  Each orbit contributes ``iterations`` rows.
    """
    if cfg.random_starts:
        rng = np.random.default_rng(cfg.seed)
        (p0, p1), (a0, a1) = cfg.region
        phi = rng.uniform(p0, p1, cfg.starts)
        alpha = rng.uniform(a0, a1, cfg.starts)
    else:
        phi = np.full(cfg.starts, cfg.phi0)
        alpha = math.pi * (np.arange(cfg.starts) + 1) / (cfg.starts + 1)
    P, A, _ = iterate_arrays(_map(cfg), phi, alpha, cfg.iterations - 1)
    rows = []
    for j in range(cfg.starts):
        for k in range(cfg.iterations):
            if np.isfinite(P[k, j]):
                rows.append([j, k, float(P[k, j]), float(A[k, j])])
    phase = artifacts.write_rows(out / "phase.csv", ["orbit", "step", "phi", "alpha"], rows)
    outline = cfg.table.outline(512)
    table = artifacts.write_rows(out / "table.csv", ["x", "y"], [[float(x), float(y)] for x, y in outline])
    lost = cfg.starts * cfg.iterations - len(rows)
    if lost:
        log.error("%d states lost to numerical failure", lost)
        return [phase, table], 2
    return [phase, table], 0


def cmd_phase(cfg, out):
    return phase_portrait(cfg, out)


_DISPATCH = {
    "orbit": cmd_orbit,
    "rotation": cmd_rotation,
    "basin": cmd_basin,
    "certify": cmd_certify,
    "threshold": cmd_threshold,
    "phase": cmd_phase,
}


def run(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s: %(message)s")
    try:
        cfg = parse_args(sys.argv[1:] if argv is None else argv)
        default_workers()  # validates OVAL_THREADS early
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return 1
    except ValueError as exc:
        log.error("config error: %s", exc)
        return 1

    out = Path(cfg.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        log.error("config error: cannot create output directory %s: %s", out, exc)
        return 1

    try:
        files, code = _DISPATCH[cfg.command](cfg, out)
    except BilliardError as exc:
        states = getattr(exc, "states", None) or getattr(exc, "state", None)
        log.error("numerical failure: %s%s", exc, f" (state: {states})" if states else "")
        return 2

    echo = format_config(cfg)
    cfg_path = out / "config.txt"
    cfg_path.write_text("\n".join(echo) + "\n")
    artifacts.write_manifest(out, list(files) + [cfg_path], echo)
    return code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
