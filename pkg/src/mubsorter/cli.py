"""Command-line front end.

    mubsorter crosstalk|figure2|zmax|qkd|sweep [--config run.json] [--out DIR] [overrides]

Configuration is a flat JSON document whose keys are the RunConfig fields;
any key can be overridden with the same-named flag (``delta_n`` -> ``--delta-n``).
Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

import numpy as np

from mubsorter import __version__
from mubsorter.errors import ConfigError, NumericalError, SorterError
from mubsorter.hilbert import build_mub_table
from mubsorter.hologram import build_coupling_matrix
from mubsorter.optics import Material, OpticalConfig
from mubsorter.propagate import Trajectory, initial_amplitudes, propagate_rk4
from mubsorter.qkd import qkd_metrics, simulate_exchange
from mubsorter.report import (
    CROSSTALK_HEADER,
    TRAJECTORY_HEADER,
    crosstalk_from_dict,
    crosstalk_rows,
    crosstalk_to_dict,
    dumps,
    svg_line_chart,
    trajectory_rows,
    write_csv,
    write_json,
    zmax_to_dict,
)
from mubsorter.sorter import (
    SorterConfig,
    build_sorter,
    crosstalk_table,
    figure2_dataset,
    find_zmax,
)

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


@dataclass(frozen=True)
class RunConfig:
    n0: float = 1.4865
    delta_n: float = 0.0005
    lambda_nm: float = 1085.0
    aperture_mm: float = 10.0
    emulsion_mm: float = 10.0
    mub_index: int = 4
    reference_tilts: tuple[float, float, float] = (2000.0, 3000.0, 4000.0)
    signal_tilts: tuple[float, float, float] = (1.0, 2.0, 3.0)
    degenerate_kz: bool = False
    rk4_step_um: float | None = None
    seed: int = 0
    z_mm: float | None = None
    samples: int = 201
    monte_carlo: int | None = None
    initial_reference_amps: bool = False

    def validate(self) -> "RunConfig":
        if self.mub_index not in (1, 2, 3, 4):
            raise ConfigError(f"mub_index must be 1..4, got {self.mub_index}")
        if len(self.reference_tilts) != 3 or len(self.signal_tilts) != 3:
            raise ConfigError("reference_tilts and signal_tilts need 3 values each")
        if self.z_mm is not None and self.z_mm < 0:
            raise ConfigError("z_mm must be >= 0")
        if self.rk4_step_um is not None and not self.rk4_step_um > 0:
            raise ConfigError("rk4_step_um must be > 0")
        if self.samples < 2:
            raise ConfigError("samples must be >= 2")
        if self.monte_carlo is not None and self.monte_carlo < 1:
            raise ConfigError("monte_carlo must be >= 1")
        try:
            spec = build_sorter(self.sorter_config())
            build_coupling_matrix(spec)
        except SorterError as exc:
            raise ConfigError(str(exc)) from exc
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        return self

    def optical(self) -> OpticalConfig:
        return OpticalConfig(
            Material(self.n0, self.delta_n),
            wavelength=self.lambda_nm * 1e-9,
            aperture=self.aperture_mm * 1e-3,
            emulsion_length=self.emulsion_mm * 1e-3,
        )

    def sorter_config(self, mub_index: int | None = None) -> SorterConfig:
        return SorterConfig(
            self.optical(),
            self.mub_index if mub_index is None else mub_index,
            tuple(self.reference_tilts),
            tuple(self.signal_tilts),
            self.degenerate_kz,
        )

    @property
    def reference_amps(self):
        return (1.0, 1.0, 1.0) if self.initial_reference_amps else None


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(name: str, value):
    kind = _FIELD_TYPES[name]
    try:
        if value is None:
            if "None" not in kind:
                raise ConfigError(f"{name} may not be null")
            return None
        if kind.startswith("tuple"):
            if isinstance(value, str):
                value = [v for v in value.split(",") if v.strip()]
            return tuple(float(v) for v in value)
        if kind == "bool":
            if not isinstance(value, bool):
                raise ConfigError(f"{name} must be true or false")
            return value
        if kind.startswith("int"):
            if isinstance(value, bool) or float(value) != int(float(value)):
                raise ConfigError(f"{name} must be an integer")
            return int(float(value))
        if isinstance(value, bool):
            raise ConfigError(f"{name} must be a number")
        return float(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {name}: {value!r}") from exc


def load_config(path: str | Path | None, overrides: dict) -> RunConfig:
    values = {}
    if path is not None:
        try:
            doc = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
        unknown = sorted(set(doc) - set(_FIELD_TYPES))
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        values.update(doc)
    values.update({k: v for k, v in overrides.items() if v is not None})
    cfg = RunConfig(**{k: _coerce(k, v) for k, v in values.items()})
    return cfg.validate()


def _metadata(cfg: RunConfig, command: str) -> dict:
    return {"command": command, "config": asdict(cfg), "version": __version__}


def cmd_crosstalk(cfg: RunConfig, out: Path) -> dict:
    spec = build_sorter(cfg.sorter_config())
    z = cfg.z_mm * 1e-3 if cfg.z_mm is not None else find_zmax(spec).common
    table = crosstalk_table(spec, build_mub_table(3), z, cfg.reference_amps)
    write_csv(out / "crosstalk.csv", CROSSTALK_HEADER, crosstalk_rows(table))
    doc = {
        **_metadata(cfg, "crosstalk"),
        **crosstalk_to_dict(table),
        "z_eval_mm": z * 1e3,
        "mub_table": build_mub_table(3).to_dict(),
    }
    write_json(out / "crosstalk.json", doc)
    return doc


def _rk4_dataset(cfg: RunConfig, spec, z_stop: float):
    m = build_coupling_matrix(spec)
    mubs = build_mub_table(3)
    states = [s for _, _, s in mubs.all_states()]
    init = np.array([initial_amplitudes(s, cfg.reference_amps) for s in states])
    traj = propagate_rk4(m, init, z_stop, cfg.rk4_step_um * 1e-6)
    return [
        Trajectory(traj.z, traj.amplitudes[k], traj.probabilities[k], s.label)
        for k, s in enumerate(states)
    ]


def cmd_figure2(cfg: RunConfig, out: Path, plot: bool = False, full: bool = False) -> dict:
    spec = build_sorter(cfg.sorter_config())
    z_stop = (cfg.z_mm if cfg.z_mm is not None else cfg.emulsion_mm) * 1e-3
    if z_stop <= 0:
        raise ConfigError("figure2 needs a positive depth range")
    if cfg.rk4_step_um is not None:
        trajs = _rk4_dataset(cfg, spec, z_stop)
        method = "rk4"
    else:
        trajs = figure2_dataset(spec, build_mub_table(3), z_stop, cfg.samples, cfg.reference_amps)
        method = "expm"
    files = []
    for t in trajs:
        name = f"figure2_{t.label}.csv"
        write_csv(out / name, ("z_mm", "p_r1", "p_r2", "p_r3"), trajectory_rows(t, 1e3))
        entry = {"state": t.label, "csv": name}
        if full:
            full_name = f"trajectory_{t.label}.csv"
            write_csv(out / full_name, TRAJECTORY_HEADER, trajectory_rows(t, 1.0, 6))
            entry["trajectory_csv"] = full_name
        if plot:
            svg = f"figure2_{t.label}.svg"
            p = t.reference_probabilities.T
            (out / svg).write_text(
                svg_line_chart(t.z * 1e3, p, title=t.label), encoding="utf-8", newline="\n"
            )
            entry["svg"] = svg
        files.append(entry)
    doc = {
        **_metadata(cfg, "figure2"),
        "method": method,
        "z_stop_mm": z_stop * 1e3,
        "samples": int(len(trajs[0].z)),
        "panels": files,
    }
    write_json(out / "figure2_index.json", doc)
    return doc


def cmd_zmax(cfg: RunConfig, out: Path) -> dict:
    spec = build_sorter(cfg.sorter_config())
    doc = {**_metadata(cfg, "zmax"), **zmax_to_dict(find_zmax(spec))}
    write_json(out / "zmax.json", doc)
    return doc


def cmd_qkd(cfg: RunConfig, out: Path, tables_path: str | None = None) -> dict:
    mubs = build_mub_table(3)
    if tables_path is not None:
        try:
            raw = json.loads(Path(tables_path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read tables {tables_path}: {exc}") from exc
        raw = raw.get("tables", raw) if isinstance(raw, dict) else raw
        try:
            tables = [crosstalk_from_dict(t) for t in raw]
        except (ValueError, AttributeError) as exc:
            raise ConfigError(str(exc)) from exc
        depths = [t.z_eval for t in tables]
    else:
        tables, depths = [], []
        for b in range(1, mubs.n_bases + 1):
            spec = build_sorter(cfg.sorter_config(b), mubs)
            z = cfg.z_mm * 1e-3 if cfg.z_mm is not None else find_zmax(spec).common
            tables.append(crosstalk_table(spec, mubs, z, cfg.reference_amps))
            depths.append(z)
    try:
        analytic = qkd_metrics(tables, mubs=mubs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    doc = {
        **_metadata(cfg, "qkd"),
        "operating_depth_mm": [z * 1e3 for z in depths],
        "analytic": analytic.to_dict(),
    }
    if cfg.monte_carlo is not None:
        mc = simulate_exchange(tables, n_symbols=cfg.monte_carlo, seed=cfg.seed, mubs=mubs)
        doc["monte_carlo"] = mc.to_dict()
    write_json(out / "qkd.json", doc)
    return doc


SWEEP_PARAMS = ("n0", "delta_n", "lambda_nm", "aperture_mm")


def cmd_sweep(cfg: RunConfig, out: Path, param: str, values: list[float]) -> dict:
    """Operating depth and sorting quality as one scalar parameter varies."""
    if param not in SWEEP_PARAMS:
        raise ConfigError(f"--param must be one of {', '.join(SWEEP_PARAMS)}")
    if not values:
        raise ConfigError("--values needs at least one number")
    mubs = build_mub_table(3)
    rows = []
    for v in values:
        point = replace(cfg, **{param: v}).validate()
        spec = build_sorter(point.sorter_config(), mubs)
        zr = find_zmax(spec)
        table = crosstalk_table(spec, mubs, zr.common, point.reference_amps)
        own = {s.label for s in mubs.basis(point.mub_index)}
        unmatched = np.array([r.reference for r in table.rows if r.state not in own])
        rows.append(
            {
                param: v,
                "common_mm": zr.common * 1e3,
                "min_efficiency": min(zr.efficiency_at_common),
                "unmatched_min": float(unmatched.min()),
                "unmatched_max": float(unmatched.max()),
            }
        )
    header = (param, "common_mm", "min_efficiency", "unmatched_min", "unmatched_max")
    write_csv(out / "sweep.csv", header, [[r[h] for h in header] for r in rows])
    doc = {**_metadata(cfg, "sweep"), "param": param, "points": rows}
    write_json(out / "sweep.json", doc)
    return doc


def _parse_values(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad --values list: {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat JSON run configuration")
    common.add_argument("--out", default=".", help="output directory (default: .)")
    common.add_argument("--z", dest="z_mm", type=float, help="evaluation depth / range in mm")
    common.add_argument("--mub", dest="mub_index", type=int, choices=(1, 2, 3, 4))
    common.add_argument("--degenerate-kz", action="store_true", default=None,
                        help="force every rho and sigma to beta")
    common.add_argument("--monte-carlo", type=int, metavar="N")
    common.add_argument("--seed", type=int)
    common.add_argument("--initial-reference-amps", action="store_true", default=None,
                        help="start reference modes at amplitude 1 instead of 0")
    common.add_argument("--n0", type=float)
    common.add_argument("--delta-n", type=float)
    common.add_argument("--lambda-nm", type=float)
    common.add_argument("--aperture-mm", type=float)
    common.add_argument("--emulsion-mm", type=float)
    common.add_argument("--reference-tilts", metavar="R1,R2,R3")
    common.add_argument("--signal-tilts", metavar="A,B,C")
    common.add_argument("--rk4-step-um", type=float)
    common.add_argument("--samples", type=int)

    parser = argparse.ArgumentParser(prog="mubsorter", description=__doc__.splitlines()[0] if __doc__ else None)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("crosstalk", parents=[common], help="12 x 3 crosstalk table at one depth")
    f2 = sub.add_parser("figure2", parents=[common], help="probability-vs-depth curves for all 12 states")
    f2.add_argument("--plot", action="store_true", help="also write one SVG line chart per panel")
    f2.add_argument("--full", action="store_true", help="also write all six mode probabilities")
    sub.add_parser("zmax", parents=[common], help="maximum-efficiency depths")
    q = sub.add_parser("qkd", parents=[common], help="twelve-state QKD metrics")
    q.add_argument("--tables", help="JSON list of crosstalk tables to use instead of simulating")
    sw = sub.add_parser("sweep", parents=[common], help="sweep one material/geometry parameter")
    sw.add_argument("--param", required=True, choices=SWEEP_PARAMS)
    sw.add_argument("--values", required=True, help="comma-separated values")
    return parser


_OVERRIDES = tuple(f.name for f in fields(RunConfig))


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    out = Path(args.out)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            cfg = load_config(args.config, {k: getattr(args, k, None) for k in _OVERRIDES})
        if args.command == "crosstalk":
            doc = cmd_crosstalk(cfg, out)
        elif args.command == "figure2":
            doc = cmd_figure2(cfg, out, plot=args.plot, full=args.full)
        elif args.command == "zmax":
            doc = cmd_zmax(cfg, out)
        elif args.command == "qkd":
            doc = cmd_qkd(cfg, out, args.tables)
        else:
            doc = cmd_sweep(cfg, out, args.param, _parse_values(args.values))
    except ConfigError as exc:
        print(f"mubsorter: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"mubsorter: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    if args.command in ("zmax", "qkd"):
        summary = {k: v for k, v in doc.items() if k not in ("config", "command", "version")}
        sys.stdout.write(dumps(summary))
    return 0


if __name__ == "__main__":
    sys.exit(main())
