"""Command-line front end: config files, sweeps and CSV output.

Config files are flat ``key = value`` lines with ``#`` comments. Keys are the
ScenarioConfig field names; scheme-specific options carry a section prefix
(``noma.num_subbands``, ``ra.num_preambles``, ``oma.num_resources``), which
may be dropped when the bare name is unambiguous. A file with ``sweep.field``
and ``sweep.values`` describes a sweep.
"""
from __future__ import annotations

import argparse
import csv
import enum
import hashlib
import io
import math
import sys
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional, Sequence, Union

from . import capacity, engine
from .capacity import LoadModel, SubbandLoadModel
from .engine import ConfigError, MetricsRecord, ScenarioConfig
from .radio import db_to_linear

EXIT_OK, EXIT_CONFIG, EXIT_IO = 0, 2, 3

CSV_COLUMNS = (
    "scheme", "swept_field", "swept_value", "mean_success_per_frame", "ci95",
    "success_probability", "mean_access_delay_frames", "collision_rate",
    "overhead_ul_per_payload", "overhead_dl_per_payload", "master_seed", "config_hash",
)
SECTIONS = ("noma", "ra", "oma")
SWEEP_KEYS = ("sweep.field", "sweep.values", "sweep.output")


class ConfigFileError(ConfigError):
    """Config problem tied to a key and, when known, a line of the file."""

    def __init__(self, key: str, message: str, line: Optional[int] = None):
        where = f"line {line}: " if line is not None else ""
        ConfigError.__init__(self, key, message)
        self.args = (f"{where}{key}: {message}",)
        self.line = line


@dataclass(frozen=True)
class SweepSpec:
    base: ScenarioConfig
    swept_field: str
    values: tuple[float, ...]
    output_path: Optional[str] = None

    def __post_init__(self):
        if not self.values:
            raise ConfigFileError("sweep.values", "needs at least one value")
        object.__setattr__(self, "swept_field", _aliases().get(self.swept_field, self.swept_field))
        default = _defaults().get(self.swept_field)
        if default is None or isinstance(default, (bool, enum.Enum)) or not isinstance(default, (int, float)):
            raise ConfigFileError("sweep.field", f"{self.swept_field!r} is not a numeric field")

    def configs(self) -> list[ScenarioConfig]:
        return [with_value(self.base, self.swept_field, v) for v in self.values]


def _defaults() -> dict[str, object]:
    return engine.config_fields(ScenarioConfig())


def _aliases() -> dict[str, str]:
    keys = list(_defaults())
    bare: dict[str, list[str]] = {}
    for k in keys:
        if "." in k:
            bare.setdefault(k.split(".", 1)[1], []).append(k)
    return {name: full[0] for name, full in bare.items() if len(full) == 1 and name not in keys}


def _convert(key: str, raw: str, default: object) -> object:
    if key == "ra.barring_factor":
        return None if raw.lower() == "dynamic" else float(raw)
    if isinstance(default, enum.Enum):
        return type(default)(raw.lower())
    if isinstance(default, bool):
        if raw.lower() not in ("true", "false"):
            raise ValueError(f"expected true/false, got {raw!r}")
        return raw.lower() == "true"
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, float):
        return float(raw)
    raise ValueError(f"unsupported key type for {key}")


def with_value(config: ScenarioConfig, key: str, value) -> ScenarioConfig:
    """Copy of ``config`` with one (possibly prefixed) field replaced."""
    default = _defaults()[key]
    if isinstance(default, int) and not isinstance(default, bool):
        if float(value) != int(value):
            raise ConfigFileError(key, f"needs an integer, got {value!r}")
        value = int(value)
    elif isinstance(default, float):
        value = float(value)
    if "." in key:
        section, name = key.split(".", 1)
        return replace(config, **{section: replace(getattr(config, section), **{name: value})})
    return replace(config, **{key: value})


def _build(values: dict[str, object], lines: dict[str, int]) -> ScenarioConfig:
    top = {k: v for k, v in values.items() if "." not in k}
    nested = {s: {} for s in SECTIONS}
    for k, v in values.items():
        if "." in k:
            section, name = k.split(".", 1)
            nested[section][name] = v
    base = ScenarioConfig()
    subs = {}
    for section in SECTIONS:
        try:
            subs[section] = replace(getattr(base, section), **nested[section])
        except ValueError as exc:
            key = f"{section}.{next(iter(nested[section]))}"
            raise ConfigFileError(key, str(exc), lines.get(key)) from None
    try:
        return ScenarioConfig(**top, **subs)
    except ConfigError as exc:
        raise ConfigFileError(exc.field, str(exc).split(": ", 1)[-1], lines.get(exc.field)) from None


def parse_config(text: str) -> Union[ScenarioConfig, SweepSpec]:
    defaults = _defaults()
    aliases = _aliases()
    values: dict[str, object] = {}
    lines: dict[str, int] = {}
    sweep: dict[str, str] = {}

    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigFileError("<syntax>", f"expected 'key = value', got {line!r}", lineno)
        key, raw = (part.strip() for part in line.split("=", 1))
        if not key or not raw:
            raise ConfigFileError(key or "<syntax>", "empty key or value", lineno)
        key = aliases.get(key, key)
        if key in lines:
            raise ConfigFileError(key, f"duplicate key (first set on line {lines[key]})", lineno)
        lines[key] = lineno
        if key in SWEEP_KEYS:
            sweep[key] = raw
            continue
        if key not in defaults:
            raise ConfigFileError(key, "unknown key", lineno)
        try:
            values[key] = _convert(key, raw, defaults[key])
        except ValueError:
            raise ConfigFileError(key, f"invalid value {raw!r}", lineno) from None

    if "scheme" not in values:
        raise ConfigFileError("scheme", "required key missing")
    config = _build(values, lines)
    if not sweep:
        return config
    if "sweep.field" not in sweep or "sweep.values" not in sweep:
        raise ConfigFileError("sweep.field", "sweep needs both sweep.field and sweep.values")
    field_name = aliases.get(sweep["sweep.field"], sweep["sweep.field"])
    try:
        numbers = tuple(float(v) for v in sweep["sweep.values"].split(",") if v.strip())
    except ValueError:
        raise ConfigFileError("sweep.values", f"invalid value {sweep['sweep.values']!r}",
                              lines["sweep.values"]) from None
    spec = SweepSpec(config, field_name, numbers, sweep.get("sweep.output"))
    for c in spec.configs():
        c.validate()
    return spec


def fmt(x) -> str:
    if isinstance(x, enum.Enum):
        return x.value
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        return format(x, ".9g")
    return "" if x is None else str(x)


def config_hash(config: ScenarioConfig) -> str:
    canonical = "\n".join(f"{k}={fmt(v) if not isinstance(v, float) else repr(v)}"
                          for k, v in sorted(engine.config_fields(config).items()))
    return hashlib.sha256(canonical.encode()).hexdigest()[:16]


def metrics_row(config: ScenarioConfig, record: MetricsRecord, swept_field: str = "",
                swept_value="") -> list[str]:
    return [
        config.scheme.value, swept_field, fmt(swept_value),
        fmt(record.mean_success_per_frame), fmt(record.ci95_success_per_frame),
        fmt(record.success_probability), fmt(record.mean_access_delay_frames),
        fmt(record.collision_rate), fmt(record.overhead_ul_bytes_per_payload_byte),
        fmt(record.overhead_dl_bytes_per_payload_byte), str(config.master_seed),
        config_hash(config),
    ]


def _csv_text(header: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def run_command(spec: Union[ScenarioConfig, SweepSpec]) -> str:
    """Simulate every sweep point in order; returns the CSV text."""
    if isinstance(spec, ScenarioConfig):
        return _csv_text(CSV_COLUMNS, [metrics_row(spec, engine.run_scenario(spec))])
    rows = []
    for value, config in zip(spec.values, spec.configs()):
        rows.append(metrics_row(config, engine.run_scenario(config), spec.swept_field, value))
    return _csv_text(CSV_COLUMNS, rows)


def region_command(snr1_db: float, snr2_db: float, alpha_steps: int) -> str:
    """NOMA corner points plus an even alpha grid over the OMA boundary."""
    for name, v in (("snr1_db", snr1_db), ("snr2_db", snr2_db)):
        if not math.isfinite(v):
            raise ConfigFileError(name, f"must be a finite dB value, got {v}")
    if alpha_steps < 2:
        raise ConfigFileError("alpha_steps", "must be >= 2")
    s1, s2 = db_to_linear(snr1_db), db_to_linear(snr2_db)
    a, b = capacity.noma_region_vertices(s1, s2)
    rows = [["noma_A", "", fmt(a.r1), fmt(a.r2), fmt(a.total)],
            ["noma_B", "", fmt(b.r1), fmt(b.r2), fmt(b.total)]]
    for i in range(alpha_steps):
        alpha = i / (alpha_steps - 1)
        p = capacity.oma_region_point(alpha, s1, s2)
        rows.append(["oma", fmt(alpha), fmt(p.r1), fmt(p.r2), fmt(p.total)])
    return _csv_text(("kind", "alpha", "r1", "r2", "sum_rate"), rows)


def maxload_command(gamma_db: Sequence[float], tw_product: float, msg_bits: int,
                    model: str, collided: int = 0) -> str:
    rows = []
    for g in gamma_db:
        if not math.isfinite(g):
            raise ConfigFileError("gamma_db", f"must be finite, got {g}")
        try:
            m = SubbandLoadModel(db_to_linear(g), tw_product, msg_bits, LoadModel(model))
        except ValueError as exc:
            raise ConfigFileError("maxload", str(exc)) from None
        rows.append([fmt(float(g)), fmt(m.gamma), fmt(float(tw_product)), str(msg_bits),
                     m.model.value, str(collided), str(capacity.noma_max_load(m, collided))])
    return _csv_text(("gamma_db", "gamma", "tw_product", "msg_bits", "model", "collided",
                      "max_load"), rows)


def _load(args) -> Union[ScenarioConfig, SweepSpec]:
    spec = parse_config(Path(args.config).read_text(encoding="utf-8"))
    base = spec.base if isinstance(spec, SweepSpec) else spec
    overrides = {}
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    if args.replications is not None:
        overrides["num_replications"] = args.replications
    if overrides:
        try:
            base = replace(base, **overrides)
        except ConfigError as exc:
            raise ConfigFileError(exc.field, str(exc).split(": ", 1)[-1]) from None
    if isinstance(spec, SweepSpec):
        field_name = getattr(args, "field", None) or spec.swept_field
        values = tuple(args.values) if getattr(args, "values", None) else spec.values
        return SweepSpec(base, field_name, values, spec.output_path)
    if getattr(args, "field", None) and getattr(args, "values", None):
        return SweepSpec(base, args.field, tuple(args.values))
    return base


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="noma-access", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def sim_flags(p):
        p.add_argument("--config", required=True, help="scenario config file")
        p.add_argument("--out", help="output CSV (default: stdout)")
        p.add_argument("--seed", type=int, help="override master_seed")
        p.add_argument("--replications", type=int, help="override num_replications")

    sim_flags(sub.add_parser("run", help="simulate one scenario (or the sweep it describes)"))
    sweep = sub.add_parser("sweep", help="simulate a scenario over a list of values")
    sim_flags(sweep)
    sweep.add_argument("--field", help="field to sweep, overriding sweep.field")
    sweep.add_argument("--values", type=float, nargs="+", help="values, overriding sweep.values")

    region = sub.add_parser("region", help="two-user NOMA/OMA rate region")
    region.add_argument("--snr1-db", type=float, required=True)
    region.add_argument("--snr2-db", type=float, required=True)
    region.add_argument("--alpha-steps", type=int, default=101)
    region.add_argument("--out")

    maxload = sub.add_parser("maxload", help="tabulate decodable devices per subband")
    maxload.add_argument("--gamma-db", type=float, nargs="+", default=[0, 5, 10, 15, 20, 25, 30])
    maxload.add_argument("--tw", type=float, default=1000.0, help="symbols per subband per frame")
    maxload.add_argument("--msg-bits", type=int, default=1024)
    maxload.add_argument("--model", choices=[m.value for m in LoadModel],
                         default=LoadModel.EQUAL_SHARE.value)
    maxload.add_argument("--collided", type=int, default=0)
    maxload.add_argument("--out")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command in ("run", "sweep"):
            spec = _load(args)
            if args.command == "sweep" and not isinstance(spec, SweepSpec):
                raise ConfigFileError("sweep.field", "sweep needs sweep.field/sweep.values or --field/--values")
            text = run_command(spec)
            out = args.out or (spec.output_path if isinstance(spec, SweepSpec) else None)
        elif args.command == "region":
            text = region_command(args.snr1_db, args.snr2_db, args.alpha_steps)
            out = args.out
        else:
            text = maxload_command(args.gamma_db, args.tw, args.msg_bits, args.model, args.collided)
            out = args.out
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO

    try:
        if out:
            with open(out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
