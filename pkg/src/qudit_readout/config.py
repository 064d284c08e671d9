"""
Run configuration and device catalogs.

Configs are INI-style text with sections. Frequencies in files are in
GHz (``f = omega / 2 pi``) and are converted to rad/s on load; ``T`` is
in microseconds. Example::

    [run]
    seed = 7

    [transmon]
    ej_over_ec = 45.6
    ec = 0.2915
    levels = 5

    [coupling]
    g = 0.1
    omega_r = 7.25

    [readout]
    kappa = 0.005
    omega = 0.1
    T = 0.35
"""

import configparser
import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import NoRootError, ParseError, QuditReadoutError, ValidationError
from .spectrum import TransmonParams, charge_dispersion, eigenenergies, fit_ej_ec
from .units import GHZ

FREQUENCY_KEYS = {"ec", "omega01", "alpha1", "g", "omega_r", "kappa", "omega",
                  "omega_d", "omega_m", "chi", "span"}
TEXT_KEYS = {"method", "frame", "energy_mode", "centers", "matrices", "counts",
             "devices", "format", "out_dir"}

REQUIRED = {
    "spectrum": {"transmon": ()},
    "shifts": {"transmon": (), "coupling": ("g", "omega_r")},
    "readout-sweep": {"readout": ("omega_r", "kappa", "omega")},
    "assignment": {"assignment": ()},
    "infer": {"inference": ("matrices", "counts")},
    "strategy-compare": {"readout": ("omega_r", "omega"), "strategy": ("kappa", "sigma_rel")},
    "catalog": {"catalog": ("devices",)},
}


def _convert(section, key, text):
    if key in TEXT_KEYS:
        return text.strip()
    try:
        values = [float(v) for v in text.replace(";", ",").split(",") if v.strip()]
    except ValueError as exc:
        raise ValidationError(key, f"[{section}] {key}: not a number: {text!r}") from exc
    if not values:
        raise ValidationError(key, f"[{section}] {key}: empty value")
    if key in FREQUENCY_KEYS:
        values = [v * GHZ for v in values]
    elif key == "T":
        values = [v * 1e-6 for v in values]
    return values[0] if len(values) == 1 else tuple(values)


@dataclass
class RunConfig:
    """Validated configuration: typed values per section, frequencies in rad/s."""

    sections: dict
    seed: int | None = None
    source: str = ""
    path: str | None = None
    extra: dict = field(default_factory=dict)

    def section(self, name: str) -> dict:
        return self.sections.get(name, {})

    def get(self, section: str, key: str, default=None):
        return self.sections.get(section, {}).get(key, default)

    def require(self, section: str, key: str):
        try:
            return self.sections[section][key]
        except KeyError:
            raise ValidationError(key, f"missing [{section}] {key}") from None


def parse_config(text: str, command: str | None = None, path: str | None = None) -> RunConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"),
                                       interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(text, source=path or "<config>")
    except configparser.MissingSectionHeaderError as exc:
        raise ParseError(f"line {exc.lineno}: expected a [section] header, got {exc.line!r}") from exc
    except configparser.ParsingError as exc:
        lineno, line = exc.errors[0]
        raise ParseError(f"line {lineno}: cannot parse {line!r}") from exc
    except configparser.Error as exc:
        raise ParseError(str(exc)) from exc

    sections = {}
    for name in parser.sections():
        sections[name] = {k: _convert(name, k, v) for k, v in parser.items(name)}
    # readout keys may borrow the resonator frequency from [coupling]
    if "omega_r" in sections.get("coupling", {}):
        sections.setdefault("readout", {}).setdefault("omega_r", sections["coupling"]["omega_r"])

    seed = sections.get("run", {}).get("seed")
    cfg = RunConfig(sections, None if seed is None else int(seed), text, path)
    if command is not None:
        validate(cfg, command)
    return cfg


def load_config(path, command: str | None = None) -> RunConfig:
    """Read and validate a config file; see :func:`validate`."""
    path = Path(path)
    return parse_config(path.read_text(), command, str(path))


def validate(cfg: RunConfig, command: str) -> RunConfig:
    """Check the keys ``command`` needs; raises :class:`ValidationError` naming the field."""
    if command not in REQUIRED:
        raise ValidationError("command", f"unknown command {command!r}")
    for section, keys in REQUIRED[command].items():
        for key in keys:
            cfg.require(section, key)
    if command in ("spectrum", "shifts"):
        transmon = cfg.section("transmon")
        if "ej_over_ec" not in transmon and not {"omega01", "alpha1"} <= set(transmon):
            raise ValidationError("ej_over_ec", "[transmon] needs ej_over_ec or omega01 + alpha1")
    readout = cfg.section("readout")
    if "kappa" in readout and not np.all(np.asarray(readout["kappa"]) > 0):
        raise ValidationError("kappa", "kappa must be positive")
    stochastic = command in ("strategy-compare", "infer") or (
        command == "assignment" and cfg.get("assignment", "method", "owen") == "mc")
    if stochastic and cfg.seed is None:
        raise ValidationError("seed", "stochastic runs need [run] seed or --seed")
    return cfg


def transmon_from_config(cfg: RunConfig) -> TransmonParams:
    sec = cfg.section("transmon")
    n_cut = int(sec.get("n_cut", 15))
    if "ej_over_ec" in sec:
        return TransmonParams(float(sec["ej_over_ec"]), ec=sec.get("ec"), n_cut=n_cut)
    ratio, ec = fit_ej_ec(sec["omega01"], sec["alpha1"], n_cut=n_cut)
    return TransmonParams(ratio, ec=ec, n_cut=n_cut)


@dataclass(frozen=True)
class DeviceRecord:
    """One catalog row; frequencies in rad/s."""

    name: str
    omega01: float
    alpha1: float
    omega_r: float
    kappa: float
    g: float | None = None
    omega: float | None = None
    T: float | None = None
    sigma: float | None = None
    ej_over_ec: float | None = None
    ec: float | None = None
    epsilon3: float | None = None

    def __post_init__(self):
        for name in ("omega01", "omega_r", "kappa"):
            if not getattr(self, name) > 0:
                raise ValidationError(name, f"{name} must be positive")
        if not self.alpha1 < 0:
            raise ValidationError("alpha1", "alpha1 must be negative")


_OPTIONAL = {"g": GHZ, "omega": GHZ, "T": 1e-6, "sigma": 1.0}


def device_catalog(path, n_cut: int = 15):
    """Devices with fitted ``E_J/E_C`` and third-level charge dispersion.

    Returns ``(records, errors)``. Records are sorted by increasing
    ``|epsilon_3|`` (least charge-sensitive first); rows that fail to parse
    or fit are reported in ``errors`` as ``(line, message)`` and skipped.
    """
    records, errors = [], []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for line, row in enumerate(reader, start=2):
            try:
                try:
                    base = {k: float(row[k]) * GHZ for k in ("omega01", "alpha1", "omega_r", "kappa")}
                except KeyError as exc:
                    raise ValidationError(exc.args[0], f"missing column {exc.args[0]}") from None
                except (TypeError, ValueError) as exc:
                    raise ValidationError("row", f"non-numeric value: {exc}") from None
                opts = {k: float(row[k]) * s for k, s in _OPTIONAL.items() if row.get(k)}
                rec = DeviceRecord(row.get("name", f"row{line}"), **base, **opts)
                ratio, ec = fit_ej_ec(rec.omega01, rec.alpha1, n_cut=n_cut)
                spectrum = eigenenergies(TransmonParams(ratio, ec=ec, n_cut=n_cut), 4)
                eps3 = charge_dispersion(spectrum, 3)
                records.append(DeviceRecord(**{**rec.__dict__, "ej_over_ec": ratio,
                                               "ec": ec, "epsilon3": eps3}))
            except (QuditReadoutError, NoRootError, ValueError) as exc:
                errors.append((line, str(exc)))
    records.sort(key=lambda r: abs(r.epsilon3))
    return records, errors
