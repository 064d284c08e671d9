"""
Command-line entry point: ``qudit-readout [global flags] <subcommand> [flags]``.

Every run writes its tables plus a ``manifest.json`` recording the
config text, flag overrides, seed and package version. Passing that
manifest back with ``--replay`` reproduces the run byte for byte.
"""

import argparse
import csv
import hashlib
import json
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .assignment import (GaussianCloud, assignment_matrix_mc, assignment_matrix_owen,
                         error_measures)
from .config import (REQUIRED, RunConfig, device_catalog, parse_config,
                     transmon_from_config, validate)
from .dispersive import dispersive_model, two_photon_factor
from .errors import ParseError, QuditReadoutError, ValidationError
from .inference import (PopulationPosterior, posterior_mode, posterior_sd,
                        simplex_least_squares)
from .output import FORMATS, Table, emit
from .readout import (ReadoutConfig, circle_center, steady_amp_drive_frame,
                      steady_amp_general_frame)
from .spectrum import (TransmonParams, anharmonicity, charge_dispersion, eigenenergies,
                       frequency_difference, levels_at, transition_frequency)
from .strategies import StrategyScenario, default_grid, sweep_ratio
from .units import GHZ

# flag -> (section, key); values are given in the same units as config files
FLAG_KEYS = {
    "ej_ec": ("transmon", "ej_over_ec"), "ec": ("transmon", "ec"),
    "omega01": ("transmon", "omega01"), "alpha1": ("transmon", "alpha1"),
    "ng": ("transmon", "n_g"), "levels": ("transmon", "levels"),
    "n_cut": ("transmon", "n_cut"),
    "g": ("coupling", "g"), "omega_r": ("coupling", "omega_r"),
    "qudit_drive": ("shifts", "omega_d"), "chi": ("dispersive", "chi"),
    "kappa": ("readout", "kappa"), "amplitude": ("readout", "omega"),
    "omega_m": ("readout", "omega_m"), "points": ("readout", "points"),
    "centers": ("assignment", "centers"), "sigma": ("assignment", "sigma"),
    "sigma_rel": ("assignment", "sigma_rel"), "method": ("assignment", "method"),
    "n_samples": ("assignment", "n_samples"), "readout_drive": ("assignment", "omega_d"),
    "matrices": ("inference", "matrices"), "counts": ("inference", "counts"),
    "samples": ("inference", "samples"),
    "workers": ("strategy", "workers"), "seeds": ("strategy", "seeds"),
    "devices": ("catalog", "devices"),
}


def _ini_value(value) -> str:
    if isinstance(value, (list, tuple)):
        return ", ".join(str(v) for v in value)
    return str(value)


def build_config(text: str, overrides: dict, seed, command: str) -> RunConfig:
    """Merge flag overrides into the config text, then parse and validate."""
    extra = {}
    for flag, value in overrides.items():
        section, key = FLAG_KEYS[flag]
        extra.setdefault(section, []).append(f"{key} = {_ini_value(value)}")
    # overrides are parsed separately and merged key by key
    cfg = parse_config(text)
    if extra:
        over = parse_config("\n".join(f"[{s}]\n" + "\n".join(lines) for s, lines in extra.items()))
        for section, values in over.sections.items():
            cfg.sections.setdefault(section, {}).update(values)
    if seed is not None:
        cfg.seed = int(seed)
    return validate(cfg, command)


def _levels(cfg, default):
    return int(cfg.get("transmon", "levels", default))


def _transmon(cfg) -> TransmonParams:
    sec = cfg.section("transmon")
    if "ej_over_ec" in sec and "ec" not in sec:
        raise ValidationError("ec", "[transmon] ec is needed to report energies in GHz")
    return transmon_from_config(cfg)


def _bare_energies(cfg, d):
    p = _transmon(cfg)
    mode = cfg.get("transmon", "energy_mode", "ng0")
    return eigenenergies(p, d + 1).energies(mode)


def _chi(cfg, d):
    """Dispersive shifts from ``[dispersive] chi`` or from the transmon model."""
    chi = cfg.get("dispersive", "chi")
    if chi is not None:
        return np.atleast_1d(np.asarray(chi, dtype=float))
    if "transmon" not in cfg.sections:
        raise ValidationError("chi", "give [dispersive] chi or a [transmon] section")
    g = cfg.require("coupling", "g")
    omega_r = cfg.require("coupling", "omega_r")
    return dispersive_model(_bare_energies(cfg, d), g, omega_r, d).chi


def cmd_spectrum(cfg):
    p = _transmon(cfg)
    d = _levels(cfg, 5)
    n_gs = np.atleast_1d(cfg.get("transmon", "n_g", (0.0, 0.5)))
    energies = Table(("n_g", "level_index", "energy_GHz"), [])
    for n_g in n_gs:
        levels = levels_at(TransmonParams(p.ej_over_ec, p.ec, float(n_g), p.n_cut), d)
        energies.rows.extend((float(n_g), k, e / GHZ) for k, e in enumerate(levels))
    s = eigenenergies(p, d)
    derived = Table(("i", "j", "omega_ij_GHz", "delta_omega_ij_GHz", "alpha_GHz", "epsilon_GHz"), [])
    for j in range(1, d):
        alpha = anharmonicity(s, j) / GHZ if j <= d - 2 else float("nan")
        derived.rows.append((j - 1, j, transition_frequency(s, j - 1, j) / GHZ,
                             frequency_difference(s, j - 1, j) / GHZ, alpha,
                             charge_dispersion(s, j) / GHZ))
    return {"spectrum_levels": energies, "spectrum_derived": derived}


def cmd_shifts(cfg):
    d = _levels(cfg, 4)
    model = dispersive_model(_bare_energies(cfg, d), cfg.require("coupling", "g"),
                             cfg.require("coupling", "omega_r"), d)
    omega_d = cfg.get("shifts", "omega_d")
    table = Table(("j", "chi_pair_GHz", "chi_GHz", "omega_tilde_GHz", "f_j"), [])
    for j in range(d):
        f = float("nan")
        if omega_d is not None and j + 2 < d:
            try:
                # 1/GHz so that f * Omega^2 stays in file units
                f = two_photon_factor(model.omega_tilde, omega_d, j) * GHZ
            except QuditReadoutError:
                pass
        table.rows.append((j, model.chi_pair[j] / GHZ, model.chi[j] / GHZ,
                           model.omega_tilde[j] / GHZ, f))
    return {"shifts": table}


def _readout(cfg, kappa=None) -> ReadoutConfig:
    sec = cfg.section("readout")
    return ReadoutConfig(omega_r=cfg.require("readout", "omega_r"),
                         kappa=sec["kappa"] if kappa is None else kappa,
                         omega=cfg.require("readout", "omega"),
                         T=sec.get("T", 0.35e-6), phi=sec.get("phi", 0.0))


def cmd_readout_sweep(cfg):
    chi = _chi(cfg, _levels(cfg, 4))
    rc = _readout(cfg)
    omega_m = cfg.get("readout", "omega_m", rc.omega_r + 0.5 * (chi[0] + chi[1]))
    grid = default_grid(chi, rc, int(cfg.get("readout", "points", 401)))
    drive = steady_amp_drive_frame(rc, chi, grid[:, None])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        modulated = steady_amp_general_frame(rc, chi, grid[:, None], omega_m)
    table = Table(("omega_d_GHz", "state_j", "re", "im", "frame"), [])
    for frame, amps in (("drive", drive), ("modulation", modulated)):
        for k, w in enumerate(grid):
            for j in range(len(chi)):
                table.rows.append((w / GHZ, j, amps[k, j].real, amps[k, j].imag, frame))
    return {"readout_sweep": table}


def _read_centers(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    try:
        return np.array([complex(float(r["re"]), float(r["im"])) for r in rows])
    except (KeyError, ValueError) as exc:
        raise ParseError(f"{path}: centre files need numeric 're' and 'im' columns") from exc


def cmd_assignment(cfg):
    sec = cfg.section("assignment")
    if "centers" in sec:
        centers = _read_centers(sec["centers"])
        apex = None
    else:
        chi = _chi(cfg, _levels(cfg, 4))
        rc = _readout(cfg)
        omega_d = sec.get("omega_d", rc.omega_r + 0.5 * (chi[0] + chi[1]))
        centers = steady_amp_drive_frame(rc, chi, omega_d)
        apex = circle_center(rc)
    if "sigma" in sec:
        sigma = float(sec["sigma"])
    elif "sigma_rel" in sec and apex is not None:
        sigma = float(sec["sigma_rel"]) * rc.diameter
    else:
        raise ValidationError("sigma", "give [assignment] sigma (or sigma_rel with a readout model)")
    clouds = [GaussianCloud(c, sigma) for c in centers]
    method = sec.get("method", "owen")
    if method == "owen":
        result = assignment_matrix_owen(clouds, apex)
    elif method == "mc":
        result = assignment_matrix_mc(clouds, int(sec.get("n_samples", 100_000)), seed=cfg.seed)
    else:
        raise ValidationError("method", "method must be 'owen' or 'mc'")
    d = len(centers)
    m = Table(("classified_i",) + tuple(f"prepared_{j}" for j in range(d)),
              [(i, *result.m[i]) for i in range(d)])
    xi_j, xi = error_measures(result.m)
    xi_table = Table(("state_j", "xi"), [(j, v) for j, v in enumerate(xi_j)] + [("mean", xi)])
    return {"assignment_matrix": m, "assignment_xi": xi_table}


def _read_blocks(path, kind):
    """Matrices (``block,i,j,value``) or counts (``block,state,count``) by block.

    A headerless numeric file is a single block: a ``d x d`` matrix or one
    row of counts.
    """
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if not rows:
        raise ParseError(f"{path}: empty file")
    try:
        float(rows[0][0])
        data = np.array([[float(v) for v in r] for r in rows])
        return [data if kind == "matrix" else data.ravel()]
    except ValueError:
        pass
    header = [h.strip() for h in rows[0]]
    blocks = {}
    try:
        for line, r in enumerate(rows[1:], start=2):
            rec = dict(zip(header, r))
            b = int(rec.get("block", 0))
            if kind == "matrix":
                blocks.setdefault(b, {})[(int(rec["i"]), int(rec["j"]))] = float(rec["value"])
            else:
                blocks.setdefault(b, {})[int(rec["state"])] = float(rec["count"])
    except (KeyError, ValueError) as exc:
        raise ParseError(f"{path}:{line}: cannot read {kind} row {r!r}") from exc
    out = []
    for b in sorted(blocks):
        entries = blocks[b]
        if kind == "matrix":
            d = 1 + max(max(k) for k in entries)
            m = np.zeros((d, d))
            for (i, j), v in entries.items():
                m[i, j] = v
            out.append(m)
        else:
            d = 1 + max(entries)
            out.append(np.array([entries.get(k, 0.0) for k in range(d)]))
    return out


def cmd_infer(cfg):
    sec = cfg.section("inference")
    mats = _read_blocks(sec["matrices"], "matrix")
    counts = _read_blocks(sec["counts"], "counts")
    post = PopulationPosterior(mats, counts)
    modes = [posterior_mode(m, c) for m, c in zip(post.matrices, post.counts)]
    stacked = np.vstack(post.matrices)
    freqs = np.concatenate([c / c.sum() for c in post.counts])
    if len(modes) == 1 and modes[0].in_simplex:
        mitigated = modes[0].p
    else:
        mitigated = simplex_least_squares(stacked, freqs)
    sd = posterior_sd(post, int(sec.get("samples", 20_000)), seed=cfg.seed)
    return {"infer": {
        "d": post.d,
        "blocks": len(post.matrices),
        "mode": [m.p for m in modes],
        "mode_in_simplex": [m.in_simplex for m in modes],
        "mitigated": mitigated,
        "posterior_mean": sd.mean,
        "sd": sd.sd,
        "average_sd": sd.average_sd,
        "ess": sd.ess,
        "condition_numbers": post.condition_numbers(),
    }}


def cmd_strategy_compare(cfg):
    sec = cfg.section("strategy")
    d = _levels(cfg, 4)
    chi = _chi(cfg, d)
    kappas = np.atleast_1d(sec["kappa"])
    base = _readout(cfg, kappa=float(kappas[0]))
    rel = np.atleast_1d(cfg.require("strategy", "sigma_rel"))
    populations = sec.get("populations")
    template = StrategyScenario(chi=chi, readout=base, sigma=1.0,
                                n_shots=int(sec.get("n_shots", 1000)),
                                populations=None if populations is None else np.atleast_1d(populations),
                                seed=cfg.seed, grid_points=int(sec.get("points", 401)),
                                sd_samples=int(sec.get("sd_samples", 20_000)))
    table = Table(("kappa_GHz", "sigma", "sd_single", "sd_multi", "ratio", "flagged"), [])
    seeds = int(sec.get("seeds", 8))
    workers = int(sec.get("workers", 1))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for kappa in kappas:
            sigmas = [r * base.omega / kappa for r in rel]
            for r, pt in zip(rel, sweep_ratio([kappa], sigmas, template, seeds, workers)):
                table.rows.append((kappa / GHZ, r, pt.sd_single, pt.sd_multi, pt.ratio, pt.flagged))
    return {"strategy_compare": table}


def cmd_catalog(cfg):
    records, errors = device_catalog(cfg.section("catalog")["devices"],
                                     int(cfg.get("transmon", "n_cut", 15)))
    table = Table(("name", "omega01_GHz", "alpha1_GHz", "ej_over_ec", "ec_GHz", "epsilon3_GHz"),
                  [(r.name, r.omega01 / GHZ, r.alpha1 / GHZ, r.ej_over_ec, r.ec / GHZ,
                    r.epsilon3 / GHZ) for r in records])
    for line, message in errors:
        print(f"catalog line {line}: {message}", file=sys.stderr)
    return {"catalog": table,
            "catalog_errors": Table(("line", "message"), [list(e) for e in errors])}


COMMANDS = {
    "spectrum": cmd_spectrum, "shifts": cmd_shifts, "readout-sweep": cmd_readout_sweep,
    "assignment": cmd_assignment, "infer": cmd_infer,
    "strategy-compare": cmd_strategy_compare, "catalog": cmd_catalog,
}
assert set(COMMANDS) == set(REQUIRED)


def _floats(text):
    return [float(v) for v in text.split(",")]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS, help="INI config file")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="master seed")
    common.add_argument("--out-dir", default=argparse.SUPPRESS, help="output directory")
    common.add_argument("--format", choices=FORMATS, default=argparse.SUPPRESS)

    parser = argparse.ArgumentParser(prog="qudit-readout", parents=[common],
                                     description="Transmon qudit readout simulations.")
    parser.add_argument("--replay", metavar="MANIFEST",
                        help="rerun the command recorded in a manifest.json")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command")

    def add(name, help_text):
        return sub.add_parser(name, parents=[common], help=help_text)

    p = add("spectrum", "charge-basis transmon levels and derived quantities")
    for sp in (p, add("shifts", "dispersive shifts and dressed levels")):
        sp.add_argument("--ej-ec", type=float, help="E_J/E_C")
        sp.add_argument("--ec", type=float, help="E_C in GHz")
        sp.add_argument("--omega01", type=float, help="0-1 frequency in GHz (fits E_J/E_C)")
        sp.add_argument("--alpha1", type=float, help="anharmonicity in GHz (fits E_J/E_C)")
        sp.add_argument("--levels", type=int, help="number of levels d")
        sp.add_argument("--n-cut", type=int)
    p.add_argument("--ng", type=_floats, help="comma-separated offset charges")
    s = sub.choices["shifts"]
    s.add_argument("--g", type=float, help="coupling in GHz")
    s.add_argument("--omega-r", type=float, help="bare resonator frequency in GHz")
    s.add_argument("--qudit-drive", type=float, help="qudit drive frequency in GHz for f_j")

    p = add("readout-sweep", "steady-state amplitudes across drive frequencies")
    p.add_argument("--chi", type=_floats, help="comma-separated dispersive shifts in GHz")
    p.add_argument("--omega-r", type=float, help="bare resonator frequency in GHz")
    p.add_argument("--kappa", type=float, help="linewidth in GHz")
    p.add_argument("--amplitude", type=float, help="readout drive amplitude Omega in GHz")
    p.add_argument("--omega-m", type=float, help="modulation frequency in GHz")
    p.add_argument("--points", type=int)

    p = add("assignment", "assignment matrix from cloud centres")
    p.add_argument("--centers", help="CSV with re,im columns")
    p.add_argument("--sigma", type=float)
    p.add_argument("--sigma-rel", type=float, help="sigma kappa / Omega")
    p.add_argument("--method", choices=("owen", "mc"))
    p.add_argument("--n-samples", type=int)
    p.add_argument("--readout-drive", type=float, help="readout drive frequency in GHz")

    p = add("infer", "population posterior from counts")
    p.add_argument("--matrices")
    p.add_argument("--counts")
    p.add_argument("--samples", type=int)

    p = add("strategy-compare", "single- vs multi-frequency ratio map")
    p.add_argument("--workers", type=int)
    p.add_argument("--seeds", type=int)

    p = add("catalog", "fit E_J/E_C and charge dispersion for a device list")
    p.add_argument("--devices", help="CSV of devices")
    return parser


def _fingerprint(text: str, overrides: dict) -> str:
    blob = json.dumps({"config": text, "overrides": overrides}, sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()


def _input_digests(cfg):
    files = {}
    for section, key in (("assignment", "centers"), ("inference", "matrices"),
                         ("inference", "counts"), ("catalog", "devices")):
        path = cfg.get(section, key)
        if path and Path(path).is_file():
            files[path] = hashlib.sha256(Path(path).read_bytes()).hexdigest()
    return files


def run(command, config_text="", overrides=None, seed=None, out_dir=".", fmt="both"):
    """Execute one subcommand and write its outputs; returns the written paths."""
    overrides = dict(overrides or {})
    cfg = build_config(config_text, overrides, seed, command)
    results = COMMANDS[command](cfg)
    manifest = {
        "command": command,
        "config": config_text,
        "config_sha256": _fingerprint(config_text, overrides),
        "overrides": overrides,
        "seed": cfg.seed,
        "format": fmt,
        "version": __version__,
        "inputs": _input_digests(cfg),
    }
    return emit(results, out_dir, fmt, manifest)


def main(argv=None) -> int:
    parser = build_parser()
    args = vars(parser.parse_args(argv))
    try:
        replay = args.pop("replay", None)
        if replay is not None:
            manifest = json.loads(Path(replay).read_text())
            command, text = manifest["command"], manifest["config"]
            overrides, seed = manifest["overrides"], manifest["seed"]
            fmt = args.get("format", manifest["format"])
        else:
            command = args.pop("command")
            if command is None:
                parser.error("a subcommand is required")
            text = Path(args["config"]).read_text() if "config" in args else ""
            seed = args.get("seed")
            fmt = args.get("format", "both")
            overrides = {k: v for k, v in args.items()
                         if k in FLAG_KEYS and v is not None}
        paths = run(command, text, overrides, seed, args.get("out_dir", "."), fmt)
    except (ParseError, ValidationError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (QuditReadoutError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for path in paths:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
