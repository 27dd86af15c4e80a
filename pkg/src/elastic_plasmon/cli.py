"""Command-line entry point: ``elastoplasmon {spectrum,critical,sweep,cloak,verify}``.

Configuration is a JSON document (``--config``) overridable with repeated
``--set dotted.key=JSON_VALUE``.  Every output file embeds the resolved
configuration and the package version.  Exit codes: 0 success, 1 configuration
error, 2 verification failure, 3 numerical singularity.
"""
from __future__ import annotations

import argparse
import copy
import csv
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .cloaking import ShellConfig, calr_verdict, critical_radius, decaying_source
from .errors import ElastoPlasmonError, PoleError, SingularityError, SingularSystemError
from .kernels import LameParams
from .modes import ModalField, ModeIndex
from .spectrum import (
    BranchKind,
    CriticalBranch,
    PlasmonConfig,
    critical_value,
    np_eigenvalue,
    scan_resonant_degrees,
    sl_eigenvalue,
)
from .transmission import SourceData, modal_source_from_family1, resonance_sweep

EXIT_OK, EXIT_CONFIG, EXIT_VERIFY, EXIT_SINGULAR = 0, 1, 2, 3

DEFAULTS = {
    "spectrum": {"background": {"lambda": 2.0, "mu": 1.0}, "n_max": 10},
    "critical": {"background": {"lambda": 2.0, "mu": 1.0}, "n_max": 10, "eps1": 1.0, "eps2": [-3.0, 1.0, 2.0]},
    "sweep": {
        "background": {"lambda": 2.0, "mu": 1.0},
        "eps1": 1.0,
        "eps2": -2.5,
        "r0": 1.0,
        "deltas": {"start": 1e-3, "stop": 1e-6, "num": 7},
        "source": {"family1": [[3, 0, 1.0, 0.0]]},
    },
    "cloak": {
        "background": {"lambda": 2.0, "mu": 1.0},
        "r_i": 0.5,
        "r_e": 1.0,
        "eps1": 1.0,
        "eps3": 1.0,
        "source": {"decay_factor": 0.8, "n_max": 70, "orders": [0]},
        "deltas": {"start": 1e-2, "stop": 1e-8, "num": 13},
        "blowup_factor": 1e3,
        "bound_factor": 10.0,
        "sample_factor": 1.1,
    },
    "verify": {
        "background": {"lambda": 2.0, "mu": 1.0},
        "suite": ["split", "eigen", "jump", "energy", "cloak"],
        "eigen_n_max": 4,
        "cloak_instances": 50,
    },
}


class ConfigError(ElastoPlasmonError):
    pass


# ---------------------------------------------------------------- formatting


def fmt(x) -> str:
    """17 significant digits in scientific notation."""
    return format(float(x), ".16e")


def _json_value(v) -> str:
    if isinstance(v, (bool, np.bool_)) or v is None:
        return json.dumps(None if v is None else bool(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return fmt(v) if math.isfinite(v) else json.dumps(str(float(v)))
    if isinstance(v, (complex, np.complexfloating)):
        v = complex(v)
        return _json_value({"re": v.real, "im": v.imag})
    if isinstance(v, str):
        return json.dumps(v, ensure_ascii=False)
    if isinstance(v, dict):
        items = ", ".join(f"{json.dumps(str(k))}: {_json_value(v[k])}" for k in sorted(v, key=str))
        return "{" + items + "}"
    if isinstance(v, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_json_value(x) for x in v) + "]"
    raise TypeError(f"cannot serialize {type(v)}")


def dumps(obj) -> str:
    """Deterministic JSON with fixed float formatting."""
    return _json_value(obj) + "\n"


def _header(cfg: dict) -> str:
    return f"# version: {__version__}\n# config: {json.dumps(cfg, sort_keys=True)}\n"


def _write(out_dir: Path, name: str, text: str) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / name
    path.write_text(text, encoding="utf-8")
    return path


# ---------------------------------------------------------------- config


def _set_dotted(cfg: dict, key: str, value) -> None:
    parts = key.split(".")
    cur = cfg
    for p in parts[:-1]:
        cur = cur.setdefault(p, {})
    cur[parts[-1]] = value


def resolve_config(command: str, path: str | None, overrides: list[str]) -> dict:
    cfg = copy.deepcopy(DEFAULTS[command])
    if path:
        try:
            user = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(user, dict):
            raise ConfigError("config root must be an object")
        cfg.update(user)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not key=value")
        key, raw = item.split("=", 1)
        try:
            val = json.loads(raw)
        except json.JSONDecodeError:
            val = raw
        _set_dotted(cfg, key, val)
    return cfg


def _background(cfg: dict) -> LameParams:
    bg = cfg.get("background", {})
    try:
        return LameParams.background(float(bg["lambda"]), float(bg["mu"]))
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"background needs numeric lambda and mu: {exc}") from exc


def _deltas(spec) -> list[float]:
    if isinstance(spec, list):
        vals = [float(v) for v in spec]
    elif isinstance(spec, dict):
        vals = list(np.logspace(math.log10(spec["start"]), math.log10(spec["stop"]), int(spec["num"])))
    else:
        raise ConfigError("deltas must be a list or {start, stop, num}")
    if not vals or any(v <= 0 for v in vals):
        raise ConfigError("deltas must be positive")
    return [float(v) for v in vals]


def _source(cfg: dict, bg: LameParams, r0: float) -> SourceData:
    src = cfg.get("source", {})
    if "family1" in src:
        table = {(int(n), int(m)): complex(re, im) for n, m, re, im in src["family1"]}
        for n, m in table:
            ModeIndex(1, n, m)
        return modal_source_from_family1(table, r0, bg, max([n for n, _ in table] + [1]))
    if "modal" in src:
        h = ModalField.from_json(json.dumps(src["modal"]["h"]))
        g = ModalField.from_json(json.dumps(src["modal"]["g"]))
        return SourceData(h, g, r0)
    raise ConfigError("source needs 'family1' or 'modal'")


# ---------------------------------------------------------------- commands


def cmd_spectrum(cfg: dict, out: Path, pool) -> int:
    bg = _background(cfg)
    n_max = int(cfg["n_max"])
    if n_max < 1:
        raise ConfigError("n_max must be >= 1")
    buf = io.StringIO()
    buf.write(_header(cfg))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["family", "n", "xi", "e"])
    for family in (1, 2, 3):
        for n in range(1, n_max + 1):
            w.writerow([family, n, fmt(np_eigenvalue(family, n, bg).real), fmt(sl_eigenvalue(family, n, bg).real)])
    _write(out, "spectrum.csv", buf.getvalue())
    return EXIT_OK


def critical_catalog(bg: LameParams, n_max: int, eps1: float, eps2_values) -> list[dict]:
    rows = []
    for kind in BranchKind:
        others = [eps1] if kind is not BranchKind.C3 else list(eps2_values)
        low = 2 if kind in (BranchKind.C1, BranchKind.C22) else 1
        for other in others:
            for n in range(low, n_max + 1):
                br = CriticalBranch(kind, n)
                try:
                    val = critical_value(br, other, bg)
                except PoleError:
                    val = float("nan")
                rows.append({"branch": kind.value, "n": n, "eps_other": other, "target": br.target, "value": val})
    return rows


def cmd_critical(cfg: dict, out: Path, pool) -> int:
    bg = _background(cfg)
    eps2 = cfg["eps2"] if isinstance(cfg["eps2"], list) else [cfg["eps2"]]
    rows = critical_catalog(bg, int(cfg["n_max"]), float(cfg["eps1"]), [float(v) for v in eps2])
    buf = io.StringIO()
    buf.write(_header(cfg))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["branch", "n", "eps_other", "target", "value"])
    for r in rows:
        w.writerow([r["branch"], r["n"], fmt(r["eps_other"]), r["target"], fmt(r["value"])])
    _write(out, "critical.csv", buf.getvalue())
    return EXIT_OK


def cmd_sweep(cfg: dict, out: Path, pool) -> int:
    bg = _background(cfg)
    r0 = float(cfg.get("r0", 1.0))
    deltas = _deltas(cfg["deltas"])
    src = _source(cfg, bg, r0)
    pc = PlasmonConfig(float(cfg["eps1"]), float(cfg["eps2"]), deltas[0], bg, r0)
    rep = resonance_sweep(src, pc, deltas, pool.map)
    rep.config = cfg
    _write(out, "sweep.csv", rep.to_csv(_header(cfg)))
    hits = scan_resonant_degrees(pc.eps1, pc.eps2, bg, max(src.n_max, 2))
    meta = rep.metadata()
    meta.update({"version": __version__, "resonant_modes": [h.as_dict() for h in hits]})
    _write(out, "sweep.json", dumps(meta))
    return EXIT_OK


def cmd_cloak(cfg: dict, out: Path, pool) -> int:
    bg = _background(cfg)
    r_i, r_e = float(cfg["r_i"]), float(cfg["r_e"])
    deltas = _deltas(cfg["deltas"])
    src = cfg["source"]
    rstar = critical_radius(r_i, r_e)
    r_s = float(src["decay_radius"]) if "decay_radius" in src else float(src["decay_factor"]) * rstar
    table = decaying_source(r_s, r_e, int(src["n_max"]), tuple(int(m) for m in src.get("orders", [0])))
    template = ShellConfig.preset(r_i, r_e, deltas[0], bg, None, float(cfg["eps1"]), float(cfg["eps3"]))
    rep = calr_verdict(
        table,
        r_s,
        template,
        deltas,
        float(cfg["blowup_factor"]),
        float(cfg["bound_factor"]),
        float(cfg["sample_factor"]),
        pool.map,
    )
    _write(out, "cloak.csv", rep.to_csv(_header(cfg)))
    payload = rep.as_dict()
    payload.update({"config": cfg, "version": __version__})
    _write(out, "cloak.json", dumps(payload))
    return EXIT_OK


def run_verify_suite(bg: LameParams, suite, eigen_n_max: int = 4, cloak_instances: int = 50, seed: int = 0, pool_map=map) -> list[dict]:
    """Run the selected oracle checks and return JSON-ready reports."""
    from . import oracle
    from .cloaking import modal_system_solve, shell_coefficients
    from .transmission import DensityPair, dissipated_energy

    rng = np.random.default_rng(seed)
    reports = []
    if "split" in suite:
        reports.append(oracle.verify_gamma_split(None, bg).as_dict())
    if "eigen" in suite:
        idxs = [ModeIndex(f, n, min(1, n - 1) if f == 3 else min(1, n)) for f in (1, 2, 3) for n in range(1, eigen_n_max + 1)]

        def one(idx):
            rep = oracle.verify_eigenrelation(idx, 1.0, bg)
            d = rep.as_dict()
            d["pass"] = bool(rep.passed and rep.extra["traction_rel_error"] <= 1e-3)
            return d

        reports.extend(pool_map(one, idxs))
    if "jump" in suite:
        dens = [ModalField(1, {ModeIndex(1, 1, 0): 1.0}, "raw"), ModalField(1, {ModeIndex(2, 1, 0): 1.0}, "raw")]
        mixed = {ModeIndex(f, n, 0): complex(*rng.normal(size=2)) for f in (1, 2, 3) for n in (1, 2, 3)}
        dens.append(ModalField(3, mixed, "raw"))
        reports.extend(pool_map(lambda d: oracle.verify_jump(d, 1.0, bg).as_dict(), dens))
    if "energy" in suite:
        cfg = PlasmonConfig(1.0, -2.5, 1e-2, bg, 1.0)
        phi = ModalField(3, {ModeIndex(1, 3, 1): 1.0 + 0.5j, ModeIndex(1, 2, 0): 0.3}, "hstar")
        modal = dissipated_energy(DensityPair(phi, ModalField(3, {}, "hstar")), cfg)
        vol = oracle.density_volume_energy(phi, cfg)
        rel = abs(modal - vol) / abs(vol)
        reports.append(
            oracle.VerificationReport("volume_energy", {"eps1": 1.0, "eps2": -2.5, "delta": 1e-2}, vol, modal, rel, rel <= 1e-4).as_dict()
        )
    if "cloak" in suite:
        worst = 0.0
        for _ in range(cloak_instances):
            n = int(rng.integers(2, 21))
            c = ShellConfig(rng.uniform(0.1, 0.9), 1.0, 1.0, rng.uniform(-5, 5), 1.0, rng.uniform(0.1, 10), 10 ** rng.uniform(-6, -1), bg)
            a, b = shell_coefficients(n, 0, 1.0, c), modal_system_solve(n, 0, 1.0, c)
            # relative to the largest density: psi cancels near the homogeneous case
            worst = max(worst, float(np.max(np.abs(a.densities() - b.densities())) / np.max(np.abs(b.densities()))))
        reports.append(
            oracle.VerificationReport("cloak_closed_form", {"instances": cloak_instances}, worst, 0.0, worst, worst <= 1e-10).as_dict()
        )
    return reports


def cmd_verify(cfg: dict, out: Path, pool, seed: int = 0) -> int:
    bg = _background(cfg)
    suite = cfg["suite"] if isinstance(cfg["suite"], list) else [cfg["suite"]]
    known = set(DEFAULTS["verify"]["suite"])
    if not set(suite) <= known:
        raise ConfigError(f"unknown checks {sorted(set(suite) - known)}")
    reports = run_verify_suite(bg, suite, int(cfg["eigen_n_max"]), int(cfg["cloak_instances"]), seed, pool.map)
    ok = all(r["pass"] for r in reports)
    _write(out, "verify.json", dumps({"version": __version__, "config": cfg, "all_pass": ok, "reports": reports}))
    return EXIT_OK if ok else EXIT_VERIFY


COMMANDS = {
    "spectrum": cmd_spectrum,
    "critical": cmd_critical,
    "sweep": cmd_sweep,
    "cloak": cmd_cloak,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="elastoplasmon", description="Spectra, resonance sweeps and cloaking checks for elastic plasmonic inclusions.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", help="JSON config file")
        s.add_argument("--out", default=".", help="output directory")
        s.add_argument("--threads", type=int, default=1, help="worker threads for sweeps")
        s.add_argument("--seed", type=int, default=0, help="seed for randomized checks")
        s.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a config entry")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args.command, args.config, args.set)
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        out = Path(args.out)
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            if args.command == "verify":
                return cmd_verify(cfg, out, pool, args.seed)
            return COMMANDS[args.command](cfg, out, pool)
    except (SingularSystemError, SingularityError, PoleError) as exc:
        print(f"numerical singularity: {exc}", file=sys.stderr)
        return EXIT_SINGULAR
    except (ElastoPlasmonError, KeyError, TypeError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
