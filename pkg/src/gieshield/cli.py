"""Command-line entry point: gieshield {run,sweep,threshold,fwhm,modes,estimate,verify}.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .errors import ConfigError, DomainError, NumericError

log = logging.getLogger("gieshield")


def _load(args):
    from . import scenario as sc

    if args.config is None:
        raise ConfigError("--config is required (a YAML path or a shipped recipe name)")
    src = Path(args.config)
    if not src.exists() and args.config in sc.list_recipes():
        src = sc.recipe_path(args.config)
    cfg = sc.load_config(src)
    if args.workers:
        cfg = cfg.with_value("engine.workers", args.workers)
    derived = sc.derived_summary(cfg)
    print("# " + " ".join(f"{k}={v:.6g}" for k, v in derived.items()), file=sys.stderr)
    return cfg


def _stem(cfg, suffix=""):
    return (cfg["name"] or "result") + suffix


def _emit(table, args, stem):
    if args.out:
        csv_path, _ = table.write(args.out, stem)
        print(csv_path)
    else:
        sys.stdout.write(table.to_csv())


def _parse_grid(text: str) -> np.ndarray:
    """'a,b,c' or 'start:stop:n' or 'start:stop:n:log'."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) not in (3, 4):
            raise ConfigError(f"bad grid {text!r}")
        a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
        if len(parts) == 4:
            if parts[3] != "log":
                raise ConfigError(f"bad grid spacing {parts[3]!r}")
            return np.geomspace(a, b, n)
        return np.linspace(a, b, n)
    try:
        return np.array([float(v) for v in text.split(",")])
    except ValueError:
        raise ConfigError(f"bad grid {text!r}") from None


def cmd_run(args):
    from . import scenario as sc

    cfg = _load(args)
    _emit(sc.run(cfg), args, _stem(cfg))


def cmd_sweep(args):
    from . import scenario as sc

    cfg = _load(args)
    table = sc.sweep(cfg, args.param, _parse_grid(args.grid), args.workers)
    _emit(table, args, _stem(cfg, "_sweep"))


def cmd_threshold(args):
    from . import scenario as sc

    cfg = _load(args)
    val = sc.find_threshold(cfg, args.param, (args.lo, args.hi), target=args.target,
                            rtol=args.rtol, log=not args.linear)
    print(json.dumps({"parameter": args.param, "target": args.target, "critical_value": val}))


def cmd_fwhm(args):
    from . import scenario as sc

    cfg = _load(args)
    table = sc.run(cfg)
    idx = None
    if args.near is not None:
        t = table.column(table.columns[0])
        lo = np.searchsorted(t, args.near - args.window)
        hi = np.searchsorted(t, args.near + args.window)
        idx = int(lo) + int(np.argmax(table.column("E_N")[lo:hi]))
    width = sc.peak_fwhm(table, peak_index=idx)
    print(json.dumps({"peak_index": idx, "fwhm": width}))


def cmd_modes(args):
    from . import params as pm
    from . import shield_modes as sm

    spec = sm.ShieldSpec(pm.material(args.material), args.radius, args.thickness, args.temperature)
    text = sm.mode_table_csv(sm.lowest_modes(spec, args.count))
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        path = Path(args.out) / "modes.csv"
        path.write_text(text)
        print(path)
    else:
        sys.stdout.write(text)


def cmd_estimate(args):
    from . import params as pm

    geom = pm.Geometry(args.half_separation, args.radius, args.shield_thickness)
    out = pm.summary(geom, pm.material(args.material), args.b_field, args.dx)
    print(json.dumps(out, indent=2, sort_keys=True, default=float))


def cmd_verify(args):
    from . import golden

    report = golden.verify_all(names=args.case, junit=args.junit, workers=args.workers or 1)
    for line in report.lines():
        print(line)
    if not report.ok:
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gieshield", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, config=True):
        if config:
            sp.add_argument("--config", "-c", help="YAML config path or recipe name")
        sp.add_argument("--out", "-o", help="output directory")
        sp.add_argument("--workers", "-j", type=int, default=None)

    sp = sub.add_parser("run", help="run one scenario")
    common(sp)
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("sweep", help="scan one config parameter")
    common(sp)
    sp.add_argument("--param", required=True, help="dotted path, e.g. noise.deviations.shield_L")
    sp.add_argument("--grid", required=True, help="'a,b,c' or 'start:stop:n[:log]'")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("threshold", help="bisect a parameter for an E_N target")
    common(sp)
    sp.add_argument("--param", required=True)
    sp.add_argument("--lo", type=float, required=True)
    sp.add_argument("--hi", type=float, required=True)
    sp.add_argument("--target", type=float, default=0.0)
    sp.add_argument("--rtol", type=float, default=1e-3)
    sp.add_argument("--linear", action="store_true", help="bisect linearly instead of in log space")
    sp.set_defaults(func=cmd_threshold)

    sp = sub.add_parser("fwhm", help="width of an E_N peak")
    common(sp)
    sp.add_argument("--near", type=float, default=None, help="time (s) near the peak")
    sp.add_argument("--window", type=float, default=1e-3)
    sp.set_defaults(func=cmd_fwhm)

    sp = sub.add_parser("modes", help="plate-mode table")
    common(sp, config=False)
    sp.add_argument("--count", type=int, default=16)
    sp.add_argument("--material", default="niobium")
    sp.add_argument("--radius", type=float, default=1e-2)
    sp.add_argument("--thickness", type=float, default=2e-6)
    sp.add_argument("--temperature", type=float, default=0.0)
    sp.set_defaults(func=cmd_modes)

    sp = sub.add_parser("estimate", help="couplings, time scale and phase rates")
    common(sp, config=False)
    sp.add_argument("--material", default="silica")
    sp.add_argument("--b-field", type=float, default=0.0)
    sp.add_argument("--dx", type=float, default=50e-9)
    sp.add_argument("--half-separation", type=float, default=20e-6)
    sp.add_argument("--radius", type=float, default=10e-6)
    sp.add_argument("--shield-thickness", type=float, default=2e-6)
    sp.set_defaults(func=cmd_estimate)

    sp = sub.add_parser("verify", help="run the golden cases")
    common(sp, config=False)
    sp.add_argument("--case", action="append", help="run only the named case (repeatable)")
    sp.add_argument("--junit", help="write a JUnit XML report here")
    sp.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        rc = args.func(args)
    except (ConfigError, DomainError, KeyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 3
    return int(rc or 0)


if __name__ == "__main__":
    sys.exit(main())
