"""Experiment configuration, dispatch to the engines, sweeps, thresholds and peak widths.

Configs are YAML (or plain dicts) with a mandatory ``schema_version``; unknown keys
are rejected with the offending path.  All quantities are SI unless a unit key says
otherwise.
"""

from __future__ import annotations

import copy
import csv
import hashlib
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Mapping, Sequence

import numpy as np

from . import cat_engine as ce
from . import fock_engine as fe
from . import gaussian_engine as ge
from . import hamiltonians as hm
from . import params as pm
from . import shield_modes as sm
from .constants import HBAR
from .errors import ConfigError, DomainError, GieError, NumericError

SCHEMA_VERSION = 1
STATE_KINDS = ("gaussian", "two_level_cat", "continuous_cat")
INTERACTIONS = ("gravity", "casimir", "magdipole", "shield_modes", "trap")

# key -> (type, default); a dict value marks a nested section
SCHEMA: dict[str, Any] = {
    "schema_version": (int, None),
    "name": (str, ""),
    "particle": {"material": (str, "silica"), "radius": (float, 10e-6)},
    "shield": {"material": (str, "niobium"), "radius": (float, 1e-2), "thickness": (float, 2e-6),
               "temperature": (float, 0.0)},
    "geometry": {"half_separation": (float, 20e-6), "orientation": (str, "linear"),
                 "theta_A": (float, None), "theta_B": (float, None)},
    "b_field": (float, 0.0),
    "state": {"kind": (str, "gaussian"), "dx": (float, 50e-9), "dy": (float, 0.0), "nbar": (float, 0.0),
              "d": (float, 0.0), "with_y": (bool, False)},
    "interactions": (list, ["gravity"]),
    "trap": {"omega": (float, 0.0), "position_noise": (float, 0.0)},
    "noise": {"kind": (str, "none"), "deviations": (dict, {}), "D_factor": (float, 0.0), "D": (float, 0.0)},
    "time": {"start": (float, 0.0), "stop": (float, 1.0), "points": (int, 11), "unit": (str, "t0"),
             "values": (list, None)},
    "engine": {"quad_order": (int, 20), "fock_n": (int, None), "mode_count": (int, 1),
               "mode_list": (list, None), "cat_model": (str, "first_order"), "seed": (int, 0),
               "workers": (int, 1), "sparse_level": (int, None)},
}


def _coerce(value, typ, path):
    if value is None:
        return None
    try:
        if typ is float:
            if isinstance(value, bool):
                raise TypeError
            return float(value)
        if typ is int:
            if isinstance(value, bool) or (isinstance(value, float) and not value.is_integer()):
                raise TypeError
            return int(value)
        if typ is bool:
            if not isinstance(value, bool):
                raise TypeError
            return value
        if typ is str:
            if isinstance(value, (int, float)) and not isinstance(value, bool):
                return value  # numeric orientation angles are allowed
            if not isinstance(value, str):
                raise TypeError
            return value
        if typ in (list, dict):
            if not isinstance(value, typ):
                raise TypeError
            return copy.deepcopy(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{path}: expected {typ.__name__}, got {value!r}") from None
    return value


def _fill(schema: dict, raw: Mapping, prefix: str = "") -> dict:
    if not isinstance(raw, Mapping):
        raise ConfigError(f"{prefix or 'config'}: expected a mapping")
    unknown = set(raw) - set(schema)
    if unknown:
        raise ConfigError(f"unknown keys {sorted(prefix + k for k in unknown)}")
    out = {}
    for key, spec in schema.items():
        path = prefix + key
        if isinstance(spec, dict):
            out[key] = _fill(spec, raw.get(key) or {}, path + ".")
        else:
            typ, default = spec
            out[key] = _coerce(raw[key], typ, path) if key in raw else copy.deepcopy(default)
    return out


@dataclass(frozen=True)
class ExperimentConfig:
    data: dict

    @classmethod
    def from_mapping(cls, raw: Mapping) -> "ExperimentConfig":
        if "schema_version" not in raw:
            raise ConfigError("schema_version is required")
        data = _fill(SCHEMA, raw)
        if data["schema_version"] != SCHEMA_VERSION:
            raise ConfigError(f"schema_version {data['schema_version']} unsupported (expected {SCHEMA_VERSION})")
        cfg = cls(data)
        cfg.validate()
        return cfg

    def __getitem__(self, key):
        return self.data[key]

    def to_mapping(self) -> dict:
        return copy.deepcopy(self.data)

    def with_value(self, path: str, value) -> "ExperimentConfig":
        raw = self.to_mapping()
        set_path(raw, path, value)
        return ExperimentConfig.from_mapping(raw)

    # --- derived objects ---------------------------------------------------------

    @property
    def particle(self) -> pm.MaterialProps:
        return pm.material(self["particle"]["material"])

    @property
    def geometry(self) -> pm.Geometry:
        g = self["geometry"]
        tA, tB = self.thetas
        return pm.Geometry(g["half_separation"], self["particle"]["radius"], self["shield"]["thickness"],
                           self["shield"]["radius"], tA, tB)

    @property
    def thetas(self) -> tuple[float, float]:
        g = self["geometry"]
        base = hm.orientation_angle(g["orientation"])
        tA = base if g["theta_A"] is None else g["theta_A"]
        tB = base if g["theta_B"] is None else g["theta_B"]
        return tA, tB

    @property
    def mass(self) -> float:
        return pm.particle_mass(self.particle, self["particle"]["radius"])

    def raw_couplings(self) -> pm.CouplingSet:
        return pm.couplings(self.geometry, self.particle, self["b_field"])

    def couplings(self) -> pm.CouplingSet:
        """Couplings with disabled interactions set to zero."""
        cs = self.raw_couplings()
        on = set(self["interactions"])
        return replace(cs, lam=cs.lam if "gravity" in on else 0.0,
                       eta=cs.eta if "casimir" in on else 0.0,
                       delta=cs.delta if "magdipole" in on else 0.0)

    def t0(self) -> float:
        dx = self["state"]["dx"]
        return pm.time_unit(self.raw_couplings().lam, dx)

    def times(self) -> np.ndarray:
        tm = self["time"]
        scale = self.t0() if tm["unit"] == "t0" else 1.0
        if tm["values"] is not None:
            vals = np.array([float(v) for v in tm["values"]])
        else:
            vals = np.linspace(tm["start"], tm["stop"], tm["points"])
        return vals * scale

    def shield_spec(self) -> sm.ShieldSpec:
        s = self["shield"]
        return sm.ShieldSpec(pm.material(s["material"]), s["radius"], s["thickness"], s["temperature"])

    def shield_mode_list(self) -> list[sm.ShieldMode]:
        spec = self.shield_spec()
        eng = self["engine"]
        if eng["mode_list"]:
            return [sm.make_mode(int(k), int(l), spec) for k, l in eng["mode_list"]]
        return sm.lowest_modes(spec, eng["mode_count"])

    def noise_spec(self) -> ge.NoiseSpec | None:
        n = self["noise"]
        if n["kind"] == "none":
            return None
        devs = {k: float(v) for k, v in n["deviations"].items()}
        tr = self["trap"]
        if tr["position_noise"] > 0:
            k = self.mass * tr["omega"] ** 2
            devs.setdefault("trap_A", k * tr["position_noise"])
            devs.setdefault("trap_B", k * tr["position_noise"])
        D = n["D"] if n["D"] > 0 else n["D_factor"] * HBAR * self.raw_couplings().lam
        return ge.NoiseSpec(n["kind"], devs, D)

    def validate(self) -> None:
        d = self.data
        st = d["state"]
        if st["kind"] not in STATE_KINDS:
            raise ConfigError(f"state.kind must be one of {STATE_KINDS}")
        bad = set(d["interactions"]) - set(INTERACTIONS)
        if bad:
            raise ConfigError(f"interactions: unknown entries {sorted(bad)}")
        if d["noise"]["kind"] not in ("none", "quasi_static", "markovian"):
            raise ConfigError("noise.kind must be none, quasi_static or markovian")
        if d["time"]["unit"] not in ("s", "t0"):
            raise ConfigError("time.unit must be 's' or 't0'")
        if d["engine"]["cat_model"] not in ("first_order", "exact"):
            raise ConfigError("engine.cat_model must be first_order or exact")
        if d["time"]["values"] is None and d["time"]["points"] < 1:
            raise ConfigError("time.points must be >= 1")
        if "trap" in d["interactions"] and not d["trap"]["omega"] > 0:
            raise ConfigError("trap.omega must be positive when the trap is enabled")
        if st["kind"] == "two_level_cat" and "trap" in d["interactions"]:
            raise ConfigError("two-level cats do not support the harmonic trap")
        try:
            self.geometry
            self.particle
            self.noise_spec()
            if "shield_modes" in d["interactions"]:
                self.shield_spec()
            if st["kind"] == "continuous_cat":
                fe.variance_match(st["dx"], st["d"])
        except GieError as exc:
            raise ConfigError(str(exc)) from exc
        except KeyError as exc:
            raise ConfigError(f"unknown name {exc}") from exc
        if np.any(self.times() < 0):
            raise ConfigError("time grid must be non-negative")
        if d["shield"]["temperature"] > 100:
            import warnings

            warnings.warn("shield temperature above 100 K: thermal Casimir corrections are not modelled",
                          stacklevel=2)
        tA, tB = self.thetas
        if "shield_modes" in d["interactions"] and tA != tB:
            raise ConfigError("shield modes need equal orientations for both particles")


def load_config(source) -> ExperimentConfig:
    import yaml

    if isinstance(source, ExperimentConfig):
        return source
    if isinstance(source, Mapping):
        return ExperimentConfig.from_mapping(source)
    path = Path(source)
    if not path.exists():
        raise ConfigError(f"config file {path} not found")
    try:
        raw = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    if not isinstance(raw, Mapping):
        raise ConfigError(f"{path}: top level must be a mapping")
    return ExperimentConfig.from_mapping(raw)


def set_path(raw: dict, path: str, value) -> None:
    keys = path.split(".")
    node = raw
    for k in keys[:-1]:
        node = node.setdefault(k, {})
        if not isinstance(node, dict):
            raise ConfigError(f"{path}: {k} is not a section")
    node[keys[-1]] = value


def get_path(raw: Mapping, path: str):
    node = raw
    for k in path.split("."):
        if not isinstance(node, Mapping) or k not in node:
            raise ConfigError(f"{path}: not found")
        node = node[k]
    return node


# --- results ---------------------------------------------------------------------

@dataclass
class ResultTable:
    columns: list[str]
    rows: list[tuple]
    metadata: dict = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        i = self.columns.index(name)
        return np.array([r[i] for r in self.rows], dtype=float)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])
        return buf.getvalue()

    def digest(self) -> str:
        return hashlib.sha256(self.to_csv().encode()).hexdigest()

    def write(self, out_dir, stem: str) -> tuple[Path, Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        csv_path = out / f"{stem}.csv"
        json_path = out / f"{stem}.json"
        csv_path.write_text(self.to_csv())
        meta = dict(self.metadata)
        meta["sha256"] = self.digest()
        json_path.write_text(json.dumps(meta, indent=2, sort_keys=True, default=_json_default) + "\n")
        return csv_path, json_path


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    return str(o)


def derived_summary(cfg: ExperimentConfig) -> dict:
    cs = cfg.raw_couplings()
    return {"lambda": cs.lam, "eta": cs.eta, "delta": cs.delta, "t0": cfg.t0(),
            "mass": cfg.mass, "d0_casimir": cs.d0_casimir, "d0_mag": cs.d0_mag}


def _metadata(cfg: ExperimentConfig, engine: str, extra: dict | None = None) -> dict:
    from . import __version__
    from ._kernels import BACKEND

    meta = {"engine": engine, "config": cfg.to_mapping(), "derived": derived_summary(cfg),
            "version": __version__, "kernel_backend": BACKEND, "seed": cfg["engine"]["seed"]}
    if extra:
        meta.update(extra)
    return meta


# --- engines -------------------------------------------------------------------

def _particle_modes(with_y: bool) -> tuple[str, ...]:
    return hm.PARTICLE_MODES if with_y else ("xA", "xB")


def gaussian_form_builder(cfg: ExperimentConfig, modes: list | None = None) -> Callable[[hm.NoiseDraw], hm.QuadraticForm]:
    on = set(cfg["interactions"])
    cs = cfg.couplings()
    tA, tB = cfg.thetas
    with_y = cfg["state"]["with_y"]
    L = cfg["geometry"]["half_separation"]
    M = cfg.mass
    pmodes = _particle_modes(with_y)
    shield_modes = modes or []

    def build(draw: hm.NoiseDraw = hm.ZERO_DRAW) -> hm.QuadraticForm:
        forms = [hm.QuadraticForm.zero(pmodes)]
        if "gravity" in on:
            forms.append(hm.gravity_form(tA, tB, cs.lam, L, with_y))
        for p, th in (("A", tA), ("B", tB)):
            if "casimir" in on:
                forms.append(hm.casimir_form(p, th, cs.eta, cs.d0_casimir, draw, with_y))
            if "magdipole" in on:
                forms.append(hm.magdipole_form(p, th, cs.delta, cs.d0_mag, draw, with_y))
        if "trap" in on:
            forms.append(hm.kinetic_form(M, pmodes))
            forms.append(hm.trap_form(cfg["trap"]["omega"], M, draw).form)
        for mode in shield_modes:
            forms.append(hm.oscillator_form(mode.label, mode.m_eff, mode.omega))
            for kind, strength, d0 in (("casimir", cs.eta, cs.d0_casimir), ("magdipole", cs.delta, cs.d0_mag)):
                if kind in on and strength > 0:
                    forms.append(hm.shield_coupling_form(mode, kind, tA, strength, d0, with_y=with_y,
                                                         dx_hint=cfg["state"]["dx"]))
        return hm.assemble(forms)

    return build


def _run_gaussian(cfg: ExperimentConfig, times: np.ndarray) -> ResultTable:
    st = cfg["state"]
    on = set(cfg["interactions"])
    modes = cfg.shield_mode_list() if "shield_modes" in on else []
    build = gaussian_form_builder(cfg, modes)
    form = build()
    widths = {"xA": st["dx"], "xB": st["dx"]}
    nbar = {"xA": st["nbar"], "xB": st["nbar"]}
    if st["with_y"]:
        if not st["dy"] > 0:
            raise ConfigError("state.dy must be positive when with_y is set")
        widths.update(yA=st["dy"], yB=st["dy"])
        nbar.update(yA=st["nbar"], yB=st["nbar"])
    for m in modes:
        widths[m.label] = m.q_zpf
        nbar[m.label] = m.nbar
    state0 = ge.initial_state(widths, nbar, modes=form.modes)
    noise = cfg.noise_spec()
    pos = times[times > 0]
    eng = cfg["engine"]
    if noise is None or (noise.kind == "quasi_static" and not noise.active):
        states = ge.propagate_grid(state0, form, pos) if len(pos) else []
        method = "closed"
    elif noise.kind == "quasi_static":
        states = ge.average_quasistatic(state0, build, noise, pos, eng["quad_order"], eng["sparse_level"],
                                        eng["workers"]) if len(pos) else []
        method = "quasi_static"
    else:
        states = ge.evolve_markovian(state0, form, noise.D, pos) if len(pos) else []
        method = "markovian"
    rows = []
    it = iter(states)
    for t in times:
        s = state0 if t == 0 else next(it)
        keep = [m for m in s.modes if m in hm.PARTICLE_MODES]
        red = s.reduced(keep)
        nu = red.symplectic_eigenvalues()
        rows.append((float(t), red.log_negativity("A"), 1.0 / math.sqrt(red.purity_determinant()),
                     float(np.min(nu))))
    meta = _metadata(cfg, "gaussian", {"method": method, "modes": list(form.modes)})
    return ResultTable(["t", "E_N", "purity", "nu_min"], rows, meta)


def cat_config(cfg: ExperimentConfig) -> ce.CatConfig:
    st = cfg["state"]
    tA, tB = cfg.thetas
    kinds = tuple(k for k in ("casimir", "magdipole") if k in cfg["interactions"])
    return ce.CatConfig(st["dx"], st["dx"], tA, tB, cfg.couplings(), 0.0,
                        cfg["geometry"]["half_separation"], kinds)


def _run_cat(cfg: ExperimentConfig, times: np.ndarray) -> ResultTable:
    ccfg = cat_config(cfg)
    noise = cfg.noise_spec()
    on = set(cfg["interactions"])
    eng = cfg["engine"]
    if noise is not None and noise.kind != "quasi_static":
        raise ConfigError("two-level cats support quasi-static noise only")
    devs = {k: v for k, v in (noise.deviations.items() if noise else []) if v > 0}
    if any(k in ge.TRAP_FIELDS for k in devs):
        raise ConfigError("trap noise is not defined for two-level cats")
    model = eng["cat_model"]
    if "shield_modes" in on:
        if model == "exact":
            raise ConfigError("the exact-potential model does not combine with shield modes")
        modes = cfg.shield_mode_list()
        states = ce.thermal_shield_series(ccfg, modes, times, T=cfg["shield"]["temperature"],
                                          gravity="gravity" in on)
        states = [ce.SmallDensityMatrix(s.data * np.exp(-ce.damping_exponents(ccfg, devs, t)), (2, 2))
                  for s, t in zip(states, times)]
    elif model == "exact":
        states = [ce.exact_potential_state(ccfg, devs, eng["quad_order"], t) for t in times]
    else:
        states = [ce.averaged_state(ccfg, devs, t) for t in times]
    rows = []
    for t, s in zip(times, states):
        purity = float(np.real(np.trace(s.data @ s.data)))
        rows.append((float(t), ce.log_negativity_density(s), purity, s.min_eigenvalue))
    meta = _metadata(cfg, "two_level_cat", {"model": model, "phase_rate": ce.cat_phase(ccfg)})
    return ResultTable(["t", "E_N", "purity", "min_eigenvalue"], rows, meta)


def _run_fock(cfg: ExperimentConfig, times: np.ndarray) -> ResultTable:
    st = cfg["state"]
    if "shield_modes" in cfg["interactions"]:
        raise ConfigError("continuous cats are not coupled to shield modes")
    params = fe.cat_params(st["dx"], st["d"])
    build = gaussian_form_builder(cfg)
    form = build().restrict(("xA", "xB"))
    noise = cfg.noise_spec()
    eng = cfg["engine"]
    if noise is not None and noise.kind != "quasi_static":
        raise ConfigError("continuous cats support quasi-static noise only")
    if noise is None or not noise.active:
        if eng["fock_n"]:
            N = eng["fock_n"]
            en = fe.entanglement_series(params, form, times, fe.FockSpec(N, st["dx"]))
        else:
            en, N = fe.converged_series(params, form, times)
        rows = [(float(t), float(e), 1.0) for t, e in zip(times, en)]
    else:
        N = eng["fock_n"] or fe.suggest_truncation(params, st["dx"])
        spec = fe.FockSpec(N, st["dx"])
        psi0 = fe.build_cat_state(params, spec)
        fb = lambda draw: build(draw).restrict(("xA", "xB"))
        rows = []
        for t in times:
            rho = fe.evolve_average(psi0, fb, noise, t, spec, eng["quad_order"], eng["workers"])
            rows.append((float(t), fe.log_negativity(rho), float(np.real(np.sum(np.abs(rho.data) ** 2)))))
    meta = _metadata(cfg, "continuous_cat", {"N": N, "sigma": params.sigma, "overlap": params.overlap})
    return ResultTable(["t", "E_N", "purity"], rows, meta)


def run(config) -> ResultTable:
    cfg = load_config(config)
    times = cfg.times()
    if not set(cfg["interactions"]) - {"trap"}:
        rows = [(float(t), 0.0) for t in times]
        return ResultTable(["t", "E_N"], rows, _metadata(cfg, "none"))
    kind = cfg["state"]["kind"]
    if kind == "gaussian":
        return _run_gaussian(cfg, times)
    if kind == "two_level_cat":
        return _run_cat(cfg, times)
    return _run_fock(cfg, times)


# --- sweeps and thresholds ---------------------------------------------------------

def _point(cfg: ExperimentConfig, path: str, value: float) -> tuple[float, float, float]:
    tab = run(cfg.with_value(path, float(value)))
    en = tab.column("E_N")
    return float(value), float(en[-1]), float(en.max())


def sweep(config, path: str, grid: Sequence[float], workers: int | None = None) -> ResultTable:
    cfg = load_config(config)
    current = get_path(cfg.to_mapping(), path) if _has_path(cfg.to_mapping(), path) else 0.0
    if current is not None and not isinstance(current, (int, float)):
        raise ConfigError(f"{path}: not a numeric parameter")
    grid = [float(g) for g in grid]
    workers = workers or cfg["engine"]["workers"]
    if workers > 1 and len(grid) > 1:
        with ThreadPoolExecutor(workers) as ex:
            rows = list(ex.map(lambda v: _point(cfg, path, v), grid))
    else:
        rows = [_point(cfg, path, v) for v in grid]
    meta = _metadata(cfg, "sweep", {"parameter": path})
    return ResultTable([path, "E_N_final", "E_N_max"], rows, meta)


def _has_path(raw, path) -> bool:
    try:
        get_path(raw, path)
        return True
    except ConfigError:
        return False


def find_threshold(config, path: str, bracket: tuple[float, float], target: float = 0.0,
                   rtol: float = 1e-3, log: bool = True, samples: int = 5) -> float:
    """Parameter value where E_N at the final time falls to ``target`` (bisection).

    For target = 0 the crossing is where E_N first becomes exactly zero.
    """
    cfg = load_config(config)
    lo, hi = map(float, bracket)
    if not lo < hi:
        raise ConfigError("bracket must be increasing")
    if log and lo <= 0:
        raise ConfigError("log bisection needs a positive bracket")
    f = lambda v: _point(cfg, path, v)[1]
    grid = np.geomspace(lo, hi, samples) if log else np.linspace(lo, hi, samples)
    vals = [f(v) for v in grid]
    if any(b > a + 1e-9 for a, b in zip(vals, vals[1:])):
        raise NumericError(f"E_N is not non-increasing across the bracket: {vals}")
    above = lambda e: e > target if target == 0 else e >= target
    if not above(vals[0]) or above(vals[-1]):
        raise NumericError(f"no crossing of E_N = {target} inside [{lo}, {hi}]")
    a, b = lo, hi
    while (b - a) > rtol * b:
        m = math.sqrt(a * b) if log else 0.5 * (a + b)
        if above(f(m)):
            a = m
        else:
            b = m
    return math.sqrt(a * b) if log else 0.5 * (a + b)


def _half_crossing(x, y, i, half, step):
    j = i
    while 0 <= j + step < len(y) and y[j + step] > half:
        j += step
    k = j + step
    if not 0 <= k < len(y):
        raise NumericError("peak has no half-maximum crossing on this side")
    x1, x2, y1, y2 = x[j], x[k], y[j], y[k]
    return x1 + (half - y1) * (x2 - x1) / (y2 - y1), (x1, x2)


def peak_fwhm(table_or_x, y=None, peak_index: int | None = None, column: str = "E_N",
              refine: Callable[[float], float] | None = None, xtol: float = 0.0) -> float:
    """Full width at half maximum of a peak in a sampled curve.

    Linear interpolation between the samples bracketing each half-height crossing;
    when ``refine`` (an exact evaluator of the curve) is given, each crossing is
    bisected inside its bracket instead.
    """
    if isinstance(table_or_x, ResultTable):
        x = table_or_x.column(table_or_x.columns[0])
        y = table_or_x.column(column)
    else:
        x = np.asarray(table_or_x, dtype=float)
        y = np.asarray(y, dtype=float)
    if len(x) < 3 or np.ptp(y) == 0:
        raise NumericError("flat or too short curve: no peak")
    i = int(np.argmax(y)) if peak_index is None else int(peak_index)
    if not 0 < i < len(y) - 1 or y[i] < y[i - 1] or y[i] < y[i + 1]:
        raise NumericError(f"index {i} is not an interior local maximum")
    half = 0.5 * y[i]
    edges = []
    for step in (-1, 1):
        xc, (x1, x2) = _half_crossing(x, y, i, half, step)
        if refine is not None:
            a, b = (x1, x2)
            tol = xtol or 1e-9 * abs(x2 - x1)
            while abs(b - a) > tol:
                m = 0.5 * (a + b)
                if refine(m) > half:
                    a = m
                else:
                    b = m
            xc = 0.5 * (a + b)
        edges.append(xc)
    return float(abs(edges[1] - edges[0]))


def recipe_path(name: str) -> Path:
    p = Path(__file__).parent / "recipes" / f"{name}.yaml"
    if not p.exists():
        raise ConfigError(f"no recipe named {name!r}")
    return p


def list_recipes() -> list[str]:
    return sorted(p.stem for p in (Path(__file__).parent / "recipes").glob("*.yaml"))
