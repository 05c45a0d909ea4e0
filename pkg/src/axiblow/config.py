"""Scenario configuration: dataclasses, INI parsing and precondition checks."""

from __future__ import annotations

import configparser
import enum
import math
from dataclasses import MISSING, asdict, dataclass, field, fields

import numpy as np

from . import specfun

__all__ = [
    "Scenario",
    "GridConfig",
    "ParamsConfig",
    "DataConfig",
    "ControlConfig",
    "ConvergenceConfig",
    "OracleConfig",
    "OutputConfig",
    "ScenarioConfig",
    "ConfigError",
    "load_config",
    "parse_config",
    "validate_config",
    "reference_config",
]


class ConfigError(ValueError):
    pass


class Scenario(enum.Enum):
    BLOWUP_EXTERIOR = "BlowupExterior"
    BLOWUP_INTERIOR = "BlowupInterior"
    GLOBAL_DECAY = "GlobalDecay"
    ELLIPTIC_CONVERGENCE = "EllipticConvergence"
    ORACLE_SWEEP = "OracleSweep"


def _doc(text: str, default=MISSING, **kw):
    if default is MISSING:
        return field(metadata={"doc": text}, **kw)
    return field(default=default, metadata={"doc": text}, **kw)


@dataclass
class GridConfig:
    Nr: int = _doc("radial nodes", 129)
    Nz: int = _doc("axial nodes", 65)
    r_max: float = _doc("exterior truncation radius", 8.0)


@dataclass
class ParamsConfig:
    alpha: float | None = _doc(
        "test-function exponent; exterior: beta/2 (3.0 if beta is also unset); interior: 1.0 if unset", None
    )
    beta: float | None = _doc("Robin coefficient; derived from alpha when unset", None)
    M: float = _doc("boundary constant of the decay regime", 1.0)
    nu: float = _doc("viscosity (all guarantees are for nu = 0)", 0.0)
    c1: float | None = _doc("interior growth constant; unset = mirrored exterior construction", None)


@dataclass
class DataConfig:
    s: float = _doc("amplitude of u0^2 (blow-up) or of u_tilde0 (decay)", 2.0)
    c: float = _doc("exponent weight in u0^2 = s sin^2(pi z) exp(c phi)", 1.0)
    b: float = _doc("amplitude of psi0 (blow-up) or of v0 (decay)", 6.0)


@dataclass
class ControlConfig:
    cfl: float = _doc("step-size safety factor in (0, 1]", 0.1)
    dt0: float = _doc("first step size (capped by the stability rule)", 1e-3)
    dt_min: float = _doc("step-collapse floor", 1e-10)
    blowup_factor: float = _doc("terminate when sup|u| > blowup_factor * sup|u0|", 1e6)
    h3_factor: float = _doc("terminate when the H^3 surrogate of u grows by this factor (inf = off)", math.inf)
    max_steps: int = _doc("hard step limit", 200000)
    t_end: float = _doc("final time; inf = run until termination (decay runs default to 5/M)", math.inf)
    clip_tol: float = _doc("largest negative u_tilde undershoot that is clipped instead of rejected", 1e-12)
    resolved_rho: float = _doc("resolution indicator limit that ends the resolved interval", 0.05)
    gate: str = _doc("admissibility condition that gates a blow-up run: stated | operative | none", "stated")
    tol_identity: float = _doc("tolerance on identity residuals relative to max(1, |P|)", 1e-2)
    tol_inequality: float = _doc("tolerance on inequality slack relative to its right-hand side", 1e-2)
    sobolev_order: int = _doc("order of the discrete Sobolev surrogates in decay monitors", 3)


@dataclass
class ConvergenceConfig:
    regimes: str = _doc(
        "comma list of dirichlet, interior_robin, exterior_robin, decay_shift",
        "dirichlet,interior_robin,exterior_robin,decay_shift",
    )
    interior_levels: str = _doc("grid sizes (Nr = Nz) for interior regimes", "33,65,129")
    exterior_levels: str = _doc("grid sizes (Nr = 2 Nz - 1) for the exterior regime", "129,257,513")
    interior_alpha: float = _doc("alpha fixing the interior Robin coefficient", 1.0)
    exterior_alpha: float = _doc("exterior manufactured solution exp(-alpha r^2) cos(pi z), beta = 2 alpha", 3.0)
    min_order: float = _doc("required observed order", 1.8)
    robin_tol: float = _doc("exterior Robin residual tolerance", 1e-6)


@dataclass
class OracleConfig:
    Y0: str = _doc("comma list of initial Y", "1.0,0.5,2.0")
    c0: str = _doc("comma list of c0 values", "1.0,0.5357186480621846")
    boost: str = _doc("comma list of Y'(0) / sqrt(Y0^3/c0) factors (1 = equality case)", "1.0,1.5")
    dt: float = _doc("fixed RK4 step", 1e-3)
    horizon: float = _doc("fraction of the pole time compared with the closed form", 0.9)
    Y_cap: float = _doc("overflow cap", 1e8)
    rtol: float = _doc("closed-form agreement tolerance", 1e-6)
    drift_tol: float = _doc("first-integral drift tolerance", 1e-8)


@dataclass
class OutputConfig:
    directory: str = _doc("output directory (relative to the working directory)", "out")
    name: str | None = _doc("file stem; defaults to the scenario name", None)


@dataclass
class ScenarioConfig:
    scenario: Scenario = Scenario.BLOWUP_EXTERIOR
    grid: GridConfig = field(default_factory=GridConfig)
    params: ParamsConfig = field(default_factory=ParamsConfig)
    data: DataConfig = field(default_factory=DataConfig)
    control: ControlConfig = field(default_factory=ControlConfig)
    convergence: ConvergenceConfig = field(default_factory=ConvergenceConfig)
    oracle: OracleConfig = field(default_factory=OracleConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    @property
    def stem(self) -> str:
        return self.output.name or self.scenario.value

    # resolved parameters

    def exterior_alpha_beta(self) -> tuple[float, float]:
        a, b = self.params.alpha, self.params.beta
        if a is None and b is None:
            a = 3.0
        if b is None:
            b = 2 * a
        if a is None:
            a = b / 2
        return float(a), float(b)

    def interior_alpha(self) -> float:
        return 1.0 if self.params.alpha is None else float(self.params.alpha)

    def decay_t_end(self) -> float:
        t = self.control.t_end
        return 5.0 / self.params.M if math.isinf(t) else t

    def as_dict(self) -> dict:
        d = {"scenario": self.scenario.value}
        for f in fields(self):
            if f.name != "scenario":
                d[f.name] = asdict(getattr(self, f.name))
        return d


_SECTIONS = {
    "grid": GridConfig,
    "params": ParamsConfig,
    "data": DataConfig,
    "control": ControlConfig,
    "convergence": ConvergenceConfig,
    "oracle": OracleConfig,
    "output": OutputConfig,
}


def _convert(raw: str, typ: str, where: str):
    # field types are strings under postponed annotations, e.g. "float | None"
    text = raw.strip()
    name, _, rest = typ.partition(" | ")
    if rest == "None" and text.lower() in ("", "none"):
        return None
    base = {"int": int, "float": float, "str": str}[name]
    try:
        return base(text)
    except ValueError:
        raise ConfigError(f"{where}: cannot parse {raw!r} as {name}") from None


def parse_config(text: str) -> ScenarioConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    cfg = ScenarioConfig()
    for sec in cp.sections():
        if sec == "scenario":
            for key, val in cp.items(sec):
                if key != "kind":
                    raise ConfigError(f"[scenario]: unknown key {key!r}")
                try:
                    cfg.scenario = Scenario(val.strip())
                except ValueError:
                    names = ", ".join(s.value for s in Scenario)
                    raise ConfigError(f"[scenario] kind must be one of {names}") from None
            continue
        if sec not in _SECTIONS:
            raise ConfigError(f"unknown section [{sec}]")
        obj = getattr(cfg, sec)
        types = {f.name: f.type for f in fields(obj)}
        for key, val in cp.items(sec):
            if key not in types:
                raise ConfigError(f"[{sec}]: unknown key {key!r}")
            setattr(obj, key, _convert(val, types[key], f"[{sec}] {key}"))
    return cfg


def load_config(path) -> ScenarioConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def _fmt(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def reference_config(cfg: ScenarioConfig | None = None) -> str:
    """INI text with every key, its value and a one-line description."""
    cfg = cfg or ScenarioConfig()
    lines = [
        "# axiblow scenario configuration",
        "# kind: " + " | ".join(s.value for s in Scenario),
        "[scenario]",
        f"kind = {cfg.scenario.value}",
    ]
    for sec in _SECTIONS:
        obj = getattr(cfg, sec)
        lines += ["", f"[{sec}]"]
        for f in fields(obj):
            lines.append(f"# {f.metadata.get('doc', '')}")
            lines.append(f"{f.name} = {_fmt(getattr(obj, f.name))}")
    return "\n".join(lines) + "\n"


def _floats(text: str, where: str, out: list) -> list[float]:
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        out.append(f"{where}: expected a comma list of numbers")
        return []
    if not vals:
        out.append(f"{where}: empty list")
    return vals


def _ints(text: str, where: str, out: list) -> list[int]:
    vals = _floats(text, where, out)
    if any(v != int(v) for v in vals):
        out.append(f"{where}: expected integers")
        return []
    return [int(v) for v in vals]


def validate_config(cfg: ScenarioConfig) -> list[str]:
    """Every precondition checkable from the config; an empty list means runnable."""
    v: list[str] = []
    g, p, d, c = cfg.grid, cfg.params, cfg.data, cfg.control
    sc = cfg.scenario
    if sc in (Scenario.BLOWUP_EXTERIOR, Scenario.BLOWUP_INTERIOR, Scenario.GLOBAL_DECAY):
        if g.Nr < 16 or g.Nz < 16:
            v.append(f"grid too coarse: need Nr, Nz >= 16, got {g.Nr}, {g.Nz}")
        if not 0 < c.cfl <= 1:
            v.append(f"cfl must lie in (0, 1], got {c.cfl}")
        if not c.dt_min > 0:
            v.append("dt_min must be positive")
        if not c.dt0 > 0:
            v.append("dt0 must be positive")
        if not c.max_steps > 0:
            v.append("max_steps must be positive")
        if not c.t_end > 0:
            v.append("t_end must be positive")
        if not p.nu >= 0:
            v.append("nu must be >= 0")
    if sc in (Scenario.BLOWUP_EXTERIOR, Scenario.BLOWUP_INTERIOR):
        if not c.blowup_factor > 1:
            v.append("blowup_factor must exceed 1")
        if not c.h3_factor > 1:
            v.append("h3_factor must exceed 1")
        if c.gate not in ("stated", "operative", "none"):
            v.append(f"gate must be stated, operative or none, got {c.gate!r}")
        if not c.resolved_rho > 0:
            v.append("resolved_rho must be positive")
        if not d.s > 0:
            v.append("s must be positive so that u0^2 > 0 for 0 < z < 1")
        if not d.c >= 0:
            v.append("c must be >= 0")

    if sc is Scenario.BLOWUP_EXTERIOR:
        if not g.r_max > 1:
            v.append(f"r_max must exceed 1, got {g.r_max}")
        alpha, beta = cfg.exterior_alpha_beta()
        if beta < specfun.EXTERIOR_BETA_MIN:
            v.append(
                f"beta below blow-up threshold 2+2*sqrt(1+pi^2/4) = {specfun.EXTERIOR_BETA_MIN:.6f}: beta = {beta}"
            )
        if abs(beta - 2 * alpha) > 1e-12 * max(1.0, beta):
            v.append(f"alpha must equal beta/2: alpha = {alpha}, beta = {beta}")
        if beta > 0:
            m = specfun.in_S_exterior(beta)
            if not m.member:
                v.append(f"beta = {beta} is resonant (not in S_exterior)")
        if not d.b > 0:
            v.append("b must be positive so that int psi0_z Phi r^3 > 0")
    elif sc is Scenario.BLOWUP_INTERIOR:
        alpha = cfg.interior_alpha()
        sq = math.sqrt(specfun.lambda1())
        if not 0 < alpha < sq:
            v.append(f"alpha outside 0 < alpha < sqrt(lambda_1) = {sq:.6f}: alpha = {alpha}")
        else:
            try:
                params = specfun.interior_params(alpha)
            except ValueError as exc:
                v.append(str(exc))
            else:
                if p.beta is not None and abs(p.beta - params.beta) > 1e-9 * params.beta:
                    v.append(f"beta must equal (lambda_1/alpha) tanh(alpha) = {params.beta:.9f}, got {p.beta}")
                if not specfun.in_S_interior(params.beta).member:
                    v.append(f"beta = {params.beta} is resonant (not in S_interior)")
        if p.c1 is not None and not p.c1 > 0:
            v.append("c1 must be positive")
        if d.b == 0:
            v.append("b must be nonzero so that int psi0_z phi r^3 != 0")
    elif sc is Scenario.GLOBAL_DECAY:
        if not p.M > 0:
            v.append(f"M must be positive, got {p.M}")
        if not d.s >= 0:
            v.append("s must be >= 0 (u_tilde0 is a square)")
        if not 1 <= c.sobolev_order <= 3:
            v.append("sobolev_order must be 1, 2 or 3")
        if p.nu != 0:
            v.append("the decay system is inviscid; nu must be 0")
        if not v:
            v += _decay_smallness(cfg)
    elif sc is Scenario.ELLIPTIC_CONVERGENCE:
        cc = cfg.convergence
        known = {"dirichlet", "interior_robin", "exterior_robin", "decay_shift"}
        regs = [x.strip() for x in cc.regimes.split(",") if x.strip()]
        for r in regs:
            if r not in known:
                v.append(f"unknown regime {r!r}")
        for name in ("interior_levels", "exterior_levels"):
            lv = _ints(getattr(cc, name), name, v)
            if lv and (len(lv) < 3 or any(b <= a for a, b in zip(lv, lv[1:])) or lv[0] < 16):
                v.append(f"{name}: need at least 3 increasing sizes >= 16")
        if "interior_robin" in regs:
            try:
                params = specfun.interior_params(cc.interior_alpha)
                if not specfun.in_S_interior(params.beta).member:
                    v.append("interior Robin coefficient is resonant")
            except ValueError as exc:
                v.append(str(exc))
        if "exterior_robin" in regs:
            beta = 2 * cc.exterior_alpha
            if not beta > 0 or not specfun.in_S_exterior(beta).member:
                v.append(f"exterior Robin coefficient beta = {beta} is resonant or nonpositive")
        if not g.r_max > 1:
            v.append(f"r_max must exceed 1, got {g.r_max}")
    elif sc is Scenario.ORACLE_SWEEP:
        o = cfg.oracle
        for name in ("Y0", "c0", "boost"):
            vals = _floats(getattr(o, name), name, v)
            if any(not x > 0 for x in vals):
                v.append(f"{name} values must be positive")
        if any(x < 1 for x in _floats(o.boost, "boost", [])):
            v.append("boost factors must be >= 1 (admissible first-integral sign)")
        if not o.dt > 0:
            v.append("dt must be positive")
        if not 0 < o.horizon < 1:
            v.append("horizon must lie in (0, 1)")
    return v


def _decay_smallness(cfg: ScenarioConfig) -> list[str]:
    """Scaled smallness guard on the decay initial data, evaluated on the grid."""
    from .diagnostics import grad_surrogate, measured_constant, sobolev_surrogate
    from .scenarios import decay_initial_data
    from .grid import Grid

    grid = Grid.interior(cfg.grid.Nr, cfg.grid.Nz)
    ut0, v0 = decay_initial_data(grid, cfg.data.s, cfg.data.b)
    s = cfg.control.sobolev_order
    C = measured_constant(grid, s, ut0)
    M = cfg.params.M
    out = []
    gv = grad_surrogate(grid, v0, s)
    if gv > M / (8 * C**2):
        out.append(f"smallness guard: |grad v0|_(s-1) = {gv:.6g} exceeds M/(8 C^2) = {M / (8 * C**2):.6g}")
    hu = sobolev_surrogate(grid, ut0, s)
    if hu > M**2 / (4 * C**3):
        out.append(f"smallness guard: |u_tilde0|_s = {hu:.6g} exceeds M^2/(4 C^3) = {M**2 / (4 * C**3):.6g}")
    if np.any(ut0 < 0):
        out.append("u_tilde0 must be nonnegative")
    return out
