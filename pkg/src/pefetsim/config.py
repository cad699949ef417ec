"""INI run configuration with strict, line-numbered validation."""

from __future__ import annotations

import configparser
import re
from dataclasses import dataclass, field, fields, replace
from importlib import resources
from pathlib import Path

from .arrays import ArrayConfig, TimingParams
from .errors import ConfigError
from .ferroelectric import LandauParams
from .layout import ARCHS, LayoutRules, WireParams, norm_arch
from .metrics import SramBaseline
from .pefet import PeFetConfig
from .tmdfet import EPS0, FetParams
from .transduction import DeviceGeometry, PiezoParams

SECTIONS = ("ferroelectric", "piezo", "geometry", "fet", "array", "rules", "sweep")


def _float_or_none(s: str):
    return None if s.strip().lower() in ("none", "") else float(s)


def _auto_bool(s: str):
    v = s.strip().lower()
    if v == "auto":
        return None
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected true/false/auto, got {s!r}")


def _float_list(s: str):
    return [float(x) for x in s.replace(",", " ").split()]


def _arch_list(s: str):
    return [norm_arch(x) for x in s.replace(",", " ").split()]


# key -> parser, per section
SCHEMA = {
    "ferroelectric": {"alpha": float, "beta": float, "gamma": float, "rho": float},
    "piezo": {"d33": float, "d31": float, "y_eff": float, "boost_b0": float, "boost_q": float,
              "a_bg": float, "clamp_v": _float_or_none},
    "geometry": {"f": float, "w_tmd": float, "l_g": float, "a_pe": float, "t_pe": float,
                 "t_nail": float, "t_tox": float, "t_tmd": float, "kappa": _float_or_none},
    "fet": {"mu": float, "r_c": float, "e_g0": float, "t_tox": float, "eps_r_ox": float,
            "w": float, "l": float, "v_t0": float, "n_id": float, "temp": float,
            "band_split": float},
    "array": {"n_r": int, "n_c": int, "n_w": int, "segmented": _auto_bool, "v_dd": float,
              "v_r": float, "v_boost": float, "r_sense": float, "min_ratio": float,
              "c_wire": float, "r_drv": float, "eps_pe": float, "c_tap_hd": float,
              "c_tap_bl": float, "c_tap_rbl": float, "c_buf_in": float, "w_buf": float,
              "w_ax": float, "k_rc": float, "k_sw": float, "t_relax": float,
              "overhead": float, "sram_dv_read": float, "sram_c_tap": float,
              "sram_w_ax": float, "utilization": float},
    "rules": {"lam": float, "poly_pitch": float, "h_hd": float, "h_tall": float,
              "h_wide": float, "h_cc": float, "w_contact": float, "l_pe": float,
              "w_min": float, "w_ax_wide": float, "w_ax_cc": float, "a_tmd": float,
              "sram_area": float, "sram_height": float},
    "sweep": {"kappas": _float_list, "archs": _arch_list, "seed": int, "words": int,
              "output": str},
}


@dataclass
class SweepSpec:
    kappas: list[float] = field(default_factory=lambda: [0.03, 0.04, 0.05, 0.06, 0.07])
    archs: list[str] = field(default_factory=lambda: list(ARCHS))
    seed: int = 0
    words: int = 16
    output: str = "out"


@dataclass
class RunConfig:
    landau: LandauParams = field(default_factory=LandauParams)
    piezo: PiezoParams = field(default_factory=PiezoParams)
    geom: DeviceGeometry = field(default_factory=DeviceGeometry)
    fet: FetParams = field(default_factory=FetParams)
    rules: LayoutRules = field(default_factory=LayoutRules)
    wire: WireParams = field(default_factory=WireParams)
    timing: TimingParams = field(default_factory=TimingParams)
    sram: SramBaseline = field(default_factory=SramBaseline)
    kappa: float | None = None
    v_dd: float = 0.7
    v_r: float = 0.35
    n_r: int = 256
    n_c: int = 256
    n_w: int = 64
    segmented: bool | None = None
    v_boost: float = 0.5
    r_sense: float = ArrayConfig.r_sense
    min_ratio: float = 1.5
    sweep: SweepSpec = field(default_factory=SweepSpec)
    source: str = "<defaults>"

    def device(self, kappa: float | None = None) -> PeFetConfig:
        k = kappa if kappa is not None else self.kappa
        return PeFetConfig(self.landau, self.piezo, self.geom, self.fet, v_r=self.v_r,
                           v_dd=self.v_dd, kappa=k)

    def array(self, arch: str, kappa: float | None = None, **over) -> ArrayConfig:
        kw = dict(arch=arch, n_r=self.n_r, n_c=self.n_c, n_w=self.n_w,
                  segmented=self.segmented if norm_arch(arch) != "HD" else False,
                  device=self.device(kappa), wire=self.wire, rules=self.rules,
                  timing=self.timing, v_boost=self.v_boost, r_sense=self.r_sense,
                  min_ratio=self.min_ratio)
        kw.update(over)
        return ArrayConfig(**kw)

    def sram_for(self) -> SramBaseline:
        return replace(self.sram, n_r=self.n_r, n_c=self.n_c, n_w=self.n_w, v_dd=self.v_dd)


def _line_index(text: str) -> dict[tuple[str, str | None], int]:
    """Line numbers of section headers and keys."""
    idx = {}
    section = None
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line[0] in "#;":
            continue
        m = re.match(r"\[([^\]]+)\]", line)
        if m:
            section = m.group(1).strip()
            idx[(section, None)] = n
            continue
        m = re.match(r"([^=:]+)[=:]", line)
        if m and section is not None:
            idx.setdefault((section, m.group(1).strip().lower()), n)
    return idx


def parse_config(text: str, source: str = "<string>") -> RunConfig:
    """Parse INI text into a RunConfig.

    All seven sections must be present; keys may be omitted (defaults apply)
    but unknown keys are rejected.
    """
    cp = configparser.ConfigParser(interpolation=None, strict=True, inline_comment_prefixes=("#",))
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc.message if hasattr(exc, 'message') else exc}",
                          getattr(exc, "lineno", None)) from exc
    lines = _line_index(text)
    for sec in cp.sections():
        if sec not in SCHEMA:
            raise ConfigError(f"{source}: unknown section [{sec}]", lines.get((sec, None)))
    for sec in SECTIONS:
        if not cp.has_section(sec):
            raise ConfigError(f"{source}: missing section [{sec}]")
    vals: dict[str, dict] = {}
    for sec in SECTIONS:
        vals[sec] = {}
        for key, raw in cp.items(sec):
            ln = lines.get((sec, key))
            if key not in SCHEMA[sec]:
                raise ConfigError(f"{source}: unknown key '{key}' in [{sec}]", ln)
            try:
                vals[sec][key] = SCHEMA[sec][key](raw)
            except Exception as exc:
                raise ConfigError(f"{source}: [{sec}] {key} = {raw!r}: {exc}", ln) from exc
    try:
        return _build(vals, source)
    except ConfigError:
        raise
    except Exception as exc:
        raise ConfigError(f"{source}: {exc}") from exc


def _pick(obj, d: dict, rename: dict | None = None):
    rename = rename or {}
    names = {f.name for f in fields(obj)}
    kw = {}
    for k, v in d.items():
        k2 = rename.get(k, k)
        if k2 in names:
            kw[k2] = v
    return replace(obj, **kw) if kw else obj


def _build(v: dict, source: str) -> RunConfig:
    rc = RunConfig(source=source)
    rc.landau = _pick(LandauParams(), v["ferroelectric"])
    rc.landau.validate()
    rc.piezo = _pick(PiezoParams(), v["piezo"])
    geo = dict(v["geometry"])
    rc.kappa = geo.pop("kappa", None)
    rc.geom = _pick(DeviceGeometry(), geo)
    fet = dict(v["fet"])
    if "eps_r_ox" in fet:
        fet["eps_ox"] = fet.pop("eps_r_ox") * EPS0
    rc.fet = _pick(FetParams(), fet)
    a = v["array"]
    rc.wire = _pick(WireParams(), a)
    rc.timing = _pick(TimingParams(), a)
    rc.sram = _pick(SramBaseline(), a, {"sram_dv_read": "dv_read", "sram_c_tap": "c_tap",
                                        "sram_w_ax": "w_ax"})
    for k in ("n_r", "n_c", "n_w", "segmented", "v_dd", "v_r", "v_boost", "r_sense",
              "min_ratio"):
        if k in a:
            setattr(rc, k, a[k])
    r = dict(v["rules"])
    heights = dict(LayoutRules().heights)
    for arch in ARCHS:
        hk = f"h_{arch.lower()}"
        if hk in r:
            heights[arch] = r.pop(hk)
    rc.rules = replace(_pick(LayoutRules(), r), heights=heights)
    rc.sweep = _pick(SweepSpec(), v["sweep"])
    # fail early on inconsistent device settings
    rc.device()
    rc.array("HD")
    return rc


def default_text() -> str:
    return resources.files("pefetsim").joinpath("data/default.ini").read_text()


def load_config(path: str | Path | None = None) -> RunConfig:
    if path is None:
        return parse_config(default_text(), "default.ini")
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {p}: {exc.strerror}") from exc
    return parse_config(text, str(p))
