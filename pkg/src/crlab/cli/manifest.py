"""Experiment manifests: INI-style sections with a closed set of keys.

Line grammar is that of :mod:`configparser` (``key = value`` under
``[section]`` headers, ``#`` comments). Sections and keys::

    [experiment]   kind, name, out, csv_dir, cache_dir
    [grid]         eps_min, eps_max, samples, grid_ratio, rho_min, rho_max, rho_samples
    [fit]          smooth, highlog, pole_order, data
    [quadrature]   quad_tol, alpha_max, boundary_nodes
    [model]        hilbert, profile, weight, density, input, count, seed
    [config NAME]  profile, weight, density, hilbert   (linvariant only, repeatable)

Unknown sections or keys are rejected by name.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional

KINDS = ("ball", "tube", "reinhardt", "linvariant", "fit", "symbols", "psi2")

_KEYS = {
    "experiment": {"kind", "name", "out", "csv_dir", "cache_dir"},
    "grid": {"eps_min", "eps_max", "samples", "grid_ratio", "rho_min", "rho_max", "rho_samples"},
    "fit": {"smooth", "highlog", "pole_order", "data"},
    "quadrature": {"quad_tol", "alpha_max", "boundary_nodes"},
    "model": {"hilbert", "profile", "weight", "density", "input", "count", "seed"},
}
_CONFIG_KEYS = {"profile", "weight", "density", "hilbert"}

# per-kind defaults for the sample grids and the norm table size
_DEFAULTS = {
    "ball": dict(eps_min=1e-3, eps_max=1e-1, samples=24, alpha_max=400, smooth=6, highlog=1),
    "tube": dict(eps_min=1e-2, eps_max=0.3, samples=30, rho_min=1e-2, rho_max=0.3, rho_samples=30,
                 smooth=6, highlog=1),
    "reinhardt": dict(eps_min=0.02, eps_max=0.2, samples=64, alpha_max=1300, smooth=6, highlog=3),
    "linvariant": dict(eps_min=0.02, eps_max=0.2, samples=64, alpha_max=1300, smooth=6, highlog=3),
}


class ManifestError(ValueError):
    """Invalid manifest or parameter override."""


@dataclass
class Config:
    name: str
    profile: str = ""
    weight: str = ""
    density: str = ""
    hilbert: str = ""


@dataclass
class Manifest:
    kind: str
    name: str = ""
    out: Optional[str] = None
    csv_dir: Optional[str] = None
    cache_dir: Optional[str] = None
    eps_min: float = 0.02
    eps_max: float = 0.2
    samples: int = 64
    grid_ratio: Optional[float] = None
    rho_min: float = 0.02
    rho_max: float = 0.3
    rho_samples: int = 20
    smooth: int = 6
    highlog: int = 3
    pole_order: Optional[int] = None
    data: Optional[str] = None
    quad_tol: float = 1e-10
    alpha_max: int = 1300
    boundary_nodes: int = 48
    hilbert: str = ""
    profile: str = ""
    weight: str = ""
    density: str = ""
    input: Optional[str] = None
    count: int = 100
    seed: int = 20240501
    configs: List[Config] = field(default_factory=list)

    @classmethod
    def for_kind(cls, kind: str, **overrides) -> "Manifest":
        if kind not in KINDS:
            raise ManifestError(f"unknown experiment kind {kind!r}; expected one of {', '.join(KINDS)}")
        m = cls(kind=kind, name=kind)
        for k, v in _DEFAULTS.get(kind, {}).items():
            setattr(m, k, v)
        m = replace(m, **{k: v for k, v in overrides.items() if v is not None})
        return m

    def eps_range(self):
        return self.eps_min, self.eps_max, self.samples

    def validate(self) -> "Manifest":
        def need(cond, msg):
            if not cond:
                raise ManifestError(msg)

        need(self.kind in KINDS, f"unknown experiment kind {self.kind!r}")
        need(0 < self.eps_min < self.eps_max, "grid needs 0 < eps_min < eps_max")
        need(0 < self.rho_min < self.rho_max, "grid needs 0 < rho_min < rho_max")
        need(4 <= self.samples <= 10000, "samples must lie in [4, 10000]")
        need(4 <= self.rho_samples <= 10000, "rho_samples must lie in [4, 10000]")
        need(self.grid_ratio is None or self.grid_ratio > 1, "grid_ratio must exceed 1")
        need(0 <= self.smooth <= 16, "smooth must lie in [0, 16]")
        need(0 <= self.highlog <= 6, "highlog must lie in [0, 6]")
        need(self.pole_order is None or 0 <= self.pole_order <= 12, "pole_order must lie in [0, 12]")
        need(0 < self.quad_tol <= 1e-3, "quad_tol must lie in (0, 1e-3]")
        need(8 <= self.alpha_max <= 5000, "alpha_max must lie in [8, 5000]")
        need(2 <= self.boundary_nodes <= 512, "boundary_nodes must lie in [2, 512]")
        need(1 <= self.count <= 100000, "count must lie in [1, 100000]")
        if self.kind == "tube":
            need(bool(self.hilbert.strip()), "tube experiments need model.hilbert")
        if self.kind == "reinhardt":
            need(bool(self.profile.strip()), "reinhardt experiments need model.profile")
        if self.kind == "linvariant":
            need(len(self.configs) >= 1, "linvariant experiments need at least one [config NAME] section")
            for c in self.configs:
                need(bool(c.profile.strip()) != bool(c.hilbert.strip()),
                     f"config {c.name!r} needs exactly one of profile or hilbert")
        if self.kind == "fit":
            need(self.data is not None, "fit experiments need fit.data")
            need(self.pole_order is not None, "fit experiments need fit.pole_order")
        if self.kind == "psi2":
            need(self.input is not None, "psi2 experiments need model.input")
        return self


_INT = {"samples", "rho_samples", "smooth", "highlog", "pole_order", "alpha_max", "boundary_nodes", "count", "seed"}
_FLOAT = {"eps_min", "eps_max", "grid_ratio", "rho_min", "rho_max", "quad_tol"}


def _convert(key: str, raw: str):
    try:
        if key in _INT:
            return int(raw)
        if key in _FLOAT:
            return float(raw)
    except ValueError:
        raise ManifestError(f"key {key!r}: cannot read {raw!r} as a number") from None
    return raw.strip().strip('"')


def parse_manifest(text: str, source: str = "<manifest>") -> Manifest:
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str  # keys are case-sensitive
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ManifestError(f"{source}: {exc}") from None
    if not cp.has_section("experiment") or not cp.has_option("experiment", "kind"):
        raise ManifestError(f"{source}: missing [experiment] kind")
    values: Dict[str, object] = {}
    configs: List[Config] = []
    for sec in cp.sections():
        if sec.startswith("config "):
            name = sec[len("config "):].strip()
            for key in cp[sec]:
                if key not in _CONFIG_KEYS:
                    raise ManifestError(f"{source}: unknown key {key!r} in section [{sec}]")
            configs.append(Config(name, **{k: _convert(k, v) for k, v in cp[sec].items()}))
            continue
        if sec not in _KEYS:
            raise ManifestError(f"{source}: unknown section [{sec}]")
        for key, raw in cp[sec].items():
            if key not in _KEYS[sec]:
                raise ManifestError(f"{source}: unknown key {key!r} in section [{sec}]")
            values[key] = _convert(key, raw)
    kind = values.pop("kind")
    m = Manifest.for_kind(kind, **values)
    m.configs = configs
    if not m.name:
        m.name = kind
    return m


def read_manifest(path) -> Manifest:
    with open(path) as fh:
        return parse_manifest(fh.read(), str(path))
