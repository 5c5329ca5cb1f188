"""Experiment configuration in INI form.

Every key is optional; missing keys take the defaults below.  Angles are in
radians, radii are dimensionless (entrance sphere at r = 1), and lists are
comma separated.  Example::

    [gas]
    gamma = 1.4
    q0 = 1.2
    phi0_rad = 0.5235987755982988

    [grid]
    n_phi = 129
    r_max = 100
    store_every = 1

    [perturbation]
    family = bump
    center_frac = 0.5
    width_frac = 0.3
    amp_phi0 = 0.0
    amp_phi1 = 1.0
    eps_list = 0, 1e-3

    [output]
    dir = out

    [run]
    seed = 0
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, fields, replace

from .background import BumpProfile, GasParams
from .errors import DomainError


class ConfigError(ValueError):
    """Invalid or unreadable configuration (usage error)."""


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.split(",") if x.strip())


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.split(",") if x.strip())


def _strs(text: str) -> tuple[str, ...]:
    return tuple(x.strip() for x in text.split(",") if x.strip())


# section, key, parser for every field
_SCHEMA = {
    "gamma": ("gas", float),
    "q0": ("gas", float),
    "phi0_rad": ("gas", float),
    "delta": ("gas", float),
    "n_phi": ("grid", int),
    "r_max": ("grid", float),
    "store_every": ("grid", int),
    "kappa": ("grid", float),
    "max_rel_step": ("grid", float),
    "family": ("perturbation", str),
    "center_frac": ("perturbation", float),
    "width_frac": ("perturbation", float),
    "amp_phi0": ("perturbation", float),
    "amp_phi1": ("perturbation", float),
    "eps_list": ("perturbation", _floats),
    "background_r_max": ("diagnostics", float),
    "background_n": ("diagnostics", int),
    "energy_k": ("diagnostics", _ints),
    "energy_T": ("diagnostics", _floats),
    "energy_eps": ("diagnostics", _floats),
    "decay_window_dr": ("diagnostics", _floats),
    "decay_window_z": ("diagnostics", _floats),
    "decay_r_max": ("diagnostics", float),
    "cert_gammas": ("diagnostics", _floats),
    "mu_offset": ("diagnostics", float),
    "ineq_families": ("diagnostics", _strs),
    "ineq_members": ("diagnostics", int),
    "ineq_T": ("diagnostics", _floats),
    "ineq_levels": ("diagnostics", _ints),
    "z_probes": ("diagnostics", int),
    "out_dir": ("output", str),
    "seed": ("run", int),
}
_KEY_ALIASES = {("output", "dir"): "out_dir"}


@dataclass(frozen=True)
class ExperimentConfig:
    gamma: float = 1.4
    q0: float = 1.2
    phi0_rad: float = math.pi / 6
    delta: float = float("nan")  # nan: default 1/2 min(gamma-1, sigma-(gamma-1))
    n_phi: int = 129
    r_max: float = 100.0
    store_every: int = 1
    kappa: float = 0.5
    max_rel_step: float = 0.05
    family: str = "bump"
    center_frac: float = 0.5
    width_frac: float = 0.3
    amp_phi0: float = 0.0
    amp_phi1: float = 1.0
    eps_list: tuple[float, ...] = (0.0, 1e-3)
    background_r_max: float = 1e6
    background_n: int = 200
    energy_k: tuple[int, ...] = (0, 1)
    energy_T: tuple[float, ...] = (10.0, 20.0, 50.0, 100.0)
    energy_eps: tuple[float, ...] = (5e-4, 1e-3, 2e-3)
    decay_window_dr: tuple[float, ...] = (10.0, 100.0)
    decay_window_z: tuple[float, ...] = (1e3, 1e4)
    decay_r_max: float = 1e4
    cert_gammas: tuple[float, ...] = (1.2, 1.4, 1.6, 1.8)
    mu_offset: float = 0.0
    ineq_families: tuple[str, ...] = ("bump",)
    ineq_members: int = 50
    ineq_T: tuple[float, ...] = (2.0, 4.0, 8.0, 16.0)
    ineq_levels: tuple[int, ...] = (0, 1, 2)
    z_probes: int = 100
    out_dir: str = "out"
    seed: int = 0

    def __post_init__(self):
        try:
            self.gas_params()
        except DomainError as exc:
            raise ConfigError(str(exc)) from exc
        if self.family != "bump":
            raise ConfigError(f"unknown profile family {self.family!r}")
        if self.n_phi < 18:
            raise ConfigError("n_phi must be at least 18")
        if not self.r_max > 1.0 or not self.decay_r_max > 1.0 or not self.background_r_max > 1.0:
            raise ConfigError("radii must exceed 1")
        if self.store_every < 1:
            raise ConfigError("store_every must be positive")
        if not (0.0 < self.kappa <= 1.0 and 0.0 < self.max_rel_step <= 0.5):
            raise ConfigError("kappa must lie in (0, 1] and max_rel_step in (0, 0.5]")
        if not self.eps_list:
            raise ConfigError("eps_list must be nonempty")
        if any(e < 0.0 for e in self.eps_list + self.energy_eps):
            raise ConfigError("amplitudes must be nonnegative")
        lo, hi = self.center_frac - self.width_frac, self.center_frac + self.width_frac
        if not (self.width_frac > 0.0 and hi < 1.0 and (lo > 0.0 or self.center_frac == 0.0)):
            raise ConfigError("profile support must lie strictly inside the channel or be centred on the axis")
        for w in (self.decay_window_dr, self.decay_window_z):
            if len(w) != 2 or not 1.0 <= w[0] < w[1]:
                raise ConfigError("decay windows are two increasing radii >= 1")
        if any(k not in (0, 1) for k in self.energy_k):
            raise ConfigError("energy_k entries must be 0 or 1")
        if any(f not in ("bump", "Z/r", "drZ", "dr2") for f in self.ineq_families):
            raise ConfigError("ineq_families entries must be bump, Z/r, drZ or dr2")
        if self.ineq_members < 1 or any(t <= 1.0 for t in self.ineq_T) or any(l < 0 for l in self.ineq_levels):
            raise ConfigError("invalid inequality family settings")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must fit in an unsigned 64-bit integer")

    def gas_params(self, gamma: float | None = None) -> GasParams:
        g = self.gamma if gamma is None else gamma
        delta = None if math.isnan(self.delta) or gamma is not None else self.delta
        return GasParams.from_entrance(gamma=g, q0=self.q0, phi0=self.phi0_rad, delta=delta)

    def profiles(self):
        c = self.center_frac * self.phi0_rad
        w = self.width_frac * self.phi0_rad
        return BumpProfile(self.amp_phi0, c, w), BumpProfile(self.amp_phi1, c, w)

    def refined(self, level: int) -> "ExperimentConfig":
        """Angular grid scaled by 2**level and the relative step cap by 2**-level."""
        if level == 0:
            return self
        n = (self.n_phi - 1) * 2**level + 1 if level > 0 else (self.n_phi - 1) // 2 ** (-level) + 1
        return replace(self, n_phi=int(n), max_rel_step=self.max_rel_step / 2.0**level)

    def as_items(self) -> list[tuple[str, str]]:
        return [(f.name, repr(getattr(self, f.name))) for f in fields(self)]


def load_config(path=None, **overrides) -> ExperimentConfig:
    """Read an INI file (or only defaults when ``path`` is None) and apply overrides."""
    values = {}
    if path is not None:
        cp = configparser.ConfigParser()
        try:
            with open(path, encoding="utf-8") as fh:
                cp.read_file(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except configparser.Error as exc:
            raise ConfigError(f"malformed config {path}: {exc}") from exc
        # configparser lowercases option names
        by_loc = {(sec, name.lower()): name for name, (sec, _) in _SCHEMA.items()}
        by_loc.update(_KEY_ALIASES)
        for sec in cp.sections():
            for key, text in cp.items(sec):
                name = by_loc.get((sec, key))
                if name is None:
                    raise ConfigError(f"unknown key [{sec}] {key}")
                try:
                    values[name] = _SCHEMA[name][1](text)
                except ValueError as exc:
                    raise ConfigError(f"bad value for [{sec}] {key}: {text!r}") from exc
    values.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return ExperimentConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
