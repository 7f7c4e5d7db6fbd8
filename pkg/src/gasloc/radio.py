"""Measurement models: received power, shadowing, ranging, arrays and the
multipath OFDM channel.

Two power conventions live here and are kept apart on purpose: the
log-distance model works in dBm/dB on received power, while the channel
tensor uses a linear *amplitude* ``10**(G_p/20)`` derived from the path gain
in dB.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Sequence

import numpy as np
import yaml

from .constants import SPEED_OF_LIGHT
from .errors import ConfigurationError, DomainError, ScenarioError
from .geometry import AnglePair, unit_direction

LN10 = math.log(10.0)


@dataclass(frozen=True)
class RadioConfig:
    fc_hz: float = 2.0e9
    bandwidth_hz: float = 20.0e6
    ptx_dbm: float = 20.0
    c_db: float = 0.0
    pathloss_exponent: float = 2.0
    d0_m: float = 1.0
    n_subcarriers: int = 64
    n_symbols: int = 14
    subcarrier_spacing_hz: float = 120.0e3
    cp_s: float = 0.0

    def __post_init__(self):
        if not (self.fc_hz > 0 and self.d0_m > 0 and self.pathloss_exponent > 0):
            raise ConfigurationError("fc_hz, d0_m and pathloss_exponent must be positive")
        if self.n_subcarriers < 1 or self.n_symbols < 1 or not self.subcarrier_spacing_hz > 0:
            raise ConfigurationError("OFDM grid must be non-empty with positive spacing")

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.fc_hz

    @property
    def symbol_duration(self) -> float:
        return self.cp_s + 1.0 / self.subcarrier_spacing_hz


class LinkCondition(str, Enum):
    LOS = "LOS"
    NLOS = "NLOS"


@dataclass(frozen=True)
class LosProbability:
    """LOS probability versus elevation.

    ``logistic``: ``1 / (1 + alpha * exp(-beta * (elev_deg - alpha)))``;
    ``constant``: ``value`` regardless of elevation.
    """

    model: str = "logistic"
    alpha: float = 9.61
    beta: float = 0.16
    value: float = 1.0

    def __post_init__(self):
        if self.model not in ("logistic", "constant"):
            raise ConfigurationError(f"unknown LOS probability model {self.model!r}")
        if self.model == "constant" and not 0.0 <= self.value <= 1.0:
            raise ConfigurationError("constant LOS probability must be in [0, 1]")
        if self.model == "logistic" and (self.alpha < 0 or self.beta < 0):
            raise ConfigurationError("logistic LOS parameters must be non-negative")

    def __call__(self, elevation: float) -> float:
        if self.model == "constant":
            return self.value
        deg = math.degrees(elevation)
        return 1.0 / (1.0 + self.alpha * math.exp(-self.beta * (deg - self.alpha)))


@dataclass(frozen=True)
class ShadowingParams:
    """Elevation-dependent shadowing: sigma_j = a_j * exp(-b_j * elevation).

    ``b`` coefficients are per radian.
    """

    a_los_db: float = 0.0
    b_los: float = 0.0
    a_nlos_db: float = 0.0
    b_nlos: float = 0.0
    plos: LosProbability = field(default_factory=lambda: LosProbability("constant", value=1.0))

    def __post_init__(self):
        if min(self.a_los_db, self.b_los, self.a_nlos_db, self.b_nlos) < 0:
            raise ConfigurationError("shadowing coefficients must be non-negative")

    @classmethod
    def preset(cls, name: str) -> "ShadowingParams":
        """Load one of the illustrative environment presets shipped with the package."""
        presets = load_shadowing_presets()
        try:
            return presets[name]
        except KeyError:
            raise ConfigurationError(
                f"unknown shadowing preset {name!r}; have {sorted(presets)}"
            ) from None

    def sigma(self, elevation: float) -> float:
        """Combined shadowing standard deviation (dB) at ``elevation``."""
        p = self.plos(elevation)
        s_los = elevation_shadowing_sigma(self, elevation, LinkCondition.LOS)
        s_nlos = elevation_shadowing_sigma(self, elevation, LinkCondition.NLOS)
        return math.sqrt(combined_shadowing_var(p, s_los, s_nlos))


_PRESET_FILE = Path(__file__).parent / "data" / "shadowing_presets.yaml"


def load_shadowing_presets(path=_PRESET_FILE) -> dict:
    with open(path, encoding="utf-8") as fh:
        raw = yaml.safe_load(fh)
    out = {}
    for name, entry in raw.items():
        try:
            plos = LosProbability(**entry["plos"])
            out[name] = ShadowingParams(
                a_los_db=entry["a_los_db"],
                b_los=entry["b_los_per_rad"],
                a_nlos_db=entry["a_nlos_db"],
                b_nlos=entry["b_nlos_per_rad"],
                plos=plos,
            )
        except (KeyError, TypeError) as exc:
            raise ScenarioError(f"preset {name!r} incomplete: {exc}") from None
    return out


@dataclass(frozen=True)
class AntennaArray:
    """Element positions in the array's local frame (xz-plane, metres).

    The gain model is ``efficiency * 4 pi A_e / lambda**2`` with a constant
    effective aperture; ``aperture_m2=None`` means isotropic (gain 1).
    """

    positions: np.ndarray
    efficiency: float = 1.0
    aperture_m2: float | None = None

    def __post_init__(self):
        pos = np.atleast_2d(np.asarray(self.positions, dtype=float))
        if pos.shape[0] < 1 or pos.shape[1] != 3:
            raise ConfigurationError("array needs at least one 3D element")
        if not np.all(np.isfinite(pos)):
            raise ConfigurationError("element positions must be finite")
        object.__setattr__(self, "positions", pos)

    def __len__(self) -> int:
        return self.positions.shape[0]

    @classmethod
    def single(cls) -> "AntennaArray":
        return cls(np.zeros((1, 3)))

    @classmethod
    def ula(cls, n: int, spacing: float, axis: str = "x") -> "AntennaArray":
        pos = np.zeros((n, 3))
        pos[:, "xyz".index(axis)] = np.arange(n) * spacing
        return cls(pos)

    @classmethod
    def ura(cls, nx: int, nz: int, spacing: float) -> "AntennaArray":
        gx, gz = np.meshgrid(np.arange(nx), np.arange(nz), indexing="ij")
        pos = np.zeros((nx * nz, 3))
        pos[:, 0] = gx.ravel() * spacing
        pos[:, 2] = gz.ravel() * spacing
        pos -= pos.mean(axis=0)
        return cls(pos)


def expected_rx_power(cfg: RadioConfig, d: float) -> float:
    """Mean received power in dBm (no shadowing)."""
    if d < cfg.d0_m:
        raise DomainError(f"distance {d} m is inside the reference distance {cfg.d0_m} m")
    return cfg.ptx_dbm + cfg.c_db - 10.0 * cfg.pathloss_exponent * math.log10(d / cfg.d0_m)


def antenna_gain(array: AntennaArray, psi: AnglePair, wavelength: float) -> float:
    if not wavelength > 0:
        raise DomainError("wavelength must be positive")
    if array.aperture_m2 is None:
        return 1.0
    return array.efficiency * 4.0 * math.pi * array.aperture_m2 / wavelength**2


def elevation_shadowing_sigma(p: ShadowingParams, elevation: float, cond) -> float:
    if not 0.0 <= elevation <= math.pi / 2 + 1e-12:
        raise DomainError(f"elevation {elevation} rad outside [0, pi/2]")
    if LinkCondition(cond) is LinkCondition.LOS:
        return p.a_los_db * math.exp(-p.b_los * elevation)
    return p.a_nlos_db * math.exp(-p.b_nlos * elevation)


def combined_shadowing_var(plos: float, sigma_los: float, sigma_nlos: float) -> float:
    if not 0.0 <= plos <= 1.0:
        raise DomainError(f"LOS probability {plos} outside [0, 1]")
    return plos**2 * sigma_los**2 + (1.0 - plos) ** 2 * sigma_nlos**2


# --- measurements ---------------------------------------------------------


@dataclass(frozen=True)
class Rss:
    value_dbm: float
    sigma_db: float = 0.0


@dataclass(frozen=True)
class Toa:
    value_s: float
    sigma_s: float = 0.0


@dataclass(frozen=True)
class TdoaPair:
    i: int
    j: int
    value_s: float
    sigma_s: float = 0.0

    def __post_init__(self):
        if self.i == self.j:
            raise ConfigurationError("TDOA pair needs two distinct anchors")


@dataclass(frozen=True)
class Aoa:
    angles: AnglePair
    sigma_rad: float = 0.0


@dataclass(frozen=True)
class PseudorangeRate:
    value_mps: float
    sigma_mps: float = 0.0


Measurement = Rss | Toa | TdoaPair | Aoa | PseudorangeRate


def sample_rss(cfg: RadioConfig, shadow: ShadowingParams, d: float, elevation: float,
               rng: np.random.Generator) -> Rss:
    mean = expected_rx_power(cfg, d)
    sigma = shadow.sigma(elevation)
    if sigma == 0.0:
        return Rss(mean, 0.0)
    return Rss(mean + sigma * rng.standard_normal(), sigma)


def rss_to_distance(cfg: RadioConfig, prx_dbm) -> float:
    return cfg.d0_m * 10.0 ** ((cfg.ptx_dbm + cfg.c_db - prx_dbm) / (10.0 * cfg.pathloss_exponent))


def rss_range_sigma(cfg: RadioConfig, d: float, sigma_db: float) -> float:
    """First-order standard deviation of the RSS range estimate at distance ``d``."""
    return d * LN10 * sigma_db / (10.0 * cfg.pathloss_exponent)


def toa_range(t0: float, tr: float, bias: float = 0.0) -> float:
    return SPEED_OF_LIGHT * (tr - t0) + SPEED_OF_LIGHT * bias


def tdoa_range_diff(t1: float, t2: float) -> float:
    return (t1 - t2) * SPEED_OF_LIGHT


def rtt_range(t_out: float, t_back: float, t_proc: float) -> float:
    flight = t_back - t_out - t_proc
    if flight < 0:
        raise DomainError(f"negative round-trip flight time {flight} s")
    return SPEED_OF_LIGHT * flight / 2.0


def steering_vector(array: AntennaArray, psi: AnglePair, wavelength: float) -> np.ndarray:
    if not wavelength > 0:
        raise DomainError("wavelength must be positive")
    u = unit_direction(psi)
    return np.exp(1j * 2.0 * math.pi / wavelength * (array.positions @ u))


def nlos_path_length(pA, chain: Sequence, pU) -> float:
    """Length of the polyline anchor -> scatterers -> target."""
    pts = [np.asarray(pA, dtype=float)] + [np.asarray(s, dtype=float) for s in chain]
    if len(pts) < 2:
        raise ConfigurationError("scatterer chain is empty; use direct_distance")
    pts.append(np.asarray(pU, dtype=float))
    pts = np.array(pts)
    return float(np.linalg.norm(np.diff(pts, axis=0), axis=1).sum())


def frequency_shift_factor(v, u, cfo: float = 0.0) -> float:
    u = np.asarray(u, dtype=float)
    if abs(np.linalg.norm(u) - 1.0) > 1e-9:
        raise DomainError("direction must be a unit vector")
    return float(np.asarray(v, dtype=float) @ u) / SPEED_OF_LIGHT + cfo


@dataclass(frozen=True)
class PathSpec:
    gain: float
    delay_s: float
    freq_shift: float = 0.0
    aod: AnglePair = AnglePair(0.0, 0.0)
    aoa: AnglePair = AnglePair(0.0, 0.0)
    scatterers: tuple = ()

    def __post_init__(self):
        if self.delay_s < 0:
            raise ConfigurationError("path delay must be non-negative")

    @staticmethod
    def amplitude_from_path_gain_db(gp_db: float) -> float:
        return 10.0 ** (gp_db / 20.0)


def synth_channel(cfg: RadioConfig, tx: AntennaArray, rx: AntennaArray,
                  paths: Sequence[PathSpec]) -> np.ndarray:
    """Frequency/time-domain MIMO channel, shape (K_s, L_s, N_rx, N_tx)."""
    if not paths:
        raise ConfigurationError("at least one path is required")
    lam = cfg.wavelength
    k = np.arange(cfg.n_subcarriers)
    l = np.arange(cfg.n_symbols)
    H = np.zeros((cfg.n_subcarriers, cfg.n_symbols, len(rx), len(tx)), dtype=complex)
    for p in paths:
        delay = np.exp(-2j * math.pi * (cfg.fc_hz + k * cfg.subcarrier_spacing_hz) * p.delay_s)
        shift = np.exp(2j * math.pi * cfg.fc_hz * p.freq_shift * l * cfg.symbol_duration)
        spatial = np.outer(steering_vector(rx, p.aoa, lam), steering_vector(tx, p.aod, lam))
        H += p.gain * delay[:, None, None, None] * shift[None, :, None, None] * spatial
    return H


def received_symbol(W, H, f, s: complex, sigma_rx: float,
                    rng: np.random.Generator | None = None) -> np.ndarray:
    """``W^H H f s + n`` with ``n ~ CN(0, W^H W sigma_rx^2)``."""
    W = np.atleast_2d(np.asarray(W, dtype=complex))
    H = np.atleast_2d(np.asarray(H, dtype=complex))
    f = np.atleast_1d(np.asarray(f, dtype=complex))
    if W.shape[0] != H.shape[0] or H.shape[1] != f.shape[0]:
        raise ConfigurationError(
            f"shapes W{W.shape}, H{H.shape}, f{f.shape} are inconsistent"
        )
    y = W.conj().T @ H @ f * s
    if sigma_rx > 0:
        if rng is None:
            raise ConfigurationError("a generator is required for noisy symbols")
        n_rx = W.shape[0]
        w = (rng.standard_normal(n_rx) + 1j * rng.standard_normal(n_rx)) * (sigma_rx / math.sqrt(2.0))
        y = y + W.conj().T @ w
    return y
