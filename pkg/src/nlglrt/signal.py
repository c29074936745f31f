"""Two-source array scenes and the tanh hardware nonlinearity.

A scene is ``z(t) = x(u1) a1(t) g1 + x(u2) a2(t) g2 1{t >= T0} + n(t)`` on an
M-element half-wavelength uniform linear array, with the element-wise
compression ``tanh(alpha * x) / alpha`` applied separately to I and Q.

Random streams
--------------
``numpy.random.SeedSequence(seed).spawn(5)`` feeds five PCG64 generators, in
order: interferer bits, SOI bits, noise, interferer carrier phase, SOI carrier
phase. Changing one source (e.g. muting the SOI) never perturbs the others.
"""
import math
from dataclasses import asdict, dataclass, fields

import numpy as np

from .errors import InvalidConfig

_STREAMS = ("interferer_bits", "soi_bits", "noise", "interferer_phase", "soi_phase")


@dataclass(frozen=True)
class SceneConfig:
    num_antennas: int = 4
    num_samples: int = 2000
    window_k: int = 48
    onset: int = 1000
    dir_interferer: float = -0.5
    dir_soi: float = 0.5
    inr_db: float = 40.0
    snr_db: float = 15.0
    noise_variance: float = 1.0
    samples_per_symbol: int = 2
    # Residual IF carrier on both transmitted waveforms, in cycles per sample.
    # 0 gives a pure constant-envelope baseband scene.
    carrier_cycles_per_sample: float = 0.1234
    alpha: float = 0.03
    seed: int = 0

    def __post_init__(self):
        problems = self.violations()
        if problems:
            raise InvalidConfig("; ".join(problems))

    def violations(self):
        out = []
        if not 0 < self.window_k <= self.onset < self.num_samples:
            out.append(
                "require 0 < window_k <= onset < num_samples "
                f"(window_k={self.window_k}, onset={self.onset}, num_samples={self.num_samples})"
            )
        if self.num_antennas < 2:
            out.append(f"require num_antennas >= 2 (got {self.num_antennas})")
        if self.dir_interferer == self.dir_soi:
            out.append(f"require dir_interferer != dir_soi (both {self.dir_soi})")
        for name in ("dir_interferer", "dir_soi"):
            if not -1.0 <= getattr(self, name) <= 1.0:
                out.append(f"require {name} in [-1, 1] (got {getattr(self, name)})")
        if self.samples_per_symbol < 1:
            out.append(f"require samples_per_symbol >= 1 (got {self.samples_per_symbol})")
        if not self.alpha > 0:
            out.append(f"require alpha > 0 (got {self.alpha})")
        if not self.noise_variance > 0:
            out.append(f"require noise_variance > 0 (got {self.noise_variance})")
        if not self.carrier_cycles_per_sample >= 0:
            out.append(
                f"require carrier_cycles_per_sample >= 0 (got {self.carrier_cycles_per_sample})"
            )
        if not 0 <= self.seed < 2**64:
            out.append(f"require 0 <= seed < 2**64 (got {self.seed})")
        return out

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise InvalidConfig(f"unknown scene field(s): {', '.join(unknown)}")
        return cls(**data)


@dataclass(frozen=True)
class Scene:
    z_linear: np.ndarray
    z_nonlinear: np.ndarray
    soi_active_mask: np.ndarray
    config: SceneConfig


def steering_vector(u, num_antennas):
    """Half-wavelength ULA response ``exp(i pi m u)``, m = 0..M-1."""
    m = np.arange(num_antennas)
    return np.exp(1j * np.pi * m * u)


def gen_bpsk(num_samples, samples_per_symbol, rng):
    """Equiprobable +/-1 symbols held for ``samples_per_symbol`` samples."""
    if num_samples < 1 or samples_per_symbol < 1:
        raise ValueError("num_samples and samples_per_symbol must be >= 1")
    num_symbols = -(-num_samples // samples_per_symbol)
    bits = np.asarray(rng.integers(0, 2, size=num_symbols))
    symbols = np.where(bits == 1, 1.0, -1.0)
    return np.repeat(symbols, samples_per_symbol)[:num_samples].astype(np.complex128)


def apply_nonlinearity(z, alpha):
    """``tanh(alpha x) / alpha`` on the real and imaginary parts independently."""
    if not alpha > 0:
        raise ValueError(f"alpha must be > 0, got {alpha}")
    z = np.asarray(z, dtype=np.complex128)
    out = np.empty_like(z)
    out.real = np.tanh(alpha * z.real) / alpha
    out.imag = np.tanh(alpha * z.imag) / alpha
    return out


def _db_gain(db, noise_variance):
    # amplitude giving power/noise = 10^(db/10); -inf dB mutes the source
    if db == -math.inf:
        return 0.0
    return math.sqrt(noise_variance * 10.0 ** (db / 10.0))


def _streams(seed):
    children = np.random.SeedSequence(seed).spawn(len(_STREAMS))
    return {name: np.random.Generator(np.random.PCG64(c)) for name, c in zip(_STREAMS, children)}


def _carrier(rng, cfg):
    if cfg.carrier_cycles_per_sample == 0:
        return 1.0
    phase = rng.uniform(0.0, 2.0 * np.pi)
    t = np.arange(cfg.num_samples)
    # sqrt(2) keeps unit average power
    return math.sqrt(2.0) * np.cos(2.0 * np.pi * cfg.carrier_cycles_per_sample * t + phase)


def synthesize_scene(config):
    """Generate the linear and compressed snapshot matrices for ``config``."""
    cfg = config
    if cfg.violations():
        raise InvalidConfig("; ".join(cfg.violations()))
    rng = _streams(cfg.seed)
    m, length = cfg.num_antennas, cfg.num_samples

    a1 = gen_bpsk(length, cfg.samples_per_symbol, rng["interferer_bits"])
    a2 = gen_bpsk(length, cfg.samples_per_symbol, rng["soi_bits"])
    noise = math.sqrt(cfg.noise_variance / 2.0) * (
        rng["noise"].standard_normal((m, length)) + 1j * rng["noise"].standard_normal((m, length))
    )
    a1 = a1 * _carrier(rng["interferer_phase"], cfg)
    a2 = a2 * _carrier(rng["soi_phase"], cfg)

    active = np.arange(length) >= cfg.onset
    g1 = _db_gain(cfg.inr_db, cfg.noise_variance)
    g2 = _db_gain(cfg.snr_db, cfg.noise_variance)
    interferer = np.outer(steering_vector(cfg.dir_interferer, m), g1 * a1)
    soi = np.outer(steering_vector(cfg.dir_soi, m), g2 * a2 * active)
    z = interferer + soi + noise
    return Scene(
        z_linear=z,
        z_nonlinear=apply_nonlinearity(z, cfg.alpha),
        soi_active_mask=active,
        config=cfg,
    )
