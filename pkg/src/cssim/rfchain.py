"""Oversampled emulation of the analog front end.

Chips are shaped with a root-raised-cosine filter at 10x the chip rate,
quadrature up-converted to a real passband signal at the RF emulation rate,
and (after channel noise) brought back to baseband by complex mixing plus a
brick-wall FFT filter. A matched RRC filter then produces chip-rate samples
that feed the measurement operator, optionally followed by a uniform
quantizer on the measurement stream.

All stage outputs carry an explicit sample-rate tag; rate changes are
performed by FFT-domain resampling, which is exact for band-limited content.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.signal

from .errors import DimensionMismatch, RateMismatch
from .sampling import MeasurementOperator


@dataclass(frozen=True)
class ChainConfig:
    chip_rate: float = 1e6
    baseband_oversampling: int = 10
    carrier: float = 3e6
    rf_sample_rate: float = 12e6
    rrc_rolloff: float = 1.0
    rrc_span: int = 8  # chips, total filter length span*oversampling + 1
    quantizer_bits: int | None = None

    def __post_init__(self):
        if not 0 < self.rrc_rolloff <= 1:
            raise ValueError("rrc_rolloff must lie in (0, 1]")
        if self.chip_rate <= 0 or self.rf_sample_rate <= 0 or self.carrier <= 0:
            raise ValueError("rates must be positive")
        if self.rf_sample_rate / self.chip_rate != int(
            self.rf_sample_rate / self.chip_rate
        ):
            raise ValueError("rf_sample_rate must be an integer multiple of chip_rate")
        if self.rrc_span % 2 != 0:
            raise ValueError("rrc_span must be even (symmetric half-span per edge)")

    @property
    def baseband_rate(self) -> float:
        return self.chip_rate * self.baseband_oversampling

    @property
    def rf_per_chip(self) -> int:
        return int(self.rf_sample_rate / self.chip_rate)

    @property
    def resample_ratio(self) -> Fraction:
        return Fraction(self.rf_per_chip, self.baseband_oversampling)


@dataclass(frozen=True)
class OversampledSignal:
    samples: np.ndarray
    rate: float

    def __len__(self) -> int:
        return self.samples.shape[0]


def rrc_taps(oversampling: int, rolloff: float, span: int) -> np.ndarray:
    """Unit-energy root-raised-cosine taps covering ``span`` chips."""
    beta = rolloff
    n_taps = span * oversampling + 1
    t = (np.arange(n_taps) - (n_taps - 1) / 2) / oversampling  # in chips
    h = np.empty(n_taps)
    for i, ti in enumerate(t):
        if abs(ti) < 1e-12:
            h[i] = 1.0 + beta * (4.0 / math.pi - 1.0)
        elif abs(abs(ti) - 1.0 / (4.0 * beta)) < 1e-12:
            h[i] = (beta / math.sqrt(2.0)) * (
                (1.0 + 2.0 / math.pi) * math.sin(math.pi / (4.0 * beta))
                + (1.0 - 2.0 / math.pi) * math.cos(math.pi / (4.0 * beta))
            )
        else:
            num = math.sin(math.pi * ti * (1.0 - beta)) + 4.0 * beta * ti * math.cos(
                math.pi * ti * (1.0 + beta)
            )
            den = math.pi * ti * (1.0 - (4.0 * beta * ti) ** 2)
            h[i] = num / den
    return h / np.linalg.norm(h)


def pulse_shape(
    x: np.ndarray,
    cfg: ChainConfig,
) -> tuple[OversampledSignal, OversampledSignal]:
    """Shape complex chips into I and Q waveforms at the baseband rate.

    Each chip drives the RRC filter at ``baseband_oversampling`` samples per
    chip; the full convolution keeps the filter tails, so the slot is padded
    by half a filter span at each edge rather than truncated.
    """
    x = np.asarray(x, dtype=np.complex128)
    os = cfg.baseband_oversampling
    taps = rrc_taps(os, cfg.rrc_rolloff, cfg.rrc_span)
    up = np.zeros(x.shape[0] * os, dtype=np.complex128)
    up[::os] = x
    shaped = np.convolve(up, taps)
    rate = cfg.baseband_rate
    return (
        OversampledSignal(shaped.real.copy(), rate),
        OversampledSignal(shaped.imag.copy(), rate),
    )


def _resample_to_rf(samples: np.ndarray, cfg: ChainConfig) -> np.ndarray:
    """FFT-domain rate change from the baseband rate to the RF rate."""
    ratio = cfg.resample_ratio
    pad = (-len(samples)) % ratio.denominator
    if pad:
        samples = np.concatenate([samples, np.zeros(pad, dtype=samples.dtype)])
    num = len(samples) * ratio.numerator // ratio.denominator
    return scipy.signal.resample(samples, num)


def up_convert(
    i: OversampledSignal,
    q: OversampledSignal,
    cfg: ChainConfig,
) -> OversampledSignal:
    """Quadrature modulate onto the carrier: s = I cos(wc t) + Q sin(wc t)."""
    if i.rate != cfg.baseband_rate or q.rate != cfg.baseband_rate:
        raise RateMismatch(
            f"expected I/Q at {cfg.baseband_rate} Hz, got {i.rate} and {q.rate}"
        )
    if len(i) != len(q):
        raise RateMismatch("I and Q must have equal length")
    i_rf = _resample_to_rf(i.samples, cfg)
    q_rf = _resample_to_rf(q.samples, cfg)
    t = np.arange(i_rf.shape[0]) / cfg.rf_sample_rate
    w = 2.0 * math.pi * cfg.carrier
    s = i_rf * np.cos(w * t) + q_rf * np.sin(w * t)
    return OversampledSignal(s, cfg.rf_sample_rate)


def down_convert(s: OversampledSignal, cfg: ChainConfig) -> OversampledSignal:
    """Perfect direct down-conversion by complex mixing and FFT brick wall.

    Mixes with exp(+j wc t) (the phase conjugate of the transmit quadrature
    convention), zeroes every FFT bin at or above the chip rate, and inverse
    transforms. At roll-off <= 1 the pulse spectrum vanishes at the chip-rate
    edge, so the closed cutoff discards no signal energy.
    """
    if s.rate != cfg.rf_sample_rate:
        raise RateMismatch(f"expected RF rate {cfg.rf_sample_rate}, got {s.rate}")
    n = len(s)
    t = np.arange(n) / cfg.rf_sample_rate
    mixed = 2.0 * s.samples * np.exp(2j * math.pi * cfg.carrier * t)
    spectrum = np.fft.fft(mixed)
    freqs = np.fft.fftfreq(n, d=1.0 / cfg.rf_sample_rate)
    spectrum[np.abs(freqs) >= cfg.chip_rate * (1.0 - 1e-9)] = 0.0
    return OversampledSignal(np.fft.ifft(spectrum), cfg.rf_sample_rate)


def _chain_delay_samples(cfg: ChainConfig) -> int:
    """Total shaping + matched-filter group delay, in RF-rate samples."""
    tx_taps = cfg.rrc_span * cfg.baseband_oversampling + 1
    mf_taps = cfg.rrc_span * cfg.rf_per_chip + 1
    tx_delay = (tx_taps - 1) / 2 * float(cfg.resample_ratio)
    return int(round(tx_delay)) + (mf_taps - 1) // 2


def matched_filter_and_sample(
    bb: OversampledSignal,
    op: MeasurementOperator,
    cfg: ChainConfig,
) -> np.ndarray:
    """RRC matched filter, chip-instant sampling, then the measurement operator.

    The chip-rate sequence is read at the cascade group delay; the operator
    turns the N chip samples into M compressive samples (for css this is the
    accumulate-and-dump of consecutive chips).
    """
    if bb.rate != cfg.rf_sample_rate:
        raise RateMismatch(f"expected baseband at {cfg.rf_sample_rate}, got {bb.rate}")
    mf = rrc_taps(cfg.rf_per_chip, cfg.rrc_rolloff, cfg.rrc_span)
    filtered = np.convolve(bb.samples, mf)
    delay = _chain_delay_samples(cfg)
    idx = delay + cfg.rf_per_chip * np.arange(op.n)
    if idx[-1] >= filtered.shape[0]:
        raise DimensionMismatch(
            f"baseband signal too short for {op.n} chips"
        )
    chips = filtered[idx]
    return op.apply(chips)


def chain_gain(cfg: ChainConfig) -> complex:
    """Complex gain of one chip through the noiseless shaping/RF/MF cascade."""
    from .sampling import build_operator

    probe = np.zeros(8, dtype=np.complex128)
    probe[0] = 1.0
    i, q = pulse_shape(probe, cfg)
    s = up_convert(i, q, cfg)
    bb = down_convert(s, cfg)
    y = matched_filter_and_sample(bb, build_operator("identity", 8, 1), cfg)
    return complex(y[0])


def quantize_uniform(
    v: np.ndarray,
    bits: int,
    clip: float | None = None,
) -> np.ndarray:
    """Mid-rise uniform quantizer applied per real component.

    Components are clipped to [-L, L] with L = 3x the RMS of the combined
    real/imaginary sample stream unless ``clip`` pins the level explicitly,
    then rounded to the nearest of 2^bits uniform levels. With a pinned clip
    level the map is idempotent.
    """
    if bits < 1:
        raise ValueError("quantizer needs at least 1 bit")
    v = np.asarray(v)
    is_complex = np.iscomplexobj(v)
    comps = (
        np.concatenate([v.real, v.imag]) if is_complex else v.astype(np.float64)
    )
    level = clip if clip is not None else 3.0 * float(np.sqrt(np.mean(comps**2)))
    if level == 0.0:
        return v.copy()
    half = 2 ** (bits - 1)
    step = level / half

    def q(c):
        idx = np.clip(np.floor(c / step), -half, half - 1)
        return step * (idx + 0.5)

    if is_complex:
        return q(v.real) + 1j * q(v.imag)
    return q(comps)


def transmit_receive(
    x: np.ndarray,
    op: MeasurementOperator,
    cfg: ChainConfig,
    rng: np.random.Generator,
    ebn0_db: float | None = None,
    n_bits: int | None = None,
    quantizer_bits: int | None = None,
) -> np.ndarray:
    """Run one slot of chips through the full RF chain.

    Noise is real AWGN on the passband signal, scaled so that the ratio of
    transmitted energy per information bit to the noise spectral density
    matches ``ebn0_db`` (``n_bits`` bits per slot). Quantization, when
    enabled, applies to the M measurement samples.
    """
    i, q = pulse_shape(x, cfg)
    s = up_convert(i, q, cfg)
    if ebn0_db is not None and not math.isinf(ebn0_db):
        if n_bits is None:
            raise ValueError("n_bits is required when adding noise")
        energy = float(np.sum(s.samples**2))
        ebn0 = 10.0 ** (ebn0_db / 10.0)
        sigma = math.sqrt(energy / (2.0 * n_bits * ebn0))
        s = OversampledSignal(s.samples + sigma * rng.standard_normal(len(s)), s.rate)
    bb = down_convert(s, cfg)
    y = matched_filter_and_sample(bb, op, cfg)
    bits = quantizer_bits if quantizer_bits is not None else cfg.quantizer_bits
    if bits is not None:
        y = quantize_uniform(y, bits)
    return y
