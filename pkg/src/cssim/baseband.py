"""Slot-level discrete signal model: sparse QPSK encoding, AWGN, decoding.

Bit-to-symbol convention (Gray): the first bit of a pair sets the real sign,
the second the imaginary sign, 0 mapping to +1. So 00 -> 1+j, 01 -> 1-j,
11 -> -1-j, 10 -> -1+j. Symbols ride the dictionary columns named by the
support set; symbol k of a block is paired with support index k.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import mpmath
import numpy as np

from .errors import SupportOutOfRange
from .gold import GoldDictionary


@dataclass(frozen=True)
class SparseSymbolVector:
    """Sparse QPSK coefficient vector: alpha entries in {+-1 +-j, 0}."""

    alpha: np.ndarray
    support: np.ndarray

    @property
    def sparsity(self) -> int:
        return self.support.shape[0]


@dataclass(frozen=True)
class BitBlock:
    """2S data bits and the support indices carrying them, pairwise aligned."""

    bits: np.ndarray
    support: np.ndarray

    def __post_init__(self):
        if self.bits.shape[0] != 2 * self.support.shape[0]:
            raise ValueError("a bit block carries exactly 2 bits per support index")


@dataclass(frozen=True)
class NoisyObservation:
    """Signal plus circular complex AWGN at a requested SNR."""

    y: np.ndarray
    sigma2: float  # per-complex-dimension noise variance
    snr: float  # linear, ||x||^2 / (N sigma^2)


def qpsk_symbol(b0: int, b1: int) -> complex:
    return (1 - 2 * b0) + 1j * (1 - 2 * b1)


def qpsk_bits(z: complex) -> tuple[int, int]:
    """Hard decision by the signs of the real and imaginary parts."""
    return (0 if z.real > 0 else 1, 0 if z.imag > 0 else 1)


def random_bit_block(n: int, s: int, rng: np.random.Generator) -> BitBlock:
    """Uniform random support (without replacement) and 2s uniform bits."""
    support = np.sort(rng.choice(n, size=s, replace=False))
    bits = rng.integers(0, 2, size=2 * s)
    return BitBlock(bits=bits, support=support)


def encode(
    bits: np.ndarray,
    support: np.ndarray,
    dictionary: GoldDictionary,
) -> tuple[SparseSymbolVector, np.ndarray]:
    """Map bit pairs onto QPSK symbols at the support and spread: x = Psi alpha."""
    bits = np.asarray(bits)
    support = np.asarray(support)
    n = dictionary.n
    if np.any(support < 0) or np.any(support >= n) or len(set(support.tolist())) != len(support):
        raise SupportOutOfRange(f"support must be distinct indices in [0, {n})")
    if bits.shape[0] != 2 * support.shape[0]:
        raise ValueError("need exactly 2 bits per support index")

    symbols = (1 - 2 * bits[0::2]) + 1j * (1 - 2 * bits[1::2])
    alpha = np.zeros(n, dtype=np.complex128)
    alpha[support] = symbols
    x = dictionary.psi[:, support].astype(np.float64) @ symbols
    return SparseSymbolVector(alpha=alpha, support=support), x


def add_awgn(
    x: np.ndarray,
    snr_db: float | None,
    rng: np.random.Generator,
) -> NoisyObservation:
    """Add circular complex white Gaussian noise at the requested SNR.

    The per-complex-dimension variance is sigma^2 = ||x||^2 / (N 10^(snr/10)),
    split evenly between the real and imaginary parts, so that the ratio
    ||x||^2 / (N sigma^2) equals the requested linear SNR. ``snr_db=None``
    (or +inf) disables the noise entirely.
    """
    x = np.asarray(x, dtype=np.complex128)
    n = x.shape[0]
    if snr_db is None or math.isinf(snr_db):
        return NoisyObservation(y=x.copy(), sigma2=0.0, snr=math.inf)
    energy = float(np.vdot(x, x).real)
    snr_lin = 10.0 ** (snr_db / 10.0)
    sigma2 = energy / (n * snr_lin)
    scale = math.sqrt(sigma2 / 2.0)
    w = scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    return NoisyObservation(y=x + w, sigma2=sigma2, snr=snr_lin)


def decode(alpha_hat: np.ndarray, support: np.ndarray | None = None) -> BitBlock:
    """Hard-decide QPSK bits from reconstructed coefficients.

    With ``support`` given, decisions are taken at those indices (receiver
    knows the support); otherwise the nonzero entries of alpha_hat are used
    in ascending index order.
    """
    alpha_hat = np.asarray(alpha_hat)
    if support is None:
        support = np.flatnonzero(alpha_hat)
    support = np.asarray(support)
    bits = np.empty(2 * support.shape[0], dtype=np.int64)
    bits[0::2] = alpha_hat[support].real <= 0
    bits[1::2] = alpha_hat[support].imag <= 0
    return BitBlock(bits=bits, support=support)


def count_bit_errors(
    sent: BitBlock,
    alpha_hat: np.ndarray,
    spurious: str = "ignore",
) -> int:
    """Bit errors of a reconstruction against the transmitted block.

    A support index missing from the reconstruction (coefficient exactly
    zero) counts as 2 errors. Detected indices that carried no transmitted
    bits are ignored by default; ``spurious="count"`` charges 2 errors each
    instead.
    """
    errors = 0
    for k, idx in enumerate(sent.support):
        z = alpha_hat[idx]
        if z == 0:
            errors += 2
            continue
        b0, b1 = qpsk_bits(z)
        errors += int(b0 != sent.bits[2 * k]) + int(b1 != sent.bits[2 * k + 1])
    if spurious == "count":
        extra = set(np.flatnonzero(alpha_hat).tolist()) - set(sent.support.tolist())
        errors += 2 * len(extra)
    elif spurious != "ignore":
        raise ValueError(f"unknown spurious policy {spurious!r}")
    return errors


@functools.lru_cache(maxsize=4096)
def theoretical_ber_mfsk(
    alphabet: int,
    value: float,
    variant: str = "snr",
) -> float:
    """Non-coherent MFSK bit error probability reference curve.

    variant "snr": Pb = N/(2(N-1)) * (1/N) * sum_{k=2}^{N} (-1)^k C(N,k)
    exp(N*SNR*(1/k - 1)) with N the alphabet size and SNR linear.
    variant "ebn0": the exponent becomes log2(4)*(Eb/N0)*(1/k - 1), the
    factor matching the two bits carried per QPSK symbol.

    The alternating sum cancels catastrophically for large alphabets, so the
    terms are evaluated in the log domain with arbitrary-precision binomials
    at a working precision scaled to the alphabet size.
    """
    if alphabet < 2:
        raise ValueError("alphabet size must be at least 2")
    if variant == "snr":
        gamma = alphabet * value
    elif variant == "ebn0":
        gamma = math.log2(4) * value
    else:
        raise ValueError(f"unknown variant {variant!r}")
    if math.isinf(gamma):
        return 0.0

    # log10 C(N, N/2) ~ 0.302 N bounds the largest term magnitude.
    dps = 40 + int(0.302 * alphabet)
    with mpmath.workdps(dps):
        g = mpmath.mpf(gamma)
        terms = []
        for k in range(2, alphabet + 1):
            log_binom = (
                mpmath.loggamma(alphabet + 1)
                - mpmath.loggamma(k + 1)
                - mpmath.loggamma(alphabet - k + 1)
            )
            term = mpmath.e ** (log_binom + g * (mpmath.mpf(1) / k - 1))
            terms.append(term if k % 2 == 0 else -term)
        total = mpmath.fsum(terms)
        pb = total / (2 * (alphabet - 1))
    return float(pb)
