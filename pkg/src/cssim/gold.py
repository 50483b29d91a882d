"""Gold-sequence dictionaries from LFSR-generated maximum-length sequences.

Binary convention used throughout: bit 0 maps to +1 and bit 1 maps to -1,
so XOR of binary sequences becomes elementwise product of the +/-1 vectors.
The LFSR is a Fibonacci register: state cell e holds bit a[n+e], the output
is the oldest cell a[n], and the feedback implements the recurrence read off
the feedback polynomial (constant term included).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidPair, LengthMismatch, NotMaximumLength

# Feedback polynomial pairs known to give preferred (three-valued) pairs,
# keyed by register length m. Each entry is a pair of exponent sets; the
# constant term is implicit.
PREFERRED_PAIRS: dict[int, tuple[frozenset[int], frozenset[int]]] = {
    5: (frozenset({5, 2}), frozenset({5, 4, 3, 2})),
    7: (frozenset({7, 6}), frozenset({7, 4})),
    10: (frozenset({10, 3}), frozenset({10, 9, 8, 6, 3, 2})),
}


def t_value(m: int) -> int:
    """Three-valued correlation parameter t for register length m."""
    if m % 2 == 1:
        return 2 ** ((m + 1) // 2) + 1
    return 2 ** ((m + 2) // 2) + 1


@dataclass(frozen=True)
class FeedbackPolynomial:
    """A binary feedback polynomial X^m + ... + 1.

    ``taps`` holds the exponents present between 1 and m inclusive; the
    constant term is always present and is not listed.
    """

    degree: int
    taps: frozenset[int]

    def __post_init__(self):
        if self.degree < 1:
            raise ValueError("polynomial degree must be positive")
        object.__setattr__(self, "taps", frozenset(self.taps))
        if self.degree not in self.taps:
            raise ValueError(f"degree term X^{self.degree} must be present in taps")
        if any(t < 1 or t > self.degree for t in self.taps):
            raise ValueError("tap exponents must lie in [1, degree]")

    def __str__(self) -> str:
        terms = [f"X^{e}" for e in sorted(self.taps, reverse=True)]
        return " + ".join(terms + ["1"])

    @classmethod
    def from_exponents(cls, exponents) -> "FeedbackPolynomial":
        """Build from an iterable of exponents; 0 (the constant) may be listed."""
        exps = {int(e) for e in exponents} - {0}
        return cls(degree=max(exps), taps=frozenset(exps))


@dataclass(frozen=True)
class MSequence:
    """Full-period +/-1 output of a maximal LFSR."""

    bits: np.ndarray
    source: FeedbackPolynomial
    seed: int

    @property
    def length(self) -> int:
        return self.bits.shape[0]


def generate_m_sequence(poly: FeedbackPolynomial, seed: int | None = None) -> MSequence:
    """Run the Fibonacci LFSR for one full period of 2^m - 1 steps.

    ``seed`` is the initial register contents as an m-bit word (cell e is bit
    e of the word); it defaults to all ones. Raises NotMaximumLength if the
    register state returns to the seed before the full period elapses, i.e.
    the polynomial is not maximal.
    """
    m = poly.degree
    n = 2**m - 1
    if seed is None:
        seed = n  # all-ones register
    seed = int(seed) & n
    if seed == 0:
        raise ValueError("LFSR seed must be nonzero")

    # Feedback bit positions: every exponent below the degree, plus the
    # implicit constant term at position 0.
    fb_positions = [e for e in poly.taps if e < m] + [0]
    fb_mask = 0
    for e in fb_positions:
        fb_mask |= 1 << e

    state = seed
    out = np.empty(n, dtype=np.int8)
    for i in range(n):
        out[i] = state & 1
        fb = bin(state & fb_mask).count("1") & 1
        state = (state >> 1) | (fb << (m - 1))
        if state == seed and i < n - 1:
            raise NotMaximumLength(
                f"{poly} has period {i + 1}, expected {n}"
            )
    assert state == seed, "full-period LFSR must return to its seed state"

    return MSequence(bits=1 - 2 * out.astype(np.int8), source=poly, seed=seed)


def periodic_correlation(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Periodic cross-correlation: entry l is sum_n a[n] * b[(n+l) mod N].

    Computed in the frequency domain and rounded back to exact integers,
    valid for +/-1-valued inputs.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape or a.ndim != 1:
        raise LengthMismatch(f"shapes {a.shape} and {b.shape} differ")
    spec = np.conj(np.fft.fft(a)) * np.fft.fft(b)
    corr = np.fft.ifft(spec).real
    return np.rint(corr).astype(np.int64)


@dataclass(frozen=True)
class GoldDictionary:
    """N x N dictionary whose column i is g1 XOR (g2 cyclically shifted by i+1)."""

    psi: np.ndarray
    m: int
    t: int
    g1: MSequence
    g2: MSequence
    correlation_values: tuple[int, ...] = field(default=())

    @property
    def n(self) -> int:
        return self.psi.shape[0]

    def column(self, i: int) -> np.ndarray:
        return self.psi[:, i]


def build_gold_dictionary(
    m: int,
    poly1: FeedbackPolynomial | None = None,
    poly2: FeedbackPolynomial | None = None,
) -> GoldDictionary:
    """Assemble the N x N Gold dictionary for register length m.

    For m in {5, 7, 10} the known preferred polynomial pair is used unless
    both polynomials are supplied. The pair is validated by checking that
    the periodic cross-correlation of the two m-sequences takes exactly the
    values {-1, -t, t-2}; otherwise InvalidPair is raised.
    """
    if poly1 is None or poly2 is None:
        if m not in PREFERRED_PAIRS:
            raise ValueError(
                f"no built-in preferred pair for m={m}; supply both polynomials"
            )
        taps1, taps2 = PREFERRED_PAIRS[m]
        poly1 = FeedbackPolynomial(m, taps1)
        poly2 = FeedbackPolynomial(m, taps2)
    if poly1.degree != m or poly2.degree != m:
        raise ValueError("polynomial degrees must both equal m")

    g1 = generate_m_sequence(poly1)
    g2 = generate_m_sequence(poly2)
    n = g1.length

    t = t_value(m)
    expected = {-1, -t, t - 2}
    cross = periodic_correlation(g1.bits, g2.bits)
    found = set(int(v) for v in np.unique(cross))
    if found != expected:
        raise InvalidPair(
            f"cross-correlation values {sorted(found)} != {sorted(expected)};"
            f" not a preferred pair for m={m}"
        )

    # Column i-1 carries shift i for i = 1..N; shift N wraps to the unshifted
    # g2. XOR in the binary domain is the product in the +/-1 domain.
    psi = np.empty((n, n), dtype=np.int8)
    for i in range(1, n + 1):
        shifted = np.roll(g2.bits, -i)
        psi[:, i - 1] = g1.bits * shifted

    return GoldDictionary(
        psi=psi,
        m=m,
        t=t,
        g1=g1,
        g2=g2,
        correlation_values=tuple(sorted(found)),
    )
