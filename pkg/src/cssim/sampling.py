"""Measurement operators mapping length-N chip vectors to M compressive samples.

Four kinds are supported:

* ``identity``   -- classic receiver, M = N.
* ``rademacher`` -- dense i.i.d. +/-1 matrix; rows are not orthogonal, so a
  prewhitener is required before reconstruction.
* ``rd``         -- random demodulator: per-chip +/-1 mixing followed by
  accumulate-and-dump over blocks of consecutive chips.
* ``css``        -- accumulate-and-dump alone; the transmitted spreading
  codes already provide the mixing.

Structured kinds (css, rd, identity) are applied through their block
structure in O(N); a dense realization is available for tests and debugging.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, InvalidRatio, RankDeficient

OPERATOR_KINDS = ("identity", "rademacher", "rd", "css")


def _row_bounds(n: int, m_rows: int) -> np.ndarray:
    """Accumulation-block boundaries: row r covers columns [b[r], b[r+1]).

    Boundaries sit at round(r*N/M) so row lengths differ by at most one when
    the ratio is not an integer; rows are disjoint and cover all N columns.
    """
    return np.array(
        [int(math.floor(r * n / m_rows + 0.5)) for r in range(m_rows + 1)],
        dtype=np.int64,
    )


@dataclass(frozen=True)
class MeasurementOperator:
    """An M x N real measurement matrix in structured form."""

    kind: str
    n: int
    m_rows: int
    kappa: float
    chipping: np.ndarray | None = None  # rd only, +/-1 of length n
    matrix: np.ndarray | None = None  # rademacher only, dense (m_rows, n)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.m_rows, self.n)

    def apply(self, x: np.ndarray) -> np.ndarray:
        """y = Theta @ x, acting on real and imaginary parts alike."""
        x = np.asarray(x)
        if x.shape != (self.n,):
            raise DimensionMismatch(
                f"operator expects length {self.n}, got {x.shape}"
            )
        if self.kind == "identity":
            return x.copy()
        if self.kind == "rademacher":
            return self.matrix @ x
        bounds = _row_bounds(self.n, self.m_rows)
        values = x if self.kind == "css" else self.chipping * x
        return np.add.reduceat(values, bounds[:-1])

    def compose(self, psi: np.ndarray) -> np.ndarray:
        """Dense A = Theta @ Psi without materializing Theta for structured kinds."""
        psi = np.asarray(psi, dtype=np.float64)
        if psi.shape[0] != self.n:
            raise DimensionMismatch(
                f"dictionary has {psi.shape[0]} rows, operator expects {self.n}"
            )
        if self.kind == "identity":
            return psi.copy()
        if self.kind == "rademacher":
            return self.matrix @ psi
        bounds = _row_bounds(self.n, self.m_rows)
        rows = psi if self.kind == "css" else self.chipping[:, None] * psi
        return np.add.reduceat(rows, bounds[:-1], axis=0)

    def to_dense(self) -> np.ndarray:
        """Explicit (m_rows, n) float matrix; intended for tests and dumps."""
        if self.kind == "identity":
            return np.eye(self.n)
        if self.kind == "rademacher":
            return self.matrix.astype(np.float64).copy()
        dense = np.zeros((self.m_rows, self.n))
        bounds = _row_bounds(self.n, self.m_rows)
        for r in range(self.m_rows):
            block = slice(bounds[r], bounds[r + 1])
            dense[r, block] = 1.0 if self.kind == "css" else self.chipping[block]
        return dense


def build_operator(
    kind: str,
    n: int,
    kappa: float,
    rng: np.random.Generator | None = None,
) -> MeasurementOperator:
    """Construct a measurement operator with M = round(n / kappa) rows.

    ``kappa`` is the subsampling ratio; 1 means chip-rate sampling. The
    identity kind requires kappa == 1. Random kinds (rademacher, rd) draw
    their +/-1 entries from ``rng``.
    """
    if kind not in OPERATOR_KINDS:
        raise ValueError(f"unknown operator kind {kind!r}")
    if kappa < 1:
        raise InvalidRatio(f"kappa must be >= 1, got {kappa}")
    m_rows = int(math.floor(n / kappa + 0.5))
    if m_rows < 1:
        raise InvalidRatio(f"kappa={kappa} leaves no measurement rows for n={n}")
    if kind == "identity":
        if m_rows != n:
            raise InvalidRatio("identity operator requires kappa == 1")
        return MeasurementOperator(kind, n, n, 1.0)

    chipping = None
    matrix = None
    if kind in ("rademacher", "rd"):
        if rng is None:
            raise ValueError(f"{kind} operator needs an rng for its +/-1 draws")
    if kind == "rd":
        chipping = (rng.integers(0, 2, size=n) * 2 - 1).astype(np.float64)
    elif kind == "rademacher":
        matrix = (rng.integers(0, 2, size=(m_rows, n)) * 2 - 1).astype(np.float64)
    return MeasurementOperator(kind, n, m_rows, float(kappa), chipping, matrix)


@dataclass(frozen=True)
class Prewhitener:
    """Noise whitening transform P = C^-1 with C the Cholesky factor of Theta Theta^T.

    Application is a lower-triangular solve with C; the explicit inverse is
    only formed on demand for inspection.
    """

    cholesky: np.ndarray  # lower-triangular C

    def apply(self, y: np.ndarray) -> np.ndarray:
        return scipy.linalg.solve_triangular(self.cholesky, y, lower=True)

    def apply_matrix(self, a: np.ndarray) -> np.ndarray:
        return scipy.linalg.solve_triangular(self.cholesky, a, lower=True)

    @property
    def p(self) -> np.ndarray:
        return scipy.linalg.solve_triangular(
            self.cholesky, np.eye(self.cholesky.shape[0]), lower=True
        )


def build_prewhitener(op: MeasurementOperator) -> Prewhitener | None:
    """Prewhitener for operators with non-orthogonal rows.

    Identity, RD and CSS rows are mutually orthogonal, so folded noise stays
    white and no prewhitening is needed; None is returned for those kinds.
    """
    if op.kind != "rademacher":
        return None
    gram = op.matrix @ op.matrix.T
    try:
        chol = scipy.linalg.cholesky(gram, lower=True)
    except scipy.linalg.LinAlgError as exc:
        raise RankDeficient(
            f"rows of {op.kind} operator are not linearly independent"
        ) from exc
    return Prewhitener(cholesky=chol)
