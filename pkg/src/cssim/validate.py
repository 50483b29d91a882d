"""Pass/fail checks of result tables against theory and reference data.

Each check returns a CheckResult with the measured quantity, the expected
band, and a verdict; the CLI prints them as a table and exits nonzero when
any applicable check fails. Checks are selected by what a table contains,
so partial experiment runs validate only what they measured.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .baseband import theoretical_ber_mfsk
from .results import ResultTable

BER_SHIFT_LEVEL = 1e-3
RF_MATCH_LEVEL = 1e-2


@dataclass
class CheckResult:
    name: str
    passed: bool
    measured: str
    expected: str
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status:4s}  {self.name:38s} measured={self.measured:22s} expected={self.expected}"


def crossing_db(levels_db: np.ndarray, bers: np.ndarray, target: float) -> float | None:
    """Abscissa where a decreasing BER curve crosses ``target``.

    Interpolates linearly in log10(BER) between the bracketing grid points;
    returns None when the curve never brackets the target.
    """
    levels_db = np.asarray(levels_db, dtype=float)
    bers = np.asarray(bers, dtype=float)
    order = np.argsort(levels_db)
    levels_db, bers = levels_db[order], bers[order]
    for i in range(len(bers) - 1):
        b0, b1 = bers[i], bers[i + 1]
        if b0 >= target > b1 and b0 > 0 and b1 > 0:
            f = (math.log10(b0) - math.log10(target)) / (
                math.log10(b0) - math.log10(b1)
            )
            return float(levels_db[i] + f * (levels_db[i + 1] - levels_db[i]))
    return None


def theory_crossing_db(
    alphabet: int, target: float, variant: str = "snr"
) -> float:
    """Level (dB) where the non-coherent MFSK curve hits ``target``."""
    lo, hi = -60.0, 60.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if theoretical_ber_mfsk(alphabet, 10 ** (mid / 10.0), variant) > target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _curve(table: ResultTable, operator: str) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    axis = "ebn0_db" if any("ebn0_db" in r for r in table.rows) else "snr_db"
    rows = [r for r in table.rows if r["operator"] == operator]
    rows.sort(key=lambda r: r[axis])
    x = np.array([r[axis] for r in rows], dtype=float)
    b = np.array([r["ber"] for r in rows], dtype=float)
    bits = np.array([r["bits"] for r in rows], dtype=float)
    return x, b, bits


def _operators(table: ResultTable) -> list[str]:
    seen: list[str] = []
    for r in table.rows:
        if r["operator"] not in seen:
            seen.append(r["operator"])
    return seen


def check_classic_vs_theory(table: ResultTable, tol_db: float = 0.5) -> CheckResult | None:
    """Horizontal shift of the classic receiver from MFSK theory at BER 1e-3."""
    if "identity" not in _operators(table):
        return None
    spec = table.meta.get("spec", {})
    if spec.get("sparsity", 1) != 1:
        return None
    x, b, _ = _curve(table, "identity")
    alphabet = 2 ** spec.get("m", 10) - 1
    axis_is_ebn0 = any("ebn0_db" in r for r in table.rows)
    variant = "ebn0" if axis_is_ebn0 else "snr"
    measured = crossing_db(x, b, BER_SHIFT_LEVEL)
    theory = theory_crossing_db(alphabet, BER_SHIFT_LEVEL, variant)
    if measured is None:
        return CheckResult(
            "classic vs MFSK theory", False, "no 1e-3 crossing", f"|shift| <= {tol_db} dB"
        )
    shift = measured - theory
    return CheckResult(
        "classic vs MFSK theory",
        abs(shift) <= tol_db,
        f"{shift:+.2f} dB",
        f"|shift| <= {tol_db} dB",
        detail=f"measured crossing {measured:.2f} dB, theory {theory:.2f} dB",
    )


def _shift_between(table: ResultTable, op_a: str, op_b: str) -> float | None:
    """Crossing shift op_b minus op_a at the 1e-3 level, dB."""
    xa, ba, _ = _curve(table, op_a)
    xb, bb, _ = _curve(table, op_b)
    ca = crossing_db(xa, ba, BER_SHIFT_LEVEL)
    cb = crossing_db(xb, bb, BER_SHIFT_LEVEL)
    if ca is None or cb is None:
        return None
    return cb - ca


def check_noise_folding(table: ResultTable) -> list[CheckResult]:
    """3 dB per halving of the sampling rate, within +-1 dB."""
    ops = _operators(table)
    out = []
    pairs = [
        ("identity", "css_k2", "css k=2 vs classic"),
        ("css_k2", "css_k4", "css k=4 vs css k=2"),
    ]
    for op_a, op_b, label in pairs:
        if op_a not in ops or op_b not in ops:
            continue
        shift = _shift_between(table, op_a, op_b)
        if shift is None:
            out.append(
                CheckResult(f"noise folding: {label}", False, "no crossing", "3 +- 1 dB")
            )
        else:
            out.append(
                CheckResult(
                    f"noise folding: {label}",
                    2.0 <= shift <= 4.0,
                    f"{shift:+.2f} dB",
                    "3 +- 1 dB",
                )
            )
    return out


def check_css_vs_rd(table: ResultTable, tol_db: float = 0.5) -> CheckResult | None:
    ops = _operators(table)
    if "css_k2" not in ops or "rd_k2" not in ops:
        return None
    shift = _shift_between(table, "css_k2", "rd_k2")
    if shift is None:
        return CheckResult("css vs rd at k=2", False, "no crossing", f"|shift| <= {tol_db} dB")
    return CheckResult(
        "css vs rd at k=2", abs(shift) <= tol_db, f"{shift:+.2f} dB", f"|shift| <= {tol_db} dB"
    )


def check_ber_monotonic(table: ResultTable) -> list[CheckResult]:
    """BER non-increasing in SNR within one Monte-Carlo standard error."""
    out = []
    for op in _operators(table):
        x, b, bits = _curve(table, op)
        ok = True
        worst = 0.0
        for i in range(len(b) - 1):
            se = math.sqrt(max(b[i], 1e-12) * (1 - b[i]) / bits[i]) + math.sqrt(
                max(b[i + 1], 1e-12) * (1 - b[i + 1]) / bits[i + 1]
            )
            excess = b[i + 1] - b[i] - se
            worst = max(worst, excess)
            if excess > 0:
                ok = False
        out.append(
            CheckResult(
                f"BER monotone in SNR: {op}",
                ok,
                "monotone" if ok else f"excess {worst:.2e}",
                "non-increasing within 1 SE",
            )
        )
    return out


def load_tst_contour(path: str | Path | None = None) -> list[tuple[float, float]]:
    """The reference two-stage-thresholding transition contour (delta, rho)."""
    if path is not None:
        text = Path(path).read_text()
    else:
        text = (
            resources.files("cssim").joinpath("data/tst_contour.csv").read_text()
        )
    points = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#") or line.startswith("delta"):
            continue
        d, r = line.split(",")
        points.append((float(d), float(r)))
    return points


def tst_rho_at(delta: float, contour: list[tuple[float, float]]) -> float:
    ds = np.array([p[0] for p in contour])
    rs = np.array([p[1] for p in contour])
    return float(np.interp(delta, ds, rs))


def check_phase_contours(
    table: ResultTable,
    tst_path: str | Path | None = None,
    pair_tol: float = 0.05,
    tst_tol: float = 0.10,
) -> list[CheckResult]:
    """CSS and RD 0.5-crossings agree pairwise and against the TST reference."""
    contour_rows = table.meta.get("contour_05")
    if contour_rows is None:
        from .experiments import contour_05

        contour_rows = contour_05(table.rows)
    by_op: dict[str, dict[float, float | None]] = {}
    for rec in contour_rows:
        by_op.setdefault(rec["operator"], {})[rec["delta"]] = rec["rho_cross"]
    out = []
    tst = load_tst_contour(tst_path)

    css = {k: v for k, v in by_op.items() if k.startswith("css")}
    rd = {k: v for k, v in by_op.items() if k.startswith("rd")}
    if css and rd:
        css_map = next(iter(css.values()))
        rd_map = next(iter(rd.values()))
        for delta in sorted(set(css_map) & set(rd_map)):
            a, b = css_map[delta], rd_map[delta]
            if a is None or b is None:
                out.append(
                    CheckResult(
                        f"css vs rd contour at delta={delta:g}",
                        False,
                        "no crossing",
                        f"|drho| <= {pair_tol}",
                    )
                )
                continue
            out.append(
                CheckResult(
                    f"css vs rd contour at delta={delta:g}",
                    abs(a - b) <= pair_tol,
                    f"drho={a - b:+.3f}",
                    f"|drho| <= {pair_tol}",
                    detail=f"css {a:.3f}, rd {b:.3f}",
                )
            )
    for label, cmap in by_op.items():
        for delta, rho in sorted(cmap.items()):
            if rho is None:
                continue
            ref = tst_rho_at(delta, tst)
            out.append(
                CheckResult(
                    f"{label} vs TST at delta={delta:g}",
                    abs(rho - ref) <= tst_tol,
                    f"drho={rho - ref:+.3f}",
                    f"|drho| <= {tst_tol}",
                    detail=f"measured {rho:.3f}, reference {ref:.3f}",
                )
            )
    return out


def check_rf_matches_discrete(
    rf_table: ResultTable,
    discrete_table: ResultTable,
    tol_db: float = 1.0,
) -> list[CheckResult]:
    """Unquantized RF-chain curve within tol of the discrete one at BER 1e-2.

    The discrete axis is SNR; it converts to Eb/N0 through
    Eb/N0 = SNR * N / (2 S), the bit energy of 2S bits spread over N chips.
    """
    out = []
    spec_rf = rf_table.meta.get("spec", {})
    spec_d = discrete_table.meta.get("spec", {})
    m = spec_d.get("m")
    if m != spec_rf.get("m"):
        return [
            CheckResult(
                "rf vs discrete", False, "dictionary size mismatch", "matching m"
            )
        ]
    n = 2 ** m - 1
    s = spec_d.get("sparsity", 1)
    offset = 10.0 * math.log10(n / (2.0 * s))
    for op in _operators(rf_table):
        if op not in _operators(discrete_table):
            continue
        x_rf, b_rf, _ = _curve(rf_table, op)
        x_d, b_d, _ = _curve(discrete_table, op)
        c_rf = crossing_db(x_rf, b_rf, RF_MATCH_LEVEL)
        c_d = crossing_db(x_d, b_d, RF_MATCH_LEVEL)
        if c_rf is None or c_d is None:
            out.append(
                CheckResult(
                    f"rf vs discrete (m={m}, {op})",
                    False,
                    "no 1e-2 crossing",
                    f"|shift| <= {tol_db} dB",
                )
            )
            continue
        shift = c_rf - (c_d + offset)
        out.append(
            CheckResult(
                f"rf vs discrete (m={m}, {op})",
                abs(shift) <= tol_db,
                f"{shift:+.2f} dB",
                f"|shift| <= {tol_db} dB",
                detail=f"rf {c_rf:.2f} dB, discrete {c_d:.2f}+{offset:.2f} dB",
            )
        )
    return out


def check_quantization_ordering(table: ResultTable) -> list[CheckResult]:
    """Fig-6-style ordering at the highest fully-measured Eb/N0 point."""
    ops = _operators(table)
    needed = {"identity_q2", "identity_q4", "css_k2_q4"}
    if not needed.issubset(ops):
        return []
    target = table.meta.get("spec", {}).get("target_errors", 100)
    curves = {op: _curve(table, op) for op in needed}
    errors = {
        op: {
            r["ebn0_db"]: r["errors"]
            for r in table.rows
            if r["operator"] == op
        }
        for op in needed
    }
    grid = sorted(set(curves["identity_q2"][0]))
    point = None
    for level in reversed(grid):
        if all(errors[op].get(level, 0) >= target for op in needed):
            point = level
            break
    if point is None:
        return [
            CheckResult(
                "quantization ordering",
                False,
                "no fully-measured point",
                f">= {target} errors each",
            )
        ]

    def ber_at(op):
        x, b, _ = curves[op]
        return float(b[np.argmin(np.abs(x - point))])

    css4 = ber_at("css_k2_q4")
    cls2 = ber_at("identity_q2")
    cls4 = ber_at("identity_q4")
    return [
        CheckResult(
            "quantized css@4 beats classic@2",
            css4 < cls2,
            f"{css4:.2e} vs {cls2:.2e}",
            f"css@4 < classic@2 at {point:g} dB",
        ),
        CheckResult(
            "classic@4 beats quantized css@4",
            cls4 < css4,
            f"{cls4:.2e} vs {css4:.2e}",
            f"classic@4 < css@4 at {point:g} dB",
        ),
    ]


def validate_tables(
    tables: list[ResultTable],
    tst_path: str | Path | None = None,
) -> list[CheckResult]:
    """All checks applicable to the given tables, in report order."""
    results: list[CheckResult] = []
    ber_tables = [t for t in tables if t.kind in ("ber_discrete", "ber_rf", "quantization")]
    for table in tables:
        if table.kind == "phase":
            results.extend(check_phase_contours(table, tst_path))
        elif table.kind in ("ber_discrete", "ber_rf", "quantization"):
            c = check_classic_vs_theory(table)
            if c is not None:
                results.append(c)
            results.extend(check_noise_folding(table))
            c = check_css_vs_rd(table)
            if c is not None:
                results.append(c)
            results.extend(check_quantization_ordering(table))
            results.extend(check_ber_monotonic(table))
    rf = [t for t in ber_tables if t.kind in ("ber_rf", "quantization")]
    discrete = [t for t in ber_tables if t.kind == "ber_discrete"]
    for rf_t in rf:
        for d_t in discrete:
            if rf_t.meta.get("spec", {}).get("m") == d_t.meta.get("spec", {}).get("m"):
                results.extend(check_rf_matches_discrete(rf_t, d_t))
    return results
