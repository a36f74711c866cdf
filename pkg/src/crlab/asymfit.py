"""Least-squares extraction of singular expansion coefficients.

Fits samples ``u(eps)`` to the ladder

    sum_{j<n} C_j eps^{j-n} + sum_{k<=l} L_k eps^k log eps + sum_{k<=s} c_k eps^k

and reports ``L = L_0``, the coefficient of ``eps^0 log eps``. Columns are
normalized to unit length before an SVD solve; conditioning around 1e8 is
normal for these bases. Uncertainties come from refitting on sliding
sub-windows of the grid, because model truncation dominates the error.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import logging
from typing import Dict, List, Optional, Sequence

import numpy as np

logger = logging.getLogger(__name__)

DEFAULT_RATIO = 2.0 ** 0.5
DEFAULT_COND_THRESHOLD = 1e12


class FitError(ValueError):
    pass


@dataclass(frozen=True)
class SampleGrid:
    eps: np.ndarray
    values: np.ndarray
    errors: Optional[np.ndarray] = None

    def __post_init__(self):
        eps = np.asarray(self.eps, dtype=float)
        vals = np.asarray(self.values, dtype=float)
        if eps.ndim != 1 or eps.shape != vals.shape:
            raise FitError("eps and values must be 1-d arrays of equal length")
        if np.any(eps <= 0) or not np.all(np.isfinite(eps)):
            raise FitError("eps must be positive and finite")
        order = np.argsort(-eps, kind="stable")
        eps, vals = eps[order], vals[order]
        if np.any(np.diff(eps) >= 0):
            raise FitError("eps values must be distinct")
        errs = self.errors
        if errs is not None:
            errs = np.asarray(errs, dtype=float)[order]
            if np.any(errs <= 0):
                raise FitError("error estimates must be positive")
        object.__setattr__(self, "eps", eps)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "errors", errs)

    def __len__(self):
        return len(self.eps)

    def subset(self, idx) -> "SampleGrid":
        errs = None if self.errors is None else self.errors[idx]
        return SampleGrid(self.eps[idx], self.values[idx], errs)

    def scaled(self, c: float) -> "SampleGrid":
        errs = None if self.errors is None else self.errors * abs(c)
        return SampleGrid(self.eps, self.values * c, errs)


@dataclass(frozen=True)
class FitBasisSpec:
    pole_order: int
    smooth: int = 4
    highlog: int = 2

    def __post_init__(self):
        if self.pole_order < 1 or self.smooth < 0 or self.highlog < 0:
            raise FitError("need pole_order >= 1, smooth >= 0, highlog >= 0")

    @property
    def size(self) -> int:
        return self.pole_order + self.highlog + 1 + self.smooth + 1

    def names(self) -> List[str]:
        n = self.pole_order
        return ([f"C{j}" for j in range(n)] + [f"L{k}" for k in range(self.highlog + 1)]
                + [f"s{k}" for k in range(self.smooth + 1)])

    def design(self, eps: np.ndarray) -> np.ndarray:
        eps = np.asarray(eps, dtype=float)
        n = self.pole_order
        log = np.log(eps)
        cols = [eps ** (j - n) for j in range(n)]
        cols += [eps**k * log for k in range(self.highlog + 1)]
        cols += [eps**k for k in range(self.smooth + 1)]
        return np.stack(cols, axis=1)

    def evaluate(self, coeffs: np.ndarray, eps) -> np.ndarray:
        return self.design(np.atleast_1d(eps)) @ coeffs


@dataclass
class ExpansionFit:
    basis: FitBasisSpec
    coeffs: np.ndarray
    residual: float
    condition: float
    uncertainty: Dict[str, float]
    ill_conditioned: bool = False
    windows: int = 0
    warnings: List[str] = field(default_factory=list)

    @property
    def C(self) -> List[float]:
        return list(self.coeffs[: self.basis.pole_order])

    @property
    def L(self) -> float:
        return float(self.coeffs[self.basis.pole_order])

    @property
    def highlog(self) -> List[float]:
        n = self.basis.pole_order
        return list(self.coeffs[n + 1: n + 1 + self.basis.highlog])

    @property
    def smooth(self) -> List[float]:
        return list(self.coeffs[self.basis.pole_order + self.basis.highlog + 1:])

    @property
    def L_uncertainty(self) -> float:
        return self.uncertainty["L0"]

    @property
    def C_uncertainty(self) -> List[float]:
        return [self.uncertainty[f"C{j}"] for j in range(self.basis.pole_order)]

    def to_json(self) -> dict:
        return {
            "C": [float(c) for c in self.C],
            "L": self.L,
            "smooth": [float(c) for c in self.smooth],
            "highlog": [float(c) for c in self.highlog],
            "residual": self.residual,
            "condition": self.condition,
            "uncertainty": {k: float(v) for k, v in self.uncertainty.items()},
        }


def geometric_grid(eps_max: float, ratio: float = DEFAULT_RATIO, count: int = 20) -> np.ndarray:
    """``eps_max * ratio**(-i)`` for ``i = 0..count-1``."""
    return eps_max * ratio ** (-np.arange(count, dtype=float))


def geometric_grid_between(eps_min: float, eps_max: float, count: int) -> np.ndarray:
    return np.geomspace(eps_max, eps_min, count)


def _solve(A: np.ndarray, y: np.ndarray, w: np.ndarray):
    Aw = A * w[:, None]
    yw = y * w
    norms = np.linalg.norm(Aw, axis=0)
    norms[norms == 0] = 1.0
    As = Aw / norms
    xs, *_ = np.linalg.lstsq(As, yw, rcond=None)
    sv = np.linalg.svd(As, compute_uv=False)
    cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else float("inf")
    return xs / norms, cond


def _weights(samples: SampleGrid, basis: FitBasisSpec) -> np.ndarray:
    if samples.errors is not None:
        return 1.0 / samples.errors
    # eps^n u is O(1) across the grid; this keeps every row on the same footing
    # without letting the weights depend on the data
    return samples.eps ** basis.pole_order


def fit_expansion(samples: SampleGrid, basis: FitBasisSpec, *, windows: int = 5,
                  cond_threshold: float = DEFAULT_COND_THRESHOLD,
                  check_span: bool = True, basis_variation: bool = False) -> ExpansionFit:
    """Fit the expansion ladder of ``basis`` to ``samples``.

    The uncertainty of each coefficient is its spread over sliding
    sub-windows. With ``basis_variation`` it is widened to cover the change
    caused by one more smooth power or one more log power, which tracks the
    truncation of the ladder when the samples themselves are very accurate.
    """
    p = basis.size
    N = len(samples)
    if N < p + 2:
        raise FitError(f"need at least {p + 2} samples for {p} basis functions, got {N}")
    warnings = []
    if check_span:
        decades = np.log10(samples.eps[0] / samples.eps[-1])
        if decades < 2 and N < 16:
            warnings.append(f"eps range spans only {decades:.2f} decades with {N} samples")
    A = basis.design(samples.eps)
    w = _weights(samples, basis)
    coeffs, cond = _solve(A, samples.values, w)
    resid = samples.values - A @ coeffs
    residual = float(np.sqrt(np.mean(resid**2)))

    # sliding sub-windows of equal length
    wlen = max(p + 1, N - (windows - 1))
    starts = list(range(0, N - wlen + 1))
    if len(starts) > windows:
        pick = np.linspace(0, len(starts) - 1, windows).round().astype(int)
        starts = [starts[i] for i in pick]
    if len(starts) < windows:
        warnings.append(f"only {len(starts)} sub-windows available for uncertainty")
    window_coeffs = [coeffs]
    for s in starts:
        idx = slice(s, s + wlen)
        sub = samples.subset(idx)
        cw, _ = _solve(basis.design(sub.eps), sub.values, _weights(sub, basis))
        window_coeffs.append(cw)
    stack = np.array(window_coeffs)
    spread = stack.max(axis=0) - stack.min(axis=0)
    if basis_variation:
        for alt in (FitBasisSpec(basis.pole_order, basis.smooth + 1, basis.highlog),
                    FitBasisSpec(basis.pole_order, basis.smooth, basis.highlog + 1)):
            if N >= alt.size + 2:
                ca, _ = _solve(alt.design(samples.eps), samples.values, _weights(samples, alt))
                # compare the shared leading block: poles and the log powers of basis
                m = basis.pole_order + basis.highlog + 1
                spread[:m] = np.maximum(spread[:m], np.abs(ca[:m] - coeffs[:m]))
    uncertainty = dict(zip(basis.names(), (float(x) for x in spread)))

    ill = cond > cond_threshold
    if ill:
        warnings.append(f"condition estimate {cond:.3e} exceeds {cond_threshold:.1e}")
    for msg in warnings:
        logger.warning(msg)
    return ExpansionFit(basis, coeffs, residual, cond, uncertainty, ill, len(starts), warnings)


def read_samples_csv(path) -> SampleGrid:
    """Read ``eps,value[,err]`` with a header line."""
    import csv

    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise FitError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    if header[:2] != ["eps", "value"]:
        raise FitError(f"{path}: expected header 'eps,value[,err]', got {rows[0]}")
    data = np.array([[float(x) for x in r] for r in rows[1:] if r], dtype=float)
    errs = data[:, 2] if len(header) > 2 and header[2] == "err" else None
    return SampleGrid(data[:, 0], data[:, 1], errs)


def write_samples_csv(path, samples: SampleGrid) -> None:
    with open(path, "w") as fh:
        if samples.errors is None:
            fh.write("eps,value\n")
            for e, v in zip(samples.eps, samples.values):
                fh.write(f"{e:.17g},{v:.17g}\n")
        else:
            fh.write("eps,value,err\n")
            for e, v, s in zip(samples.eps, samples.values, samples.errors):
                fh.write(f"{e:.17g},{v:.17g},{s:.17g}\n")
