"""Numerical Mellin transform on the positive half-line.

Forward transform ``M{F}(p) = int_0^inf dsigma/sigma sigma**(-p) F(sigma)`` is
evaluated with the trapezoid rule in ``u = ln(sigma)``, which is spectrally
accurate for smooth integrands that decay at both ends.  The inverse runs
along the vertical line ``Re p = c``::

    F(sigma) = 1/(2 pi i) int_{c-i inf}^{c+i inf} dp sigma**p F_mellin(p)

Scaling convolution ``(w . Psi)(f) = int_0^inf dsigma/sigma Psi(sigma) w(f/sigma)``
is an ordinary convolution in log-scale and is diagonalised by the
transform: ``M{w . Psi} = M{w} * M{Psi}``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .exceptions import ContourError, MellinDivergenceError, NumericalError, ParameterError, TruncationError

__all__ = [
    "LogGrid",
    "MellinContour",
    "MellinFunction",
    "MellinValue",
    "mellin_forward",
    "mellin_inverse",
    "scaling_convolve",
    "mellin_product_check",
    "default_abscissa",
]

LN2 = math.log(2.0)


@dataclass(frozen=True)
class LogGrid:
    """Log-uniform quadrature nodes ``sigma = 2**(k/points_per_octave)``.

    With ``adaptive`` set, either end is pushed outward in ``step_octaves``
    chunks until its last octave contributes less than ``tol`` of the
    absolute integral, but never beyond ``2**(+-max_octaves)``.
    """

    sigma_min: float = 2.0**-20
    sigma_max: float = 2.0**20
    points_per_octave: int = 16
    adaptive: bool = True
    step_octaves: int = 20
    max_octaves: int = 100

    def __post_init__(self):
        if not (0 < self.sigma_min < self.sigma_max):
            raise ParameterError("LogGrid needs 0 < sigma_min < sigma_max")
        if self.points_per_octave < 2:
            raise ParameterError("LogGrid needs at least 2 points per octave")

    @property
    def h(self) -> float:
        return LN2 / self.points_per_octave

    def index_range(self) -> tuple[int, int]:
        ppo = self.points_per_octave
        return (
            math.floor(math.log2(self.sigma_min) * ppo + 1e-9),
            math.ceil(math.log2(self.sigma_max) * ppo - 1e-9),
        )

    def with_range(self, k_lo: int, k_hi: int) -> "LogGrid":
        ppo = self.points_per_octave
        return LogGrid(2.0 ** (k_lo / ppo), 2.0 ** (k_hi / ppo), ppo, self.adaptive,
                       self.step_octaves, self.max_octaves)

    def refined(self, factor: int = 2) -> "LogGrid":
        return LogGrid(self.sigma_min, self.sigma_max, self.points_per_octave * factor,
                       self.adaptive, self.step_octaves, self.max_octaves)


class QuadResult(NamedTuple):
    value: np.ndarray
    tail_lower: np.ndarray
    tail_upper: np.ndarray
    grid: LogGrid


def _log_quad(integrand: Callable[[np.ndarray], np.ndarray], grid: LogGrid, tol: float,
              on_divergence: str = "raise") -> QuadResult:
    """Trapezoid rule for ``int du g(u)`` over the grid, row-wise.

    ``integrand(u)`` returns an array whose last axis runs along ``u``.
    """
    ppo = grid.points_per_octave
    h = grid.h
    k_lo, k_hi = grid.index_range()
    limit = grid.max_octaves * ppo
    grown = {"lower": 0, "upper": 0}
    while True:
        u = np.arange(k_lo, k_hi + 1) * h
        with np.errstate(over="ignore", invalid="ignore", under="ignore"):
            vals = np.asarray(integrand(u))
        if not np.all(np.isfinite(vals)):
            bad = np.flatnonzero(~np.all(np.isfinite(vals.reshape(-1, u.size)), axis=0))
            end = "lower" if np.mean(bad) < u.size / 2 else "upper"
            raise MellinDivergenceError(
                f"integrand is not finite toward the {end} end (sigma -> {'0' if end == 'lower' else 'inf'})",
                end=end)
        trap = np.ones(u.size)
        trap[0] = trap[-1] = 0.5
        value = (vals * trap).sum(axis=-1) * h
        mag = np.abs(vals)
        absint = (mag * trap).sum(axis=-1) * h
        n_oct = min(ppo, u.size // 2)
        tail_lo = mag[..., :n_oct].sum(axis=-1) * h
        tail_hi = mag[..., -n_oct:].sum(axis=-1) * h
        prev_lo = mag[..., n_oct:2 * n_oct].sum(axis=-1) * h
        prev_hi = mag[..., -2 * n_oct:-n_oct].sum(axis=-1) * h
        ref = np.where(absint > 0, absint, 1.0)
        ok_lo = bool(np.all(tail_lo <= tol * ref))
        ok_hi = bool(np.all(tail_hi <= tol * ref))
        rel_lo, rel_hi = tail_lo / ref, tail_hi / ref
        if ok_lo and ok_hi:
            break
        failing = []
        if not ok_lo:
            stuck = grown["lower"] >= 2 and np.any((tail_lo >= prev_lo) & (tail_lo > tol * ref))
            if not grid.adaptive or k_lo <= -limit or stuck:
                failing.append(("lower", float(np.max(rel_lo))))
        if not ok_hi:
            stuck = grown["upper"] >= 2 and np.any((tail_hi >= prev_hi) & (tail_hi > tol * ref))
            if not grid.adaptive or k_hi >= limit or stuck:
                failing.append(("upper", float(np.max(rel_hi))))
        if failing:
            end, rel = failing[0]
            msg = (f"last-octave contribution at the {end} end (sigma -> "
                   f"{'0' if end == 'lower' else 'inf'}) is {rel:.3g} of the integral, "
                   f"above tolerance {tol:g}")
            if on_divergence == "warn":
                warnings.warn(msg, RuntimeWarning, stacklevel=3)
                break
            raise MellinDivergenceError(msg, end=end)
        if not ok_lo:
            k_lo = max(k_lo - grid.step_octaves * ppo, -limit)
            grown["lower"] += 1
        if not ok_hi:
            k_hi = min(k_hi + grid.step_octaves * ppo, limit)
            grown["upper"] += 1
    return QuadResult(value, rel_lo, rel_hi, grid.with_range(k_lo, k_hi))


def _power_weight(p: np.ndarray, u: np.ndarray) -> np.ndarray:
    return np.exp(-np.multiply.outer(p, u))


def _guarded_product(a, b):
    with np.errstate(over="ignore", invalid="ignore"):
        out = a * b
    return np.where(a == 0, 0.0, out)


class MellinValue(NamedTuple):
    value: complex | np.ndarray
    tail: float
    grid: LogGrid


def mellin_forward(F: Callable[[np.ndarray], np.ndarray], p, log_grid: LogGrid | None = None,
                   tol: float = 1e-10) -> MellinValue:
    """Mellin transform of ``F`` at one or several complex powers ``p``.

    Parameters
    ----------
    F : callable
        Vectorised function of ``sigma > 0``.
    p : complex or array_like
        Evaluation points.
    log_grid : LogGrid, optional
        Quadrature nodes; default spans ``[2**-20, 2**20]`` at 16 points per
        octave and extends adaptively.
    tol : float
        Tail criterion: the outermost octave at each end must contribute less
        than ``tol`` of the absolute integral.

    Returns
    -------
    MellinValue
        ``value`` (same shape as ``p``), the largest relative tail
        contribution and the grid actually used.

    Raises
    ------
    MellinDivergenceError
        If a tail stays above tolerance; ``end`` is ``"lower"`` (sigma -> 0)
        or ``"upper"`` (sigma -> inf).
    """
    grid = log_grid or LogGrid()
    p_arr = np.asarray(p, dtype=np.complex128)
    flat = p_arr.reshape(-1)

    def integrand(u):
        f = np.asarray(F(np.exp(u)), dtype=np.complex128)
        return _guarded_product(np.broadcast_to(f, (flat.size, u.size)), _power_weight(flat, u))

    res = _log_quad(integrand, grid, tol)
    value = res.value.reshape(p_arr.shape)
    tail = float(max(np.max(res.tail_lower), np.max(res.tail_upper)))
    return MellinValue(value[()] if value.ndim == 0 else value, tail, res.grid)


@dataclass(frozen=True)
class MellinContour:
    """Vertical integration path ``p = c + i*u``, ``|u| <= u_max``."""

    c: float = 0.0
    u_max: float = 40.0
    n_points: int = 4097

    def __post_init__(self):
        if not math.isfinite(self.c):
            raise ParameterError("contour abscissa must be finite")
        if not self.u_max > 0:
            raise ParameterError("u_max must be positive")
        if self.n_points < 16 or self.n_points % 2 == 0:
            raise ParameterError("n_points must be odd and at least 16")

    @property
    def u(self) -> np.ndarray:
        return np.linspace(-self.u_max, self.u_max, self.n_points)

    @property
    def nodes(self) -> np.ndarray:
        return self.c + 1j * self.u

    @property
    def du(self) -> float:
        return 2 * self.u_max / (self.n_points - 1)

    def with_c(self, c: float) -> "MellinContour":
        return MellinContour(c, self.u_max, self.n_points)


@dataclass(frozen=True, eq=False)
class MellinFunction:
    """A Mellin-domain function with its declared strip of analyticity.

    ``strip`` bounds ``Re p`` (open interval); ``provenance`` is
    ``"closed_form"`` or ``"quadrature"``.
    """

    evaluator: Callable[[np.ndarray], np.ndarray]
    strip: tuple[float, float] = (-math.inf, math.inf)
    provenance: str = "closed_form"
    grid: LogGrid | None = None
    meta: dict = field(default_factory=dict)

    def inside(self, re_p: float) -> bool:
        lo, hi = self.strip
        return lo < re_p < hi

    def __call__(self, p):
        p = np.asarray(p, dtype=np.complex128)
        re = np.real(p)
        lo, hi = self.strip
        if np.any(re <= lo) or np.any(re >= hi):
            raise ContourError(f"Re p outside the analyticity strip {self.strip}")
        return self.evaluator(p)


class InverseValue(NamedTuple):
    value: complex | np.ndarray
    truncation: float


def default_abscissa(*strips: tuple[float, float], half_width: float = 2.0) -> float:
    """Midpoint of the intersection of analyticity strips.

    An unbounded side is replaced by the finite side moved ``2*half_width``
    inward (or by ``-+half_width`` when both sides are unbounded).  Raises
    :class:`ContourError` when the intersection is empty.
    """
    lo = max(s[0] for s in strips)
    hi = min(s[1] for s in strips)
    if not lo < hi:
        raise ContourError(f"analyticity strips {strips} do not intersect")
    if math.isinf(lo) and math.isinf(hi):
        return 0.0
    if math.isinf(lo):
        lo = hi - 2 * half_width
    if math.isinf(hi):
        hi = lo + 2 * half_width
    return 0.5 * (lo + hi)


def mellin_inverse(F_mellin: MellinFunction, contour: MellinContour, sigma,
                   decay_tol: float = 1e-8, values: np.ndarray | None = None) -> InverseValue:
    """Inverse Mellin transform by the trapezoid rule along the contour.

    ``values`` may carry pre-computed ``F_mellin(contour.nodes)``.
    The truncation estimate is ``max|F(c +- i u_max)| / max|F|``; above
    ``decay_tol`` a :class:`TruncationError` is raised.
    """
    if not F_mellin.inside(contour.c):
        raise ContourError(f"contour Re p = {contour.c} is outside the strip {F_mellin.strip}")
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        Fv = F_mellin(contour.nodes) if values is None else np.asarray(values, dtype=np.complex128)
    if not np.all(np.isfinite(Fv)):
        k = int(np.flatnonzero(~np.isfinite(Fv))[0])
        raise NumericalError(f"Mellin integrand is not finite on the contour at p = {complex(contour.nodes[k])}")
    peak = np.max(np.abs(Fv))
    if peak == 0:
        sig = np.asarray(sigma, dtype=float)
        return InverseValue(np.zeros(sig.shape, dtype=complex)[()], 0.0)
    trunc = float(max(abs(Fv[0]), abs(Fv[-1])) / peak)
    if trunc > decay_tol:
        raise TruncationError(
            f"Mellin integrand has not decayed at |Im p| = {contour.u_max}: "
            f"end/peak ratio {trunc:.3g} exceeds {decay_tol:g}")
    sig = np.asarray(sigma, dtype=float)
    if np.any(sig <= 0):
        raise ParameterError("mellin_inverse needs sigma > 0")
    w = np.full(contour.n_points, contour.du)
    w[0] = w[-1] = 0.5 * contour.du
    logs = np.log(sig.reshape(-1))
    kernel = np.exp(1j * np.multiply.outer(logs, contour.u))
    out = (kernel @ (w * Fv)) * np.exp(contour.c * logs) / (2 * np.pi)
    out = out.reshape(sig.shape)
    return InverseValue(out[()] if out.ndim == 0 else out, trunc)


def scaling_convolve(w: Callable, psi_density: Callable, f, log_grid: LogGrid | None = None,
                     tol: float = 1e-10, form: str = "second") -> np.ndarray:
    """Scaling convolution ``W(f) = int dsigma/sigma Psi(sigma) w(f/sigma)`` for ``f > 0``.

    ``form="first"`` integrates ``w(sigma) Psi(f/sigma)`` instead; both are
    the same integral after ``sigma -> f/sigma``.  When a tail is still above
    ``tol`` at the grid limit a ``RuntimeWarning`` reports the bound.
    """
    f = np.asarray(f, dtype=float)
    if np.any(f <= 0):
        raise ParameterError("scaling_convolve is defined for f > 0")
    if form not in ("first", "second"):
        raise ParameterError("form must be 'first' or 'second'")
    flat = f.reshape(-1)
    outer, inner = (psi_density, w) if form == "second" else (w, psi_density)

    def integrand(u):
        s = np.exp(u)
        a = np.asarray(outer(s), dtype=np.complex128)[None, :]
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            b = np.asarray(inner(np.outer(flat, 1.0 / s)), dtype=np.complex128)
        return _guarded_product(np.broadcast_to(a, b.shape), b)

    res = _log_quad(integrand, log_grid or LogGrid(), tol, on_divergence="warn")
    return res.value.reshape(f.shape)


def mellin_product_check(w_branch: Callable, wavelet, contour: MellinContour, samples=(0, 1, -1, 5, -5),
                         w_mellin: Callable | None = None, log_grid: LogGrid | None = None) -> dict:
    """Compare ``M{w . Psi}(p)`` with ``M{Psi}(p) * M{w}(p)`` on contour points.

    The left side is computed fully numerically (scaling convolution, then
    forward transform).  ``w_mellin`` supplies a closed form for ``M{w}``;
    without it the right side uses quadrature as well.

    Returns a report with the points, both sides and the largest relative
    deviation.
    """
    p = contour.c + 1j * np.asarray(samples, dtype=float)
    grid = log_grid or LogGrid()
    lhs = mellin_forward(lambda f: scaling_convolve(w_branch, wavelet.density, f, grid), p, grid).value
    psi_m = wavelet.mellin(p)
    wm = w_mellin(p) if w_mellin is not None else mellin_forward(w_branch, p, grid).value
    rhs = psi_m * wm
    scale = np.abs(rhs)
    if np.all(scale == 0):
        dev = 0.0 if np.all(lhs == 0) else math.inf
    else:
        dev = float(np.max(np.abs(lhs - rhs) / np.where(scale > 0, scale, np.max(scale))))
    return {"points": p, "lhs": lhs, "rhs": rhs, "max_relative_deviation": dev}
