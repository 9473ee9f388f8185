"""Analytic wavelets described by their spectra.

Only the spectrum ``psi_hat(f)`` is needed: analysis and synthesis both run in
the frequency domain.  A wavelet must be analytic (``psi_hat(f) = 0`` for
``f <= 0``) and its spectral density ``Psi = |psi_hat|**2`` must have a finite
Mellin transform at ``p = 0``; that moment is the reconstruction constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import minimize_scalar
from scipy.special import gamma as gamma_fn
from scipy.special import loggamma

from .exceptions import AdmissibilityError, MellinDivergenceError, ParameterError
from .mellin import LogGrid, MellinFunction, mellin_forward

__all__ = ["Wavelet", "cauchy_wavelet", "sampled_wavelet", "parse_wavelet", "tail_exponents"]

FOUR_PI = 4 * math.pi


@dataclass(frozen=True, eq=False)
class Wavelet:
    """Analytic wavelet.

    Attributes
    ----------
    name : str
        Family and parameters, e.g. ``"cauchy:1"``.
    spectral_fn : callable
        Vectorised ``f -> psi_hat(f)``; zero for ``f <= 0``.
    mellin_closed_form : callable or None
        ``p -> M{Psi}(p)`` valid for ``Re p`` inside ``strip``.
    strip : (float, float)
        Open interval of ``Re p`` where ``M{Psi}`` converges.
    time_fn : callable or None
        ``t -> psi(t)`` when known in closed form.
    quad_grid : LogGrid
        Quadrature nodes for numerical moments.
    quad_tol : float
        Tail tolerance for those moments (infinite for sampled spectra, whose
        support is the sampled range).
    """

    name: str
    spectral_fn: Callable[[np.ndarray], np.ndarray]
    params: dict = field(default_factory=dict)
    mellin_closed_form: Callable | None = None
    strip: tuple[float, float] = (-math.inf, math.inf)
    time_fn: Callable | None = None
    quad_grid: LogGrid = field(default_factory=LogGrid)
    quad_tol: float = 1e-10

    def density(self, f) -> np.ndarray:
        return np.abs(self.spectral_fn(f)) ** 2

    def mellin(self, p, numeric: bool = False):
        """Mellin transform of the spectral density.

        Uses the closed form when one exists unless ``numeric`` is set.

        Raises
        ------
        MellinDivergenceError
            If ``Re p`` lies outside the convergence strip.
        """
        p_arr = np.asarray(p, dtype=np.complex128)
        lo, hi = self.strip
        re = p_arr.real
        if np.any(re >= hi):
            raise MellinDivergenceError(
                f"Mellin transform of Psi for {self.name} diverges at Re p >= {hi:g} (sigma -> 0)", end="lower")
        if np.any(re <= lo):
            raise MellinDivergenceError(
                f"Mellin transform of Psi for {self.name} diverges at Re p <= {lo:g} (sigma -> inf)", end="upper")
        if self.mellin_closed_form is not None and not numeric:
            return self.mellin_closed_form(p_arr)[()]
        return mellin_forward(self.density, p_arr, self.quad_grid, self.quad_tol).value

    def mellin_function(self, numeric: bool = False) -> MellinFunction:
        closed = self.mellin_closed_form is not None and not numeric
        return MellinFunction(
            lambda p: self.mellin(p, numeric=numeric),
            self.strip,
            "closed_form" if closed else "quadrature",
            None if closed else self.quad_grid,
            {"wavelet": self.name},
        )

    @property
    def admissibility_constant(self) -> float:
        """``M{Psi}(0)``, the reconstruction constant."""
        return float(np.real(self.mellin(0.0)))

    def tail_profile(self, p: float = 0.0, points_per_octave: int = 32, octaves: int = 60):
        """Cumulative fractions of ``M{Psi}(p)`` from each end of the frequency axis.

        Returns ``(f, below, above)`` where ``below[k]`` is the fraction of the
        moment contributed by ``(0, f[k])`` and ``above[k]`` by ``(f[k], inf)``.
        """
        u = np.arange(-octaves * points_per_octave, octaves * points_per_octave + 1) * (
            math.log(2) / points_per_octave)
        f = np.exp(u)
        with np.errstate(over="ignore", under="ignore", invalid="ignore"):
            g = np.where(self.density(f) == 0, 0.0, self.density(f) * np.exp(-p * u))
        c = np.concatenate([[0.0], np.cumsum(0.5 * (g[1:] + g[:-1]))])
        total = c[-1]
        if not total > 0:
            raise AdmissibilityError(f"{self.name}: spectral density vanishes on the probe grid")
        return f, c / total, (total - c) / total

    def passband(self, tol: float = 1e-8, p: float = 0.0) -> tuple[float, float]:
        """Frequencies outside which at most ``tol`` of ``M{Psi}(p)`` lies on each side."""
        f, below, above = self.tail_profile(p)
        lo = f[np.searchsorted(below, tol, side="right") - 1] if below[1] <= tol else f[0]
        hi_idx = np.flatnonzero(above <= tol)
        hi = f[hi_idx[0]] if hi_idx.size else f[-1]
        return float(lo), float(hi)

    def peak_frequency(self) -> float:
        """Frequency where the spectral density is largest."""
        u = np.linspace(-40, 40, 8001)
        k = int(np.argmax(self.density(np.exp(u))))
        res = minimize_scalar(lambda v: -float(self.density(np.exp(np.atleast_1d(v)))[0]),
                              bounds=(u[max(k - 1, 0)], u[min(k + 1, u.size - 1)]), method="bounded",
                              options={"xatol": 1e-12})
        return float(np.exp(res.x))

    def validate(self, n_points: int = 5, rtol: float = 1e-8) -> None:
        """Check analyticity, admissibility and the closed-form Mellin transform.

        Raises
        ------
        AdmissibilityError
            On any violated invariant.
        """
        probe = -np.logspace(-6, 3, 64)
        neg = np.asarray(self.spectral_fn(np.concatenate([[0.0], probe])))
        if np.any(neg != 0):
            raise AdmissibilityError(f"{self.name}: spectrum is nonzero at f <= 0 (wavelet is not analytic)")
        lo, hi = self.strip
        if not lo < 0 < hi:
            raise AdmissibilityError(
                f"{self.name}: M{{Psi}}(0) is not finite (strip {self.strip} excludes p = 0)")
        try:
            c0 = mellin_forward(self.density, 0.0, self.quad_grid, self.quad_tol).value
        except MellinDivergenceError as exc:
            raise AdmissibilityError(f"{self.name}: M{{Psi}}(0) diverges: {exc}") from exc
        if not (np.isfinite(c0) and c0.real > 0):
            raise AdmissibilityError(f"{self.name}: M{{Psi}}(0) = {c0} is not a finite positive number")
        if self.mellin_closed_form is not None:
            top = hi - 0.5 if math.isfinite(hi) else 2.0
            bottom = max(lo + 0.5, top - 3.0) if math.isfinite(lo) else top - 3.0
            pts = np.linspace(bottom, top, n_points)
            closed = self.mellin_closed_form(pts.astype(complex))
            numeric = mellin_forward(self.density, pts.astype(complex), self.quad_grid).value
            err = np.max(np.abs(closed - numeric) / np.abs(closed))
            if err > rtol:
                raise AdmissibilityError(
                    f"{self.name}: closed-form Mellin transform disagrees with quadrature ({err:.2e})")


def cauchy_wavelet(alpha: float) -> Wavelet:
    """Cauchy wavelet ``psi_hat(f) = f**alpha * exp(-2 pi f)`` for ``f > 0``.

    ``M{Psi}(p) = (4 pi)**(p - 2 alpha) * Gamma(2 alpha - p)`` for
    ``Re p < 2 alpha``; in time ``psi(t) = Gamma(alpha+1) / (2 pi (1 - i t))**(alpha+1)``.
    """
    alpha = float(alpha)
    if not (alpha > 0 and math.isfinite(alpha)):
        raise ParameterError(f"Cauchy wavelet needs alpha > 0, got {alpha}")

    def spectral_fn(f):
        f = np.asarray(f, dtype=float)
        out = np.zeros(f.shape)
        pos = f > 0
        fp = f[pos]
        out[pos] = np.exp(alpha * np.log(fp) - 2 * math.pi * fp)
        return out

    def closed(p):
        p = np.asarray(p, dtype=np.complex128)
        return np.exp((p - 2 * alpha) * math.log(FOUR_PI) + loggamma(2 * alpha - p))

    norm = gamma_fn(alpha + 1) / (2 * math.pi) ** (alpha + 1)

    def time_fn(t):
        return norm / (1 - 1j * np.asarray(t, dtype=float)) ** (alpha + 1)

    w = Wavelet(f"cauchy:{alpha:g}", spectral_fn, {"family": "cauchy", "alpha": alpha},
                closed, (-math.inf, 2 * alpha), time_fn)
    w.validate()
    return w


def tail_exponents(f: np.ndarray, values: np.ndarray, cap: float = 20.0) -> tuple[float, float]:
    """Local power-law exponents of ``|values|`` at the low and high ends of ``f``.

    Least-squares slope of ``ln|v|`` against ``ln f`` over the first and last
    octave of positive samples.  Exponents beyond ``+-cap`` (faster than any
    moderate power) are reported as infinite.
    """
    f = np.asarray(f, dtype=float)
    mag = np.abs(np.asarray(values))
    keep = (f > 0) & (mag > 0)
    f, mag = f[keep], mag[keep]
    if f.size < 4:
        return (math.inf, -math.inf)

    def slope(sel):
        if np.count_nonzero(sel) < 2:
            sel = np.zeros(f.size, bool)
            sel[:2] = True
        x, y = np.log(f[sel]), np.log(mag[sel])
        return float(np.polyfit(x, y, 1)[0])

    s_lo = slope(f <= 2 * f[0])
    s_hi = slope(f >= f[-1] / 2) if np.count_nonzero(f >= f[-1] / 2) >= 2 else slope(np.arange(f.size) >= f.size - 2)
    if s_lo > cap:
        s_lo = math.inf
    if s_hi < -cap:
        s_hi = -math.inf
    return s_lo, s_hi


def sampled_wavelet(frequencies, values, name: str = "sampled", points_per_octave: int = 64) -> Wavelet:
    """Wavelet from spectrum samples, interpolated with cubic splines in ``f``.

    The spectrum is taken as zero outside the sampled range.  Registration
    fails when any sample at ``f <= 0`` is nonzero, or when the density does
    not decay toward either end of the range fast enough for ``M{Psi}(0)`` to
    converge (per-octave contributions must shrink toward both ends).

    Raises
    ------
    AdmissibilityError
    """
    f = np.asarray(frequencies, dtype=float)
    v = np.asarray(values, dtype=np.complex128)
    if f.shape != v.shape or f.ndim != 1:
        raise ParameterError("frequencies and values must be 1-D arrays of equal length")
    order = np.argsort(f)
    f, v = f[order], v[order]
    if np.any(v[f <= 0] != 0):
        raise AdmissibilityError(f"{name}: nonzero spectrum sample at f <= 0 (wavelet is not analytic)")
    pos = f > 0
    f, v = f[pos], v[pos]
    if f.size < 8:
        raise ParameterError("need at least 8 samples at f > 0")
    dens = np.abs(v) ** 2
    s_lo, s_hi = tail_exponents(f, dens)
    if not s_lo > 0:
        raise AdmissibilityError(
            f"{name}: M{{Psi}}(0) diverges at the low-frequency end "
            f"(Psi ~ f**{s_lo:.3g} near f -> 0, per-octave contributions grow)")
    if not s_hi < 0:
        raise AdmissibilityError(
            f"{name}: M{{Psi}}(0) diverges at the high-frequency end (Psi ~ f**{s_hi:.3g})")
    re, im = CubicSpline(f, v.real), CubicSpline(f, v.imag)
    f_lo, f_hi = f[0], f[-1]
    has_imag = bool(np.any(v.imag != 0))

    def spectral_fn(x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=np.complex128 if has_imag else float)
        inside = (x >= f_lo) & (x <= f_hi)
        xi = x[inside]
        out[inside] = re(xi) + 1j * im(xi) if has_imag else re(xi)
        return out

    grid = LogGrid(f_lo, f_hi, points_per_octave, adaptive=False)
    w = Wavelet(name, spectral_fn, {"family": "sampled", "f_range": (float(f_lo), float(f_hi))},
                None, (s_hi, s_lo), None, grid, math.inf)
    w.validate()
    return w


def parse_wavelet(spec: str) -> Wavelet:
    """Build a wavelet from ``"family:param"`` (currently ``cauchy:ALPHA``)."""
    family, _, arg = str(spec).partition(":")
    if family == "cauchy":
        try:
            alpha = float(arg) if arg else 1.0
        except ValueError:
            raise ParameterError(f"bad Cauchy order in {spec!r}") from None
        return cauchy_wavelet(alpha)
    raise ParameterError(f"unknown wavelet family {family!r}")
