"""Correspondence between frequency filters W(f) and scale filters w(sigma).

For an analytic wavelet the two sign branches decouple::

    W(f)  = W_plus(f) + W_minus(-f)          W_minus(f) := W(-f),  f > 0
    W_pm  = Psi . w_pm   (scaling convolution)
    M{W_pm}(p) = M{Psi}(p) * M{w_pm}(p)

so ``w_pm`` is the inverse Mellin transform of ``M{W_pm} / M{Psi}``.  Pure
powers ``f**p`` have no classical Mellin transform; they act as point masses
on the contour and map to ``sigma**p / M{Psi}(p)``.  Filters built from such
power terms (identity, power laws, polynomials in d/dt, the Hilbert
transform) are carried symbolically; everything else goes through the
numerical contour integral.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from .exceptions import (
    AdmissibilityError,
    ContourError,
    MellinDivergenceError,
    ParameterError,
    ParseError,
    TruncationError,
)
from .mellin import LogGrid, MellinContour, MellinFunction, default_abscissa, mellin_forward, mellin_inverse, scaling_convolve
from .wavelets import Wavelet, tail_exponents

__all__ = [
    "PowerTerm",
    "FrequencyFilter",
    "ScaleFilter",
    "DifferentialOperatorSpec",
    "AdmissibilityReport",
    "identity_frequency_filter",
    "power_law_filter",
    "polynomial_filter",
    "hilbert_frequency_filter",
    "split_signs",
    "derive_scale_filter",
    "identity_filter",
    "power_filter",
    "differential_filter",
    "hilbert_filter",
    "check_admissibility",
    "filter_from_spec",
    "load_filter_spec",
    "ZERO_FLOOR",
]

ZERO_FLOOR = 1e-12
# relative level below which a quadrature Mellin transform of sampled data is noise
MELLIN_NOISE_FLOOR = 1e-9
# end exponents steeper than this are treated as faster-than-power decay
STRIP_EXPONENT_CAP = 8.0
TWO_PI_I = 2j * math.pi


@dataclass(frozen=True)
class PowerTerm:
    """``coef * x**power`` on ``x > 0``."""

    coef: complex
    power: float


def _eval_terms(terms: Sequence[PowerTerm], x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape, dtype=np.complex128)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        for t in terms:
            out = out + t.coef * (x ** t.power if t.power != 0 else np.ones_like(x))
    return out


def _terms_fn(terms):
    terms = tuple(terms)
    return lambda x: _eval_terms(terms, x)


class _Branched:
    """Shared evaluation logic for the two filter types."""

    positive: Callable
    negative: Callable
    dc_gain: complex
    positive_terms: tuple | None
    negative_terms: tuple | None

    def __call__(self, x):
        """Evaluate on a signed axis; ``x < 0`` reads the negative branch at ``-x``."""
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=np.complex128)
        pos, neg = x > 0, x < 0
        if np.any(pos):
            out[pos] = self.positive(x[pos])
        if np.any(neg):
            out[neg] = self.negative(-x[neg])
        out[x == 0] = self.dc_gain
        return out

    @property
    def symbolic(self) -> bool:
        return self.positive_terms is not None and self.negative_terms is not None

    @property
    def is_zero(self) -> bool:
        if self.symbolic:
            return all(t.coef == 0 for t in self.positive_terms + self.negative_terms) and self.dc_gain == 0
        samples = getattr(self, "samples", None)
        if samples is not None:
            return not np.any(samples[1]) and not np.any(samples[2]) and self.dc_gain == 0
        return False

    def hermitian(self, probe=None) -> bool:
        """True when the negative branch is the conjugate of the positive one."""
        x = np.logspace(-3, 3, 25) if probe is None else np.asarray(probe, dtype=float)
        a, b = self.positive(x), self.negative(x)
        scale = max(np.max(np.abs(a)), np.max(np.abs(b)), 1e-300)
        return bool(np.max(np.abs(a - np.conj(b))) <= 1e-12 * scale) and np.imag(self.dc_gain) == 0


def _terms_dict(terms):
    if terms is None:
        return None
    return [{"coef": [float(np.real(t.coef)), float(np.imag(t.coef))], "power": float(t.power)} for t in terms]


@dataclass(frozen=True, eq=False)
class FrequencyFilter(_Branched):
    """System function ``W(f)`` split into ``W_plus(f)`` and ``W_minus(f) = W(-f)``, ``f > 0``.

    ``dc_gain`` is the value used at ``f = 0``; ``strips`` holds the Mellin
    convergence strip of each branch when known.
    """

    positive: Callable
    negative: Callable
    kind: str = "custom"
    params: dict = field(default_factory=dict)
    positive_terms: tuple | None = None
    negative_terms: tuple | None = None
    dc_gain: complex = 0.0
    strips: tuple | None = None
    samples: tuple | None = None

    @classmethod
    def from_terms(cls, positive_terms, negative_terms, kind="custom", params=None, dc_gain=0.0):
        pt, nt = tuple(positive_terms), tuple(negative_terms)
        return cls(_terms_fn(pt), _terms_fn(nt), kind, dict(params or {}), pt, nt, complex(dc_gain))

    def reassemble(self, f) -> np.ndarray:
        """``W(f) = W_plus(f) + W_minus(-f)`` at nonzero ``f``."""
        return self(f)

    def describe(self) -> dict:
        return {"kind": self.kind, "params": _jsonable(self.params),
                "positive_terms": _terms_dict(self.positive_terms),
                "negative_terms": _terms_dict(self.negative_terms),
                "dc_gain": [float(np.real(self.dc_gain)), float(np.imag(self.dc_gain))]}


@dataclass(frozen=True, eq=False)
class ScaleFilter(_Branched):
    """Scale multiplier ``w(sigma)``; ``w(sigma) = w_minus(-sigma)`` for ``sigma < 0``.

    ``domain`` bounds ``|sigma|`` where a numerically derived filter is
    valid (``None``: everywhere).  ``info`` carries design diagnostics.
    """

    positive: Callable
    negative: Callable
    kind: str = "custom"
    params: dict = field(default_factory=dict)
    positive_terms: tuple | None = None
    negative_terms: tuple | None = None
    dc_gain: complex = 0.0
    domain: tuple | None = None
    info: dict = field(default_factory=dict)
    samples: tuple | None = None

    @classmethod
    def from_terms(cls, positive_terms, negative_terms, kind="custom", params=None, dc_gain=0.0, info=None):
        pt, nt = tuple(positive_terms), tuple(negative_terms)
        return cls(_terms_fn(pt), _terms_fn(nt), kind, dict(params or {}), pt, nt, complex(dc_gain),
                   None, dict(info or {}))

    @classmethod
    def constant(cls, value, dc_gain=0.0, kind="constant"):
        t = (PowerTerm(complex(value), 0.0),)
        return cls.from_terms(t, t, kind, {"value": value}, dc_gain)

    def on_scales(self, sigma) -> np.ndarray:
        sigma = np.asarray(sigma, dtype=float)
        if self.domain is not None:
            lo, hi = self.domain
            a = np.abs(sigma)
            if np.any(a < lo * (1 - 1e-12)) or np.any(a > hi * (1 + 1e-12)):
                raise ParameterError(
                    f"scale filter is defined for |sigma| in [{lo:g}, {hi:g}], grid spans "
                    f"[{a.min():g}, {a.max():g}]")
        vals = self(sigma)
        if not np.all(np.isfinite(vals)):
            raise ParameterError("scale filter is not finite on the requested scales")
        return vals

    def to_csv(self, path, sigma) -> None:
        """Write ``sigma, re, im`` rows (signed sigma) with 17 significant digits."""
        sigma = np.asarray(sigma, dtype=float)
        v = self.on_scales(sigma)
        np.savetxt(path, np.column_stack([sigma, v.real, v.imag]), fmt="%.17g", delimiter=",",
                   header="sigma,re,im", comments="# ")

    def describe(self) -> dict:
        return {"kind": self.kind, "params": _jsonable(self.params),
                "positive_terms": _terms_dict(self.positive_terms),
                "negative_terms": _terms_dict(self.negative_terms),
                "dc_gain": [float(np.real(self.dc_gain)), float(np.imag(self.dc_gain))],
                "domain": None if self.domain is None else [float(d) for d in self.domain]}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


@dataclass(frozen=True)
class DifferentialOperatorSpec:
    """``P(D) = sum a_n D**n`` with ``D = d/dt``."""

    coefficients: tuple

    def __post_init__(self):
        c = tuple(complex(a) for a in self.coefficients)
        if not c:
            raise ParameterError("a differential operator needs at least one coefficient")
        if len(c) > 1 and c[-1] == 0:
            raise ParameterError("leading coefficient a_N must be nonzero")
        object.__setattr__(self, "coefficients", c)

    @property
    def order(self) -> int:
        return len(self.coefficients) - 1

    def nonzero(self):
        return [(n, a) for n, a in enumerate(self.coefficients) if a != 0]


# ------------------------------------------------------------ frequency filters


def identity_frequency_filter() -> FrequencyFilter:
    t = (PowerTerm(1.0, 0.0),)
    return FrequencyFilter.from_terms(t, t, "identity", {}, 1.0)


def power_law_filter(p: float, gain: complex = 1.0) -> FrequencyFilter:
    """``W(f) = gain * |f|**p``; the DC gain is ``gain`` for ``p == 0`` and 0 otherwise."""
    p = float(p)
    if not math.isfinite(p):
        raise ParameterError("power must be finite")
    t = (PowerTerm(complex(gain), p),)
    return FrequencyFilter.from_terms(t, t, "power", {"p": p, "gain": gain}, gain if p == 0 else 0.0)


def polynomial_filter(spec: DifferentialOperatorSpec | Sequence) -> FrequencyFilter:
    """System function ``sum a_n (2 pi i f)**n`` of a differential operator."""
    if not isinstance(spec, DifferentialOperatorSpec):
        spec = DifferentialOperatorSpec(tuple(spec))
    pos = tuple(PowerTerm(a * TWO_PI_I**n, float(n)) for n, a in spec.nonzero())
    neg = tuple(PowerTerm(a * TWO_PI_I**n * (-1) ** n, float(n)) for n, a in spec.nonzero())
    return FrequencyFilter.from_terms(pos, neg, "polynomial", {"coefficients": list(spec.coefficients)},
                                      spec.coefficients[0])


def hilbert_frequency_filter() -> FrequencyFilter:
    """``H(f) = -i sgn(f)``."""
    return FrequencyFilter.from_terms((PowerTerm(-1j, 0.0),), (PowerTerm(1j, 0.0),), "hilbert", {}, 0.0)


def _log_spline(x, y):
    """Cubic spline in ``ln x`` of complex samples, zero outside the sample range."""
    lx = np.log(x)
    re, im = CubicSpline(lx, np.real(y)), CubicSpline(lx, np.imag(y))
    lo, hi = x[0], x[-1]

    def fn(q):
        q = np.asarray(q, dtype=float)
        out = np.zeros(q.shape, dtype=np.complex128)
        inside = (q >= lo) & (q <= hi)
        qi = q[inside]
        vals = re(np.log(qi)) + 1j * im(np.log(qi))
        # knots are returned verbatim so sampling round trips are exact
        idx = np.clip(np.searchsorted(x, qi), 0, x.size - 1)
        exact = x[idx] == qi
        vals[exact] = y[idx[exact]]
        out[inside] = vals
        return out

    return fn


def split_signs(f, values) -> FrequencyFilter:
    """Split two-sided samples of ``W`` into positive and negative branches.

    ``f`` must be symmetric about zero.  A sample at ``f = 0`` is ignored
    with a warning (DC is handled by policy, not by the branches); its value
    becomes the DC gain.  Branches are cubic splines in ``ln f`` that return
    the samples exactly at the sample frequencies.
    """
    f = np.asarray(f, dtype=float)
    v = np.asarray(values, dtype=np.complex128)
    if f.shape != v.shape or f.ndim != 1:
        raise ParameterError("frequencies and values must be 1-D arrays of equal length")
    dc = 0.0
    if np.any(f == 0):
        warnings.warn("sample at f = 0 ignored by split_signs (DC is excluded)", UserWarning, stacklevel=2)
        dc = complex(v[f == 0][0])
        v, f = v[f != 0], f[f != 0]
    pos = np.sort(f[f > 0])
    negf = np.sort(-f[f < 0])
    if pos.size < 4 or pos.size != negf.size or np.max(np.abs(pos - negf)) > 1e-12 * pos.max():
        raise ParameterError("split_signs needs a grid symmetric about f = 0 with at least 4 points per side")
    order_p = np.argsort(f[f > 0])
    order_n = np.argsort(-f[f < 0])
    wp = v[f > 0][order_p]
    wm = v[f < 0][order_n]
    return FrequencyFilter(_log_spline(pos, wp), _log_spline(pos, wm), "sampled",
                           {"f_range": (float(pos[0]), float(pos[-1]))}, None, None, dc,
                           None, (pos, wp, wm))


# ------------------------------------------------------------- moments / checks


def _moment(wavelet: Wavelet, p: float):
    """``M{Psi}(p)`` with divergence checked by both the strip and quadrature."""
    val = wavelet.mellin(p)
    try:
        mellin_forward(wavelet.density, complex(p), wavelet.quad_grid, wavelet.quad_tol)
    except MellinDivergenceError:
        raise
    return complex(val)


def _moment_or_raise(wavelet: Wavelet, p: float, what: str) -> complex:
    try:
        m = _moment(wavelet, p)
    except MellinDivergenceError as exc:
        raise AdmissibilityError(
            f"{what}: Psi_mellin({p:g}) = M{{Psi}}({p:g}) diverges for {wavelet.name} ({exc})") from exc
    if not (np.isfinite(m) and abs(m) > 0):
        raise AdmissibilityError(f"{what}: Psi_mellin({p:g}) = {m} is zero or not finite for {wavelet.name}")
    return m


def identity_filter(wavelet: Wavelet) -> tuple[ScaleFilter, FrequencyFilter]:
    """Reconstruction pair ``w = 1/M{Psi}(0)``, ``W = 1``."""
    c0 = _moment_or_raise(wavelet, 0.0, "identity")
    t = (PowerTerm(1 / c0, 0.0),)
    return ScaleFilter.from_terms(t, t, "identity", {}, 1.0), identity_frequency_filter()


def power_filter(p: float, wavelet: Wavelet) -> tuple[ScaleFilter, FrequencyFilter]:
    """Pair ``w(sigma) = |sigma|**p``, ``W(f) = M{Psi}(p) |f|**p``."""
    p = float(p)
    m = _moment_or_raise(wavelet, p, f"power filter p={p:g}")
    t = (PowerTerm(1.0, p),)
    w = ScaleFilter.from_terms(t, t, "power", {"p": p}, m if p == 0 else 0.0, {"moment": m})
    return w, power_law_filter(p, m)


def differential_filter(spec: DifferentialOperatorSpec | Sequence, wavelet: Wavelet) -> tuple[ScaleFilter, FrequencyFilter]:
    """Pair ``w(sigma) = sum a_n (2 pi i sigma)**n / M{Psi}(n)``, ``W(f) = sum a_n (2 pi i f)**n``.

    Raises
    ------
    AdmissibilityError
        Naming the first ``n`` (with ``a_n != 0``) whose moment diverges.
    """
    if not isinstance(spec, DifferentialOperatorSpec):
        spec = DifferentialOperatorSpec(tuple(spec))
    W = polynomial_filter(spec)
    moments = {n: _moment_or_raise(wavelet, float(n), f"moment n={n}") for n, _ in spec.nonzero()}
    pos = tuple(PowerTerm(a * TWO_PI_I**n / moments[n], float(n)) for n, a in spec.nonzero())
    neg = tuple(PowerTerm(a * TWO_PI_I**n * (-1) ** n / moments[n], float(n)) for n, a in spec.nonzero())
    w = ScaleFilter.from_terms(pos, neg, "polynomial", {"coefficients": list(spec.coefficients)},
                               spec.coefficients[0], {"moments": moments})
    return w, W


def hilbert_filter(wavelet: Wavelet) -> tuple[ScaleFilter, FrequencyFilter]:
    """Hilbert pair: ``h = -+i / M{Psi}(0)`` for ``sigma >< 0``, ``H = -+i`` for ``f >< 0``."""
    c0 = _moment_or_raise(wavelet, 0.0, "hilbert")
    h = ScaleFilter.from_terms((PowerTerm(-1j / c0, 0.0),), (PowerTerm(1j / c0, 0.0),), "hilbert", {}, 0.0)
    return h, hilbert_frequency_filter()


# ------------------------------------------------------------------ design


def _interior_band(lo: float, hi: float, n: int = 64) -> np.ndarray:
    a, b = math.log(lo), math.log(hi)
    pad = (b - a) / 6
    return np.exp(np.linspace(a + pad, b - pad, n))


def _residual(w_branch, W_branch, wavelet, f) -> float:
    back = scaling_convolve(w_branch, wavelet.density, f, wavelet.quad_grid if wavelet.mellin_closed_form is None
                            else None)
    ref = W_branch(f)
    scale = np.max(np.abs(ref))
    return float(np.max(np.abs(back - ref)) / scale) if scale > 0 else float(np.max(np.abs(back)))


def _sampled_branch_mellin(fgrid, vals, p, branch):
    lo, hi = fgrid[0], fgrid[-1]
    peak = np.max(np.abs(vals))
    for end, v in (("lower", vals[0]), ("upper", vals[-1])):
        if abs(v) > 1e-6 * peak:
            raise AdmissibilityError(
                f"W_{branch} does not decay toward the {end} end of its sampled range "
                f"(|W| = {abs(v):.3g} vs peak {peak:.3g}); its Mellin transform does not exist")
    fn = _log_spline(fgrid, vals)
    grid = LogGrid(lo, hi, 64, adaptive=False)
    return mellin_forward(fn, p, grid, tol=math.inf).value


def derive_scale_filter(W: FrequencyFilter, wavelet: Wavelet, contour: MellinContour | None = None,
                        sigma_grid=None, check_band=None) -> ScaleFilter:
    """Solve ``Psi . w = W`` for the scale filter.

    Power-term filters map term by term, ``c f**p -> c sigma**p / M{Psi}(p)``.
    Sampled filters go through the contour integral
    ``w_pm(sigma) = 1/(2 pi i) int dp sigma**p M{W_pm}(p) / M{Psi}(p)``.

    Parameters
    ----------
    W : FrequencyFilter
    wavelet : Wavelet
    contour : MellinContour, optional
        Integration path for sampled filters; default abscissa is the
        midpoint of the common analyticity strip.
    sigma_grid : array_like, optional
        Scales at which sampled results are cached (and interpolated in
        log-scale); also attached to symbolic results for export.
    check_band : (float, float), optional
        Frequency band on whose interior two-thirds (in ``ln f``) the
        round-trip residual ``|Psi . w - W| / max|W|`` is reported in
        ``info["residual"]``.

    Raises
    ------
    AdmissibilityError
        Divergent moment, non-decaying sampled branch, zero of ``M{Psi}`` on
        the contour or non-convergent inversion integral.
    ContourError
        Contour outside the common strip.
    """
    if W.is_zero:
        z = ScaleFilter.constant(0.0, 0.0, "zero")
        return ScaleFilter(z.positive, z.negative, "zero", {}, z.positive_terms, z.negative_terms, 0.0,
                           None, {"method": "zero", "residual": 0.0})
    if W.symbolic:
        info = {"method": "power_terms", "moments": {}}
        branches = []
        for name, terms in (("plus", W.positive_terms), ("minus", W.negative_terms)):
            out = []
            for t in terms:
                if t.coef == 0:
                    continue
                m = info["moments"].get(t.power)
                if m is None:
                    m = _moment_or_raise(wavelet, t.power, f"W_{name} term f**{t.power:g}")
                    info["moments"][t.power] = m
                out.append(PowerTerm(t.coef / m, t.power))
            branches.append(tuple(out))
        w = ScaleFilter.from_terms(branches[0], branches[1], W.kind, W.params, W.dc_gain, info)
        band = check_band or (1e-2, 1e2)
    else:
        w = _derive_sampled(W, wavelet, contour, sigma_grid)
        band = check_band or W.params.get("f_range")
    fi = _interior_band(*band, n=48)
    info = w.info
    info["residual"] = max(_residual(w.positive, W.positive, wavelet, fi),
                           _residual(w.negative, W.negative, wavelet, fi))
    info["check_band"] = (float(fi[0]), float(fi[-1]))
    if sigma_grid is not None and w.samples is None:
        s = np.asarray(sigma_grid, dtype=float)
        w = ScaleFilter(w.positive, w.negative, w.kind, w.params, w.positive_terms, w.negative_terms,
                        w.dc_gain, w.domain, info, (s, w.positive(s), w.negative(s)))
    return w


def _inversion_strip(W: FrequencyFilter, branch: int):
    fgrid, vals = W.samples[0], W.samples[1 + branch]
    s_lo, s_hi = tail_exponents(fgrid, vals, cap=STRIP_EXPONENT_CAP)
    return (s_hi, s_lo)


def _derive_sampled(W, wavelet, contour, sigma_grid):
    if W.samples is None:
        raise ParameterError("numerical design needs a sampled filter (use split_signs) or power terms")
    fgrid = W.samples[0]
    strips = [_inversion_strip(W, b) for b in (0, 1)]
    for name, (lo, hi), k in zip(("plus", "minus"), strips, (1, 2)):
        if not lo < hi and np.any(W.samples[k]):
            raise AdmissibilityError(
                f"W_{name}: Mellin transform diverges for every Re p (tail exponents {hi:.3g} toward f -> 0 "
                f"and {lo:.3g} toward f -> inf leave no convergence strip)")
    if contour is None:
        c = default_abscissa(wavelet.strip, *strips)
        contour = MellinContour(c)
    for name, st in zip(("plus", "minus"), strips):
        for s in (wavelet.strip, st):
            if not s[0] < contour.c < s[1]:
                raise ContourError(f"contour Re p = {contour.c:g} lies outside strip {s} (branch {name})")
    p = contour.nodes
    psi_m = np.asarray(wavelet.mellin(p))
    _check_no_zeros(psi_m, None, contour)
    a, b = wavelet.passband(1e-10)
    lo, hi = fgrid[0] / b, fgrid[-1] / a
    if sigma_grid is None:
        n_oct = math.log2(hi / lo)
        sigma_grid = np.exp(np.linspace(math.log(lo), math.log(hi), int(32 * n_oct) + 1))
    s = np.asarray(sigma_grid, dtype=float)
    results, info = [], {"method": "contour", "contour": {"c": contour.c, "u_max": contour.u_max,
                                                         "n_points": contour.n_points},
                         "strips": {"plus": strips[0], "minus": strips[1], "wavelet": wavelet.strip}}
    for k, name in enumerate(("plus", "minus")):
        vals = W.samples[1 + k]
        if not np.any(vals):
            results.append(np.zeros(s.shape, dtype=complex))
            continue
        Wm = _sampled_branch_mellin(fgrid, vals, p, name)
        negligible = np.abs(Wm) <= MELLIN_NOISE_FLOOR * np.max(np.abs(Wm))
        _check_no_zeros(psi_m, np.where(negligible, 0.0, Wm), contour)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(negligible, 0.0, Wm / psi_m)
        mf = MellinFunction(lambda q: ratio, (max(wavelet.strip[0], strips[k][0]), min(wavelet.strip[1], strips[k][1])),
                            "quadrature")
        try:
            inv = mellin_inverse(mf, contour, s, values=ratio)
        except TruncationError as exc:
            raise AdmissibilityError(f"W_{name}: inversion integral does not converge along the contour ({exc})") from exc
        results.append(np.asarray(inv.value))
        info[f"truncation_{name}"] = inv.truncation
    return ScaleFilter(_log_spline(s, results[0]), _log_spline(s, results[1]), "derived", dict(W.params),
                       None, None, W.dc_gain, (float(s[0]), float(s[-1])), info, (s, results[0], results[1]))


def _check_no_zeros(psi_m, Wm, contour):
    """Zero test for M{Psi} along the contour (relative floor ZERO_FLOOR).

    Where ``M{W}`` is given, points at which it is negligible (set to zero
    by the caller) are not counted: the quotient is zero there.
    """
    mag = np.abs(psi_m)
    small = mag < ZERO_FLOOR * mag.max()
    if Wm is not None:
        wmag = np.abs(Wm)
        small &= wmag > 0
        if np.any(small):
            u = contour.u[np.flatnonzero(small)[0]]
            raise AdmissibilityError(
                f"M{{Psi}} has a (numerical) zero on the contour at p = {contour.c:g}{u:+g}i where M{{W}} "
                f"does not vanish")
    elif small[contour.n_points // 2]:
        raise AdmissibilityError(f"M{{Psi}} vanishes on the real axis at p = {contour.c:g}")


# ------------------------------------------------------------ admissibility


@dataclass
class Clause:
    name: str
    passed: bool
    detail: str
    condition: str

    def as_dict(self):
        return {"name": self.name, "passed": self.passed, "detail": self.detail, "condition": self.condition}


@dataclass
class AdmissibilityReport:
    """Outcome of :func:`check_admissibility`; ``failing`` lists failed clause names."""

    target: str
    wavelet: str
    clauses: list = field(default_factory=list)

    @property
    def admissible(self) -> bool:
        return all(c.passed for c in self.clauses)

    @property
    def failing(self) -> list:
        return [c.name for c in self.clauses if not c.passed]

    def as_dict(self) -> dict:
        return {"target": self.target, "wavelet": self.wavelet, "admissible": self.admissible,
                "failing": self.failing, "clauses": [c.as_dict() for c in self.clauses]}

    def summary(self) -> str:
        if self.admissible:
            return f"{self.target} is admissible for {self.wavelet}"
        bad = [c for c in self.clauses if not c.passed]
        return f"{self.target} is NOT admissible for {self.wavelet}: " + "; ".join(
            f"{c.name}: {c.detail}" for c in bad)


_WAVELET_CONDITION = "wavelet admissibility: M{Psi}(0) = int_0^inf dsigma/sigma |psi_hat(sigma)|^2 must be finite"
_MOMENT_CONDITION = "every power p carried by the filter needs 0 < |M{Psi}(p)| < inf"
_CONTOUR_CONDITION = ("M{W_pm} must be analytic on a vertical contour where M{Psi} is analytic without zeros, "
                      "and the inversion integral must converge")


def _moment_clause(wavelet, p, label):
    name = f"Psi_mellin({p:g})"
    try:
        m = _moment(wavelet, p)
    except MellinDivergenceError as exc:
        return Clause(name, False, f"{label}: Psi_mellin({p:g}) diverges ({exc})", _MOMENT_CONDITION)
    if not np.isfinite(m) or abs(m) == 0:
        return Clause(name, False, f"{label}: Psi_mellin({p:g}) = {m}", _MOMENT_CONDITION)
    if np.isreal(p) and not m.real > 0:
        return Clause(name, False, f"{label}: Psi_mellin({p:g}) = {m.real:.6g} is not positive",
                      _MOMENT_CONDITION)
    return Clause(name, True, f"{label}: Psi_mellin({p:g}) = {m.real:.17g}", _MOMENT_CONDITION)


def _coef_text(spec: DifferentialOperatorSpec) -> str:
    return ", ".join(f"a{n}={a.real:g}" + (f"{a.imag:+g}i" if a.imag else "") for n, a in spec.nonzero())


def check_admissibility(target, wavelet: Wavelet, contour: MellinContour | None = None) -> AdmissibilityReport:
    """Collect every admissibility finding for ``target`` under ``wavelet``.

    ``target`` is a :class:`FrequencyFilter` or a
    :class:`DifferentialOperatorSpec`.  Never raises on inadmissibility; the
    verdict and the failing clauses are in the report.
    """
    if isinstance(target, DifferentialOperatorSpec) or (isinstance(target, (list, tuple)) and not isinstance(target, FrequencyFilter)):
        spec = target if isinstance(target, DifferentialOperatorSpec) else DifferentialOperatorSpec(tuple(target))
        target_name = "P(D) with " + _coef_text(spec)
        W = polynomial_filter(spec)
    else:
        W = target
        if W.kind == "polynomial":
            target_name = "polynomial filter with " + _coef_text(DifferentialOperatorSpec(tuple(W.params["coefficients"])))
        else:
            target_name = f"{W.kind} filter" + (f" {_jsonable(W.params)}" if W.params else "")
    report = AdmissibilityReport(target_name, wavelet.name)
    report.clauses.append(_moment_clause(wavelet, 0.0, "wavelet"))
    report.clauses[-1].name = "wavelet"
    report.clauses[-1].condition = _WAVELET_CONDITION
    if W.is_zero:
        report.clauses.append(Clause("zero_filter", True, "W = 0 maps to w = 0", "trivial"))
        return report
    if W.symbolic:
        powers = sorted({t.power for t in W.positive_terms + W.negative_terms if t.coef != 0})
        for p in powers:
            if p == 0:
                c = report.clauses[0]
                report.clauses.append(Clause("Psi_mellin(0)", c.passed, c.detail, _MOMENT_CONDITION))
            else:
                report.clauses.append(_moment_clause(wavelet, p, f"power {p:g}"))
        return report
    # sampled filter: strips, decay, zeros and convergence along the contour
    try:
        _derive_sampled(W, wavelet, contour, None)
        report.clauses.append(Clause("contour", True, "inversion along the contour converged", _CONTOUR_CONDITION))
    except (AdmissibilityError, ContourError, MellinDivergenceError) as exc:
        report.clauses.append(Clause("contour", False, str(exc), _CONTOUR_CONDITION))
    return report


# ------------------------------------------------------------ spec files


def _complex(v):
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise ParseError(f"complex value must be [re, im], got {v!r}")
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, dict):
        return complex(float(v.get("re", 0.0)), float(v.get("im", 0.0)))
    return complex(v)


def filter_from_spec(spec: dict, base_dir=None) -> FrequencyFilter:
    """Frequency filter from a JSON-like spec.

    ``{"type": "identity"}``, ``{"type": "hilbert"}``,
    ``{"type": "power", "p": 0.5, "gain": 1}``,
    ``{"type": "polynomial", "coefficients": [a0, a1, ...]}`` (entries real or
    ``[re, im]``), ``{"type": "sampled", "path": "W.csv"}`` with CSV rows
    ``f, re, im`` on a grid symmetric about zero.
    """
    if not isinstance(spec, dict) or "type" not in spec:
        raise ParseError("filter spec must be an object with a 'type' field")
    kind = spec["type"]
    try:
        if kind == "identity":
            return identity_frequency_filter()
        if kind == "hilbert":
            return hilbert_frequency_filter()
        if kind == "power":
            return power_law_filter(float(spec["p"]), _complex(spec.get("gain", 1.0)))
        if kind == "polynomial":
            return polynomial_filter(DifferentialOperatorSpec(tuple(_complex(a) for a in spec["coefficients"])))
        if kind == "sampled":
            if "path" in spec:
                path = Path(spec["path"])
                if base_dir is not None and not path.is_absolute():
                    path = Path(base_dir) / path
                data = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
                if data.shape[1] not in (2, 3):
                    raise ParseError(f"{path}: sampled filter CSV needs columns f,re[,im]")
                vals = data[:, 1] + 1j * (data[:, 2] if data.shape[1] == 3 else 0.0)
                return split_signs(data[:, 0], vals)
            return split_signs(np.asarray(spec["frequencies"], float),
                               np.asarray(spec["re"], float) + 1j * np.asarray(spec.get("im", 0.0), float))
    except KeyError as exc:
        raise ParseError(f"filter spec of type {kind!r} is missing field {exc}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(f"bad filter spec: {exc}") from None
    raise ParseError(f"unknown filter type {kind!r}")


def load_filter_spec(path) -> FrequencyFilter:
    path = Path(path)
    try:
        spec = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc.msg}", exc.lineno) from None
    return filter_from_spec(spec, path.parent)
