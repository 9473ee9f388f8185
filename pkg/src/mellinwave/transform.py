"""Continuous wavelet transform on a geometric scale grid and its synthesis.

Convention: the family is ``psi(sigma*t - tau)`` with no amplitude factor;
``sigma`` is a frequency scale (large ``sigma`` resolves high frequencies).
Relative to the usual time-scale form ``|s|**-0.5 psi((t - b)/s)`` the
mapping is ``s = 1/sigma``, ``b = tau/sigma``.

Per scale the transform is a bin-wise product on the signal's own DFT grid::

    C_j = IDFT[ conj(psi_hat(nu/sigma_j)) * DFT(x) ] / |sigma_j|

and row ``j`` is the coefficient at ``tau = sigma_j * t_k``.  Synthesis
sums ``q_j w(sigma_j) psi_hat(nu/sigma_j) DFT(C_j)`` with the plain-measure
weights ``q_j = |sigma_j| ln2 / V``, which amounts to multiplying the input
spectrum by the effective symbol
``W_eff(nu) = sum_j (ln2/V) w(sigma_j) Psi(nu/sigma_j)``.
"""

from __future__ import annotations

import math
import struct
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .exceptions import DomainError, GridError, ParseError
from .filters import ScaleFilter, identity_filter
from .signal_core import Signal, signal_band
from .wavelets import Wavelet, parse_wavelet

__all__ = [
    "ScaleTimeGrid",
    "Scaleogram",
    "SynthesisResult",
    "cwt_forward",
    "apply_scale_filter",
    "reconstruct",
    "effective_symbol",
    "weighted_energy",
    "parseval_pair",
    "save_scaleogram",
    "load_scaleogram",
    "export_scaleogram_csv",
]

LN2 = math.log(2.0)


@dataclass(frozen=True)
class ScaleTimeGrid:
    """Geometric scale grid with ``voices`` nodes per octave over ``octaves`` octaves.

    Node ``j`` sits at ``sigma_min * 2**((j + 1/2)/voices)`` (midpoint rule in
    ``ln sigma``), so the covered interval is ``[sigma_min, sigma_min*2**octaves]``
    for every voice count.  Times are shared with the signal's sample grid.
    """

    sigma_min: float
    octaves: int
    voices: int = 16
    include_negative_scales: bool = False
    sample_rate: float | None = None

    def __post_init__(self):
        if not (math.isfinite(self.sigma_min) and self.sigma_min > 0):
            raise GridError("sigma_min must be positive and finite")
        for name in ("octaves", "voices"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise GridError(f"{name} must be a positive integer")
            object.__setattr__(self, name, int(v))
        if self.sample_rate is not None and not self.sample_rate > 0:
            raise GridError("sample_rate must be positive")

    @property
    def sigma_max(self) -> float:
        return self.sigma_min * 2.0 ** self.octaves

    @property
    def n_scales(self) -> int:
        return self.octaves * self.voices

    @property
    def scales(self) -> np.ndarray:
        j = np.arange(self.n_scales)
        return self.sigma_min * 2.0 ** ((j + 0.5) / self.voices)

    @property
    def signed_scales(self) -> np.ndarray:
        """Rows of a scaleogram: ``-scales[::-1]`` (when enabled) then ``scales``."""
        s = self.scales
        return np.concatenate([-s[::-1], s]) if self.include_negative_scales else s

    @property
    def scale_weights(self) -> np.ndarray:
        """Quadrature weights for the plain measure ``dsigma``."""
        return np.abs(self.signed_scales) * (LN2 / self.voices)

    @property
    def ratio(self) -> float:
        return 2.0 ** (1.0 / self.voices)

    def with_voices(self, voices: int) -> "ScaleTimeGrid":
        return ScaleTimeGrid(self.sigma_min, self.octaves, voices, self.include_negative_scales, self.sample_rate)

    def describe(self) -> dict:
        return {"sigma_min": self.sigma_min, "sigma_max": self.sigma_max, "octaves": self.octaves,
                "voices": self.voices, "include_negative_scales": self.include_negative_scales,
                "n_scales": int(self.signed_scales.size)}

    @classmethod
    def covering(cls, wavelet: Wavelet, f_lo: float, f_hi: float, voices: int = 16, octaves: int | None = None,
                 tol: float = 1e-6, moments=(0.0,), include_negative_scales: bool = False,
                 sample_rate: float | None = None, max_octaves: int = 60) -> "ScaleTimeGrid":
        """Grid whose truncated scale integral best covers the band ``[f_lo, f_hi]``.

        For a power filter ``w = sigma**p`` the relative deficit of the
        effective symbol at frequency ``f`` is the mass of
        ``s**-p Psi(s) ds/s`` outside ``[f/sigma_max, f/sigma_min]``.
        ``sigma_min`` minimises the worst deficit over the band and the
        requested ``moments``.  Without ``octaves`` the smallest octave count
        reaching ``tol`` is used (up to ``max_octaves``).
        """
        if not (0 < f_lo <= f_hi):
            raise GridError(f"band [{f_lo}, {f_hi}] must satisfy 0 < f_lo <= f_hi")
        profiles = [wavelet.tail_profile(p) for p in moments]

        def deficit(log2_smin, n_oct):
            smin = 2.0 ** log2_smin
            smax = smin * 2.0 ** n_oct
            worst = 0.0
            for f, below, above in profiles:
                lf = np.log(f)
                b = np.interp(math.log(f_hi / smax), lf, below)
                a = np.interp(math.log(f_lo / smin), lf, above)
                worst = max(worst, a + b)
            return worst

        def best(n_oct):
            # coarse scan then local refinement of log2(sigma_min)
            centre = math.log2(math.sqrt(f_lo * f_hi)) - n_oct / 2
            cand = centre + np.linspace(-n_oct, n_oct, 8 * n_oct + 1)
            vals = [deficit(c, n_oct) for c in cand]
            k = int(np.argmin(vals))
            lo, hi = cand[max(k - 1, 0)], cand[min(k + 1, cand.size - 1)]
            fine = np.linspace(lo, hi, 101)
            fv = [deficit(c, n_oct) for c in fine]
            k = int(np.argmin(fv))
            return fine[k], fv[k]

        if octaves is None:
            need = max(1, math.ceil(math.log2(f_hi / f_lo)))
            for n_oct in range(need, max_octaves + 1):
                c, d = best(n_oct)
                if d <= tol:
                    break
            else:
                raise GridError(f"no grid of at most {max_octaves} octaves covers the band to {tol:g}")
        else:
            n_oct = int(octaves)
            c, d = best(n_oct)
        return cls(2.0 ** c, n_oct, voices, include_negative_scales, sample_rate)

    @classmethod
    def for_signal(cls, signal: Signal, wavelet: Wavelet, voices: int = 16, octaves: int | None = None,
                   include_negative_scales: bool = False, rel: float = 1e-6, **kw) -> "ScaleTimeGrid":
        """:meth:`covering` for the band occupied by ``signal``."""
        lo, hi = signal_band(signal, rel)
        if hi == 0:
            lo, hi = signal.sample_rate / len(signal.padded()), signal.sample_rate / 2
        return cls.covering(wavelet, lo, hi, voices, octaves, include_negative_scales=include_negative_scales,
                            sample_rate=signal.sample_rate, **kw)


@dataclass(frozen=True, eq=False)
class Scaleogram:
    """Coefficients ``x~(sigma_j, tau_jk)``, one row per signed grid scale.

    Rows hold the full (power-of-two) transform length; ``meta`` records the
    original length, sample rate, start time, the DC bin of the input DFT,
    whether the input was real, and the wavelet name.
    """

    coefficients: np.ndarray
    grid: ScaleTimeGrid
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        c = np.asarray(self.coefficients)
        if c.ndim != 2 or c.shape[0] != self.grid.signed_scales.size:
            raise GridError(f"coefficient matrix {c.shape} does not match {self.grid.signed_scales.size} grid scales")
        c = c.astype(np.complex128, copy=True)
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)

    @property
    def sample_rate(self) -> float:
        return self.meta["sample_rate"]

    @property
    def dt(self) -> float:
        return 1.0 / self.sample_rate

    @property
    def times(self) -> np.ndarray:
        """Sample times ``t_k`` (length of the padded transform)."""
        return self.meta.get("start_time", 0.0) + np.arange(self.coefficients.shape[1]) * self.dt

    @property
    def tau(self) -> np.ndarray:
        """Shift ``tau_jk = sigma_j * t_k`` of every coefficient."""
        return np.outer(self.grid.signed_scales, self.times)

    def scale_energy(self) -> np.ndarray:
        """``int dtau |x~(sigma_j, tau)|**2`` per scale."""
        s = np.abs(self.grid.signed_scales)
        return s * self.dt * np.sum(np.abs(self.coefficients) ** 2, axis=1)

    def __add__(self, other):
        _check_compatible(self, other)
        return Scaleogram(self.coefficients + other.coefficients, self.grid, dict(self.meta, dc=self.meta["dc"] + other.meta["dc"]))

    def __mul__(self, a):
        return Scaleogram(self.coefficients * a, self.grid, dict(self.meta, dc=self.meta["dc"] * a))

    __rmul__ = __mul__


def _check_compatible(a: Scaleogram, b: Scaleogram):
    if a.grid != b.grid or a.coefficients.shape != b.coefficients.shape:
        raise GridError("scaleograms live on different grids")
    if a.meta.get("sample_rate") != b.meta.get("sample_rate"):
        raise GridError("scaleograms have different sample rates")
    if a.meta.get("wavelet") != b.meta.get("wavelet"):
        raise GridError("scaleograms were computed with different wavelets")


def _bin_freqs(n: int, rate: float) -> np.ndarray:
    return np.fft.fftfreq(n, 1.0 / rate)


def _wavelet_rows(wavelet: Wavelet, nu: np.ndarray, sigma: np.ndarray) -> np.ndarray:
    """``psi_hat(nu / sigma_j)`` for every signed scale (rows)."""
    return np.asarray(wavelet.spectral_fn(nu[None, :] / sigma[:, None]), dtype=np.complex128)


def cwt_forward(signal: Signal, wavelet: Wavelet, grid: ScaleTimeGrid) -> Scaleogram:
    """Wavelet coefficients of ``signal`` on ``grid``.

    The signal is zero-padded to a power of two.  Negative scales, when
    enabled, pick up the negative-frequency half of the spectrum.

    Raises
    ------
    GridError
        If the grid declares a sample rate different from the signal's.
    """
    if grid.sample_rate is not None and not math.isclose(grid.sample_rate, signal.sample_rate, rel_tol=1e-12):
        raise GridError(f"grid sample rate {grid.sample_rate} differs from signal rate {signal.sample_rate}")
    work = signal.padded()
    n = len(work)
    X = np.fft.fft(work.samples)
    nu = _bin_freqs(n, work.sample_rate)
    sigma = grid.signed_scales
    rows = _wavelet_rows(wavelet, nu, sigma)
    # overlap means some in-band bin sees a wavelet response above 1e-8 of its peak
    mag = np.abs(X)
    band = (np.abs(nu) > 0) & (mag > 1e-12 * mag.max(initial=0.0))
    psi_peak = math.sqrt(float(wavelet.density(np.array([wavelet.peak_frequency()]))[0]))
    reach = np.max(np.abs(rows[:, band]), axis=0, initial=0.0) > 1e-8 * psi_peak
    if np.any(band) and not np.any(reach):
        warnings.warn("wavelet passbands on this grid do not overlap the signal band", RuntimeWarning, stacklevel=2)
    coeffs = np.fft.ifft(np.conj(rows) * X[None, :], axis=1) / np.abs(sigma)[:, None]
    meta = {"length": len(signal), "n": n, "sample_rate": float(signal.sample_rate),
            "start_time": float(signal.start_time), "dc": complex(X[0]), "real_source": signal.is_real,
            "wavelet": wavelet.name}
    return Scaleogram(coeffs, grid, meta)


class SynthesisResult(NamedTuple):
    signal: Signal
    frequencies: np.ndarray
    symbol: np.ndarray


def effective_symbol(w: ScaleFilter, wavelet: Wavelet, grid: ScaleTimeGrid, f) -> np.ndarray:
    """``W_eff(f) = sum_j (ln2/V) w(sigma_j) Psi(f/sigma_j)`` at signed ``f != 0``.

    This is the multiplier the discretised synthesis applies; comparing it
    with the target ``W`` shows the band-truncation and quadrature error.
    """
    f = np.asarray(f, dtype=float)
    sigma = grid.signed_scales
    wv = w.on_scales(sigma)
    flat = f.reshape(-1)
    dens = np.abs(_wavelet_rows(wavelet, flat, sigma)) ** 2
    return ((LN2 / grid.voices) * (wv @ dens)).reshape(f.shape)


def apply_scale_filter(scaleogram: Scaleogram, w: ScaleFilter, wavelet: Wavelet, grid: ScaleTimeGrid | None = None,
                       real_output: bool = False, dc_gain=None, return_symbol: bool = False):
    """Synthesis with scale multiplier ``w``: the double integral over scale and shift.

    Parameters
    ----------
    scaleogram : Scaleogram
    w : ScaleFilter
        Evaluated at the signed grid scales.
    wavelet : Wavelet
        The analysing wavelet.
    grid : ScaleTimeGrid, optional
        Must equal ``scaleogram.grid`` when given.
    real_output : bool
        Return a real signal.  On a positive-scale grid every nonzero bin
        ``k`` becomes ``Y[k] + conj(Y[-k])`` (``2 Re`` in time, DC not
        doubled), which supplies the mirror image the negative scales would
        contribute; with negative scales present the real part is taken.
    dc_gain : complex, optional
        Output DC is ``dc_gain`` times the input DC; default ``w.dc_gain``.
    return_symbol : bool
        Also return the effective symbol on the DFT bins.

    Returns
    -------
    Signal or SynthesisResult
        Complex unless ``real_output``; trimmed to the original length.
    """
    if grid is not None and grid != scaleogram.grid:
        raise GridError("grid does not match the scaleogram's grid")
    grid = scaleogram.grid
    if scaleogram.meta.get("wavelet") not in (None, wavelet.name):
        raise GridError(f"scaleogram was computed with {scaleogram.meta['wavelet']}, not {wavelet.name}")
    sigma = grid.signed_scales
    wv = w.on_scales(sigma)
    n = scaleogram.coefficients.shape[1]
    rate = scaleogram.sample_rate
    nu = _bin_freqs(n, rate)
    rows = _wavelet_rows(wavelet, nu, sigma)
    q = grid.scale_weights * wv
    Y = np.einsum("j,jk->k", q, rows * np.fft.fft(scaleogram.coefficients, axis=1))
    gain = w.dc_gain if dc_gain is None else dc_gain
    Y[0] = gain * scaleogram.meta["dc"]
    if real_output and grid.include_negative_scales:
        y = np.fft.ifft(Y).real
    elif real_output:
        mirror = np.conj(np.roll(Y[::-1], 1))
        Y = Y + mirror
        Y[0] = gain * scaleogram.meta["dc"]
        y = np.fft.ifft(Y).real
    else:
        y = np.fft.ifft(Y)
    out = Signal(y[: scaleogram.meta["length"]], rate, scaleogram.meta.get("start_time", 0.0))
    if return_symbol:
        dens = np.abs(rows) ** 2
        sym = (LN2 / grid.voices) * (wv @ dens)
        sym[0] = gain
        return SynthesisResult(out, nu, sym)
    return out


def reconstruct(scaleogram: Scaleogram, wavelet: Wavelet, grid: ScaleTimeGrid | None = None,
                real_output: bool = False) -> Signal:
    """Inverse transform: synthesis with the constant ``1/M{Psi}(0)``."""
    w, _ = identity_filter(wavelet)
    return apply_scale_filter(scaleogram, w, wavelet, grid, real_output)


def _weights_on_grid(scaleogram: Scaleogram, w) -> np.ndarray:
    sigma = scaleogram.grid.signed_scales
    if isinstance(w, ScaleFilter):
        return w.on_scales(sigma)
    if callable(w):
        return np.asarray(w(sigma), dtype=np.complex128)
    wv = np.asarray(w, dtype=np.complex128)
    if wv.ndim == 0:
        return np.full(sigma.shape, wv)
    if wv.shape != sigma.shape:
        raise GridError("weight array does not match the grid scales")
    return wv


def weighted_energy(scaleogram: Scaleogram, w_nonneg) -> float:
    """``int dsigma dtau w(sigma) |x~|**2`` by grid quadrature.

    ``w_nonneg`` is a :class:`ScaleFilter`, a callable of signed ``sigma``,
    a scalar or an array over the signed grid scales.

    Raises
    ------
    DomainError
        If ``w`` is complex or negative at a grid scale.
    """
    wv = _weights_on_grid(scaleogram, w_nonneg)
    if np.any(np.abs(wv.imag) > 1e-15 * np.maximum(np.abs(wv), 1e-300)) or np.any(wv.real < 0):
        raise DomainError("weighted_energy needs a real, nonnegative scale weight")
    return float(np.dot(wv.real * scaleogram.grid.scale_weights, scaleogram.scale_energy()))


def parseval_pair(scaleogram_phi: Scaleogram, scaleogram_chi: Scaleogram, w) -> complex:
    """``int dsigma dtau conj(phi~) w chi~`` by grid quadrature.

    Raises
    ------
    GridError
        If the two scaleograms do not share grid, rate and wavelet.
    """
    _check_compatible(scaleogram_phi, scaleogram_chi)
    wv = _weights_on_grid(scaleogram_phi, w)
    s = np.abs(scaleogram_phi.grid.signed_scales)
    inner = np.sum(np.conj(scaleogram_phi.coefficients) * scaleogram_chi.coefficients, axis=1)
    return complex(np.sum(scaleogram_phi.grid.scale_weights * wv * s * scaleogram_phi.dt * inner))


# ---------------------------------------------------------------- file formats

_MAGIC = b"MWSG"
_VERSION = 1
_HEADER = struct.Struct("<4sIIIIIBBddddddI")


def save_scaleogram(scaleogram: Scaleogram, path) -> None:
    """Binary file: fixed little-endian header, wavelet name, then a row-major complex64 matrix."""
    g, m = scaleogram.grid, scaleogram.meta
    rows, cols = scaleogram.coefficients.shape
    name = str(m.get("wavelet", "")).encode()
    dc = complex(m["dc"])
    head = _HEADER.pack(_MAGIC, _VERSION, rows, cols, g.octaves, g.voices, int(g.include_negative_scales),
                        int(bool(m.get("real_source", False))), g.sigma_min, m["sample_rate"],
                        m.get("start_time", 0.0), dc.real, dc.imag, 0.0, m["length"])
    with open(path, "wb") as fh:
        fh.write(head)
        fh.write(struct.pack("<H", len(name)))
        fh.write(name)
        fh.write(scaleogram.coefficients.astype("<c8").tobytes(order="C"))


def load_scaleogram(path) -> Scaleogram:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size + 2:
        raise ParseError(f"{path}: file too short for a scaleogram header")
    (magic, version, rows, cols, octaves, voices, neg, real_src, smin, rate, t0, dcr, dci, _,
     length) = _HEADER.unpack_from(data)
    if magic != _MAGIC or version != _VERSION:
        raise ParseError(f"{path}: not a scaleogram file (bad magic/version)")
    (nlen,) = struct.unpack_from("<H", data, _HEADER.size)
    off = _HEADER.size + 2
    name = data[off: off + nlen].decode()
    off += nlen
    body = data[off:]
    if len(body) != rows * cols * 8:
        raise ParseError(f"{path}: expected {rows * cols} complex64 values, found {len(body) // 8}")
    coeffs = np.frombuffer(body, dtype="<c8").reshape(rows, cols)
    grid = ScaleTimeGrid(smin, octaves, voices, bool(neg), None)
    meta = {"length": length, "n": cols, "sample_rate": rate, "start_time": t0, "dc": complex(dcr, dci),
            "real_source": bool(real_src), "wavelet": name}
    return Scaleogram(coeffs, grid, meta)


def export_scaleogram_csv(scaleogram: Scaleogram, path, stride: int = 1) -> None:
    """Rows ``sigma, tau, re, im`` (every ``stride``-th time sample), 17 significant digits."""
    sigma = scaleogram.grid.signed_scales
    t = scaleogram.times[::stride]
    c = scaleogram.coefficients[:, ::stride]
    S = np.repeat(sigma, t.size)
    T = (sigma[:, None] * t[None, :]).reshape(-1)
    table = np.column_stack([S, T, c.real.reshape(-1), c.imag.reshape(-1)])
    np.savetxt(path, table, fmt="%.17g", delimiter=",", header="sigma,tau,re,im", comments="# ")


def wavelet_for(scaleogram: Scaleogram) -> Wavelet:
    """Rebuild the analysing wavelet from the name stored with a scaleogram."""
    return parse_wavelet(scaleogram.meta["wavelet"])
