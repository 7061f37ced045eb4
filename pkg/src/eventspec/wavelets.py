"""Analyzing wavelets and their truncated (finite-support) versions.

A wavelet here is always the *approximating* wavelet: the analytic form
restricted to (-alpha/2, alpha/2). After truncation the function is
re-normalized to unit L2 norm and the residual mean is projected out, so
that zero mean and unit norm hold exactly for the object actually used.

For a modulated wavelet (Morlet) the mean is removed by subtracting a small
cos/sin component at the modulation frequency rather than a constant; this
keeps the representation psi(t) = exp(i*2*pi*f_mod*t) * r(t) with r real,
which the kernel and eigensystem modules exploit to work with a real
symmetric kernel. For real wavelets the same projection reduces to the
usual constant subtraction.
"""

from __future__ import annotations

import csv
import enum
import math

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import ParseError, ValidationError
from .quadrature import simpson_rule

QUAD_POINTS = 4097  # composite Simpson nodes across the support
DEFAULT_ALPHA = 8.0

_MORLET_NORM = math.pi ** -0.25
_MEXHAT_NORM = 2.0 / math.sqrt(3.0) * math.pi ** -0.25


class WaveletKind(enum.Enum):
    MORLET = "morlet"
    MEXICAN_HAT = "mexhat"
    TABULATED = "tabulated"


def _morlet_envelope(t: np.ndarray) -> np.ndarray:
    return _MORLET_NORM * np.exp(-0.5 * t**2)


def _mexhat(t: np.ndarray) -> np.ndarray:
    return _MEXHAT_NORM * (1.0 - t**2) * np.exp(-0.5 * t**2)


class Wavelet:
    """Truncated analyzing wavelet with unit norm and zero mean.

    Use the factory methods ``morlet``, ``mexican_hat``, ``tabulated`` or
    ``from_csv``. Instances are immutable and safe to share across threads.

    Attributes
    ----------
    kind : WaveletKind
    alpha : float
        Width of the truncated support (-alpha/2, alpha/2) at unit scale.
    is_complex : bool
    modulation : float
        Frequency f_mod of the analytic phase factor; the full wavelet is
        exp(i*2*pi*f_mod*t) times a real envelope when f_mod > 0.
    """

    def __init__(self, kind: WaveletKind, alpha: float, envelope, modulation: float,
                 envelope_complex: bool, label: str):
        if alpha <= 0:
            raise ValidationError("alpha must be positive")
        self.kind = kind
        self.alpha = float(alpha)
        self.modulation = float(modulation)
        self._raw_envelope = envelope
        self._envelope_complex = envelope_complex
        self.is_complex = envelope_complex or modulation != 0.0
        self.label = label
        self._fit_corrections()
        self._f0: float | None = None

    # -- construction ---------------------------------------------------

    @classmethod
    def morlet(cls, alpha: float = DEFAULT_ALPHA) -> "Wavelet":
        """Morlet wavelet pi^(-1/4) exp(-t^2/2) exp(i 2 pi t)."""
        return cls(WaveletKind.MORLET, alpha, _morlet_envelope, 1.0, False, "morlet")

    @classmethod
    def mexican_hat(cls, alpha: float = DEFAULT_ALPHA) -> "Wavelet":
        """Unit-norm second derivative of a Gaussian (real valued)."""
        return cls(WaveletKind.MEXICAN_HAT, alpha, _mexhat, 0.0, False, "mexhat")

    @classmethod
    def tabulated(cls, times: np.ndarray, values: np.ndarray,
                  alpha: float | None = None) -> "Wavelet":
        """Wavelet given by samples on a uniform grid inside its support."""
        times = np.asarray(times, dtype=float)
        values = np.asarray(values)
        if times.ndim != 1 or times.size < 8:
            raise ValidationError("tabulated wavelet needs at least 8 samples")
        steps = np.diff(times)
        if steps.min() <= 0 or steps.max() - steps.min() > 1e-9 * steps.mean():
            raise ValidationError("tabulated wavelet grid must be uniform and increasing")
        if alpha is None:
            alpha = 2.0 * max(abs(times[0]), abs(times[-1]))
        is_complex = np.iscomplexobj(values) and np.abs(values.imag).max() > 0
        spline = CubicSpline(times, values if is_complex else values.real)
        lo, hi = times[0], times[-1]

        def envelope(t: np.ndarray) -> np.ndarray:
            t = np.asarray(t, dtype=float)
            out = spline(np.clip(t, lo, hi))
            return np.where((t < lo) | (t > hi), 0.0, out)

        return cls(WaveletKind.TABULATED, alpha, envelope, 0.0, is_complex, "tabulated")

    @classmethod
    def from_csv(cls, path) -> "Wavelet":
        """Load a tabulated wavelet from a (t, re[, im]) CSV file."""
        times, vals = [], []
        with open(path, newline="") as fh:
            for lineno, row in enumerate(csv.reader(fh), start=1):
                if not row or row[0].lstrip().startswith("#"):
                    continue
                if len(row) not in (2, 3):
                    raise ParseError("expected 2 or 3 columns (t, re[, im])", lineno)
                try:
                    t = float(row[0])
                    v = float(row[1]) + (1j * float(row[2]) if len(row) == 3 else 0.0)
                except ValueError as exc:
                    raise ParseError(str(exc), lineno) from None
                times.append(t)
                vals.append(v)
        if not times:
            raise ParseError("no samples found in wavelet file")
        values = np.asarray(vals)
        if np.abs(values.imag).max() == 0:
            values = values.real
        return cls.tabulated(np.asarray(times), values)

    # -- normalization --------------------------------------------------

    def _fit_corrections(self) -> None:
        # Project out the Fourier mode of the raw envelope at the modulation
        # frequency so the full wavelet integrates to zero, then rescale to
        # unit L2 norm. All integrals use the same Simpson rule that the
        # invariant checks use, so the corrections are exact for it.
        half = self.alpha / 2.0
        x, w = simpson_rule(-half, half, QUAD_POINTS)
        inside = np.abs(x) < half  # the evaluation mask; endpoints excluded
        raw = np.where(inside, self._raw_envelope(x), 0.0)
        if self.modulation != 0.0:
            cosx = np.where(inside, np.cos(2.0 * np.pi * self.modulation * x), 0.0)
            sinx = np.where(inside, np.sin(2.0 * np.pi * self.modulation * x), 0.0)
            mu = w @ ((cosx + 1j * sinx) * raw)
            gram = np.array([[w @ (cosx * cosx), w @ (cosx * sinx)],
                             [w @ (sinx * cosx), w @ (sinx * sinx)]])
            coeff = np.linalg.solve(gram, np.array([mu.real, mu.imag]))
            self._c_cos, self._c_sin = float(coeff[0]), float(coeff[1])
            env = raw - self._c_cos * cosx - self._c_sin * sinx
        else:
            ones = inside.astype(float)
            mean = (w @ raw) / (w @ ones)
            self._c_cos, self._c_sin = mean, 0.0
            env = raw - mean * ones
        norm = math.sqrt(float(np.real(w @ (env * np.conj(env)))))
        if norm <= 0:
            raise ValidationError("wavelet has zero norm on its support")
        self._scale = norm
        self._quad = (x, w)

    # -- evaluation -----------------------------------------------------

    def envelope_smooth(self, t) -> np.ndarray:
        """Corrected envelope without the support mask.

        Intended for quadrature over subintervals of the support, where the
        boundary value must be the one-sided limit rather than zero.
        """
        t = np.asarray(t, dtype=float)
        raw = self._raw_envelope(t)
        if self.modulation != 0.0:
            corr = (self._c_cos * np.cos(2.0 * np.pi * self.modulation * t)
                    + self._c_sin * np.sin(2.0 * np.pi * self.modulation * t))
        else:
            corr = self._c_cos
        return (raw - corr) / self._scale

    def envelope(self, t) -> np.ndarray:
        """Corrected envelope r(t); zero outside the support."""
        t = np.asarray(t, dtype=float)
        inside = np.abs(t) < self.alpha / 2.0
        return np.where(inside, self.envelope_smooth(t), 0.0)

    def __call__(self, t):
        """Evaluate the wavelet at unit scale; exactly zero off support."""
        env = self.envelope(t)
        if self.modulation != 0.0:
            t = np.asarray(t, dtype=float)
            return env * np.exp(2j * np.pi * self.modulation * t)
        return env

    @property
    def support(self) -> tuple[float, float]:
        return (-self.alpha / 2.0, self.alpha / 2.0)

    @property
    def central_frequency(self) -> float:
        if self._f0 is None:
            self._f0 = central_frequency(self)
        return self._f0

    def __repr__(self) -> str:
        return f"Wavelet({self.label}, alpha={self.alpha})"


class ScaledWavelet:
    """psi_{a,b}(t) = a^(-1/2) psi((t - b)/a) with support (b - a*alpha/2, b + a*alpha/2)."""

    def __init__(self, base: Wavelet, a: float, b: float = 0.0):
        if a <= 0:
            raise ValidationError("scale a must be positive")
        self.base = base
        self.a = float(a)
        self.b = float(b)

    @property
    def support(self) -> tuple[float, float]:
        half = self.a * self.base.alpha / 2.0
        return (self.b - half, self.b + half)

    def evaluate(self, t):
        t = np.asarray(t, dtype=float)
        return self.base((t - self.b) / self.a) / math.sqrt(self.a)

    __call__ = evaluate


def evaluate(w: ScaledWavelet, t):
    """Functional form of ScaledWavelet.evaluate."""
    return w.evaluate(t)


def central_frequency(w: Wavelet, n_fft: int = 1 << 18) -> float:
    """Spectral centroid of |Psi(f)|^2 over positive frequencies.

    Computed from the FFT of the truncated wavelet, zero padded for
    frequency resolution. For an analytic wavelet such as the Morlet the
    negative-frequency mass is negligible and this equals the plain first
    moment of its energy spectrum.
    """
    half = w.alpha / 2.0
    n = QUAD_POINTS
    t = np.linspace(-half, half, n)
    vals = w(t)
    dt = t[1] - t[0]
    spec = np.fft.fft(vals, n_fft) * dt
    freqs = np.fft.fftfreq(n_fft, dt)
    pos = freqs > 0
    power = np.abs(spec[pos]) ** 2
    f = freqs[pos]
    mass = np.trapezoid(power, f)
    if mass <= 0:
        raise ValidationError("wavelet has no positive-frequency energy")
    return float(np.trapezoid(f * power, f) / mass)


def autocorrelation(w: Wavelet, x) -> complex | np.ndarray:
    """P(x) = integral of psi(t) psi*(t - x) dt over the truncated support.

    P(0) = 1 by unit norm and P(-x) = conj(P(x)).
    """
    x_arr = np.atleast_1d(np.asarray(x, dtype=float))
    half = w.alpha / 2.0
    out = np.zeros(x_arr.shape, dtype=complex if w.is_complex else float)
    for i, xi in enumerate(x_arr):
        lo = max(-half, xi - half)
        hi = min(half, xi + half)
        if hi <= lo:
            continue
        t, wt = simpson_rule(lo, hi, QUAD_POINTS)
        out[i] = wt @ (w(t) * np.conj(w(t - xi)))
    if np.isscalar(x) or np.asarray(x).ndim == 0:
        return out[0]
    return out
