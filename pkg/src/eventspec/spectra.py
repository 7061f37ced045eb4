"""Continuous wavelet transforms of event streams and smoothed periodograms.

The temporally smoothed wavelet periodogram Omega(a, b) is computed two
ways: a direct double sum of the scaled kernel over event pairs, and the
multi-wavelet expansion sum_l eta_l v_l v_l^H where v_l is the transform
under eigen-wavelet l. The two agree to interpolation accuracy; the eigen
route costs O(events x retained wavelets) per point and is the default for
grid sweeps.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field as dataclass_field

import numpy as np

from .eigensys import EigenSystem, nystrom_decompose
from .errors import ConfigError, RegionError, UndefinedCoherenceError, ValidationError
from .kernels import SmoothedKernel, SmoothingWindow, ValidRegion
from .pointproc import EventStream
from .wavelets import Wavelet


def cwt(stream: EventStream, wavelet: Wavelet, a: float, b: float,
        check_region: bool = True) -> np.ndarray:
    """w(a, b): per-component sum of conjugated scaled-wavelet values.

    Requires the wavelet support (b - a*alpha/2, b + a*alpha/2) to sit
    inside (0, T]; only events inside it contribute.
    """
    if a <= 0:
        raise ValidationError("scale a must be positive")
    if check_region and not ValidRegion(wavelet.alpha, 0.0, stream.T).contains(a, b):
        raise RegionError(f"(a={a}, b={b}) outside the valid triangle for alpha={wavelet.alpha}")
    half = a * wavelet.alpha / 2.0
    root = math.sqrt(a)
    out = np.zeros(stream.p, dtype=complex if wavelet.is_complex else float)
    for i in range(stream.p):
        local = stream.window(i, b - half, b + half)
        if local.size:
            out[i] = np.sum(np.conj(wavelet((local - b) / a))) / root
    return out


def periodogram(stream: EventStream, wavelet: Wavelet, a: float, b: float,
                check_region: bool = True) -> np.ndarray:
    """Rank-one wavelet periodogram W(a, b) = w w^H."""
    w = cwt(stream, wavelet, a, b, check_region=check_region)
    return np.outer(w, np.conj(w))


def _require_inside(width: float, stream: EventStream, a: float, b: float) -> None:
    if a <= 0:
        raise ValidationError("scale a must be positive")
    half = a * width / 2.0
    tol = 1e-9 * max(1.0, stream.T)
    if b - half < -tol or b + half > stream.T + tol:
        raise RegionError(
            f"(a={a}, b={b}) outside the valid triangle: kernel support "
            f"({b - half:.3f}, {b + half:.3f}) not inside (0, {stream.T}]")


def smoothed_periodogram_direct(stream: EventStream, kernel: SmoothedKernel,
                                a: float, b: float,
                                check_region: bool = True) -> np.ndarray:
    """Omega(a, b) by the kernel double sum over event pairs.

    Omega_ij = sum over events s of stream i and t of stream j of
    K_{a,b}(s, t); only events inside the kernel support contribute.
    """
    if check_region:
        _require_inside(kernel.width, stream, a, b)
    half = a * kernel.width / 2.0
    locals_ = [(stream.window(i, b - half, b + half) - b) / a for i in range(stream.p)]
    p = stream.p
    out = np.zeros((p, p), dtype=complex)
    for i in range(p):
        for j in range(i, p):
            if locals_[i].size and locals_[j].size:
                block = kernel.value_matrix(locals_[i], locals_[j])
                out[i, j] = block.sum() / a
            if j > i:
                out[j, i] = np.conj(out[i, j])
    return out


def smoothed_periodogram_eigen(stream: EventStream, system: EigenSystem,
                               a: float, b: float,
                               check_region: bool = True) -> np.ndarray:
    """Omega(a, b) via the eigen-wavelet expansion sum_l eta_l v_l v_l^H."""
    v = eigen_cwt(stream, system, a, b, check_region=check_region)
    eta = system.retained_eigenvalues
    omega = (v * eta[None, :]) @ np.conj(v.T)
    return 0.5 * (omega + np.conj(omega.T))


def eigen_cwt(stream: EventStream, system: EigenSystem, a: float, b: float,
              check_region: bool = True) -> np.ndarray:
    """Transforms v_l(a, b) = integral of phi_{l,a,b}(t) dN(t), shape (p, L).

    Unlike the analyzing transform w(a, b), v_l is not conjugated: the
    expansion sum_l eta_l v_l v_l^H then reproduces the kernel double sum
    exactly, since K_{a,b}(s, t) = sum_l eta_l phi_{l,a,b}(s) phi*_{l,a,b}(t).
    """
    if check_region:
        _require_inside(system.kernel.width, stream, a, b)
    half = a * system.kernel.width / 2.0
    root = math.sqrt(a)
    L = system.n_retained
    out = np.zeros((stream.p, L), dtype=complex)
    for i in range(stream.p):
        local = stream.window(i, b - half, b + half)
        if local.size:
            vals = system.eigen_wavelets_at((local - b) / a)
            out[i] = vals.sum(axis=0) / root
    return out


def coherence(omega: np.ndarray, i: int, j: int) -> float:
    """gamma^2_ij = |Omega_ij|^2 / (Omega_ii Omega_jj), in [0, 1] for PSD Omega."""
    dii = omega[i, i].real
    djj = omega[j, j].real
    if dii <= 0 or djj <= 0:
        raise UndefinedCoherenceError(
            f"coherence undefined: diagonal entries ({dii:.3e}, {djj:.3e}) not positive")
    value = float(abs(omega[i, j]) ** 2 / (dii * djj))
    return min(value, 1.0) if value < 1.0 + 1e-9 else value


def normalize_coords(a: float, b: float, T: float, alpha: float, kappa: float):
    """Map raw (a, b) to the T-free coordinates (a_tilde, b_tilde)."""
    return a * (alpha + kappa) / T, b / T


def denormalize_coords(a_tilde: float, b_tilde: float, T: float,
                       alpha: float, kappa: float):
    """Inverse of normalize_coords."""
    return a_tilde * T / (alpha + kappa), b_tilde * T


def analyzing_frequency(f0: float, a: float) -> float:
    """Central analyzing frequency f0 / a of the wavelet at scale a."""
    return f0 / a


@dataclass
class FieldConfig:
    """Grid sweep configuration for field().

    With a_grid/b_grid unset, a logarithmic scale grid (n_a points between
    a_min and a_max) and a uniform translation grid (n_b points) are built.
    a_min defaults to the smallest scale at which the kernel support is
    expected to hold at least min_expected_events of the sparsest stream.
    """

    wavelet: Wavelet
    window: SmoothingWindow
    a_grid: np.ndarray | None = None
    b_grid: np.ndarray | None = None
    n_a: int = 32
    n_b: int = 128
    a_min: float | None = None
    min_expected_events: float = 10.0
    energy_cutoff: float = 1.0 - 1e-6
    n_points: int = 512
    system: EigenSystem | None = dataclass_field(default=None, repr=False)

    def build_system(self) -> EigenSystem:
        if self.system is None:
            kern = SmoothedKernel(self.wavelet, self.window, n_points=self.n_points)
            self.system = nystrom_decompose(kern, energy_cutoff=self.energy_cutoff)
        return self.system


class SpectralField:
    """Omega and coherence over a time-scale grid, invalid points masked."""

    def __init__(self, a_grid, b_grid, omega, gamma2, valid, meta: dict):
        self.a_grid = a_grid
        self.b_grid = b_grid
        self.omega = omega
        self.gamma2 = gamma2
        self.valid = valid
        self.meta = meta

    @property
    def p(self) -> int:
        return self.omega.shape[2]

    def to_csv(self, path) -> None:
        """Long format: a, b, i, j, re, im, coherence, valid (1-based i, j)."""
        p = self.p
        with open(path, "w", newline="") as fh:
            fh.write("a,b,i,j,re,im,coherence,valid\n")
            for ia, a in enumerate(self.a_grid):
                for ib, b in enumerate(self.b_grid):
                    ok = int(self.valid[ia, ib])
                    for i in range(p):
                        for j in range(p):
                            om = self.omega[ia, ib, i, j]
                            g = float(self.gamma2[ia, ib, i, j])
                            fh.write(f"{float(a)!r},{float(b)!r},{i + 1},{j + 1},"
                                     f"{float(om.real)!r},{float(om.imag)!r},{g!r},{ok}\n")

    def meta_json(self) -> str:
        return json.dumps(self.meta, indent=2, sort_keys=True)


def field(stream: EventStream, config: FieldConfig) -> SpectralField:
    """Evaluate Omega and gamma^2 on the grid, restricted to the triangle.

    Points outside the valid region are marked invalid and left as NaN.
    Raises ConfigError when no grid point is valid.
    """
    system = config.build_system()
    wav = config.wavelet
    win = config.window
    region = ValidRegion(wav.alpha, win.kappa, stream.T)

    if config.a_grid is not None:
        a_grid = np.asarray(config.a_grid, dtype=float)
    else:
        a_min = config.a_min
        if a_min is None:
            rates = stream.counts() / stream.T
            lam = max(float(rates.min()), 1e-12)
            a_min = config.min_expected_events / (lam * region.width)
        a_min = min(a_min, 0.99 * region.a_max)
        a_grid = np.geomspace(max(a_min, 1e-9), region.a_max, config.n_a)
    if config.b_grid is not None:
        b_grid = np.asarray(config.b_grid, dtype=float)
    else:
        b_grid = np.linspace(0.0, stream.T, config.n_b + 2)[1:-1]
    if np.any(np.diff(a_grid) <= 0) or np.any(np.diff(b_grid) <= 0) or a_grid[0] <= 0:
        raise ConfigError("grids must be positive and strictly increasing")

    p = stream.p
    na, nb = a_grid.size, b_grid.size
    omega = np.full((na, nb, p, p), np.nan, dtype=complex)
    gamma2 = np.full((na, nb, p, p), np.nan)
    valid = np.zeros((na, nb), dtype=bool)
    for ia, a in enumerate(a_grid):
        for ib, b in enumerate(b_grid):
            if not region.contains(a, b):
                continue
            om = smoothed_periodogram_eigen(stream, system, a, b, check_region=False)
            omega[ia, ib] = om
            valid[ia, ib] = True
            diag = np.diag(om).real
            for i in range(p):
                for j in range(p):
                    if diag[i] > 0 and diag[j] > 0:
                        gamma2[ia, ib, i, j] = coherence(om, i, j)
    if not valid.any():
        raise ConfigError("no grid point lies inside the valid triangle")

    meta = {
        "wavelet": wav.label,
        "alpha": wav.alpha,
        "window": win.kind.value,
        "kappa": win.kappa,
        "T": stream.T,
        "p": p,
        "dof": system.degrees_of_freedom(),
        "central_frequency": wav.central_frequency,
        "energy_cutoff": config.energy_cutoff,
        "n_points": system.kernel.n_points,
        "n_retained": system.n_retained,
        "a_max": region.a_max,
        "n_valid": int(valid.sum()),
        "n_grid": int(na * nb),
    }
    return SpectralField(a_grid, b_grid, omega, gamma2, valid, meta)
