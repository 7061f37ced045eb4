"""Event-stream data model, CSV ingestion, and process simulators.

Simulation covers homogeneous Poisson processes, exponential-kernel Hawkes
processes (self and mutually exciting, simulated exactly by Ogata's
thinning with O(1) intensity updates), and piecewise-stationary
concatenations of independent Hawkes segments. Theoretical Bartlett
spectra and coherences for these processes back the Monte-Carlo studies.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParseError, ValidationError


class EventStream:
    """p ordered event-time sequences on (0, T].

    events[i] is a strictly increasing float array with values in (0, T].
    Instances are immutable after construction.
    """

    def __init__(self, events, T: float):
        if T <= 0:
            raise ValidationError("horizon T must be positive")
        self.T = float(T)
        cleaned = []
        for i, seq in enumerate(events):
            arr = np.asarray(seq, dtype=float).copy()
            if arr.ndim != 1:
                raise ValidationError(f"stream {i + 1}: event times must be 1-d")
            if arr.size:
                if np.any(~np.isfinite(arr)):
                    raise ValidationError(f"stream {i + 1}: non-finite event time")
                if np.any(np.diff(arr) <= 0):
                    raise ValidationError(f"stream {i + 1}: event times must be strictly increasing")
                if arr[0] <= 0 or arr[-1] > self.T:
                    raise ValidationError(f"stream {i + 1}: event times must lie in (0, T]")
            arr.setflags(write=False)
            cleaned.append(arr)
        if not cleaned:
            raise ValidationError("need at least one component stream")
        self.events = tuple(cleaned)
        self.p = len(cleaned)

    def counts(self) -> np.ndarray:
        """N_i(T) for each component."""
        return np.array([seq.size for seq in self.events])

    def window(self, i: int, lo: float, hi: float) -> np.ndarray:
        """Events of component i inside [lo, hi], by binary search."""
        seq = self.events[i]
        return seq[np.searchsorted(seq, lo, "left"):np.searchsorted(seq, hi, "right")]

    def __repr__(self) -> str:
        return f"EventStream(p={self.p}, T={self.T}, counts={self.counts().tolist()})"


def load_csv(path) -> EventStream:
    """Read an event file: optional header '# p=<int> T=<float>', rows 'stream,time'.

    Without a header, p is the largest stream index seen and T the maximum
    time rounded up to the next integer.
    """
    header_p = None
    header_T = None
    rows: list[tuple[int, float]] = []
    with open(path, newline="") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                for token in line[1:].replace(",", " ").split():
                    if token.startswith("p="):
                        header_p = int(token[2:])
                    elif token.startswith("T="):
                        header_T = float(token[2:])
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise ParseError(f"expected 'stream,time', got {line!r}", lineno)
            try:
                idx = int(parts[0])
                t = float(parts[1])
            except ValueError as exc:
                raise ParseError(str(exc), lineno) from None
            if idx < 1:
                raise ParseError(f"stream index must be >= 1, got {idx}", lineno)
            if not math.isfinite(t) or t <= 0:
                raise ParseError(f"event time must be positive and finite, got {t}", lineno)
            rows.append((idx, t))

    p = header_p if header_p is not None else (max(r[0] for r in rows) if rows else 0)
    if p <= 0:
        raise ParseError("cannot infer stream count: empty file without header")
    if rows and max(r[0] for r in rows) > p:
        raise ParseError(f"stream index {max(r[0] for r in rows)} exceeds declared p={p}")
    max_t = max((r[1] for r in rows), default=0.0)
    T = header_T if header_T is not None else float(math.ceil(max_t)) or 1.0
    if max_t > T:
        raise ParseError(f"event time {max_t} exceeds declared T={T}")
    streams = [sorted(t for idx, t in rows if idx == i + 1) for i in range(p)]
    return EventStream(streams, T)


def save_csv(stream: EventStream, path) -> None:
    """Write the event file format read by load_csv."""
    with open(path, "w", newline="") as fh:
        fh.write(f"# p={stream.p} T={float(stream.T)!r}\n")
        merged = [(float(t), i + 1) for i, seq in enumerate(stream.events) for t in seq]
        merged.sort()
        for t, idx in merged:
            fh.write(f"{idx},{t!r}\n")


@dataclass(frozen=True)
class HawkesParams:
    """Exponential-kernel Hawkes parameters.

    Conditional intensity of component i:
        lambda_i(t) = nu_i + sum_j int alpha_ij exp{-beta_ij (t - s)} dN_j(s).
    Stationarity requires the spectral radius of (alpha_ij / beta_ij) < 1.
    """

    nu: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    p: int = field(init=False)

    def __post_init__(self):
        nu = np.atleast_1d(np.asarray(self.nu, dtype=float))
        p = nu.size
        alpha = np.asarray(self.alpha, dtype=float) * np.ones((p, p))
        beta = np.asarray(self.beta, dtype=float) * np.ones((p, p))
        if alpha.shape != (p, p) or beta.shape != (p, p):
            raise ValidationError("alpha and beta must broadcast to p x p")
        if np.any(nu < 0) or np.any(alpha < 0):
            raise ValidationError("nu and alpha must be non-negative")
        if np.any(beta <= 0):
            raise ValidationError("beta must be positive")
        object.__setattr__(self, "nu", nu)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "p", p)
        rho = self.spectral_radius()
        if rho >= 1.0:
            raise ValidationError(
                f"unstable Hawkes parameters: spectral radius of alpha/beta is "
                f"{rho:.4f} >= 1")

    def spectral_radius(self) -> float:
        branching = self.alpha / self.beta
        return float(np.max(np.abs(np.linalg.eigvals(branching))))

    def stationary_rate(self) -> np.ndarray:
        """lambda solving (I - alpha/beta) lambda = nu."""
        return np.linalg.solve(np.eye(self.p) - self.alpha / self.beta, self.nu)

    @classmethod
    def from_dict(cls, cfg: dict) -> "HawkesParams":
        try:
            return cls(nu=np.asarray(cfg["nu"], dtype=float),
                       alpha=np.asarray(cfg["alpha"], dtype=float),
                       beta=np.asarray(cfg["beta"], dtype=float))
        except KeyError as exc:
            raise ValidationError(f"Hawkes config missing key {exc}") from None

    @classmethod
    def from_json(cls, path) -> "HawkesParams":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def simulate_poisson(rates, T: float, seed) -> EventStream:
    """Independent homogeneous Poisson components with the given rates."""
    rates = np.atleast_1d(np.asarray(rates, dtype=float))
    if np.any(rates < 0):
        raise ValidationError("Poisson rates must be non-negative")
    if T <= 0:
        raise ValidationError("T must be positive")
    rng = np.random.default_rng(seed)
    events = []
    for lam in rates:
        n = rng.poisson(lam * T)
        times = np.sort(rng.uniform(0.0, T, n))
        # strictly increasing and inside (0, T]
        times = times[times > 0]
        times = np.unique(times)
        events.append(times)
    return EventStream(events, T)


def _simulate_hawkes_rng(params: HawkesParams, T: float, rng: np.random.Generator,
                         t_offset: float = 0.0):
    """Ogata thinning on (0, T]; returns raw per-stream time lists.

    State M[i, j] holds the decayed excitation of stream i from past events
    of stream j; between events it decays as exp(-beta_ij dt), and an event
    in stream j adds alpha[:, j].
    """
    p = params.p
    nu = params.nu
    alpha = params.alpha
    beta = params.beta
    M = np.zeros((p, p))
    t = 0.0
    out: list[list[float]] = [[] for _ in range(p)]
    lam = nu.copy()
    total = float(lam.sum())
    while True:
        if total <= 0:
            break
        dt = rng.exponential(1.0 / total)
        t = t + dt
        if t > T:
            break
        M *= np.exp(-beta * dt)
        lam = nu + M.sum(axis=1)
        new_total = float(lam.sum())
        u = rng.uniform(0.0, total)
        if u <= new_total:
            # accepted: assign to a component proportionally
            cum = np.cumsum(lam)
            comp = int(np.searchsorted(cum, u))
            out[comp].append(t + t_offset)
            M[:, comp] += alpha[:, comp]
            total = new_total + float(alpha[:, comp].sum())
        else:
            total = new_total
    return out


def simulate_hawkes(params: HawkesParams, T: float, seed) -> EventStream:
    """Exact simulation of a stationary-parameter Hawkes process on (0, T]."""
    if T <= 0:
        raise ValidationError("T must be positive")
    rng = np.random.default_rng(seed)
    raw = _simulate_hawkes_rng(params, T, rng)
    return EventStream([np.asarray(seq) for seq in raw], T)


def simulate_piecewise(segments, seed) -> EventStream:
    """Independent Hawkes segments concatenated over a partition of (0, T].

    segments: iterable of ((t0, t1), HawkesParams). Intervals must tile
    (0, T] without gaps or overlaps; the excitation state is reset to the
    baseline at every boundary.
    """
    segs = [((float(lo), float(hi)), par) for (lo, hi), par in segments]
    if not segs:
        raise ValidationError("need at least one segment")
    segs.sort(key=lambda s: s[0][0])
    if abs(segs[0][0][0]) > 1e-12:
        raise ValidationError("segments must start at 0")
    for ((lo0, hi0), _), ((lo1, _), _) in zip(segs, segs[1:]):
        if abs(hi0 - lo1) > 1e-9:
            raise ValidationError(f"segments must tile the horizon; gap or overlap at {hi0} vs {lo1}")
    p = segs[0][1].p
    if any(par.p != p for _, par in segs):
        raise ValidationError("all segments must have the same dimension p")
    T = segs[-1][0][1]
    rng = np.random.default_rng(seed)
    streams: list[list[float]] = [[] for _ in range(p)]
    for (lo, hi), par in segs:
        if hi <= lo:
            raise ValidationError("segment intervals must have positive length")
        raw = _simulate_hawkes_rng(par, hi - lo, rng, t_offset=lo)
        for i in range(p):
            streams[i].extend(raw[i])
    return EventStream([np.asarray(s) for s in streams], T)


def hawkes_spectrum(params: HawkesParams, f) -> np.ndarray:
    """Bartlett spectral density matrix of the stationary Hawkes process.

    S(f) = (I - G(f))^(-1) diag(lambda) (I - G(f))^(-H) with
    G_ij(f) = alpha_ij / (beta_ij + i 2 pi f). Returns shape (p, p) for a
    scalar frequency, else (len(f), p, p).
    """
    f_arr = np.atleast_1d(np.asarray(f, dtype=float))
    lam = params.stationary_rate()
    p = params.p
    out = np.empty((f_arr.size, p, p), dtype=complex)
    eye = np.eye(p)
    for k, fk in enumerate(f_arr):
        G = params.alpha / (params.beta + 2j * np.pi * fk)
        Minv = np.linalg.inv(eye - G)
        out[k] = Minv @ np.diag(lam) @ Minv.conj().T
    if np.isscalar(f) or np.asarray(f).ndim == 0:
        return out[0]
    return out


def poisson_spectrum(rates) -> np.ndarray:
    """Flat spectrum diag(lambda) of independent Poisson streams."""
    return np.diag(np.atleast_1d(np.asarray(rates, dtype=float)))


def coherence_theoretical(params: HawkesParams, f, i: int, j: int):
    """rho^2_ij(f) = |S_ij|^2 / (S_ii S_jj) for the Hawkes spectrum."""
    from .errors import UndefinedCoherenceError

    S = hawkes_spectrum(params, np.atleast_1d(np.asarray(f, dtype=float)))
    sii = S[:, i, i].real
    sjj = S[:, j, j].real
    if np.any(sii <= 0) or np.any(sjj <= 0):
        raise UndefinedCoherenceError("zero diagonal spectrum; coherence undefined")
    rho2 = np.abs(S[:, i, j]) ** 2 / (sii * sjj)
    if np.isscalar(f) or np.asarray(f).ndim == 0:
        return float(rho2[0])
    return rho2
