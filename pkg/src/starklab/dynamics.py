"""Unitary time evolution, spreading moments, and time-uniform envelopes.

Evolution of a packet released at site k uses the eigen-expansion

    psi_t(n) = sum_m exp(-i lambda_m t) conj(phi_m(k)) phi_m(n),

so any time is reached in one matrix-vector product with no step error
beyond the eigendecomposition itself.  The position moment is
M_q(t) = sum_n |n|**q |psi_t(n)|**2.

The time-uniform envelope B(n, k) = sum_m |phi_m(k)| |phi_m(n)| dominates
|psi_t(n)| for every t at once; E_q = sum_n |n|**q B(n, k)**2 therefore
dominates every moment.  When eigenfunctions decay fast enough
(alpha > 3/2 + q/2), E_q stays bounded as the box grows, which is probed
by a doubling ratio.  The share of E_q carried by boundary sites is the
honesty check on the truncation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .spectra import SpectralData

__all__ = [
    "SourceOutsideInteriorError",
    "WavePacket",
    "MomentSeries",
    "EnvelopeBound",
    "MomentBoundVerdict",
    "evolve",
    "evolve_batch",
    "evolve_packet",
    "moment",
    "moment_series",
    "time_grid",
    "envelope",
    "majorant_defect",
    "moment_bound_verdict",
    "DOUBLING_RATIO_LIMIT",
    "BOUNDARY_SHARE_LIMIT",
]

DOUBLING_RATIO_LIMIT = 1.1
BOUNDARY_SHARE_LIMIT = 0.01


class SourceOutsideInteriorError(ValueError):
    """The release site sits in the untrusted boundary region."""


@dataclass(frozen=True)
class WavePacket:
    """State of a packet released at ``source`` after time ``time``."""

    sites: np.ndarray
    amplitudes: np.ndarray
    time: float
    source: int

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


@dataclass(frozen=True)
class MomentSeries:
    q: float
    source: int
    times: np.ndarray
    values: np.ndarray

    @property
    def running_sup(self) -> float:
        return float(np.max(self.values))


@dataclass(frozen=True)
class EnvelopeBound:
    """Time-uniform majorant B(n, k) and its weighted mass per exponent.

    moments maps q to (E_q, boundary share), where the share is the part
    of E_q carried by sites within the interior window of the box edge.
    """

    source: int
    sites: np.ndarray
    majorant: np.ndarray
    interior_window: int
    moments: dict

    def moment_bound(self, q: float) -> float:
        return self.moments[float(q)][0]

    def boundary_share(self, q: float) -> float:
        return self.moments[float(q)][1]


@dataclass(frozen=True)
class MomentBoundVerdict:
    """Outcome of the decay-implies-bounded-moments probe for one (alpha, q)."""

    alpha: float
    q: float
    source: int
    hypothesis_satisfied: bool
    envelope_moment: float
    boundary_share: float
    doubling_ratio: float | None
    conclusion: str

    @property
    def asserts_bounded(self) -> bool:
        return self.conclusion.startswith("bounded")


def _source_row(sd: SpectralData, source: int) -> int:
    source = int(source)
    if abs(source) > sd.trusted_site_bound:
        raise SourceOutsideInteriorError(
            f"source site {source} lies outside the trusted interior "
            f"|n| <= {sd.trusted_site_bound}")
    return sd.row_of_site(source)


def evolve(sd: SpectralData, source: int, t: float) -> WavePacket:
    """Packet released at ``source`` and evolved for time t."""
    row = _source_row(sd, source)
    weights = sd.eigenvectors[row, :].conj()
    phases = np.exp(-1j * sd.eigenvalues * float(t))
    amps = sd.eigenvectors @ (phases * weights)
    return WavePacket(sites=sd.sites, amplitudes=amps, time=float(t),
                      source=int(source))


def evolve_batch(sd: SpectralData, source: int, times,
                 chunk: int = 1024) -> np.ndarray:
    """Amplitudes at many times, column t -> psi_t, computed in chunks."""
    row = _source_row(sd, source)
    times = np.asarray(times, dtype=float)
    weights = sd.eigenvectors[row, :].conj()
    out = np.empty((sd.dimension, times.size), dtype=complex)
    for s in range(0, times.size, chunk):
        ts = times[s: s + chunk]
        phases = np.exp(-1j * np.outer(sd.eigenvalues, ts))
        out[:, s: s + len(ts)] = sd.eigenvectors @ (phases * weights[:, None])
    return out


def evolve_packet(sd: SpectralData, packet: WavePacket, dt: float) -> WavePacket:
    """Evolve an arbitrary packet by dt through the eigenbasis."""
    coeffs = sd.eigenvectors.conj().T @ packet.amplitudes
    coeffs *= np.exp(-1j * sd.eigenvalues * float(dt))
    amps = sd.eigenvectors @ coeffs
    return WavePacket(sites=packet.sites, amplitudes=amps,
                      time=packet.time + float(dt), source=packet.source)


def moment(packet: WavePacket, q: float) -> float:
    """Position moment sum_n |n|**q |psi(n)|**2; requires q > 0."""
    q = float(q)
    if not q > 0:
        raise ValueError(f"moment exponent must be positive, got {q}")
    w = np.abs(packet.sites.astype(float)) ** q
    return float(np.sum(w * np.abs(packet.amplitudes) ** 2))


def moment_series(sd: SpectralData, source: int, q: float, times,
                  chunk: int = 1024) -> MomentSeries:
    """M_q(t) on a time grid, without materializing all amplitudes."""
    q = float(q)
    if not q > 0:
        raise ValueError(f"moment exponent must be positive, got {q}")
    row = _source_row(sd, source)
    times = np.asarray(times, dtype=float)
    weights = sd.eigenvectors[row, :].conj()
    site_w = np.abs(sd.sites.astype(float)) ** q
    values = np.empty(times.size, dtype=float)
    for s in range(0, times.size, chunk):
        ts = times[s: s + chunk]
        phases = np.exp(-1j * np.outer(sd.eigenvalues, ts))
        amps = sd.eigenvectors @ (phases * weights[:, None])
        values[s: s + len(ts)] = site_w @ (np.abs(amps) ** 2)
    times = times.copy()
    for arr in (times, values):
        arr.flags.writeable = False
    return MomentSeries(q=q, source=int(source), times=times, values=values)


def time_grid(dt: float = 0.05, t_max: float = 1000.0,
              quasi_random: int = 100, far_horizon: float = 1e6) -> np.ndarray:
    """Uniform grid on [0, t_max] plus low-discrepancy far samples.

    The far samples are golden-ratio multiples folded into [0, far_horizon],
    deterministic by construction.
    """
    if dt <= 0 or t_max <= 0:
        raise ValueError("dt and t_max must be positive")
    if quasi_random < 0 or far_horizon < 0:
        raise ValueError("quasi_random and far_horizon must be nonnegative")
    base = np.arange(0.0, t_max + dt / 2, dt)
    ratio = (math.sqrt(5.0) - 1.0) / 2.0
    far = np.array([((i + 1) * ratio) % 1.0 for i in range(quasi_random)])
    return np.unique(np.concatenate([base, far * far_horizon]))


def envelope(sd: SpectralData, source: int, qs=(2.0,)) -> EnvelopeBound:
    """Time-uniform majorant from ``source`` and its weighted masses."""
    row = _source_row(sd, source)
    absvec = np.abs(sd.eigenvectors)
    major = absvec @ absvec[row, :]
    moments = {}
    boundary = np.abs(sd.sites) > sd.trusted_site_bound
    for q in qs:
        q = float(q)
        if not q > 0:
            raise ValueError(f"moment exponent must be positive, got {q}")
        contrib = np.abs(sd.sites.astype(float)) ** q * major ** 2
        total = float(np.sum(contrib))
        share = float(np.sum(contrib[boundary]) / total) if total > 0 else 0.0
        moments[q] = (total, share)
    major.flags.writeable = False
    return EnvelopeBound(source=int(source), sites=sd.sites, majorant=major,
                         interior_window=sd.interior_window, moments=moments)


def majorant_defect(sd: SpectralData, env: EnvelopeBound, times,
                    chunk: int = 1024) -> float:
    """Largest excess of |psi_t(n)| over B(n, k) across sampled times."""
    times = np.asarray(times, dtype=float)
    worst = -math.inf
    for s in range(0, times.size, chunk):
        amps = evolve_batch(sd, env.source, times[s: s + chunk])
        worst = max(worst, float(np.max(np.abs(amps)
                                        - env.majorant[:, None])))
    return worst


def moment_bound_verdict(sd: SpectralData, alpha: float, q: float,
                         source: int = 0,
                         doubled: SpectralData | None = None,
                         ratio_limit: float = DOUBLING_RATIO_LIMIT,
                         share_limit: float = BOUNDARY_SHARE_LIMIT) -> MomentBoundVerdict:
    """Probe whether decay rate alpha forces bounded q-moments here.

    The hypothesis alpha > 3/2 + q/2 is arithmetic.  Boundedness of E_q in
    the infinite-volume limit is probed by the doubling ratio
    E_q(doubled box) / E_q(box) when a doubled decomposition is supplied.
    A boundary share at or above ``share_limit`` makes the verdict
    inconclusive rather than failed.
    """
    alpha = float(alpha)
    q = float(q)
    env = envelope(sd, source, (q,))
    e_q, share = env.moments[q]
    hypothesis = alpha > 1.5 + q / 2.0

    ratio: float | None = None
    if doubled is not None:
        if doubled.half_width <= sd.half_width:
            raise ValueError(
                "doubled decomposition must come from a larger box")
        env2 = envelope(doubled, source, (q,))
        ratio = env2.moments[q][0] / e_q if e_q > 0 else 1.0

    if not hypothesis:
        conclusion = "hypothesis not satisfied: no assertion"
    elif share >= share_limit:
        conclusion = (f"inconclusive: boundary share {share:.3g} "
                      f">= {share_limit:g}")
    elif ratio is None:
        conclusion = "doubling data unavailable"
    elif ratio < ratio_limit:
        conclusion = f"bounded: doubling ratio {ratio:.6g} < {ratio_limit:g}"
    else:
        conclusion = (f"doubling ratio {ratio:.6g} >= {ratio_limit:g}: "
                      "growth not excluded")

    return MomentBoundVerdict(alpha=alpha, q=q, source=int(source),
                              hypothesis_satisfied=hypothesis,
                              envelope_moment=e_q, boundary_share=share,
                              doubling_ratio=ratio, conclusion=conclusion)
