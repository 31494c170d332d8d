"""Localization diagnostics: eigenvalue pinning, uniform decay, bootstrap.

Three empirical checks on a diagonalized operator with a uniform linear
field:

* Pinning: every trusted eigenvalue sits within |a|_0 + |b|_inf + 1 of its
  ladder index (Schur bound on the hopping part plus the half-integer
  spacing argument).
* Uniform power decay: sup over interior modes and sites of
  |phi_m(n)| * dist**alpha, measured against the detected localization
  center and, separately, against the ladder index.  Least-squares decay
  exponents per mode are reported as diagnostics only.
* Bootstrap inequality: away from the center the eigen-equation forces

      |phi_m(n)| <= 4*gamma/|m - n| * sum_k |a(k)| |phi_m(n - k)|

  whenever |m - n| > 2*gamma and gamma dominates every pinning deviation.
  Checked with an explicit slack for the hopping mass that falls outside
  the box.

The first and third checks refuse Maryland-family potentials: their
hypotheses name the linear field.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernels import HoppingKernel, weighted_norm
from .operators import PotentialSpec
from .spectra import SpectralData

__all__ = [
    "WrongPotentialFamilyError",
    "NoInteriorModesError",
    "AsymptoticsReport",
    "UniformDecayReport",
    "BootstrapViolation",
    "BootstrapReport",
    "check_eigenvalue_asymptotics",
    "uniform_decay_constants",
    "bootstrap_decay_check",
    "asymptotics_rows",
    "decay_rows",
]


class WrongPotentialFamilyError(ValueError):
    """A linear-field theorem check was pointed at another potential family."""


class NoInteriorModesError(ValueError):
    """The trusted interior of the box is empty at this size and window."""


@dataclass(frozen=True)
class AsymptoticsReport:
    """Pinning of trusted eigenvalues to their ladder indices.

    deviations holds (ladder index, eigenvalue - index), signed;
    max_deviation is the sup of their moduli.  The pass flag is always
    recomputed from the stored fields.
    """

    max_deviation: float
    hopping_norm: float
    perturbation_sup: float
    deviations: tuple[tuple[int, float], ...]
    center_offset_sup: int

    @property
    def bound(self) -> float:
        return self.hopping_norm + self.perturbation_sup + 1.0

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.bound

    @property
    def n_interior(self) -> int:
        return len(self.deviations)


@dataclass(frozen=True)
class UniformDecayReport:
    """Sup of |phi| * dist**alpha over interior modes, per mode and global.

    per_mode entries are (ladder index, sup over sites at distance >= 1
    from the detected center); per_mode_by_index anchors distance at the
    ladder index instead.  fit_exponents are per-mode least-squares decay
    slopes over 2 <= dist <= N/2 (nan when a mode is excluded or has too
    few usable points); they are diagnostics, not bounds.
    """

    alpha: float
    per_mode: tuple[tuple[int, float], ...]
    per_mode_by_index: tuple[tuple[int, float], ...]
    fit_exponents: tuple[tuple[int, float], ...]

    @property
    def sup_constant(self) -> float:
        return max(v for _, v in self.per_mode)

    @property
    def sup_constant_by_index(self) -> float:
        return max(v for _, v in self.per_mode_by_index)

    @property
    def n_modes(self) -> int:
        return len(self.per_mode)


@dataclass(frozen=True)
class BootstrapViolation:
    ladder_index: int
    site: int
    lhs: float
    rhs: float
    slack: float


@dataclass(frozen=True)
class BootstrapReport:
    gamma: float
    base_slack: float
    n_modes: int
    n_checked: int
    violations: tuple[BootstrapViolation, ...]

    @property
    def passed(self) -> bool:
        return not self.violations


def _interior_positions(sd: SpectralData) -> np.ndarray:
    positions = np.nonzero(sd.interior_mask)[0]
    if positions.size == 0:
        raise NoInteriorModesError(
            f"no interior modes: half_width={sd.half_width}, "
            f"window={sd.interior_window}")
    return positions


def check_eigenvalue_asymptotics(sd: SpectralData, kernel: HoppingKernel,
                                 potential: PotentialSpec) -> AsymptoticsReport:
    """Compare trusted eigenvalues against their ladder indices.

    Trusted means ladder index |n| <= half_width - interior_window.  The
    bound is recomputed from the kernel's in-box hopping mass and the
    realized perturbation sup over the box.
    """
    if potential.family != "electric":
        raise WrongPotentialFamilyError(
            "eigenvalue pinning is stated for the linear-field family; "
            f"got {potential.family}")

    box_cutoff = kernel.cutoff if kernel.infinite_support and kernel.cutoff \
        else (sd.dimension if kernel.infinite_support
              else max(kernel.support_radius, 1))
    hopping_norm = weighted_norm(kernel, 0.0, box_cutoff).partial_sum
    b_sup = float(np.max(np.abs(potential.perturbation_values(sd.sites)))) \
        if sd.dimension else 0.0

    bound_idx = sd.half_width - sd.interior_window
    indices = sd.ladder_indices
    trusted = np.abs(indices) <= bound_idx
    if not np.any(trusted):
        raise NoInteriorModesError(
            f"no trusted ladder indices: half_width={sd.half_width}, "
            f"window={sd.interior_window}")
    devs = sd.eigenvalues[trusted] - indices[trusted]
    pairs = tuple((int(n), float(v))
                  for n, v in zip(indices[trusted], devs))
    return AsymptoticsReport(
        max_deviation=float(np.max(np.abs(devs))),
        hopping_norm=float(hopping_norm),
        perturbation_sup=b_sup,
        deviations=pairs,
        center_offset_sup=sd.center_offset_sup())


def uniform_decay_constants(sd: SpectralData, alpha: float,
                            fit_inner: int = 2,
                            fit_outer: int | None = None) -> UniformDecayReport:
    """Measure sup |phi_m(n)| * dist**alpha over interior modes."""
    alpha = float(alpha)
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    positions = _interior_positions(sd)
    if fit_outer is None:
        fit_outer = sd.half_width // 2

    sites = sd.sites.astype(float)
    indices = sd.ladder_indices
    per_mode = []
    per_mode_by_index = []
    fits = []
    for p in positions:
        amp = np.abs(sd.eigenvectors[:, p])
        m = int(indices[p])
        center = float(sd.centers[p])

        dist_c = np.abs(sites - center)
        sel = dist_c >= 1.0
        val_c = float(np.max(amp[sel] * dist_c[sel] ** alpha))

        dist_i = np.abs(sites - m)
        sel_i = dist_i >= 1.0
        val_i = float(np.max(amp[sel_i] * dist_i[sel_i] ** alpha))

        per_mode.append((m, val_c))
        per_mode_by_index.append((m, val_i))

        if sd.is_degenerate_position(int(p)):
            fits.append((m, float("nan")))
            continue
        fit_sel = (dist_c >= fit_inner) & (dist_c <= fit_outer) & (amp > 0.0)
        if np.count_nonzero(fit_sel) < 3:
            fits.append((m, float("nan")))
            continue
        slope = np.polyfit(np.log(dist_c[fit_sel]), np.log(amp[fit_sel]), 1)[0]
        fits.append((m, float(-slope)))

    return UniformDecayReport(alpha=alpha, per_mode=tuple(per_mode),
                              per_mode_by_index=tuple(per_mode_by_index),
                              fit_exponents=tuple(fits))


def bootstrap_decay_check(sd: SpectralData, kernel: HoppingKernel,
                          gamma: float,
                          base_slack: float = 1e-8) -> BootstrapReport:
    """Check the bootstrap inequality on every interior mode.

    gamma must dominate every trusted pinning deviation (caller supplies
    it, typically the pinning bound).  Sites with |m - n| <= 2*gamma are
    out of scope.  The dropped-tail slack at site n is
    (4*gamma/|m - n|) * (out-of-box hopping mass seen from n) * max|phi_m|,
    plus a fixed numerical slack.
    """
    if sd.provenance.get("potential", {}).get("family") == "maryland":
        raise WrongPotentialFamilyError(
            "the bootstrap inequality is stated for the linear-field family")
    gamma = float(gamma)
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    positions = _interior_positions(sd)

    d = sd.dimension
    N = sd.half_width
    reach = 2 * N
    support = kernel.support_radius
    M = reach if support is None else min(reach, max(support, 1))
    offsets = np.arange(-M, M + 1)
    absw = np.abs(kernel.amplitudes(offsets))
    # hopping beyond +-M never reaches the box, but it still counts in the
    # total mass that the dropped-tail slack must account for
    total_cutoff = M if support is None else max(support, 1)
    total_mass = weighted_norm(kernel, 0.0, total_cutoff).upper_bound
    cums = np.concatenate([[0.0], np.cumsum(absw)])  # cums[j] = sum absw[:j]

    sites = sd.sites
    # visible in-box hopping mass from each site, then the dropped remainder
    j1 = np.clip(sites - N + M, 0, 2 * M + 1)
    j2 = np.clip(sites + N + M + 1, 0, 2 * M + 1)
    window_mass = cums[j2] - cums[j1]
    tail_mass = np.maximum(total_mass - window_mass, 0.0)

    indices = sd.ladder_indices
    violations = []
    n_checked = 0
    for p in positions:
        amp = np.abs(sd.eigenvectors[:, p])
        m = int(indices[p])
        dist = np.abs(sites - m).astype(float)
        scope = dist > 2.0 * gamma
        if not np.any(scope):
            continue
        conv = np.convolve(amp, absw)[M: M + d]
        factor = 4.0 * gamma / dist[scope]
        rhs = factor * conv[scope]
        slack = base_slack + factor * tail_mass[scope] * float(np.max(amp))
        lhs = amp[scope]
        n_checked += int(np.count_nonzero(scope))
        bad = lhs > rhs + slack
        for site, l, r, s in zip(sites[scope][bad], lhs[bad], rhs[bad],
                                 slack[bad]):
            violations.append(BootstrapViolation(
                ladder_index=m, site=int(site), lhs=float(l), rhs=float(r),
                slack=float(s)))

    return BootstrapReport(gamma=gamma, base_slack=float(base_slack),
                           n_modes=len(positions), n_checked=n_checked,
                           violations=tuple(violations))


def asymptotics_rows(sd: SpectralData, report: AsymptoticsReport):
    """Per-mode rows (ladder_index, eigenvalue, deviation, center)."""
    rows = []
    for n, dev in report.deviations:
        p = sd.position_of(n)
        rows.append((n, float(sd.eigenvalues[p]), dev, int(sd.centers[p])))
    return rows


def decay_rows(sd: SpectralData, report: UniformDecayReport):
    """Per-mode rows (ladder_index, eigenvalue, center, constants, fit)."""
    fit_by_index = dict(report.fit_exponents)
    rows = []
    for (n, val_c), (_, val_i) in zip(report.per_mode,
                                      report.per_mode_by_index):
        p = sd.position_of(n)
        rows.append((n, float(sd.eigenvalues[p]), int(sd.centers[p]),
                     val_c, val_i, fit_by_index.get(n, float("nan"))))
    return rows
