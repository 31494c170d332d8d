"""Hopping kernels for translation-invariant lattice operators.

A kernel is the coefficient sequence a(m) of a long-range hopping term
(T u)(n) = sum_m a(n - m) u(m) on the integer lattice.  Two structural
constraints make every operator assembled from a kernel Hermitian with a
clean diagonal:

    a(0) = 0            (no hidden on-site term)
    a(-m) = conj(a(m))  (Hermitian symmetry)

Kernels are either finite support (coefficients stored explicitly) or
power law (generated from the rule a(m) = |m|**-exponent, with a numeric
truncation radius attached when the kernel is materialized on a box).

Weighted norms sum |a(m)| * |m|**weight; for power-law kernels the result
carries an analytic bound on the mass dropped beyond the cutoff.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

__all__ = [
    "KernelError",
    "HoppingKernel",
    "WeightedNorm",
    "build_kernel",
    "nearest_neighbor",
    "power_law",
    "finite_support",
    "custom_kernel",
    "weighted_norm",
]


class KernelError(ValueError):
    """A kernel definition violates the symmetry or family contract."""


FAMILIES = ("nearest_neighbor", "power_law", "finite_support", "custom")


@dataclass(frozen=True)
class HoppingKernel:
    """Hermitian-symmetric hopping coefficients a(m).

    ``entries`` holds the nonzero coefficients of a finite-support kernel,
    both halves, sorted by offset.  A power-law kernel stores no entries;
    its coefficients come from the rule a(m) = |m|**-exponent, and
    ``cutoff`` is the truncation radius attached at assembly time.
    """

    family: str
    entries: tuple[tuple[int, complex], ...] = ()
    exponent: float | None = None
    cutoff: int | None = None

    @property
    def infinite_support(self) -> bool:
        return self.family == "power_law"

    @property
    def support_radius(self) -> int | None:
        """Largest |m| with a(m) != 0; None for rule-generated kernels."""
        if self.infinite_support:
            return None
        if not self.entries:
            return 0
        return max(abs(m) for m, _ in self.entries)

    @property
    def is_real(self) -> bool:
        return all(v.imag == 0.0 for _, v in self.entries)

    @property
    def is_zero(self) -> bool:
        return not self.infinite_support and not self.entries

    def amplitude(self, m: int) -> complex:
        """Coefficient a(m) of the untruncated kernel."""
        if m == 0:
            return 0j
        if self.infinite_support:
            return complex(abs(m) ** -self.exponent)
        for off, val in self.entries:
            if off == m:
                return val
        return 0j

    def amplitudes(self, offsets) -> np.ndarray:
        """Vectorized a(m) over an integer offset array."""
        offs = np.asarray(offsets)
        if self.infinite_support:
            out = np.zeros(offs.shape, dtype=complex)
            nz = offs != 0
            out[nz] = np.abs(offs[nz]).astype(float) ** -self.exponent
            return out
        table = dict(self.entries)
        return np.array([table.get(int(m), 0j) for m in offs.ravel()],
                        dtype=complex).reshape(offs.shape)

    def positive_offsets(self, radius: int) -> np.ndarray:
        """Offsets m with 0 < m <= radius and a(m) != 0, ascending."""
        if self.infinite_support:
            return np.arange(1, radius + 1)
        return np.array(sorted(m for m, _ in self.entries if 0 < m <= radius),
                        dtype=int)

    def coefficients(self, radius: int | None = None) -> dict[int, complex]:
        """Materialized nonzero coefficients with |m| <= radius."""
        if radius is None:
            if self.infinite_support:
                if self.cutoff is None:
                    raise KernelError(
                        "power-law kernel needs a radius (or attached cutoff) "
                        "to materialize coefficients")
                radius = self.cutoff
            else:
                radius = self.support_radius
        out: dict[int, complex] = {}
        for m in range(1, radius + 1):
            a = self.amplitude(m)
            if a != 0:
                out[m] = a
                out[-m] = a.conjugate()
        return out

    def with_cutoff(self, radius: int) -> "HoppingKernel":
        """Attach a truncation radius (meaningful for power-law kernels)."""
        if radius < 1:
            raise KernelError("cutoff must be a positive integer")
        if not self.infinite_support:
            return self
        return replace(self, cutoff=int(radius))

    def max_abs(self, radius: int | None = None) -> float:
        if self.infinite_support:
            return 1.0  # |a(1)| dominates for any exponent > 1
        if not self.entries:
            return 0.0
        return max(abs(v) for m, v in self.entries
                   if radius is None or abs(m) <= radius)

    def describe(self) -> dict:
        """Round-trippable record for manifests, dump headers, and configs."""
        out: dict = {"family": self.family}
        if self.family == "power_law":
            out["exponent"] = float(self.exponent)
            if self.cutoff is not None:
                out["cutoff"] = int(self.cutoff)
        elif self.family == "nearest_neighbor":
            t = self.amplitude(1)
            out["amplitude"] = {"re": t.real, "im": t.imag}
        elif self.family == "finite_support":
            radius = self.support_radius
            out["half"] = [{"re": self.amplitude(m).real,
                            "im": self.amplitude(m).imag}
                           for m in range(1, radius + 1)]
        else:
            out["coefficients"] = {
                str(m): {"re": v.real, "im": v.imag} for m, v in self.entries}
        return out


@dataclass(frozen=True)
class WeightedNorm:
    """Partial weighted sum of a kernel plus a bound on the dropped tail."""

    weight: float
    cutoff: int
    partial_sum: float
    tail_bound: float  # 0 for finite kernels; inf when the tail diverges

    @property
    def upper_bound(self) -> float:
        return self.partial_sum + self.tail_bound

    @property
    def finite(self) -> bool:
        return math.isfinite(self.tail_bound)


def _as_amplitude(value) -> complex:
    # accept the {"re": x, "im": y} form emitted by describe()
    if isinstance(value, dict):
        return complex(float(value.get("re", 0.0)), float(value.get("im", 0.0)))
    return complex(value)


def _symmetrize(raw: dict[int, complex]) -> tuple[tuple[int, complex], ...]:
    """Validate or complete a coefficient table into a symmetric kernel.

    A table given only on m > 0 is mirrored; a table touching m < 0 must
    already be exactly conjugate-symmetric.
    """
    cleaned = {int(m): _as_amplitude(v) for m, v in raw.items()
               if _as_amplitude(v) != 0}
    if any(m == 0 for m in cleaned):
        raise KernelError("a(0) must vanish; found a nonzero entry at offset 0")
    if all(m > 0 for m in cleaned):
        full = {}
        for m, v in cleaned.items():
            full[m] = v
            full[-m] = v.conjugate()
        cleaned = full
    else:
        for m, v in cleaned.items():
            mirror = cleaned.get(-m)
            if mirror is None or mirror != v.conjugate():
                raise KernelError(
                    f"coefficients violate a(-m) = conj(a(m)) at offset {m}")
    return tuple(sorted(cleaned.items()))


def nearest_neighbor(amplitude: complex = 1.0) -> HoppingKernel:
    """Kernel with a(1) = amplitude, a(-1) = conj(amplitude), rest zero."""
    t = _as_amplitude(amplitude)
    entries = () if t == 0 else ((-1, t.conjugate()), (1, t))
    return HoppingKernel(family="nearest_neighbor", entries=entries)


def power_law(exponent: float, cutoff: int | None = None) -> HoppingKernel:
    """Kernel a(m) = |m|**-exponent; requires exponent > 1 for summability."""
    exponent = float(exponent)
    if not exponent > 1.0:
        raise KernelError(
            f"power-law exponent must exceed 1, got {exponent}")
    if cutoff is not None and cutoff < 1:
        raise KernelError("cutoff must be a positive integer")
    return HoppingKernel(family="power_law", exponent=exponent,
                         cutoff=None if cutoff is None else int(cutoff))


def finite_support(half) -> HoppingKernel:
    """Kernel from the list [a(1), a(2), ...]; negative side is mirrored."""
    raw = {m + 1: _as_amplitude(v) for m, v in enumerate(half)}
    return HoppingKernel(family="finite_support", entries=_symmetrize(raw))


def custom_kernel(coefficients) -> HoppingKernel:
    """Kernel from an explicit {offset: amplitude} table.

    An empty table is the zero kernel (pure multiplication operator).
    Tables touching negative offsets must be exactly conjugate-symmetric.
    """
    return HoppingKernel(family="custom",
                         entries=_symmetrize(dict(coefficients)))


_BUILDERS = {
    "nearest_neighbor": nearest_neighbor,
    "power_law": power_law,
    "finite_support": finite_support,
    "custom": custom_kernel,
}


def build_kernel(family: str, **params) -> HoppingKernel:
    """Dispatch to a kernel family by name.

    Families and parameters:
      nearest_neighbor(amplitude=1.0)
      power_law(exponent, cutoff=None)
      finite_support(half)
      custom(coefficients)
    """
    if family not in _BUILDERS:
        raise KernelError(
            f"unknown kernel family {family!r}; expected one of {FAMILIES}")
    try:
        return _BUILDERS[family](**params)
    except TypeError as exc:
        raise KernelError(f"bad parameters for family {family!r}: {exc}") from exc


def weighted_norm(kernel: HoppingKernel, weight: float, cutoff: int) -> WeightedNorm:
    """Sum |a(m)| * |m|**weight over 0 < |m| <= cutoff, with tail bound.

    For a power-law kernel the tail bound is the integral majorant
    2 * cutoff**(weight - exponent + 1) / (exponent - weight - 1) of the
    dropped mass, infinite when weight >= exponent - 1.  Finite kernels
    must be fully covered by the cutoff and have zero tail.
    """
    weight = float(weight)
    if weight < 0:
        raise ValueError(f"weight must be nonnegative, got {weight}")
    cutoff = int(cutoff)
    if cutoff < 1:
        raise ValueError(f"cutoff must be a positive integer, got {cutoff}")

    if kernel.infinite_support:
        p = kernel.exponent
        partial = 0.0
        # chunked so very large cutoffs stay in bounded memory
        step = 1 << 20
        for start in range(1, cutoff + 1, step):
            m = np.arange(start, min(start + step, cutoff + 1), dtype=float)
            partial += float(np.sum(m ** (weight - p)))
        partial *= 2.0
        if weight < p - 1.0:
            s = weight - p
            tail = 2.0 * cutoff ** (s + 1.0) / (-s - 1.0)
        else:
            tail = math.inf
        return WeightedNorm(weight, cutoff, partial, tail)

    radius = kernel.support_radius
    if cutoff < radius:
        raise ValueError(
            f"cutoff {cutoff} does not cover the kernel support radius {radius}")
    partial = sum(abs(v) * abs(m) ** weight for m, v in kernel.entries)
    return WeightedNorm(weight, cutoff, float(partial), 0.0)
