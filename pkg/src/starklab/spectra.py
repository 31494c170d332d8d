"""Dense diagonalization with quality gates, ladder labels, and dumps.

Eigenpairs come from the LAPACK dense Hermitian solver.  Every
decomposition is gated on two invariants before it is returned:

    ||H phi - lambda phi||_2 <= residual_tol * max(1, spectral radius)
    max |<phi_i, phi_j> - delta_ij| <= orthonormality_tol

Eigenvalues are labeled by the ladder convention: index 0 goes to the
smallest nonnegative eigenvalue and consecutive integers continue in both
directions in ascending order.  Each eigenvector also carries its
localization center, the site of maximal modulus (ties broken toward the
smaller site).  Modes whose center lies within W of the box edge sit in
the untrusted boundary region; the interior mask excludes them.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, replace

import numpy as np

from ._format import write_json
from .kernels import weighted_norm
from .operators import TruncatedOperator

__all__ = [
    "ConvergenceFailureError",
    "SpectralData",
    "RESIDUAL_TOL",
    "ORTHONORMALITY_TOL",
    "DEGENERACY_GAP",
    "diagonalize",
    "ladder_anchor",
    "detect_centers",
    "assign_ladder_indices",
    "localization_centers",
    "default_interior_window",
    "save_spectral",
    "load_spectral",
]

RESIDUAL_TOL = 1e-10
ORTHONORMALITY_TOL = 1e-10
DEGENERACY_GAP = 1e-12

_FORMAT_NAME = "starklab-spectrum"
_FORMAT_VERSION = 1


class ConvergenceFailureError(RuntimeError):
    """The eigensolver failed or missed the accuracy gates."""


@dataclass(frozen=True)
class SpectralData:
    """Eigenpairs of a truncated operator with labels and trust metadata.

    Eigenvalues ascend; eigenvector k is the column eigenvectors[:, k].
    anchor_position is the ascending position carrying ladder index 0, so
    the ladder index of position p is p - anchor_position.
    """

    half_width: int
    sites: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    residuals: np.ndarray
    orthonormality_defect: float
    anchor_position: int
    anchor_fallback: bool
    centers: np.ndarray
    interior_window: int
    interior_mask: np.ndarray
    degenerate_positions: tuple[int, ...]
    provenance: dict

    @property
    def dimension(self) -> int:
        return len(self.eigenvalues)

    @property
    def spectral_radius(self) -> float:
        return float(max(abs(self.eigenvalues[0]), abs(self.eigenvalues[-1])))

    @property
    def ladder_indices(self) -> np.ndarray:
        return np.arange(self.dimension) - self.anchor_position

    def position_of(self, index: int) -> int:
        p = int(index) + self.anchor_position
        if not 0 <= p < self.dimension:
            raise IndexError(f"ladder index {index} outside the spectrum")
        return p

    def eigenvalue_of(self, index: int) -> float:
        return float(self.eigenvalues[self.position_of(index)])

    def vector_of(self, index: int) -> np.ndarray:
        return self.eigenvectors[:, self.position_of(index)]

    def row_of_site(self, n: int) -> int:
        if abs(int(n)) > self.half_width:
            raise IndexError(
                f"site {n} outside box of half-width {self.half_width}")
        return int(n) + self.half_width

    @property
    def trusted_site_bound(self) -> int:
        """Sites with |n| <= this bound are in the trusted interior."""
        return self.half_width - self.interior_window

    def is_degenerate_position(self, p: int) -> bool:
        """Whether position p belongs to a flagged near-degenerate pair."""
        return p in self.degenerate_positions or (p - 1) in self.degenerate_positions

    def center_offset_sup(self) -> int:
        """Empirical sup of |center - ladder index| over interior modes."""
        mask = self.interior_mask
        if not np.any(mask):
            return 0
        return int(np.max(np.abs(self.centers[mask]
                                 - self.ladder_indices[mask])))


ANCHOR_TOLERANCE = 1e-8  # below the unit level spacing, above solver noise


def ladder_anchor(eigenvalues: np.ndarray,
                  tol: float = ANCHOR_TOLERANCE) -> tuple[int, bool]:
    """Position of the smallest nonnegative eigenvalue, with fallback flag.

    Nonnegative is taken with a small tolerance: a zero eigenvalue that the
    solver returns as -1e-16 must still anchor the ladder, or the whole
    labeling shifts by one on floating-point noise.  For an all-negative
    spectrum the anchor sits one past the last position (every label is
    negative); for an all-positive spectrum it is position 0.  Both
    one-sided cases are flagged.
    """
    lam = np.asarray(eigenvalues)
    pos = int(np.searchsorted(lam, -float(tol), side="left"))
    fallback = pos == len(lam) or \
        (pos == 0 and (len(lam) == 0 or lam[0] > tol))
    return pos, fallback


def detect_centers(eigenvectors: np.ndarray, sites: np.ndarray) -> np.ndarray:
    """Site of maximal modulus per column; ties go to the smaller site."""
    rows = np.argmax(np.abs(eigenvectors), axis=0)  # argmax takes the first max
    return np.asarray(sites)[rows]


def default_interior_window(half_width: int, hopping_norm: float,
                            perturbation_sup: float) -> int:
    """W = max(ceil(N/4), ceil(10 * (|a|_0 + |b|_inf + 1)))."""
    return max(math.ceil(half_width / 4),
               math.ceil(10.0 * (hopping_norm + perturbation_sup + 1.0)))


def diagonalize(op: TruncatedOperator,
                interior_window: int | None = None,
                residual_tol: float = RESIDUAL_TOL,
                orthonormality_tol: float = ORTHONORMALITY_TOL,
                degeneracy_gap: float = DEGENERACY_GAP) -> SpectralData:
    """Full eigendecomposition of a truncated operator, quality-gated.

    Raises ConvergenceFailureError if LAPACK does not converge or the
    residual/orthonormality invariants fail at the given tolerances.
    """
    H = op.matrix
    try:
        lam, vec = np.linalg.eigh(H)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailureError(
            f"eigensolver failed on half_width={op.half_width} "
            f"({op.potential.family} potential): {exc}") from exc

    resid = np.linalg.norm(H @ vec - vec * lam[np.newaxis, :], axis=0)
    radius = float(max(abs(lam[0]), abs(lam[-1]))) if len(lam) else 0.0
    resid_limit = residual_tol * max(1.0, radius)
    if np.max(resid) > resid_limit:
        raise ConvergenceFailureError(
            f"max eigenpair residual {np.max(resid):.3e} exceeds "
            f"{resid_limit:.3e} (half_width={op.half_width})")

    gram = vec.conj().T @ vec
    np.fill_diagonal(gram, gram.diagonal() - 1.0)
    defect = float(np.max(np.abs(gram)))
    if defect > orthonormality_tol:
        raise ConvergenceFailureError(
            f"orthonormality defect {defect:.3e} exceeds {orthonormality_tol:.3e} "
            f"(half_width={op.half_width})")

    anchor, fallback = ladder_anchor(lam)
    centers = detect_centers(vec, op.sites)

    if interior_window is None:
        box_cutoff = op.kernel.cutoff or max(op.kernel.support_radius or 0, 1)
        a0 = weighted_norm(op.kernel, 0.0, max(box_cutoff, 1)).upper_bound
        interior_window = default_interior_window(
            op.half_width, a0, op.perturbation_sup)
    interior_window = int(interior_window)
    mask = np.abs(centers) <= op.half_width - interior_window

    gaps = np.diff(lam)
    degenerate = tuple(int(p) for p in np.nonzero(gaps < degeneracy_gap)[0])

    provenance = {
        "kernel": op.kernel.describe(),
        "potential": op.potential.describe(),
        "half_width": int(op.half_width),
        "perturbation_sup": float(op.perturbation_sup),
        "matrix_dtype": str(H.dtype),
        "residual_tol": float(residual_tol),
        "orthonormality_tol": float(orthonormality_tol),
        "degeneracy_gap": float(degeneracy_gap),
    }

    for arr in (lam, vec, resid, centers, mask):
        arr.flags.writeable = False
    return SpectralData(
        half_width=op.half_width, sites=op.sites, eigenvalues=lam,
        eigenvectors=vec, residuals=resid, orthonormality_defect=defect,
        anchor_position=anchor, anchor_fallback=fallback, centers=centers,
        interior_window=interior_window, interior_mask=mask,
        degenerate_positions=degenerate, provenance=provenance)


def assign_ladder_indices(sd: SpectralData) -> SpectralData:
    """Recompute the ladder anchor from the stored eigenvalues."""
    anchor, fallback = ladder_anchor(sd.eigenvalues)
    return replace(sd, anchor_position=anchor, anchor_fallback=fallback)


def localization_centers(sd: SpectralData) -> SpectralData:
    """Recompute centers and the interior mask from the stored vectors."""
    centers = detect_centers(sd.eigenvectors, sd.sites)
    mask = np.abs(centers) <= sd.half_width - sd.interior_window
    centers.flags.writeable = False
    mask.flags.writeable = False
    return replace(sd, centers=centers, interior_mask=mask)


def save_spectral(sd: SpectralData, base_path: str) -> tuple[str, str]:
    """Write {base}.json (header) and {base}.bin (payload).

    Payload layout, little-endian, in order: eigenvalues (d float64),
    residuals (d float64), eigenvectors (d*d complex128, row-major, row =
    site row, column = ascending mode).
    """
    json_path = f"{base_path}.json"
    bin_path = f"{base_path}.bin"
    d = sd.dimension
    header = {
        "format": _FORMAT_NAME,
        "format_version": _FORMAT_VERSION,
        "half_width": sd.half_width,
        "dimension": d,
        "interior_window": sd.interior_window,
        "anchor_position": sd.anchor_position,
        "anchor_fallback": sd.anchor_fallback,
        "orthonormality_defect": sd.orthonormality_defect,
        "max_residual": float(np.max(sd.residuals)) if d else 0.0,
        "degenerate_positions": list(sd.degenerate_positions),
        "center_offset_sup": sd.center_offset_sup(),
        "provenance": sd.provenance,
        "payload": {
            "file": os.path.basename(bin_path),
            "layout": [
                f"eigenvalues: {d} x float64-le",
                f"residuals: {d} x float64-le",
                f"eigenvectors: {d}x{d} x complex128-le row-major "
                "(row = site, column = mode)",
            ],
            "byte_length": d * 8 * 2 + d * d * 16,
        },
    }
    write_json(json_path, header)
    with open(bin_path, "wb") as fh:
        np.ascontiguousarray(sd.eigenvalues, dtype="<f8").tofile(fh)
        np.ascontiguousarray(sd.residuals, dtype="<f8").tofile(fh)
        np.ascontiguousarray(sd.eigenvectors, dtype="<c16").tofile(fh)
    return json_path, bin_path


def load_spectral(base_path: str) -> SpectralData:
    """Rebuild SpectralData from a save_spectral dump pair."""
    import json

    with open(f"{base_path}.json", "r", encoding="utf-8") as fh:
        header = json.load(fh)
    if header.get("format") != _FORMAT_NAME:
        raise ValueError(f"{base_path}.json is not a spectrum header")
    d = int(header["dimension"])
    half_width = int(header["half_width"])
    with open(f"{base_path}.bin", "rb") as fh:
        lam = np.fromfile(fh, dtype="<f8", count=d)
        resid = np.fromfile(fh, dtype="<f8", count=d)
        vec = np.fromfile(fh, dtype="<c16", count=d * d)
        trailing = fh.read(1)
    if lam.size != d or resid.size != d or vec.size != d * d or trailing:
        raise ValueError(
            f"{base_path}.bin does not match the declared dimension {d}")
    vec = vec.reshape(d, d)

    sites = np.arange(-half_width, half_width + 1)
    centers = detect_centers(vec, sites)
    window = int(header["interior_window"])
    mask = np.abs(centers) <= half_width - window
    prov = header.get("provenance", {})
    gap = float(prov.get("degeneracy_gap", DEGENERACY_GAP))
    degenerate = tuple(int(p) for p in np.nonzero(np.diff(lam) < gap)[0])

    for arr in (lam, resid, vec, sites, centers, mask):
        arr.flags.writeable = False
    return SpectralData(
        half_width=half_width, sites=sites, eigenvalues=lam,
        eigenvectors=vec, residuals=resid,
        orthonormality_defect=float(header["orthonormality_defect"]),
        anchor_position=int(header["anchor_position"]),
        anchor_fallback=bool(header["anchor_fallback"]),
        centers=centers, interior_window=window, interior_mask=mask,
        degenerate_positions=degenerate, provenance=prov)
