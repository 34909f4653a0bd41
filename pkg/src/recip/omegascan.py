"""Omega-scan symmetry test for laterally structured samples.

A rocking scan is symmetric about the specular position when rotating the
sample by pi about its normal ``m``, combined with a reciprocity operation,
maps the potential onto itself.  Region by region, with ``r'`` the partner
of ``r`` under the half turn:

    v0(r') = v0(r)
    O(m, pi) v(r') = O_U P13 v(r)    (real and imaginary parts separately)
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.spatial.transform import Rotation as SciRotation

from .pauli2 import AxisAngleUnitary, PauliForm, axis_angle_from_rotation, rotation_matrix

DEFAULT_TOL = 1e-8
POSITION_TOL = 1e-9

_P13 = np.diag([1.0, -1.0, 1.0])


class GeometryNotClosedError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Region:
    label: str
    centroid: np.ndarray
    potential: PauliForm

    def __post_init__(self):
        object.__setattr__(self, "centroid", np.array(self.centroid, dtype=float).reshape(3))


@dataclass(frozen=True, eq=False)
class LateralSample:
    regions: tuple
    normal: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 1.0]))

    def __post_init__(self):
        object.__setattr__(self, "regions", tuple(self.regions))
        m = np.array(self.normal, dtype=float).reshape(3)
        norm = np.linalg.norm(m)
        if norm == 0.0 or not np.isfinite(norm):
            raise ValueError("sample normal must be a nonzero finite vector")
        object.__setattr__(self, "normal", m / norm)
        if not self.regions:
            raise ValueError("sample needs at least one region")

    @property
    def half_turn(self) -> np.ndarray:
        return rotation_matrix(self.normal, math.pi)

    def pairing(self) -> list:
        """Index of each region's partner under the half turn about ``normal``."""
        centres = np.array([r.centroid for r in self.regions])
        extent = max(float(np.max(np.linalg.norm(centres, axis=1))), 1.0)
        images = centres @ self.half_turn.T
        partners = []
        for i, img in enumerate(images):
            dist = np.linalg.norm(centres - img, axis=1)
            j = int(np.argmin(dist))
            if dist[j] > POSITION_TOL * extent:
                raise GeometryNotClosedError(
                    f"region {self.regions[i].label!r} has no partner under the half turn"
                )
            partners.append(j)
        return partners


@dataclass(frozen=True)
class SymmetryReport:
    passed: bool
    residual: float
    scalar_residual: float
    vector_residual: float
    tol: float


@dataclass(frozen=True)
class NormMismatch:
    """Certificate that no rotation can satisfy the vector condition."""

    region: str
    partner: str
    part: str
    norm: float
    partner_norm: float


def _scale(sample: LateralSample) -> float:
    s = max(max(abs(r.potential.v0), float(np.linalg.norm(r.potential.v))) for r in sample.regions)
    return max(s, 1.0)


def check_symmetry(sample: LateralSample, U: AxisAngleUnitary, tol: float = DEFAULT_TOL) -> SymmetryReport:
    """Residuals of both conditions for every region pair.

    Residuals are relative to the largest potential coefficient (floored
    at 1).
    """
    partners = sample.pairing()
    O_m = sample.half_turn
    O_U = U.rotation.matrix
    scale = _scale(sample)
    scalar_res = vector_res = 0.0
    for region, j in zip(sample.regions, partners):
        v, w = region.potential, sample.regions[j].potential
        scalar_res = max(scalar_res, abs(w.v0 - v.v0) / scale)
        for part in (np.real, np.imag):
            gap = O_m @ part(w.v) - O_U @ (_P13 @ part(v.v))
            vector_res = max(vector_res, float(np.linalg.norm(gap)) / scale)
    residual = max(scalar_res, vector_res)
    return SymmetryReport(residual <= tol, residual, scalar_res, vector_res, tol)


def norm_mismatch(sample: LateralSample, tol: float = DEFAULT_TOL) -> Optional[NormMismatch]:
    """First region pair whose Poincare vectors differ in length, if any."""
    partners = sample.pairing()
    scale = _scale(sample)
    for region, j in zip(sample.regions, partners):
        partner = sample.regions[j]
        for name, part in (("real", np.real), ("imag", np.imag)):
            a = float(np.linalg.norm(part(region.potential.v)))
            b = float(np.linalg.norm(part(partner.potential.v)))
            if abs(a - b) > tol * scale:
                return NormMismatch(region.label, partner.label, name, a, b)
    return None


def find_symmetry_unitary(sample: LateralSample, tol: float = DEFAULT_TOL) -> Optional[AxisAngleUnitary]:
    """Unitary ``U`` satisfying the omega-scan conditions, or None.

    The rotation ``O_U`` is the least-squares alignment of the reflected
    vectors ``P13 v(r)`` onto ``O(m, pi) v(r')``; the candidate is returned
    only if it passes :func:`check_symmetry`.
    """
    partners = sample.pairing()
    if norm_mismatch(sample, tol) is not None:
        return None
    O_m = sample.half_turn
    source, target = [], []
    for region, j in zip(sample.regions, partners):
        v, w = region.potential.v, sample.regions[j].potential.v
        for part in (np.real, np.imag):
            source.append(_P13 @ part(v))
            target.append(O_m @ part(w))
    source, target = np.array(source), np.array(target)
    if np.max(np.linalg.norm(source, axis=1)) == 0.0:
        U = AxisAngleUnitary.identity()
    else:
        with warnings.catch_warnings():
            # degenerate (collinear) sets leave the fit non-unique; any optimum will do
            warnings.simplefilter("ignore", UserWarning)
            rot, _ = SciRotation.align_vectors(target, source)
        U = axis_angle_from_rotation(rot.as_matrix())
    return U if check_symmetry(sample, U, tol).passed else None
