"""Reciprocity analysis of 2x2 potentials.

A set of potentials ``V_l`` admits a reciprocity operator ``K = U J`` when one
unitary ``U`` satisfies ``V_l = U V_l^T U^-1`` for every ``l``.  Transposition
reflects the real and imaginary Poincare vectors through the sigma_1-sigma_3
plane, so the question reduces to whether all of those vectors lie in one
plane of R^3; the rotation taking the reflected plane back onto that plane
gives ``U``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .pauli2 import (
    AntiunitaryOp,
    AxisAngleUnitary,
    PauliForm,
    canonical_axis,
    commutator,
    conjugate_by,
    dagger,
    decompose,
    normalize_angle,
    transpose_pauli,
)

DEFAULT_TOL = 1e-8
DROP_TOL = 1e-12
COMMUTE_TOL = 1e-10

E2 = np.array([0.0, 1.0, 0.0])
_FLOOR = 1e-300


class ReciprocityInconsistencyError(RuntimeError):
    """A constructed reciprocity unitary failed its own residual check."""


class PreconditionError(ValueError):
    pass


class VerdictClass(str, enum.Enum):
    SELF_TRANSPOSE = "self_transpose"
    RECIPROCAL = "reciprocal"
    MAGNITUDE_RECIPROCAL_ONLY_CANDIDATE = "magnitude_reciprocal_only_candidate"
    NONRECIPROCAL = "nonreciprocal"


@dataclass(frozen=True, eq=False)
class PlaneReport:
    """Result of the common-plane test.

    ``normal`` is always a unit vector.  For ``rank < 2`` it is not unique and
    holds the canonical completion: the sigma_1-sigma_3 plane for an empty
    set or a line inside that plane, otherwise the plane through the line and
    the axis picked by :func:`line_axis`.
    """

    exists: bool
    normal: np.ndarray
    residual: float
    rank: int
    singular_values: np.ndarray


@dataclass(frozen=True, eq=False)
class ReciprocityVerdict:
    kind: VerdictClass
    unitary: Optional[AxisAngleUnitary]
    symmetrizer: Optional[AxisAngleUnitary]
    residual: float
    plane: PlaneReport
    phase: Optional[float] = None

    @property
    def exists(self) -> bool:
        return self.unitary is not None


def poincare_pairs(potentials: Sequence[PauliForm], drop_tol: float = DROP_TOL) -> list:
    """Real and imaginary Poincare vectors of every potential.

    Vectors shorter than ``drop_tol`` times the longest one are dropped, so
    a polarization independent set yields an empty list.
    """
    vecs = []
    for p in potentials:
        vecs.append(np.asarray(p.v.real, dtype=float))
        vecs.append(np.asarray(p.v.imag, dtype=float))
    if not vecs:
        return []
    norms = [float(np.linalg.norm(x)) for x in vecs]
    biggest = max(norms)
    if biggest == 0.0:
        return []
    return [x for x, nx in zip(vecs, norms) if nx > drop_tol * biggest]


def line_axis(direction) -> np.ndarray:
    """Rotation axis used when all vectors lie on one line.

    Any axis inside the sigma_1-sigma_3 plane works; the projection of the
    line onto that plane is taken, or sigma_1 when the projection vanishes.
    """
    d = np.asarray(direction, dtype=float)
    proj = np.array([d[0], 0.0, d[2]])
    norm = np.linalg.norm(proj)
    if norm < 1e-12 * max(np.linalg.norm(d), _FLOOR):
        return np.array([1.0, 0.0, 0.0])
    return canonical_axis(proj / norm)


def _unit(x) -> np.ndarray:
    return x / np.linalg.norm(x)


def common_plane(vectors, tol: float = DEFAULT_TOL) -> PlaneReport:
    """Best plane through the origin for a set of 3-vectors.

    The vectors are normalized and the smallest singular direction of the
    stack is taken as the normal.  The plane exists when the smallest
    singular value is below ``tol`` times the largest.
    """
    vecs = [np.asarray(x, dtype=float) for x in vectors]
    vecs = [x for x in vecs if np.linalg.norm(x) > 0.0]
    if not vecs:
        return PlaneReport(True, E2.copy(), 0.0, 0, np.zeros(3))
    X = np.array([_unit(x) for x in vecs])
    _, s, vt = np.linalg.svd(X, full_matrices=True)
    sv = np.zeros(3)
    sv[: len(s)] = s
    thresh = tol * (sv[0] + _FLOOR)
    rank = int(np.sum(sv > thresh))
    exists = sv[2] <= thresh
    if rank >= 2:
        normal = canonical_axis(vt[2])
    else:
        line = canonical_axis(vt[0])
        if abs(line[1]) <= tol:
            normal = E2.copy()
        else:
            normal = canonical_axis(_unit(np.cross(line_axis(line), line)))
    residual = float(np.max(np.abs(X @ normal)))
    return PlaneReport(bool(exists), normal, residual, rank, sv)


def check_condition(V: PauliForm, U: AxisAngleUnitary) -> float:
    """Frobenius norm of ``V - U V^T U^-1``."""
    return (V - conjugate_by(U.pauli, transpose_pauli(V))).norm()


def is_phase_self_transpose(V: PauliForm, tol: float = DEFAULT_TOL) -> Optional[float]:
    """Phase ``d`` with ``V_12 = e^{i d} V_21``, or None when there is none."""
    M = V.matrix
    a, b = M[0, 1], M[1, 0]
    ref = max(V.norm(), _FLOOR)
    if abs(a) <= tol * ref and abs(b) <= tol * ref:
        return 0.0
    if abs(abs(a) - abs(b)) > tol * ref:
        return None
    return normalize_angle(np.angle(a) - np.angle(b))


def common_phase(potentials: Sequence[PauliForm], tol: float = DEFAULT_TOL) -> Optional[float]:
    """A single phase making every potential phase self-transpose, if any."""
    phases = []
    for V in potentials:
        M = V.matrix
        ref = max(V.norm(), _FLOOR)
        if abs(M[0, 1]) <= tol * ref and abs(M[1, 0]) <= tol * ref:
            continue
        d = is_phase_self_transpose(V, tol)
        if d is None:
            return None
        phases.append(d)
    if not phases:
        return 0.0
    first = phases[0]
    for d in phases[1:]:
        gap = abs(math.remainder(d - first, 2.0 * math.pi))
        if gap > math.sqrt(tol):
            return None
    return first


def is_univectorial(V: PauliForm, tol: float = DEFAULT_TOL):
    """Split ``V = v0 s0 + c b.sigma`` with real unit ``b``.

    Returns ``(v0, c, b)`` or None when Re v and Im v are not parallel.
    """
    re, im = V.v.real, V.v.imag
    scale = float(np.dot(re, re) + np.dot(im, im))
    if scale == 0.0:
        return V.v0, 0j, np.array([0.0, 0.0, 1.0])
    if np.linalg.norm(np.cross(re, im)) > tol * scale:
        return None
    dominant = re if np.dot(re, re) >= np.dot(im, im) else im
    b = canonical_axis(_unit(dominant))
    c = complex(np.dot(V.v, b))
    return V.v0, c, b


def _construct(plane: PlaneReport, unit_vectors: np.ndarray):
    """Axis and half angle of the rotation for a non-self-transpose plane."""
    if plane.rank >= 2:
        m = plane.normal
        cross = np.cross(m, E2)
        if np.linalg.norm(cross) < 1e-12:
            return None
        n = canonical_axis(_unit(cross))
    else:
        _, _, vt = np.linalg.svd(unit_vectors)
        line = vt[0]
        n = line_axis(line)
        m = _unit(np.cross(n, line))
    t = np.cross(E2, n)
    w = np.cross(m, n)
    theta = math.atan2(float(np.dot(w, E2)), float(np.dot(w, t)))
    # w and -w both lie in the plane; pick theta in [0, pi)
    if theta < 0.0:
        theta += math.pi
    if theta >= math.pi:
        theta -= math.pi
    return n, theta


def find_reciprocity_unitary(potentials: Sequence[PauliForm], tol: float = DEFAULT_TOL) -> ReciprocityVerdict:
    """Decide joint reciprocity of a potential set and construct ``U``.

    ``symmetrizer`` is the unitary bringing every potential to
    self-transpose form.  Raises :class:`ReciprocityInconsistencyError` if
    the constructed ``U`` does not pass its own residual check.
    """
    potentials = list(potentials)
    vectors = poincare_pairs(potentials)
    plane = common_plane(vectors, tol)
    if not plane.exists:
        return ReciprocityVerdict(VerdictClass.NONRECIPROCAL, None, None, plane.residual, plane)

    ident = AxisAngleUnitary.identity()
    unit_vectors = np.array([_unit(x) for x in vectors]) if vectors else np.zeros((0, 3))
    if len(vectors) == 0 or np.max(np.abs(unit_vectors[:, 1])) <= tol:
        U = sym = ident
    else:
        built = _construct(plane, unit_vectors)
        if built is None:
            U = sym = ident
        else:
            n, theta = built
            U = AxisAngleUnitary(0.0, 2.0 * theta, n)
            sym = AxisAngleUnitary(0.0, -theta, n)

    residual = max((check_condition(V, U) for V in potentials), default=0.0)
    scale = max((math.sqrt(2.0) * float(np.linalg.norm(V.v)) for V in potentials), default=0.0)
    limit = (16.0 * math.sqrt(max(len(vectors), 1)) * tol + 1e-12) * scale
    if residual > limit:
        raise ReciprocityInconsistencyError(
            f"constructed U leaves residual {residual:.3e} above {limit:.3e}"
        )

    phase = common_phase(potentials, tol)
    if U is ident:
        kind = VerdictClass.SELF_TRANSPOSE
    elif phase is not None:
        kind = VerdictClass.MAGNITUDE_RECIPROCAL_ONLY_CANDIDATE
    else:
        kind = VerdictClass.RECIPROCAL
    return ReciprocityVerdict(kind, U, sym, residual, plane, phase)


def reciprocity_decompose(V: PauliForm, K: AntiunitaryOp):
    """Split ``V`` into reciprocity preserving and violating parts.

    ``V_pm = (V +- K^-1 V^dagger K) / 2``; requires ``K^2`` to commute with
    ``V``.
    """
    K2 = decompose(K.squared())
    ref = max(V.norm(), _FLOOR)
    if commutator(K2, V).norm() > COMMUTE_TOL * ref:
        raise PreconditionError("K^2 does not commute with V; the split is undefined")
    W = K.inverse_adjoint_action(dagger(V))
    return 0.5 * (V + W), 0.5 * (V - W)


def time_reversal_partner(V: PauliForm) -> PauliForm:
    """Partner under ``K_T = -i sigma_2 J``: ``(v0, v) -> (v0, -v)``."""
    return PauliForm(V.v0, -V.v)


def commute_criterion(V1: PauliForm, V2: PauliForm, tol: float = DEFAULT_TOL) -> bool:
    """True iff ``V1`` and ``V2`` commute, tested on Poincare vectors."""
    a1, b1 = V1.v.real, V1.v.imag
    a2, b2 = V2.v.real, V2.v.imag
    real_part = np.cross(a1, a2) - np.cross(b1, b2)
    imag_part = np.cross(a1, b2) + np.cross(b1, a2)
    scale = float(np.linalg.norm(V1.v) * np.linalg.norm(V2.v))
    limit = tol * scale
    return bool(np.linalg.norm(real_part) <= limit and np.linalg.norm(imag_part) <= limit)
