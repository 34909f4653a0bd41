"""Exact 2x2 complex matrix algebra in the Pauli basis.

Every 2x2 matrix is written as ``M = v0*s0 + v.sigma`` with ``s0`` the
identity and ``sigma = (s1, s2, s3)`` the Pauli matrices.  The complex
3-vector ``v`` is the Poincare vector of ``M``.  Unitaries are handled in
axis-angle form, ``U = exp(i delta) (cos(phi/2) s0 - i sin(phi/2) n.sigma)``,
whose adjoint action on real Poincare vectors is the rotation ``O(n, phi)``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.transform import Rotation as SciRotation

TWO_PI = 2.0 * math.pi

SIGMA0 = np.eye(2, dtype=complex)
SIGMA1 = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA3 = np.array([[1, 0], [0, -1]], dtype=complex)
SIGMA = np.stack([SIGMA1, SIGMA2, SIGMA3])

# below this |det N| the sin z / z and cos z factors come from their series
_SERIES_SWITCH = 1e-8
_UNIT_TOL = 1e-9


def _as_vec3(x, dtype=float) -> np.ndarray:
    arr = np.array(x, dtype=dtype).reshape(3)
    arr.setflags(write=False)
    return arr


def normalize_angle(angle: float) -> float:
    """Map an angle to [0, 2*pi)."""
    a = math.fmod(angle, TWO_PI)
    if a < 0.0:
        a += TWO_PI
    # fmod of values just below a multiple of 2pi may round up to 2pi
    return 0.0 if a >= TWO_PI else a


def canonical_axis(n) -> np.ndarray:
    """Flip ``n`` so that its first non-negligible component is positive."""
    n = np.array(n, dtype=float)
    scale = np.max(np.abs(n))
    # rounding debris below 1e-14 would otherwise decide the sign
    n[np.abs(n) <= 1e-14 * scale] = 0.0
    for comp in n:
        if comp != 0.0:
            return -n if comp < 0 else n
    return n


@dataclass(frozen=True, eq=False)
class PauliForm:
    """A 2x2 complex matrix stored as ``(v0, v)`` in the Pauli basis."""

    v0: complex
    v: np.ndarray = field(default_factory=lambda: np.zeros(3, dtype=complex))

    def __post_init__(self):
        object.__setattr__(self, "v0", complex(self.v0))
        object.__setattr__(self, "v", _as_vec3(self.v, complex))

    @classmethod
    def scalar(cls, c) -> "PauliForm":
        return cls(c, np.zeros(3, dtype=complex))

    @property
    def matrix(self) -> np.ndarray:
        return compose(self)

    def allclose(self, other: "PauliForm", atol: float = 1e-12) -> bool:
        return abs(self.v0 - other.v0) <= atol and bool(
            np.all(np.abs(self.v - other.v) <= atol)
        )

    def norm(self) -> float:
        """Frobenius norm of the represented matrix."""
        return math.sqrt(2.0 * (abs(self.v0) ** 2 + float(np.vdot(self.v, self.v).real)))

    def __add__(self, other: "PauliForm") -> "PauliForm":
        return PauliForm(self.v0 + other.v0, self.v + other.v)

    def __sub__(self, other: "PauliForm") -> "PauliForm":
        return PauliForm(self.v0 - other.v0, self.v - other.v)

    def __neg__(self) -> "PauliForm":
        return PauliForm(-self.v0, -self.v)

    def __mul__(self, c) -> "PauliForm":
        c = complex(c)
        return PauliForm(c * self.v0, c * self.v)

    __rmul__ = __mul__

    def __matmul__(self, other: "PauliForm") -> "PauliForm":
        return mul(self, other)

    def __repr__(self) -> str:
        v = ", ".join(f"{c:.6g}" for c in self.v)
        return f"PauliForm(v0={self.v0:.6g}, v=({v}))"


def decompose(M) -> PauliForm:
    """Pauli coefficients of a 2x2 matrix."""
    M = np.asarray(M, dtype=complex)
    if M.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got shape {M.shape}")
    v0 = 0.5 * (M[0, 0] + M[1, 1])
    v1 = 0.5 * (M[1, 0] + M[0, 1])
    v2 = (M[1, 0] - M[0, 1]) / 2j
    v3 = 0.5 * (M[0, 0] - M[1, 1])
    return PauliForm(v0, (v1, v2, v3))


def compose(p: PauliForm) -> np.ndarray:
    v0 = p.v0
    v1, v2, v3 = p.v
    return np.array(
        [[v0 + v3, v1 - 1j * v2], [v1 + 1j * v2, v0 - v3]], dtype=complex
    )


def transpose_pauli(p: PauliForm) -> PauliForm:
    """Matrix transpose: the sigma_2 coefficient changes sign."""
    v = p.v.copy()
    v[1] = -v[1]
    return PauliForm(p.v0, v)


def dagger(p: PauliForm) -> PauliForm:
    return PauliForm(p.v0.conjugate(), np.conj(p.v))


def conj(p: PauliForm) -> PauliForm:
    """Entrywise complex conjugate of the represented matrix."""
    return transpose_pauli(dagger(p))


def _dot3(a, b):
    # explicit sum keeps every element bit-identical however the batch is sliced
    return a[..., 0] * b[..., 0] + a[..., 1] * b[..., 1] + a[..., 2] * b[..., 2]


def mul_arrays(a0, a, b0, b):
    """Batched product of Pauli coefficient arrays (``a`` has shape (..., 3))."""
    a0 = np.asarray(a0, dtype=complex)
    b0 = np.asarray(b0, dtype=complex)
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    v0 = a0 * b0 + _dot3(a, b)
    v = a0[..., None] * b + b0[..., None] * a + 1j * np.cross(a, b)
    return v0, v


def mul(a: PauliForm, b: PauliForm) -> PauliForm:
    """Product via (a.sigma)(b.sigma) = (a.b) s0 + i (a x b).sigma."""
    return PauliForm(*mul_arrays(a.v0, a.v, b.v0, b.v))


def commutator(a: PauliForm, b: PauliForm) -> PauliForm:
    return PauliForm(0.0, 2j * np.cross(a.v, b.v))


def det(p: PauliForm) -> complex:
    return p.v0 * p.v0 - complex(np.dot(p.v, p.v))


def exp2_arrays(v0, v):
    """Batched closed-form exponential of Pauli coefficient arrays."""
    v0 = np.asarray(v0, dtype=complex)
    v = np.asarray(v, dtype=complex)
    z2 = -_dot3(v, v)  # det N for N = v.sigma
    small = np.abs(z2) < _SERIES_SWITCH
    z = np.sqrt(np.where(small, 1.0, z2))
    c = np.where(small, 1.0 - z2 / 2.0 + z2 * z2 / 24.0, np.cos(z))
    s = np.where(small, 1.0 - z2 / 6.0 + z2 * z2 / 120.0, np.sin(z) / z)
    scale = np.exp(v0)
    return scale * c, (scale * s)[..., None] * v


def exp2(M: PauliForm) -> PauliForm:
    """Closed-form exponential of a 2x2 matrix.

    ``e^M = e^{tr M / 2} (cos z s0 + (sin z / z) N)`` with ``N`` the
    traceless part of ``M`` and ``z**2 = det N``.  Both factors are even in
    ``z`` so the branch of the square root does not matter.
    """
    return PauliForm(*exp2_arrays(M.v0, M.v))


def compose_arrays(v0, v):
    """Batched 2x2 matrices, shape (..., 2, 2), from Pauli coefficients."""
    v0 = np.asarray(v0, dtype=complex)
    v = np.asarray(v, dtype=complex)
    out = np.empty(v0.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = v0 + v[..., 2]
    out[..., 0, 1] = v[..., 0] - 1j * v[..., 1]
    out[..., 1, 0] = v[..., 0] + 1j * v[..., 1]
    out[..., 1, 1] = v0 - v[..., 2]
    return out


def rotate3(n, phi: float, x) -> np.ndarray:
    """Rotate ``x`` about the unit axis ``n`` by ``phi`` (right-handed)."""
    n = np.asarray(n, dtype=float)
    if abs(np.linalg.norm(n) - 1.0) > _UNIT_TOL:
        raise ValueError(f"rotation axis must be a unit vector, got |n|={np.linalg.norm(n)!r}")
    x = np.asarray(x, dtype=float)
    nx = float(np.dot(n, x))
    return nx * n + (x - nx * n) * math.cos(phi) + np.cross(n, x) * math.sin(phi)


def rotation_matrix(n, phi: float) -> np.ndarray:
    """3x3 matrix of ``rotate3(n, phi, .)``."""
    n = np.asarray(n, dtype=float)
    K = np.array([[0, -n[2], n[1]], [n[2], 0, -n[0]], [-n[1], n[0], 0]])
    return np.eye(3) + math.sin(phi) * K + (1.0 - math.cos(phi)) * (K @ K)


@dataclass(frozen=True, eq=False)
class Rotation:
    """SO(3) rotation ``O(n, phi)`` acting on real Poincare vectors."""

    axis: np.ndarray
    angle: float

    def __post_init__(self):
        object.__setattr__(self, "axis", _as_vec3(self.axis))
        object.__setattr__(self, "angle", float(self.angle))

    def apply(self, x) -> np.ndarray:
        return rotate3(self.axis, self.angle, x)

    @property
    def matrix(self) -> np.ndarray:
        return rotation_matrix(self.axis, self.angle)


@dataclass(frozen=True, eq=False)
class AxisAngleUnitary:
    """2x2 unitary ``e^{i delta} (cos(phi/2) s0 - i sin(phi/2) n.sigma)``."""

    delta: float
    phi: float
    n: np.ndarray

    def __post_init__(self):
        n = _as_vec3(self.n)
        if abs(np.linalg.norm(n) - 1.0) > 1e-12:
            raise ValueError(f"axis must be a unit vector, got {n!r}")
        # phi -> phi + 2pi flips the sign of U; keep the matrix fixed via delta
        turns = math.floor(float(self.phi) / TWO_PI)
        phi = float(self.phi) - TWO_PI * turns
        if phi >= TWO_PI:
            phi, turns = 0.0, turns + 1
        delta = float(self.delta) + (math.pi if turns % 2 else 0.0)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "delta", normalize_angle(delta))
        object.__setattr__(self, "phi", max(phi, 0.0))

    @classmethod
    def identity(cls) -> "AxisAngleUnitary":
        return cls(0.0, 0.0, (0.0, 0.0, 1.0))

    @property
    def pauli(self) -> PauliForm:
        return unitary_matrix(self)

    @property
    def matrix(self) -> np.ndarray:
        return compose(unitary_matrix(self))

    @property
    def rotation(self) -> Rotation:
        return rotation_of(self)

    def __repr__(self) -> str:
        n = ", ".join(f"{c:.6g}" for c in self.n)
        return f"AxisAngleUnitary(delta={self.delta:.6g}, phi={self.phi:.6g}, n=({n}))"


def unitary_matrix(u: AxisAngleUnitary) -> PauliForm:
    phase = cmath.exp(1j * u.delta)
    half = 0.5 * u.phi
    return PauliForm(phase * math.cos(half), (-1j * phase * math.sin(half)) * u.n)


def rotation_of(u: AxisAngleUnitary) -> Rotation:
    return Rotation(u.n, u.phi)


def axis_angle_from_matrix(U, tol: float = 1e-10) -> AxisAngleUnitary:
    """Axis-angle form of a 2x2 unitary matrix.

    The axis sign is fixed by requiring its first nonzero component to be
    positive; the ``(n, phi) -> (-n, 2pi - phi)`` swap is absorbed into
    ``delta``.
    """
    U = np.asarray(U, dtype=complex)
    if np.max(np.abs(U @ U.conj().T - SIGMA0)) > tol:
        raise ValueError("matrix is not unitary")
    d = np.linalg.det(U)
    delta = 0.5 * cmath.phase(d)
    p = decompose(U * cmath.exp(-1j * delta))
    # now p = cos(phi/2) s0 - i sin(phi/2) n.sigma with real coefficients
    c = p.v0.real
    s_vec = -p.v.imag
    s = float(np.linalg.norm(s_vec))
    if s < 1e-14:
        # +-identity: fold the sign into the phase
        if c < 0:
            delta += math.pi
        return AxisAngleUnitary(delta, 0.0, (0.0, 0.0, 1.0))
    n = s_vec / s
    phi = 2.0 * math.atan2(s, c)
    cn = canonical_axis(n)
    if np.dot(cn, n) < 0:
        phi = TWO_PI - phi
        delta += math.pi
    return AxisAngleUnitary(delta, phi, cn / np.linalg.norm(cn))


def axis_angle_from_rotation(R) -> AxisAngleUnitary:
    """SU(2) lift (``delta = 0``) of a 3x3 proper rotation matrix."""
    R = np.asarray(R, dtype=float)
    if abs(np.linalg.det(R) - 1.0) > 1e-8 or np.max(np.abs(R @ R.T - np.eye(3))) > 1e-8:
        raise ValueError("matrix is not a proper rotation")
    rotvec = SciRotation.from_matrix(R).as_rotvec()
    phi = float(np.linalg.norm(rotvec))
    if phi < 1e-14:
        return AxisAngleUnitary.identity()
    n = rotvec / phi
    cn = canonical_axis(n)
    if np.dot(cn, n) < 0:
        phi = TWO_PI - phi
    return AxisAngleUnitary(0.0, phi, cn / np.linalg.norm(cn))


def conjugate_by(u: PauliForm, p: PauliForm) -> PauliForm:
    """``U P U^-1`` for a unitary ``U``."""
    return mul(mul(u, p), dagger(u))


@dataclass(frozen=True, eq=False)
class AntiunitaryOp:
    """Antiunitary ``K = U J`` with ``J`` entrywise complex conjugation."""

    u: AxisAngleUnitary = field(default_factory=AxisAngleUnitary.identity)

    @classmethod
    def conjugation(cls) -> "AntiunitaryOp":
        return cls(AxisAngleUnitary.identity())

    @property
    def matrix(self) -> np.ndarray:
        return self.u.matrix

    def apply(self, psi) -> np.ndarray:
        return self.matrix @ np.conj(np.asarray(psi, dtype=complex))

    def squared(self) -> np.ndarray:
        """The linear operator ``K^2 = U U*``."""
        U = self.matrix
        return U @ U.conj()

    def adjoint_action(self, p: PauliForm) -> PauliForm:
        """The linear operator ``K V K^-1 = U V* U^-1``."""
        return conjugate_by(self.u.pauli, conj(p))

    def inverse_adjoint_action(self, p: PauliForm) -> PauliForm:
        """The linear operator ``K^-1 V K = (U^-1 V U)*``."""
        return conj(conjugate_by(dagger(self.u.pauli), p))
