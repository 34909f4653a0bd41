"""Plane-wave processes, forward transmission and Born amplitudes.

Units: wave numbers in nm^-1, lengths in nm, potentials in units where
``d V / (2 k)`` is dimensionless.  A potential with ``Im V < 0`` is
absorptive: the layer factor is ``exp(i k d - i d V / (2 k))``, the
first-order expansion of ``exp(i d sqrt(k^2 - V))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .pauli2 import (
    AntiunitaryOp,
    AxisAngleUnitary,
    PauliForm,
    Rotation,
    canonical_axis,
    compose,
    compose_arrays,
    exp2_arrays,
    mul_arrays,
)

__all__ = [
    "AntiunitaryOp",
    "InelasticProcessError",
    "Layer",
    "Process",
    "Slab",
    "born_amplitude",
    "born_violation",
    "chain_transmission",
    "chain_transmission_arrays",
    "forward_transmission",
    "forward_transmission_arrays",
    "reciprocal_process",
    "reversal_rotation",
    "rotated_reciprocal_process",
    "transmission_amplitude",
    "transmission_amplitude_arrays",
]

ELASTIC_TOL = 1e-9
_Z = np.array([0.0, 0.0, 1.0])


class InelasticProcessError(ValueError):
    pass


def _polarization(p) -> np.ndarray:
    arr = np.array(p, dtype=complex).reshape(2)
    norm = np.linalg.norm(arr)
    if not np.isfinite(norm) or norm == 0.0:
        raise ValueError(f"polarization {p!r} cannot be normalized")
    arr = arr / norm
    arr.setflags(write=False)
    return arr


def _momentum(k) -> np.ndarray:
    arr = np.array(k, dtype=float).reshape(3)
    arr.setflags(write=False)
    return arr


def _check_elastic(k_in, k_out):
    a, b = float(np.linalg.norm(k_in)), float(np.linalg.norm(k_out))
    if abs(a - b) > ELASTIC_TOL * max(a, b, 1.0):
        raise InelasticProcessError(f"|k_in| = {a!r} differs from |k_out| = {b!r}")


@dataclass(frozen=True, eq=False)
class Process:
    """Transition between two plane waves ``(k_in, p_in) -> (k_out, p_out)``."""

    k_in: np.ndarray
    p_in: np.ndarray
    k_out: np.ndarray
    p_out: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "k_in", _momentum(self.k_in))
        object.__setattr__(self, "k_out", _momentum(self.k_out))
        object.__setattr__(self, "p_in", _polarization(self.p_in))
        object.__setattr__(self, "p_out", _polarization(self.p_out))
        _check_elastic(self.k_in, self.k_out)

    @classmethod
    def forward(cls, k: float, p_in, p_out, direction=_Z) -> "Process":
        kv = k * np.asarray(direction, dtype=float) / np.linalg.norm(direction)
        return cls(kv, p_in, kv, p_out)

    @property
    def is_forward(self) -> bool:
        scale = max(float(np.linalg.norm(self.k_in)), 1.0)
        return bool(np.linalg.norm(self.k_out - self.k_in) <= ELASTIC_TOL * scale)


def reciprocal_process(proc: Process, K: AntiunitaryOp) -> Process:
    """The barred process: momenta negated, ``p -> U p*``, legs swapped."""
    return Process(-proc.k_out, K.apply(proc.p_out), -proc.k_in, K.apply(proc.p_in))


def reversal_rotation(k_in, k_out) -> Rotation:
    """Half turn mapping ``-k_in`` onto ``k_out``.

    The axis is the momentum transfer direction.  In forward scattering any
    axis orthogonal to ``k_in`` works; ``k_in x z`` is used, or ``x`` when
    ``k_in`` is along ``z``.
    """
    k_in = np.asarray(k_in, dtype=float)
    k_out = np.asarray(k_out, dtype=float)
    _check_elastic(k_in, k_out)
    q = k_out - k_in
    scale = max(float(np.linalg.norm(k_in)), 1e-300)
    if np.linalg.norm(q) <= ELASTIC_TOL * scale:
        c = np.cross(k_in, _Z)
        if np.linalg.norm(c) <= 1e-12 * scale:
            return Rotation((1.0, 0.0, 0.0), math.pi)
        return Rotation(canonical_axis(c / np.linalg.norm(c)), math.pi)
    return Rotation(canonical_axis(q / np.linalg.norm(q)), math.pi)


def rotated_reciprocal_process(proc: Process, U: AxisAngleUnitary, axis=None):
    """Reciprocal partner realized by a half-turn of the sample.

    Momenta stay put; ``p_in' = U_R U p_out*`` and ``p_out' = U_R U p_in*``
    where ``U_R`` is the SU(2) half turn about the reversal axis.  ``axis``
    overrides the canonical choice (only meaningful in forward geometry).
    Returns the new process and the rotation the sample undergoes.
    """
    R = reversal_rotation(proc.k_in, proc.k_out)
    if axis is not None:
        axis = np.asarray(axis, dtype=float)
        axis = axis / np.linalg.norm(axis)
        if not proc.is_forward and abs(abs(np.dot(axis, R.axis)) - 1.0) > 1e-9:
            raise ValueError("a custom reversal axis is only allowed for forward scattering")
        if abs(np.dot(axis, proc.k_in)) > 1e-9 * np.linalg.norm(proc.k_in):
            raise ValueError("the reversal axis must be orthogonal to the beam")
        R = Rotation(axis, math.pi)
    M = AxisAngleUnitary(0.0, math.pi, R.axis).matrix @ U.matrix
    new = Process(proc.k_in, M @ np.conj(proc.p_out), proc.k_out, M @ np.conj(proc.p_in))
    return new, R


@dataclass(frozen=True, eq=False)
class Layer:
    """Homogeneous layer; ``potential`` may depend on energy via a callable."""

    potential: Union[PauliForm, Callable[[float], PauliForm]]
    d: float

    def __post_init__(self):
        if not self.d > 0:
            raise ValueError(f"layer thickness must be positive, got {self.d!r}")

    def at(self, energy: Optional[float] = None) -> PauliForm:
        if isinstance(self.potential, PauliForm):
            return self.potential
        return self.potential(energy)


def _check_kd(d, k):
    if not d > 0:
        raise ValueError(f"thickness must be positive, got {d!r}")
    if not k > 0:
        raise ValueError(f"wave number must be positive, got {k!r}")


def forward_transmission_arrays(v0, v, d: float, k: float):
    """Batched layer factors for potentials given as coefficient arrays."""
    _check_kd(d, k)
    g = d / (2.0 * k)
    return exp2_arrays(1j * k * d - 1j * g * np.asarray(v0), -1j * g * np.asarray(v))


def forward_transmission(V: PauliForm, d: float, k: float) -> PauliForm:
    """Transmission matrix of a homogeneous layer of thickness ``d``."""
    return PauliForm(*forward_transmission_arrays(V.v0, V.v, d, k))


def chain_transmission_arrays(layers, k: float, shape=()):
    """Ordered product over ``(v0, v, d)`` triples; layer 0 is crossed first.

    Each ``v0`` may be an array of shape ``shape`` (and ``v`` of shape
    ``shape + (3,)``), giving one transmission matrix per grid point.
    """
    t0 = np.ones(shape, dtype=complex)
    t = np.zeros(shape + (3,), dtype=complex)
    for v0, v, d in layers:
        f0, f = forward_transmission_arrays(v0, v, d, k)
        t0, t = mul_arrays(f0, f, t0, t)
    return t0, t


def chain_transmission(stack: Sequence[Layer], k: float, energy: Optional[float] = None) -> PauliForm:
    """``T = T_n ... T_1`` for a stack whose first layer meets the beam first."""
    if len(stack) == 0:
        raise ValueError("empty layer stack")
    triples = []
    for layer in stack:
        V = layer.at(energy)
        triples.append((V.v0, V.v, layer.d))
    return PauliForm(*chain_transmission_arrays(triples, k))


def transmission_amplitude_arrays(p_in, p_out, t0, t):
    """``(p_out, T p_in)`` for batched transmission coefficients."""
    M = compose_arrays(t0, t)
    return np.conj(p_out[0]) * (M[..., 0, 0] * p_in[0] + M[..., 0, 1] * p_in[1]) + np.conj(
        p_out[1]
    ) * (M[..., 1, 0] * p_in[0] + M[..., 1, 1] * p_in[1])


def transmission_amplitude(proc: Process, T: PauliForm) -> complex:
    return complex(np.vdot(proc.p_out, compose(T) @ proc.p_in))


@dataclass(frozen=True, eq=False)
class Slab:
    """Laterally homogeneous slab ``z0 < z < z1`` with footprint ``area``."""

    potential: PauliForm
    z0: float
    z1: float
    area: float = 1.0

    def __post_init__(self):
        if not self.z1 > self.z0:
            raise ValueError("slab needs z1 > z0")

    @property
    def volume(self) -> float:
        return self.area * (self.z1 - self.z0)

    def form_factor(self, q) -> complex:
        """``area * int_{z0}^{z1} exp(i q_z z) dz`` for ``q`` along z."""
        q = np.asarray(q, dtype=float)
        scale = max(float(np.linalg.norm(q)), 1.0)
        if np.linalg.norm(q[:2]) > 1e-12 * scale:
            raise ValueError("lateral momentum transfer needs a lateral form factor")
        qz = float(q[2])
        if abs(qz) * (self.z1 - self.z0) < 1e-8:
            return complex(self.volume) * np.exp(0.5j * qz * (self.z0 + self.z1))
        return self.area * (np.exp(1j * qz * self.z1) - np.exp(1j * qz * self.z0)) / (1j * qz)


def _weighted_sum(regions, proc: Process) -> PauliForm:
    q = proc.k_in - proc.k_out
    total = PauliForm.scalar(0.0)
    for region in regions:
        if isinstance(region, Slab):
            weight = region.volume if proc.is_forward else region.form_factor(q)
            total = total + weight * region.potential
        else:
            V, volume = region
            if not proc.is_forward:
                raise ValueError("(potential, volume) regions only support forward geometry; use Slab")
            total = total + volume * V
    return total


def born_amplitude(regions, proc: Process) -> complex:
    """First-order amplitude ``(p_out, sum_l F_l V_l p_in)``.

    ``regions`` holds :class:`Slab` objects or ``(V, volume)`` pairs; the
    latter are restricted to forward geometry where every form factor is
    the plain volume.
    """
    return complex(np.vdot(proc.p_out, compose(_weighted_sum(regions, proc)) @ proc.p_in))


def born_violation(minus_regions, proc: Process) -> complex:
    """``2 (p_out, V_- p_in)`` summed over regions of the violating part."""
    return 2.0 * born_amplitude(minus_regions, proc)
