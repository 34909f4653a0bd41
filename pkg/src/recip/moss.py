"""57Fe hyperfine line model and normal/reversed transmission spectra.

Energies are source velocities in mm/s, thicknesses in nm and wave numbers in
nm^-1.  The beam runs along +z; polarization component 1 is x-linear and
component 2 is y-linear.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Union

import numpy as np

from .pauli2 import AxisAngleUnitary, PauliForm, compose_arrays, conjugate_by, rotation_matrix
from .transport import chain_transmission_arrays, transmission_amplitude_arrays

# 14.4 keV photons
DEFAULT_K = 73.0
DEFAULT_THICKNESS_NM = 4000.0
DEFAULT_GRID_POINTS = 512
GRID_SPAN = 1.5

POLARIZATIONS = {
    "x": (1.0, 0.0),
    "sigma": (1.0, 0.0),
    "y": (0.0, 1.0),
    "pi": (0.0, 1.0),
    "plus": (1 / math.sqrt(2), 1j / math.sqrt(2)),
    "minus": (1 / math.sqrt(2), -1j / math.sqrt(2)),
}


@dataclass(frozen=True)
class HyperfineLine:
    E0: float
    Gamma: float
    weight: float
    dm: int

    def __post_init__(self):
        if not self.Gamma > 0:
            raise ValueError(f"line width must be positive, got {self.Gamma!r}")
        if not self.weight >= 0:
            raise ValueError(f"line weight must be nonnegative, got {self.weight!r}")
        if self.dm not in (-1, 0, 1):
            raise ValueError(f"dm must be -1, 0 or +1, got {self.dm!r}")


_FE57_GAMMA = 0.097
FE57_LINES = tuple(
    HyperfineLine(e0, _FE57_GAMMA, w, dm)
    for e0, w, dm in [
        (-5.328, 3.0, -1),
        (-3.083, 2.0, 0),
        (-0.839, 1.0, 1),
        (0.839, 1.0, -1),
        (3.083, 2.0, 0),
        (5.328, 3.0, 1),
    ]
)


def line_b_vector(dm: int, theta: float, phi: float) -> np.ndarray:
    """Poincare direction of one transition for field angles ``(theta, phi)``."""
    s2 = math.sin(theta) ** 2
    if dm == 1:
        return np.array([-0.5 * s2 * math.sin(2 * phi), -2.0 * math.cos(theta), s2 * math.cos(2 * phi)])
    if dm == -1:
        return np.array([-0.5 * s2 * math.sin(2 * phi), 2.0 * math.cos(theta), s2 * math.cos(2 * phi)])
    if dm == 0:
        return np.array([s2 * math.sin(2 * phi), 0.0, -2.0 * s2 * math.cos(2 * phi)])
    raise ValueError(f"dm must be -1, 0 or +1, got {dm!r}")


def line_scalar(dm: int, theta: float) -> float:
    """Polarization-independent part of a line's polarization matrix.

    These are the dipole angular factors; with them every line matrix is
    positive semidefinite and dm = 0 lines vanish along the field.
    """
    c2 = math.cos(theta) ** 2
    return 1.0 + c2 if dm in (1, -1) else 2.0 * (1.0 - c2)


def line_polarization(dm: int, theta: float, phi: float) -> PauliForm:
    return PauliForm(line_scalar(dm, theta), line_b_vector(dm, theta, phi))


def lorentzian(E, line: HyperfineLine):
    """``weight / ((E - E0) / (Gamma / 2) + i)``; equals ``-i weight`` on resonance."""
    x = (np.asarray(E, dtype=float) - line.E0) / (0.5 * line.Gamma)
    out = line.weight / (x + 1j)
    return complex(out) if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class Foil:
    """Magnetized absorber.

    ``theta`` and ``phi`` are in radians; ``strength`` multiplies every
    line weight; ``frame`` is a Poincare-space rotation applied to all
    b-vectors (set by :func:`reversed_scenario`).
    """

    d: float
    theta: float
    phi: float
    lines: tuple = FE57_LINES
    v0_electronic: complex = 0j
    strength: float = 1.0
    frame: np.ndarray = field(default_factory=lambda: np.eye(3))

    def __post_init__(self):
        if not self.d > 0:
            raise ValueError(f"foil thickness must be positive, got {self.d!r}")
        if not 0.0 <= self.theta <= math.pi:
            raise ValueError(f"theta must lie in [0, pi], got {self.theta!r}")
        object.__setattr__(self, "phi", self.phi % (2 * math.pi))
        object.__setattr__(self, "lines", tuple(self.lines))
        object.__setattr__(self, "v0_electronic", complex(self.v0_electronic))
        object.__setattr__(self, "frame", np.array(self.frame, dtype=float).reshape(3, 3))

    @classmethod
    def from_degrees(cls, thickness_um: float, theta_deg: float, phi_deg: float, **kw) -> "Foil":
        return cls(thickness_um * 1000.0, math.radians(theta_deg), math.radians(phi_deg), **kw)

    def pauli_arrays(self, E):
        """Potential coefficients ``(v0, v)`` on an energy grid."""
        E = np.asarray(E, dtype=float)
        v0 = np.full(E.shape, self.v0_electronic, dtype=complex)
        v = np.zeros(E.shape + (3,), dtype=complex)
        for line in self.lines:
            c = self.strength * np.asarray(lorentzian(E, line))
            pol = line_polarization(line.dm, self.theta, self.phi)
            v0 = v0 + c * pol.v0
            v = v + c[..., None] * (self.frame @ pol.v.real)
        return v0, v


def foil_potential(foil: Foil, E: float) -> PauliForm:
    v0, v = foil.pauli_arrays(E)
    return PauliForm(v0, v)


def peak_resonant_norm(foil: Foil) -> float:
    """Largest operator norm of the resonant potential at unit strength.

    Evaluated at the line centres, where the Lorentzians peak.
    """
    centres = np.array(sorted({line.E0 for line in foil.lines}), dtype=float)
    if centres.size == 0:
        return 0.0
    unit = replace(foil, strength=1.0, v0_electronic=0j)
    v0, v = unit.pauli_arrays(centres)
    return float(np.max(np.linalg.norm(compose_arrays(v0, v), ord=2, axis=(-2, -1))))


def tau_of(foil: Foil, k: float = DEFAULT_K) -> float:
    """Peak optical thickness ``d * max||V_res|| / (2k)`` of a foil."""
    return foil.d * foil.strength * peak_resonant_norm(foil) / (2.0 * k)


def with_tau(foil: Foil, tau: float, k: float = DEFAULT_K) -> Foil:
    """Copy of ``foil`` whose strength gives peak optical thickness ``tau``."""
    peak = peak_resonant_norm(foil)
    if peak == 0.0:
        raise ValueError("foil has no resonant lines to scale")
    return replace(foil, strength=2.0 * k * tau / (foil.d * peak))


@dataclass(frozen=True, eq=False)
class ConstantLayer:
    """Energy-independent layer inside a scenario."""

    potential: PauliForm
    d: float

    def __post_init__(self):
        if not self.d > 0:
            raise ValueError(f"layer thickness must be positive, got {self.d!r}")

    def pauli_arrays(self, E):
        E = np.asarray(E, dtype=float)
        v0 = np.full(E.shape, self.potential.v0, dtype=complex)
        v = np.broadcast_to(self.potential.v, E.shape + (3,))
        return v0, v


Element = Union[Foil, ConstantLayer]


def default_grid(lines=FE57_LINES, points: int = DEFAULT_GRID_POINTS) -> np.ndarray:
    edge = GRID_SPAN * max((abs(line.E0) for line in lines), default=1.0)
    if edge == 0.0:
        edge = GRID_SPAN
    return np.linspace(-edge, edge, points)


def polarization(p) -> np.ndarray:
    """Unit Jones vector from a preset name or a complex pair."""
    if isinstance(p, str):
        try:
            p = POLARIZATIONS[p]
        except KeyError:
            raise ValueError(f"unknown polarization preset {p!r}") from None
    arr = np.array(p, dtype=complex).reshape(2)
    norm = np.linalg.norm(arr)
    if not np.isfinite(norm) or norm == 0.0:
        raise ValueError(f"polarization {p!r} cannot be normalized")
    return arr / norm


@dataclass(frozen=True, eq=False)
class Scenario:
    """Forward transmission experiment along +z."""

    elements: tuple
    p_in: np.ndarray
    p_out: np.ndarray
    grid: np.ndarray
    k: float = DEFAULT_K
    reversal_axis: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0, 0.0]))
    unitary: AxisAngleUnitary = field(default_factory=AxisAngleUnitary.identity)

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        object.__setattr__(self, "p_in", polarization(self.p_in))
        object.__setattr__(self, "p_out", polarization(self.p_out))
        grid = np.array(self.grid, dtype=float).reshape(-1)
        if grid.size == 0 or np.any(np.diff(grid) <= 0) or not np.all(np.isfinite(grid)):
            raise ValueError("energy grid must be finite, nonempty and strictly increasing")
        object.__setattr__(self, "grid", grid)
        if not self.k > 0:
            raise ValueError(f"wave number must be positive, got {self.k!r}")
        axis = np.array(self.reversal_axis, dtype=float).reshape(3)
        norm = np.linalg.norm(axis)
        if norm == 0.0 or not np.isfinite(norm):
            raise ValueError("reversal axis must be a nonzero finite vector")
        object.__setattr__(self, "reversal_axis", axis / norm)


@dataclass(frozen=True, eq=False)
class Spectrum:
    grid: np.ndarray
    amp_normal: np.ndarray
    amp_reversed: np.ndarray

    @property
    def normal(self) -> np.ndarray:
        return np.abs(self.amp_normal) ** 2

    @property
    def reversed(self) -> np.ndarray:
        return np.abs(self.amp_reversed) ** 2


def amplitudes(scenario: Scenario, energies=None) -> np.ndarray:
    """Transmission amplitude at each energy (defaults to the scenario grid)."""
    E = scenario.grid if energies is None else np.asarray(energies, dtype=float)
    triples = []
    for element in scenario.elements:
        v0, v = element.pauli_arrays(E)
        triples.append((v0, v, element.d))
    t0, t = chain_transmission_arrays(triples, scenario.k, E.shape)
    return transmission_amplitude_arrays(scenario.p_in, scenario.p_out, t0, t)


def _parallel_amplitudes(scenario: Scenario, threads: int) -> np.ndarray:
    if threads <= 1:
        return amplitudes(scenario)
    chunks = np.array_split(scenario.grid, threads)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(lambda chunk: amplitudes(scenario, chunk), chunks))
    return np.concatenate(parts)


def reversed_scenario(scenario: Scenario) -> Scenario:
    """Source and detector exchanged by a half turn of the sample.

    The layer order is reversed, each potential is rotated by the half turn
    about ``reversal_axis`` and ``p_in' = U_R U p_out*``,
    ``p_out' = U_R U p_in*``.
    """
    axis = scenario.reversal_axis
    if abs(axis[2]) > 1e-12:
        raise ValueError("forward reversal needs an axis orthogonal to the beam (z)")
    U_R = AxisAngleUnitary(0.0, math.pi, axis)
    O = rotation_matrix(axis, math.pi)
    elements = []
    for element in reversed(scenario.elements):
        if isinstance(element, Foil):
            elements.append(replace(element, frame=O @ element.frame))
        else:
            elements.append(ConstantLayer(conjugate_by(U_R.pauli, element.potential), element.d))
    M = U_R.matrix @ scenario.unitary.matrix
    return replace(
        scenario,
        elements=tuple(elements),
        p_in=M @ np.conj(scenario.p_out),
        p_out=M @ np.conj(scenario.p_in),
    )


def spectrum(scenario: Scenario, threads: int = 1) -> Spectrum:
    """Normal and reversed amplitudes over the scenario grid.

    Grid points are independent, so ``threads > 1`` splits the grid; every
    element is computed by the same vectorized kernel and the result is
    bit-identical to the sequential one.
    """
    normal = _parallel_amplitudes(scenario, threads)
    rev = _parallel_amplitudes(reversed_scenario(scenario), threads)
    return Spectrum(scenario.grid.copy(), normal, rev)


def relative_deviation(a, b, floor: float = 1e-300) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return np.abs(a - b) / np.maximum(np.maximum(np.abs(a), np.abs(b)), floor)


def max_relative_deviation(a, b) -> float:
    return float(np.max(relative_deviation(a, b)))


def resonant_contrast(intensity) -> float:
    """Depth of the deepest dip relative to the brightest grid point."""
    intensity = np.asarray(intensity, dtype=float)
    top = float(np.max(intensity))
    return (top - float(np.min(intensity))) / top if top > 0 else 0.0
