"""Independent reference computations used by the tests.

Nothing here calls the closed forms or geometric constructions under test;
everything works on raw 2x2 matrices.
"""

import math

import numpy as np

S0 = np.eye(2, dtype=complex)
S1 = np.array([[0, 1], [1, 0]], dtype=complex)
S2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
S3 = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = (S1, S2, S3)


def matrix(v0, v):
    return v0 * S0 + sum(c * s for c, s in zip(v, PAULI))


def taylor_expm(M, terms=20):
    """Scaling and squaring with a fixed-length Taylor series."""
    M = np.asarray(M, dtype=complex)
    norm = np.linalg.norm(M, 1)
    s = max(0, int(math.ceil(math.log2(norm / 0.25)))) if norm > 0 else 0
    A = M / 2.0**s
    result = np.eye(2, dtype=complex)
    term = np.eye(2, dtype=complex)
    for j in range(1, terms + 1):
        term = term @ A / j
        result = result + term
    for _ in range(s):
        result = result @ result
    return result


def random_matrix(rng, scale=1.0):
    return scale * (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))


def random_unitary(rng):
    Q, R = np.linalg.qr(random_matrix(rng))
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def su2_from_axis_angle(n, phi):
    n = np.asarray(n, dtype=float)
    return math.cos(phi / 2) * S0 - 1j * math.sin(phi / 2) * sum(c * s for c, s in zip(n, PAULI))


def recip_residual(V, U):
    return np.linalg.norm(V - U @ V.T @ U.conj().T)


def same_up_to_phase(a, b, atol=1e-12):
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    overlap = np.vdot(a, b)
    if abs(overlap) < 1e-300:
        return np.allclose(a, b, atol=atol)
    phase = overlap / abs(overlap)
    return np.allclose(a * phase, b, atol=atol)


def _su2_grid(n_theta, n_psi, n_phi, centre=None, width=None):
    """SU(2) elements on a (polar, azimuth, angle) grid, shape (N, 2, 2)."""
    if centre is None:
        th = (np.arange(n_theta) + 0.5) * math.pi / n_theta
        ps = np.arange(n_psi) * 2 * math.pi / n_psi
        ph = np.arange(n_phi) * 2 * math.pi / n_phi
    else:
        t0, p0, f0 = centre
        th = t0 + np.linspace(-width[0], width[0], n_theta)
        ps = p0 + np.linspace(-width[1], width[1], n_psi)
        ph = f0 + np.linspace(-width[2], width[2], n_phi)
    T, P, F = np.meshgrid(th, ps, ph, indexing="ij")
    T, P, F = T.ravel(), P.ravel(), F.ravel()
    n = np.stack([np.sin(T) * np.cos(P), np.sin(T) * np.sin(P), np.cos(T)], axis=-1)
    c = np.cos(F / 2)[:, None, None]
    s = np.sin(F / 2)[:, None, None]
    ns = np.einsum("ni,ijk->njk", n, np.stack(PAULI))
    return c * S0 - 1j * s * ns, np.stack([T, P, F], axis=-1)


def _pair_residuals(Us, potentials):
    worst = np.zeros(len(Us))
    for V in potentials:
        W = np.einsum("nij,jk,nlk->nil", Us, V.T, Us.conj())
        r = np.linalg.norm(W - V, axis=(1, 2)) / max(np.linalg.norm(V - np.trace(V) / 2 * S0), 1e-300)
        worst = np.maximum(worst, r)
    return worst


def brute_force_min_residual(potentials, coarse=(40, 80, 40), levels=8, keep=12):
    """Smallest relative residual of ``V = U V^T U^-1`` over a U(2) grid.

    The global phase of U drops out, so the search runs over SU(2): a coarse
    grid of ``prod(coarse)`` candidates, then ``levels`` rounds of local
    grids around the ``keep`` best points, each round shrinking the cell.
    """
    potentials = [np.asarray(V, dtype=complex) for V in potentials]
    Us, params = _su2_grid(*coarse)
    res = _pair_residuals(Us, potentials)
    order = np.argsort(res)[:keep]
    best = float(res[order[0]])
    seeds = params[order]
    width = np.array([math.pi / coarse[0], 2 * math.pi / coarse[1], 2 * math.pi / coarse[2]])
    for _ in range(levels):
        new_seeds = []
        for centre in seeds:
            Us, p = _su2_grid(7, 7, 7, centre, width)
            r = _pair_residuals(Us, potentials)
            i = int(np.argmin(r))
            best = min(best, float(r[i]))
            new_seeds.append((float(r[i]), p[i]))
        new_seeds.sort(key=lambda t: t[0])
        seeds = [p for _, p in new_seeds[: max(3, keep // 2)]]
        width = width / 3.0
    return best
