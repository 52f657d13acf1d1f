"""Classical unit-sphere spin systems on finite windows.

Configurations assign a unit 3-vector to each site; potentials are bounded
functions of the configuration restricted to their region.  Expectations use
a product quadrature per site (Gauss-Legendre in cos(theta) crossed with a
uniform angular rule), normalized so the sphere has measure one.  Rotations
act on a single marked site by pulling back observables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss

from .lattice import Region, Site


@dataclass(frozen=True)
class ClassicalPotential:
    """Real-valued bounded function of the spins in a region.

    ``fn`` is vectorized: it maps an array of shape (..., k, 3) of unit
    vectors (one row per site of the region, in region order) to real values
    of shape (...).  ``sup_norm`` may carry a closed-form supremum.
    """

    region: Region
    fn: Callable
    sup_norm: float = None

    def restrict(self, window: Region, configs: np.ndarray) -> np.ndarray:
        """Evaluate on configurations given over a larger window."""
        idx = [window.index(x) for x in self.region]
        return self.fn(configs[..., idx, :])


def heisenberg_bond_potential(x: Site, y: Site, coupling: float, delta: float) -> ClassicalPotential:
    """-J (delta (s1 s1 + s2 s2) + s3 s3) on the pair {x, y}; the supremum
    over unit vectors is |J| max(|delta|, 1)."""
    region = Region.of([x, y])

    def fn(v):
        u, w = v[..., 0, :], v[..., 1, :]
        return -coupling * (
            delta * (u[..., 0] * w[..., 0] + u[..., 1] * w[..., 1])
            + u[..., 2] * w[..., 2]
        )

    return ClassicalPotential(region, fn)


def site_field_potential(x: Site, fn_single: Callable) -> ClassicalPotential:
    region = Region.of([x])
    return ClassicalPotential(region, lambda v: fn_single(v[..., 0, :]))


class SphereGrid:
    """Product quadrature on the unit sphere: Gauss-Legendre of the given
    order in cos(theta) crossed with 2*order uniform azimuthal points; the
    weights are positive and sum to one (normalized surface measure)."""

    def __init__(self, order: int = 16):
        if order < 2:
            raise ValueError("order must be >= 2")
        self.order = order
        nodes, weights = leggauss(order)
        phis = 2.0 * math.pi * np.arange(2 * order) / (2 * order)
        cos_t, phi = np.meshgrid(nodes, phis, indexing="ij")
        sin_t = np.sqrt(1.0 - cos_t ** 2)
        self.vectors = np.stack(
            [sin_t * np.cos(phi), sin_t * np.sin(phi), cos_t], axis=-1
        ).reshape(-1, 3)
        w2d = np.broadcast_to((weights / 2.0)[:, None], cos_t.shape) / (2 * order)
        self.weights = w2d.reshape(-1).copy()

    def integrate(self, values: np.ndarray) -> float:
        return float(self.weights @ values)


def _window_chunks(grid: SphereGrid, nsites: int):
    """Yield (configs, weights) chunks covering the product grid over the
    window; the outermost site is chunked to bound memory on three sites."""
    m = len(grid.weights)
    if nsites == 0:
        yield np.zeros((1, 0, 3)), np.ones(1)
        return
    if nsites == 1:
        yield grid.vectors[:, None, :], grid.weights
        return
    if nsites == 2:
        v, w = grid.vectors, grid.weights
        configs = np.empty((m * m, 2, 3))
        configs[:, 0, :] = np.repeat(v, m, axis=0)
        configs[:, 1, :] = np.tile(v, (m, 1))
        weights = np.repeat(w, m) * np.tile(w, m)
        yield configs, weights
        return
    if nsites == 3:
        v, w = grid.vectors, grid.weights
        inner = np.empty((m * m, 2, 3))
        inner[:, 0, :] = np.repeat(v, m, axis=0)
        inner[:, 1, :] = np.tile(v, (m, 1))
        inner_w = np.repeat(w, m) * np.tile(w, m)
        for i in range(m):
            configs = np.empty((m * m, 3, 3))
            configs[:, 0, :] = v[i]
            configs[:, 1:, :] = inner
            yield configs, w[i] * inner_w
        return
    raise ValueError("quadrature windows are limited to three sites")


def classical_gibbs_expectation(window: Region, potentials: Sequence[ClassicalPotential],
                                beta: float, observable: Callable,
                                grid: SphereGrid = None) -> float:
    """Quadrature evaluation of the finite-volume Gibbs average
    int e^{-beta h} a dmu / int e^{-beta h} dmu with h the sum of the given
    potentials.  ``observable`` takes configs of shape (..., |window|, 3)."""
    grid = grid or SphereGrid()
    for pot in potentials:
        if not pot.region.issubset(window):
            raise ValueError(f"potential on {pot.region} escapes the window")
    # streaming accumulation with a running energy shift so the Boltzmann
    # factors stay bounded regardless of chunk order
    num, den, shift = 0.0, 0.0, None
    for configs, weights in _window_chunks(grid, len(window)):
        h = np.zeros(configs.shape[0])
        for pot in potentials:
            h = h + pot.restrict(window, configs)
        local = float(h.min()) if h.size else 0.0
        if shift is None:
            shift = local
        elif local < shift:
            rescale = math.exp(-beta * (shift - local))
            num *= rescale
            den *= rescale
            shift = local
        boltz = weights * np.exp(-beta * (h - shift))
        num += float(boltz @ np.asarray(observable(configs), dtype=float))
        den += float(boltz.sum())
    return num / den


def classical_supnorm(pot: ClassicalPotential, coarse: int = 64, rounds: int = 3) -> float:
    """Supremum of |phi| over unit-vector configurations.

    Returns the closed form when one is attached; otherwise a coarse
    (theta, phi) grid per site (at most two sites) followed by local grid
    refinement, halving the resolution each round.
    """
    if pot.sup_norm is not None:
        return pot.sup_norm
    k = len(pot.region)
    if k == 0:
        return abs(float(pot.fn(np.zeros((1, 0, 3)))[0]))
    if k > 2:
        raise ValueError("grid search supports at most two sites; supply a closed form")

    def directions(thetas, phis):
        t, p = np.meshgrid(thetas, phis, indexing="ij")
        return np.stack(
            [np.sin(t) * np.cos(p), np.sin(t) * np.sin(p), np.cos(t)], axis=-1
        ).reshape(-1, 3), t.reshape(-1), p.reshape(-1)

    thetas = (np.arange(coarse) + 0.5) * math.pi / coarse
    phis = 2.0 * math.pi * np.arange(coarse) / coarse
    vecs, tflat, pflat = directions(thetas, phis)
    m = len(vecs)
    if k == 1:
        vals = np.abs(pot.fn(vecs[:, None, :]))
        best = int(np.argmax(vals))
        best_angles = [(tflat[best], pflat[best])]
        best_val = float(vals[best])
    else:
        best_val = -1.0
        best_angles = None
        block = max(1, (1 << 20) // m)
        for i0 in range(0, m, block):
            left = vecs[i0 : i0 + block]
            nb = len(left)
            configs = np.empty((nb * m, 2, 3))
            configs[:, 0, :] = np.repeat(left, m, axis=0)
            configs[:, 1, :] = np.tile(vecs, (nb, 1))
            vals = np.abs(pot.fn(configs))
            jstar = int(np.argmax(vals))
            if vals[jstar] > best_val:
                best_val = float(vals[jstar])
                bi, bj = divmod(jstar, m)
                bi += i0
                best_angles = [(tflat[bi], pflat[bi]), (tflat[bj], pflat[bj])]
    step_t = math.pi / coarse
    step_p = 2.0 * math.pi / coarse
    for _ in range(rounds):
        step_t /= 2.0
        step_p /= 2.0
        local = []
        for (t0, p0) in best_angles:
            ts = t0 + step_t * np.linspace(-2, 2, 9)
            ps = p0 + step_p * np.linspace(-2, 2, 9)
            v, tf, pf = directions(ts, ps)
            local.append((v, tf, pf))
        if k == 1:
            v, tf, pf = local[0]
            vals = np.abs(pot.fn(v[:, None, :]))
            b = int(np.argmax(vals))
            best_val = max(best_val, float(vals[b]))
            best_angles = [(tf[b], pf[b])]
        else:
            (v1, tf1, pf1), (v2, tf2, pf2) = local
            n1, n2 = len(v1), len(v2)
            configs = np.empty((n1 * n2, 2, 3))
            configs[:, 0, :] = np.repeat(v1, n2, axis=0)
            configs[:, 1, :] = np.tile(v2, (n1, 1))
            vals = np.abs(pot.fn(configs))
            b = int(np.argmax(vals))
            best_val = max(best_val, float(vals[b]))
            i1, i2 = divmod(b, n2)
            best_angles = [(tf1[i1], pf1[i1]), (tf2[i2], pf2[i2])]
    return best_val


def require_rotation(r: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    if r.shape != (3, 3):
        raise ValueError("rotation must be a 3x3 matrix")
    if np.linalg.norm(r @ r.T - np.eye(3)) > tol or abs(np.linalg.det(r) - 1.0) > tol:
        raise ValueError("matrix is not a rotation")
    return r


def rotation_about_z(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed element of SO(3) via QR with phase and parity fixes."""
    z = rng.normal(size=(3, 3))
    q, r = np.linalg.qr(z)
    q = q * np.sign(np.diagonal(r))
    if np.linalg.det(q) < 0:
        q[:, [0, 1]] = q[:, [1, 0]]
    return q


def rotate_site(configs: np.ndarray, site_index: int, r: np.ndarray) -> np.ndarray:
    """Pull-back configuration map: replace the vector at one site by
    R^{-1} applied to it, leaving all other sites untouched."""
    out = configs.copy()
    out[..., site_index, :] = configs[..., site_index, :] @ r  # v -> R^T v = R^{-1} v
    return out


def invariance_residual(window: Region, potentials: Sequence[ClassicalPotential],
                        beta: float, observable: Callable, x: Site, r: np.ndarray,
                        grid: SphereGrid = None) -> float:
    """Difference between omega(a) and the rotated-dressed average

        omega( exp(beta sum_{X at x} (phi_X - phi_X o rotation)) a o rotation ),

    an exact identity for the finite Gibbs state (change of variables), so the
    returned value reflects quadrature error only.
    """
    grid = grid or SphereGrid()
    r = require_rotation(r)
    xi = window.index(x)
    touching = [p for p in potentials if x in p.region]

    lhs = classical_gibbs_expectation(window, potentials, beta, observable, grid)

    def dressed(configs):
        rotated = rotate_site(configs, xi, r)
        exponent = np.zeros(configs.shape[0])
        for pot in touching:
            exponent += pot.restrict(window, configs) - pot.restrict(window, rotated)
        return np.exp(beta * exponent) * np.asarray(observable(rotated), dtype=float)

    rhs = classical_gibbs_expectation(window, potentials, beta, dressed, grid)
    return abs(lhs - rhs)


def classical_kernel_bound_check(bonds: Sequence[ClassicalPotential], beta: float,
                                 rotation_samples: int, seed: int,
                                 site_field: ClassicalPotential = None,
                                 grid: SphereGrid = None):
    """Sampled check of the rotation-difference product bound.

    For rotations R acting at the common site x of the bonds, the normalized
    average over R of  prod_l (phi_l - phi_l o R) e^{-beta psi o R}  never
    exceeds 2^n prod_l sup|phi_l| in absolute value (each factor is a
    difference of two values bounded by sup|phi_l|, and the weight is a
    convex average).  Returns (max sampled lhs, rhs bound).
    """
    n = len(bonds)
    if n < 1 or n > 3:
        raise ValueError("between one and three bonds")
    common = bonds[0].region
    for b in bonds[1:]:
        common = common.intersection(b.region)
    if len(common) == 0:
        raise ValueError("bonds must share a site")
    x = common.min_site()
    window = Region.of([s for b in bonds for s in b.region])
    grid = grid or SphereGrid(4)
    rng = np.random.default_rng(seed)
    rotations = [random_rotation(rng) for _ in range(rotation_samples)]
    xi = window.index(x)
    lhs_max = 0.0
    for configs, _ in _window_chunks(grid, len(window)):
        m = configs.shape[0]
        prods = np.empty((rotation_samples, m))
        logw = np.zeros((rotation_samples, m))
        base_vals = [pot.restrict(window, configs) for pot in bonds]
        for i, r in enumerate(rotations):
            rotated = rotate_site(configs, xi, r)
            term = np.ones(m)
            for pot, base in zip(bonds, base_vals):
                term = term * (base - pot.restrict(window, rotated))
            prods[i] = term
            if site_field is not None:
                logw[i] = -beta * site_field.restrict(window, rotated)
        weights = np.exp(logw - logw.max(axis=0, keepdims=True))
        weights /= weights.sum(axis=0, keepdims=True)
        averaged = (weights * prods).sum(axis=0)
        lhs_max = max(lhs_max, float(np.abs(averaged).max()))
    rhs = 2.0 ** n
    for pot in bonds:
        rhs *= classical_supnorm(pot)
    return lhs_max, rhs
