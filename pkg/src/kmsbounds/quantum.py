"""Finite-volume exact dynamics, Gibbs states and the Kirkwood-Salzburg check.

Everything here is dense linear algebra at desk scale: Hermitian matrix
exponentials go through eigendecompositions, time-ordered integrals through
iterated Gauss-Legendre rules on the ordered simplex, and the constrained
region sums of the interaction-picture expansion enumerate the finitely many
regions in the interaction's support.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from itertools import product as iterproduct
from typing import Mapping, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss

from .centering import (
    NotCenteredError,
    ReferenceStates,
    centering_residual,
    decompose_known_free,
    haar_random_unitary,
    partial_expectation,
)
from .lattice import (
    EMPTY_REGION,
    InteractionFamily,
    LocalOperator,
    Region,
    Site,
    embed,
    operator_norm,
)
from .norms import NormParams, norm_eps_zeta, psi_norm_sum


class ConvergenceWarning(UserWarning):
    """Emitted when a truncated expansion runs outside its convergence regime."""


@dataclass
class FiniteSystem:
    """A finite lattice with an interaction supported inside it."""

    gamma: Region
    fam: InteractionFamily
    beta: float

    def __post_init__(self):
        from .lattice import DIMENSION_CAP, DimensionCapError

        if self.fam.site_dim ** len(self.gamma) > DIMENSION_CAP:
            raise DimensionCapError(
                f"lattice dimension {self.fam.site_dim ** len(self.gamma)} "
                f"exceeds the dense cap"
            )
        for region in self.fam.terms:
            if not region.issubset(self.gamma):
                raise ValueError(f"term on {region} escapes the lattice {self.gamma}")

    @property
    def site_dim(self) -> int:
        return self.fam.site_dim

    def reference_states(self) -> ReferenceStates:
        return ReferenceStates.from_interaction(self.fam, self.gamma, self.beta)


def hamiltonian(sys: FiniteSystem, window: Region = None) -> LocalOperator:
    """Sum of all potential terms supported inside the window (default: the
    whole lattice), embedded and Hermitian."""
    window = sys.gamma if window is None else window
    if not window.issubset(sys.gamma):
        raise ValueError("window escapes the lattice")
    acc = LocalOperator.zero(window, sys.site_dim)
    for region, op in sys.fam.terms.items():
        if region.issubset(window):
            acc = acc + embed(op, window)
    return acc


def _eigh(op: LocalOperator):
    return np.linalg.eigh(op.matrix)


def _expm_factor(w: np.ndarray, v: np.ndarray, z: complex) -> np.ndarray:
    return (v * np.exp(z * w)) @ v.conj().T


def gibbs_expectation(sys: FiniteSystem, a: LocalOperator) -> complex:
    """tr(e^{-beta H} A) / tr(e^{-beta H}) on the full finite lattice."""
    h = hamiltonian(sys)
    w, v = _eigh(h)
    weights = np.exp(-sys.beta * (w - w.min()))
    weights /= weights.sum()
    a_full = embed(a, sys.gamma)
    return complex((weights * np.diagonal(v.conj().T @ a_full.matrix @ v)).sum())


def gibbs_state_diagonal(sys: FiniteSystem):
    """Eigenbasis and normalized Boltzmann weights of the full Hamiltonian,
    for callers evaluating many expectations."""
    h = hamiltonian(sys)
    w, v = _eigh(h)
    weights = np.exp(-sys.beta * (w - w.min()))
    weights /= weights.sum()
    return v, weights


def evolve(a: LocalOperator, h: LocalOperator, t: complex) -> LocalOperator:
    """e^{itH} A e^{-itH} for Hermitian H and complex time t.

    Real t is a unitary conjugation; t = i sigma is the similarity by
    e^{-sigma H} and e^{sigma H} used for imaginary-time continuation.
    """
    if not h.is_hermitian():
        raise ValueError("generator must be Hermitian")
    target = a.region.union(h.region)
    a_e, h_e = embed(a, target), embed(h, target)
    w, v = _eigh(h_e)
    left = _expm_factor(w, v, 1j * t)
    right = _expm_factor(w, v, -1j * t)
    return LocalOperator(target, left @ a_e.matrix @ right, a.site_dim)


def single_site_evolution(fam: InteractionFamily, region: Region, t: complex) -> tuple:
    """Factors (e^{it Psi_region}, e^{-it Psi_region}) built from single-site
    eigendecompositions (the single-site Hamiltonian is a sum of commuting
    one-site terms, so the exponential factorizes over sites)."""
    d = fam.site_dim
    eye = np.eye(d, dtype=complex)
    left = np.array([[1.0]], dtype=complex)
    right = np.array([[1.0]], dtype=complex)
    for x in region:
        psi = fam.psi(x).matrix
        if not np.any(psi):
            left = np.kron(left, eye)
            right = np.kron(right, eye)
            continue
        w, v = np.linalg.eigh(psi)
        left = np.kron(left, (v * np.exp(1j * t * w)) @ v.conj().T)
        right = np.kron(right, (v * np.exp(-1j * t * w)) @ v.conj().T)
    return left, right


def tau_psi(a: LocalOperator, fam: InteractionFamily, t: complex) -> LocalOperator:
    """Interaction-picture (single-site) evolution of ``a``."""
    left, right = single_site_evolution(fam, a.region, t)
    return LocalOperator(a.region, left @ a.matrix @ right, a.site_dim)


def generator_delta(a: LocalOperator, fam: InteractionFamily) -> LocalOperator:
    """i sum over X meeting the support of a of [Phi_X, A]; satisfies
    delta(A)^dagger = delta(A^dagger)."""
    out_region = a.region
    touching = []
    for region, op in fam.terms.items():
        if len(region.intersection(a.region)) > 0:
            touching.append(op)
            out_region = out_region.union(region)
    acc = LocalOperator.zero(out_region, a.site_dim)
    a_e = embed(a, out_region)
    for op in touching:
        op_e = embed(op, out_region)
        acc = acc + 1j * (op_e @ a_e - a_e @ op_e)
    return acc


def delta_power_bound(fam: InteractionFamily, lam: Region, a_norm: float,
                      n: int, eps: float, zeta: float) -> float:
    """Norm bound on the n-th power of the generator applied to an observable
    on ``lam``:

        ||A|| e^{zeta ||Psi||_lam} e^{eps |lam|} n! 2^n zeta^{-n}
            sum_{k=0}^{n} ((zeta/eps) ||Phi_bar||_{eps, zeta})^k
    """
    if zeta <= 0 or eps <= 0:
        raise ValueError("eps and zeta must be positive")
    q = (zeta / eps) * norm_eps_zeta(fam, NormParams(eps, zeta))
    geom = sum(q ** k for k in range(n + 1))
    return (
        a_norm
        * math.exp(zeta * psi_norm_sum(fam, lam))
        * math.exp(eps * len(lam))
        * math.factorial(n)
        * 2.0 ** n
        * zeta ** (-n)
        * geom
    )


@dataclass(frozen=True)
class SimplexQuadrature:
    """Iterated Gauss-Legendre rule on the ordered simplex
    0 <= s_n <= ... <= s_1 <= upper; weights are positive and sum to
    upper^n / n!."""

    points: int = 8

    def rule(self, order: int, upper: float):
        if order < 1:
            raise ValueError("order must be >= 1")
        x, w = leggauss(self.points)
        u = (x + 1.0) / 2.0
        wu = w / 2.0
        nodes = np.empty((self.points ** order, order))
        weights = np.empty(self.points ** order)
        for row, combo in enumerate(iterproduct(range(self.points), repeat=order)):
            s_prev = upper
            wgt = 1.0
            for axis, idx in enumerate(combo):
                s = s_prev * u[idx]
                wgt *= wu[idx] * s_prev
                nodes[row, axis] = s
                s_prev = s
            weights[row] = wgt
        return nodes, weights


def constrained_chains(fam: InteractionFamily, n: int, start: Region):
    """Tuples (X_1, ..., X_n) of multilocal support regions with the growing
    overlap constraint: X_1 meets `start`, and each X_j meets the union of
    `start` with the earlier X's."""
    support = sorted(fam.multilocal().keys(), key=lambda r: r.sites)
    out = []

    def rec(prefix, grown):
        if len(prefix) == n:
            out.append(tuple(prefix))
            return
        for region in support:
            if len(region.intersection(grown)) > 0:
                rec(prefix + [region], grown.union(region))

    rec([], start)
    return out


def _dyson_modes(t: complex):
    """Split a real or purely imaginary time into (upper limit, per-order
    coefficient base, imaginary flag)."""
    t = complex(t)
    if abs(t.imag) < 1e-300:
        return t.real, 1j, False
    if abs(t.real) < 1e-300:
        return t.imag, -1.0, True
    raise ValueError("time must be real or purely imaginary")


def dyson_truncated(a: LocalOperator, sys: FiniteSystem, t: complex, order: int,
                    quad: SimplexQuadrature = SimplexQuadrature()) -> LocalOperator:
    """Partial sum of the interaction-picture expansion around the single-site
    dynamics, through the given order.

    The innermost commutator pairs the first chain region with the largest
    time; each multilocal factor enters at its own interaction-picture time
    and the observable evolves freely at the full time.  Warns (and still
    returns the truncation) when no weight parameter certifies convergence.
    """
    upper, coeff_base, imaginary = _dyson_modes(t)
    lam = a.region
    _warn_if_outside_regime(sys.fam, abs(upper))

    def picture(op, s):
        return tau_psi(op, sys.fam, 1j * s if imaginary else s)

    total = embed(picture(a, upper), sys.gamma)
    for n in range(1, order + 1):
        chains = constrained_chains(sys.fam, n, lam)
        if not chains:
            break
        nodes, weights = quad.rule(n, upper)
        acc = LocalOperator.zero(sys.gamma, sys.site_dim)
        free = embed(picture(a, upper), sys.gamma)
        for chain in chains:
            terms = [sys.fam.terms[reg] for reg in chain]
            for s_row, wgt in zip(nodes, weights):
                current = free
                for ell in range(n):
                    b = embed(picture(terms[ell], s_row[ell]), sys.gamma)
                    current = b @ current - current @ b
                acc = acc + wgt * current
        total = total + (coeff_base ** n) * acc
    return total


def _warn_if_outside_regime(fam: InteractionFamily, duration: float) -> None:
    for eps in np.arange(0.1, 5.01, 0.1):
        if 2 * duration * norm_eps_zeta(fam, NormParams(eps, 2 * duration)) < eps:
            return
    warnings.warn(
        "no weight parameter certifies convergence at this time; "
        "returning the bare truncation",
        ConvergenceWarning,
        stacklevel=3,
    )


def kms_residual(sys: FiniteSystem, a: LocalOperator, b: LocalOperator) -> float:
    """|omega(A tau_{i beta} B) - omega(B A)| for the finite Gibbs state;
    zero up to roundoff by cyclicity of the trace."""
    h = hamiltonian(sys)
    evolved = evolve(b, h, 1j * sys.beta)
    lhs = gibbs_expectation(sys, a @ evolved)
    rhs = gibbs_expectation(sys, b @ a)
    return abs(lhs - rhs)


def state_residual(sys: FiniteSystem, state_weights, state_basis,
                   a: LocalOperator, b: LocalOperator) -> float:
    """Same functional evaluated in an arbitrary state given by its
    eigenbasis and weights (used to show mismatched states fail the check)."""
    h = hamiltonian(sys)
    evolved = evolve(b, h, 1j * sys.beta)

    def expect(op):
        full = embed(op, sys.gamma).matrix
        return complex(
            (state_weights * np.diagonal(state_basis.conj().T @ full @ state_basis)).sum()
        )

    return abs(expect(a @ evolved) - expect(b @ a))


def lemma_sum_check(alpha: Mapping[Region, float], lam: Region, n: int, eps: float):
    """Exact constrained chain sum against its combinatorial bound.

    Returns (lhs, rhs) with
      lhs = sum over constrained chains of prod alpha_{X_j},
      rhs = n! eps^{-n} e^{eps |lam|} (sup_x sum_{X : x} e^{eps(|X|-1)} alpha_X)^n.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    support = [(r, w) for r, w in alpha.items() if w != 0.0]
    lhs = 0.0

    def rec(depth, grown, weight):
        nonlocal lhs
        if depth == n:
            lhs += weight
            return
        for region, w in support:
            if len(region.intersection(grown)) > 0:
                rec(depth + 1, grown.union(region), weight * w)

    rec(0, lam, 1.0)
    sites = EMPTY_REGION
    for region, _ in support:
        sites = sites.union(region)
    site_sup = 0.0
    for x in sites:
        s = sum(
            math.exp(eps * (len(r) - 1)) * w for r, w in support if x in r
        )
        site_sup = max(site_sup, s)
    rhs = (
        math.factorial(n)
        * eps ** (-n)
        * math.exp(eps * len(lam))
        * site_sup ** n
    )
    return lhs, rhs


def ks_kernel(sys: FiniteSystem, x: Site, chain: Sequence[Region],
              times: Sequence[float]) -> LocalOperator:
    """Exact unitary average of the nested-commutator action on the dressed
    site factor, reduced to a 2^n-term expansion through the single-site
    reference expectation at ``x`` (no Monte-Carlo integration).

    With B_l the multilocal factor of the chain at interaction-picture time
    i s_l, the result is

        sum over subsets of factors:  (+-) eta_x(B_n^... B_1^...) B_1^... B_n^...,

    where each factor appears on exactly one side.  The norm never exceeds
    2^n prod_l e^{2 beta ||Psi||_{X_l}} ||Phi_bar_{X_l}||.
    """
    n = len(chain)
    if n < 1 or n > 3:
        raise ValueError("chain length must be between 1 and 3")
    if len(times) != n:
        raise ValueError("one time per chain region required")
    if any(s < 0 or s > sys.beta * (1 + 1e-12) for s in times):
        raise ValueError("interaction-picture times must lie in [0, beta]")
    x = tuple(x)
    if x not in chain[0]:
        raise ValueError("the first chain region must contain the site")
    grown = Region((x,))
    for region in chain:
        if len(region.intersection(grown)) == 0:
            raise ValueError("chain violates the overlap constraint")
        grown = grown.union(region)
    eta = sys.reference_states()
    out_region = grown
    factors = [
        embed(tau_psi(sys.fam.terms[reg], sys.fam, 1j * s), out_region)
        for reg, s in zip(chain, times)
    ]
    identity = LocalOperator.identity(out_region, sys.site_dim)
    acc = LocalOperator.zero(out_region, sys.site_dim)
    for mask in iterproduct((0, 1), repeat=n):
        left = identity
        for ell in reversed(range(n)):
            if mask[ell]:
                left = left @ factors[ell]
        averaged = embed(partial_expectation(left, Region((x,)), eta), out_region)
        right = identity
        for ell in range(n):
            if not mask[ell]:
                right = right @ factors[ell]
        sign = -1.0 if (n - sum(mask)) % 2 else 1.0
        acc = acc + sign * (averaged @ right)
    bound = 2.0 ** n
    for reg in chain:
        bound *= math.exp(2 * sys.beta * psi_norm_sum(sys.fam, reg)) * sys.fam.term_norm(reg)
    if operator_norm(acc) > bound * (1.0 + 1e-9):
        raise AssertionError("kernel norm bound violated")
    return acc


def ks_kernel_norm_bound(sys: FiniteSystem, chain: Sequence[Region]) -> float:
    bound = 2.0 ** len(chain)
    for reg in chain:
        bound *= math.exp(2 * sys.beta * psi_norm_sum(sys.fam, reg)) * sys.fam.term_norm(reg)
    return bound


def ks_kernel_haar_mc(sys: FiniteSystem, x: Site, region: Region, time: float,
                      samples: int, seed: int):
    """Monte-Carlo evaluation of the order-one kernel by sampling Haar
    unitaries at the site: mean of U* [B, e^{-beta Psi_x} U] / c with
    the normalizer c = tr e^{-beta Psi_x} / d.

    Returns (mean matrix on the region, aggregated standard error) so the
    exact expansion can be checked to a few sigma.
    """
    x = tuple(x)
    if x not in region:
        raise ValueError("site must lie in the region")
    d = sys.site_dim
    rng = np.random.default_rng(seed)
    psi = sys.fam.psi(x).matrix
    w, v = np.linalg.eigh(psi)
    damp = (v * np.exp(-sys.beta * w)) @ v.conj().T
    normalizer = np.trace(damp).real / d
    b = embed(tau_psi(sys.fam.terms[region], sys.fam, 1j * time), region)
    dressed = embed(LocalOperator(Region((x,)), damp, d), region)
    dim = d ** len(region)
    draws = np.empty((samples, dim, dim), dtype=complex)
    for i in range(samples):
        u_site = haar_random_unitary(d, rng)
        u = embed(LocalOperator(Region((x,)), u_site, d), region)
        m = b @ dressed @ u - dressed @ u @ b
        draws[i] = (u.dagger() @ m).matrix / normalizer
    mean = draws.mean(axis=0)
    if samples > 1:
        var = draws.var(axis=0, ddof=1) / samples
        sigma = math.sqrt(float(np.abs(var).sum()))
    else:
        sigma = math.inf
    return mean, sigma


@dataclass
class KSReport:
    """Truncation residuals of the linear (Kirkwood-Salzburg style) equation
    for one centered test element."""

    region: Region
    omega: float
    residuals: dict            # order N -> |omega(A~) - partial sum through N|
    telescoping_error: float   # worst |sum of component expectations - omega(A~ K)|


def ks_residual(sys: FiniteSystem, test_elems: Sequence[LocalOperator], order: int,
                quad: SimplexQuadrature = SimplexQuadrature()) -> list:
    """Check the centered-functional equation on the exact finite Gibbs state.

    For each centered element the expectation should be reproduced by the
    alternating sum over constrained chains of simplex-integrated component
    expectations; the residual decays geometrically with the truncation order
    inside the subcritical regime.
    """
    eta = sys.reference_states()
    basis, weights = gibbs_state_diagonal(sys)

    def om(op: LocalOperator) -> complex:
        full = embed(op, sys.gamma).matrix
        return complex((weights * np.diagonal(basis.conj().T @ full @ basis)).sum())

    reports = []
    for elem in test_elems:
        scale = max(operator_norm(elem), 1.0)
        if centering_residual(elem, eta) > 1e-10 * scale:
            raise NotCenteredError("test element is not centered on its region")
        lam = elem.region
        x = lam.min_site()
        contributions = {}
        telescope = 0.0
        for n in range(1, order + 1):
            chains = constrained_chains(sys.fam, n, Region((x,)))
            total = 0.0 + 0.0j
            nodes, wgts = quad.rule(n, sys.beta)
            for chain in chains:
                active = EMPTY_REGION
                for reg in chain:
                    active = active.union(reg)
                for s_row, wgt in zip(nodes, wgts):
                    kernel = ks_kernel(sys, x, chain, list(s_row))
                    dressed = elem @ kernel
                    dec = decompose_known_free(dressed, active, eta)
                    comp_sum = sum(om(op) for op in dec.components.values())
                    telescope = max(telescope, abs(comp_sum - om(dressed)))
                    total += wgt * comp_sum
            contributions[n] = (-1.0) ** (n + 1) * total
        target = om(elem)
        residuals = {}
        partial = 0.0 + 0.0j
        for n in range(1, order + 1):
            partial += contributions.get(n, 0.0)
            residuals[n] = abs(target - partial)
        reports.append(
            KSReport(
                region=lam,
                omega=float(target.real),
                residuals=residuals,
                telescoping_error=telescope,
            )
        )
    return reports
