"""Lattice geometry, spin representations and operator algebra on finite regions.

Sites are integer coordinate tuples ordered lexicographically; a region is a
sorted, duplicate-free tuple of sites.  Observables are dense complex matrices
attached to a region, with tensor legs ordered by the site order of the region
(one canonical convention so that operator equality is testable).  The single
site dimension ``d`` is uniform across a model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Iterable, Iterator, Mapping, Sequence

import numpy as np

Site = tuple  # integer coordinate tuple, e.g. (0,) or (1, 2)

#: default bound on matrix dimension for dense operations (~6 spin-1/2 sites)
DIMENSION_CAP = 4096

HERMITIAN_RTOL = 1e-12


class DimensionCapError(ValueError):
    """Raised when a dense matrix would exceed the configured dimension cap."""


def site(*coords: int) -> Site:
    return tuple(int(c) for c in coords)


@dataclass(frozen=True)
class Region:
    """Finite set of lattice sites, kept sorted and duplicate-free."""

    sites: tuple

    def __post_init__(self):
        sites = tuple(tuple(int(c) for c in s) for s in self.sites)
        if list(sites) != sorted(set(sites)):
            raise ValueError("region sites must be sorted and duplicate-free")
        if sites and len({len(s) for s in sites}) != 1:
            raise ValueError("all sites must share the lattice dimension")
        object.__setattr__(self, "sites", sites)

    @classmethod
    def of(cls, sites: Iterable[Site]) -> "Region":
        return cls(tuple(sorted(set(tuple(s) for s in sites))))

    def __len__(self) -> int:
        return len(self.sites)

    def __iter__(self) -> Iterator[Site]:
        return iter(self.sites)

    def __contains__(self, x) -> bool:
        return tuple(x) in self.sites

    def index(self, x: Site) -> int:
        return self.sites.index(tuple(x))

    def issubset(self, other: "Region") -> bool:
        return set(self.sites) <= set(other.sites)

    def union(self, other: "Region") -> "Region":
        return Region.of(self.sites + other.sites)

    def difference(self, other: "Region") -> "Region":
        drop = set(other.sites)
        return Region(tuple(s for s in self.sites if s not in drop))

    def intersection(self, other: "Region") -> "Region":
        keep = set(other.sites)
        return Region(tuple(s for s in self.sites if s in keep))

    def min_site(self) -> Site:
        if not self.sites:
            raise ValueError("empty region has no minimal site")
        return self.sites[0]

    def subsets(self) -> Iterator["Region"]:
        """All subsets, by increasing size then lexicographic order."""
        for r in range(len(self.sites) + 1):
            for combo in combinations(self.sites, r):
                yield Region(combo)


EMPTY_REGION = Region(())


def box_window(extents: Sequence[int]) -> Region:
    """Rectangular window {0..L1-1} x ... x {0..Lnu-1} as a Region."""
    if not extents or any(e < 1 for e in extents):
        raise ValueError("extents must be positive")
    grids = np.meshgrid(*[np.arange(e) for e in extents], indexing="ij")
    coords = np.stack([g.ravel() for g in grids], axis=1)
    return Region.of(tuple(map(int, row)) for row in coords)


@dataclass(frozen=True)
class SpinRep:
    """Spin-j representation; ``two_j`` is 2j, so the site dimension is 2j+1."""

    two_j: int

    def __post_init__(self):
        if self.two_j < 1:
            raise ValueError(f"invalid spin: two_j={self.two_j} < 1")

    @property
    def j(self) -> float:
        return self.two_j / 2.0

    @property
    def dim(self) -> int:
        return self.two_j + 1


@dataclass(frozen=True, eq=False)
class LocalOperator:
    """Dense complex matrix attached to a finite region.

    The matrix dimension is ``site_dim ** len(region)``; the empty region
    carries 1x1 matrices (scalars).  Tensor legs follow the site order of
    the region.
    """

    region: Region
    matrix: np.ndarray
    site_dim: int
    hermitian: bool = False

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=complex)
        dim = self.site_dim ** len(self.region)
        if mat.shape != (dim, dim):
            raise ValueError(
                f"matrix shape {mat.shape} does not match d^|region| = {dim}"
            )
        object.__setattr__(self, "matrix", mat)
        if self.hermitian:
            scale = float(np.linalg.norm(mat)) or 1.0
            if np.linalg.norm(mat - mat.conj().T) > HERMITIAN_RTOL * scale:
                raise ValueError("operator marked Hermitian fails the check")

    @classmethod
    def identity(cls, region: Region, site_dim: int) -> "LocalOperator":
        dim = site_dim ** len(region)
        return cls(region, np.eye(dim, dtype=complex), site_dim)

    @classmethod
    def zero(cls, region: Region, site_dim: int) -> "LocalOperator":
        dim = site_dim ** len(region)
        return cls(region, np.zeros((dim, dim), dtype=complex), site_dim)

    def dagger(self) -> "LocalOperator":
        return LocalOperator(self.region, self.matrix.conj().T, self.site_dim)

    def is_hermitian(self, rtol: float = HERMITIAN_RTOL) -> bool:
        scale = float(np.linalg.norm(self.matrix)) or 1.0
        return float(np.linalg.norm(self.matrix - self.matrix.conj().T)) <= rtol * scale

    def norm(self) -> float:
        return operator_norm(self)

    def __add__(self, other: "LocalOperator") -> "LocalOperator":
        a, b = _on_common_region(self, other)
        return LocalOperator(a.region, a.matrix + b.matrix, a.site_dim)

    def __sub__(self, other: "LocalOperator") -> "LocalOperator":
        a, b = _on_common_region(self, other)
        return LocalOperator(a.region, a.matrix - b.matrix, a.site_dim)

    def __neg__(self) -> "LocalOperator":
        return LocalOperator(self.region, -self.matrix, self.site_dim)

    def __mul__(self, c) -> "LocalOperator":
        return LocalOperator(self.region, self.matrix * complex(c), self.site_dim)

    __rmul__ = __mul__

    def __matmul__(self, other: "LocalOperator") -> "LocalOperator":
        a, b = _on_common_region(self, other)
        return LocalOperator(a.region, a.matrix @ b.matrix, a.site_dim)


def _on_common_region(a: LocalOperator, b: LocalOperator):
    if a.site_dim != b.site_dim:
        raise ValueError("operators have different site dimensions")
    if a.region == b.region:
        return a, b
    target = a.region.union(b.region)
    return embed(a, target), embed(b, target)


def embed(a: LocalOperator, target: Region) -> LocalOperator:
    """Embed ``a`` into a larger region as a (x) 1, permuting tensor legs to
    the site order of ``target``.  Unital *-homomorphism, isometric."""
    if not a.region.issubset(target):
        raise ValueError(f"{a.region} is not contained in {target}")
    d, k, m = a.site_dim, len(a.region), len(target)
    if k == m:
        return a
    if d ** m > DIMENSION_CAP:
        raise DimensionCapError(f"embedding dimension {d ** m} exceeds cap")
    big = np.kron(a.matrix, np.eye(d ** (m - k), dtype=complex))
    # leg order of `big`: sites of a.region, then the remaining target sites
    current = list(a.region) + [x for x in target if x not in a.region]
    perm = [current.index(x) for x in target]
    tens = big.reshape((d,) * (2 * m))
    tens = tens.transpose(perm + [m + p for p in perm])
    return LocalOperator(target, tens.reshape(d ** m, d ** m), d)


def operator_norm(a: LocalOperator, cap: int = DIMENSION_CAP) -> float:
    """Spectral norm; max |eigenvalue| for Hermitian input, else the largest
    singular value."""
    dim = a.matrix.shape[0]
    if dim > cap:
        raise DimensionCapError(f"dimension {dim} exceeds cap {cap}")
    if dim == 0:
        return 0.0
    if a.is_hermitian():
        return float(np.abs(np.linalg.eigvalsh(a.matrix)).max())
    return float(np.linalg.norm(a.matrix, 2))


def spin_matrices(rep: SpinRep, at: Site = (0,)) -> tuple:
    """Standard spin-j matrices (S1, S2, S3) on a single site.

    Condon-Shortley phases: S3 = diag(j, j-1, ..., -j), real nonnegative
    ladder coefficients.  They satisfy [S1, S2] = i S3 (and cyclic) and
    S1^2 + S2^2 + S3^2 = j(j+1) I.
    """
    jv = rep.j
    d = rep.dim
    m = jv - np.arange(d)  # j, j-1, ..., -j
    s3 = np.diag(m).astype(complex)
    # raising operator: <m+1| S+ |m> = sqrt(j(j+1) - m(m+1))
    ladder = np.sqrt(jv * (jv + 1) - m[1:] * (m[1:] + 1))
    sp = np.zeros((d, d), dtype=complex)
    sp[np.arange(d - 1), np.arange(1, d)] = ladder
    sm = sp.conj().T
    s1 = (sp + sm) / 2
    s2 = (sp - sm) / 2j
    reg = Region((tuple(at),))
    return (
        LocalOperator(reg, s1, d, hermitian=True),
        LocalOperator(reg, s2, d, hermitian=True),
        LocalOperator(reg, s3, d, hermitian=True),
    )


class InteractionFamily:
    """Map from finite regions to Hermitian local operators.

    ``psi(x)`` is the single-site part, ``phibar`` the multilocal part
    (terms on regions of two or more sites); the empty region never carries
    a term.
    """

    def __init__(self, terms: Mapping[Region, LocalOperator], site_dim: int):
        self.site_dim = site_dim
        clean = {}
        for reg, op in terms.items():
            if len(reg) == 0:
                raise ValueError("the empty region cannot carry a potential")
            if op.region != reg:
                raise ValueError("term stored under a region it does not act on")
            if op.site_dim != site_dim:
                raise ValueError("term has inconsistent site dimension")
            if not op.is_hermitian():
                raise ValueError(f"potential on {reg} is not Hermitian")
            if np.any(op.matrix):
                clean[reg] = op
        self.terms = clean
        self._norm_cache = {}

    def term_norm(self, region: Region) -> float:
        """Cached spectral norm of the stored term (0 when absent)."""
        if region not in self._norm_cache:
            op = self.terms.get(region)
            self._norm_cache[region] = operator_norm(op) if op is not None else 0.0
        return self._norm_cache[region]

    def psi_norm(self, x: Site) -> float:
        return self.term_norm(Region((tuple(x),)))

    def __iter__(self):
        return iter(sorted(self.terms.items(), key=lambda kv: (len(kv[0]), kv[0].sites)))

    def psi(self, x: Site) -> LocalOperator:
        reg = Region((tuple(x),))
        return self.terms.get(reg, LocalOperator.zero(reg, self.site_dim))

    def phibar(self, region: Region) -> LocalOperator:
        if len(region) < 2:
            return LocalOperator.zero(region, self.site_dim)
        return self.terms.get(region, LocalOperator.zero(region, self.site_dim))

    def multilocal(self) -> dict:
        return {r: op for r, op in self.terms.items() if len(r) >= 2}

    def singletons(self) -> dict:
        return {r: op for r, op in self.terms.items() if len(r) == 1}

    def sites(self) -> Region:
        out = EMPTY_REGION
        for r in self.terms:
            out = out.union(r)
        return out

    def scaled_multilocal(self, c: float) -> "InteractionFamily":
        terms = dict(self.singletons())
        for r, op in self.multilocal().items():
            terms[r] = LocalOperator(r, c * op.matrix, self.site_dim)
        return InteractionFamily(terms, self.site_dim)


def graph_distance(x: Site, y: Site) -> int:
    return int(sum(abs(a - b) for a, b in zip(x, y)))


def _bonds(window: Region):
    sites = list(window)
    for i, x in enumerate(sites):
        for y in sites[i + 1:]:
            if graph_distance(x, y) == 1:
                yield x, y


def heisenberg_bond(rep: SpinRep, delta: float, x: Site, y: Site) -> LocalOperator:
    """delta (S1 S1 + S2 S2) + S3 S3 on the bond {x, y}."""
    s1, s2, s3 = spin_matrices(rep)
    reg = Region.of([x, y])
    acc = LocalOperator.zero(reg, rep.dim)
    for s, w in ((s1, delta), (s2, delta), (s3, 1.0)):
        left = LocalOperator(Region((tuple(x),)), s.matrix, rep.dim)
        right = LocalOperator(Region((tuple(y),)), s.matrix, rep.dim)
        acc = acc + w * (embed(left, reg) @ embed(right, reg))
    return acc


def build_heisenberg(coupling, delta: float, rep: SpinRep, window: Region) -> InteractionFamily:
    """Anisotropic Heisenberg interaction on nearest-neighbour pairs of a
    finite window: Phi_{x,y} = -J(x,y) (delta (S1 S1 + S2 S2) + S3 S3).
    No single-site part."""
    jfun = coupling if callable(coupling) else (lambda x, y, c=coupling: c)
    terms = {}
    for x, y in _bonds(window):
        bond = heisenberg_bond(rep, delta, x, y)
        terms[bond.region] = LocalOperator(
            bond.region, -jfun(x, y) * bond.matrix, rep.dim
        )
    return InteractionFamily(terms, rep.dim)


def build_ising_staggered(coupling: float, field: float, rep: SpinRep, window: Region) -> InteractionFamily:
    """Ising bonds J S3 S3 plus a staggered field (-1)^{d(x,0)} B S3, where d
    is the graph distance to the origin."""
    _, _, s3 = spin_matrices(rep)
    origin = tuple(0 for _ in next(iter(window), (0,)))
    terms = {}
    for x, y in _bonds(window):
        reg = Region.of([x, y])
        left = embed(LocalOperator(Region((x,)), s3.matrix, rep.dim), reg)
        right = embed(LocalOperator(Region((y,)), s3.matrix, rep.dim), reg)
        terms[reg] = coupling * (left @ right)
    if field != 0.0:
        for x in window:
            sign = -1.0 if graph_distance(x, origin) % 2 else 1.0
            reg = Region((x,))
            terms[reg] = LocalOperator(reg, sign * field * s3.matrix, rep.dim)
    return InteractionFamily(terms, rep.dim)


@dataclass(frozen=True)
class Motif:
    """One translation-invariant interaction term, anchored at the origin.

    Either a bond operator or a precomputed scalar norm (or both, in which
    case they must agree) describes the term's strength.
    """

    region: Region
    coefficient: float
    operator: LocalOperator = None
    bond_norm: float = None

    def __post_init__(self):
        origin = tuple(0 for _ in self.region.sites[0])
        if origin not in self.region:
            raise ValueError("motif region must contain the origin")
        if self.operator is None and self.bond_norm is None:
            raise ValueError("motif needs an operator or a scalar norm")
        if not math.isfinite(self.coefficient):
            raise ValueError("motif coefficient must be finite")

    def scalar_norm(self) -> float:
        """|coefficient| x bond norm; operator and supplied norms must agree."""
        if self.operator is not None:
            from_op = operator_norm(self.operator)
            if self.bond_norm is not None and not math.isclose(
                from_op, self.bond_norm, rel_tol=1e-10, abs_tol=1e-12
            ):
                raise ValueError(
                    f"supplied norm {self.bond_norm} != operator norm {from_op}"
                )
            return abs(self.coefficient) * from_op
        return abs(self.coefficient) * self.bond_norm

    def translate(self, v: Site) -> Region:
        return Region.of(tuple(c + dv for c, dv in zip(s, v)) for s in self.region)


@dataclass(frozen=True)
class TIInteractionSpec:
    """Translation-invariant interaction on Z^nu given by motifs.

    ``psi_site_norm`` is the uniform single-site potential norm ||Psi_x||
    entering the zeta-weighted norms (0 when there is no single-site part).
    """

    nu: int
    motifs: tuple
    psi_site_norm: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "motifs", tuple(self.motifs))
        if self.nu < 1:
            raise ValueError("lattice dimension must be >= 1")
        if self.psi_site_norm < 0:
            raise ValueError("psi_site_norm must be nonnegative")

    def window_family(self, window: Region, psi_builder: Callable = None) -> InteractionFamily:
        """Instantiate the multilocal part on a finite window by translating
        every motif whose translate fits inside the window.  Motifs must carry
        operators.  ``psi_builder(x) -> LocalOperator`` optionally supplies
        single-site terms."""
        terms = {}
        site_dim = None
        for motif in self.motifs:
            if motif.operator is None:
                raise ValueError("window instantiation needs motif operators")
            site_dim = motif.operator.site_dim
            for v in window:
                reg = motif.translate(v)
                if not reg.issubset(window):
                    continue
                shifted = LocalOperator(
                    reg, motif.coefficient * motif.operator.matrix, site_dim
                )
                if reg in terms:
                    terms[reg] = terms[reg] + shifted
                else:
                    terms[reg] = shifted
        if psi_builder is not None:
            for x in window:
                op = psi_builder(x)
                if op is not None and np.any(op.matrix):
                    terms[Region((x,))] = op
                    site_dim = op.site_dim
        if site_dim is None:
            raise ValueError("empty specification")
        return InteractionFamily(terms, site_dim)


def _unit_vectors(nu: int):
    return [tuple(1 if k == i else 0 for k in range(nu)) for i in range(nu)]


def heisenberg_ti(nu: int, coupling: float, delta: float, rep: SpinRep) -> TIInteractionSpec:
    """Translation-invariant anisotropic Heisenberg model on Z^nu."""
    origin = tuple(0 for _ in range(nu))
    motifs = []
    for e in _unit_vectors(nu):
        bond = heisenberg_bond(rep, delta, origin, e)
        motifs.append(Motif(bond.region, -coupling, operator=bond))
    return TIInteractionSpec(nu, tuple(motifs))


def ising_staggered_ti(nu: int, coupling: float, field: float, rep: SpinRep) -> TIInteractionSpec:
    """Translation-invariant Ising bonds with a staggered field on Z^nu.

    The staggering only flips signs, so ||Psi_x|| = |B| j uniformly.
    """
    _, _, s3 = spin_matrices(rep)
    origin = tuple(0 for _ in range(nu))
    motifs = []
    for e in _unit_vectors(nu):
        reg = Region.of([origin, e])
        left = embed(LocalOperator(Region((origin,)), s3.matrix, rep.dim), reg)
        right = embed(LocalOperator(Region((e,)), s3.matrix, rep.dim), reg)
        motifs.append(Motif(reg, coupling, operator=left @ right))
    return TIInteractionSpec(nu, tuple(motifs), psi_site_norm=abs(field) * rep.j)


def classical_heisenberg_ti(nu: int, coupling: float, delta: float) -> TIInteractionSpec:
    """Classical anisotropic Heisenberg model on Z^nu via scalar bond norms:
    sup |delta (s1 s1 + s2 s2) + s3 s3| = max(|delta|, 1) over pairs of unit
    vectors."""
    origin = tuple(0 for _ in range(nu))
    motifs = []
    for e in _unit_vectors(nu):
        reg = Region.of([origin, e])
        motifs.append(Motif(reg, -coupling, bond_norm=max(abs(delta), 1.0)))
    return TIInteractionSpec(nu, tuple(motifs))
