"""Heisenberg ring/chain Hamiltonians, open subsystems and field-dressed variants.

Energies are in units of the exchange coupling J (J = 1 by convention, kept as
an explicit scalar for clarity).  Sites are indexed 0-based in this API.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .operators import (
    ProductBasis,
    SparseHermitianOperator,
    field_term,
    heisenberg_bond,
    parse_spin,
    sector_two_m_values,
    spin_str,
    zero_operator,
)

RING = "ring"
CHAIN = "chain"


@dataclass(frozen=True)
class SpinSystem:
    """A ring or open chain of spins with uniform nearest-neighbour exchange."""

    topology: str
    site_two_s: tuple
    coupling: float = 1.0

    def __post_init__(self):
        if self.topology not in (RING, CHAIN):
            raise ValueError(f"unknown topology {self.topology!r}")
        n = len(self.site_two_s)
        if self.topology == RING and n < 3:
            raise ValueError("a ring needs at least 3 sites")
        if self.topology == CHAIN and n < 2:
            raise ValueError("a chain needs at least 2 sites")
        if any(int(t) <= 0 for t in self.site_two_s):
            raise ValueError("all spins must be > 0; model a spinless defect "
                             "by removing the site (chain topology)")

    @classmethod
    def ring(cls, n: int, spin, coupling: float = 1.0) -> "SpinSystem":
        return cls(RING, (parse_spin(spin),) * n, coupling)

    @classmethod
    def chain(cls, n: int, spin, coupling: float = 1.0) -> "SpinSystem":
        return cls(CHAIN, (parse_spin(spin),) * n, coupling)

    @classmethod
    def from_spins(cls, topology: str, spins, coupling: float = 1.0) -> "SpinSystem":
        return cls(topology, tuple(parse_spin(s) for s in spins), coupling)

    @property
    def n_sites(self) -> int:
        return len(self.site_two_s)

    def bonds(self) -> list:
        """Nearest-neighbour bonds as (i, j) pairs, 0-based."""
        n = self.n_sites
        pairs = [(i, i + 1) for i in range(n - 1)]
        if self.topology == RING:
            pairs.append((n - 1, 0))
        return pairs

    def describe(self) -> str:
        spins = {spin_str(t) for t in self.site_two_s}
        tag = spins.pop() if len(spins) == 1 else "mixed"
        return f"{self.topology} N={self.n_sites} s={tag}"


def defected_ring(n: int, base_spin, defect_site: int, defect_spin,
                  coupling: float = 1.0):
    """A homogeneous ring with one substituted spin.

    A spinless substitution (defect_spin = 0) removes the site, leaving an
    open chain.  Returns (system, labels) where labels[i] is the original
    0-based ring position of system site i.
    """
    base = parse_spin(base_spin)
    sub = parse_spin(defect_spin)
    if not 0 <= defect_site < n:
        raise ValueError("defect site out of range")
    if sub == 0:
        order = [(defect_site + 1 + i) % n for i in range(n - 1)]
        system = SpinSystem(CHAIN, (base,) * (n - 1), coupling)
        return system, order
    spins = [base] * n
    spins[defect_site] = sub
    system = SpinSystem(RING, tuple(spins), coupling)
    return system, list(range(n))


@dataclass(frozen=True)
class Arc:
    """A block of consecutive sites; wraps around rings, never around chains."""

    offset: int
    length: int

    def sites(self, system: SpinSystem) -> list:
        n = system.n_sites
        if not 1 <= self.length <= n - 1:
            raise ValueError("arc length must be in [1, N-1]")
        if not 0 <= self.offset < n:
            raise ValueError("arc offset out of range")
        if system.topology == CHAIN:
            if self.offset + self.length > n:
                raise ValueError("arc must not wrap on a chain")
            return list(range(self.offset, self.offset + self.length))
        return [(self.offset + i) % n for i in range(self.length)]


def complement_sites(system: SpinSystem, arc: Arc) -> list:
    """Sites outside the arc, starting right after the arc's last site."""
    inside = set(arc.sites(system))
    n = system.n_sites
    start = (arc.offset + arc.length) % n
    if system.topology == CHAIN:
        # keep chain order; the complement of a mid-chain arc is two segments
        return [i for i in list(range(start, n)) + list(range(0, arc.offset))
                if i not in inside]
    return [(start + i) % n for i in range(n - arc.length)]


@dataclass(frozen=True)
class FieldTerm:
    """An effective field b (energy units) acting on one subsystem site (local index)."""

    site: int
    b: tuple

    def vector(self) -> np.ndarray:
        return np.asarray(self.b, dtype=float)


def build_hamiltonian(system: SpinSystem,
                      sector_two_m: int | None = None) -> SparseHermitianOperator:
    """Full Heisenberg Hamiltonian of the system (N bonds for a ring, N-1 for a chain)."""
    basis = ProductBasis(system.site_two_s, sector_two_m)
    op = zero_operator(basis)
    for i, j in system.bonds():
        op = op + heisenberg_bond(basis, i, j, system.coupling)
    return op


def subsystem_bonds(system: SpinSystem, sites: list) -> list:
    """Bonds of the system with both endpoints inside `sites`, as local index pairs."""
    local = {site: k for k, site in enumerate(sites)}
    return [(local[i], local[j]) for i, j in system.bonds()
            if i in local and j in local]


def build_on_sites(system: SpinSystem, sites: list,
                   sector_two_m: int | None = None) -> SparseHermitianOperator:
    """Hamiltonian restricted to the given sites (only internal bonds kept)."""
    basis = ProductBasis([system.site_two_s[i] for i in sites], sector_two_m)
    op = zero_operator(basis)
    for i, j in subsystem_bonds(system, sites):
        op = op + heisenberg_bond(basis, i, j, system.coupling)
    return op


def build_subsystem(system: SpinSystem, arc: Arc,
                    sector_two_m: int | None = None) -> SparseHermitianOperator:
    """Open-chain Hamiltonian on the arc; the zero operator for a single site."""
    return build_on_sites(system, arc.sites(system), sector_two_m)


def dress_with_fields(h_sub: SparseHermitianOperator,
                      fields) -> SparseHermitianOperator:
    """H~ = H_sub + sum_k b_k . s_k with fields restricted to the boundary sites.

    The self-consistent construction only ever couples the first and last spin
    of a subsystem, so interior fields are rejected rather than silently
    accepted.
    """
    n = h_sub.basis.n_sites
    boundary = {0, n - 1}
    op = h_sub
    for f in fields:
        if f.site not in boundary:
            raise ValueError(f"field on interior site {f.site}; only the "
                             f"boundary sites {sorted(boundary)} may be dressed")
        op = op + field_term(h_sub.basis, f.site, f.vector())
    return op


def coupling_bonds(system: SpinSystem, arc: Arc) -> list:
    """Bonds crossing the bipartition (A = arc), as (site_in_A, site_in_B) pairs."""
    inside = set(arc.sites(system))
    out = []
    for i, j in system.bonds():
        if (i in inside) != (j in inside):
            out.append((i, j) if i in inside else (j, i))
    return out


__all__ = [
    "RING", "CHAIN", "SpinSystem", "Arc", "FieldTerm",
    "defected_ring", "complement_sites", "coupling_bonds",
    "build_hamiltonian", "build_subsystem", "build_on_sites",
    "subsystem_bonds", "dress_with_fields", "sector_two_m_values",
]
