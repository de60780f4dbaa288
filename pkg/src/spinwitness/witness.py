"""Witness products: per-site disentangling thresholds, verdicts, proof-support
quantities and thermal crossings.

Site indices in this module are 0-based; tables carry the original ring
positions even when a spinless substitution reduces the ring to a chain.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import scipy.linalg

from .eigensolvers import (
    SECTOR_DENSE_LIMIT,
    SolverError,
    dense_spectrum,
    sectored_ground_state,
)
from .hamiltonians import (
    Arc,
    CHAIN,
    RING,
    SpinSystem,
    build_hamiltonian,
    build_on_sites,
    defected_ring,
    subsystem_bonds,
)
from .operators import (
    ProductBasis,
    parse_spin,
    sector_two_m_values,
    spin_str,
    total_spin_squared,
)
from .scf import CollinearChainSolver


@dataclass
class ThresholdTable:
    """Per-site disentangling costs E_bs^k - E_0 for one system."""

    label: str
    e0: float
    entries: list  # (site, ebs_k, cost); site is the original ring position
    defect_site: int | None = None

    def cost(self, site: int) -> float:
        for k, _, c in self.entries:
            if k == site:
                return c
        raise KeyError(f"no threshold for site {site}")

    def threshold(self, site: int) -> float:
        for k, e, _ in self.entries:
            if k == site:
                return e
        raise KeyError(f"no threshold for site {site}")

    def min_site(self):
        """Site with the lowest threshold (deterministic tie-break on index)."""
        best = min(self.entries, key=lambda e: (e[1], e[0]))
        return best[0], best[1]


@dataclass
class Verdict:
    """Which spins a measured exchange energy certifies as entangled."""

    measured_energy: float
    sites_provably_entangled: list
    multipartite_detected: bool


def ground_energy(system: SpinSystem, seed: int = 42) -> float:
    """Global ground energy via Sz-sector blocking."""
    r = sectored_ground_state(
        lambda tm: build_hamiltonian(system, tm),
        sector_two_m_values(system.site_two_s),
        seed=seed, use_flip_symmetry=True)
    return r.energy


def single_site_threshold(system: SpinSystem, k: int, seed: int = 42) -> float:
    """E_bs^k: minimum biseparable energy when only site k is factored out.

    Equals the ground energy of the remaining sites dressed with a z-field of
    magnitude s_k on the spins that were adjacent to k.
    """
    n = system.n_sites
    if not 0 <= k < n:
        raise ValueError("site out of range")
    neighbours = sorted({i for i, j in system.bonds() if j == k}
                        | {j for i, j in system.bonds() if i == k})
    rest = [i for i in range(n) if i != k]
    local = {site: idx for idx, site in enumerate(rest)}
    bonds = subsystem_bonds(system, rest)
    s_k = system.site_two_s[k] / 2.0
    solver = CollinearChainSolver(
        [system.site_two_s[i] for i in rest], bonds,
        field_sites=[local[j] for j in neighbours],
        coupling=system.coupling, seed=seed)
    g = solver.ground([s_k * system.coupling] * len(neighbours))
    return float(g["energy"])


def threshold_table(system: SpinSystem, label: str = "",
                    site_labels=None, seed: int = 42,
                    e0: float | None = None,
                    defect_site: int | None = None) -> ThresholdTable:
    """Thresholds E_bs^k for every site, referred to the ground energy."""
    if e0 is None:
        e0 = ground_energy(system, seed=seed)
    if site_labels is None:
        site_labels = list(range(system.n_sites))
    entries = []
    for i in range(system.n_sites):
        e = single_site_threshold(system, i, seed=seed)
        entries.append((site_labels[i], e, e - e0))
    entries.sort(key=lambda t: t[0])
    return ThresholdTable(label or system.describe(), float(e0), entries,
                          defect_site=defect_site)


def defect_series(base_spin, n: int, defect_site: int, defect_spins,
                  labels=None, seed: int = 42) -> list:
    """Threshold tables for a ring with one substituted spin, one per s_M.

    A spinless substitution contributes a zero-cost entry at the defect site
    (a spin-0 site is in a product state with everything) and the open-chain
    thresholds for the remaining sites.
    """
    tables = []
    for idx, sm in enumerate(defect_spins):
        sm_two = parse_spin(sm)
        label = labels[idx] if labels else f"s_M={spin_str(sm_two)}"
        system, site_labels = defected_ring(n, base_spin, defect_site, sm)
        table = threshold_table(system, label=label, site_labels=site_labels,
                                seed=seed, defect_site=defect_site)
        if sm_two == 0:
            table.entries.append((defect_site, table.e0, 0.0))
            table.entries.sort(key=lambda t: t[0])
        tables.append(table)
    return tables


def verdict(measured_energy: float, table: ThresholdTable,
            global_ebs: float) -> Verdict:
    """Entanglement certified by a measured exchange energy.

    Site k is certified entangled with the rest iff the energy lies strictly
    below E_bs^k; the full N-partite statement needs energy below the global
    biseparable minimum.  At or above max_k E_bs^k nothing can be concluded.
    """
    sites = [k for k, e, _ in table.entries if measured_energy < e]
    return Verdict(float(measured_energy), sites,
                   bool(measured_energy < global_ebs))


def eta_s(spin) -> float:
    """sqrt((sum_{m=-s}^{s} m^2) / (2s+1)); strictly positive for s >= 1/2."""
    two_s = parse_spin(spin)
    if two_s < 1:
        raise ValueError("eta_s requires s >= 1/2")
    two_ms = range(-two_s, two_s + 1, 2)
    total = sum(Fraction(t, 2) ** 2 for t in two_ms)
    return float(np.sqrt(float(total / (two_s + 1))))


def f_factor(x_a: int, x_b: int, spin) -> float:
    """f(x_a, x_b) = 1 + prod_{x in {x_a, x_b}} (-1)^x [1 - x(x+1)/(2s(s+1))]."""
    two_s = parse_spin(spin)
    if two_s < 1:
        raise ValueError("f_factor requires s >= 1/2")
    for x in (x_a, x_b):
        if not isinstance(x, (int, np.integer)) or not 0 <= x <= two_s:
            raise ValueError(f"x = {x} outside the admissible range [0, 2s]")
    s = Fraction(two_s, 2)
    prod = Fraction(1)
    for x in (x_a, x_b):
        prod *= (-1) ** x * (1 - Fraction(x * (x + 1)) / (2 * s * (s + 1)))
    return float(1 + prod)


@dataclass
class EigenstateCheck:
    """Outcome of sampling singlet x singlet product states against H."""

    min_variance: float | None
    samples: int
    no_singlet_sector: bool
    reason: str = ""


def _singlet_projector(site_two_s) -> np.ndarray | None:
    """Orthonormal basis (columns) of the S^2 = 0 eigenspace, or None."""
    if sum(site_two_s) % 2 == 1:
        return None  # half-integer total spin cannot reach S = 0
    basis = ProductBasis(site_two_s, 0)
    if basis.dim == 0:
        return None
    s2 = total_spin_squared(basis).to_dense()
    vals, vecs = scipy.linalg.eigh(s2)
    keep = vals < 1e-8
    if not np.any(keep):
        return None
    cols = vecs[:, keep]
    # lift from the M=0 sector to the full space
    full = np.zeros((basis.total_dim, cols.shape[1]))
    full[basis.full_index] = cols
    return full


def verify_not_eigenstate(system: SpinSystem, arc: Arc, samples: int = 1000,
                          seed: int = 42) -> EigenstateCheck:
    """Minimum energy variance of H over random singlet (x) singlet states.

    Draws random states in the S_A = 0 tensor S_B = 0 sector of a contiguous
    bipartition; a strictly positive variance for every sample witnesses that
    no such biseparable state is an eigenstate of H.
    """
    sites_a = arc.sites(system)
    sites_b = [i for i in range(system.n_sites) if i not in set(sites_a)]
    proj_a = _singlet_projector([system.site_two_s[i] for i in sites_a])
    proj_b = _singlet_projector([system.site_two_s[i] for i in sites_b])
    if proj_a is None or proj_b is None:
        side = "A" if proj_a is None else "B"
        return EigenstateCheck(None, 0, True,
                               f"subsystem {side} has no singlet sector")
    # H in the site order (A sites, then B sites)
    h = build_on_sites(system, sites_a + sites_b).matrix
    rng = np.random.default_rng(seed)
    min_var = np.inf
    for _ in range(samples):
        ca = rng.standard_normal(proj_a.shape[1]) + 1j * rng.standard_normal(proj_a.shape[1])
        cb = rng.standard_normal(proj_b.shape[1]) + 1j * rng.standard_normal(proj_b.shape[1])
        psi = np.kron(proj_a @ ca, proj_b @ cb)
        psi /= np.linalg.norm(psi)
        hpsi = h @ psi
        e = np.real(np.vdot(psi, hpsi))
        var = np.real(np.vdot(hpsi, hpsi)) - e * e
        min_var = min(min_var, float(var))
    return EigenstateCheck(min_var, samples, False)


def full_spectrum(system: SpinSystem,
                  sector_limit: int = SECTOR_DENSE_LIMIT) -> np.ndarray:
    """Complete spectrum assembled sector by sector, ascending."""
    pieces = []
    for two_m in sector_two_m_values(system.site_two_s):
        if two_m < 0:
            continue  # spin-flip symmetry of the undressed Hamiltonian
        op = build_hamiltonian(system, two_m)
        if op.dim == 0:
            continue
        vals = dense_spectrum(op, limit=sector_limit)
        pieces.append(vals)
        if two_m > 0:
            pieces.append(vals)
    return np.sort(np.concatenate(pieces))


def thermal_energy(spectrum: np.ndarray, temperature: float) -> float:
    """Canonical <H>_T over a complete spectrum (k_B = 1, T in units of J)."""
    if temperature < 0:
        raise ValueError("temperature must be >= 0")
    e = np.asarray(spectrum, dtype=float)
    if temperature == 0:
        e0 = e.min()
        return float(e[np.isclose(e, e0, atol=1e-12)].mean())
    w = np.exp(-(e - e.min()) / temperature)
    return float((e * w).sum() / w.sum())


def threshold_temperature(spectrum: np.ndarray, ebs: float,
                          tol: float = 1e-10, max_t: float = 1e6) -> float:
    """Temperature T* at which <H>_T crosses a biseparable threshold.

    <H>_T increases monotonically in T, so the root is unique; found by
    bisection to |<H>_T - ebs| < tol.
    """
    e = np.asarray(spectrum, dtype=float)
    e0 = e.min()
    if ebs <= e0:
        raise ValueError("threshold at or below the ground energy: no crossing")
    if ebs >= e.mean():
        raise ValueError("threshold above the infinite-T energy: no crossing")
    lo, hi = 0.0, 1.0
    while thermal_energy(e, hi) < ebs:
        hi *= 2.0
        if hi > max_t:
            raise ValueError("no crossing below max_t")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        val = thermal_energy(e, mid)
        if abs(val - ebs) < tol:
            return mid
        if val < ebs:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
