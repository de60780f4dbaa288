"""Self-consistent minimization over biseparable states.

Two layers:

* ``boundary_map`` — the one-step map used to probe the fixed-point geometry
  with general (x-z plane) boundary fields.  This validates the reduction to
  collinear fields with equal boundary moduli.
* ``biseparable_minimum`` / ``biseparable_scan`` — the production fixed-point
  solver.  Fields are restricted to +/- z with the two boundary expectations
  of each subsystem tied by a sign eta = +/-1; both eta branches and a grid
  of starting moduli are scanned, and the exactly-decoupled candidate
  (all boundary expectations zero) is always included in the minimum.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .eigensolvers import (
    DEGENERACY_TOL,
    SolverError,
    lanczos_ground,
)
from .hamiltonians import (
    Arc,
    CHAIN,
    FieldTerm,
    RING,
    SpinSystem,
    build_on_sites,
    build_subsystem,
    complement_sites,
    coupling_bonds,
    dress_with_fields,
    subsystem_bonds,
)
from .operators import (
    ProductBasis,
    field_term,
    heisenberg_bond,
    sector_two_m_values,
    sz_diagonal,
)

ZERO_MODULUS = 1e-12


class ScfError(RuntimeError):
    """No self-consistent branch converged; carries all iteration histories."""

    def __init__(self, message: str, histories=None):
        super().__init__(message)
        self.histories = histories or []


@dataclass(frozen=True)
class BoundaryPair:
    """Expectation vectors of the two boundary spins of one subsystem.

    ``z`` belongs to the last site of the segment, ``zprime`` to the first,
    mirroring the (z_alpha, z_alpha') labelling of the dressed Hamiltonians.
    """

    z: np.ndarray
    zprime: np.ndarray


@dataclass(frozen=True)
class BoundaryGeometry:
    """Relative geometry of a boundary pair: angle, modulus difference, moduli."""

    theta: float
    modulus_diff: float
    moduli: tuple
    defined: bool


def boundary_geometry(pair: BoundaryPair) -> BoundaryGeometry:
    z = np.asarray(pair.z, dtype=float)
    zp = np.asarray(pair.zprime, dtype=float)
    if not (np.all(np.isfinite(z)) and np.all(np.isfinite(zp))):
        raise ValueError("boundary vectors must be finite")
    a, b = np.linalg.norm(z), np.linalg.norm(zp)
    if a < ZERO_MODULUS or b < ZERO_MODULUS:
        return BoundaryGeometry(np.nan, abs(a - b), (a, b), False)
    c = float(np.clip(z @ zp / (a * b), -1.0, 1.0))
    return BoundaryGeometry(float(np.arccos(c)), abs(a - b), (a, b), True)


class CollinearChainSolver:
    """Ground states of an open segment dressed with +/- z boundary fields.

    Precomputes the Sz-sector blocks of the bare Hamiltonian and the diagonal
    boundary sz operators, so repeated solves during the fixed-point
    iteration only add diagonals.  The segment need not be connected (the
    complement of a mid-chain arc is two pieces).
    """

    def __init__(self, site_two_s, bonds, field_sites=(0, -1),
                 coupling: float = 1.0, seed: int = 42,
                 dense_dim: int = 128):
        self.site_two_s = tuple(int(t) for t in site_two_s)
        n = len(self.site_two_s)
        self.field_sites = tuple(s % n for s in field_sites)
        self.seed = seed
        self.dense_dim = dense_dim
        self.sectors = []
        for two_m in sector_two_m_values(self.site_two_s):
            basis = ProductBasis(self.site_two_s, two_m)
            if basis.dim == 0:
                continue
            mat = sp.csr_matrix((basis.dim, basis.dim))
            for i, j in bonds:
                mat = mat + heisenberg_bond(basis, i, j, coupling).matrix
            diags = [sz_diagonal(basis, s) for s in self.field_sites]
            edge = (sz_diagonal(basis, 0), sz_diagonal(basis, n - 1))
            self.sectors.append({"two_m": two_m, "basis": basis, "h": mat,
                                 "diags": diags, "edge": edge, "v0": None})

    def ground(self, field_values, select_coeffs=None,
               degeneracy_tol: float = DEGENERACY_TOL):
        """Lowest dressed eigenstate over all sectors.

        field_values: scalars b_k, one per field site (field = b_k * z_hat).
        select_coeffs: coefficients c_k resolving degenerate minima by
        minimizing sum_k c_k <sz_(field site k)> (the infinitesimal-field
        limit of the upcoming fields).  Returns a dict with the dressed
        energy, the bare-Hamiltonian expectation, the two segment-edge
        <sz> values and per-field-site <sz> values.
        """
        field_values = tuple(float(b) for b in field_values)
        if len(field_values) != len(self.field_sites):
            raise ValueError("one field value per field site required")
        results = []
        for sec in self.sectors:
            mat = sec["h"]
            shift = None
            for b, d in zip(field_values, sec["diags"]):
                if b != 0.0:
                    shift = b * d if shift is None else shift + b * d
            dim = mat.shape[0]
            if dim <= self.dense_dim:
                dense = mat.toarray()
                if shift is not None:
                    dense[np.arange(dim), np.arange(dim)] += shift
                vals, vecs = scipy.linalg.eigh(dense)
                e0 = float(vals[0])
                keep = vals <= e0 + degeneracy_tol * max(1.0, abs(e0))
                results.append((e0, sec, vecs[:, keep]))
            else:
                op = _BareOp(mat + sp.diags(shift) if shift is not None else mat)
                vals, vecs, _, _ = lanczos_ground(
                    op, k=1, seed=self.seed, v0=sec["v0"])
                sec["v0"] = vecs[:, 0]
                results.append((float(vals[0]), sec, vecs[:, :1]))
        e0 = min(r[0] for r in results)
        tol = degeneracy_tol * max(1.0, abs(e0))
        candidates = []
        for e, sec, vecs in results:
            if e <= e0 + tol:
                for c in range(vecs.shape[1]):
                    candidates.append((sec, vecs[:, c]))
        if len(candidates) > 1 and select_coeffs is not None:
            def selection(entry):
                sec, v = entry
                p = np.abs(v) ** 2
                return sum(c * float(p @ d)
                           for c, d in zip(select_coeffs, sec["diags"]))
            sec, vec = min(candidates,
                           key=lambda e: (round(selection(e), 10), e[0]["two_m"]))
        else:
            sec, vec = candidates[0]
        p = np.abs(vec) ** 2
        z_fields = [float(p @ d) for d in sec["diags"]]
        z_edges = (float(p @ sec["edge"][0]), float(p @ sec["edge"][1]))
        e_bare = e0 - sum(b * z for b, z in zip(field_values, z_fields))
        return {"energy": e0, "e_bare": e_bare, "sector_two_m": sec["two_m"],
                "z_fields": z_fields, "z_edges": z_edges,
                "degenerate": len(candidates) > 1}


class _BareOp:
    """Minimal operator facade for lanczos_ground."""

    def __init__(self, matrix):
        self.matrix = matrix
        self.dim = matrix.shape[0]
        self.is_real = not np.issubdtype(matrix.dtype, np.complexfloating)

    def matvec(self, v):
        return self.matrix @ v


def boundary_map(chain_spins, z_b, z_bprime, seed: int = 42,
                 degeneracy_tol: float = DEGENERACY_TOL) -> BoundaryPair:
    """One application of the boundary map on an open segment.

    Solves the ground state of H_chain + z_b . s_last + z_bprime . s_first
    (fields confined to the x-z plane; rotational symmetry of the isotropic
    exchange makes this lossless) and returns the expectation vectors of the
    boundary spins: BoundaryPair(z=<s_last>, zprime=<s_first>).
    """
    from .operators import parse_spin

    spins = [parse_spin(s) for s in chain_spins]
    n = len(spins)
    z_b = np.asarray(z_b, dtype=float)
    z_bp = np.asarray(z_bprime, dtype=float)
    for v in (z_b, z_bp):
        if v.shape != (3,) or abs(v[1]) > ZERO_MODULUS:
            raise ValueError("boundary fields must be 3-vectors in the x-z plane")
    if n >= 2:
        system = SpinSystem(CHAIN, tuple(spins))
        h = build_on_sites(system, list(range(n)))
    else:
        from .operators import zero_operator
        h = zero_operator(ProductBasis(spins))
    basis = h.basis
    op = h
    if np.linalg.norm(z_b) > 0:
        op = op + field_term(basis, basis.n_sites - 1, z_b)
    if np.linalg.norm(z_bp) > 0:
        op = op + field_term(basis, 0, z_bp)
    dense = op.to_dense()
    vals, vecs = scipy.linalg.eigh(dense)
    e0 = vals[0]
    keep = vals <= e0 + degeneracy_tol * max(1.0, abs(e0))
    manifold = vecs[:, keep]
    if manifold.shape[1] > 1:
        # infinitesimal-field limit: minimize the field coupling inside the
        # degenerate manifold; fall back to +z on both edges at zero field
        if np.linalg.norm(z_b) > 0 or np.linalg.norm(z_bp) > 0:
            sel = field_term(basis, basis.n_sites - 1, z_b).matrix + \
                field_term(basis, 0, z_bp).matrix
        else:
            sel = sp.diags(sz_diagonal(basis, 0) +
                           sz_diagonal(basis, basis.n_sites - 1)).tocsr()
        block = manifold.conj().T @ (sel @ manifold)
        block = (block + block.conj().T) / 2.0
        bvals, bvecs = scipy.linalg.eigh(block)
        vec = manifold @ bvecs[:, 0]
    else:
        vec = manifold[:, 0]

    def spin_vector(site):
        out = np.empty(3)
        for k, unit in enumerate(np.eye(3)):
            comp = field_term(basis, site, unit)
            out[k] = comp.expectation(vec)
        return out

    return BoundaryPair(z=spin_vector(basis.n_sites - 1), zprime=spin_vector(0))


@dataclass(frozen=True)
class ScfConfig:
    """Knobs of the collinear fixed-point solver."""

    etas: tuple = (1, -1)
    damping: float = 0.5
    tol: float = 1e-10
    max_iter: int = 10000
    init_grid: tuple | None = None  # moduli in [0, s_boundary]; default 5-point
    seed: int = 42
    damping_floor: float = 0.05

    def __post_init__(self):
        if not 0 < self.damping <= 1:
            raise ValueError("damping must be in (0, 1]")
        if self.tol <= 0:
            raise ValueError("tol must be positive")


@dataclass
class ScfResult:
    """One converged biseparable minimum for a fixed bipartition."""

    ebs: float
    z_a: float
    z_aprime: float
    z_b: float
    z_bprime: float
    eta: int
    converged: bool
    residual: float
    history: list = field(default_factory=list)
    decoupled: bool = False
    start: float = 0.0
    iterations: int = 0


@dataclass
class BipartitionReport:
    n_a: int
    n_b: int
    offset: int
    result: ScfResult | None
    branches: list = field(default_factory=list)
    failed: bool = False
    message: str = ""


def _bipartition_structure(system: SpinSystem, arc: Arc):
    """Local layout of the bipartition: site lists, bonds and coupling pairs.

    Returns (sites_a, sites_b, pairs) where pairs are
    (a_local, b_local) indices of the coupled boundary spins; pair 0 is the
    unprimed one (A-last with B-first when both exist).
    """
    sites_a = arc.sites(system)
    sites_b = complement_sites(system, arc)
    loc_a = {s: i for i, s in enumerate(sites_a)}
    loc_b = {s: i for i, s in enumerate(sites_b)}
    pairs = []
    for a, b in coupling_bonds(system, arc):
        pairs.append((loc_a[a], loc_b[b]))
    # deterministic order: the pair involving A's last site first
    pairs.sort(key=lambda p: (-p[0], p[1]))
    if not pairs:
        raise ValueError("arc does not couple to its complement")
    return sites_a, sites_b, pairs


def _run_branch(solver_a, solver_b, npair, eta, z0, cfg):
    """Damped alternation from one starting modulus; returns an ScfResult."""
    sign = [1.0, float(eta)] if npair == 2 else [1.0]
    z_b = np.array([z0 * s for s in sign])
    z_a = np.zeros(npair)
    alpha = cfg.damping
    history = []
    residuals = []
    converged = False
    best_resid = np.inf
    since_progress = 0
    it = 0
    for it in range(1, cfg.max_iter + 1):
        ga = solver_a.ground(z_b, select_coeffs=[s for s in sign])
        za_meas = np.array(ga["z_fields"])
        gb = solver_b.ground(za_meas, select_coeffs=[-s for s in sign])
        zb_meas = np.array(gb["z_fields"])
        resid = max(np.max(np.abs(za_meas - z_a)), np.max(np.abs(zb_meas - z_b)))
        energy = ga["e_bare"] + gb["e_bare"] + float(za_meas @ zb_meas)
        history.append((float(np.abs(za_meas).max()),
                        float(np.abs(zb_meas).max()), energy))
        residuals.append(resid)
        if resid < cfg.tol:
            converged = True
            z_a, z_b = za_meas, zb_meas
            break
        # abort branches stuck in a limit cycle: no residual improvement by
        # 2x over 200 cycles means the map has no attracting fixed point here
        if resid < 0.5 * best_resid:
            best_resid = resid
            since_progress = 0
        else:
            since_progress += 1
            if since_progress > 200:
                break
        z_a = (1 - alpha) * z_a + alpha * za_meas
        z_b = (1 - alpha) * z_b + alpha * zb_meas
        # halve the damping on a period-2 oscillation of the residual
        if len(residuals) >= 6:
            r = residuals[-6:]
            if (abs(r[-1] - r[-3]) < 0.05 * max(r[-1], 1e-300)
                    and abs(r[-2] - r[-4]) < 0.05 * max(r[-2], 1e-300)
                    and r[-1] > 0.9 * r[-3]):
                alpha = max(cfg.damping_floor, alpha / 2)
                residuals.clear()
    if not converged:
        return ScfResult(np.inf, 0, 0, 0, 0, eta, False,
                         residuals[-1] if residuals else np.inf,
                         history, start=z0, iterations=it)
    # one exact (undamped) verification cycle from the converged point
    ga = solver_a.ground(z_b, select_coeffs=[s for s in sign])
    za_v = np.array(ga["z_fields"])
    gb = solver_b.ground(za_v, select_coeffs=[-s for s in sign])
    zb_v = np.array(gb["z_fields"])
    verify = max(np.max(np.abs(za_v - z_a)), np.max(np.abs(zb_v - z_b)))
    ebs = ga["e_bare"] + gb["e_bare"] + float(za_v @ zb_v)
    pad = lambda v: (float(v[0]), float(v[1]) if len(v) > 1 else float(v[0]))
    za0, za1 = pad(za_v)
    zb0, zb1 = pad(zb_v)
    return ScfResult(ebs=float(ebs), z_a=za0, z_aprime=za1, z_b=zb0,
                     z_bprime=zb1, eta=eta, converged=verify < 10 * cfg.tol,
                     residual=float(verify), history=history, start=z0,
                     iterations=it)


def biseparable_minimum(system: SpinSystem, arc: Arc,
                        cfg: ScfConfig | None = None) -> ScfResult:
    """Minimum energy over biseparable states for one contiguous bipartition."""
    result, _ = biseparable_minimum_detailed(system, arc, cfg)
    return result


def biseparable_minimum_detailed(system: SpinSystem, arc: Arc,
                                 cfg: ScfConfig | None = None):
    """As biseparable_minimum but also returns every branch result."""
    cfg = cfg or ScfConfig()
    sites_a, sites_b, pairs = _bipartition_structure(system, arc)
    spins_a = [system.site_two_s[i] for i in sites_a]
    spins_b = [system.site_two_s[i] for i in sites_b]
    bonds_a = subsystem_bonds(system, sites_a)
    bonds_b = subsystem_bonds(system, sites_b)
    solver_a = CollinearChainSolver(
        spins_a, bonds_a, field_sites=[p[0] for p in pairs],
        coupling=system.coupling, seed=cfg.seed)
    solver_b = CollinearChainSolver(
        spins_b, bonds_b, field_sites=[p[1] for p in pairs],
        coupling=system.coupling, seed=cfg.seed)

    # grid of starting moduli, capped by the boundary spin of B
    s_bd = system.site_two_s[sites_b[0]] / 2.0
    grid = cfg.init_grid
    if grid is None:
        grid = tuple(s_bd * f for f in (0.0, 0.25, 0.5, 0.75, 1.0))
    etas = cfg.etas if len(pairs) == 2 else (1,)

    branches = []
    for eta in etas:
        for z0 in grid:
            try:
                branches.append(_run_branch(solver_a, solver_b, len(pairs),
                                            eta, float(z0), cfg))
            except SolverError as exc:
                branches.append(ScfResult(np.inf, 0, 0, 0, 0, eta, False,
                                          np.inf, [("error", str(exc))],
                                          start=float(z0)))
    # the exactly-decoupled candidate is always evaluated
    e_dec = (solver_a.ground([0.0] * len(pairs))["e_bare"]
             + solver_b.ground([0.0] * len(pairs))["e_bare"])
    decoupled = ScfResult(ebs=float(e_dec), z_a=0.0, z_aprime=0.0, z_b=0.0,
                          z_bprime=0.0, eta=1, converged=True, residual=0.0,
                          history=[], decoupled=True)
    candidates = [b for b in branches if b.converged] + [decoupled]
    best = min(candidates, key=lambda r: (r.ebs, not r.decoupled))
    # a branch that drifted to the decoupled point is reported as such
    if not best.decoupled and max(abs(best.z_a), abs(best.z_b)) < 1e-7 \
            and best.ebs >= e_dec - 1e-9:
        best = decoupled
    if not any(b.converged for b in branches) and not np.isfinite(e_dec):
        raise ScfError("no SCF branch converged",
                       [b.history for b in branches])
    return best, branches + [decoupled]


def _scan_one(args):
    system, arc, cfg = args
    try:
        best, branches = biseparable_minimum_detailed(system, arc, cfg)
        return BipartitionReport(arc.length, system.n_sites - arc.length,
                                 arc.offset, best, branches)
    except (ScfError, SolverError) as exc:
        return BipartitionReport(arc.length, system.n_sites - arc.length,
                                 arc.offset, None, [], failed=True,
                                 message=str(exc))


def scan_arcs(system: SpinSystem) -> list:
    """Contiguous arcs scanned for the global minimum: N_A = 1..N/2; one offset
    for homogeneous rings, all valid offsets otherwise."""
    n = system.n_sites
    homogeneous = len(set(system.site_two_s)) == 1
    arcs = []
    for length in range(1, n // 2 + 1):
        if system.topology == RING:
            offsets = [0] if homogeneous else range(n)
        else:
            offsets = range(n - length + 1)
        for off in offsets:
            arcs.append(Arc(off, length))
    return arcs


@dataclass
class ScanResult:
    reports: list
    ebs: float
    argmin: BipartitionReport


def biseparable_scan(system: SpinSystem, cfg: ScfConfig | None = None,
                     workers: int = 1) -> ScanResult:
    """E_bs = min over contiguous bipartitions of E_bs(N_A, N_B)."""
    cfg = cfg or ScfConfig()
    arcs = scan_arcs(system)
    jobs = [(system, arc, cfg) for arc in arcs]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(_scan_one, jobs))
    else:
        reports = [_scan_one(j) for j in jobs]
    reports.sort(key=lambda r: (r.n_a, r.offset))
    ok = [r for r in reports if not r.failed]
    if not ok:
        raise ScfError("every bipartition failed")
    emin = min(r.result.ebs for r in ok)
    ties = [r for r in ok if r.result.ebs <= emin + 1e-12]
    argmin = min(ties, key=lambda r: (r.n_a, r.offset, -r.result.eta))
    return ScanResult(reports, float(emin), argmin)
