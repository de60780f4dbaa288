"""System topology, sub-Hamiltonians and field dressing."""

import numpy as np
import pytest

from spinwitness.hamiltonians import (
    Arc,
    FieldTerm,
    SpinSystem,
    build_hamiltonian,
    build_on_sites,
    build_subsystem,
    complement_sites,
    coupling_bonds,
    defected_ring,
    dress_with_fields,
    subsystem_bonds,
)
from spinwitness.operators import ProductBasis, total_sz


class TestSpinSystem:
    def test_ring_bond_count(self):
        assert len(SpinSystem.ring(5, "1/2").bonds()) == 5

    def test_chain_bond_count(self):
        assert len(SpinSystem.chain(5, "1/2").bonds()) == 4

    def test_ring_closure_bond(self):
        assert (4, 0) in SpinSystem.ring(5, "1/2").bonds()

    @pytest.mark.parametrize("topology,n", [("ring", 2), ("chain", 1)])
    def test_too_small(self, topology, n):
        with pytest.raises(ValueError):
            SpinSystem(topology, (1,) * n)

    def test_rejects_spinless_site(self):
        with pytest.raises(ValueError):
            SpinSystem("ring", (1, 0, 1))

    def test_rejects_unknown_topology(self):
        with pytest.raises(ValueError):
            SpinSystem("star", (1, 1, 1))

    def test_from_spins(self):
        s = SpinSystem.from_spins("chain", ["1/2", "3/2"])
        assert s.site_two_s == (1, 3)

    def test_describe(self):
        assert SpinSystem.ring(8, "3/2").describe() == "ring N=8 s=3/2"


class TestGroundEnergies:
    def test_two_site_singlet(self):
        op = build_hamiltonian(SpinSystem.chain(2, "1/2"))
        assert abs(np.linalg.eigvalsh(op.to_dense())[0] + 0.75) < 1e-12

    def test_frustrated_triangle(self):
        # E = (S(S+1) - 3 s(s+1))/2: fourfold-degenerate -3/4 at S=1/2
        op = build_hamiltonian(SpinSystem.ring(3, "1/2"))
        vals = np.linalg.eigvalsh(op.to_dense())
        assert np.allclose(vals[:4], -0.75)
        assert vals[4] > -0.75 + 1e-9


class TestSymmetries:
    def test_commutes_with_total_sz(self):
        system = SpinSystem.ring(5, "1")
        h = build_hamiltonian(system)
        sz = total_sz(h.basis)
        rng = np.random.default_rng(0)
        for _ in range(5):
            v = rng.standard_normal(h.dim)
            resid = h.matvec(sz.matvec(v)) - sz.matvec(h.matvec(v))
            assert np.abs(resid).max() < 1e-12

    def test_cyclic_relabeling_invariance(self):
        system = SpinSystem.ring(6, "1/2")
        base = np.linalg.eigvalsh(build_hamiltonian(system).to_dense())
        for shift in (1, 3):
            rotated = build_on_sites(
                system, [(i + shift) % 6 for i in range(6)])
            vals = np.linalg.eigvalsh(rotated.to_dense())
            assert np.abs(vals - base).max() < 1e-10

    def test_sector_blocks_reassemble_spectrum(self):
        from spinwitness.operators import sector_two_m_values
        system = SpinSystem.ring(4, "1")
        full = np.linalg.eigvalsh(build_hamiltonian(system).to_dense())
        pieces = []
        for two_m in sector_two_m_values(system.site_two_s):
            op = build_hamiltonian(system, two_m)
            if op.dim:
                pieces.append(np.linalg.eigvalsh(op.to_dense()))
        assert np.abs(np.sort(np.concatenate(pieces)) - full).max() < 1e-10


class TestArcs:
    def test_ring_arc_wraps(self):
        system = SpinSystem.ring(6, "1/2")
        assert Arc(4, 3).sites(system) == [4, 5, 0]

    def test_chain_arc_must_not_wrap(self):
        system = SpinSystem.chain(6, "1/2")
        with pytest.raises(ValueError):
            Arc(4, 3).sites(system)

    def test_arc_length_bounds(self):
        system = SpinSystem.ring(4, "1/2")
        with pytest.raises(ValueError):
            Arc(0, 0).sites(system)
        with pytest.raises(ValueError):
            Arc(0, 4).sites(system)

    def test_complement_starts_after_arc(self):
        system = SpinSystem.ring(6, "1/2")
        assert complement_sites(system, Arc(4, 3)) == [1, 2, 3]

    def test_complement_of_mid_chain_arc(self):
        system = SpinSystem.chain(6, "1/2")
        assert complement_sites(system, Arc(2, 2)) == [4, 5, 0, 1]

    def test_coupling_bonds_ring(self):
        system = SpinSystem.ring(8, "1/2")
        pairs = coupling_bonds(system, Arc(0, 3))
        assert sorted(pairs) == [(0, 7), (2, 3)]

    def test_coupling_bonds_chain_edge(self):
        system = SpinSystem.chain(8, "1/2")
        assert coupling_bonds(system, Arc(0, 3)) == [(2, 3)]


class TestSubsystems:
    def test_subsystem_bonds_local_indices(self):
        system = SpinSystem.ring(6, "1/2")
        bonds = subsystem_bonds(system, [4, 5, 0])
        # sites 4-5, 5-0 internal; 0-1 and 3-4 cross the cut
        assert sorted(bonds) == [(0, 1), (1, 2)]

    def test_single_site_subsystem_is_zero(self):
        system = SpinSystem.ring(6, "1/2")
        op = build_subsystem(system, Arc(2, 1))
        assert op.matrix.nnz == 0

    def test_open_chain_energy(self):
        system = SpinSystem.ring(6, "1/2")
        op = build_subsystem(system, Arc(0, 2))
        assert abs(np.linalg.eigvalsh(op.to_dense())[0] + 0.75) < 1e-12


class TestDressing:
    def test_boundary_fields_accepted(self):
        system = SpinSystem.chain(3, "1/2")
        h = build_hamiltonian(system)
        op = dress_with_fields(h, [FieldTerm(0, (0, 0, 0.5)),
                                   FieldTerm(2, (0, 0, -0.5))])
        assert op.dim == h.dim

    def test_interior_field_rejected(self):
        system = SpinSystem.chain(3, "1/2")
        h = build_hamiltonian(system)
        with pytest.raises(ValueError):
            dress_with_fields(h, [FieldTerm(1, (0, 0, 0.5))])

    def test_dressed_energy_shift(self):
        # single qubit pair with +z/-z fields of strength 1/2 on the edges
        system = SpinSystem.chain(2, "1/2")
        h = build_hamiltonian(system)
        op = dress_with_fields(h, [FieldTerm(0, (0, 0, 0.5)),
                                   FieldTerm(1, (0, 0, -0.5))])
        e0 = np.linalg.eigvalsh(op.to_dense())[0]
        # H = s1.s2 + (sz1 - sz2)/2 in the 2M=0 block: [[-1/4+1/2, 1/2], ...]
        assert e0 < -0.75  # the field always lowers the ground energy


class TestDefectedRing:
    def test_spinless_defect_becomes_chain(self):
        system, labels = defected_ring(8, "3/2", 4, "0")
        assert system.topology == "chain"
        assert system.n_sites == 7
        assert labels == [5, 6, 7, 0, 1, 2, 3]

    def test_substituted_ring(self):
        system, labels = defected_ring(8, "3/2", 4, "1")
        assert system.topology == "ring"
        assert system.site_two_s[4] == 2
        assert labels == list(range(8))

    def test_defect_site_range(self):
        with pytest.raises(ValueError):
            defected_ring(8, "3/2", 8, "1")
