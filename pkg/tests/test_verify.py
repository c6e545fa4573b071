import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from spinhelix.elliptic import EllipticContext
from spinhelix.errors import TooLarge
from spinhelix.helix import build_shs, open_chain_energy, open_chain_shs, shs_energy, spin1_xy_state, tower_state
from spinhelix.lattice import build_lattice
from spinhelix.model import ModelSpec
from spinhelix.spin import build_spin_rep
from spinhelix.verify import (
    check_divergence,
    check_eigenstate,
    check_entropy,
    check_trig_limit,
    degeneracy_scan,
    degeneration_overlap,
    gram_rank,
    rayleigh_residual,
    schmidt_entropy,
    tower_entropy,
    trig_limit_deviation,
)


class TestDivergence:
    @pytest.mark.parametrize("sign", [1, -1])
    def test_spin_half(self, sign):
        r = check_divergence(build_spin_rep(1), 0.23, 0.8j, 0.31 + 0.12j, sign)
        assert r.residual < 1e-11 and r.passed

    def test_spin_two(self):
        assert check_divergence(build_spin_rep(4), 0.23, 0.8j, 0.31 + 0.12j, 1).residual < 1e-10

    @given(ts=st.integers(1, 4), sign=st.sampled_from([1, -1]),
           u=st.builds(complex, st.floats(-1, 1), st.floats(-0.3, 0.3)),
           eta=st.builds(complex, st.floats(-1, 1), st.floats(-0.2, 0.2)),
           tau=st.builds(complex, st.floats(-0.4, 0.4), st.floats(0.6, 1.4)))
    def test_random(self, ts, sign, u, eta, tau):
        ctx = EllipticContext(tau)
        try:
            r = check_divergence(build_spin_rep(ts), eta, tau, u, sign, ctx=ctx)
        except Exception as exc:  # pole hits are excluded, never counted as passes
            from spinhelix.errors import NearPole
            assert isinstance(exc, NearPole)
            return
        assert r.residual < 1e-11

    def test_has_teeth(self):
        # wrong partner argument breaks the identity
        spin = build_spin_rep(2)
        ctx = EllipticContext(0.8j)
        r = check_divergence(spin, 0.23, 0.8j, 0.31 + 0.12j, 1, ctx=ctx)
        assert r.passed
        from spinhelix.verify import bond_operator, local_vector
        v = np.kron(local_vector(0.31, spin, ctx).coeffs, local_vector(0.31 + 0.3, spin, ctx).coeffs)
        spec = ModelSpec("open_chain_1d", spin, build_lattice((2,), "open"), 0.23, ctx)
        hv = bond_operator(spec) @ v
        lam = np.vdot(v, hv)
        assert np.linalg.norm(hv - lam * v) > 1e-3

    def test_bad_sign(self):
        with pytest.raises(ValueError):
            check_divergence(build_spin_rep(1), 0.2, 0.8j, 0.1, 0)


class TestEigenstate:
    @pytest.mark.parametrize("eps", [(1,), (-1,)])
    def test_xyz_chain(self, eps):
        spec = ModelSpec("xyz", build_spin_rep(1), build_lattice((11,)), 2 / 11, EllipticContext(0.8j))
        r = check_eigenstate(spec, build_shs(0.28, eps, spec), shs_energy(spec))
        assert r.passed and r.residual < 1e-10

    def test_xxz_square(self):
        spec = ModelSpec("xxz", build_spin_rep(1), build_lattice((4, 4)), 0.5)
        r = check_eigenstate(spec, build_shs(0.3, (1, -1), spec), 0.0)
        assert r.passed and abs(r.measured_energy) < 1e-10

    def test_open_chain(self):
        ctx = EllipticContext(0.9j)
        spec = ModelSpec("open_chain_1d", build_spin_rep(1), build_lattice((6,), "open"), 2 * ctx.tau / 6, ctx, u0=0.25)
        r = check_eigenstate(spec, open_chain_shs(spec), open_chain_energy(spec), tolerance=1e-9)
        assert r.passed

    def test_random_vector_fails(self, rng):
        spec = ModelSpec("xyz", build_spin_rep(1), build_lattice((8,)), 2 / 8, EllipticContext(0.8j))
        x = rng.normal(size=256) + 1j * rng.normal(size=256)
        r = check_eigenstate(spec, x)
        assert r.residual > 0.1 and not r.passed

    def test_off_lattice_eta_fails(self):
        ctx = EllipticContext(0.8j)
        spec = ModelSpec("xyz", build_spin_rep(1), build_lattice((11,)), 2 / 11 + 1e-3, ctx)
        r = check_eigenstate(spec, build_shs(0.28, (1,), spec, check=False))
        assert r.residual > 1e-5

    def test_energy_mismatch_fails(self):
        spec = ModelSpec("xxz", build_spin_rep(1), build_lattice((6,)), 1 / 3)
        r = check_eigenstate(spec, build_shs(0.1, (1,), spec), 0.7)
        assert r.residual < 1e-12 and not r.passed

    def test_passed_matches_definition(self):
        spec = ModelSpec("xxz", build_spin_rep(1), build_lattice((6,)), 1 / 3)
        r = check_eigenstate(spec, build_shs(0.1, (1,), spec), 0.75, tolerance=1e-12)
        ok = r.residual <= r.tolerance and abs(r.measured_energy - 0.75) <= r.tolerance
        assert r.passed == ok

    def test_reproducible(self):
        spec = ModelSpec("xyz", build_spin_rep(2), build_lattice((6,)), (2 * 0.9j + 2) / 6, EllipticContext(0.9j))
        a = check_eigenstate(spec, build_shs(0.2, (1,), spec), shs_energy(spec)).to_dict()
        b = check_eigenstate(spec, build_shs(0.2, (1,), spec), shs_energy(spec)).to_dict()
        assert a == b

    @pytest.mark.parametrize("case", [
        ("xyz", 1, (6,), (2 * 0.9j + 2) / 6, 0.9j),
        ("xyz", 1, (4, 4), 2 * 0.8j / 4, 0.8j),
        ("long_range", 2, (8,), (2 * 0.8j + 2) / 8, 0.8j),
        ("xy_b", 3, (4,), 0.0, 0.8j),
    ])
    def test_u_independence(self, case, rng):
        variant, ts, dims, eta, tau = case
        weights = ((1, 1.0), (2, 0.7), (3, -0.4)) if variant == "long_range" else ()
        spec = ModelSpec(variant, build_spin_rep(ts), build_lattice(dims), eta, EllipticContext(tau), weights)
        lams = []
        for _ in range(5):
            u = complex(rng.uniform(-1, 1), rng.uniform(-0.3, 0.3))
            res, lam = rayleigh_residual(spec, build_shs(u, (1,) * len(dims), spec).to_dense())
            assert res < 1e-9
            lams.append(lam)
        scale = max(1.0, max(abs(x) for x in lams))
        assert max(abs(a - b) for a in lams for b in lams) < 1e-9 * scale

    def test_too_large(self):
        spec = ModelSpec("xxz", build_spin_rep(1), build_lattice((25,)), 0.08)
        with pytest.raises(TooLarge):
            check_eigenstate(spec, np.zeros(2 ** 25, dtype=np.complex64))


class TestDegeneracy:
    def test_xxz_towers(self):
        spec = ModelSpec("xxz", build_spin_rep(1), build_lattice((6,)), 1 / 3)
        states = [tower_state(n, (e,), spec) for n in range(7) for e in (1, -1)]
        rep = degeneracy_scan(spec, 0.75, states, 12)
        assert rep.span_dimension == 12
        assert rep.cluster_size >= 12
        assert rep.states_in_cluster

    def test_xxx(self):
        spec = ModelSpec("xxz", build_spin_rep(1), build_lattice((6,)), 0.0)
        states = [tower_state(n, (e,), spec) for n in range(7) for e in (1, -1)]
        rep = degeneracy_scan(spec, 1.5, states, 7)
        assert rep.span_dimension == 7
        assert rep.cluster_size >= rep.span_dimension

    def test_xy_kernel(self, rng):
        ctx = EllipticContext(0.8j)
        spec = ModelSpec("xy_a", build_spin_rep(2), build_lattice((4,)), ctx=ctx)
        states = []
        for _ in range(6):
            u = complex(rng.uniform(-1, 1), rng.uniform(-0.3, 0.3))
            states.append(build_shs(u, (1,), spec))
            states.append(build_shs(u, (-1,), spec))
            states.append(spin1_xy_state(u, spec))
        rep = degeneracy_scan(spec, 0.0, states)
        assert rep.states_in_cluster
        assert rep.cluster_size >= rep.span_dimension > 0

    def test_non_hermitian_path(self):
        ctx = EllipticContext(0.9j)
        spec = ModelSpec("xyz", build_spin_rep(1), build_lattice((6,)), (2 * ctx.tau + 2) / 6, ctx)
        states = [build_shs(u, (e,), spec) for u in (0.1, 0.3 + 0.1j, -0.4) for e in (1, -1)]
        rep = degeneracy_scan(spec, shs_energy(spec), states)
        assert rep.states_in_cluster and rep.cluster_size >= rep.span_dimension >= 1

    def test_gram_rank(self):
        a = np.array([1, 0, 0], dtype=complex)
        b = np.array([0, 1, 0], dtype=complex)
        assert gram_rank([a, b, a + b]) == 2
        assert gram_rank([]) == 0

    def test_too_large(self):
        spec = ModelSpec("xxz", build_spin_rep(1), build_lattice((13,)), 2 / 13)
        with pytest.raises(TooLarge):
            degeneracy_scan(spec, 0.0, [])


class TestEntropy:
    def test_half_chain(self):
        spec = ModelSpec("xxz", build_spin_rep(1), build_lattice((8,)), 0.5)
        r = check_entropy(spec, 4, 4)
        assert r.passed and r.residual < 1e-12

    @pytest.mark.parametrize("va", [1, 3, 5])
    def test_empty_tower(self, va):
        spec = ModelSpec("xxz", build_spin_rep(1), build_lattice((6,)), 1 / 3)
        r = check_entropy(spec, 0, va)
        assert r.extra["formula"] == 0 and abs(r.extra["schmidt"]) < 1e-14

    def test_spin_one(self):
        spec = ModelSpec("xxz", build_spin_rep(2), build_lattice((4,)), 0.5)
        for n in range(9):
            assert check_entropy(spec, n, 2).passed

    def test_approach_to_asymptotic(self):
        from spinhelix.helix import tower_entropy_asymptotic

        gaps = []
        for V in (8, 10, 12):
            spec = ModelSpec("xxz", build_spin_rep(1), build_lattice((V,)), 2 / V)
            amp = tower_state(V // 2, (1,), spec).amplitudes
            schmidt = schmidt_entropy(amp, 2, V // 2)
            exact = tower_entropy(V // 2, V // 2, 1, V)
            asym = tower_entropy_asymptotic(1, V)
            assert abs(schmidt - exact) < 1e-12
            assert abs(exact - asym) < 0.25 * asym
            gaps.append(abs(exact - asym))
        assert gaps[0] > gaps[1] > gaps[2]


class TestTrigLimit:
    def test_convergence(self):
        r = check_trig_limit(0.3, [2, 4, 6])
        assert r.passed and r.extra["monotone"] and r.residual < 1e-6

    def test_eta_zero(self):
        for t in (0.7, 2.0, 5.0):
            d = trig_limit_deviation(0.0, t)
            assert d["a"] < 1e-12 and d["b"] < 1e-12

    def test_not_converged_fails(self):
        assert not check_trig_limit(0.3, [1, 2]).passed

    def test_degeneration_to_highest_weight(self):
        vals = [degeneration_overlap(build_spin_rep(2), 6, 1 / 3, t) for t in (2, 4, 8)]
        assert vals[0] < vals[1] < vals[2]
        assert abs(vals[2] - 1) < 1e-8
