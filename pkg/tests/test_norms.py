import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kmsbounds.lattice import (
    InteractionFamily,
    Region,
    SpinRep,
    box_window,
    build_heisenberg,
    build_ising_staggered,
    classical_heisenberg_ti,
    heisenberg_ti,
    ising_staggered_ti,
)
from kmsbounds.norms import (
    NormParams,
    norm_eps_zeta,
    psi_norm_sum,
    site_norm_profile,
    window_norms,
)

LOG3 = math.log(3.0)
REP = SpinRep(1)


class TestNormParams:
    def test_validation(self):
        with pytest.raises(ValueError):
            NormParams(0.0)
        with pytest.raises(ValueError):
            NormParams(1.0, -0.1)


class TestPsiNormSum:
    def test_heisenberg_vanishes(self):
        fam = build_heisenberg(1.0, 1.0, REP, box_window([4]))
        assert psi_norm_sum(fam, box_window([4])) == 0.0

    def test_staggered_three_sites(self):
        field = 2.0
        fam = build_ising_staggered(1.0, field, REP, box_window([3]))
        # three sites, each ||Psi_x|| = B j = B/2
        assert psi_norm_sum(fam, box_window([3])) == pytest.approx(3 * field * 0.5)

    def test_empty_region(self):
        fam = build_heisenberg(1.0, 1.0, REP, box_window([2]))
        assert psi_norm_sum(fam, Region(())) == 0.0


class TestNormEpsZeta:
    def test_ti_heisenberg_closed_form(self):
        for nu in (1, 2, 3):
            spec = heisenberg_ti(nu, 1.0, 1.0, REP)
            eps = 0.607
            value = norm_eps_zeta(spec, NormParams(eps + LOG3))
            assert value == pytest.approx(3 * math.exp(eps) * 2 * nu * 0.75, rel=1e-12)

    def test_zeta_flat_without_single_site(self):
        spec = heisenberg_ti(1, 1.0, 1.0, REP)
        p0 = norm_eps_zeta(spec, NormParams(0.4, 0.0))
        p1 = norm_eps_zeta(spec, NormParams(0.4, 2.5))
        assert p0 == p1
        fam = build_heisenberg(1.0, 1.0, REP, box_window([3]))
        assert norm_eps_zeta(fam, NormParams(0.4, 0.0)) == norm_eps_zeta(
            fam, NormParams(0.4, 2.5)
        )

    def test_staggered_hand_value(self):
        # nu=1, J=1, B=1, j=1/2: each bond has ||S3 S3|| = 1/4 and
        # ||Psi||_bond = 2 B j = 1; two bonds contain any interior site
        spec = ising_staggered_ti(1, 1.0, 1.0, REP)
        value = norm_eps_zeta(spec, NormParams(0.1, 0.2))
        assert value == pytest.approx(2 * math.exp(0.1 + 0.2) * 0.25, rel=1e-12)

    def test_finite_window_staggered_hand_value(self):
        fam = build_ising_staggered(1.0, 1.0, REP, box_window([3]))
        profile = site_norm_profile(fam, NormParams(0.1, 0.2))
        assert profile[(1,)] == pytest.approx(2 * math.exp(0.1 + 0.2) * 0.25, rel=1e-12)

    def test_empty_family_is_zero(self):
        fam = InteractionFamily({}, 2)
        assert norm_eps_zeta(fam, NormParams(1.0)) == 0.0

    def test_monotone_in_eps(self):
        spec = ising_staggered_ti(1, 1.0, 1.0, REP)
        values = [
            norm_eps_zeta(spec, NormParams(e, 0.3)) for e in np.linspace(0.1, 2, 12)
        ]
        assert all(b > a for a, b in zip(values, values[1:]))

    def test_monotone_in_zeta(self):
        spec = ising_staggered_ti(1, 1.0, 1.0, REP)
        values = [
            norm_eps_zeta(spec, NormParams(0.5, z)) for z in np.linspace(0, 2, 12)
        ]
        assert all(b > a for a, b in zip(values, values[1:]))

    @given(st.floats(0.0, 5.0))
    @settings(max_examples=20, deadline=None)
    def test_scaling(self, c):
        fam = build_heisenberg(1.0, 1.0, REP, box_window([3]))
        scaled = fam.scaled_multilocal(c)
        p = NormParams(0.7, 0.2)
        assert norm_eps_zeta(scaled, p) == pytest.approx(
            c * norm_eps_zeta(fam, p), rel=1e-12, abs=1e-300
        )

    def test_classical_heisenberg_log3(self):
        for nu, coupling, delta in ((1, 1.0, 1.0), (2, 0.5, 2.0), (3, 1.5, 0.3)):
            spec = classical_heisenberg_ti(nu, coupling, delta)
            value = norm_eps_zeta(spec, NormParams(LOG3))
            assert value == pytest.approx(
                6 * coupling * nu * max(abs(delta), 1.0), rel=1e-12
            )


class TestWindowConsistency:
    def test_interior_matches_closed_form(self):
        spec = heisenberg_ti(1, 1.0, 1.0, REP)
        params = NormParams(0.9)
        closed = norm_eps_zeta(spec, params)
        report = window_norms(spec, box_window([5]), params)
        assert report.interior == pytest.approx(closed, rel=1e-12)
        assert report.boundary < closed

    def test_boundary_reported_separately(self):
        spec = heisenberg_ti(1, 1.0, 1.0, REP)
        report = window_norms(spec, box_window([4]), NormParams(0.5))
        # edge sites touch one bond, interior sites two
        assert report.per_site[(0,)] == pytest.approx(report.interior / 2)

    def test_two_dimensional_window(self):
        spec = heisenberg_ti(2, 0.8, 1.3, REP)
        params = NormParams(0.6)
        report = window_norms(spec, box_window([3, 3]), params)
        assert report.interior == pytest.approx(norm_eps_zeta(spec, params), rel=1e-12)
