"""Spectral model assembly, derivatives, limits and commutators."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mptspec import (
    DomainError,
    FrequencyGrid,
    InvalidInputError,
    Mode,
    NoDominantModeError,
    Rotation3,
    SpectralModel,
    SymTensor3,
    assemble,
    assemble_dlog,
    beta,
    beta_dlog,
    commutator_Z,
    dominant_mode,
    eigen_sym3,
    limit_tensors,
    mode_tensor,
    modes_from_eigenvalues,
    offdiag_bound_report,
    rotate_model,
    rotate_tensor,
)
from conftest import random_model

nus = st.floats(1e-8, 1e8, allow_nan=False)
lams = st.floats(1e-6, 1e6, allow_nan=False)


def single_mode_model(lam=2.0, couplings=((1.0, 0.0, 0.0),), alpha=1.0):
    return SpectralModel(
        alpha=alpha,
        sigma_star=1.0,
        n0=SymTensor3.zero(),
        modes=(Mode(lam, len(couplings), np.asarray(couplings)),),
    )


class TestBeta:
    def test_zero_frequency(self):
        assert beta(0.0, 3.7) == 0.0

    def test_balance_point(self):
        assert beta(2.5, 2.5) == pytest.approx(-0.5 + 0.5j, abs=1e-15)

    def test_high_frequency_limit(self):
        lam = 4.2
        assert abs(beta(1e12 * lam, lam) - (-1.0)) < 1e-10

    def test_invalid_mode(self):
        with pytest.raises(InvalidInputError):
            beta(1.0, 0.0)
        with pytest.raises(InvalidInputError):
            beta(1.0, -2.0)

    @settings(max_examples=100, deadline=None)
    @given(nus, lams)
    def test_closed_form(self, nu, lam):
        direct = -1j * nu / (1j * nu - lam)
        assert abs(beta(nu, lam) - direct) <= 1e-15 * abs(direct) + 1e-300


class TestBetaDlog:
    def test_balance_point(self):
        d_re, d2_re, _ = beta_dlog(3.0, 3.0)
        assert d_re == pytest.approx(-0.5, abs=1e-15)
        assert d2_re == pytest.approx(0.0, abs=1e-15)

    def test_zero_frequency_domain_error(self):
        with pytest.raises(DomainError):
            beta_dlog(0.0, 1.0)

    def test_finite_difference_oracle(self):
        rng = np.random.default_rng(12)
        h = 1e-5
        h2 = 1e-3  # second difference needs a larger step against cancellation
        for _ in range(300):
            nu = 10.0 ** rng.uniform(-3, 3)
            lam = 10.0 ** rng.uniform(-2, 2)
            d_re, d2_re, d_im = beta_dlog(nu, lam)
            re = lambda lognu: beta(np.exp(lognu), lam).real
            im = lambda lognu: beta(np.exp(lognu), lam).imag
            x = np.log(nu)
            fd_re = (re(x + h) - re(x - h)) / (2 * h)
            fd2_re = (re(x + h2) - 2 * re(x) + re(x - h2)) / h2**2
            fd_im = (im(x + h) - im(x - h)) / (2 * h)
            # the difference quotient carries cancellation noise eps/(2h)
            # ~ 1.1e-11 once beta saturates; twice that floor is the
            # oracle's own precision
            floor = 2e-11
            assert d_re == pytest.approx(fd_re, rel=1e-6, abs=floor)
            assert d2_re == pytest.approx(fd2_re, rel=1e-5, abs=floor / h2)
            assert d_im == pytest.approx(fd_im, rel=1e-6, abs=floor)

    def test_dre_is_minus_two_im_beta_squared(self):
        for nu, lam in ((0.3, 2.0), (5.0, 5.0), (100.0, 0.7)):
            d_re, _, _ = beta_dlog(nu, lam)
            assert d_re == pytest.approx(-2.0 * beta(nu, lam).imag ** 2, rel=1e-14)


class TestModeTensor:
    def test_dark_mode_zero(self):
        model = SpectralModel(
            alpha=1.0,
            sigma_star=1.0,
            n0=SymTensor3.zero(),
            modes=(Mode(1.0, 2, np.zeros((2, 3)), dark=True),),
        )
        assert mode_tensor(model, 0).norm() == 0.0

    def test_single_axis(self):
        model = single_mode_model(lam=2.0, couplings=((1.0, 0.0, 0.0),), alpha=1.0)
        np.testing.assert_allclose(
            mode_tensor(model, 0).matrix, np.diag([-0.5, 0.0, 0.0]), atol=1e-16
        )

    def test_negative_semidefinite_rank_bounded(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            mult = int(rng.integers(1, 4))
            model = SpectralModel(
                alpha=0.01,
                sigma_star=1e6,
                n0=SymTensor3.zero(),
                modes=(Mode(3.0, mult, rng.standard_normal((mult, 3))),),
            )
            a = mode_tensor(model, 0)
            w, _ = eigen_sym3(a)
            assert np.all(w <= 1e-14 * max(a.norm(), 1e-300))
            assert (w < -1e-12 * a.norm()).sum() <= mult


class TestAssemble:
    def test_zero_frequency(self):
        model = random_model(0)
        r, i, m = assemble(model, 0.0)
        assert r.norm() == 0.0 and i.norm() == 0.0
        np.testing.assert_array_equal(m.real.coeffs, model.n0.coeffs)

    def test_single_mode_balance(self):
        model = single_mode_model(lam=1.5, couplings=((0.2, -0.7, 1.1),))
        a = mode_tensor(model, 0)
        r, i, _ = assemble(model, 1.5)
        np.testing.assert_allclose(r.coeffs, 0.5 * a.coeffs, rtol=1e-14)
        np.testing.assert_allclose(i.coeffs, -0.5 * a.coeffs, rtol=1e-14)

    def test_negative_frequency_rejected(self):
        with pytest.raises(DomainError):
            assemble(random_model(1), -1.0)

    def test_definiteness_over_grid(self):
        for seed in range(8):
            model = random_model(seed)
            lam_max = model.modes[-1].lam
            for nu in np.geomspace(1e-3 * model.modes[0].lam, 1e3 * lam_max, 25):
                r, i, _ = assemble(model, nu)
                wr, _ = eigen_sym3(r)
                wi, _ = eigen_sym3(i)
                assert wr.max() <= 1e-12 * max(r.norm(), 1e-300)
                assert wi.min() >= -1e-12 * max(i.norm(), 1e-300)

    def test_offdiag_bounds_always_pass(self):
        for seed in range(10):
            model = random_model(seed, n_modes=4)
            for nu in np.geomspace(1e-2, 1e4, 30):
                r, i, _ = assemble(model, nu)
                rep = offdiag_bound_report(r, i)
                assert rep.passed

    def test_monotone_diagonal_and_vanishing_imag(self):
        model = random_model(17, n_modes=4)
        grid = np.geomspace(1e-4 * model.modes[0].lam, 1e6 * model.modes[-1].lam, 60)
        r_diag = np.array([assemble(model, nu)[0].coeffs[:3] for nu in grid])
        assert np.all(np.diff(r_diag, axis=0) <= 1e-12 * np.abs(r_diag[-1]).max())
        i_first = assemble(model, grid[0])[1]
        i_last = assemble(model, grid[-1])[1]
        i_mid = assemble(model, model.modes[0].lam)[1]
        assert i_first.norm() < 1e-3 * i_mid.norm()
        assert i_last.norm() < 1e-3 * i_mid.norm()


class TestAssembleDlog:
    def test_single_mode_inflection_and_stationary(self):
        model = single_mode_model(lam=3.3, couplings=((0.5, 0.5, -0.2),))
        _, d2_r, d_i = assemble_dlog(model, 3.3)
        assert d2_r.norm() <= 1e-14 * mode_tensor(model, 0).norm()
        assert d_i.norm() <= 1e-14 * mode_tensor(model, 0).norm()

    def test_diagonal_slope_nonpositive(self):
        for seed in range(6):
            model = random_model(seed)
            for nu in np.geomspace(0.01, 100.0, 20):
                d_r, _, _ = assemble_dlog(model, nu)
                assert np.all(d_r.coeffs[:3] <= 1e-15)

    def test_finite_difference_oracle(self):
        model = random_model(23, n_modes=3)
        h = 1e-5
        for nu in np.geomspace(0.05, 50.0, 12):
            d_r, d2_r, d_i = assemble_dlog(model, nu)
            x = np.log(nu)
            r = lambda lx: assemble(model, np.exp(lx))[0].coeffs
            i = lambda lx: assemble(model, np.exp(lx))[1].coeffs
            fd_r = (r(x + h) - r(x - h)) / (2 * h)
            fd2_r = (r(x + h) - 2 * r(x) + r(x - h)) / h**2
            fd_i = (i(x + h) - i(x - h)) / (2 * h)
            scale = max(np.abs(d_r.coeffs).max(), np.abs(d_i.coeffs).max())
            np.testing.assert_allclose(d_r.coeffs, fd_r, atol=1e-5 * scale)
            np.testing.assert_allclose(d2_r.coeffs, fd2_r, atol=5e-4 * scale)
            np.testing.assert_allclose(d_i.coeffs, fd_i, atol=1e-5 * scale)

    def test_single_mode_slope_vs_imag_squared(self):
        # |dR_ii/dlog| = 2 I_ii^2 / |A_ii| when one mode carries everything
        model = single_mode_model(lam=2.2, couplings=((0.8, 0.3, 0.0),))
        a = mode_tensor(model, 0)
        for nu in (0.3, 2.2, 31.0):
            d_r, _, _ = assemble_dlog(model, nu)
            _, i_t, _ = assemble(model, nu)
            for k in range(2):  # axes with nonzero coupling
                expect = 2.0 * i_t.coeffs[k] ** 2 / abs(a.coeffs[k])
                assert abs(d_r.coeffs[k]) == pytest.approx(expect, rel=1e-12)


class TestLimits:
    def test_empty_model(self):
        model = SpectralModel(
            alpha=1.0, sigma_star=1.0, n0=SymTensor3.diag(1, 2, 3), modes=()
        )
        m0, minf = limit_tensors(model)
        np.testing.assert_array_equal(minf.coeffs, model.n0.coeffs)

    def test_minf_minus_m0_negative_semidefinite(self):
        for seed in range(6):
            model = random_model(seed)
            m0, minf = limit_tensors(model)
            w, _ = eigen_sym3(minf - m0)
            assert w.max() <= 1e-13 * max((minf - m0).norm(), 1e-300)

    def test_high_frequency_approach(self):
        model = random_model(2, n_modes=3)
        _, minf = limit_tensors(model)
        _, i_t, m_t = assemble(model, 1e9 * model.modes[-1].lam)
        assert (m_t.real - minf).norm() <= 1e-6 * minf.norm()
        assert i_t.norm() <= 1e-6 * minf.norm()


class TestDominantMode:
    def test_single_mode(self):
        assert dominant_mode(single_mode_model(), 0, 0, 10.0) == 0

    def test_band_limited_peak(self):
        # equal |A_ij| needs couplings scaled like 1/sqrt(lam)
        modes = (
            Mode(10.0, 1, np.array([[1.0, 0.0, 0.0]]) / np.sqrt(10.0)),
            Mode(1000.0, 1, np.array([[1.0, 0.0, 0.0]]) / np.sqrt(1000.0)),
        )
        model = SpectralModel(
            alpha=1.0, sigma_star=1.0, n0=SymTensor3.zero(), modes=modes
        )
        a0 = abs(mode_tensor(model, 0)[0, 0])
        a1 = abs(mode_tensor(model, 1)[0, 0])
        assert a0 == pytest.approx(a1, rel=1e-12)
        assert dominant_mode(model, 0, 0, 47.0) == 0

    def test_brute_force_grid_oracle(self):
        for seed in range(20):
            model = random_model(seed, n_modes=4)
            nu_max = 10.0 ** np.random.default_rng(seed).uniform(-1, 3)
            grid = np.geomspace(1e-6 * nu_max, nu_max, 4000)
            best, best_val = None, 0.0
            for n in range(len(model.modes)):
                lam = model.modes[n].lam
                a_ij = abs(mode_tensor(model, n)[0, 1])
                vals = a_ij * grid * lam / (grid**2 + lam**2)
                v = vals.max()
                if v > best_val:
                    best, best_val = n, v
            if best is None:
                continue
            assert dominant_mode(model, 0, 1, nu_max) == best

    def test_all_dark_raises(self):
        model = SpectralModel(
            alpha=1.0,
            sigma_star=1.0,
            n0=SymTensor3.zero(),
            modes=(Mode(1.0, 1, np.zeros((1, 3)), dark=True),),
        )
        with pytest.raises(NoDominantModeError):
            dominant_mode(model, 0, 0, 1.0)


class TestCommutators:
    def test_axis_aligned_model_commutes(self):
        # couplings on distinct axes keep R and I diagonal at every frequency
        modes = (
            Mode(1.0, 1, np.array([[1.0, 0.0, 0.0]])),
            Mode(4.0, 1, np.array([[0.0, 2.0, 0.0]])),
            Mode(9.0, 1, np.array([[0.0, 0.0, 0.5]])),
        )
        model = SpectralModel(
            alpha=1.0, sigma_star=1.0, n0=SymTensor3.zero(), modes=modes
        )
        for nu1, nu2 in ((0.5, 7.0), (2.0, 2.0), (30.0, 0.1)):
            for kind in ("RI", "RR", "II"):
                z = commutator_Z(model, nu1, nu2, kind=kind)
                assert np.abs(z).max() == 0.0

    def test_single_mode_all_kinds_zero(self):
        model = single_mode_model(lam=2.0, couplings=((0.3, -0.4, 0.8), (1.0, 0.2, 0.0)))
        scale = mode_tensor(model, 0).norm() ** 2
        for nu1, nu2 in ((0.2, 5.0), (2.0, 20.0)):
            for kind in ("RI", "RR", "II"):
                z = commutator_Z(model, nu1, nu2, kind=kind)
                assert np.abs(z).max() <= 1e-14 * scale

    def test_growth_bound_two_modes(self):
        rng = np.random.default_rng(31)
        modes = (
            Mode(1.0, 1, rng.standard_normal((1, 3))),
            Mode(6.0, 1, rng.standard_normal((1, 3))),
        )
        model = SpectralModel(
            alpha=1.0, sigma_star=1.0, n0=SymTensor3.zero(), modes=modes
        )
        t0_sq = sum(float((m.couplings**2).sum()) for m in model.modes)
        e1 = np.sqrt(sum(m.lam**2 * float((m.couplings**2).sum()) for m in model.modes))
        c_ri = 6.0 * (0.25 * e1 * np.sqrt(t0_sq)) * (0.5 * t0_sq)
        grid = np.geomspace(1e-3 * 1.0, 1e3 * 6.0, 200)
        ratios = [
            np.abs(commutator_Z(model, nu, kind="RI")).max() / nu for nu in grid
        ]
        assert max(ratios) <= c_ri
        assert max(ratios) > 0.0  # non-commuting pair really is non-commuting

    def test_diagonal_entries_zero(self):
        model = random_model(8, n_modes=3)
        z = commutator_Z(model, 1.3, kind="RI")
        assert np.abs(np.diag(z)).max() <= 1e-16 * max(np.abs(z).max(), 1e-300)


class TestRotationEquivariance:
    def test_assemble_equivariant_and_eigen_invariant(self):
        rng = np.random.default_rng(77)
        for seed in range(8):
            model = random_model(seed)
            q_raw, r_mat = np.linalg.qr(rng.standard_normal((3, 3)))
            q = Rotation3(q_raw * np.sign(np.diag(r_mat)))
            rotated = rotate_model(model, q)
            for nu in (0.1, 1.7, 42.0):
                r0, i0, _ = assemble(model, nu)
                r1, i1, _ = assemble(rotated, nu)
                scale = max(r0.norm() + i0.norm(), 1e-300)
                assert (r1 - rotate_tensor(r0, q)).norm() <= 1e-12 * scale
                assert (i1 - rotate_tensor(i0, q)).norm() <= 1e-12 * scale
                w0, _ = eigen_sym3(r0)
                w1, _ = eigen_sym3(r1)
                np.testing.assert_allclose(w1, w0, atol=1e-12 * scale)


class TestModelValidation:
    def test_modes_must_increase(self):
        with pytest.raises(InvalidInputError):
            SpectralModel(
                alpha=1.0,
                sigma_star=1.0,
                n0=SymTensor3.zero(),
                modes=(
                    Mode(2.0, 1, np.ones((1, 3))),
                    Mode(2.0, 1, np.ones((1, 3))),
                ),
            )

    def test_merge_rule(self):
        lams = np.array([1.0, 1.0 + 1e-12, 5.0, 5.0 + 1e-10, 9.0])
        rows = np.arange(15.0).reshape(5, 3) + 1.0
        modes = modes_from_eigenvalues(lams, rows)
        assert [(m.multiplicity) for m in modes] == [2, 2, 1]
        np.testing.assert_array_equal(modes[0].couplings, rows[:2])

    def test_distinct_eigenvalues_not_merged(self):
        modes = modes_from_eigenvalues(
            np.array([1.0, 1.001, 2.0]), np.ones((3, 3))
        )
        assert len(modes) == 3

    def test_nu_omega_conversion(self):
        model = random_model(0, alpha=0.01, sigma_star=5.96e6)
        omega = 2.0 * np.pi * 1e4
        assert float(model.nu_from_omega(omega)) == pytest.approx(47.058, abs=0.1)
        assert float(model.omega_from_nu(model.nu_from_omega(omega))) == pytest.approx(
            omega
        )

    def test_frequency_grid_validation(self):
        with pytest.raises(InvalidInputError):
            FrequencyGrid(np.array([1.0, 1.0]), "nu")
        with pytest.raises(InvalidInputError):
            FrequencyGrid(np.array([-1.0, 1.0]), "nu")
        grid = FrequencyGrid(np.array([1.0, 10.0]), "omega")
        model = random_model(0)
        np.testing.assert_allclose(
            grid.to_nu(model), model.nu_from_omega(grid.values)
        )


class TestModeInvariants:
    def test_zero_couplings_require_dark(self):
        with pytest.raises(InvalidInputError):
            Mode(1.0, 1, np.zeros((1, 3)))
        Mode(1.0, 1, np.zeros((1, 3)), dark=True)

    def test_positive_eigenvalue_required(self):
        with pytest.raises(InvalidInputError):
            Mode(0.0, 1, np.ones((1, 3)))
        with pytest.raises(InvalidInputError):
            Mode(-1.0, 1, np.ones((1, 3)))

    def test_coupling_shape_checked(self):
        with pytest.raises(InvalidInputError):
            Mode(1.0, 2, np.ones((1, 3)))
        with pytest.raises(InvalidInputError):
            Mode(1.0, 1, np.array([[1.0, np.nan, 0.0]]))
