import numpy as np
import pytest

from pdm_oscillator import (
    CartesianEigenfunction,
    DomainError,
    ModelParams,
    RadialGrid,
    SquareGrid,
    commutation_residual_2d,
    default_radial_grid,
    discretize_radial,
    grid_eigen_residual,
    oracle_report,
    solve_generalized_eigen,
)
from pdm_oscillator.oracle import second_derivative

P3 = ModelParams(lam=0.02, omega=1.0, hbar=1.0, dim=3)


class TestRadialGrid:
    def test_validation(self):
        with pytest.raises(DomainError):
            RadialGrid(r_min=0.0, r_max=10.0)
        with pytest.raises(DomainError):
            RadialGrid(r_min=2.0, r_max=1.0)
        with pytest.raises(DomainError):
            RadialGrid(r_min=1e-6, r_max=10.0, num_points=50)

    def test_spacing_and_nodes(self):
        grid = RadialGrid(r_min=1e-6, r_max=10.0, num_points=101)
        nodes = grid.nodes()
        assert len(nodes) == 101
        assert nodes[0] == 1e-6
        assert nodes[-1] == 10.0
        assert grid.spacing == pytest.approx((10.0 - 1e-6) / 100)

    def test_refinement_halves_spacing(self):
        grid = RadialGrid(r_min=1e-6, r_max=10.0, num_points=101)
        fine = grid.refined()
        assert fine.spacing == pytest.approx(grid.spacing / 2.0)
        assert fine.r_min == grid.r_min and fine.r_max == grid.r_max


class TestDiscretization:
    def test_flat_one_dimensional_reduces_to_textbook(self):
        # lam = 0, N = 1, l = 0: -(hbar^2/2) phi'' + (omega^2/2) r^2 phi
        p = ModelParams(lam=0.0, omega=1.0, hbar=1.0, dim=1)
        grid = RadialGrid(r_min=1e-9, r_max=10.0, num_points=500)
        op = discretize_radial(p, 0, grid)
        h = grid.spacing
        assert np.allclose(op.offdiag, -0.5 / h**2)
        interior = op.diag[1:]
        r = op.nodes[1:]
        assert np.allclose(interior, 1.0 / h**2 + 0.5 * r**2)
        assert np.allclose(op.weight[1:], 1.0)

    def test_stiffness_symmetric_by_construction(self):
        op = discretize_radial(P3, 1, RadialGrid(1e-6, 8.0, 300))
        dense = op.dense_stiffness()
        assert np.max(np.abs(dense - dense.T)) == 0.0

    def test_weight_matches_measure(self):
        op = discretize_radial(P3, 2, RadialGrid(1e-6, 8.0, 300))
        expected = (1.0 + P3.lam * op.nodes**2) * op.nodes**2
        assert np.allclose(op.weight, expected, rtol=1e-14)

    def test_rejects_negative_l(self):
        with pytest.raises(DomainError):
            discretize_radial(P3, -1, RadialGrid(1e-6, 8.0, 300))


class TestGeneralizedEigen:
    def test_flat_oscillator_levels(self):
        p = ModelParams(lam=0.0, omega=1.0, hbar=1.0, dim=3)
        op = discretize_radial(p, 0, default_radial_grid(p, 0, 2))
        values = solve_generalized_eigen(op, 3)
        assert values == pytest.approx([1.5, 3.5, 5.5], abs=2e-4)

    def test_count_bound(self):
        op = discretize_radial(P3, 0, RadialGrid(1e-6, 8.0, 300))
        with pytest.raises(DomainError):
            solve_generalized_eigen(op, op.size())

    def test_nonpositive_weight_rejected(self):
        op = discretize_radial(P3, 0, RadialGrid(1e-6, 8.0, 300))
        bad = type(op)(
            diag=op.diag,
            offdiag=op.offdiag,
            weight=np.zeros_like(op.weight),
            nodes=op.nodes,
            l=op.l,
            params=op.params,
        )
        with pytest.raises(DomainError):
            solve_generalized_eigen(bad, 2)

    def test_eigenvector_node_structure(self):
        op = discretize_radial(P3, 0, default_radial_grid(P3, 0, 3))
        _, vectors = solve_generalized_eigen(op, 4, return_vectors=True)
        for j in range(4):
            v = vectors[:, j]
            core = v[np.abs(v) > 1e-8 * np.max(np.abs(v))]
            assert int(np.sum(np.diff(np.sign(core)) != 0)) == j


class TestOracleReport:
    def test_flat_baseline(self):
        p = ModelParams(lam=0.0, omega=1.0, hbar=1.0, dim=3)
        report = oracle_report(p, l_max=2, k_max=2)
        for row in report.rows():
            expected = 1.0 * (row.n + 1.5)
            assert row.energy == pytest.approx(expected, rel=1e-5)
        assert report.extra_columns["rel_error"].max() < 1e-5

    def test_degenerate_multiplet(self):
        report = oracle_report(P3, l_max=2, k_max=1)
        cols = report.extra_columns
        by_kl = {
            (int(k), int(l)): e
            for k, l, e in zip(cols["k"], cols["l"], report.energy)
        }
        rel = abs(by_kl[(1, 0)] - by_kl[(0, 2)]) / by_kl[(0, 2)]
        assert rel < 1e-5

    def test_second_order_convergence(self):
        report = oracle_report(P3, l_max=1, k_max=1)
        orders = report.extra_columns["convergence_order"]
        orders = orders[np.isfinite(orders)]
        assert np.all(np.abs(orders - 2.0) <= 0.2)

    def test_no_boundary_flags_on_default_grid(self):
        report = oracle_report(P3, l_max=1, k_max=1)
        assert np.all(report.extra_columns["boundary_contaminated"] == 0.0)

    def test_cramped_box_flags_states(self):
        # squeezing the box leaves visible mass at the wall for excited states
        grid = RadialGrid(1e-6, 3.2, 400)
        report = oracle_report(P3, l_max=0, k_max=2, grid=grid)
        assert report.extra_columns["boundary_contaminated"].max() == 1.0

    def test_energies_below_threshold(self):
        report = oracle_report(P3, l_max=2, k_max=2)
        assert np.all(report.gap_to_threshold > 0)

    def test_schema_extends_spectrum_table(self):
        report = oracle_report(P3, l_max=0, k_max=0)
        header = report.header()
        assert header[:5] == ["n", "energy", "degeneracy", "gap_to_threshold", "residual"]
        assert "rel_error" in header and "convergence_order" in header


class TestSecondDerivative:
    def test_matches_analytic_on_smooth_function(self):
        x = np.linspace(-3, 3, 601)
        h = x[1] - x[0]
        d2 = second_derivative(np.sin(x), h)
        interior = slice(4, -4)
        # error is rounding-limited at ~eps/h^2, far below truncation needs
        assert np.max(np.abs(d2[interior] + np.sin(x)[interior])) < 5e-11


class TestGridResidual:
    def test_three_dimensional_state(self):
        f = CartesianEigenfunction.from_occupations((1, 1, 0), P3)
        res = grid_eigen_residual(
            f, f.state.energy, P3, half_width=9.0 / f.state.beta, num_points=160
        )
        assert res < 1e-6


class TestCommutation:
    def test_flat_case_vanishes_under_refinement(self):
        p = ModelParams(lam=0.0, omega=1.0, hbar=1.0, dim=2)
        grid = SquareGrid(half_width=6.0, num_points=121)
        coarse = commutation_residual_2d(p, grid)
        fine = commutation_residual_2d(p, grid.refined())
        assert fine < coarse
        assert 2.8 < coarse / fine < 5.5  # ~second order

    def test_deformed_case_second_order(self):
        # the mass-factor terms carry larger truncation constants, so the
        # asymptotic regime needs finer grids than the flat case
        p = ModelParams(lam=0.02, omega=1.0, hbar=1.0, dim=2)
        mid = commutation_residual_2d(p, SquareGrid(half_width=6.0, num_points=481))
        fine = commutation_residual_2d(p, SquareGrid(half_width=6.0, num_points=961))
        finest = commutation_residual_2d(p, SquareGrid(half_width=6.0, num_points=1921))
        assert mid > fine > finest
        assert 3.0 < fine / finest < 5.2

    def test_radial_quadratic_in_discrete_kernel(self):
        # a radial quadratic is annihilated by the discrete angular operator
        # to rounding, so at lam=0 the commutator is rounding-level noise
        p = ModelParams(lam=0.0, omega=1.0, hbar=1.0, dim=2)
        grid = SquareGrid(half_width=6.0, num_points=121)
        x, y = grid.axes()
        xm, ym = np.meshgrid(x, y, indexing="ij")
        f = 1.0 + 0.3 * (xm**2 + ym**2)
        generic = commutation_residual_2d(p, grid)
        radial = commutation_residual_2d(p, grid, test_fields=[f])
        assert radial < 1e-9 * max(generic, 1.0)

    def test_radial_bump_much_smaller_than_generic(self):
        # the angular operator annihilates radial functions in the continuum,
        # so only discretization noise survives and it refines away
        p = ModelParams(lam=0.02, omega=1.0, hbar=1.0, dim=2)

        def radial_residual(npts):
            grid = SquareGrid(half_width=6.0, num_points=npts)
            x, y = grid.axes()
            xm, ym = np.meshgrid(x, y, indexing="ij")
            s2 = (xm**2 + ym**2) / 4.5**2
            bump = np.zeros_like(xm)
            inside = s2 < 1.0
            bump[inside] = np.exp(1.0 - 1.0 / (1.0 - s2[inside]))
            return commutation_residual_2d(p, grid, test_fields=[bump])

        grid = SquareGrid(half_width=6.0, num_points=161)
        generic = commutation_residual_2d(p, grid)
        radial = radial_residual(161)
        assert radial < 0.1 * generic
        assert 3.0 < radial / radial_residual(321) < 6.0

    def test_requires_two_dimensions(self):
        with pytest.raises(DomainError):
            commutation_residual_2d(P3, SquareGrid(half_width=6.0))
