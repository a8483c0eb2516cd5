import math

import numpy as np
import pytest
import scipy.sparse as sp

import torsionlab as tl
from torsionlab import solver
from torsionlab.errors import ConvergenceError


def test_cg_solves_spd_system():
    n = 40
    main = np.full(n, 2.0)
    A = sp.diags([np.full(n - 1, -1.0), main, np.full(n - 1, -1.0)],
                 [-1, 0, 1], format="csr")
    b = np.sin(np.linspace(0, 3, n))
    x, iters = solver.cg_solve(A, b, tol=1e-13)
    assert np.linalg.norm(A @ x - b) <= 1e-12 * np.linalg.norm(b)
    x2, iters2 = solver.cg_solve(A, b, x0=x, tol=1e-13)
    assert iters2 <= 1  # warm start from the answer
    z, it0 = solver.cg_solve(A, np.zeros(n))
    assert not z.any() and it0 == 0


def test_cg_raises_on_iteration_starvation():
    n = 400
    A = sp.diags([np.full(n - 1, -1.0), np.full(n, 2.0), np.full(n - 1, -1.0)],
                 [-1, 0, 1], format="csr")
    with pytest.raises(ConvergenceError) as err:
        solver.cg_solve(A, np.ones(n), tol=1e-14, max_iter=3)
    assert len(err.value.history) == 3


def test_stiffness_on_reference_triangle():
    m = tl.TriMesh.from_arrays(
        np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]),
        np.array([[0, 1, 2]]))
    K = solver.assemble_stiffness(m).toarray()
    expected = np.array([[1.0, -0.5, -0.5],
                         [-0.5, 0.5, 0.0],
                         [-0.5, 0.0, 0.5]])
    assert np.allclose(K, expected)
    # constants are in the kernel
    assert np.allclose(K @ np.ones(3), 0.0, atol=1e-15)


def test_mass_matrix_quadrature_identities():
    m = tl.build_disk_mesh(1.0, 6)
    M = solver.assemble_mass(m, solver.weight_midpoints(m, None))
    assert M.toarray() == pytest.approx(M.toarray().T)
    # row sums integrate the hat functions: total = mesh area
    assert M.sum() == pytest.approx(m.triangle_areas().sum(), rel=1e-12)
    # M x . x equals the midpoint quadrature of the interpolant squared
    rng = np.random.default_rng(7)
    u = rng.standard_normal(len(m.vertices))
    quad = solver.integrate_midpoint(m, solver.midpoint_values(m, u) ** 2)
    assert float(u @ (M @ u)) == pytest.approx(quad, rel=1e-12)


def test_weight_field_validation(disk40):
    with pytest.raises(ValueError):
        tl.WeightField(np.full(len(disk40.vertices), -1.0))
    with pytest.raises(ValueError):
        tl.WeightField(np.ones((3, 2)))
    # length mismatch surfaces where the field meets a mesh
    with pytest.raises(ValueError):
        solver.weight_midpoints(disk40, tl.WeightField(np.ones(3)))
    w = tl.WeightField.ones(disk40)
    with pytest.raises(ValueError):
        w.values[0] = 2.0


def test_gamma_zero_linear_solve(disk40_g0, oracle_flat_g0):
    sol = disk40_g0
    assert sol.iterations == 1
    assert sol.u[0] == pytest.approx(oracle_flat_g0.alpha, rel=1e-3)
    interior = sol.mesh.interior_vertices
    assert np.all(sol.u[interior] > 0.0)
    assert np.all(sol.u[sol.mesh.boundary_vertices] == 0.0)


def test_picard_matches_oracle_profile(disk40_g03):
    # frozen radial-oracle values, flat gamma=0.3 unit disk
    assert disk40_g03.u[0] == pytest.approx(0.11829895722304683, rel=2e-3)
    assert disk40_g03.residual <= 1e-10
    r = np.hypot(*disk40_g03.mesh.vertices.T)
    ring = np.abs(r - 0.5) < 1e-9
    prof = tl.shoot_torsion(tl.flat_metric(), 0.3, 1.0)
    assert np.allclose(disk40_g03.u[ring], prof.value(0.5), rtol=3e-3)


def test_picard_gamma_06(disk40):
    sol = tl.solve_torsion(disk40, 0.6)
    assert sol.u[0] == pytest.approx(0.01810930539468011, rel=5e-3)
    assert sol.iterations > 10  # genuinely nonlinear regime


def test_gamma_validation(disk40):
    for bad in (-0.1, 1.0, 1.7, float("nan")):
        with pytest.raises(ValueError):
            tl.solve_torsion(disk40, bad)
    with pytest.raises(ValueError):
        tl.solve_torsion(disk40, 0.3, damping=0.0)


def test_warm_start_cuts_iterations(disk40, disk40_g03):
    cold = disk40_g03.iterations
    warm = tl.solve_torsion(disk40, 0.3, initial=disk40_g03.u)
    assert warm.iterations < cold
    assert np.allclose(warm.u, disk40_g03.u, atol=1e-8)


def test_convergence_error_carries_history(disk40):
    with pytest.raises(ConvergenceError) as err:
        tl.solve_torsion(disk40, 0.6, max_iter=3)
    assert len(err.value.history) == 3


def test_solution_convergence_order():
    errs = []
    for n in (10, 20, 40):
        m = tl.build_disk_mesh(1.0, n)
        rep = tl.rigidity(tl.solve_torsion(m, 0.0))
        errs.append(abs(rep.T_grad - math.pi / 8) / (math.pi / 8))
    rate = np.log2(errs[0] / errs[1]), np.log2(errs[1] / errs[2])
    assert min(rate) > 1.8  # T converges at second order


def test_eigen_disk(disk40_eigen):
    eig = disk40_eigen
    # j0^2, first Dirichlet eigenvalue of the unit disk
    assert eig.lam == pytest.approx(5.783185962946785, rel=1e-3)
    interior = eig.mesh.interior_vertices
    assert np.all(eig.u[interior] > 0.0)
    M = solver.assemble_mass(eig.mesh, solver.weight_midpoints(eig.mesh, None))
    assert float(eig.u @ (M @ eig.u)) == pytest.approx(1.0, abs=1e-10)


def test_eigen_square():
    m = tl.build_rectangle_mesh(1.0, 1.0, 24, 24)
    eig = tl.solve_eigen(m)
    assert eig.lam == pytest.approx(2 * math.pi**2, rel=5e-3)


def test_hemisphere_chart_cross_checks(disk40):
    """Stereographic chart of the hemisphere: weight 4/(1+|x|^2)^2 on the
    unit disk reproduces geodesic-ball results from the radial oracle."""
    w = lambda p: 4.0 / (1.0 + (p**2).sum(axis=1)) ** 2
    eig = tl.solve_eigen(disk40, weight=w)
    assert eig.lam == pytest.approx(2.0, rel=2e-3)  # oracle: 2.0000000000006635
    sol = tl.solve_torsion(disk40, 0.3, weight=w)
    rep = tl.rigidity(sol)
    # frozen oracle values for the geodesic half-sphere, gamma = 0.3
    assert rep.T_grad == pytest.approx(1.2644371319706278, rel=5e-3)
    assert sol.u[0] == pytest.approx(0.5160832422455011, rel=5e-3)


def test_weight_field_matches_callable(disk40):
    w_fn = lambda p: 1.0 + 0.5 * p[:, 0] ** 2
    field = tl.WeightField.from_function(disk40, w_fn)
    a = tl.solve_torsion(disk40, 0.0, weight=field)
    b = tl.solve_torsion(disk40, 0.0, weight=w_fn)
    # field path interpolates vertex weights to midpoints, callable is exact
    assert np.allclose(a.u, b.u, atol=2e-4)
