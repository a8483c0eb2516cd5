"""Domain flows and first variations of T and of the ground eigenvalue.

A flow moves the domain through a velocity field Xi; only its normal
component on the boundary enters the variation formulas:

    dT/dt  = ((1+gamma)/(1-gamma)) * sum_edges (d_nu u)^2 <Xi, nu> dL
    dLam/dt = -sum_edges (d_nu u)^2 <Xi, nu> dL

Both pairings are evaluated in Euclidean boundary quantities; on a
conformal chart the factors e^{phi} of the metric normal derivative,
normal speed and length element cancel exactly, so the same expression is
valid for weighted solves.  Each formula is validated against centered
finite differences of full re-solves on deformed meshes.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from .errors import DeformationError
from .functionals import boundary_normal_derivative, rigidity
from .mesh import boundary_geometry
from .solver import WeightField, solve_eigen, solve_torsion


@dataclasses.dataclass(frozen=True)
class FlowSpec:
    """Velocity field on the chart; t_range is the stated validity interval."""

    name: str
    velocity: object
    t_range: tuple = (-0.25, 0.25)

    def __call__(self, points):
        return np.asarray(self.velocity(np.asarray(points, dtype=float)),
                          dtype=float)


def _radial_velocity(points):
    # unit outward field x/|x|; the center vertex stays put
    norms = np.hypot(points[:, 0], points[:, 1])
    safe = np.where(norms > 0.0, norms, 1.0)
    return points / safe[:, None]


def radial_flow() -> FlowSpec:
    """Unit-speed normal growth of a centered disk: radius r -> r + t."""
    return FlowSpec(name="radial", velocity=_radial_velocity)


def translate_flow(dx: float, dy: float) -> FlowSpec:
    shift = np.array([float(dx), float(dy)])
    return FlowSpec(name=f"translate:{dx:g},{dy:g}",
                    velocity=lambda p: np.broadcast_to(shift, p.shape))


def normal_x_flow() -> FlowSpec:
    """Constant field e_x; normal speed is the x component of the normal.

    A rigid translation, so every first variation vanishes identically;
    useful as a zero cross-check.
    """
    return FlowSpec(name="normal-x",
                    velocity=lambda p: np.broadcast_to(
                        np.array([1.0, 0.0]), p.shape))


def stretch_x_flow() -> FlowSpec:
    """Xi = (x, 0): one-axis dilation with genuinely varying normal speed."""
    return FlowSpec(name="stretch-x",
                    velocity=lambda p: np.column_stack(
                        [p[:, 0], np.zeros(len(p))]))


def flow_from_spec(spec: str) -> FlowSpec:
    """Parse a registry string: radial | translate:dx,dy | normal-x | stretch-x."""
    if spec == "radial":
        return radial_flow()
    if spec == "normal-x":
        return normal_x_flow()
    if spec == "stretch-x":
        return stretch_x_flow()
    if spec.startswith("translate:"):
        try:
            dx, dy = spec.split(":", 1)[1].split(",")
            return translate_flow(float(dx), float(dy))
        except ValueError as exc:
            raise ValueError(f"unrecognized flow spec {spec!r}") from exc
    raise ValueError(f"unrecognized flow spec {spec!r}")


def _as_flow(flow) -> FlowSpec:
    if isinstance(flow, FlowSpec):
        return flow
    if isinstance(flow, str):
        return flow_from_spec(flow)
    if callable(flow):
        return FlowSpec(name="custom", velocity=flow)
    raise TypeError(f"flow must be a FlowSpec, name, or callable, got {flow!r}")


def boundary_tangents(mesh) -> np.ndarray:
    """Unit tangent of each boundary edge, in loop orientation."""
    a = mesh.vertices[mesh.boundary_edges[:, 0]]
    b = mesh.vertices[mesh.boundary_edges[:, 1]]
    tangent = b - a
    return tangent / np.hypot(tangent[:, 0], tangent[:, 1])[:, None]


def boundary_velocity(mesh, flow) -> np.ndarray:
    """Velocity vectors at the boundary edge midpoints, shape (E, 2)."""
    if isinstance(flow, np.ndarray):
        if flow.shape != (len(mesh.boundary_edges), 2):
            raise ValueError("velocity array must have one row per boundary edge")
        return flow
    mids = boundary_geometry(mesh)[0]
    return _as_flow(flow)(mids)


def normal_speed(mesh, flow) -> np.ndarray:
    """Normal component <Xi, nu> per boundary edge (at the edge midpoint)."""
    vel = boundary_velocity(mesh, flow)
    normals = boundary_geometry(mesh)[1]
    return np.einsum("ed,ed->e", vel, normals)


def deform_mesh(mesh, flow, t: float):
    """Single forward-Euler transport x -> x + t Xi(x) of all vertices.

    Exact for the radial and linear flows used in the experiments.  Raises
    DeformationError if the motion inverts or degenerates a triangle.
    """
    vel = _as_flow(flow)(mesh.vertices)
    try:
        return mesh.replace_vertices(mesh.vertices + float(t) * vel)
    except ValueError as exc:
        raise DeformationError(f"flow step t={t:g} broke the mesh: {exc}") from exc


def shape_derivative_torsion(solution, flow) -> float:
    """First variation of T under the flow.

    ((1+gamma)/(1-gamma)) sum (d_nu u)^2 <Xi, nu> dL over boundary edges,
    with the normal derivative recovered from the adjacent triangle.  The
    flow may also be given as per-edge velocity vectors.
    """
    gamma = solution.gamma
    if gamma >= 1.0:
        raise ValueError("the first-variation factor diverges at gamma = 1")
    dn, lengths = boundary_normal_derivative(solution.mesh, solution.u)
    v = normal_speed(solution.mesh, flow)
    integral = float(np.sum(dn * dn * v * lengths))
    return (1.0 + gamma) / (1.0 - gamma) * integral


def shape_derivative_eigen(eig, flow) -> float:
    """First variation of the ground eigenvalue: -sum (d_nu u)^2 <Xi, nu> dL."""
    dn, lengths = boundary_normal_derivative(eig.mesh, eig.u)
    v = normal_speed(eig.mesh, flow)
    return -float(np.sum(dn * dn * v * lengths))


@dataclasses.dataclass(frozen=True)
class VariationReport:
    """Analytic first variation against a centered finite difference."""

    analytic: float
    fd: float
    rel_err: float
    step: float
    flow: str
    kind: str


def _fd_step(mesh, step) -> float:
    if step is not None:
        return float(step)
    diameter = float(np.hypot(np.ptp(mesh.vertices[:, 0]),
                              np.ptp(mesh.vertices[:, 1])))
    return 1e-3 * diameter


def _check_fd_weight(weight):
    if isinstance(weight, WeightField):
        raise TypeError(
            "finite-difference validation needs a weight evaluable at moved "
            "points; pass a chart or callable instead of a WeightField"
        )


def fd_validate_torsion(mesh, gamma, flow, step=None, weight=None,
                        **solve_kw) -> VariationReport:
    """Centered-difference check of the torsion variation.

    Solves on the base mesh and on both deformed meshes (reusing the base
    solution as the Picard initial iterate) and compares the gradient-form
    T difference quotient with the boundary formula.
    """
    _check_fd_weight(weight)
    flow = _as_flow(flow)
    h = _fd_step(mesh, step)
    base = solve_torsion(mesh, gamma, weight=weight, **solve_kw)
    analytic = shape_derivative_torsion(base, flow)

    values = []
    for sign in (1.0, -1.0):
        moved = deform_mesh(mesh, flow, sign * h)
        sol = solve_torsion(moved, gamma, weight=weight, initial=base.u,
                            **solve_kw)
        values.append(rigidity(sol).T_grad)
    fd = (values[0] - values[1]) / (2.0 * h)
    rel_err = abs(analytic - fd) / max(abs(fd), 1e-12)
    return VariationReport(analytic=analytic, fd=fd, rel_err=rel_err,
                           step=h, flow=flow.name, kind="torsion")


def fd_validate_eigen(mesh, flow, step=None, weight=None,
                      **solve_kw) -> VariationReport:
    """Centered-difference check of the eigenvalue variation."""
    _check_fd_weight(weight)
    flow = _as_flow(flow)
    h = _fd_step(mesh, step)
    base = solve_eigen(mesh, weight=weight, **solve_kw)
    analytic = shape_derivative_eigen(base, flow)

    values = []
    for sign in (1.0, -1.0):
        moved = deform_mesh(mesh, flow, sign * h)
        sol = solve_eigen(moved, weight=weight, initial=base.u, **solve_kw)
        values.append(sol.lam)
    fd = (values[0] - values[1]) / (2.0 * h)
    rel_err = abs(analytic - fd) / max(abs(fd), 1e-12)
    return VariationReport(analytic=analytic, fd=fd, rel_err=rel_err,
                           step=h, flow=flow.name, kind="eigen")
