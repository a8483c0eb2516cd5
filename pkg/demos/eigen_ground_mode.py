"""Ground Dirichlet mode: eigen isoperimetry and the curvature sweep.

The bound 1 <= (lam/tau) (int u dA)^2 for the L2-normalized ground mode
is saturated by round disks.  On a curved surface the normalized
eigenvalue Q(r) = lam(B_r) r^(tau/(2 pi)) is nonincreasing in r.
"""

import math

import numpy as np

import torsionlab as tl

TAU = 4.0 * math.pi

print("first Dirichlet eigenvalue and the isoperimetric ratio:")
for label, spec in (("disk", "disk:1:60"), ("square", "rect:1:1:48:48")):
    eig = tl.solve_eigen(tl.mesh_from_spec(spec))
    ratio = tl.eigen_isoperimetry_ratio(eig, TAU).ratio
    print(f"  {label:7s} lam = {eig.lam:9.5f}   ratio = {ratio:.4f}")
print(f"  (disk exact lam = j0^2 = {5.783185962946785:.5f}, "
      f"square exact lam = 2 pi^2 = {2 * math.pi**2:.5f})")

print("\nhemisphere two ways: geodesic oracle vs stereographic chart")
oracle = tl.shoot_eigen(tl.sphere_metric(), math.pi / 2)
w = lambda p: 4.0 / (1.0 + (p**2).sum(axis=1)) ** 2
chart = tl.solve_eigen(tl.build_disk_mesh(1.0, 40), weight=w)
print(f"  oracle lam = {oracle.lam:.8f}   chart lam = {chart.lam:.8f}   "
      f"(exact 2)")

print("\nnormalized eigenvalue along growing geodesic disks:")
radii = np.linspace(0.5, 2.0, 4)
for name in ("flat", "cone:0.5:0.02"):
    metric = tl.metric_from_spec(name)
    tau = 4 * math.pi if name == "flat" else 2 * math.pi
    rows = tl.sweep_eigen_Q(metric, tau, radii)
    q = [row["Q"] for row in rows]
    print(f"  {name:12s} Q = " + "  ".join(f"{v:.5f}" for v in q))
