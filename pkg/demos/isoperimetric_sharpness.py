"""Sharpness of the torsion isoperimetric bound across domains.

The ratio T_power / (((1+gamma)/(2 tau)) I_gamma^2) is at most 1 with
equality exactly on round disks.  Rings of disk refinement push the
disk's ratio to 1; the ellipse and square sit strictly below.
"""

import math

import torsionlab as tl

TAU = 4.0 * math.pi

domains = [
    ("disk", "disk:1:80"),
    ("ellipse 2:1", "ellipse:1:0.5:80"),
    ("unit square", "rect:1:1:96:96"),
]

for gamma in (0.0, 0.3, 0.6):
    print(f"gamma = {gamma}")
    for label, spec in domains:
        mesh = tl.mesh_from_spec(spec)
        sol = tl.solve_torsion(mesh, gamma)
        iso = tl.isoperimetry_ratio(tl.rigidity(sol), gamma, TAU)
        print(f"  {label:12s} ratio = {iso.ratio:.4f}   "
              f"T = {iso.lhs:.6f}   kappa = {tl.kappa_gamma(tl.rigidity(sol), gamma):.4f}")
    print()

print("disk ratio under refinement (gamma = 0.3):")
for n in (20, 40, 80):
    sol = tl.solve_torsion(tl.build_disk_mesh(1.0, n), 0.3)
    iso = tl.isoperimetry_ratio(tl.rigidity(sol), 0.3, TAU)
    print(f"  n = {n:3d}   ratio = {iso.ratio:.5f}   gap = {1 - iso.ratio:+.2e}")
