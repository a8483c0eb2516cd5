"""Conforming P1 triangulations of the reference domains.

Triangles are stored counterclockwise; boundary edges are recovered from
the triangle list (an edge on the boundary appears in exactly one triangle)
and kept in counterclockwise order around the domain, so the outward normal
of a boundary edge (a, b) is the tangent rotated by -90 degrees.  Meshes
are immutable once built: the coordinate and index arrays are write-locked.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from .errors import DomainError


def _signed_areas(vertices: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    p = vertices[triangles]
    return 0.5 * ((p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1])
                  - (p[:, 2, 0] - p[:, 0, 0]) * (p[:, 1, 1] - p[:, 0, 1]))


@dataclasses.dataclass(frozen=True)
class TriMesh:
    """Triangulated planar domain.

    ``boundary_edges`` lists directed vertex pairs in counterclockwise loop
    order and ``boundary_edge_tri`` the index of the unique triangle touching
    each of them.  ``h`` is the longest edge in the mesh.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    boundary_vertices: np.ndarray
    boundary_edges: np.ndarray
    boundary_edge_tri: np.ndarray
    h: float

    def __post_init__(self):
        for arr in (self.vertices, self.triangles, self.boundary_vertices,
                    self.boundary_edges, self.boundary_edge_tri):
            arr.setflags(write=False)

    @classmethod
    def from_arrays(cls, vertices, triangles) -> "TriMesh":
        """Validate raw arrays and derive boundary structure.

        Raises ValueError for inverted triangles, nonconforming edge use,
        or a boundary that does not close up into loops.
        """
        verts = np.ascontiguousarray(np.asarray(vertices, dtype=float))
        tris = np.ascontiguousarray(np.asarray(triangles, dtype=np.int64))
        if verts.ndim != 2 or verts.shape[1] != 2:
            raise ValueError("vertices must be an (n, 2) array")
        if tris.ndim != 2 or tris.shape[1] != 3:
            raise ValueError("triangles must be an (m, 3) array")
        n = len(verts)
        if tris.size and (tris.min() < 0 or tris.max() >= n):
            raise ValueError("triangle indices out of range")

        areas = _signed_areas(verts, tris)
        scale = max(float(np.abs(verts).max()), 1.0)
        if np.any(areas <= 1e-14 * scale**2):
            raise ValueError(
                f"all triangles must have positive area; min signed area "
                f"{areas.min():.3e}"
            )

        # directed edges; a conforming orientable mesh uses each at most once
        edges = tris[:, [[0, 1], [1, 2], [2, 0]]].reshape(-1, 2)
        tri_of = np.repeat(np.arange(len(tris)), 3)
        keys = edges[:, 0] * n + edges[:, 1]
        if len(np.unique(keys)) != len(keys):
            raise ValueError("nonconforming mesh: a directed edge appears twice")
        rev = edges[:, 1] * n + edges[:, 0]
        is_boundary = ~np.isin(keys, rev)
        b_edges = edges[is_boundary]
        b_tris = tri_of[is_boundary]

        # assemble loops; every boundary vertex must have exactly one
        # outgoing and one incoming boundary edge
        succ = {}
        edge_ix = {}
        for ix, (a, b) in enumerate(b_edges):
            if a in succ:
                raise ValueError("boundary is not a union of simple closed loops")
            succ[int(a)] = int(b)
            edge_ix[int(a)] = ix
        if set(succ.values()) != set(succ.keys()):
            raise ValueError("boundary is not a union of simple closed loops")
        ordered = []
        seen = set()
        for start in sorted(succ):
            if start in seen:
                continue
            v = start
            while True:
                ordered.append(edge_ix[v])
                seen.add(v)
                v = succ[v]
                if v == start:
                    break
                if v in seen:
                    raise ValueError("boundary loops intersect")
        ordered = np.asarray(ordered, dtype=np.int64)

        edge_vec = verts[edges[:, 1]] - verts[edges[:, 0]]
        h = float(np.hypot(edge_vec[:, 0], edge_vec[:, 1]).max())
        return cls(
            vertices=verts,
            triangles=tris,
            boundary_vertices=np.unique(b_edges),
            boundary_edges=np.ascontiguousarray(b_edges[ordered]),
            boundary_edge_tri=np.ascontiguousarray(b_tris[ordered]),
            h=h,
        )

    @property
    def interior_vertices(self) -> np.ndarray:
        return np.setdiff1d(np.arange(len(self.vertices)), self.boundary_vertices)

    def triangle_areas(self) -> np.ndarray:
        return _signed_areas(self.vertices, self.triangles)

    def replace_vertices(self, new_vertices) -> "TriMesh":
        """Same combinatorics on moved vertices; revalidates orientation."""
        new_verts = np.ascontiguousarray(np.asarray(new_vertices, dtype=float))
        if new_verts.shape != self.vertices.shape:
            raise ValueError("replacement vertices must match the existing shape")
        areas = _signed_areas(new_verts, self.triangles)
        scale = max(float(np.abs(new_verts).max()), 1.0)
        if np.any(areas <= 1e-14 * scale**2):
            raise ValueError("vertex motion inverted or degenerated a triangle")
        edge_vec = (new_verts[self.triangles[:, [1, 2, 0]]]
                    - new_verts[self.triangles]).reshape(-1, 2)
        h = float(np.hypot(edge_vec[:, 0], edge_vec[:, 1]).max())
        return TriMesh(
            vertices=new_verts,
            triangles=self.triangles,
            boundary_vertices=self.boundary_vertices,
            boundary_edges=self.boundary_edges,
            boundary_edge_tri=self.boundary_edge_tri,
            h=h,
        )


def boundary_geometry(mesh: TriMesh):
    """Midpoints, outward unit normals and lengths of the boundary edges."""
    a = mesh.vertices[mesh.boundary_edges[:, 0]]
    b = mesh.vertices[mesh.boundary_edges[:, 1]]
    tangent = b - a
    lengths = np.hypot(tangent[:, 0], tangent[:, 1])
    normals = np.column_stack([tangent[:, 1], -tangent[:, 0]]) / lengths[:, None]
    return 0.5 * (a + b), normals, lengths


def _ring_start(k: int) -> int:
    return 1 + 3 * k * (k - 1)


def build_disk_mesh(radius: float, n_rings: int) -> TriMesh:
    """Concentric-ring triangulation of a disk.

    Ring k holds 6k vertices at radius k/n_rings * radius, giving
    1 + 3n(n+1) vertices and 6n^2 triangles; ring n lies exactly on the
    circle.  Each of the six sectors between consecutive rings is stitched
    with an alternating strip of 2k-1 triangles.
    """
    if radius <= 0.0:
        raise ValueError(f"radius must be positive, got {radius}")
    if n_rings < 2:
        raise ValueError(f"n_rings must be at least 2, got {n_rings}")
    n = int(n_rings)
    verts = [np.zeros((1, 2))]
    for k in range(1, n + 1):
        ang = 2.0 * np.pi * np.arange(6 * k) / (6 * k)
        rk = radius * k / n
        verts.append(np.column_stack([rk * np.cos(ang), rk * np.sin(ang)]))
    verts = np.vstack(verts)

    tris = []
    for m in range(6):
        tris.append((0, 1 + m, 1 + (m + 1) % 6))
    for k in range(2, n + 1):
        o0, i0 = _ring_start(k), _ring_start(k - 1)
        oc, ic = 6 * k, 6 * (k - 1)
        for s in range(6):
            for j in range(k):
                o1 = o0 + (s * k + j) % oc
                o2 = o0 + (s * k + j + 1) % oc
                i1 = i0 + (s * (k - 1) + j) % ic
                tris.append((o1, o2, i1))
                if j < k - 1:
                    i2 = i0 + (s * (k - 1) + j + 1) % ic
                    tris.append((i1, o2, i2))
    return TriMesh.from_arrays(verts, np.asarray(tris, dtype=np.int64))


def build_ellipse_mesh(a: float, b: float, n_rings: int) -> TriMesh:
    """Disk mesh scaled onto the ellipse with semi-axes a, b."""
    if a <= 0.0 or b <= 0.0:
        raise ValueError(f"semi-axes must be positive, got a={a}, b={b}")
    disk = build_disk_mesh(1.0, n_rings)
    return TriMesh.from_arrays(disk.vertices * np.array([a, b]), disk.triangles)


def build_rectangle_mesh(w: float, h: float, nx: int, ny: int) -> TriMesh:
    """Structured rectangle [0,w]x[0,h] split into 2*nx*ny triangles."""
    if w <= 0.0 or h <= 0.0:
        raise ValueError(f"side lengths must be positive, got {w}, {h}")
    if nx < 1 or ny < 1:
        raise ValueError(f"nx, ny must be at least 1, got {nx}, {ny}")
    xs = np.linspace(0.0, w, nx + 1)
    ys = np.linspace(0.0, h, ny + 1)
    X, Y = np.meshgrid(xs, ys)
    verts = np.column_stack([X.ravel(), Y.ravel()])

    def vid(i, j):
        return j * (nx + 1) + i

    tris = []
    for j in range(ny):
        for i in range(nx):
            tris.append((vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)))
            tris.append((vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)))
    return TriMesh.from_arrays(verts, np.asarray(tris, dtype=np.int64))


def map_mesh(mesh: TriMesh, cmap) -> TriMesh:
    """Push a mesh forward through a conformal map.

    Every vertex must lie strictly inside the map's certified univalence
    disk; the image keeps the combinatorics and is revalidated.
    """
    z = mesh.vertices[:, 0] + 1j * mesh.vertices[:, 1]
    rad = np.abs(z)
    if np.any(rad >= cmap.univalence_radius):
        raise DomainError(
            f"mesh reaches radius {rad.max():g}, outside the univalence "
            f"radius {cmap.univalence_radius:g} of map {cmap.name!r}"
        )
    fz = cmap.eval(z)
    return TriMesh.from_arrays(np.column_stack([fz.real, fz.imag]), mesh.triangles)


def save_mesh(mesh: TriMesh, path: str) -> None:
    """Write the text format: one "v x y" line per vertex, "t i j k" per triangle."""
    with open(path, "w") as fh:
        for x, y in mesh.vertices:
            fh.write(f"v {float(x)!r} {float(y)!r}\n")
        for i, j, k in mesh.triangles:
            fh.write(f"t {int(i)} {int(j)} {int(k)}\n")


def load_mesh(path: str) -> TriMesh:
    verts, tris = [], []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            fields = line.split()
            if not fields or fields[0].startswith("#"):
                continue
            if fields[0] == "v" and len(fields) == 3:
                verts.append((float(fields[1]), float(fields[2])))
            elif fields[0] == "t" and len(fields) == 4:
                tris.append((int(fields[1]), int(fields[2]), int(fields[3])))
            else:
                raise ValueError(f"{path}:{lineno}: unrecognized mesh line {line!r}")
    if not verts or not tris:
        raise ValueError(f"{path}: mesh file holds no vertices or no triangles")
    return TriMesh.from_arrays(np.asarray(verts), np.asarray(tris, dtype=np.int64))


def mesh_from_spec(spec: str) -> TriMesh:
    """Build a mesh from a registry string.

    Forms: ``disk:R:n``, ``ellipse:a:b:n``, ``rect:w:h:nx:ny``,
    ``file:<path>``, ``image:<mapspec>:R:n`` (mapspec may itself contain
    colons, e.g. ``image:quad:0.2:1.0:40``).
    """
    kind, _, rest = spec.partition(":")
    try:
        if kind == "disk":
            r, n = rest.split(":")
            return build_disk_mesh(float(r), int(n))
        if kind == "ellipse":
            a, b, n = rest.split(":")
            return build_ellipse_mesh(float(a), float(b), int(n))
        if kind == "rect":
            w, h, nx, ny = rest.split(":")
            return build_rectangle_mesh(float(w), float(h), int(nx), int(ny))
        if kind == "file":
            return load_mesh(rest)
        if kind == "image":
            mapspec, r, n = rest.rsplit(":", 2)
            from . import conformal

            base = build_disk_mesh(float(r), int(n))
            return map_mesh(base, conformal.map_from_spec(mapspec))
    except (ValueError, DomainError):
        raise
    except Exception as exc:
        raise ValueError(f"unrecognized mesh spec {spec!r}") from exc
    raise ValueError(f"unrecognized mesh spec {spec!r}")
