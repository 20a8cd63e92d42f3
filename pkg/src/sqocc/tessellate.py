"""Icosphere tessellation and deformation onto superquadric surfaces.

The unit icosphere provides an even triangulation of directions; mapping
its vertices through the signed-power parametric equations places them on
a superquadric surface. Per-face frames (centroid, normal, tangents, area)
drive Gaussian placement downstream.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_LEVEL = 4  # 20*4^5 faces would be pointless memory pressure here

DEGENERATE_AREA = 1e-12


@dataclass(frozen=True)
class IcosphereMesh:
    """Subdivided icosahedron with unit-length vertices."""

    vertices: np.ndarray  # (V, 3) float64, |v| = 1
    faces: np.ndarray     # (F, 3) int32, outward winding
    level: int

    @property
    def num_faces(self) -> int:
        return self.faces.shape[0]

    @property
    def num_vertices(self) -> int:
        return self.vertices.shape[0]


@dataclass
class SurfaceFrame:
    """Per-face frame of a deformed mesh, in the primitive's local frame.

    eta/omega are the spherical coordinates of the original (unit sphere)
    centroid direction. {tangent_u, tangent_v, normal} is orthonormal.
    """

    centroid: np.ndarray
    normal: np.ndarray
    tangent_u: np.ndarray
    tangent_v: np.ndarray
    area: float
    eta: float
    omega: float
    degenerate: bool = False


def _base_icosahedron():
    t = (1.0 + np.sqrt(5.0)) / 2.0
    verts = np.array([
        [-1.0, t, 0.0], [1.0, t, 0.0], [-1.0, -t, 0.0], [1.0, -t, 0.0],
        [0.0, -1.0, t], [0.0, 1.0, t], [0.0, -1.0, -t], [0.0, 1.0, -t],
        [t, 0.0, -1.0], [t, 0.0, 1.0], [-t, 0.0, -1.0], [-t, 0.0, 1.0],
    ], dtype=np.float64)
    verts /= np.linalg.norm(verts, axis=1, keepdims=True)
    faces = np.array([
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ], dtype=np.int32)
    return verts, faces


def icosphere(level: int) -> IcosphereMesh:
    """Icosahedron subdivided ``level`` times, vertices on the unit sphere.

    Face count is 20*4^level, vertex count 10*4^level + 2.
    """
    level = int(level)
    if level < 0:
        raise ValueError("level must be >= 0")
    if level > MAX_LEVEL:
        raise ValueError(f"level must be <= {MAX_LEVEL}")
    verts, faces = _base_icosahedron()
    verts = [v for v in verts]
    for _ in range(level):
        midpoint = {}

        def split(a, b):
            key = (a, b) if a < b else (b, a)
            idx = midpoint.get(key)
            if idx is None:
                m = verts[a] + verts[b]
                verts.append(m / np.linalg.norm(m))
                idx = len(verts) - 1
                midpoint[key] = idx
            return idx

        new_faces = []
        for i0, i1, i2 in faces:
            a = split(i0, i1)
            b = split(i1, i2)
            c = split(i2, i0)
            new_faces += [[i0, a, c], [i1, b, a], [i2, c, b], [a, b, c]]
        faces = np.asarray(new_faces, dtype=np.int32)
    return IcosphereMesh(vertices=np.asarray(verts), faces=faces, level=level)


def spherical_coords(v):
    """(eta, omega) of unit direction(s): eta = arcsin(z), omega = atan2(y, x).

    Poles map to omega = 0. Accepts a 3-vector or (N, 3) rows.
    """
    v = np.asarray(v, dtype=np.float64)
    eta = np.arcsin(np.clip(v[..., 2], -1.0, 1.0))
    omega = np.arctan2(v[..., 1], v[..., 0])
    if v.ndim == 1:
        return float(eta), float(omega)
    return eta, omega


def sgnpow(a, e):
    """sign(a) * |a|**e, the signed power used by the parametric map."""
    a = np.asarray(a, dtype=np.float64)
    out = np.sign(a) * np.abs(a) ** e
    return float(out) if out.ndim == 0 else out


def map_to_surface(eta, omega, scale, eps1, eps2) -> np.ndarray:
    """Parametric surface point for spherical coordinates (eta, omega).

    x = sx * sgnpow(cos eta, e1) * sgnpow(cos omega, e2)
    y = sy * sgnpow(cos eta, e1) * sgnpow(sin omega, e2)
    z = sz * sgnpow(sin eta, e1)

    The result satisfies inside_outside == 1 for the same scale/exponents.
    Accepts scalars or equal-length arrays for eta/omega.
    """
    eta = np.asarray(eta, dtype=np.float64)
    omega = np.asarray(omega, dtype=np.float64)
    scale = np.asarray(scale, dtype=np.float64)
    ce = sgnpow(np.cos(eta), eps1)
    se = sgnpow(np.sin(eta), eps1)
    co = sgnpow(np.cos(omega), eps2)
    so = sgnpow(np.sin(omega), eps2)
    pts = np.stack([scale[0] * ce * co, scale[1] * ce * so, scale[2] * se],
                   axis=-1)
    return pts


def _deform_fields(mesh: IcosphereMesh, scale, eps1, eps2):
    """Vectorized deformation core.

    Returns (centroids, normals, tangent_u, tangent_v, areas, eta, omega,
    degenerate) as arrays over faces, all in the primitive's local frame.
    """
    eta_v, omega_v = spherical_coords(mesh.vertices)
    pts = map_to_surface(eta_v, omega_v, scale, eps1, eps2)

    tri = pts[mesh.faces]                      # (F, 3, 3)
    centroids = tri.mean(axis=1)
    e1 = tri[:, 1] - tri[:, 0]
    e2 = tri[:, 2] - tri[:, 0]
    cross = np.cross(e1, e2)
    cross_norm = np.linalg.norm(cross, axis=1)
    areas = 0.5 * cross_norm
    degenerate = areas < DEGENERATE_AREA

    # Original centroid directions give the face's (eta, omega) and a
    # fallback normal for degenerate triangles.
    dir0 = mesh.vertices[mesh.faces].mean(axis=1)
    dir0 /= np.linalg.norm(dir0, axis=1, keepdims=True)
    eta_f, omega_f = spherical_coords(dir0)

    safe = np.where(degenerate[:, None], 1.0, cross_norm[:, None])
    normals = np.where(degenerate[:, None], dir0, cross / safe)

    tu = e1 - np.sum(e1 * normals, axis=1, keepdims=True) * normals
    tu_norm = np.linalg.norm(tu, axis=1, keepdims=True)
    bad = (tu_norm[:, 0] < 1e-20) | degenerate
    # Any orthonormal completion works for degenerate faces.
    ref = np.where(np.abs(normals[:, 0:1]) < 0.9,
                   np.array([[1.0, 0.0, 0.0]]),
                   np.array([[0.0, 1.0, 0.0]]))
    alt = np.cross(normals, ref)
    alt /= np.linalg.norm(alt, axis=1, keepdims=True)
    tu = np.where(bad[:, None], alt, tu / np.where(tu_norm < 1e-20, 1.0, tu_norm))
    tv = np.cross(normals, tu)

    return centroids, normals, tu, tv, areas, eta_f, omega_f, degenerate


def deform_mesh(mesh: IcosphereMesh, scale, eps1, eps2) -> list:
    """Deform an icosphere onto a superquadric surface; one frame per face.

    Vertices are mapped through the parametric equations; face data comes
    from the deformed triangles. Degenerate faces (area < 1e-12) are kept
    with ``degenerate=True`` so callers may skip them.
    """
    c, n, tu, tv, a, eta, omega, deg = _deform_fields(mesh, scale, eps1, eps2)
    return [
        SurfaceFrame(centroid=c[i], normal=n[i], tangent_u=tu[i],
                     tangent_v=tv[i], area=float(a[i]), eta=float(eta[i]),
                     omega=float(omega[i]), degenerate=bool(deg[i]))
        for i in range(mesh.num_faces)
    ]


def mesh_to_off(mesh: IcosphereMesh, deformed: np.ndarray | None = None) -> str:
    """ASCII OFF dump of the mesh (optionally with deformed vertices)."""
    verts = mesh.vertices if deformed is None else np.asarray(deformed)
    lines = ["OFF", f"{len(verts)} {mesh.num_faces} 0"]
    for v in verts:
        lines.append(f"{v[0]!r} {v[1]!r} {v[2]!r}")
    for f in mesh.faces:
        lines.append(f"3 {f[0]} {f[1]} {f[2]}")
    return "\n".join(lines) + "\n"
