"""Batched discrete differential geometry kernels.

Every kernel works on point arrays of shape (batch, n, m) that share one sampling topology, so whole families of
shapes (all frames of a discrete path, all frame pairs of two sequences) are processed in a single numpy pass.
The *_vjp functions return vector-Jacobian products: given one weight per element (or per vertex) they return the
gradient of the weighted sum with respect to the points. They are the building blocks of the exact path energy
gradient.

Curves (open chains and closed loops) use edge lengths as element volumes and the turning angle per local arc
length as curvature. Grids use the vector area of each quad cell as element volume and the magnitude of the
cotangent Laplace-Beltrami mean curvature normal as curvature. Open chain endpoints and grid boundary vertices
carry curvature 0.
"""
from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Tuple

import numpy as np

_TINY = 1e-300


@dataclass(frozen=True)
class MeshTopology:
    """Connectivity of a sampled immersion.

    :param kind: "chain", "loop" or "grid".
    :param n: Number of sample points.
    :param rows: Number of grid rows. Only used for grids.
    :param cols: Number of grid columns. Only used for grids.
    """

    kind: str
    n: int
    rows: Optional[int] = None
    cols: Optional[int] = None

    @property
    def is_curve(self) -> bool:
        return self.kind in ("chain", "loop")

    @property
    def volume_exponent(self) -> int:
        """Dimension of the parameter domain: volumes scale with scale**volume_exponent."""
        return 1 if self.is_curve else 2

    @cached_property
    def elements(self) -> np.ndarray:
        """Vertex indices per element: edges (E, 2) for curves, quad cells (E, 4) for grids.

        Quad corners are ordered (r, c), (r, c + 1), (r + 1, c), (r + 1, c + 1).
        """
        if self.kind == "chain":
            start = np.arange(self.n - 1)
            return np.stack([start, start + 1], axis=1)
        if self.kind == "loop":
            start = np.arange(self.n)
            return np.stack([start, (start + 1) % self.n], axis=1)
        grid = np.arange(self.n).reshape(self.rows, self.cols)
        return np.stack(
            [
                grid[:-1, :-1].ravel(),
                grid[:-1, 1:].ravel(),
                grid[1:, :-1].ravel(),
                grid[1:, 1:].ravel(),
            ],
            axis=1,
        )

    @property
    def element_size(self) -> int:
        return self.elements.shape[1]

    @property
    def nb_elements(self) -> int:
        return self.elements.shape[0]

    @cached_property
    def curvature_vertices(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Vertices with a turning angle together with their predecessor and successor (curves only)."""
        if self.kind == "chain":
            idx = np.arange(1, self.n - 1)
            return idx, idx - 1, idx + 1
        idx = np.arange(self.n)
        return idx, (idx - 1) % self.n, (idx + 1) % self.n

    @cached_property
    def triangles(self) -> np.ndarray:
        """Triangulation of a grid, two consistently oriented triangles per quad."""
        c00, c01, c10, c11 = self.elements.T
        return np.concatenate(
            [np.stack([c00, c01, c11], axis=1), np.stack([c00, c11, c10], axis=1)]
        )

    @cached_property
    def interior(self) -> np.ndarray:
        """Boolean mask of vertices that carry a curvature estimate."""
        mask = np.ones(self.n, dtype=bool)
        if self.kind == "chain":
            mask[[0, -1]] = False
        elif self.kind == "grid":
            grid = mask.reshape(self.rows, self.cols)
            grid[[0, -1], :] = False
            grid[:, [0, -1]] = False
        return mask


def _as_3d(points: np.ndarray) -> np.ndarray:
    if points.shape[-1] == 3:
        return points
    pad = np.zeros(points.shape[:-1] + (1,))
    return np.concatenate([points, pad], axis=-1)


def _norm(vectors: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(vectors * vectors, axis=-1))


def _safe_unit(vectors: np.ndarray, norms: np.ndarray) -> np.ndarray:
    safe = np.where(norms > _TINY, norms, 1.0)
    return np.where((norms > _TINY)[..., None], vectors / safe[..., None], 0.0)


def element_volumes(points: np.ndarray, mesh: MeshTopology) -> np.ndarray:
    """Return per element volumes of shape (batch, E)."""
    elements = mesh.elements
    if mesh.is_curve:
        edges = points[:, elements[:, 1]] - points[:, elements[:, 0]]
        return _norm(edges)
    points3 = _as_3d(points)
    diag_1 = points3[:, elements[:, 3]] - points3[:, elements[:, 0]]
    diag_2 = points3[:, elements[:, 2]] - points3[:, elements[:, 1]]
    return 0.5 * _norm(np.cross(diag_1, diag_2))


def element_volumes_vjp(
    points: np.ndarray, mesh: MeshTopology, weights: np.ndarray
) -> np.ndarray:
    """Gradient of sum_e weights[e] * vol_e with respect to the points."""
    elements = mesh.elements
    grad = np.zeros_like(points)
    if mesh.is_curve:
        edges = points[:, elements[:, 1]] - points[:, elements[:, 0]]
        unit = _safe_unit(edges, _norm(edges))
        contribution = weights[..., None] * unit
        grad[:, elements[:, 1]] += contribution
        grad[:, elements[:, 0]] -= contribution
        return grad

    points3 = _as_3d(points)
    grad3 = np.zeros_like(points3)
    diag_1 = points3[:, elements[:, 3]] - points3[:, elements[:, 0]]
    diag_2 = points3[:, elements[:, 2]] - points3[:, elements[:, 1]]
    normal = np.cross(diag_1, diag_2)
    unit = _safe_unit(normal, _norm(normal))
    grad_1 = 0.5 * weights[..., None] * np.cross(diag_2, unit)
    grad_2 = 0.5 * weights[..., None] * np.cross(unit, diag_1)
    grad3[:, elements[:, 3]] += grad_1
    grad3[:, elements[:, 0]] -= grad_1
    grad3[:, elements[:, 2]] += grad_2
    grad3[:, elements[:, 1]] -= grad_2
    return grad3[..., : points.shape[-1]]


def _turning_angles(points: np.ndarray, mesh: MeshTopology):
    idx, prev, nxt = mesh.curvature_vertices
    d_in = points[:, idx] - points[:, prev]
    d_out = points[:, nxt] - points[:, idx]
    l_in = _norm(d_in)
    l_out = _norm(d_out)
    dot = np.sum(d_in * d_out, axis=-1)
    if points.shape[-1] == 2:
        cross = d_in[..., 0] * d_out[..., 1] - d_in[..., 1] * d_out[..., 0]
        theta = np.arctan2(cross, dot)
        cross_vec = None
    else:
        cross_vec = np.cross(d_in, d_out)
        cross = _norm(cross_vec)
        theta = np.arctan2(cross, dot)
    arc = 0.5 * (l_in + l_out)
    return idx, prev, nxt, d_in, d_out, l_in, l_out, dot, cross, cross_vec, theta, arc


def _grid_laplacian(points: np.ndarray, mesh: MeshTopology):
    """Cotangent weights, triangle areas, mean curvature vectors and barycentric areas of a grid."""
    triangles = mesh.triangles
    corners = _as_3d(points)[:, triangles]  # (batch, T, 3 corners, 3)
    cots = np.empty(corners.shape[:3])
    for role in range(3):
        p, q, s = role, (role + 1) % 3, (role + 2) % 3
        u = corners[:, :, q] - corners[:, :, p]
        v = corners[:, :, s] - corners[:, :, p]
        cots[..., role] = np.sum(u * v, axis=-1) / _norm(np.cross(u, v))
    areas = 0.5 * _norm(
        np.cross(corners[:, :, 1] - corners[:, :, 0], corners[:, :, 2] - corners[:, :, 0])
    )
    batch = points.shape[0]
    normal_sum = np.zeros((batch, mesh.n, 3))
    vertex_area = np.zeros((batch, mesh.n))
    for role in range(3):
        p, q, s = role, (role + 1) % 3, (role + 2) % 3
        contribution = cots[..., s, None] * (corners[:, :, p] - corners[:, :, q]) + cots[
            ..., q, None
        ] * (corners[:, :, p] - corners[:, :, s])
        np.add.at(normal_sum, (slice(None), triangles[:, role]), contribution)
        np.add.at(vertex_area, (slice(None), triangles[:, role]), areas / 3.0)
    return corners, cots, areas, normal_sum, vertex_area


def curvature_sq(points: np.ndarray, mesh: MeshTopology) -> np.ndarray:
    """Return squared mean curvature per vertex, shape (batch, n)."""
    batch = points.shape[0]
    sigma = np.zeros((batch, mesh.n))
    if mesh.is_curve:
        idx, *_, theta, arc = _turning_angles(points, mesh)
        sigma[:, idx] = (theta / arc) ** 2
        return sigma
    _, _, _, normal_sum, vertex_area = _grid_laplacian(points, mesh)
    sigma = np.sum(normal_sum**2, axis=-1) / (16.0 * vertex_area**2)
    return sigma * mesh.interior


def mean_curvature(points: np.ndarray, mesh: MeshTopology) -> np.ndarray:
    """Return the reported curvature per vertex.

    Planar curves get the signed turning angle per arc length (counter-clockwise turns are positive), space
    curves the unsigned one, grids the magnitude of the mean curvature normal.
    """
    if mesh.is_curve:
        kappa = np.zeros((points.shape[0], mesh.n))
        idx, *_, theta, arc = _turning_angles(points, mesh)
        kappa[:, idx] = theta / arc
        return kappa
    return np.sqrt(curvature_sq(points, mesh))


def curvature_sq_vjp(
    points: np.ndarray, mesh: MeshTopology, weights: np.ndarray
) -> np.ndarray:
    """Gradient of sum_i weights[i] * kappa_i^2 with respect to the points."""
    if mesh.is_curve:
        return _curve_curvature_sq_vjp(points, mesh, weights)
    return _grid_curvature_sq_vjp(points, mesh, weights)


def _curve_curvature_sq_vjp(
    points: np.ndarray, mesh: MeshTopology, weights: np.ndarray
) -> np.ndarray:
    (
        idx,
        prev,
        nxt,
        d_in,
        d_out,
        l_in,
        l_out,
        dot,
        cross,
        cross_vec,
        theta,
        arc,
    ) = _turning_angles(points, mesh)
    beta = weights[:, idx]
    g_theta = beta * 2.0 * theta / arc**2
    g_arc = -beta * 2.0 * theta**2 / arc**3

    if points.shape[-1] == 2:
        perp_in = np.stack([-d_in[..., 1], d_in[..., 0]], axis=-1)
        perp_out = np.stack([-d_out[..., 1], d_out[..., 0]], axis=-1)
        dtheta_din = -perp_in / (l_in**2)[..., None]
        dtheta_dout = perp_out / (l_out**2)[..., None]
    else:
        unit = _safe_unit(cross_vec, cross)
        denom = (l_in**2 * l_out**2)[..., None]
        dtheta_din = (
            dot[..., None] * np.cross(d_out, unit) - cross[..., None] * d_out
        ) / denom
        dtheta_dout = (
            dot[..., None] * np.cross(unit, d_in) - cross[..., None] * d_in
        ) / denom

    g_in = g_theta[..., None] * dtheta_din + g_arc[..., None] * 0.5 * d_in / l_in[..., None]
    g_out = (
        g_theta[..., None] * dtheta_dout + g_arc[..., None] * 0.5 * d_out / l_out[..., None]
    )
    grad = np.zeros_like(points)
    grad[:, idx] += g_in - g_out
    grad[:, prev] -= g_in
    grad[:, nxt] += g_out
    return grad


def _grid_curvature_sq_vjp(
    points: np.ndarray, mesh: MeshTopology, weights: np.ndarray
) -> np.ndarray:
    triangles = mesh.triangles
    corners, cots, areas, normal_sum, vertex_area = _grid_laplacian(points, mesh)
    beta = weights * mesh.interior
    g_normal = (beta / (8.0 * vertex_area**2))[..., None] * normal_sum
    g_vertex_area = -beta * np.sum(normal_sum**2, axis=-1) / (8.0 * vertex_area**3)

    g_corners = np.zeros_like(corners)
    g_cots = np.zeros_like(cots)
    g_areas = np.zeros_like(areas)
    for role in range(3):
        p, q, s = role, (role + 1) % 3, (role + 2) % 3
        g_normal_p = g_normal[:, triangles[:, p]]
        edge_pq = corners[:, :, p] - corners[:, :, q]
        edge_ps = corners[:, :, p] - corners[:, :, s]
        g_cots[..., s] += np.sum(g_normal_p * edge_pq, axis=-1)
        g_cots[..., q] += np.sum(g_normal_p * edge_ps, axis=-1)
        g_corners[:, :, p] += (cots[..., s] + cots[..., q])[..., None] * g_normal_p
        g_corners[:, :, q] -= cots[..., s, None] * g_normal_p
        g_corners[:, :, s] -= cots[..., q, None] * g_normal_p
        g_areas += g_vertex_area[:, triangles[:, p]] / 3.0

    for role in range(3):
        p, q, s = role, (role + 1) % 3, (role + 2) % 3
        u = corners[:, :, q] - corners[:, :, p]
        v = corners[:, :, s] - corners[:, :, p]
        normal = np.cross(u, v)
        length = _norm(normal)
        unit = _safe_unit(normal, length)
        dot = np.sum(u * v, axis=-1)
        dcot_du = v / length[..., None] - (dot / length**2)[..., None] * np.cross(v, unit)
        dcot_dv = u / length[..., None] - (dot / length**2)[..., None] * np.cross(unit, u)
        g_cot = g_cots[..., role, None]
        g_corners[:, :, q] += g_cot * dcot_du
        g_corners[:, :, s] += g_cot * dcot_dv
        g_corners[:, :, p] -= g_cot * (dcot_du + dcot_dv)
        if role == 0:
            darea_du = 0.5 * np.cross(v, unit)
            darea_dv = 0.5 * np.cross(unit, u)
            g_area = g_areas[..., None]
            g_corners[:, :, q] += g_area * darea_du
            g_corners[:, :, s] += g_area * darea_dv
            g_corners[:, :, p] -= g_area * (darea_du + darea_dv)

    grad3 = np.zeros(points.shape[:-1] + (3,))
    for role in range(3):
        np.add.at(grad3, (slice(None), triangles[:, role]), g_corners[:, :, role])
    return grad3[..., : points.shape[-1]]


def triangle_areas(points: np.ndarray, mesh: MeshTopology) -> np.ndarray:
    """Areas of the grid triangulation, shape (batch, T)."""
    corners = _as_3d(points)[:, mesh.triangles]
    return 0.5 * _norm(
        np.cross(corners[:, :, 1] - corners[:, :, 0], corners[:, :, 2] - corners[:, :, 0])
    )


def element_centers(points: np.ndarray, mesh: MeshTopology) -> np.ndarray:
    """Mean of the vertices of every element, shape (batch, E, m)."""
    return points[:, mesh.elements].mean(axis=2)


def tangents(points: np.ndarray, mesh: MeshTopology) -> np.ndarray:
    """First difference vectors per point.

    Curves return (batch, n, m) forward differences (backward at an open chain's last point). Grids return
    (batch, n, 2, m) with the column direction first and the row direction second.
    """
    if mesh.kind == "loop":
        return np.roll(points, -1, axis=1) - points
    if mesh.kind == "chain":
        diff = np.empty_like(points)
        diff[:, :-1] = points[:, 1:] - points[:, :-1]
        diff[:, -1] = points[:, -1] - points[:, -2]
        return diff
    grid = points.reshape(points.shape[0], mesh.rows, mesh.cols, points.shape[-1])
    along_cols = np.empty_like(grid)
    along_cols[:, :, :-1] = grid[:, :, 1:] - grid[:, :, :-1]
    along_cols[:, :, -1] = grid[:, :, -1] - grid[:, :, -2]
    along_rows = np.empty_like(grid)
    along_rows[:, :-1] = grid[:, 1:] - grid[:, :-1]
    along_rows[:, -1] = grid[:, -1] - grid[:, -2]
    stacked = np.stack([along_cols, along_rows], axis=3)
    return stacked.reshape(points.shape[0], mesh.n, 2, points.shape[-1])
