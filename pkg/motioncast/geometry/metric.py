"""Weighted Riemannian metric on discretized immersions and geodesic distance by path straightening.

The metric weights every mesh element e with

    W_e(q) = rho_e * vol_e(q) * (a * (1 + log(1 + V(q))) + b * (1 + kappa2_e(q)) + c)

where vol_e is the element volume, V the total volume, kappa2_e the vertex mean of the squared mean curvature
and rho_e the mean region emphasis of the element's vertices. The inner product of two deformation fields is the
weighted sum of the element means of the pointwise products, which is the diagonal (lumped) mass form

    <u, v>_q = sum_i M_i(q) <u_i, v_i>,     M_i = sum_{e containing i} W_e / |e|.

Discrete path energies evaluate the metric at the start shape of every segment, E = (K / 2) sum_j <D_j, D_j>_{q_j}.
The trapezoidal rule over both end shapes is available as an option and makes distances symmetric up to rounding.
Geodesics are found by batched path straightening: many independent shape pairs are optimized together with per
pair line searches and per pair stopping.
"""
import warnings
from dataclasses import dataclass, field
from datetime import datetime
from typing import Dict, List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from scipy.linalg import solve_banded

from motioncast.config.geometry_config import (
    AlignmentConfig,
    GeodesicConfig,
    MetricConfig,
)
from motioncast.general_utils.exceptions import (
    DegenerateMetricError,
    IncompatibleShapesError,
)
from motioncast.general_utils.general_utils import logger
from motioncast.geometry.correspondence import align
from motioncast.geometry.discrete_geometry import (
    MeshTopology,
    curvature_sq,
    curvature_sq_vjp,
    element_volumes,
    element_volumes_vjp,
)
from motioncast.geometry.shapes import DeformationField, Shape, check_compatible

_BATCH_SIZE = 256

EnergyRule = Literal["left", "trapezoid"]


def region_multipliers(
    region_tags: Optional[Tuple[str, ...]], n: int, metric_config: MetricConfig
) -> np.ndarray:
    """Per vertex emphasis. Untagged points and tags without an entry get 1."""
    if region_tags is None or not metric_config.region_emphasis:
        return np.ones(n)
    emphasis = metric_config.region_emphasis
    return np.array([float(emphasis.get(tag, 1.0)) for tag in region_tags])


@dataclass
class _MetricTerms:
    volumes: np.ndarray  # (batch, E)
    total_volume: np.ndarray  # (batch,)
    weight_function: np.ndarray  # (batch, E), the bracket of the weight
    element_weights: np.ndarray  # (batch, E)
    mass: np.ndarray  # (batch, n)


class ShapeMetric:
    """Evaluate the weighted metric on batches of shapes sharing one sampling topology.

    :param mesh: Sampling topology of all shapes.
    :param metric_config: Weights of the metric.
    :param region_tags: Region tags of the shapes, used for the region emphasis.
    """

    def __init__(
        self,
        mesh: MeshTopology,
        metric_config: MetricConfig,
        region_tags: Optional[Tuple[str, ...]] = None,
    ):
        self.mesh = mesh
        self.conf = metric_config
        vertex_rho = region_multipliers(region_tags, mesh.n, metric_config)
        self.element_rho = vertex_rho[mesh.elements].mean(axis=1)
        if not np.any(self.element_rho > 0):
            raise DegenerateMetricError("Region emphasis removes every mesh element.")

    def terms(self, points: np.ndarray) -> _MetricTerms:
        mesh = self.mesh
        conf = self.conf
        batch = points.shape[0]
        if conf.volume_density == "induced":
            volumes = element_volumes(points, mesh)
        else:
            volumes = np.full((batch, mesh.nb_elements), 1.0 / mesh.nb_elements)
        total_volume = volumes.sum(axis=1)
        weight_function = np.full(
            (batch, mesh.nb_elements), conf.position_weight, dtype=float
        )
        if conf.volume_weight > 0:
            weight_function += conf.volume_weight * (1.0 + np.log1p(total_volume))[:, None]
        if conf.curvature_weight > 0:
            sigma = curvature_sq(points, mesh)
            weight_function += conf.curvature_weight * (
                1.0 + sigma[:, mesh.elements].mean(axis=2)
            )
        element_weights = self.element_rho * volumes * weight_function
        mass = np.zeros((batch, mesh.n))
        for column in range(mesh.element_size):
            mass[:, mesh.elements[:, column]] += element_weights / mesh.element_size
        return _MetricTerms(volumes, total_volume, weight_function, element_weights, mass)

    def mass(self, points: np.ndarray) -> np.ndarray:
        return self.terms(points).mass

    def weighted_gradient(self, points: np.ndarray, segment_sq: np.ndarray) -> np.ndarray:
        """Gradient of sum_e W_e(q) * segment_sq[e] with respect to the points of q.

        :param points: Shapes of shape (batch, n, m).
        :param segment_sq: Element values the weights multiply, shape (batch, E).
        """
        mesh = self.mesh
        conf = self.conf
        terms = self.terms(points)
        grad = np.zeros_like(points)
        weighted = self.element_rho * segment_sq
        if conf.volume_density == "induced":
            alpha = weighted * terms.weight_function
            if conf.volume_weight > 0:
                alpha += (
                    conf.volume_weight
                    / (1.0 + terms.total_volume)
                    * np.sum(weighted * terms.volumes, axis=1)
                )[:, None]
            grad += element_volumes_vjp(points, mesh, alpha)
        if conf.curvature_weight > 0:
            per_element = conf.curvature_weight * weighted * terms.volumes / mesh.element_size
            beta = np.zeros((points.shape[0], mesh.n))
            for column in range(mesh.element_size):
                beta[:, mesh.elements[:, column]] += per_element
            grad += curvature_sq_vjp(points, mesh, beta)
        return grad


def _as_vectors(field_or_array: Union[DeformationField, np.ndarray]) -> np.ndarray:
    if isinstance(field_or_array, DeformationField):
        return field_or_array.vectors
    return np.asarray(field_or_array, dtype=float)


def metric_inner(
    q: Shape,
    u: Union[DeformationField, np.ndarray],
    v: Union[DeformationField, np.ndarray],
    metric_config: Optional[MetricConfig] = None,
) -> float:
    """Inner product of two deformation fields at the shape q."""
    metric_config = metric_config or MetricConfig()
    u_vectors = _as_vectors(u)
    v_vectors = _as_vectors(v)
    if u_vectors.shape != q.points.shape or v_vectors.shape != q.points.shape:
        raise IncompatibleShapesError(
            f"Deformation fields {u_vectors.shape} and {v_vectors.shape} do not match the shape {q.points.shape}."
        )
    mass = ShapeMetric(q.mesh, metric_config, q.region_tags).mass(q.points[None])[0]
    if not np.any(mass > 0):
        raise DegenerateMetricError("The metric has zero weight on this shape.")
    return float(np.sum(mass * np.sum(u_vectors * v_vectors, axis=-1)))


class PathObjective:
    """Discrete path energy of batches of paths with shape (batch, K + 1, n, m).

    :param metric: Metric evaluated at the base points.
    :param energy_rule: "left" uses the start shape of every segment as base point, "trapezoid" the mean of both.
    """

    def __init__(self, metric: ShapeMetric, energy_rule: EnergyRule = "left"):
        self.metric = metric
        self.energy_rule = energy_rule

    def _masses(self, paths: np.ndarray) -> np.ndarray:
        batch, frames, n, m = paths.shape
        return self.metric.mass(paths.reshape(batch * frames, n, m)).reshape(batch, frames, n)

    def _segment_mass(self, masses: np.ndarray) -> np.ndarray:
        if self.energy_rule == "trapezoid":
            return 0.5 * (masses[:, :-1] + masses[:, 1:])
        return masses[:, :-1]

    def segment_inner(self, paths: np.ndarray, masses: Optional[np.ndarray] = None) -> np.ndarray:
        """Squared speed of every segment at its base point, shape (batch, K)."""
        masses = self._masses(paths) if masses is None else masses
        deltas = np.diff(paths, axis=1)
        return np.sum(self._segment_mass(masses) * np.sum(deltas * deltas, axis=-1), axis=-1)

    def energy(self, paths: np.ndarray) -> np.ndarray:
        nb_intervals = paths.shape[1] - 1
        return 0.5 * nb_intervals * self.segment_inner(paths).sum(axis=1)

    def length(self, paths: np.ndarray) -> np.ndarray:
        return np.sqrt(np.maximum(self.segment_inner(paths), 0.0)).sum(axis=1)

    def gradient(self, paths: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Return the energy gradient (endpoint frames zero) and the vertex masses of every frame."""
        batch, frames, n, m = paths.shape
        nb_intervals = frames - 1
        masses = self._masses(paths)
        deltas = np.diff(paths, axis=1)
        velocity_grad = nb_intervals * self._segment_mass(masses)[..., None] * deltas
        grad = np.zeros_like(paths)
        grad[:, 1:] += velocity_grad
        grad[:, :-1] -= velocity_grad

        if frames > 2:
            elements = self.metric.mesh.elements
            segment_sq = np.sum(deltas * deltas, axis=-1)[..., elements].mean(axis=-1)
            # interior frame j is the base point of segment j, or half of segments j - 1 and j
            if self.energy_rule == "trapezoid":
                frame_sq = 0.5 * (segment_sq[:, :-1] + segment_sq[:, 1:])
            else:
                frame_sq = segment_sq[:, 1:]
            interior = paths[:, 1:-1].reshape(batch * (frames - 2), n, m)
            base_grad = self.metric.weighted_gradient(
                interior, frame_sq.reshape(batch * (frames - 2), -1)
            )
            grad[:, 1:-1] += 0.5 * nb_intervals * base_grad.reshape(batch, frames - 2, n, m)
        grad[:, 0] = 0.0
        grad[:, -1] = 0.0
        return grad, masses


def _descent_direction(
    grad: np.ndarray, masses: np.ndarray, precondition: bool
) -> np.ndarray:
    """Preconditioned descent direction for the interior frames (zero at the endpoints)."""
    direction = np.zeros_like(grad)
    interior = grad[:, 1:-1]
    if not precondition:
        direction[:, 1:-1] = -interior
        return direction
    batch, nb_interior, n, m = interior.shape
    nb_intervals = nb_interior + 1
    mean_mass = masses.mean(axis=1)
    floor = 1e-6 * mean_mass.max(axis=1, keepdims=True)
    mean_mass = np.maximum(mean_mass, np.where(floor > 0, floor, 1.0))
    banded = np.zeros((3, nb_interior))
    banded[0, 1:] = -1.0
    banded[1, :] = 2.0
    banded[2, :-1] = -1.0
    rhs = np.moveaxis(interior, 1, 0).reshape(nb_interior, -1)
    solved = solve_banded((1, 1), banded, rhs)
    solved = np.moveaxis(solved.reshape(nb_interior, batch, n, m), 0, 1)
    direction[:, 1:-1] = -solved / (nb_intervals * mean_mass[:, None, :, None])
    return direction


@dataclass
class StraighteningResult:
    """Arrays returned by batched path straightening, one entry per pair."""

    paths: np.ndarray
    energy: np.ndarray
    length: np.ndarray
    converged: np.ndarray
    iterations: np.ndarray
    energy_history: List[List[float]] = field(default_factory=list)


def straighten_paths(
    starts: np.ndarray,
    ends: np.ndarray,
    mesh: MeshTopology,
    metric_config: Optional[MetricConfig] = None,
    geodesic_config: Optional[GeodesicConfig] = None,
    region_tags: Optional[Tuple[str, ...]] = None,
) -> StraighteningResult:
    """Minimize the discrete path energy between many corresponded shape pairs at once.

    Paths start as linear interpolations. Every iteration takes a (preconditioned) gradient step on the interior
    frames with an Armijo backtracking line search, separately per pair. A pair stops when its relative energy
    decrease falls below tol, when its energy is zero or when its line search stalls.
    :param starts: Start shapes of shape (P, n, m).
    :param ends: End shapes of shape (P, n, m).
    :param mesh: Common sampling topology.
    :return: StraighteningResult with per pair paths, energies, lengths, flags and energy histories.
    """
    metric_config = metric_config or MetricConfig()
    geodesic_config = geodesic_config or GeodesicConfig()
    objective = PathObjective(
        ShapeMetric(mesh, metric_config, region_tags), geodesic_config.energy_rule
    )
    nb_intervals = geodesic_config.nb_intervals
    times = np.linspace(0.0, 1.0, nb_intervals + 1)[None, :, None, None]
    paths = (1.0 - times) * starts[:, None] + times * ends[:, None]
    paths[:, 0] = starts
    paths[:, -1] = ends

    with np.errstate(divide="ignore", invalid="ignore"):
        start_mass = objective.metric.mass(starts)
    if not np.all(np.any(start_mass > 0, axis=1)):
        raise DegenerateMetricError("The metric has zero weight on a start shape.")

    nb_pairs = starts.shape[0]
    energy = objective.energy(paths)
    history: List[List[float]] = [[float(value)] for value in energy]
    iterations = np.zeros(nb_pairs, dtype=int)
    # a single interval has no interior frame to optimize
    converged = (energy <= 0) | (nb_intervals == 1)
    active = ~converged
    conf = geodesic_config

    if nb_intervals > 1:
        for _ in range(conf.max_iters):
            indices = np.flatnonzero(active)
            if indices.size == 0:
                break
            current = paths[indices]
            current_energy = energy[indices]
            with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                grad, masses = objective.gradient(current)
            direction = _descent_direction(grad, masses, conf.precondition)
            slope = np.sum(grad * direction, axis=(1, 2, 3))

            new_energy = current_energy.copy()
            accepted = np.zeros(indices.size, dtype=bool)
            pending = np.isfinite(slope) & (slope < 0)
            step = np.ones(indices.size)
            for _ in range(conf.max_backtracks):
                if not pending.any():
                    break
                trying = np.flatnonzero(pending)
                trial = current[trying] + step[trying, None, None, None] * direction[trying]
                with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                    trial_energy = objective.energy(trial)
                ok = trial_energy <= (
                    current_energy[trying] + conf.armijo_c * step[trying] * slope[trying]
                )
                ok &= np.isfinite(trial_energy)
                good = trying[ok]
                current[good] = trial[ok]
                new_energy[good] = trial_energy[ok]
                accepted[good] = True
                pending[good] = False
                step[trying[~ok]] *= conf.shrink

            decrease = (current_energy - new_energy) / np.maximum(current_energy, 1e-300)
            done = (~accepted) | (decrease < conf.tol) | (new_energy <= 0)
            paths[indices] = current
            energy[indices] = new_energy
            iterations[indices[accepted]] += 1
            for position in np.flatnonzero(accepted):
                history[indices[position]].append(float(new_energy[position]))
            converged[indices[done]] = True
            active[indices[done]] = False

    return StraighteningResult(
        paths=paths,
        energy=energy,
        length=objective.length(paths),
        converged=converged,
        iterations=iterations,
        energy_history=history,
    )


@dataclass
class GeodesicPath:
    """Discrete geodesic between two corresponded shapes.

    :param shapes: K + 1 shapes from q0 to q1.
    :param energy: Discrete path energy.
    :param length: Discrete path length, never above sqrt(2 * energy).
    :param converged: Whether the stopping criterion was met within max_iters.
    :param iterations: Number of accepted straightening iterations.
    :param energy_history: Energy of the initial path followed by the energy after every accepted iteration.
    """

    shapes: List[Shape]
    energy: float
    length: float
    converged: bool
    iterations: int
    energy_history: List[float] = field(default_factory=list)


def _path_points(path: Union[GeodesicPath, Sequence[Shape]]) -> Tuple[np.ndarray, Shape]:
    shapes = path.shapes if isinstance(path, GeodesicPath) else list(path)
    if len(shapes) < 2:
        raise IncompatibleShapesError("A path needs at least two shapes.")
    for shape in shapes[1:]:
        check_compatible(shapes[0], shape)
    return np.stack([shape.points for shape in shapes])[None], shapes[0]


def path_energy(
    path: Union[GeodesicPath, Sequence[Shape]],
    metric_config: Optional[MetricConfig] = None,
    energy_rule: EnergyRule = "left",
) -> float:
    """Discrete path energy (K / 2) * sum_j <D_j, D_j>_{q_j}, D_j = q_{j+1} - q_j.

    With energy_rule="trapezoid" every segment's squared speed is averaged over its two end shapes.
    """
    metric_config = metric_config or MetricConfig()
    points, first = _path_points(path)
    objective = PathObjective(ShapeMetric(first.mesh, metric_config, first.region_tags), energy_rule)
    return float(objective.energy(points)[0])


def path_length(
    path: Union[GeodesicPath, Sequence[Shape]],
    metric_config: Optional[MetricConfig] = None,
    energy_rule: EnergyRule = "left",
) -> float:
    metric_config = metric_config or MetricConfig()
    points, first = _path_points(path)
    objective = PathObjective(ShapeMetric(first.mesh, metric_config, first.region_tags), energy_rule)
    return float(objective.length(points)[0])


def path_energy_gradient(
    path: Union[GeodesicPath, Sequence[Shape]],
    metric_config: Optional[MetricConfig] = None,
    energy_rule: EnergyRule = "left",
) -> List[DeformationField]:
    """Exact gradient of path_energy with respect to every frame; the endpoint fields are zero."""
    metric_config = metric_config or MetricConfig()
    points, first = _path_points(path)
    if points.shape[1] < 3:
        raise IncompatibleShapesError("The energy gradient needs at least one interior frame.")
    objective = PathObjective(ShapeMetric(first.mesh, metric_config, first.region_tags), energy_rule)
    grad, _ = objective.gradient(points)
    return [DeformationField(frame) for frame in grad[0]]


def _check_corresponded(q0: Shape, q1: Shape) -> None:
    # the region emphasis always follows the tags of q0
    check_compatible(q0, q1)


def geodesic(
    q0: Shape,
    q1: Shape,
    metric_config: Optional[MetricConfig] = None,
    geodesic_config: Optional[GeodesicConfig] = None,
) -> GeodesicPath:
    """Compute the discrete geodesic between two corresponded shapes by path straightening."""
    _check_corresponded(q0, q1)
    geodesic_config = geodesic_config or GeodesicConfig()
    result = straighten_paths(
        q0.points[None],
        q1.points[None],
        q0.mesh,
        metric_config,
        geodesic_config,
        region_tags=q0.region_tags,
    )
    if not result.converged[0]:
        warnings.warn(
            f"Geodesic did not converge within {geodesic_config.max_iters} iterations.",
            UserWarning,
            stacklevel=2,
        )
    frames = result.paths[0]
    shapes = [q0] + [q0.with_points(points) for points in frames[1:-1]] + [q1]
    return GeodesicPath(
        shapes=shapes,
        energy=float(result.energy[0]),
        length=float(result.length[0]),
        converged=bool(result.converged[0]),
        iterations=int(result.iterations[0]),
        energy_history=result.energy_history[0],
    )


def geodesic_batch(
    pairs: Sequence[Tuple[Shape, Shape]],
    metric_config: Optional[MetricConfig] = None,
    geodesic_config: Optional[GeodesicConfig] = None,
) -> List[GeodesicPath]:
    """Geodesics between many corresponded pairs that share one sampling topology and tag layout."""
    if not pairs:
        return []
    reference = pairs[0][0]
    for q0, q1 in pairs:
        _check_corresponded(q0, q1)
        _check_corresponded(reference, q0)
    result = straighten_paths(
        np.stack([q0.points for q0, _ in pairs]),
        np.stack([q1.points for _, q1 in pairs]),
        reference.mesh,
        metric_config,
        geodesic_config,
        region_tags=reference.region_tags,
    )
    paths = []
    for index, (q0, q1) in enumerate(pairs):
        frames = result.paths[index]
        paths.append(
            GeodesicPath(
                shapes=[q0] + [q0.with_points(points) for points in frames[1:-1]] + [q1],
                energy=float(result.energy[index]),
                length=float(result.length[index]),
                converged=bool(result.converged[index]),
                iterations=int(result.iterations[index]),
                energy_history=result.energy_history[index],
            )
        )
    return paths


def geodesic_distance(
    a: Shape,
    b: Shape,
    metric_config: Optional[MetricConfig] = None,
    geodesic_config: Optional[GeodesicConfig] = None,
    alignment_config: Optional[AlignmentConfig] = None,
) -> float:
    """Align b onto a and return the length of the geodesic between them."""
    correspondence = align(a, b, alignment_config)
    return geodesic(
        correspondence.shape_a, correspondence.shape_b, metric_config, geodesic_config
    ).length


def _straighten_lengths(
    starts: np.ndarray,
    ends: np.ndarray,
    mesh: MeshTopology,
    metric_config: MetricConfig,
    geodesic_config: GeodesicConfig,
    region_tags: Optional[Tuple[str, ...]],
) -> Tuple[np.ndarray, np.ndarray]:
    result = straighten_paths(starts, ends, mesh, metric_config, geodesic_config, region_tags)
    return result.length, result.converged


def corresponded_distances(
    starts: Sequence[Shape],
    ends: Sequence[Shape],
    metric_config: Optional[MetricConfig] = None,
    geodesic_config: Optional[GeodesicConfig] = None,
    n_jobs: int = 1,
    batch_size: int = _BATCH_SIZE,
) -> np.ndarray:
    """Geodesic lengths between already corresponded pairs (starts[i], ends[i]).

    Pairs are grouped by sampling layout and straightened in batches; batches run concurrently with joblib.
    Every pair's result is independent of the grouping and of the number of jobs.
    """
    metric_config = metric_config or MetricConfig()
    geodesic_config = geodesic_config or GeodesicConfig()
    if len(starts) != len(ends):
        raise IncompatibleShapesError("Need as many start shapes as end shapes.")

    groups: Dict[tuple, List[int]] = {}
    for index, (q0, q1) in enumerate(zip(starts, ends)):
        _check_corresponded(q0, q1)
        key = (q0.topology, q0.n, q0.dim, q0.rows, q0.cols, q0.region_tags)
        groups.setdefault(key, []).append(index)

    jobs = []
    for members in groups.values():
        reference = starts[members[0]]
        for offset in range(0, len(members), batch_size):
            chunk = members[offset : offset + batch_size]
            jobs.append(
                (
                    chunk,
                    np.stack([starts[i].points for i in chunk]),
                    np.stack([ends[i].points for i in chunk]),
                    reference.mesh,
                    reference.region_tags,
                )
            )
    outputs = Parallel(n_jobs=n_jobs)(
        delayed(_straighten_lengths)(
            job_starts, job_ends, mesh, metric_config, geodesic_config, tags
        )
        for _, job_starts, job_ends, mesh, tags in jobs
    )

    lengths = np.zeros(len(starts))
    nb_not_converged = 0
    for (chunk, *_), (chunk_lengths, chunk_converged) in zip(jobs, outputs):
        lengths[chunk] = chunk_lengths
        nb_not_converged += int(np.sum(~chunk_converged))
    if nb_not_converged:
        warnings.warn(
            f"{nb_not_converged} of {len(starts)} geodesics did not converge within "
            f"{geodesic_config.max_iters} iterations.",
            UserWarning,
            stacklevel=2,
        )
    return lengths


def geodesic_distances(
    pairs: Sequence[Tuple[Shape, Shape]],
    metric_config: Optional[MetricConfig] = None,
    geodesic_config: Optional[GeodesicConfig] = None,
    alignment_config: Optional[AlignmentConfig] = None,
    n_jobs: int = 1,
) -> np.ndarray:
    """Align every pair on its own and return the geodesic lengths."""
    correspondences = [align(a, b, alignment_config) for a, b in pairs]
    return corresponded_distances(
        [result.shape_a for result in correspondences],
        [result.shape_b for result in correspondences],
        metric_config,
        geodesic_config,
        n_jobs=n_jobs,
    )


def pairwise_geodesic_distances(
    shapes: Sequence[Shape],
    ids: Optional[Sequence[str]] = None,
    metric_config: Optional[MetricConfig] = None,
    geodesic_config: Optional[GeodesicConfig] = None,
    alignment_config: Optional[AlignmentConfig] = None,
    n_jobs: int = 1,
) -> pd.DataFrame:
    """All pairs geodesic distance matrix with ids as row and column labels.

    Only the upper triangle is computed; the lower triangle mirrors it and the diagonal is zero.
    """
    ids = list(ids) if ids is not None else [f"s{index:03d}" for index in range(len(shapes))]
    logger(f"{datetime.utcnow()}: Start computing {len(shapes)} x {len(shapes)} shape distances.")
    upper = [(i, j) for i in range(len(shapes)) for j in range(i + 1, len(shapes))]
    values = geodesic_distances(
        [(shapes[i], shapes[j]) for i, j in upper],
        metric_config,
        geodesic_config,
        alignment_config,
        n_jobs=n_jobs,
    )
    matrix = np.zeros((len(shapes), len(shapes)))
    for (i, j), value in zip(upper, values):
        matrix[i, j] = value
        matrix[j, i] = value
    return pd.DataFrame(matrix, index=ids, columns=ids)
