import itertools

import numpy as np
import pytest

from motioncast.config.geometry_config import AlignmentConfig, GeodesicConfig, MetricConfig
from motioncast.general_utils.exceptions import MotionCastError, UnknownRegionError
from motioncast.similarity.motion_sequence import MotionSequence
from motioncast.similarity.sequence_similarity import (
    cross_sequence_distances,
    dtw_align,
    frame_cost_matrix,
    pairwise_sequence_distances,
    region_metric_config,
    self_similarity,
    sequence_distance,
)
from motioncast.synthetic.generators import GeneratorSpec, generate

FAST = GeodesicConfig(nb_intervals=2, max_iters=50)


@pytest.fixture
def wave():
    return generate(GeneratorSpec(class_name="wave", duration_frames=8, speed_factor=2.0, seed=1))


@pytest.fixture
def bend():
    return generate(GeneratorSpec(class_name="bend", duration_frames=8, speed_factor=1.6, seed=2))


def _brute_force_dtw(cost):
    rows, cols = cost.shape
    best = np.inf

    def walk(i, j, total):
        nonlocal best
        total += cost[i, j]
        if (i, j) == (rows - 1, cols - 1):
            best = min(best, total)
            return
        for di, dj in ((1, 1), (1, 0), (0, 1)):
            if i + di < rows and j + dj < cols:
                walk(i + di, j + dj, total)

    walk(0, 0, 0.0)
    return best


def test_dtw_matches_brute_force():
    random_generator = np.random.default_rng(11)
    for rows, cols in itertools.product(range(1, 6), range(1, 6)):
        cost = random_generator.integers(0, 5, size=(rows, cols)).astype(float)
        result = dtw_align(cost)
        assert result.raw_cost == pytest.approx(_brute_force_dtw(cost))
        assert result.path[0] == (0, 0)
        assert result.path[-1] == (rows - 1, cols - 1)
        assert result.normalized_cost == pytest.approx(result.raw_cost / len(result.path))


def test_dtw_path_is_monotone_and_connected():
    cost = np.random.default_rng(3).uniform(size=(6, 9))
    path = dtw_align(cost).path
    for (i0, j0), (i1, j1) in zip(path, path[1:]):
        assert (i1 - i0, j1 - j0) in {(1, 1), (1, 0), (0, 1)}


def test_dtw_prefers_diagonal_steps_on_ties():
    assert dtw_align(np.zeros((2, 2))).path == [(0, 0), (1, 1)]
    assert dtw_align(np.zeros((3, 3))).path == [(0, 0), (1, 1), (2, 2)]


def test_dtw_single_row_visits_every_column():
    result = dtw_align(np.array([[1.0, 2.0, 3.0, 4.0]]))
    assert result.path == [(0, 0), (0, 1), (0, 2), (0, 3)]
    assert result.raw_cost == 10.0
    assert result.normalized_cost == 2.5


def test_dtw_rejects_bad_costs():
    with pytest.raises(MotionCastError):
        dtw_align(np.zeros((0, 3)))
    with pytest.raises(MotionCastError):
        dtw_align(np.array([[1.0, -1.0]]))
    with pytest.raises(MotionCastError):
        dtw_align(np.array([[1.0, np.nan]]))


def test_self_similarity_matrix(wave):
    matrix = self_similarity(wave, geodesic_config=FAST)

    assert wave.nb_frames == 4
    assert matrix.values.shape == (4, 4)
    assert np.allclose(matrix.values, matrix.values.T)
    assert np.all(np.diag(matrix.values) == 0.0)
    assert matrix.values[0, 1] > 0
    assert list(matrix.to_frame().columns) == ["f000", "f001", "f002", "f003"]


def test_self_similarity_restricted_to_region(wave):
    matrix = self_similarity(wave, region=["hands"], geodesic_config=FAST)
    assert matrix.region == ("hands",)
    assert np.allclose(matrix.values, matrix.values.T)


def test_unknown_region_is_rejected(wave):
    with pytest.raises(UnknownRegionError):
        self_similarity(wave, region=["tail"], geodesic_config=FAST)


def test_region_metric_config(wave):
    config = region_metric_config(wave, ["hands", "arms"], MetricConfig())
    assert config.region_emphasis["hands"] == 1.0
    assert config.region_emphasis["arms"] == 1.0
    assert config.region_emphasis["torso"] == 0.0


def test_sequence_distance_to_itself_is_zero(wave):
    assert sequence_distance(wave, wave, geodesic_config=FAST) == pytest.approx(0.0, abs=1e-6)


def test_frame_cost_matrix_shape(wave, bend):
    cost = frame_cost_matrix(wave, bend, geodesic_config=FAST)
    assert cost.shape == (wave.nb_frames, bend.nb_frames)
    assert np.all(cost >= 0)


def test_pairwise_and_cross_sequence_distances(wave, bend):
    pairwise = pairwise_sequence_distances([wave, bend], geodesic_config=FAST)
    cross = cross_sequence_distances([wave], [wave, bend], geodesic_config=FAST)

    assert list(pairwise.index) == [wave.id, bend.id]
    assert np.allclose(pairwise.values, pairwise.values.T)
    assert np.all(np.diag(pairwise.values) == 0.0)
    assert pairwise.loc[wave.id, bend.id] > 0
    assert cross.shape == (1, 2)
    assert cross.loc[wave.id, bend.id] == pytest.approx(pairwise.loc[wave.id, bend.id], rel=1e-6)


def _retimed(sequence, frames, sequence_id):
    return MotionSequence(
        frames=tuple(frames),
        frame_times=np.arange(len(frames)) / 25.0,
        action_label=sequence.action_label,
        motion_labels=sequence.motion_labels,
        id=sequence_id,
    )


def test_sequence_distance_ignores_viewpoint_and_actor_scale(wave):
    turned = generate(
        GeneratorSpec(
            class_name="wave", duration_frames=8, speed_factor=2.0, seed=1, viewpoint_angle=0.7, actor_scale=1.5
        )
    )
    assert sequence_distance(wave, turned, geodesic_config=FAST) == pytest.approx(0.0, abs=1e-6)


def test_sequence_distance_is_nearly_symmetric():
    sequences = [
        generate(GeneratorSpec(class_name=name, duration_frames=8, seed=seed, viewpoint_angle=0.1 * seed))
        for name, seed in [("wave", 1), ("bend", 2), ("jump", 3), ("crouch", 4)]
    ]
    config = GeodesicConfig(nb_intervals=2, max_iters=200)
    for a, b in itertools.combinations(sequences, 2):
        forward = sequence_distance(a, b, geodesic_config=config)
        backward = sequence_distance(b, a, geodesic_config=config)
        assert forward == pytest.approx(backward, rel=0.15)


@pytest.fixture(scope="module")
def controlled_sequences():
    """Three right handed actors per class with different proportions, speeds, sizes and viewpoints."""
    sequences = []
    for name in ("wave", "bend", "jump"):
        for position, seed in enumerate((11, 12, 13)):
            sequences.append(
                generate(
                    GeneratorSpec(
                        class_name=name,
                        duration_frames=12,
                        speed_factor=(0.9, 1.0, 1.15)[position],
                        actor_scale=(0.8, 1.0, 1.25)[position],
                        viewpoint_angle=(-0.5, 0.0, 0.4)[position],
                        seed=seed,
                        sequence_id=f"{name}_{seed}",
                    )
                )
            )
    return sequences


@pytest.fixture(scope="module")
def controlled_distances(controlled_sequences):
    return pairwise_sequence_distances(controlled_sequences, geodesic_config=FAST)


def _median_cross_class(distances, sequences):
    labels = [sequence.action_label for sequence in sequences]
    values = distances.to_numpy()
    return np.median(
        [values[i, j] for i, j in itertools.combinations(range(len(labels)), 2) if labels[i] != labels[j]]
    )


def test_intra_class_distances_are_smaller(controlled_sequences, controlled_distances):
    labels = [sequence.action_label for sequence in controlled_sequences]
    values = controlled_distances.to_numpy()
    pairs = list(itertools.combinations(range(len(labels)), 2))
    intra = [values[i, j] for i, j in pairs if labels[i] == labels[j]]

    assert np.median(intra) < _median_cross_class(controlled_distances, controlled_sequences)


def test_faster_actor_and_frozen_frames_barely_matter(controlled_sequences, controlled_distances):
    base = generate(GeneratorSpec(class_name="wave", duration_frames=30, seed=5))
    faster = generate(GeneratorSpec(class_name="wave", duration_frames=30, speed_factor=1.5, seed=5))
    middle = base.nb_frames // 2
    frozen = _retimed(
        base, base.frames[:middle] + (base.frames[middle],) * 3 + base.frames[middle:], "frozen"
    )
    margin = 0.1 * _median_cross_class(controlled_distances, controlled_sequences)

    assert faster.nb_frames == 20
    assert sequence_distance(base, faster, geodesic_config=FAST) <= margin
    assert sequence_distance(base, frozen, geodesic_config=FAST) <= margin


def test_periodic_motion_shows_a_band():
    # the forearm of a wave completes two cycles, frames half a sequence apart hold the same pose
    wave = generate(GeneratorSpec(class_name="wave", duration_frames=9, seed=3))
    values = self_similarity(wave, geodesic_config=FAST).values
    band = np.diagonal(values, offset=4)
    quarter = np.diagonal(values, offset=2)

    assert wave.nb_frames == 9
    assert np.all(band <= 1e-6)
    assert quarter.max() > 1e-3


def test_reversed_sequence_matches_on_the_antidiagonal(wave):
    reversed_wave = _retimed(wave, wave.frames[::-1], "reversed")
    strict = AlignmentConfig(strict_correspondence=True)
    cost = frame_cost_matrix(wave, reversed_wave, geodesic_config=FAST, alignment_config=strict)

    assert np.all(np.diag(np.fliplr(cost)) <= 1e-6)
    assert np.diag(cost).max() > 1e-3
