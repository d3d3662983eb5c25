"""
Geometry Oracles
Monte-Carlo estimates of the matching shares and expected in-zone travel
distances used by the steady-state equations, all in units of the zone side
"""
import logging
import math
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np

from ..config.config_manager import OracleConfig
from ..models.planning_models import OracleRow
from ..network.equations import (
    BOUNDARY_TO_CLOSER_OF_TWO,
    BOUNDARY_TO_INTERIOR,
    INTERIOR_TO_BOUNDARY,
    INTERIOR_TO_INTERIOR,
    NEAREST_VEHICLE,
    NESTED_LEG,
    ZONE_CROSSING,
)
from ..network.matching import DIRECTION_SHARE, INTRA_SEEKER_SHARE

logger = logging.getLogger(__name__)

# half width of the sampling window around the query point, in units of 1/sqrt(density)
NEAREST_WINDOW = 4.0


def _chunks(samples: int, chunk_size: int) -> Iterator[int]:
    remaining = samples
    while remaining > 0:
        size = min(chunk_size, remaining)
        remaining -= size
        yield size


class _RunningMean:
    """Streaming mean and standard error over chunked samples"""

    def __init__(self):
        self.count = 0
        self.total = 0.0
        self.total_sq = 0.0

    def add(self, values: np.ndarray):
        self.count += values.size
        self.total += float(values.sum())
        self.total_sq += float(np.square(values).sum())

    @property
    def mean(self) -> float:
        return self.total / self.count

    @property
    def std_error(self) -> float:
        if self.count < 2:
            return 0.0
        variance = max(self.total_sq / self.count - self.mean ** 2, 0.0) * self.count / (self.count - 1)
        return math.sqrt(variance / self.count)


def intra_feasible(origin: np.ndarray, first: np.ndarray, second: np.ndarray) -> np.ndarray:
    """
    Zero-detour nesting of two destinations seen from a common origin: both
    lie in the same quadrant from the origin and one lies inside the box
    spanned by the origin and the other. Arrays are (n, 2).
    """
    ahead = np.all(first >= origin, axis=1) & np.all(second >= origin, axis=1)
    nested = np.all(first <= second, axis=1) | np.all(first >= second, axis=1)
    return ahead & nested


def mc_intra_feasible_fraction(
    samples: int,
    seed: int,
    fixed_destination: Optional[Tuple[float, float]] = None,
    swap_roles: bool = False,
    chunk_size: int = 250_000,
) -> Tuple[float, float]:
    """
    Share of a zone where a seeker's destination allows a zero-detour match
    with a north-east bound intra-zonal caller; (estimate, standard error).

    Caller origin and destination are the per-axis min and max of two uniform
    points. With a fixed destination the origin is uniform instead.
    """
    rng = np.random.default_rng(seed)
    stats = _RunningMean()
    for size in _chunks(samples, chunk_size):
        if fixed_destination is None:
            a = rng.random((size, 2))
            b = rng.random((size, 2))
            origin, destination = np.minimum(a, b), np.maximum(a, b)
        else:
            origin = rng.random((size, 2))
            destination = np.broadcast_to(np.asarray(fixed_destination, dtype=float), (size, 2))
        seeker = rng.random((size, 2))
        if swap_roles:
            hits = intra_feasible(origin, seeker, destination)
        else:
            hits = intra_feasible(origin, destination, seeker)
        stats.add(hits.astype(float))
    return stats.mean, stats.std_error


def mc_case4_fractions(
    samples: int,
    seed: int,
    pinned_corner: bool = False,
    antithetic: bool = False,
) -> Tuple[Tuple[float, float], Tuple[float, float]]:
    """
    Share of the zone lying in a cardinal direction from a caller origin, and
    in a diagonal quadrant from it; ((cardinal, se), (diagonal, se)).

    A pinned origin sits at the corner from which the whole zone qualifies.
    Antithetic sampling pairs every uniform draw u with 1 - u.
    """
    rng = np.random.default_rng(seed)
    half = samples // 2 if antithetic else samples
    seeker = rng.random((half, 2))
    if pinned_corner:
        cardinal_origin = np.ones(half)
        diagonal_origin = np.zeros((half, 2))
    else:
        origin = rng.random((half, 2))
        cardinal_origin, diagonal_origin = origin[:, 1], origin

    def shares(s: np.ndarray, y0: np.ndarray, o: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        cardinal = (s[:, 1] <= y0).astype(float)
        diagonal = np.all(s >= o, axis=1).astype(float)
        return cardinal, diagonal

    cardinal, diagonal = shares(seeker, cardinal_origin, diagonal_origin)
    if antithetic:
        if pinned_corner:
            mirrored = shares(1.0 - seeker, cardinal_origin, diagonal_origin)
        else:
            mirrored = shares(1.0 - seeker, 1.0 - cardinal_origin, 1.0 - diagonal_origin)
        cardinal = 0.5 * (cardinal + mirrored[0])
        diagonal = 0.5 * (diagonal + mirrored[1])

    def summary(values: np.ndarray) -> Tuple[float, float]:
        std = float(values.std(ddof=1)) if values.size > 1 else 0.0
        return float(values.mean()), std / math.sqrt(values.size)

    return summary(cardinal), summary(diagonal)


def _boundary_to_closer_of_two(rng: np.random.Generator, size: int) -> np.ndarray:
    entry = rng.random(size)
    first = rng.random((size, 2))
    second = rng.random((size, 2))
    d1 = np.abs(first[:, 0] - entry) + first[:, 1]
    d2 = np.abs(second[:, 0] - entry) + second[:, 1]
    return np.minimum(d1, d2)


def _interior_to_interior(rng: np.random.Generator, size: int) -> np.ndarray:
    a = rng.random((size, 2))
    b = rng.random((size, 2))
    return np.abs(a - b).sum(axis=1)


def _boundary_to_interior(rng: np.random.Generator, size: int) -> np.ndarray:
    entry = rng.random(size)
    point = rng.random((size, 2))
    return np.abs(point[:, 0] - entry) + point[:, 1]


def _nested_first_leg(rng: np.random.Generator, size: int) -> np.ndarray:
    """Origin, nearer and farther destination nested on both axes; first leg length"""
    points = np.sort(rng.random((size, 2, 3)), axis=2)
    return (points[:, :, 1] - points[:, :, 0]).sum(axis=1)


def _interior_to_boundary(rng: np.random.Generator, size: int) -> np.ndarray:
    return rng.random(size)


def _zone_crossing(rng: np.random.Generator, size: int) -> np.ndarray:
    """South edge to north edge with no lateral movement"""
    entry = rng.random((size, 2))
    entry[:, 1] = 0.0
    exit_point = entry.copy()
    exit_point[:, 1] = 1.0
    return np.abs(exit_point - entry).sum(axis=1)


def _nearest_of_poisson(rng: np.random.Generator, size: int, density: float) -> np.ndarray:
    """
    Rectilinear distance from the origin to the nearest point of a planar
    Poisson process of the given density, sampled inside a square window
    """
    half_width = NEAREST_WINDOW / math.sqrt(density)
    counts = rng.poisson(density * (2.0 * half_width) ** 2, size)
    points = rng.uniform(-half_width, half_width, (int(counts.sum()), 2))
    distances = np.abs(points).sum(axis=1)
    nearest = np.full(size, half_width)
    occupied = counts > 0
    if distances.size:
        starts = np.concatenate([[0], np.cumsum(counts)[:-1]])[occupied]
        nearest[occupied] = np.minimum.reduceat(distances, starts)
    return np.minimum(nearest, half_width)


def mc_expected_distances(
    samples: int,
    seed: int,
    nearest_counts: Sequence[int] = (1, 4, 16),
    chunk_size: int = 250_000,
) -> List[OracleRow]:
    """Expected in-zone travel distances with their reference values"""
    rng = np.random.default_rng(seed)
    cases = [
        ("boundary_to_closer_of_two", _boundary_to_closer_of_two, BOUNDARY_TO_CLOSER_OF_TWO),
        ("interior_to_interior", _interior_to_interior, INTERIOR_TO_INTERIOR),
        ("boundary_to_interior", _boundary_to_interior, BOUNDARY_TO_INTERIOR),
        ("nested_first_leg", _nested_first_leg, NESTED_LEG),
        ("interior_to_boundary", _interior_to_boundary, INTERIOR_TO_BOUNDARY),
        ("zone_crossing", _zone_crossing, ZONE_CROSSING),
    ]
    rows: List[OracleRow] = []
    for name, sampler, expected in cases:
        stats = _RunningMean()
        for size in _chunks(samples, chunk_size):
            stats.add(sampler(rng, size))
        rows.append(OracleRow(name, stats.mean, stats.std_error, expected, samples))

    # each sample draws about 4 * NEAREST_WINDOW**2 points
    nearest_chunk = max(1, chunk_size // int(4 * NEAREST_WINDOW ** 2))
    for count in nearest_counts:
        stats = _RunningMean()
        for size in _chunks(samples, nearest_chunk):
            stats.add(_nearest_of_poisson(rng, size, float(count)))
        rows.append(
            OracleRow(f"nearest_of_{count}", stats.mean, stats.std_error, NEAREST_VEHICLE / math.sqrt(count), samples)
        )
    return rows


def run_oracles(config: Optional[OracleConfig] = None) -> List[OracleRow]:
    """Every geometry constant, each estimated from its own seeded stream"""
    config = config or OracleConfig()
    seeds = np.random.SeedSequence(config.seed).spawn(4)
    streams = [int(s.generate_state(1)[0]) for s in seeds]

    rows: List[OracleRow] = []
    share, se = mc_intra_feasible_fraction(config.samples, streams[0], chunk_size=config.chunk_size)
    rows.append(OracleRow("intra_feasible_share", share, se, INTRA_SEEKER_SHARE, config.samples))
    share, se = mc_intra_feasible_fraction(
        config.samples, streams[1], fixed_destination=(1.0, 1.0), chunk_size=config.chunk_size
    )
    rows.append(OracleRow("intra_feasible_far_corner", share, se, 0.25, config.samples))

    (cardinal, cardinal_se), (diagonal, diagonal_se) = mc_case4_fractions(config.samples, streams[2])
    rows.append(OracleRow("remote_cardinal_share", cardinal, cardinal_se, 0.5, config.samples))
    rows.append(OracleRow("remote_diagonal_share", diagonal, diagonal_se, DIRECTION_SHARE, config.samples))

    rows.extend(
        mc_expected_distances(config.samples, streams[3], config.nearest_counts, config.chunk_size)
    )
    failed = [row.name for row in rows if not row.passed(config.tolerance)]
    if failed:
        logger.warning(f"Oracle rows outside {config.tolerance:.1%}: {', '.join(failed)}")
    else:
        logger.info(f"All {len(rows)} oracle rows within {config.tolerance:.1%}")
    return rows
