"""
Matching
Suitable-vehicle counts and caller pickup rates under the four zero-detour matching cases
"""
from typing import Tuple

import numpy as np

from ..exceptions import UnservableError
from ..geometry.zone_grid import DIAGONAL_DIRECTIONS, ZoneGrid
from ..models.planning_models import PickupRates, SuitableCounts
from .topology import topology_for

# Expected share of a zone in which a local seeker's destination fits an intra-zonal caller
INTRA_SEEKER_SHARE = 2.0 / 9.0
# Intra-zonal callers split evenly over the four diagonal directions
DIRECTION_SHARE = 1.0 / len(DIAGONAL_DIRECTIONS)


def suitable_counts(
    grid: ZoneGrid,
    n_idle: np.ndarray,
    n_seeker_local: np.ndarray,
    n_seeker_remote: np.ndarray,
) -> SuitableCounts:
    """N_ii^r for each diagonal r and N_ij for each j != i"""
    topology = topology_for(grid)
    n_idle = np.asarray(n_idle, dtype=float)
    n_seeker_local = np.asarray(n_seeker_local, dtype=float)
    n_seeker_remote = np.asarray(n_seeker_remote, dtype=float)

    intra = (
        n_idle[:, None]
        + INTRA_SEEKER_SHARE * n_seeker_local[:, None]
        + np.einsum("irj,ij->ir", topology.intra_mask, n_seeker_remote)
    )
    inter = (
        n_idle[:, None]
        + topology.share * n_seeker_local[:, None]
        + np.einsum("ijk,ik->ij", topology.omega, n_seeker_remote)
    )
    inter[~topology.off_diagonal] = 0.0
    return SuitableCounts(intra=intra, inter=inter)


def inverse_counts(demand: np.ndarray, counts: SuitableCounts) -> Tuple[np.ndarray, np.ndarray]:
    """1/N where needed; zero where the caller class has no demand"""
    intra_demand = np.diag(demand)
    size = demand.shape[0]
    off_diagonal = ~np.eye(size, dtype=bool)

    starved_intra = (intra_demand[:, None] > 0) & (counts.intra <= 0)
    if np.any(starved_intra):
        zone, r_index = np.argwhere(starved_intra)[0]
        raise UnservableError(int(zone) + 1, f"intra-zonal {DIAGONAL_DIRECTIONS[r_index].value}")

    starved_inter = (demand > 0) & (counts.inter <= 0) & off_diagonal
    if np.any(starved_inter):
        i, j = np.argwhere(starved_inter)[0]
        raise UnservableError(int(i) + 1, f"{i + 1}->{j + 1}")

    with np.errstate(divide="ignore"):
        inv_intra = np.where(counts.intra > 0, 1.0 / np.where(counts.intra > 0, counts.intra, 1.0), 0.0)
        inv_inter = np.where(
            (counts.inter > 0) & off_diagonal, 1.0 / np.where(counts.inter > 0, counts.inter, 1.0), 0.0
        )
    inv_intra = np.where(intra_demand[:, None] > 0, inv_intra, 0.0)
    inv_inter = np.where(demand > 0, inv_inter, 0.0)
    return inv_intra, inv_inter


def pickup_rates(
    scenario,
    counts: SuitableCounts,
    n_idle: np.ndarray,
    n_seeker_local: np.ndarray,
    n_seeker_remote: np.ndarray,
) -> PickupRates:
    """Split every caller class's demand over its suitable vehicles in proportion to their numbers"""
    topology = topology_for(scenario.grid)
    demand = scenario.demand
    inv_intra, inv_inter = inverse_counts(demand, counts)

    n_idle = np.asarray(n_idle, dtype=float)
    n_seeker_local = np.asarray(n_seeker_local, dtype=float)
    n_seeker_remote = np.asarray(n_seeker_remote, dtype=float)

    per_direction = DIRECTION_SHARE * np.diag(demand)
    inv_intra_sum = inv_intra.sum(axis=1)

    idle_intra = per_direction * n_idle * inv_intra_sum
    local_intra = per_direction * INTRA_SEEKER_SHARE * n_seeker_local * inv_intra_sum
    # a remote seeker fits every diagonal direction whose feasible area holds its destination
    remote_intra = per_direction[:, None] * n_seeker_remote * np.einsum(
        "irj,ir->ij", topology.intra_mask, inv_intra
    )

    rate = demand * inv_inter
    idle_inter = rate * n_idle[:, None]
    local_inter = rate * topology.share * n_seeker_local[:, None]
    remote_inter = rate[:, :, None] * topology.omega * n_seeker_remote[:, None, :]

    return PickupRates(
        idle_intra=idle_intra,
        local_intra=local_intra,
        remote_intra=remote_intra,
        idle_inter=idle_inter,
        local_inter=local_inter,
        remote_inter=remote_inter,
    )


def absorbed_demand(pickups: PickupRates) -> np.ndarray:
    """Pickup rates summed over vehicle classes, per caller class [i, j]"""
    absorbed = pickups.idle_inter + pickups.local_inter + pickups.remote_inter.sum(axis=2)
    intra = pickups.idle_intra + pickups.local_intra + pickups.remote_intra.sum(axis=1)
    absorbed[np.diag_indices_from(absorbed)] = intra
    return absorbed
