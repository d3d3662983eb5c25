"""
Network Topology
Dense boolean masks of the zone sets, built once per grid for vectorised rate assembly
"""
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np

from ..geometry.zone_grid import DIAGONAL_DIRECTIONS, ZoneGrid


@dataclass
class NetworkTopology:
    """Zone sets of a grid as 0-based index arrays"""
    grid: ZoneGrid
    size: int
    distance: np.ndarray          # lattice steps, [i, j]
    diagonal_pair: np.ndarray     # j diagonal to i, [i, j]
    share: np.ndarray             # 1/4 diagonal, 1/2 cardinal; share of seeker-local vehicles suitable for i->j callers
    intra_mask: np.ndarray        # j in Omega_ii^r, [i, r, j], r over diagonal directions
    omega: np.ndarray             # k in Omega_ij, [i, j, k]
    omega_tilde: np.ndarray       # k in Omega~_ij, [i, j, k]
    next_zones: Dict[Tuple[int, int], List[int]]
    full_index: List[Tuple[int, int, int]] = field(default_factory=list)
    full_position: Dict[Tuple[int, int, int], int] = field(default_factory=dict)

    @classmethod
    def from_grid(cls, grid: ZoneGrid) -> "NetworkTopology":
        size = grid.size
        ids = grid.zone_ids

        distance = np.zeros((size, size), dtype=int)
        diagonal_pair = np.zeros((size, size), dtype=bool)
        share = np.zeros((size, size))
        omega = np.zeros((size, size, size), dtype=bool)
        omega_tilde = np.zeros((size, size, size), dtype=bool)
        intra_mask = np.zeros((size, len(DIAGONAL_DIRECTIONS), size), dtype=bool)
        next_zones: Dict[Tuple[int, int], List[int]] = {}

        for i in ids:
            for r_index, direction in enumerate(DIAGONAL_DIRECTIONS):
                for j in grid.intra_feasible_dest_zones(i, direction):
                    intra_mask[i - 1, r_index, j - 1] = True
            for j in ids:
                if i == j:
                    continue
                distance[i - 1, j - 1] = grid.lattice_distance(i, j)
                diagonal_pair[i - 1, j - 1] = grid.is_diagonal_pair(i, j)
                share[i - 1, j - 1] = 0.25 if diagonal_pair[i - 1, j - 1] else 0.5
                for k in grid.inter_feasible_dest_zones(i, j):
                    omega[i - 1, j - 1, k - 1] = True
                for k in grid.farther_feasible_dest_zones(i, j):
                    omega_tilde[i - 1, j - 1, k - 1] = True
                next_zones[(i - 1, j - 1)] = sorted(z - 1 for z in grid.feasible_next_zones(i, j))

        full_index = [tuple(int(v) for v in triple) for triple in np.argwhere(omega_tilde)]
        full_position = {triple: n for n, triple in enumerate(full_index)}

        return cls(
            grid=grid,
            size=size,
            distance=distance,
            diagonal_pair=diagonal_pair,
            share=share,
            intra_mask=intra_mask,
            omega=omega,
            omega_tilde=omega_tilde,
            next_zones=next_zones,
            full_index=full_index,
            full_position=full_position,
        )

    @property
    def off_diagonal(self) -> np.ndarray:
        return ~np.eye(self.size, dtype=bool)

    @property
    def pair_count(self) -> int:
        return self.size * (self.size - 1)

    def pairs(self) -> List[Tuple[int, int]]:
        """Ordered (i, j), i != j, in the flattening order of seeker vectors"""
        return [(i, j) for i in range(self.size) for j in range(self.size) if i != j]

    def pair_positions(self) -> Dict[Tuple[int, int], int]:
        return {pair: n for n, pair in enumerate(self.pairs())}

    def unpack(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Split x = (n_i0i0, n_i0j0 off-diagonal) into a vector and a K x K matrix"""
        size = self.size
        local = np.asarray(x[:size], dtype=float)
        remote = np.zeros((size, size))
        remote[self.off_diagonal] = x[size:]
        return local, remote

    def pack(self, local: np.ndarray, remote: np.ndarray) -> np.ndarray:
        return np.concatenate([np.asarray(local, dtype=float), np.asarray(remote, dtype=float)[self.off_diagonal]])


def topology_for(grid: ZoneGrid) -> NetworkTopology:
    """Topology of a grid, built on first use and kept on the grid"""
    topology = getattr(grid, "_network_topology", None)
    if topology is None:
        topology = NetworkTopology.from_grid(grid)
        grid._network_topology = topology
    return topology
