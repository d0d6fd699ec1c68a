"""Freeway drop, V2V link budget, and the SINR-thresholded neighbor graph."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyScenario, InvalidDistance


@dataclass(frozen=True)
class LaneGeometry:
    lanes_per_direction: int = 3
    lane_width: float = 4.0
    cell_radius: float = 500.0
    rsu_position: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if self.lanes_per_direction < 1:
            raise ValueError("lanes_per_direction must be >= 1")
        if self.lane_width <= 0:
            raise ValueError("lane_width must be > 0")
        if self.cell_radius < 0:
            raise ValueError("cell_radius must be >= 0")

    def lanes(self) -> list[tuple[int, int, float, float]]:
        """(lane index, direction, y offset, half length) of every lane crossing the cell."""
        out = []
        for direction in (1, -1):
            for k in range(self.lanes_per_direction):
                y = direction * (k + 0.5) * self.lane_width
                if abs(y) < self.cell_radius:
                    half = float(np.sqrt(self.cell_radius**2 - y**2))
                    out.append((len(out), direction, y, half))
        return out


@dataclass(frozen=True)
class ChannelParams:
    tx_power: float = 20.0  # dBm
    noise_power: float = -114.0  # dBm
    path_loss_intercept: float = 128.1  # dB at 1 km
    path_loss_slope: float = 37.6  # dB/decade
    shadowing_std: float = 8.0  # dB
    fading: bool = True
    sinr_threshold: float = 30.0  # dB
    interference_mode: str = "none"

    def __post_init__(self):
        if self.shadowing_std < 0:
            raise ValueError("shadowing_std must be >= 0")
        if self.path_loss_slope <= 0:
            raise ValueError("path_loss_slope must be > 0")
        if self.interference_mode not in ("none", "aggregate"):
            raise ValueError("interference_mode must be 'none' or 'aggregate'")

    def deterministic(self) -> "ChannelParams":
        """Same budget with shadowing and fast fading switched off."""
        return ChannelParams(
            self.tx_power,
            self.noise_power,
            self.path_loss_intercept,
            self.path_loss_slope,
            0.0,
            False,
            self.sinr_threshold,
            self.interference_mode,
        )


@dataclass(frozen=True)
class VuePlacement:
    vue_id: int
    position: tuple[float, float]
    lane: int
    direction: int


@dataclass
class NeighborGraph:
    """Symmetric adjacency plus the directed per-link SINR (dB)."""

    adjacency: np.ndarray  # (V, V) bool
    sinr_db: np.ndarray  # (V, V) float, -inf on the diagonal
    threshold_db: float = 0.0
    _neighbors: list[tuple[int, ...]] = field(init=False, repr=False)

    def __post_init__(self):
        self.adjacency = np.asarray(self.adjacency, dtype=bool)
        self._neighbors = [tuple(int(j) for j in np.flatnonzero(row)) for row in self.adjacency]

    @property
    def n_vues(self) -> int:
        return self.adjacency.shape[0]

    def neighbors(self, i: int) -> tuple[int, ...]:
        return self._neighbors[i]

    def degree(self) -> np.ndarray:
        return self.adjacency.sum(axis=1)

    def isolated(self) -> list[int]:
        return [i for i, nb in enumerate(self._neighbors) if not nb]

    def edges(self) -> list[tuple[int, int]]:
        """Unordered links as (i, j) with i < j, lexicographic."""
        ii, jj = np.nonzero(np.triu(self.adjacency, k=1))
        return list(zip(ii.tolist(), jj.tolist()))

    @property
    def n_links(self) -> int:
        return int(np.triu(self.adjacency, k=1).sum())

    def subgraph(self, keep: list[int]) -> "NeighborGraph":
        idx = np.asarray(keep, dtype=int)
        return NeighborGraph(self.adjacency[np.ix_(idx, idx)], self.sinr_db[np.ix_(idx, idx)], self.threshold_db)

    @classmethod
    def from_edges(cls, n: int, edges, sinr_db: float = np.inf) -> "NeighborGraph":
        adj = np.zeros((n, n), dtype=bool)
        for i, j in edges:
            if i == j:
                raise ValueError("self-loop")
            adj[i, j] = adj[j, i] = True
        sinr = np.where(adj, sinr_db, -np.inf)
        return cls(adj, sinr, threshold_db=-np.inf)


def mean_gap(headway: float, velocity_kmh: float) -> float:
    """Mean inter-vehicle distance in metres for a time headway and speed."""
    return headway * velocity_kmh / 3.6


def place_vues(
    geometry: LaneGeometry,
    density_headway: float,
    velocity: float,
    seed=None,
    n_vues: int | None = None,
) -> list[VuePlacement]:
    """Drop vehicles on every lane as a 1-D Poisson process.

    Gaps along each lane are exponential with mean ``headway * velocity``.
    With ``n_vues`` set, the drop is thinned uniformly to that many vehicles
    (thinning keeps the process Poisson); a drop that comes up short is
    redrawn from the same stream.
    """
    if density_headway <= 0 or velocity <= 0:
        raise ValueError("headway and velocity must be positive")
    rng = np.random.default_rng(seed)
    scale = mean_gap(density_headway, velocity)
    lanes = geometry.lanes()
    cx, cy = geometry.rsu_position
    if not lanes:
        raise EmptyScenario("no lane crosses the cell")

    for _attempt in range(1000):
        pts: list[tuple[float, float, int, int]] = []
        for lane, direction, y, half in lanes:
            length = 2 * half
            # draw enough gaps to cover the lane in one go, top up if needed
            n_draw = int(length / scale * 1.5) + 16
            xs = np.cumsum(rng.exponential(scale, n_draw))
            while xs[-1] <= length:
                xs = np.concatenate([xs, xs[-1] + np.cumsum(rng.exponential(scale, n_draw))])
            xs = xs[xs <= length]
            pts.extend((cx - half + x, cy + y, lane, direction) for x in xs)
        if n_vues is None:
            break
        if len(pts) >= n_vues:
            keep = np.sort(rng.choice(len(pts), size=n_vues, replace=False))
            pts = [pts[k] for k in keep]
            break
    else:
        raise EmptyScenario(f"could not drop {n_vues} vehicles in the cell")

    if not pts:
        raise EmptyScenario("vehicle drop is empty")
    return [VuePlacement(k, (float(x), float(y)), lane, d) for k, (x, y, lane, d) in enumerate(pts)]


def path_loss_db(distance, params: ChannelParams):
    d = np.asarray(distance, dtype=float)
    if np.any(d <= 0):
        raise InvalidDistance(f"distance must be > 0, got {distance}")
    pl = params.path_loss_intercept + params.path_loss_slope * np.log10(d / 1000.0)
    return float(pl) if np.ndim(pl) == 0 else pl


def link_gain(distance: float, params: ChannelParams, seed=None) -> float:
    """Channel gain in dB: minus path loss, plus shadowing and Rayleigh power fading."""
    pl = path_loss_db(distance, params)
    rng = np.random.default_rng(seed)
    gain = -pl
    if params.shadowing_std > 0:
        gain += rng.normal(0.0, params.shadowing_std)
    if params.fading:
        gain += 10 * np.log10(rng.exponential(1.0))
    return float(gain)


def positions_array(placements: list[VuePlacement]) -> np.ndarray:
    return np.array([p.position for p in placements], dtype=float).reshape(-1, 2)


def gain_matrix(positions: np.ndarray, params: ChannelParams, seed=None) -> np.ndarray:
    """Directed gains (dB) between all vehicles; -inf on the diagonal.

    Shadowing is one draw per unordered link, fast fading one draw per
    directed link.
    """
    rng = np.random.default_rng(seed)
    n = len(positions)
    diff = positions[:, None, :] - positions[None, :, :]
    dist = np.hypot(diff[..., 0], diff[..., 1])
    off = ~np.eye(n, dtype=bool)
    if np.any(dist[off] <= 0):
        raise InvalidDistance("two vehicles share a position")
    gain = np.full((n, n), -np.inf)
    gain[off] = -path_loss_db(dist[off], params)
    if params.shadowing_std > 0:
        sh = rng.normal(0.0, params.shadowing_std, (n, n))
        sh = np.triu(sh, 1)
        gain[off] += (sh + sh.T)[off]
    if params.fading:
        gain[off] += 10 * np.log10(rng.exponential(1.0, (n, n)))[off]
    return gain


def sinr_matrix(gain_db: np.ndarray, params: ChannelParams) -> np.ndarray:
    """Directed SINR (dB) of link i -> j, row i = transmitter."""
    rx_dbm = params.tx_power + gain_db
    if params.interference_mode == "none":
        return rx_dbm - params.noise_power
    rx_mw = 10 ** (rx_dbm / 10)  # diagonal is 0
    total = rx_mw.sum(axis=0)  # everything heard at receiver j
    interference = total[None, :] - rx_mw  # minus the wanted signal
    noise_mw = 10 ** (params.noise_power / 10)
    with np.errstate(divide="ignore"):
        sinr = 10 * np.log10(rx_mw / (noise_mw + interference))
    np.fill_diagonal(sinr, -np.inf)
    return sinr


def build_neighbor_graph(placements: list[VuePlacement], params: ChannelParams, seed=None) -> NeighborGraph:
    """Admit link i-j when min(SINR i->j, SINR j->i) >= threshold."""
    if len(placements) < 2:
        raise EmptyScenario("need at least two vehicles for a neighbor graph")
    pos = positions_array(placements)
    sinr = sinr_matrix(gain_matrix(pos, params, seed), params)
    admitted = np.minimum(sinr, sinr.T)
    adj = admitted >= params.sinr_threshold
    np.fill_diagonal(adj, False)
    return NeighborGraph(adj, sinr, params.sinr_threshold)
