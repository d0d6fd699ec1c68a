"""A solvable problem instance: vehicles, their KB profiles, and the link graph."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import RunConfig
from .knowledge import KbLibrary, PreferenceProfile, VueProfile
from .scenario import (
    ChannelParams,
    LaneGeometry,
    NeighborGraph,
    VuePlacement,
    build_neighbor_graph,
    place_vues,
    positions_array,
)


@dataclass
class Instance:
    library: KbLibrary
    profiles: list[VueProfile]
    graph: NeighborGraph
    placements: list[VuePlacement] | None = None
    _arrays: dict = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self):
        if len(self.profiles) != self.graph.n_vues:
            raise ValueError("profile count does not match graph size")
        self.popularity = np.array([p.popularity for p in self.profiles], dtype=float).reshape(-1, self.library.n)
        self.arrival = np.array([p.arrival_rate for p in self.profiles], dtype=float)
        self.interp = np.array([p.interp_rate for p in self.profiles], dtype=float).reshape(-1, self.library.n)
        self.capacity = np.array([p.capacity for p in self.profiles], dtype=float)

    @property
    def n_vues(self) -> int:
        return len(self.profiles)

    @property
    def n_kbs(self) -> int:
        return self.library.n

    @property
    def positions(self) -> np.ndarray | None:
        return None if self.placements is None else positions_array(self.placements)

    def subset(self, keep) -> "Instance":
        """Keep the listed vehicles, renumbered 0..len(keep)-1 in the given order."""
        keep = [int(k) for k in keep]
        profiles = [
            VueProfile(new, p.capacity, p.arrival_rate, p.interp_rate, p.preference)
            for new, p in enumerate(self.profiles[k] for k in keep)
        ]
        placements = None
        if self.placements is not None:
            placements = [
                VuePlacement(new, pl.position, pl.lane, pl.direction)
                for new, pl in enumerate(self.placements[k] for k in keep)
            ]
        return Instance(self.library, profiles, self.graph.subgraph(keep), placements)


def channel_from_config(cfg: RunConfig) -> ChannelParams:
    sc = cfg.scenario
    return ChannelParams(
        tx_power=sc.tx_dbm,
        noise_power=sc.noise_dbm,
        path_loss_intercept=sc.pl_intercept_db,
        path_loss_slope=sc.pl_slope_db,
        shadowing_std=sc.shadow_std_db,
        fading=sc.fading,
        sinr_threshold=sc.gamma0_db,
        interference_mode=sc.interference_mode,
    )


def geometry_from_config(cfg: RunConfig) -> LaneGeometry:
    sc = cfg.scenario
    return LaneGeometry(sc.lanes, sc.lane_width_m, sc.cell_radius_m)


def generate_instance(cfg: RunConfig, seed: int | None = None) -> Instance:
    """Draw one trial: drop, channel, library, preferences and interpretation rates.

    Independent streams are spawned from ``seed`` (default ``cfg.seed``) so that
    changing e.g. the KB count leaves the vehicle drop untouched.
    """
    seed = cfg.seed if seed is None else seed
    ss_place, ss_chan, ss_lib, ss_pref, ss_mu = np.random.SeedSequence(seed).spawn(5)
    sc, kc = cfg.scenario, cfg.knowledge
    placements = place_vues(geometry_from_config(cfg), sc.headway_s, sc.velocity_kmh, ss_place, n_vues=sc.n_vues)
    graph = build_neighbor_graph(placements, channel_from_config(cfg), ss_chan)
    library = KbLibrary.random(kc.n_kbs, kc.size_min, kc.size_max, ss_lib)

    rng_pref = np.random.default_rng(ss_pref)
    rng_mu = np.random.default_rng(ss_mu)
    n, v = kc.n_kbs, len(placements)
    if kc.shared_interp:
        interp_time = np.tile(rng_mu.uniform(kc.interp_min_s, kc.interp_max_s, n), (v, 1))
    else:
        interp_time = rng_mu.uniform(kc.interp_min_s, kc.interp_max_s, (v, n))
    profiles = [
        VueProfile(
            i,
            kc.capacity,
            kc.lambda_pps,
            1.0 / interp_time[i],
            PreferenceProfile(rng_pref.permutation(n) + 1, kc.zipf_skew),
        )
        for i in range(v)
    ]
    return Instance(library, profiles, graph, placements)
