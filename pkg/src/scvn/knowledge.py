"""KB library, Zipf preferences, and per-vehicle KB construction."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InfeasiblePreference, InvalidRank

# slack used for every ">= threshold" comparison on preference mass
FEAS_TOL = 1e-12


@dataclass(frozen=True)
class KbLibrary:
    sizes: np.ndarray

    def __post_init__(self):
        sizes = np.asarray(self.sizes, dtype=float)
        if sizes.ndim != 1 or sizes.size < 1:
            raise ValueError("library needs at least one KB")
        if np.any(sizes <= 0):
            raise ValueError("KB sizes must be positive")
        object.__setattr__(self, "sizes", sizes)

    @property
    def n(self) -> int:
        return self.sizes.size

    @classmethod
    def random(cls, n: int, size_min: int = 1, size_max: int = 5, seed=None) -> "KbLibrary":
        rng = np.random.default_rng(seed)
        return cls(rng.integers(size_min, size_max + 1, size=n).astype(float))


def zipf_popularity(rank, skew: float, n: int):
    """Probability of the KB at ``rank`` (1-based) under a Zipf law with exponent ``skew``."""
    if skew < 0:
        raise ValueError("skew must be >= 0")
    r = np.asarray(rank)
    if np.any(r < 1) or np.any(r > n) or np.any(r != np.floor(r)):
        raise InvalidRank(f"rank must be an integer in [1, {n}], got {rank}")
    norm = np.sum(np.arange(1, n + 1, dtype=float) ** -skew)
    p = r.astype(float) ** -skew / norm
    return float(p) if p.ndim == 0 else p


@dataclass(frozen=True)
class PreferenceProfile:
    ranks: np.ndarray  # ranks[n] = popularity rank of KB n, a permutation of 1..N
    skew: float

    def __post_init__(self):
        ranks = np.asarray(self.ranks, dtype=int)
        if sorted(ranks.tolist()) != list(range(1, ranks.size + 1)):
            raise ValueError("ranks must be a permutation of 1..N")
        if self.skew < 0:
            raise ValueError("skew must be >= 0")
        object.__setattr__(self, "ranks", ranks)
        object.__setattr__(self, "_p", zipf_popularity(ranks, self.skew, ranks.size))

    @property
    def popularity(self) -> np.ndarray:
        return self._p

    @classmethod
    def random(cls, n: int, skew: float, seed=None) -> "PreferenceProfile":
        rng = np.random.default_rng(seed)
        return cls(rng.permutation(n) + 1, skew)


@dataclass(frozen=True)
class VueProfile:
    vue_id: int
    capacity: float
    arrival_rate: float  # total packets/s
    interp_rate: np.ndarray  # per-KB service rate mu, packets/s
    preference: PreferenceProfile

    def __post_init__(self):
        mu = np.asarray(self.interp_rate, dtype=float)
        if self.capacity <= 0 or self.arrival_rate <= 0:
            raise ValueError("capacity and arrival_rate must be positive")
        if mu.shape != self.preference.ranks.shape or np.any(mu <= 0):
            raise ValueError("interp_rate must be positive, one per KB")
        object.__setattr__(self, "interp_rate", mu)

    @property
    def popularity(self) -> np.ndarray:
        return self.preference.popularity

    @property
    def kb_rates(self) -> np.ndarray:
        """Per-KB packet arrival rates lambda * p."""
        return self.arrival_rate * self.popularity


def arrival_rate_per_kb(profile: VueProfile, n: int) -> float:
    return float(profile.arrival_rate * profile.popularity[n])


def preference_satisfaction(alpha, profile: VueProfile) -> float:
    return float(np.dot(np.asarray(alpha, dtype=float), profile.popularity))


def capacity_used(alpha, library: KbLibrary) -> float:
    return float(np.dot(np.asarray(alpha, dtype=float), library.sizes))


def feasible_storage(alpha, library: KbLibrary, capacity: float) -> bool:
    return capacity_used(alpha, library) <= capacity


def preference_order(popularity: np.ndarray) -> np.ndarray:
    """KB indices by descending popularity, lower index first on ties."""
    return np.lexsort((np.arange(popularity.size), -popularity))


def preference_first_kbc(profile: VueProfile, library: KbLibrary, eta0: float, seed=None) -> np.ndarray:
    """Construct the most preferred KBs until eta0 is met, then fill randomly.

    KBs that do not fit are skipped in both phases. Raises
    InfeasiblePreference when eta0 cannot be reached within capacity.
    """
    p = profile.popularity
    alpha = np.zeros(library.n, dtype=np.int8)
    used = 0.0
    eta = 0.0
    for n in preference_order(p):
        if eta >= eta0 - FEAS_TOL:
            break
        if used + library.sizes[n] <= profile.capacity:
            alpha[n] = 1
            used += library.sizes[n]
            eta += p[n]
    if eta < eta0 - FEAS_TOL:
        raise InfeasiblePreference(
            f"vehicle {profile.vue_id}: eta0={eta0} unreachable within capacity {profile.capacity}"
        )
    rng = np.random.default_rng(seed)
    for n in rng.permutation(library.n):
        if not alpha[n] and used + library.sizes[n] <= profile.capacity:
            alpha[n] = 1
            used += library.sizes[n]
    return alpha
