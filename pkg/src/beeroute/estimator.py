"""scikit-learn style front end for the bee colony router."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .abc import AbcParams, ScoutPolicy, SearchResult, abc_search
from .grading import grade_network, production_nodes
from .topology import Topology
from .traffic import LinkState, TrafficParams, bandwidth_map


class AbcRouter(BaseEstimator):
    """Route (source, destination) queries over one network snapshot.

    ``fit`` takes a topology and its link states, grades every node and
    freezes the available-bandwidth view; ``predict`` runs one colony search
    per query row.

    Parameters
    ----------
    graded : bool
        Restrict bees to productive nodes in the destination quadrant.
    max_cycles, threshold_bandwidth, scout_policy, stall_cycles, heading
        Passed through to :class:`beeroute.abc.AbcParams`.
    production_cutoff : int
        Lowest grade a node may carry and still route traffic.
    grade_weights : tuple of 4 floats or None
        Weights of bandwidth, delay, density and resource in the grade.
    traffic : TrafficParams or None
        Unit conventions for turning link loads into bandwidth.
    random_state : int
        Base seed; each query derives its own stream from it.
    """

    def __init__(
        self,
        graded=True,
        max_cycles=50,
        threshold_bandwidth=20.0,
        scout_policy="adjacent",
        stall_cycles=3,
        heading=True,
        production_cutoff=1,
        grade_weights=None,
        traffic=None,
        random_state=0,
    ):
        self.graded = graded
        self.max_cycles = max_cycles
        self.threshold_bandwidth = threshold_bandwidth
        self.scout_policy = scout_policy
        self.stall_cycles = stall_cycles
        self.heading = heading
        self.production_cutoff = production_cutoff
        self.grade_weights = grade_weights
        self.traffic = traffic
        self.random_state = random_state

    def _abc_params(self, seed: int) -> AbcParams:
        return AbcParams(
            max_cycles=self.max_cycles,
            threshold_bandwidth=self.threshold_bandwidth,
            graded_mode=self.graded,
            rng_seed=seed,
            scout_policy=ScoutPolicy(self.scout_policy),
            stall_cycles=self.stall_cycles,
            heading=self.heading,
        ).validate()

    def fit(self, topology: Topology, link_states: dict):
        if not isinstance(topology, Topology):
            raise TypeError(f"expected a Topology, got {type(topology).__name__}")
        missing = {l.key for l in topology.links} - set(link_states)
        if missing:
            raise ValueError(f"link states missing for {len(missing)} links")
        if not all(isinstance(s, LinkState) for s in link_states.values()):
            raise TypeError("link_states values must be LinkState")
        self._abc_params(0)
        params = self.traffic or TrafficParams()
        self.topology_ = topology
        self.bandwidth_ = bandwidth_map(link_states, params)
        self.grades_ = grade_network(
            topology, link_states, self.threshold_bandwidth, params, weights=self.grade_weights
        )
        self.production_ = production_nodes(self.grades_, self.production_cutoff)
        self.n_nodes_ = topology.node_count
        return self

    def search(self, source: int, dest: int) -> SearchResult:
        check_is_fitted(self, "bandwidth_")
        seq = np.random.SeedSequence([int(self.random_state), int(source), int(dest)])
        seed = int(seq.generate_state(1, np.uint64)[0])
        production = self.production_ if self.graded else None
        return abc_search(self.topology_, self.bandwidth_, source, dest, self._abc_params(seed), production)

    def predict(self, X) -> list:
        """Best route (tuple of node ids) per query row, ``None`` when unrouted."""
        check_is_fitted(self, "bandwidth_")
        X = check_array(X, dtype=np.int64, ensure_min_samples=0)
        if X.shape[1] != 2:
            raise ValueError(f"queries must have 2 columns (source, dest), got {X.shape[1]}")
        out = []
        for source, dest in X:
            result = self.search(int(source), int(dest))
            out.append(result.best_path.nodes if result.found else None)
        return out

    def grade_table(self) -> np.ndarray:
        """Level-1 grade of every node, indexed by node id."""
        check_is_fitted(self, "grades_")
        return np.array([self.grades_[n][1].value for n in range(self.n_nodes_)], dtype=int)
