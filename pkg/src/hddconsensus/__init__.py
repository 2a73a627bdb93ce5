"""History-data-driven trust-weighted consensus.

Cooperative agents keep a rolling window of their neighbors' states, score
each neighbor by how often (and how recently) it stayed inside a shrinking
confidence ball, and average with weights proportional to those scores.
"""

__version__ = "0.1.0"

from .graph import Graph, NeighborView, build_paper_topology, is_connected, neighbor_view
from .history import HistoryBank, HistoryWindow, PrefillStrategy, prefill
from .trust import (ConfidenceSchedule, DiscountSchedule, MembershipRecord, TrustEstimate,
                    augmented_trust, discounted_importance, estimate_covariance, estimate_mean,
                    estimate_trust, frequency_counter, membership, variability_matrix)
from .protocol import (WeightMatrix, assemble_weight_matrix, baseline_step, hdd_step,
                       hdd_weights)
from .agents import BehaviorModel, adversary_step, cooperative_step
from .sim import (ClusterReport, SimConfig, TrajectoryLog, detect_clusters, run, sweep,
                  trust_based_consensus_check)
