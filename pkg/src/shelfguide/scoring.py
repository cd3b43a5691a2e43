"""Spatial scoring over the instance map: cluster matched instances and
pick the grasp target nearest the hand, preferring the top of a stack."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.cluster.hierarchy import fcluster, linkage
from scipy.spatial.distance import pdist

from .errors import EmptyInput

LINK_THRESHOLD = 0.12  # meters, roughly one product width
TOP_LEVEL_TOLERANCE = 0.05  # meters below the cluster's highest top edge


@dataclass(frozen=True)
class ScoredTarget:
    instance_id: int
    cluster_id: int
    cluster_distance: float  # hand to cluster centroid, meters
    top_level: bool
    similarity: float


def cluster(instances, link_threshold: float = LINK_THRESHOLD) -> dict[int, int]:
    """Single-linkage clustering of instance positions. Returns a map from
    instance id to cluster label, where each label is the lowest instance
    id in its cluster."""
    instances = list(instances)
    if not instances:
        raise EmptyInput("no instances to cluster")
    ids = [inst.id for inst in instances]
    if len(instances) == 1:
        return {ids[0]: ids[0]}
    pos = np.array([inst.state[:3] for inst in instances])
    raw = fcluster(linkage(pdist(pos), method="single"),
                   t=link_threshold, criterion="distance")
    label_of_raw: dict[int, int] = {}
    for raw_label in set(raw):
        members = [ids[i] for i in range(len(ids)) if raw[i] == raw_label]
        label_of_raw[raw_label] = min(members)
    return {ids[i]: label_of_raw[raw[i]] for i in range(len(ids))}


def select_best(instances, hand_pose, link_threshold: float = LINK_THRESHOLD,
                top_tolerance: float = TOP_LEVEL_TOLERANCE,
                weighted: bool = False,
                weights: tuple[float, float, float] = (1.0, 0.5, 0.5)) -> ScoredTarget:
    """Pick the grasp target. Default is lexicographic: nearest cluster to
    the hand, then top-level instances within that cluster, then highest
    rolling similarity, then lowest id. The weighted mode instead minimizes
    w_d * distance - w_t * top_level - w_s * similarity over all instances
    of the nearest cluster."""
    instances = list(instances)
    if not instances:
        raise EmptyInput("no instances to score")
    hand = np.asarray(hand_pose, float)
    labels = cluster(instances, link_threshold)
    by_id = {inst.id: inst for inst in instances}

    centroids: dict[int, np.ndarray] = {}
    for label in set(labels.values()):
        members = [by_id[i].state[:3] for i in labels if labels[i] == label]
        centroids[label] = np.mean(members, axis=0)
    # nearest centroid; equidistant clusters fall back to the lowest label
    best_label = min(centroids,
                     key=lambda lab: (float(np.linalg.norm(centroids[lab] - hand)), lab))
    distance = float(np.linalg.norm(centroids[best_label] - hand))

    members = [by_id[i] for i in labels if labels[i] == best_label]
    tops = {inst.id: inst.state[1] + inst.state[4] / 2.0 for inst in members}
    top_edge = max(tops.values())
    is_top = {iid: tops[iid] >= top_edge - top_tolerance for iid in tops}

    if weighted:
        w_d, w_t, w_s = weights
        chosen = min(members, key=lambda inst: (
            w_d * float(np.linalg.norm(inst.state[:3] - hand))
            - w_t * float(is_top[inst.id])
            - w_s * inst.rolling_similarity,
            inst.id))
    else:
        chosen = min(members, key=lambda inst: (
            not is_top[inst.id], -inst.rolling_similarity, inst.id))
    return ScoredTarget(instance_id=chosen.id, cluster_id=best_label,
                        cluster_distance=distance,
                        top_level=bool(is_top[chosen.id]),
                        similarity=chosen.rolling_similarity)
