"""
community.py

Weighted community detection over weighted URL graphs. Each community
becomes a campaign component; a graph whose nodes carry their component
labels is a labeled weighted URL (LaWU) graph.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import networkx as nx
import numpy as np

from phishcamp.exceptions import PartitionViolation
from phishcamp.model import CampaignComponent, WeightedUrlGraph

logger = logging.getLogger(__name__)

DEFAULT_RESOLUTION = 1.0
DEFAULT_ZERO_WEIGHT_EPS = 0.01
DEFAULT_EXACT_MAX_NODES = 8

# partitions must beat the incumbent by more than this to replace it
_MODULARITY_TIE = 1e-12


@dataclass(frozen=True)
class LabeledUrlGraph:
    """
    A weighted URL graph with a component label on every node.
    """
    graph: WeightedUrlGraph
    components: Tuple[CampaignComponent, ...]
    labels: Dict[str, int]

    @property
    def graph_id(self):
        return self.graph.graph_id

    def comp(self):
        """
        The campaign components of this graph, in label order.
        """
        return list(self.components)


def to_weighted_nx(graph: WeightedUrlGraph, zero_weight_eps: float = DEFAULT_ZERO_WEIGHT_EPS):
    """
    networkx graph for community detection. Zero-weight edges keep a small
    weight so they still connect their endpoints.
    """
    nx_graph = nx.Graph()
    nx_graph.add_nodes_from(sorted(graph.nodes))
    for edge in graph.sorted_edges():
        weight = graph.weights[edge]
        nx_graph.add_edge(*edge, weight=float(weight) if weight > 0 else zero_weight_eps)
    return nx_graph


def modularity(nx_graph: nx.Graph, partition: Sequence, resolution: float = DEFAULT_RESOLUTION):
    """
    Weighted modularity of a partition (an iterable of node sets).
    """
    if nx_graph.number_of_edges() == 0:
        return 0.0
    return nx.community.modularity(nx_graph, partition, weight='weight', resolution=resolution)


def set_partitions(count):
    """
    Every partition of ``range(count)`` as a restricted growth string, the
    one-block partition first.
    """
    if count == 0:
        yield []
        return

    labels = [0] * count

    def extend(position, highest):
        if position == count:
            yield list(labels)
            return
        for label in range(highest + 2):
            labels[position] = label
            yield from extend(position + 1, max(highest, label))

    yield from extend(1, 0)


def exact_partition(nx_graph: nx.Graph, resolution: float = DEFAULT_RESOLUTION):
    """
    The modularity-optimal partition, found by enumerating every set
    partition. Only usable on small graphs.
    """
    nodes = list(nx_graph.nodes)
    if nx_graph.number_of_edges() == 0:
        return [set(nodes)]

    adjacency = nx.to_numpy_array(nx_graph, nodelist=nodes, weight='weight')
    degrees = adjacency.sum(axis=1)
    two_m = degrees.sum()

    best_labels, best_score = None, -np.inf
    for labels in set_partitions(len(nodes)):
        membership = np.zeros((len(nodes), max(labels) + 1))
        membership[np.arange(len(nodes)), labels] = 1.0
        internal = np.einsum('ic,ij,jc->c', membership, adjacency, membership)
        degree_sums = membership.T @ degrees
        score = float(np.sum(internal / two_m - resolution * (degree_sums / two_m) ** 2))
        if score > best_score + _MODULARITY_TIE:
            best_labels, best_score = labels, score

    parts: Dict[int, set] = {}
    for node, label in zip(nodes, best_labels):
        parts.setdefault(label, set()).add(node)
    return list(parts.values())


def louvain_partition(nx_graph: nx.Graph, seed: int = 0, resolution: float = DEFAULT_RESOLUTION):
    """
    Seeded Louvain; falls back to the whole graph when that scores at least as
    well.
    """
    whole = [set(nx_graph.nodes)]
    if nx_graph.number_of_edges() == 0:
        return whole

    parts = nx.community.louvain_communities(nx_graph, weight='weight',
                                             resolution=resolution, seed=seed)
    if modularity(nx_graph, parts, resolution) > modularity(nx_graph, whole, resolution) + _MODULARITY_TIE:
        return [set(part) for part in parts]
    return whole


def detect_components(graph: WeightedUrlGraph, seed: int = 0,
                      resolution: float = DEFAULT_RESOLUTION,
                      zero_weight_eps: float = DEFAULT_ZERO_WEIGHT_EPS,
                      exact_max_nodes: int = DEFAULT_EXACT_MAX_NODES) -> List[CampaignComponent]:
    """
    Split a weighted URL graph into campaign components by maximizing
    weighted modularity.

    Graphs with at most ``exact_max_nodes`` nodes are solved exactly, larger
    ones with seeded Louvain. Labels run 0..k-1 by descending component size,
    ties by the smallest URL. An indivisible graph yields one component.
    """
    nx_graph = to_weighted_nx(graph, zero_weight_eps)

    if len(graph.nodes) <= 1:
        parts = [set(graph.nodes)]
    elif len(graph.nodes) <= exact_max_nodes:
        parts = exact_partition(nx_graph, resolution)
    else:
        parts = louvain_partition(nx_graph, seed, resolution)

    parts = sorted((frozenset(part) for part in parts if part),
                   key=lambda part: (-len(part), min(part)))

    logger.debug('Graph %s (%s nodes) split into %s components',
                 graph.graph_id, len(graph.nodes), len(parts))

    return [CampaignComponent(graph_id=graph.graph_id, label=label, urls=part)
            for label, part in enumerate(parts)]


def label_graph(graph: WeightedUrlGraph, components: Sequence[CampaignComponent]) -> LabeledUrlGraph:
    """
    Attach component labels to the nodes of ``graph``.

    Raises ``PartitionViolation`` when the components overlap, leave nodes
    out, or name nodes outside the graph.
    """
    labels = {}
    for component in components:
        if component.graph_id != graph.graph_id:
            raise PartitionViolation('Component (%s, %s) does not belong to graph %s.'
                                     % (component.graph_id, component.label, graph.graph_id))
        for url in component.urls:
            if url in labels:
                raise PartitionViolation('%s is in components %s and %s of graph %s.'
                                         % (url, labels[url], component.label, graph.graph_id))
            labels[url] = component.label

    missing = graph.nodes - set(labels)
    extra = set(labels) - graph.nodes
    if missing or extra:
        raise PartitionViolation('Components of graph %s miss %s and add %s.'
                                 % (graph.graph_id, sorted(missing), sorted(extra)))

    ordered = tuple(sorted(components, key=lambda component: component.label))
    return LabeledUrlGraph(graph=graph, components=ordered, labels=labels)


def detect_all(graphs, seed=0, resolution=DEFAULT_RESOLUTION,
               zero_weight_eps=DEFAULT_ZERO_WEIGHT_EPS,
               exact_max_nodes=DEFAULT_EXACT_MAX_NODES) -> List[LabeledUrlGraph]:
    """
    Community detection over every graph, returning LaWU graphs in graph_id
    order.
    """
    labeled = []
    for graph in sorted(graphs, key=lambda graph: graph.graph_id):
        components = detect_components(graph, seed, resolution, zero_weight_eps, exact_max_nodes)
        labeled.append(label_graph(graph, components))

    logger.info('Detected %s campaign components in %s graphs',
                sum(len(graph.components) for graph in labeled), len(labeled))
    return labeled
