"""
structural.py

The structural layer: pages grouped by the proportional distance of their
HTML tag-count vectors, and the composition of the structural groups with
the contextual campaigns.
"""

import logging

import networkx as nx
import numpy as np
from networkx.utils import UnionFind
from sklearn.feature_extraction import DictVectorizer
from sklearn.metrics import pairwise_distances

from phishcamp.exceptions import CoverageMismatch, IncorrectParameters
from phishcamp.model import Campaign

logger = logging.getLogger(__name__)

DEFAULT_STRUCTURAL_THRESHOLD = 0.2


def proportional_distance(tags_a, tags_b):
    """
    Summed absolute tag-count differences over the total tag count of both
    pages. Two empty pages are at distance 0.
    """
    total = sum(tags_a.values()) + sum(tags_b.values())
    if total == 0:
        return 0.0
    differences = sum(abs(tags_a.get(tag, 0) - tags_b.get(tag, 0)) for tag in set(tags_a) | set(tags_b))
    return differences / total


def proportional_distance_matrix(tag_counts):
    """
    Pairwise proportional distances of a list of tag-count maps.
    """
    if not tag_counts:
        return np.zeros((0, 0))

    vectors = DictVectorizer(sparse=True, sort=True).fit_transform([dict(tags) for tags in tag_counts])
    differences = pairwise_distances(vectors, metric='manhattan')
    totals = np.asarray(vectors.sum(axis=1)).ravel()
    denominators = totals[:, None] + totals[None, :]

    with np.errstate(divide='ignore', invalid='ignore'):
        distances = np.where(denominators > 0, differences / denominators, 0.0)
    return np.clip(distances, 0.0, 1.0)


def _group_order(group):
    return (-len(group), min(group))


def structural_clusters(records, threshold=DEFAULT_STRUCTURAL_THRESHOLD):
    """
    Link two pages when their proportional distance is below ``threshold``
    and return the connected components, largest first (ties by smallest URL).

    Pages without tag counts are never linked.
    """
    if not 0 < threshold < 1:
        raise IncorrectParameters('structural threshold must be in (0, 1), got %s' % threshold)

    records = sorted(records, key=lambda record: record.url)
    similarity = nx.Graph()
    similarity.add_nodes_from(record.url for record in records)

    tagged = [record for record in records if sum(record.tag_counts.values()) > 0]
    distances = proportional_distance_matrix([record.tag_counts for record in tagged])
    rows, columns = np.nonzero(distances < threshold)
    similarity.add_edges_from((tagged[row].url, tagged[column].url)
                              for row, column in zip(rows, columns) if row < column)

    clusters = sorted((frozenset(part) for part in nx.connected_components(similarity)), key=_group_order)
    logger.info('Structural layer: %s URLs in %s clusters (%s untagged)',
                len(records), len(clusters), len(records) - len(tagged))
    return clusters


def structural_campaigns(clusters):
    """
    Structural clusters as campaigns without components.
    """
    return [Campaign(campaign_id=cluster_id, urls=cluster, structural_cluster_ids=(cluster_id, ))
            for cluster_id, cluster in enumerate(clusters)]


def compose_layers(clusters, contextual):
    """
    Merge structural clusters that share a contextual campaign.

    The result carries lineage: every final campaign lists the structural
    clusters and the contextual campaigns it was built from, plus the
    components of those contextual campaigns.
    """
    structural_urls = set().union(*clusters) if clusters else set()
    contextual_urls = set().union(*(campaign.urls for campaign in contextual)) if contextual else set()
    if structural_urls != contextual_urls:
        raise CoverageMismatch('Layers cover different URLs: %s only structural, %s only contextual.'
                               % (sorted(structural_urls - contextual_urls)[:5],
                                  sorted(contextual_urls - structural_urls)[:5]))

    cluster_of = {}
    for cluster_id, cluster in enumerate(clusters):
        for url in cluster:
            cluster_of[url] = cluster_id

    union_find = UnionFind(range(len(clusters)))
    for campaign in contextual:
        union_find.union(*sorted({cluster_of[url] for url in campaign.urls}))

    groups = {}
    for cluster_id in range(len(clusters)):
        groups.setdefault(union_find[cluster_id], []).append(cluster_id)

    contextual_of = {}
    for campaign in contextual:
        root = union_find[cluster_of[min(campaign.urls)]]
        contextual_of.setdefault(root, []).append(campaign)

    merged = []
    for root, cluster_ids in groups.items():
        urls = frozenset().union(*(clusters[cluster_id] for cluster_id in cluster_ids))
        members = sorted(contextual_of.get(root, []), key=lambda campaign: campaign.campaign_id)
        components = tuple(component for campaign in members for component in campaign.components)
        merged.append((urls, tuple(sorted(cluster_ids)),
                       tuple(campaign.campaign_id for campaign in members), components))

    merged.sort(key=lambda item: _group_order(item[0]))
    campaigns = [Campaign(campaign_id=campaign_id, urls=urls, components=components,
                          structural_cluster_ids=structural_ids,
                          contextual_campaign_ids=contextual_ids)
                 for campaign_id, (urls, structural_ids, contextual_ids, components) in enumerate(merged)]

    logger.info('Composed %s structural clusters and %s contextual campaigns into %s campaigns',
                len(clusters), len(contextual), len(campaigns))
    return campaigns
