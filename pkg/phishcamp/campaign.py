"""
campaign.py

Stage 2: LongDocs and global component indexing, hierarchical clustering of
components, and assembling the clusters into campaigns.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Dict, Tuple

import numpy as np
from scipy.cluster.hierarchy import fcluster, linkage
from scipy.spatial.distance import squareform
from sklearn.metrics.pairwise import cosine_distances

from phishcamp.exceptions import IncorrectParameters, PartitionViolation, UnknownLabel
from phishcamp.model import Campaign, CampaignComponent
from phishcamp.textsim import DEFAULT_OCR_SIM_THRESHOLD, fit_tfidf, long_doc_text

logger = logging.getLogger(__name__)

DEFAULT_CUT_DISTANCE = 0.5
DEFAULT_LINKAGE = 'average'
LINKAGE_METHODS = ('average', 'complete', 'single')


@dataclass
class ComponentIndex:
    """
    Global indexing of the campaign components of all LaWU graphs.
    """
    #: gid -> LongDoc of the component
    long_docs: Dict[int, str] = field(default_factory=dict)

    #: graph_id -> (component label -> gid)
    gid_for_communities: Dict[int, Dict[int, int]] = field(default_factory=dict)

    #: gid -> (graph_id, component label)
    gid_to_component: Dict[int, Tuple[int, int]] = field(default_factory=dict)

    #: (graph_id, component label) -> component, with gid and long_doc set
    components: Dict[Tuple[int, int], CampaignComponent] = field(default_factory=dict)

    def __len__(self):
        return len(self.gid_to_component)

    def component(self, gid):
        return self.components[self.gid_to_component[gid]]

    def ordered_components(self):
        return [self.component(gid) for gid in range(len(self))]


def component_long_doc(component, records, dictionary, sim_threshold=DEFAULT_OCR_SIM_THRESHOLD,
                       drop_short=True):
    """
    Space-joined LongDoc texts of the component's URLs, in sorted URL order.
    """
    texts = (long_doc_text(records[url], dictionary, sim_threshold, drop_short=drop_short)
             for url in sorted(component.urls))
    return ' '.join(text for text in texts if text)


def build_component_index(lawu_graphs, records, dictionary, sim_threshold=DEFAULT_OCR_SIM_THRESHOLD,
                          drop_short=True):
    """
    Give every component a dense global index and its LongDoc.

    Graphs are visited in graph_id order and components in label order, so
    gid 0 is component 0 of graph 0.
    """
    index = ComponentIndex()
    gid = 0

    for lawu in sorted(lawu_graphs, key=lambda lawu: lawu.graph_id):
        lbl_to_gid = {}
        for component in sorted(lawu.comp(), key=lambda component: component.label):
            long_doc = component_long_doc(component, records, dictionary, sim_threshold,
                                          drop_short=drop_short)
            index.long_docs[gid] = long_doc
            lbl_to_gid[component.label] = gid
            index.gid_to_component[gid] = (lawu.graph_id, component.label)
            index.components[component.key] = replace(component, gid=gid, long_doc=long_doc)
            gid += 1
        index.gid_for_communities[lawu.graph_id] = lbl_to_gid

    logger.info('Indexed %s campaign components (%s with empty LongDocs)',
                len(index), sum(1 for doc in index.long_docs.values() if not doc))
    return index


def fit_long_doc_model(index, drop_short=True):
    """
    TF-IDF model over component LongDocs, documents keyed by gid.
    """
    docs = [(gid, index.long_docs[gid]) for gid in range(len(index))]
    return fit_tfidf(docs or [(0, '')], drop_short=drop_short)


def cluster_distance_matrix(distances, cut_distance=DEFAULT_CUT_DISTANCE, method=DEFAULT_LINKAGE):
    """
    Agglomerative clustering of a square distance matrix; clusters merge while
    their linkage distance is strictly below ``cut_distance``.

    Labels are dense and numbered by first occurrence.
    """
    if method not in LINKAGE_METHODS:
        raise IncorrectParameters('linkage must be one of %s, got %r' % (', '.join(LINKAGE_METHODS), method))

    distances = np.asarray(distances, dtype=float)
    count = distances.shape[0]
    if count == 0:
        return []
    if count == 1 or cut_distance <= 0:
        return list(range(count))

    condensed = squareform(np.clip(distances, 0.0, None), checks=False)
    tree = linkage(condensed, method=method)
    raw = fcluster(tree, t=np.nextafter(cut_distance, -np.inf), criterion='distance')
    return dense_labels(raw)


def dense_labels(raw):
    """
    Renumber labels 0, 1, 2, ... in order of first occurrence.
    """
    mapping = {}
    return [mapping.setdefault(label, len(mapping)) for label in raw]


def cluster_components(index, cut_distance=DEFAULT_CUT_DISTANCE, method=DEFAULT_LINKAGE, model=None,
                       drop_short=True, groups=None):
    """
    Cluster components by the cosine distance of their LongDoc TF-IDF vectors.

    ``comp_lbls[gid]`` is the campaign label of component ``gid``. Components
    whose LongDoc has no usable terms stay on their own. With ``groups``
    (lists of gids covering every component) components only merge inside
    their group.
    """
    count = len(index)
    if count == 0:
        return []

    if groups is None:
        groups = [range(count)]
    if sorted(gid for group in groups for gid in group) != list(range(count)):
        raise PartitionViolation('Clustering groups must cover every gid exactly once.')

    model = model or fit_long_doc_model(index, drop_short=drop_short)
    has_terms = np.zeros(count, dtype=bool)
    distances = np.ones((count, count))
    if model.vectorizer is not None:
        matrix = model.vectorizer.transform([index.long_docs[gid] for gid in range(count)])
        has_terms = np.asarray(matrix.getnnz(axis=1) > 0)
        distances = np.clip(cosine_distances(matrix), 0.0, 1.0)

    raw = list(range(count))
    for group_number, group in enumerate(groups):
        with_text = [gid for gid in sorted(group) if has_terms[gid]]
        if not with_text:
            continue
        labels = cluster_distance_matrix(distances[np.ix_(with_text, with_text)], cut_distance, method)
        for gid, label in zip(with_text, labels):
            raw[gid] = (group_number, label)

    comp_lbls = dense_labels(raw)
    logger.info('Clustered %s components into %s campaigns', count, len(set(comp_lbls)))
    return comp_lbls


def components_for_campaign(gid_to_component, comp_lbls, lbl, components):
    """
    The components labeled ``lbl``, in gid order.
    """
    indexes_lbl = [gid for gid, label in enumerate(comp_lbls) if label == lbl]
    if not indexes_lbl:
        raise UnknownLabel('Campaign label %s does not occur.' % lbl)

    comps_in_campaign = []
    for gid in indexes_lbl:
        graph_id, label = gid_to_component[gid]
        comps_in_campaign.append(components[(graph_id, label)])
    return comps_in_campaign


def assemble_campaigns(index, comp_lbls):
    """
    One campaign per distinct label, in label order.
    """
    campaigns = []
    for lbl in sorted(set(comp_lbls)):
        components = components_for_campaign(index.gid_to_component, comp_lbls, lbl, index.components)
        campaigns.append(Campaign(campaign_id=lbl, components=tuple(components),
                                  contextual_campaign_ids=(lbl, )))
    return campaigns
