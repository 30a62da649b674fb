"""
metrics.py

Campaign quality metrics: per-signal strength and the coherence of campaign
pairs, plus their CSV and SVG outputs.
"""

import itertools
import logging
from dataclasses import dataclass, field, replace
from typing import Dict, List, Tuple

import numpy as np
import pandas as pd
from sklearn.metrics.pairwise import cosine_similarity as sk_cosine_similarity

from phishcamp.exceptions import CoverageMismatch, TooFewCampaigns
from phishcamp.model import Campaign, SignalId, sorted_signals

logger = logging.getLogger(__name__)

DEFAULT_COHERENCE_EPS = 1e-3
DEFAULT_COHMAP_THRESHOLD = 500.0

FLOAT_FORMAT = '%.6f'


def graph_signal_strength(graph, signal):
    """
    Share of the graph's edges ``signal`` contributed to; 0 for graphs
    without edges.
    """
    if not graph.edges:
        return 0.0
    included = sum(1 for edge in graph.edges if signal in graph.contributions[edge])
    return included / len(graph.edges)


def theta_cache(graphs, signals):
    return {(graph.graph_id, signal): graph_signal_strength(graph, signal)
            for graph in graphs for signal in signals}


def campaign_signal_strength(campaign, signal, thetas):
    """
    Mean of the source graph's strength over the campaign's components; a
    graph feeding several components counts once per component.
    """
    if not campaign.components:
        return 0.0
    total = 0.0
    for component in campaign.components:
        try:
            total += thetas[(component.graph_id, signal)]
        except KeyError:
            raise CoverageMismatch('No signal strength for graph %s and signal %s.'
                                   % (component.graph_id, signal))
    return total / len(campaign.components)


@dataclass
class SignalStrengthTable:
    """
    Signal strengths per campaign, their average over the active signals, and
    the per-graph strengths they were computed from.
    """
    signals: List[SignalId]
    rows: Dict[int, Dict[SignalId, float]] = field(default_factory=dict)
    averages: Dict[int, float] = field(default_factory=dict)
    thetas: Dict[Tuple[int, SignalId], float] = field(default_factory=dict)

    def to_frame(self):
        records = [{'campaign_id': campaign_id, 'signal': str(signal),
                    'sigs': self.rows[campaign_id][signal], 'avg': self.averages[campaign_id]}
                   for campaign_id in sorted(self.rows) for signal in self.signals]
        return pd.DataFrame.from_records(records, columns=['campaign_id', 'signal', 'sigs', 'avg'])


def signal_strength_table(campaigns, graphs, signals):
    signals = sorted_signals(signals)
    table = SignalStrengthTable(signals=signals, thetas=theta_cache(graphs, signals))

    for campaign in campaigns:
        row = {signal: campaign_signal_strength(campaign, signal, table.thetas) for signal in signals}
        table.rows[campaign.campaign_id] = row
        table.averages[campaign.campaign_id] = float(np.mean(list(row.values()))) if row else 0.0

    logger.info('Signal strengths for %s campaigns over %s signals', len(campaigns), len(signals))
    return table


def with_signal_strengths(campaigns, table):
    return [replace(campaign, sigs=table.rows[campaign.campaign_id],
                    avg_sigs=table.averages[campaign.campaign_id])
            for campaign in campaigns]


def _transform(model, texts):
    if model.vectorizer is None:
        return None
    return model.vectorizer.transform(list(texts))


def _component_docs(campaign):
    return [component.long_doc for component in
            sorted(campaign.components, key=lambda component: (component.gid is None, component.gid or 0))]


def intra_campaign_sim(campaign, model):
    """
    Mean pairwise cosine similarity of the campaign's component LongDocs. A
    single-component campaign scores 1.0.
    """
    docs = _component_docs(campaign)
    if len(docs) <= 1:
        return 1.0

    matrix = _transform(model, docs)
    if matrix is None:
        return 0.0
    similarities = np.clip(sk_cosine_similarity(matrix), 0.0, 1.0)
    upper = similarities[np.triu_indices(len(docs), k=1)]
    return float(upper.mean())


def campaign_text(campaign):
    return ' '.join(doc for doc in _component_docs(campaign) if doc)


def inter_campaign_sim(campaign_i, campaign_j, model):
    """
    Cosine similarity of the two campaigns' merged LongDocs.
    """
    matrix = _transform(model, [campaign_text(campaign_i), campaign_text(campaign_j)])
    if matrix is None or matrix[0].nnz == 0 or matrix[1].nnz == 0:
        return 0.0
    return float(np.clip(sk_cosine_similarity(matrix[0], matrix[1])[0, 0], 0.0, 1.0))


def coherence(intra_i, intra_j, inter, eps=DEFAULT_COHERENCE_EPS):
    return ((intra_i + intra_j) / 2.0) / max(inter, eps)


def coherence_score(campaign_i, campaign_j, model, eps=DEFAULT_COHERENCE_EPS):
    """
    How much better two campaigns hold together internally than they
    resemble each other.
    """
    return coherence(intra_campaign_sim(campaign_i, model), intra_campaign_sim(campaign_j, model),
                     inter_campaign_sim(campaign_i, campaign_j, model), eps)


def is_poorly_distinguishable(score):
    return score < 1.0


@dataclass
class CoherenceMap:
    """
    Symmetric matrix of coherence scores; the diagonal is NaN.
    """
    campaign_ids: List[int]
    scores: np.ndarray
    threshold: float = DEFAULT_COHMAP_THRESHOLD

    def score(self, campaign_i, campaign_j):
        index = {campaign_id: position for position, campaign_id in enumerate(self.campaign_ids)}
        return float(self.scores[index[campaign_i], index[campaign_j]])

    def pair_scores(self):
        """
        ``((campaign_i, campaign_j), score)`` for every unordered pair.
        """
        return [((self.campaign_ids[i], self.campaign_ids[j]), float(self.scores[i, j]))
                for i, j in itertools.combinations(range(len(self.campaign_ids)), 2)]

    @property
    def fraction_above(self):
        pairs = self.pair_scores()
        if not pairs:
            return 0.0
        return sum(1 for _, score in pairs if score > self.threshold) / len(pairs)

    def poor_pairs(self):
        return [pair for pair, score in self.pair_scores() if is_poorly_distinguishable(score)]

    def summary(self):
        return {
            'pairs': len(self.pair_scores()),
            'threshold': self.threshold,
            'fraction_above_threshold': self.fraction_above,
            'poorly_distinguishable_pairs': [list(pair) for pair in self.poor_pairs()],
        }

    def to_frame(self):
        return pd.DataFrame(self.scores, index=self.campaign_ids, columns=self.campaign_ids)


def coherence_map(campaigns, model, eps=DEFAULT_COHERENCE_EPS, threshold=DEFAULT_COHMAP_THRESHOLD):
    """
    Coherence scores for every pair of campaigns.
    """
    if len(campaigns) < 2:
        raise TooFewCampaigns('A coherence map needs at least 2 campaigns, got %s.' % len(campaigns))

    campaigns = list(campaigns)
    intra = [intra_campaign_sim(campaign, model) for campaign in campaigns]

    count = len(campaigns)
    inter = np.zeros((count, count))
    matrix = _transform(model, [campaign_text(campaign) for campaign in campaigns])
    if matrix is not None:
        inter = np.clip(sk_cosine_similarity(matrix), 0.0, 1.0)

    scores = np.full((count, count), np.nan)
    for i, j in itertools.combinations(range(count), 2):
        scores[i, j] = scores[j, i] = coherence(intra[i], intra[j], inter[i, j], eps)

    cohmap = CoherenceMap(campaign_ids=[campaign.campaign_id for campaign in campaigns],
                          scores=scores, threshold=threshold)
    logger.info('Coherence map over %s campaigns: %.1f%% of pairs above %s, %s poorly distinguishable',
                count, 100 * cohmap.fraction_above, threshold, len(cohmap.poor_pairs()))
    return cohmap


def write_sigs_csv(table, path):
    table.to_frame().to_csv(path, index=False, float_format=FLOAT_FORMAT, encoding='utf-8')


def write_cohmap_csv(cohmap, path):
    cohmap.to_frame().to_csv(path, index=True, index_label='campaign_id', na_rep='',
                             float_format=FLOAT_FORMAT, encoding='utf-8')


def write_cohmap_svg(cohmap, path):
    """
    Static heatmap of the coherence map, log-scaled.
    """
    import matplotlib
    matplotlib.use('Agg')
    import matplotlib.pyplot as plt

    matplotlib.rcParams['svg.hashsalt'] = 'phishcamp'

    values = np.log10(np.where(np.isnan(cohmap.scores), np.nan, np.maximum(cohmap.scores, 1e-6)))
    size = max(4.0, 0.4 * len(cohmap.campaign_ids))
    figure, axes = plt.subplots(figsize=(size + 1.5, size))
    image = axes.imshow(values, cmap='viridis', interpolation='nearest')
    figure.colorbar(image, ax=axes, label='log10 coherence')

    ticks = range(len(cohmap.campaign_ids))
    axes.set_xticks(list(ticks))
    axes.set_yticks(list(ticks))
    axes.set_xticklabels(cohmap.campaign_ids, rotation=90, fontsize=6)
    axes.set_yticklabels(cohmap.campaign_ids, fontsize=6)
    axes.set_xlabel('campaign')
    axes.set_ylabel('campaign')

    figure.tight_layout()
    figure.savefig(path, format='svg', metadata={'Date': None})
    plt.close(figure)
