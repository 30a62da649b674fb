"""
weighting.py

Turns URL graphs into weighted URL graphs: every active signal is evaluated
on every edge and adds 0, 1 or (IP count only) 2 to its weight.
"""
from __future__ import annotations

import datetime
import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Mapping, Tuple

from phishcamp.exceptions import IncorrectParameters
from phishcamp.graph import shared_ip_count
from phishcamp.ingest import ErrorPageDictionary
from phishcamp.model import (ALL_SIGNALS, VALUE_SIGNALS, EnrichedUrlRecord, SignalId,
                             TfidfModel, WeightedUrlGraph, parse_signals)
from phishcamp.textsim import (DEFAULT_OCR_SIM_THRESHOLD, TfidfVector, clean_html_text,
                               cosine_similarity, fit_tfidf, merged_ocr_text, vectorize_many)

logger = logging.getLogger(__name__)

DEFAULT_DELTA = 0.6
DEFAULT_DELTA_IP = 3
DEFAULT_DELTA_TIME = datetime.timedelta(hours=72)

# absorbs rounding so identical texts reach delta = 1.0
SIMILARITY_TOLERANCE = 1e-12


@dataclass(frozen=True)
class WeightingConfig:
    """
    Thresholds and the active signal set used to weigh edges.
    """
    #: Textual similarity threshold; a textual signal contributes when the
    #: cosine similarity reaches it.
    delta: float = DEFAULT_DELTA

    #: Shared-IP count above which the IP signal adds 2 instead of 1.
    delta_ip: int = DEFAULT_DELTA_IP

    #: Submission times closer than this contribute.
    delta_time: datetime.timedelta = DEFAULT_DELTA_TIME

    #: The signal set S.
    active_signals: FrozenSet[SignalId] = ALL_SIGNALS

    def __post_init__(self):
        if not 0 < self.delta <= 1:
            raise IncorrectParameters('delta must be in (0, 1], got %s' % self.delta)
        if int(self.delta_ip) != self.delta_ip or self.delta_ip < 1:
            raise IncorrectParameters('delta_ip must be a positive integer, got %s' % self.delta_ip)
        if self.delta_time <= datetime.timedelta(0):
            raise IncorrectParameters('delta_time must be positive, got %s' % self.delta_time)
        object.__setattr__(self, 'active_signals', parse_signals(self.active_signals))


@dataclass
class SignalTexts:
    """
    The TF-IDF models of one run and the vector of every URL for each
    textual signal.

    URL tokens get their own model; HTML and merged OCR texts share one model
    fitted over all per-URL texts.
    """
    url_model: TfidfModel
    text_model: TfidfModel
    vectors: Dict[Tuple[SignalId, str], TfidfVector] = field(default_factory=dict)

    def vector(self, signal, url):
        return self.vectors.get((signal, url))


def build_signal_texts(records, dictionary: ErrorPageDictionary,
                       ocr_sim_threshold: float = DEFAULT_OCR_SIM_THRESHOLD,
                       drop_short: bool = True) -> SignalTexts:
    """
    Fit the per-URL models and vectorize every record once.

    HTML texts that are error pages, and absent texts, get no vector.
    """
    records = sorted(records, key=lambda record: record.url)
    urls = [record.url for record in records]

    url_docs = [(record.url, ' '.join(record.url_tokens)) for record in records]
    html = {record.url: clean_html_text(record, dictionary) for record in records}
    ocr = {record.url: merged_ocr_text(record, dictionary, ocr_sim_threshold, drop_short=drop_short)
           for record in records}

    text_docs = [('html:' + url, html[url]) for url in urls if html[url]]
    text_docs += [('ocr:' + url, ocr[url]) for url in urls if ocr[url]]

    url_model = fit_tfidf(url_docs or [('', '')], analyzer=str.split)
    text_model = fit_tfidf(text_docs or [('', '')], drop_short=drop_short)

    signal_texts = SignalTexts(url_model=url_model, text_model=text_model)

    for url, vector in zip(urls, vectorize_many(url_model, [doc for _, doc in url_docs])):
        if not vector.is_zero:
            signal_texts.vectors[(SignalId.URL_TOKEN, url)] = vector

    for signal, texts in ((SignalId.HTML_TEXT, html), (SignalId.OCR_TEXT, ocr)):
        present = [url for url in urls if texts[url]]
        for url, vector in zip(present, vectorize_many(text_model, [texts[url] for url in present])):
            signal_texts.vectors[(signal, url)] = vector

    logger.info('Vectorized %s URLs (%s url terms, %s text terms)',
                len(urls), url_model.size, text_model.size)
    return signal_texts


def _same_value(value_a, value_b):
    if not value_a or not value_b:
        return False
    return str(value_a).strip().lower() == str(value_b).strip().lower()


def signal_contribution(signal: SignalId, record_a: EnrichedUrlRecord, record_b: EnrichedUrlRecord,
                        config: WeightingConfig, texts: SignalTexts) -> int:
    """
    How much ``signal`` adds to the weight of the edge (record_a, record_b).
    """
    if signal in (SignalId.URL_TOKEN, SignalId.HTML_TEXT, SignalId.OCR_TEXT):
        vector_a = texts.vector(signal, record_a.url)
        vector_b = texts.vector(signal, record_b.url)
        if vector_a is None or vector_b is None:
            return 0
        return int(cosine_similarity(vector_a, vector_b) >= config.delta - SIMILARITY_TOLERANCE)

    if signal is SignalId.IP_COUNT:
        shared = shared_ip_count(record_a, record_b)
        if shared == 0:
            return 0
        return 2 if shared > config.delta_ip else 1

    if signal is SignalId.SUBMISSION_TIME:
        return int(abs(record_a.submission_time - record_b.submission_time) < config.delta_time)

    name = VALUE_SIGNALS[signal]
    return int(_same_value(getattr(record_a, name), getattr(record_b, name)))


def weigh_graph(graph: WeightedUrlGraph, records: Mapping[str, EnrichedUrlRecord],
                config: WeightingConfig, texts: SignalTexts) -> WeightedUrlGraph:
    """
    Evaluate every active signal on every edge of ``graph``.

    Returns a new graph whose weights are the summed contributions and whose
    contribution ledger lists every signal that added to an edge.
    """
    weights = {}
    contributions = {}

    for edge in graph.sorted_edges():
        record_a, record_b = records[edge[0]], records[edge[1]]
        weight = 0
        contributed = set()
        for signal in config.active_signals:
            increment = signal_contribution(signal, record_a, record_b, config, texts)
            if increment:
                weight += increment
                contributed.add(signal)
        weights[edge] = weight
        contributions[edge] = frozenset(contributed)

    logger.debug('Weighed graph %s: %s edges', graph.graph_id, len(weights))
    return WeightedUrlGraph(graph_id=graph.graph_id, nodes=graph.nodes, edges=graph.edges,
                            weights=weights, contributions=contributions)


def weigh_graphs(graphs, records, config, texts):
    weighted = [weigh_graph(graph, records, config, texts) for graph in graphs]
    logger.info('Weighed %s URL graphs', len(weighted))
    return weighted
