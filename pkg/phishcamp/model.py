"""
model.py

Domain types shared across the pipeline. Everything here is immutable after
construction; validation happens in ``__post_init__``.
"""
from __future__ import annotations

import datetime
import enum
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, Mapping, Optional, Tuple

from phishcamp.exceptions import IncorrectParameters, MissingRequiredField

Edge = Tuple[str, str]


class SignalId(enum.Enum):
    """
    The signals that can contribute weight to an edge of a URL graph.

    Values are the names used on the command line and in output files.
    """
    URL_TOKEN = 'url_token'
    HTML_TEXT = 'html_text'
    OCR_TEXT = 'ocr_text'
    IP_COUNT = 'ip_count'
    DNS = 'dns'
    REVERSE_DNS = 'reverse_dns'
    GEOIP = 'geoip'
    COUNTRY_CODE = 'country_code'
    TARGET = 'target'
    SUBMISSION_TIME = 'submission_time'

    def __str__(self):
        return self.value


TEXTUAL_SIGNALS = frozenset([SignalId.URL_TOKEN, SignalId.HTML_TEXT, SignalId.OCR_TEXT])

#: Signals compared by case-insensitive equality, keyed to the record field.
VALUE_SIGNALS = {
    SignalId.DNS: 'dns',
    SignalId.REVERSE_DNS: 'reverse_dns',
    SignalId.GEOIP: 'geoip',
    SignalId.COUNTRY_CODE: 'country_code',
    SignalId.TARGET: 'target',
}

ALL_SIGNALS = frozenset(SignalId)


def parse_signals(value):
    """
    Turn a comma separated list (``"ip_count,target"``) or an iterable of
    names into a frozenset of ``SignalId``.
    """
    if isinstance(value, str):
        names = [name.strip() for name in value.split(',') if name.strip()]
    else:
        names = list(value)

    signals = set()
    for name in names:
        if isinstance(name, SignalId):
            signals.add(name)
            continue
        try:
            signals.add(SignalId(name.lower()))
        except ValueError:
            raise IncorrectParameters('Unknown signal %r. Known signals: %s'
                                      % (name, ', '.join(sorted(s.value for s in SignalId))))

    if not signals:
        raise IncorrectParameters('At least one signal must be active.')

    return frozenset(signals)


def sorted_signals(signals: Iterable[SignalId]):
    """
    Signals in declaration order, so tables and manifests are stable.
    """
    order = list(SignalId)
    return sorted(signals, key=order.index)


def to_utc(timestamp: datetime.datetime) -> datetime.datetime:
    """
    Normalize to UTC with second precision. Naive timestamps are read as UTC.
    """
    if timestamp.tzinfo is None:
        timestamp = timestamp.replace(tzinfo=datetime.timezone.utc)
    return timestamp.astimezone(datetime.timezone.utc).replace(microsecond=0)


def edge_key(url_a: str, url_b: str) -> Edge:
    """
    The canonical (sorted) form of an undirected edge.
    """
    return (url_a, url_b) if url_a <= url_b else (url_b, url_a)


@dataclass(frozen=True)
class EnrichedUrlRecord:
    """
    One phishing URL instance and every signal value collected for it.
    """
    url: str
    submission_time: datetime.datetime
    url_tokens: Tuple[str, ...] = ()
    ips: FrozenSet[str] = frozenset()
    dns: Optional[str] = None
    reverse_dns: Optional[str] = None
    geoip: Optional[str] = None
    country_code: Optional[str] = None
    target: Optional[str] = None
    html_text: Optional[str] = None
    ocr_text_own: Optional[str] = None
    ocr_text_pt: Optional[str] = None
    tag_counts: Mapping[str, int] = field(default_factory=dict, hash=False)

    def __post_init__(self):
        if not self.url:
            raise MissingRequiredField('Records need a non-empty url.')
        if self.submission_time is None:
            raise MissingRequiredField('Record %s has no submission_time.' % self.url)

        object.__setattr__(self, 'submission_time', to_utc(self.submission_time))
        object.__setattr__(self, 'ips', frozenset(self.ips))
        object.__setattr__(self, 'url_tokens', tuple(self.url_tokens))

        for tag, count in self.tag_counts.items():
            if count < 0:
                raise IncorrectParameters('Tag %r of %s has a negative count (%s).'
                                          % (tag, self.url, count))
        object.__setattr__(self, 'tag_counts', dict(self.tag_counts))


@dataclass(frozen=True)
class WeightedUrlGraph:
    """
    A connected URL graph: URLs linked by shared IP addresses, with integer
    edge weights and the set of signals that contributed to each edge.
    """
    graph_id: int
    nodes: FrozenSet[str]
    edges: FrozenSet[Edge] = frozenset()
    weights: Mapping[Edge, int] = field(default_factory=dict, hash=False)
    contributions: Mapping[Edge, FrozenSet[SignalId]] = field(default_factory=dict, hash=False)

    def __post_init__(self):
        object.__setattr__(self, 'nodes', frozenset(self.nodes))
        edges = frozenset(edge_key(*edge) for edge in self.edges)
        object.__setattr__(self, 'edges', edges)

        for url_a, url_b in edges:
            if url_a == url_b:
                raise IncorrectParameters('Self-loop on %s.' % url_a)
            if url_a not in self.nodes or url_b not in self.nodes:
                raise IncorrectParameters('Edge (%s, %s) has an endpoint outside graph %s.'
                                          % (url_a, url_b, self.graph_id))

        object.__setattr__(self, 'weights', {edge: self.weights.get(edge, 0) for edge in edges})
        object.__setattr__(self, 'contributions',
                           {edge: frozenset(self.contributions.get(edge, ())) for edge in edges})

    def sorted_edges(self):
        return sorted(self.edges)


@dataclass(frozen=True)
class CampaignComponent:
    """
    One community of one weighted URL graph (``cmp_i^j``).

    ``gid`` and ``long_doc`` are filled in once components are indexed
    globally.
    """
    graph_id: int
    label: int
    urls: FrozenSet[str]
    gid: Optional[int] = None
    long_doc: str = ''

    def __post_init__(self):
        object.__setattr__(self, 'urls', frozenset(self.urls))
        if not self.urls:
            raise IncorrectParameters('Component (%s, %s) has no URLs.' % (self.graph_id, self.label))

    @property
    def key(self):
        return (self.graph_id, self.label)


@dataclass(frozen=True)
class Campaign:
    """
    A cluster of campaign components, or, for the structural layer, a group of
    URLs without components.
    """
    campaign_id: int
    components: Tuple[CampaignComponent, ...] = ()
    urls: FrozenSet[str] = frozenset()
    sigs: Mapping[SignalId, float] = field(default_factory=dict, hash=False)
    avg_sigs: float = 0.0
    structural_cluster_ids: Tuple[int, ...] = ()
    contextual_campaign_ids: Tuple[int, ...] = ()

    def __post_init__(self):
        components = tuple(self.components)
        object.__setattr__(self, 'components', components)

        urls = frozenset(self.urls)
        if components:
            urls = urls.union(*(component.urls for component in components))
        if not urls:
            raise IncorrectParameters('Campaign %s has no URLs.' % self.campaign_id)
        object.__setattr__(self, 'urls', urls)
        object.__setattr__(self, 'sigs', dict(self.sigs))

    @property
    def size(self):
        return len(self.components)

    def top_signals(self, limit=None):
        """
        Signals ordered by strength, strongest first; ties by signal name.
        """
        ranked = sorted(self.sigs.items(), key=lambda item: (-item[1], item[0].value))
        return ranked[:limit] if limit else ranked


@dataclass(frozen=True)
class TfidfModel:
    """
    A fitted TF-IDF vocabulary.

    ``vectorizer`` is the fitted scikit-learn vectorizer that produces the
    vectors; ``model_id`` distinguishes models so vectors from two different
    models are never compared.
    """
    vocabulary: Mapping[str, int]
    doc_freq: Mapping[str, int]
    num_docs: int
    vectorizer: object = field(default=None, compare=False, repr=False)
    model_id: int = field(default=0, compare=False)

    @property
    def size(self):
        return len(self.vocabulary)


def records_by_url(records: Iterable[EnrichedUrlRecord]) -> Dict[str, EnrichedUrlRecord]:
    return {record.url: record for record in records}
