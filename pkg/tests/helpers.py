"""
Shared builders for the test suite.
"""
import datetime
import os

from phishcamp.model import EnrichedUrlRecord, WeightedUrlGraph, edge_key

FIXTURES = os.path.join(os.path.dirname(__file__), 'fixtures')
THREE_URLS = os.path.join(FIXTURES, 'three_urls.jsonl')

U1 = 's286.paypal-login.net'
U2 = 's8790.paypal-login.net'
U3 = 'aws-amazon.net.au'

T0 = datetime.datetime(2023, 8, 15, tzinfo=datetime.timezone.utc)


def record(url, hours=0, **fields):
    return EnrichedUrlRecord(url=url, submission_time=T0 + datetime.timedelta(hours=hours), **fields)


def weighted_graph(edges, graph_id=0, nodes=None, contributions=None):
    """
    A weighted graph from ``{(a, b): weight}``.
    """
    nodes = set(nodes or ())
    for url_a, url_b in edges:
        nodes.update((url_a, url_b))
    weights = {edge_key(*edge): weight for edge, weight in edges.items()}
    return WeightedUrlGraph(graph_id=graph_id, nodes=frozenset(nodes), edges=frozenset(weights),
                            weights=weights, contributions=contributions or {})
