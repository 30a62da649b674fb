"""
graph.py

The URL-IP bipartite graph, its projection onto URL graphs, and graph
export (DOT and GraphML).
"""
from __future__ import annotations

import ipaddress
import logging
import os
from typing import Iterable, List, Optional

import networkx as nx
from networkx.algorithms import bipartite

from phishcamp.model import EnrichedUrlRecord, WeightedUrlGraph, edge_key, sorted_signals

logger = logging.getLogger(__name__)

URL_SIDE = 0
IP_SIDE = 1


def canonical_ip(ip: str) -> str:
    """
    Canonical string form of an IP address: IPv4 octets without leading
    zeros, IPv6 compressed and lowercase. Anything else is only stripped and
    lowercased.
    """
    text = ip.strip().lower()
    parts = text.split('.')
    if len(parts) == 4 and all(part.isdigit() for part in parts):
        return '.'.join(str(int(part)) for part in parts)
    try:
        return ipaddress.ip_address(text).compressed
    except ValueError:
        return text


def url_node(url):
    return ('url', url)


def ip_node(ip):
    return ('ip', ip)


def build_bipartite(records: Iterable[EnrichedUrlRecord]) -> nx.Graph:
    """
    Build the URL-IP bipartite graph. Node keys are ``('url', url)`` and
    ``('ip', address)``; the ``bipartite`` node attribute tells the sides
    apart.
    """
    graph = nx.Graph()
    for record in sorted(records, key=lambda record: record.url):
        graph.add_node(url_node(record.url), bipartite=URL_SIDE, url=record.url)
        for ip in sorted(canonical_ip(ip) for ip in record.ips):
            graph.add_node(ip_node(ip), bipartite=IP_SIDE, ip=ip)
            graph.add_edge(url_node(record.url), ip_node(ip))
    return graph


def url_nodes(bipartite_graph):
    return sorted(node for node, side in bipartite_graph.nodes(data='bipartite') if side == URL_SIDE)


def project_url_graphs(bipartite_graph: nx.Graph) -> List[WeightedUrlGraph]:
    """
    Project the bipartite graph onto URLs (an edge per pair sharing at least
    one IP) and return each connected component as one unweighted
    ``WeightedUrlGraph``.

    Graph ids follow descending node count, ties broken by the smallest URL.
    """
    projected = bipartite.projected_graph(bipartite_graph, url_nodes(bipartite_graph))

    parts = []
    for component in nx.connected_components(projected):
        urls = frozenset(node[1] for node in component)
        parts.append((urls, projected.subgraph(component)))
    parts.sort(key=lambda part: (-len(part[0]), min(part[0])))

    graphs = []
    for graph_id, (urls, subgraph) in enumerate(parts):
        edges = frozenset(edge_key(a[1], b[1]) for a, b in subgraph.edges())
        graphs.append(WeightedUrlGraph(graph_id=graph_id, nodes=urls, edges=edges))

    logger.info('Projected %s URLs onto %s URL graphs (%s edges)',
                len(projected), len(graphs), projected.number_of_edges())
    return graphs


def shared_ip_count(record_a: EnrichedUrlRecord, record_b: EnrichedUrlRecord) -> int:
    ips_a = {canonical_ip(ip) for ip in record_a.ips}
    ips_b = {canonical_ip(ip) for ip in record_b.ips}
    return len(ips_a & ips_b)


def to_networkx(graph: WeightedUrlGraph, labels: Optional[dict] = None) -> nx.Graph:
    """
    A networkx view of a weighted URL graph, nodes and edges in sorted order.

    Node attributes: ``url`` and, when given, ``label``. Edge attributes:
    ``weight`` and ``signals`` (comma separated).
    """
    nx_graph = nx.Graph(graph_id=graph.graph_id)
    for url in sorted(graph.nodes):
        attributes = {'url': url}
        if labels is not None:
            attributes['label'] = labels[url]
        nx_graph.add_node(url, **attributes)
    for edge in graph.sorted_edges():
        signals = ','.join(str(signal) for signal in sorted_signals(graph.contributions[edge]))
        nx_graph.add_edge(*edge, weight=graph.weights[edge], signals=signals)
    return nx_graph


def _dot_quote(value):
    return '"%s"' % str(value).replace('\\', '\\\\').replace('"', '\\"')


def write_dot(nx_graph: nx.Graph, path: str):
    """
    Write an undirected graph in Graphviz DOT, attributes quoted.
    """
    lines = ['graph %s {' % _dot_quote('url_graph_%s' % nx_graph.graph.get('graph_id', 0))]
    for node, attributes in nx_graph.nodes(data=True):
        rendered = ', '.join('%s=%s' % (key, _dot_quote(value))
                             for key, value in sorted(attributes.items()))
        lines.append('  %s [%s];' % (_dot_quote(node), rendered))
    for node_a, node_b, attributes in nx_graph.edges(data=True):
        rendered = ', '.join('%s=%s' % (key, _dot_quote(value))
                             for key, value in sorted(attributes.items()))
        lines.append('  %s -- %s [%s];' % (_dot_quote(node_a), _dot_quote(node_b), rendered))
    lines.append('}')

    with open(path, 'w', encoding='utf-8') as dot_file_obj:
        dot_file_obj.write('\n'.join(lines) + '\n')


def export_graphs(graphs, dot_dir=None, graphml_dir=None, labels=None):
    """
    Write one DOT and/or GraphML file per graph (``graph_<id>.dot`` /
    ``graph_<id>.graphml``). ``labels`` maps graph_id to a url -> component
    label dict. Returns the written paths.
    """
    written = []
    for directory in (dot_dir, graphml_dir):
        if directory:
            os.makedirs(directory, exist_ok=True)

    for graph in graphs:
        graph_labels = labels.get(graph.graph_id) if labels else None
        nx_graph = to_networkx(graph, graph_labels)
        if dot_dir:
            path = os.path.join(dot_dir, 'graph_%s.dot' % graph.graph_id)
            write_dot(nx_graph, path)
            written.append(path)
        if graphml_dir:
            path = os.path.join(graphml_dir, 'graph_%s.graphml' % graph.graph_id)
            nx.write_graphml(nx_graph, path)
            written.append(path)

    logger.info('Exported %s graph files', len(written))
    return written
