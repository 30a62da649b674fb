import datetime
import unittest

from hypothesis import given, settings, strategies as st

from phishcamp.exceptions import IncorrectParameters
from phishcamp.graph import build_bipartite, project_url_graphs
from phishcamp.ingest import load_dataset, load_error_dictionary
from phishcamp.model import ALL_SIGNALS, SignalId, records_by_url
from phishcamp.textsim import tokenize_url
from phishcamp.weighting import (WeightingConfig, build_signal_texts, signal_contribution,
                                 weigh_graph, weigh_graphs)
from tests.helpers import THREE_URLS, U1, U2, record


def weigh_three_urls(config):
    records = load_dataset(THREE_URLS)
    texts = build_signal_texts(records, load_error_dictionary())
    graphs = project_url_graphs(build_bipartite(records))
    return weigh_graphs(graphs, records_by_url(records), config, texts)


class TestSignalContribution(unittest.TestCase):
    """
    Test single signal contributions
    """

    def setUp(self):
        self.dictionary = load_error_dictionary()

    def contribution(self, signal, record_a, record_b, **config):
        texts = build_signal_texts([record_a, record_b], self.dictionary)
        return signal_contribution(signal, record_a, record_b, WeightingConfig(**config), texts)

    def test_ip_count(self):
        ips = ['10.0.0.%s' % host for host in range(5)]
        a, b = record(U1, ips=ips), record(U2, ips=ips)

        self.assertEqual(self.contribution(SignalId.IP_COUNT, a, b, delta_ip=3), 2)
        self.assertEqual(self.contribution(SignalId.IP_COUNT, a, b, delta_ip=5), 1)
        self.assertEqual(self.contribution(SignalId.IP_COUNT, a, record(U2, ips=['9.9.9.9'])), 0)

    def test_target(self):
        self.assertEqual(self.contribution(SignalId.TARGET, record(U1, target='Paypal'),
                                           record(U2, target='paypal ')), 1)
        self.assertEqual(self.contribution(SignalId.TARGET, record(U1, target='Paypal'),
                                           record(U2, target='Amazon')), 0)
        self.assertEqual(self.contribution(SignalId.TARGET, record(U1), record(U2)), 0)

    def test_submission_time(self):
        a = record(U1, hours=10)
        b = record(U2, hours=10.5)

        self.assertEqual(self.contribution(SignalId.SUBMISSION_TIME, a, b,
                                           delta_time=datetime.timedelta(hours=1)), 1)
        self.assertEqual(self.contribution(SignalId.SUBMISSION_TIME, a, b,
                                           delta_time=datetime.timedelta(minutes=10)), 0)

    def test_textual_signals(self):
        a = record(U1, html_text='paypal login secure', ocr_text_own='verify account now')
        b = record(U2, html_text='paypal login secure', ocr_text_own='claim your prize')

        self.assertEqual(self.contribution(SignalId.HTML_TEXT, a, b), 1)
        self.assertEqual(self.contribution(SignalId.OCR_TEXT, a, b), 0)

    def test_single_kind_of_text(self):
        html_only = [record(U1, html_text='hello world'), record(U2, html_text='hello world')]
        ocr_only = [record(U1, ocr_text_own='hello world'), record(U2, ocr_text_pt='hello world')]

        texts = build_signal_texts(html_only, self.dictionary)
        self.assertIsNotNone(texts.vector(SignalId.HTML_TEXT, U1))
        self.assertIsNone(texts.vector(SignalId.OCR_TEXT, U1))
        self.assertEqual(self.contribution(SignalId.HTML_TEXT, *html_only), 1)

        texts = build_signal_texts(ocr_only, self.dictionary)
        self.assertIsNone(texts.vector(SignalId.HTML_TEXT, U2))
        self.assertEqual(self.contribution(SignalId.OCR_TEXT, *ocr_only), 1)

    def test_error_pages_never_contribute(self):
        a = record(U1, html_text='404 Not Found')
        b = record(U2, html_text='404 Not Found')

        self.assertEqual(self.contribution(SignalId.HTML_TEXT, a, b), 0)

    def test_config_validation(self):
        with self.assertRaises(IncorrectParameters):
            WeightingConfig(delta=0)
        with self.assertRaises(IncorrectParameters):
            WeightingConfig(delta_ip=0)
        with self.assertRaises(IncorrectParameters):
            WeightingConfig(delta_time=datetime.timedelta(0))
        with self.assertRaises(IncorrectParameters):
            WeightingConfig(active_signals=[])


class TestWeighGraph(unittest.TestCase):
    """
    Test weighing whole graphs
    """

    def test_three_urls(self):
        """
        u1 and u2 share an IP, a target, a six hour window and most url tokens.
        """
        graphs = weigh_three_urls(WeightingConfig())

        edge = (U1, U2)
        self.assertEqual(graphs[0].weights[edge], 4)
        self.assertEqual(graphs[0].contributions[edge],
                         frozenset([SignalId.URL_TOKEN, SignalId.IP_COUNT, SignalId.TARGET,
                                    SignalId.SUBMISSION_TIME]))
        self.assertEqual(graphs[1].weights, {})

    def test_ip_only(self):
        graphs = weigh_three_urls(WeightingConfig(active_signals=[SignalId.IP_COUNT]))

        for graph in graphs:
            for weight in graph.weights.values():
                self.assertIn(weight, (1, 2))

    def test_weight_is_sum_of_contributions(self):
        graphs = weigh_three_urls(WeightingConfig())

        for graph in graphs:
            for edge, weight in graph.weights.items():
                self.assertGreaterEqual(weight, len(graph.contributions[edge]))
                self.assertLessEqual(weight, len(graph.contributions[edge]) + 1)


SIGNAL_SUBSETS = st.sets(st.sampled_from(sorted(ALL_SIGNALS, key=lambda signal: signal.value)), min_size=1)

WORDS = st.sampled_from(['paypal', 'login', 'secure', 'verify', 'amazon', 'account'])

URLS = ['s286.paypal-login.net', 's8790.paypal-login.net', 'secure-paypal.com.verify.info',
        'aws-amazon.net.au', 'login.amazon-billing.co', 'chase-online.secure-login.net']

IP_POOL = st.sampled_from(['10.0.0.%s' % host for host in range(6)])

TEXTS = st.one_of(st.none(), st.lists(WORDS, min_size=1, max_size=6).map(' '.join))


def optional(*values):
    return st.one_of(st.none(), st.sampled_from(values))


@st.composite
def record_pairs(draw):
    """
    Two records that share at least one IP, with every other signal drawn at random.
    """
    urls = draw(st.lists(st.sampled_from(URLS), min_size=2, max_size=2, unique=True))
    shared = draw(st.sets(IP_POOL, min_size=1, max_size=3))

    def one(url):
        return record(url, hours=draw(st.integers(min_value=0, max_value=48)),
                      url_tokens=tuple(tokenize_url(url)),
                      ips=sorted(shared | draw(st.sets(IP_POOL, max_size=3))),
                      dns=draw(optional('ns1.host.net', 'ns2.cheap.org')),
                      reverse_dns=draw(optional('vps1.host.net', 'mail.cheap.org')),
                      geoip=draw(optional('Sydney', 'Dallas')),
                      country_code=draw(optional('AU', 'US')),
                      target=draw(optional('Paypal', 'Amazon', 'Other')),
                      html_text=draw(TEXTS), ocr_text_own=draw(TEXTS), ocr_text_pt=draw(TEXTS))

    return one(urls[0]), one(urls[1])


def weigh_pair(pair, config):
    records = records_by_url(pair)
    texts = build_signal_texts(pair, load_error_dictionary())
    graph = project_url_graphs(build_bipartite(pair))[0]
    return weigh_graph(graph, records, config, texts)


class TestMonotonicity(unittest.TestCase):
    """
    Properties of the edge weight over random record pairs
    """

    @settings(max_examples=1000, deadline=None)
    @given(record_pairs(), SIGNAL_SUBSETS, SIGNAL_SUBSETS)
    def test_more_signals_never_lower_weight(self, pair, subset, extra):
        small = weigh_pair(pair, WeightingConfig(active_signals=subset))
        large = weigh_pair(pair, WeightingConfig(active_signals=subset | extra))

        self.assertEqual(len(small.edges), 1)
        for edge in small.edges:
            self.assertLessEqual(small.weights[edge], large.weights[edge])
            self.assertLessEqual(small.contributions[edge], large.contributions[edge])

    @settings(max_examples=1000, deadline=None)
    @given(record_pairs(), st.floats(min_value=0.05, max_value=0.95), st.floats(min_value=0.05, max_value=0.95))
    def test_raising_delta_never_adds_weight(self, pair, low, high):
        low, high = min(low, high), max(low, high)

        at_low = weigh_pair(pair, WeightingConfig(delta=low))
        at_high = weigh_pair(pair, WeightingConfig(delta=high))

        for edge in at_low.edges:
            self.assertLessEqual(at_high.weights[edge], at_low.weights[edge])
