import math
import os
import shutil
import tempfile
import unittest

import numpy as np
import pandas as pd
from scipy import sparse

from phishcamp.exceptions import CoverageMismatch, TooFewCampaigns
from phishcamp.model import Campaign, CampaignComponent, SignalId, TfidfModel
from phishcamp.metrics import (campaign_signal_strength, coherence, coherence_map, coherence_score,
                               graph_signal_strength, intra_campaign_sim, inter_campaign_sim,
                               is_poorly_distinguishable,
                               signal_strength_table, theta_cache, with_signal_strengths,
                               write_cohmap_csv, write_cohmap_svg, write_sigs_csv)
from phishcamp.textsim import fit_tfidf
from tests.helpers import weighted_graph


class StaticVectorizer(object):
    """
    Maps each document to a fixed row.
    """

    def __init__(self, rows):
        self.rows = rows

    def transform(self, docs):
        return sparse.csr_matrix(np.array([self.rows[doc] for doc in docs], dtype=float))


def static_model(rows):
    return TfidfModel(vocabulary={}, doc_freq={}, num_docs=len(rows), vectorizer=StaticVectorizer(rows))


def campaign(campaign_id, docs, graph_ids=None, first_gid=0):
    graph_ids = graph_ids or [0] * len(docs)
    components = tuple(CampaignComponent(graph_id, position, ['c%s-%s.net' % (campaign_id, position)],
                                         gid=first_gid + position, long_doc=doc)
                       for position, (graph_id, doc) in enumerate(zip(graph_ids, docs)))
    return Campaign(campaign_id=campaign_id, components=components)


class TestSignalStrength(unittest.TestCase):
    """
    Test per-signal strength
    """

    def setUp(self):
        edges = {('a.net', 'b.net'): 2, ('b.net', 'c.net'): 1, ('a.net', 'c.net'): 2}
        contributions = {('a.net', 'b.net'): {SignalId.GEOIP, SignalId.TARGET},
                         ('b.net', 'c.net'): {SignalId.GEOIP},
                         ('a.net', 'c.net'): {SignalId.GEOIP, SignalId.TARGET}}
        self.graph = weighted_graph(edges, graph_id=0, contributions=contributions)
        self.single = weighted_graph({}, graph_id=1, nodes=['d.net'])

    def test_graph_strength(self):
        self.assertAlmostEqual(graph_signal_strength(self.graph, SignalId.TARGET), 2 / 3)
        self.assertEqual(graph_signal_strength(self.graph, SignalId.GEOIP), 1.0)
        self.assertEqual(graph_signal_strength(self.single, SignalId.GEOIP), 0.0)

    def test_campaign_strength(self):
        thetas = {(0, SignalId.TARGET): 0.5, (1, SignalId.TARGET): 1.0, (2, SignalId.TARGET): 0.0}

        self.assertEqual(campaign_signal_strength(campaign(0, ['x'], [0]), SignalId.TARGET, thetas), 0.5)
        self.assertEqual(campaign_signal_strength(campaign(0, ['x', 'y'], [1, 2]), SignalId.TARGET, thetas), 0.5)
        self.assertEqual(campaign_signal_strength(Campaign(campaign_id=0, urls=['a.net']), SignalId.TARGET,
                                                  thetas), 0.0)
        with self.assertRaises(CoverageMismatch):
            campaign_signal_strength(campaign(0, ['x'], [9]), SignalId.TARGET, thetas)

    def test_table(self):
        campaigns = [campaign(0, ['x', 'y'], [0, 1]), campaign(1, ['z'], [0])]
        signals = [SignalId.TARGET, SignalId.GEOIP]

        table = signal_strength_table(campaigns, [self.graph, self.single], signals)

        self.assertEqual(table.signals, [SignalId.GEOIP, SignalId.TARGET])
        self.assertEqual(table.thetas, theta_cache([self.graph, self.single], signals))
        self.assertAlmostEqual(table.rows[0][SignalId.TARGET], 1 / 3)
        self.assertAlmostEqual(table.rows[0][SignalId.GEOIP], 0.5)
        self.assertAlmostEqual(table.averages[1], (2 / 3 + 1.0) / 2)

        enriched = with_signal_strengths(campaigns, table)
        self.assertEqual(enriched[1].top_signals(1), [(SignalId.GEOIP, 1.0)])
        self.assertAlmostEqual(enriched[1].avg_sigs, table.averages[1])

        frame = table.to_frame()
        self.assertEqual(list(frame.columns), ['campaign_id', 'signal', 'sigs', 'avg'])
        self.assertEqual(list(frame['signal'][:2]), ['geoip', 'target'])


class TestCoherence(unittest.TestCase):
    """
    Test intra and inter campaign similarity and the coherence score
    """

    def test_intra_examples(self):
        half = [0.5, math.sqrt(3) / 2]
        model = static_model({'x': [1.0, 0.0], 'y': [1.0, 0.0], 'z': half, 'w': [0.0, 1.0]})

        self.assertEqual(intra_campaign_sim(campaign(0, ['x']), model), 1.0)
        self.assertAlmostEqual(intra_campaign_sim(campaign(0, ['x', 'y']), model), 1.0)
        self.assertAlmostEqual(intra_campaign_sim(campaign(0, ['x', 'w']), model), 0.0)
        self.assertAlmostEqual(intra_campaign_sim(campaign(0, ['x', 'y', 'z']), model), 2 / 3)

    def test_inter_examples(self):
        docs = [(0, 'paypal login'), (1, 'amazon aws'), (2, 'paypal verify')]
        model = fit_tfidf(docs)
        paypal = campaign(0, ['paypal login'])

        self.assertAlmostEqual(inter_campaign_sim(paypal, campaign(1, ['paypal login']), model), 1.0)
        self.assertEqual(inter_campaign_sim(paypal, campaign(1, ['amazon aws']), model), 0.0)

        shared = math.log(4 / 3) + 1
        own = math.log(4 / 2) + 1
        expected = shared ** 2 / (shared ** 2 + own ** 2)
        self.assertAlmostEqual(inter_campaign_sim(paypal, campaign(1, ['paypal verify']), model), expected)

    def test_formula(self):
        self.assertEqual(coherence(1.0, 1.0, 1.0), 1.0)
        self.assertAlmostEqual(coherence(0.8, 0.8, 0.001), 800.0, delta=1e-6)
        self.assertAlmostEqual(coherence(0.8, 0.8, 0.0), 800.0, delta=1e-6)
        self.assertEqual(coherence(0.5, 0.5, 1.0), 0.5)
        self.assertTrue(is_poorly_distinguishable(coherence(0.5, 0.5, 1.0)))
        self.assertFalse(is_poorly_distinguishable(1.0))


class TestCoherenceMap(unittest.TestCase):
    """
    Test the pairwise coherence map and its outputs
    """

    def setUp(self):
        self.directory = tempfile.mkdtemp()
        vocabularies = ['paypal login verify', 'amazon aws cloud', 'chase bank transfer']
        self.campaigns = [campaign(number, [text, text], first_gid=2 * number)
                          for number, text in enumerate(vocabularies)]
        docs = [component.long_doc for item in self.campaigns for component in item.components]
        self.model = fit_tfidf(list(enumerate(docs)))

    def tearDown(self):
        shutil.rmtree(self.directory)

    def test_well_separated(self):
        cohmap = coherence_map(self.campaigns, self.model)

        self.assertEqual(len(cohmap.pair_scores()), 3)
        for _, score in cohmap.pair_scores():
            self.assertAlmostEqual(score, 1000.0, places=6)
        self.assertEqual(cohmap.fraction_above, 1.0)
        self.assertEqual(cohmap.poor_pairs(), [])
        self.assertTrue(np.isnan(cohmap.scores[0, 0]))
        self.assertEqual(cohmap.score(0, 2), cohmap.score(2, 0))

    def test_pair_score(self):
        paypal, amazon = self.campaigns[:2]

        self.assertAlmostEqual(coherence_score(paypal, amazon, self.model), 1000.0, places=6)
        self.assertAlmostEqual(coherence_score(paypal, amazon, self.model, eps=0.5), 2.0)
        self.assertAlmostEqual(coherence_score(paypal, paypal, self.model), 1.0)

    def test_two_campaigns_mirror(self):
        cohmap = coherence_map(self.campaigns[:2], self.model)

        self.assertEqual(cohmap.scores[0, 1], cohmap.scores[1, 0])
        self.assertEqual(cohmap.summary()['pairs'], 1)

    def test_too_few(self):
        with self.assertRaises(TooFewCampaigns):
            coherence_map(self.campaigns[:1], self.model)

    def test_csv_and_svg(self):
        cohmap = coherence_map(self.campaigns[:2], self.model)
        path = os.path.join(self.directory, 'cohmap.csv')
        write_cohmap_csv(cohmap, path)

        with open(path, encoding='utf-8') as cohmap_file_obj:
            lines = cohmap_file_obj.read().splitlines()
        self.assertEqual(lines, ['campaign_id,0,1', '0,,1000.000000', '1,1000.000000,'])

        svg = os.path.join(self.directory, 'cohmap.svg')
        write_cohmap_svg(cohmap, svg)
        with open(svg, encoding='utf-8') as svg_file_obj:
            self.assertIn('<svg', svg_file_obj.read())

    def test_sigs_csv(self):
        graph = weighted_graph({('c0-0.net', 'c0-1.net'): 1},
                               contributions={('c0-0.net', 'c0-1.net'): {SignalId.TARGET}})
        table = signal_strength_table(self.campaigns[:1], [graph], [SignalId.TARGET, SignalId.DNS])
        path = os.path.join(self.directory, 'sigs.csv')
        write_sigs_csv(table, path)

        frame = pd.read_csv(path)
        self.assertEqual(list(frame['signal']), ['dns', 'target'])
        self.assertEqual(list(frame['sigs']), [0.0, 1.0])
        self.assertEqual(list(frame['avg']), [0.5, 0.5])
