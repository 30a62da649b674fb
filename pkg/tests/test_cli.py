import contextlib
import io
import json
import os
import shutil
import tempfile
import unittest

from phishcamp.cli import COMMANDS, main
from tests.helpers import THREE_URLS


class TestCommandLine(unittest.TestCase):
    """
    Test the phishcamp command
    """

    def setUp(self):
        self.directory = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.directory)

    def path(self, name):
        return os.path.join(self.directory, name)

    def call(self, *argv):
        stdout = io.StringIO()
        with contextlib.redirect_stdout(stdout), contextlib.redirect_stderr(io.StringIO()):
            code = main(list(argv))
        return code, stdout.getvalue()

    def test_help(self):
        code, output = self.call('help')

        self.assertEqual(code, 0)
        for name in COMMANDS:
            self.assertIn(name, output)

    def test_unknown_subcommand(self):
        self.assertEqual(self.call('cluster')[0], 2)

    def test_bad_option(self):
        self.assertEqual(self.call('detect', THREE_URLS, '--layers', 'everything')[0], 2)

    def test_synth_then_detect(self):
        code, _ = self.call('synth', '--out', self.path('synth.jsonl'), '--truth', self.path('truth.json'),
                            '--seed', '3', '-v', '0')
        self.assertEqual(code, 0)

        code, output = self.call('detect', self.path('synth.jsonl'), '-o', self.path('out'),
                                 '--truth', self.path('truth.json'), '-v', '0')
        self.assertEqual(code, 0)
        self.assertIn('campaigns written to', output)

        with open(self.path('out/run-manifest.json'), encoding='utf-8') as manifest_file_obj:
            manifest = json.load(manifest_file_obj)
        self.assertIn('ari', manifest)

    def test_synth_with_fixtures_then_ingest(self):
        code, _ = self.call('synth', '--out', self.path('bare.jsonl'), '--fixtures', self.path('fixtures'),
                            '-v', '0')
        self.assertEqual(code, 0)

        code, _ = self.call('ingest', self.path('bare.jsonl'), '--enrichment-dir', self.path('fixtures'),
                            '--out', self.path('enriched.jsonl'), '-v', '0')
        self.assertEqual(code, 0)

        with open(self.path('enriched.jsonl'), encoding='utf-8') as dataset_file_obj:
            first = json.loads(dataset_file_obj.readline())
        self.assertTrue(first['ips'])
        self.assertTrue(first['html_text'])

    def test_missing_input_is_an_input_error(self):
        code, _ = self.call('detect', self.path('missing.jsonl'), '-o', self.path('out'), '-v', '0')

        self.assertEqual(code, 2)

    def test_malformed_input(self):
        with open(self.path('bad.jsonl'), 'w', encoding='utf-8') as bad_file_obj:
            bad_file_obj.write('{"url": "a.net"}\n')

        code, _ = self.call('detect', self.path('bad.jsonl'), '-o', self.path('out'), '-v', '0')

        self.assertEqual(code, 2)

    def test_metrics_compare_and_export(self):
        out = self.path('out')
        self.assertEqual(self.call('metrics', THREE_URLS, '-o', out, '-v', '0')[0], 0)
        self.assertTrue(os.path.exists(os.path.join(out, 'sigs.csv')))

        structural = self.path('structural')
        self.assertEqual(self.call('detect', THREE_URLS, '-o', structural, '--layers', 'structural', '-v', '0')[0], 0)
        self.assertEqual(self.call('detect', THREE_URLS, '-o', out, '-v', '0')[0], 0)
        self.assertEqual(self.call('compare', os.path.join(structural, 'campaigns.json'),
                                   os.path.join(out, 'campaigns.json'), '--out', self.path('cmp.csv'),
                                   '-v', '0')[0], 0)
        self.assertTrue(os.path.exists(self.path('cmp.csv')))

        self.assertEqual(self.call('export-graphs', THREE_URLS, '-o', out, '--format', 'dot', '-v', '0')[0], 0)
        self.assertTrue(os.path.exists(os.path.join(out, 'graphs', 'graph_0.dot')))
        self.assertEqual(self.call('export-graphs', THREE_URLS, '--layers', 'structural', '-v', '0')[0], 2)

    def test_input_and_export_directories(self):
        dictionary = self.path('errors.txt')
        with open(dictionary, 'w', encoding='utf-8') as dictionary_file_obj:
            dictionary_file_obj.write('[phrases]\nnot found\n[words]\nerror\n')

        code, _ = self.call('detect', '--input', THREE_URLS, '-o', self.path('out'),
                            '--export-dot', self.path('dot'), '--export-graphml', self.path('graphml'),
                            '--drop-short-tokens', '--error-dict', dictionary, '-v', '0')

        self.assertEqual(code, 0)
        self.assertEqual(sorted(os.listdir(self.path('dot'))), ['graph_0.dot', 'graph_1.dot'])
        self.assertEqual(sorted(os.listdir(self.path('graphml'))), ['graph_0.graphml', 'graph_1.graphml'])

        code, _ = self.call('export-graphs', '--input', THREE_URLS, '-o', self.path('out'),
                            '--export-dot', self.path('dot-only'), '-v', '0')
        self.assertEqual(code, 0)
        self.assertEqual(sorted(os.listdir(self.path('dot-only'))), ['graph_0.dot', 'graph_1.dot'])

    def test_dataset_arguments(self):
        self.assertEqual(self.call('detect', '-o', self.path('out'), '-v', '0')[0], 2)
        self.assertEqual(self.call('detect', THREE_URLS, '--input', self.path('other.jsonl'),
                                   '-o', self.path('out'), '-v', '0')[0], 2)

    def test_compare_rejects_a_single_campaign_object(self):
        path = self.path('campaigns.json')
        with open(path, 'w', encoding='utf-8') as campaigns_file_obj:
            json.dump({'campaign_id': 0}, campaigns_file_obj)

        self.assertEqual(self.call('compare', path, path, '--out', self.path('cmp.csv'), '-v', '0')[0], 2)
