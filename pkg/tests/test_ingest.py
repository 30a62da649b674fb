import json
import os
import shutil
import tempfile
import unittest
from unittest import mock

from pymongo.errors import ConnectionFailure

from phishcamp.exceptions import DuplicateUrl, EnrichmentUnavailable, IncorrectParameters, ParseError
from phishcamp.ingest import (EnrichmentStats, ErrorPageDictionary, FixtureEnrichmentClient,
                              MongoEnrichmentClient, drop_error_records, enrich, has_only_error_text,
                              is_error_page, load_dataset, load_error_dictionary, write_dataset)
from phishcamp.utils.fixtures import CreateFixture, LoadFixture, fixture_name
from tests.helpers import THREE_URLS, U1, U2, U3, record


class TempDirTestCase(unittest.TestCase):

    def setUp(self):
        self.directory = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.directory)

    def write_lines(self, name, lines):
        path = os.path.join(self.directory, name)
        with open(path, 'w', encoding='utf-8') as file_obj:
            file_obj.write('\n'.join(lines))
        return path


class TestLoadDataset(TempDirTestCase):
    """
    Test reading JSON-lines datasets
    """

    def test_three_urls(self):
        """
        Url tokens are derived when a line does not carry them.
        """
        records = load_dataset(THREE_URLS)

        self.assertEqual([item.url for item in records], [U1, U2, U3])
        self.assertEqual(records[0].url_tokens, ('s286', 'paypal', 'login', 'net'))
        self.assertEqual(records[2].url_tokens, ('aws', 'amazon', 'net', 'au'))
        self.assertEqual(records[0].ips, frozenset(['168.10.10.2']))
        self.assertEqual(records[0].target, 'Paypal')

    def test_empty_file(self):
        self.assertEqual(load_dataset(self.write_lines('empty.jsonl', [])), [])

    def test_duplicate_url(self):
        line = json.dumps({'url': U1, 'submission_time': '2023-08-15T00:00:00Z'})
        with self.assertRaises(DuplicateUrl):
            load_dataset(self.write_lines('dup.jsonl', [line, line]))

    def test_bad_line_reports_line_number(self):
        line = json.dumps({'url': U1, 'submission_time': '2023-08-15T00:00:00Z'})
        path = self.write_lines('bad.jsonl', [line, '', '{"url": '])
        with self.assertRaises(ParseError) as raised:
            load_dataset(path)
        self.assertEqual(raised.exception.line_number, 3)

    def test_drop_url_scheme(self):
        line = json.dumps({'url': 'https://www.paypal-login.net/x', 'submission_time': '2023-08-15T00:00:00Z'})
        path = self.write_lines('scheme.jsonl', [line])

        self.assertEqual(load_dataset(path)[0].url_tokens, ('https', 'www', 'paypal', 'login', 'net', 'x'))
        self.assertEqual(load_dataset(path, drop_url_scheme=True)[0].url_tokens,
                         ('paypal', 'login', 'net', 'x'))

    def test_write_then_load(self):
        records = load_dataset(THREE_URLS)
        path = os.path.join(self.directory, 'out.jsonl')
        write_dataset(records, path)

        self.assertEqual(load_dataset(path), records)


class TestErrorPages(unittest.TestCase):
    """
    Test the error-page dictionary
    """

    def setUp(self):
        self.dictionary = load_error_dictionary()

    def test_examples(self):
        self.assertTrue(is_error_page('404 Not Found — nginx', self.dictionary))
        self.assertFalse(is_error_page('Sign in to your PayPal account', self.dictionary))
        self.assertTrue(is_error_page('', self.dictionary))
        self.assertTrue(is_error_page(None, self.dictionary))

    def test_token_fraction(self):
        dictionary = ErrorPageDictionary(frozenset(['gateway timeout']), token_fraction_threshold=0.5,
                                         words=frozenset(['timeout']))

        self.assertTrue(is_error_page('timeout timeout welcome', dictionary))
        self.assertFalse(is_error_page('timeout welcome home', dictionary))
        self.assertTrue(is_error_page('Gateway Timeout', dictionary))

    def test_phrase_words_are_not_error_vocabulary(self):
        dictionary = ErrorPageDictionary(frozenset(['gateway timeout', '404']))

        self.assertEqual(dictionary.tokens, frozenset(['404']))
        self.assertFalse(is_error_page('timeout timeout welcome', dictionary))

    def test_realistic_phishing_texts(self):
        for text in ('Verify your account access',
                     'PayPal sign in - reference 184049',
                     'Your Apple ID service is coming soon to expire',
                     'Access your online banking service page',
                     'Track parcel 4031 on this site'):
            self.assertFalse(is_error_page(text, self.dictionary), text)

    def test_phrases_match_whole_words(self):
        self.assertTrue(is_error_page('Error 404: the page you requested was not found', self.dictionary))
        self.assertTrue(is_error_page('503 Service Unavailable', self.dictionary))
        self.assertFalse(is_error_page('Order 14045 confirmed for apachecounty.gov', self.dictionary))

    def test_extending_never_unflags(self):
        text = 'Account suspended by the hosting provider'
        extended = self.dictionary.extend(['hosting provider'])

        self.assertTrue(is_error_page(text, self.dictionary))
        self.assertTrue(is_error_page(text, extended))

    def test_invalid_dictionary(self):
        with self.assertRaises(IncorrectParameters):
            ErrorPageDictionary(frozenset())
        with self.assertRaises(IncorrectParameters):
            ErrorPageDictionary(frozenset(['404']), token_fraction_threshold=0)

    def test_custom_dictionary_file(self):
        directory = tempfile.mkdtemp()
        try:
            path = os.path.join(directory, 'phrases.txt')
            with open(path, 'w', encoding='utf-8') as file_obj:
                file_obj.write('# parked pages\nthis domain is parked\n\n[words]\nParked\n')
            dictionary = load_error_dictionary(path)
        finally:
            shutil.rmtree(directory)

        self.assertEqual(dictionary.phrases, frozenset(['this domain is parked']))
        self.assertEqual(dictionary.tokens, frozenset(['parked']))
        self.assertTrue(is_error_page('parked', dictionary))

    def test_unknown_dictionary_section(self):
        directory = tempfile.mkdtemp()
        try:
            path = os.path.join(directory, 'phrases.txt')
            with open(path, 'w', encoding='utf-8') as file_obj:
                file_obj.write('[others]\nsomething\n')
            with self.assertRaises(IncorrectParameters):
                load_error_dictionary(path)
        finally:
            shutil.rmtree(directory)

    def test_drop_error_records(self):
        records = [record(U1, html_text='404 not found', ocr_text_own='page not found'),
                   record(U2, html_text='404 not found', ocr_text_own='paypal login'),
                   record(U3)]

        self.assertTrue(has_only_error_text(records[0], self.dictionary))
        self.assertEqual([item.url for item in drop_error_records(records, self.dictionary)], [U2, U3])


class TestEnrichment(TempDirTestCase):
    """
    Test filling records from enrichment sources
    """

    def test_fill_keep_and_miss(self):
        source = [record(U1, dns='ns1.paypal-login.net', ips=['168.10.10.2']),
                  record(U2, dns='ns2.other.net', target='Paypal')]
        CreateFixture(self.directory).create(source)

        records = [record(U1), record(U2, dns='ns1.kept.net'), record(U3)]
        stats = EnrichmentStats()
        enriched = enrich(records, FixtureEnrichmentClient(self.directory), stats)

        self.assertEqual([item.url for item in enriched], [U1, U2, U3])
        self.assertEqual(enriched[0].dns, 'ns1.paypal-login.net')
        self.assertEqual(enriched[0].ips, frozenset(['168.10.10.2']))
        self.assertEqual(enriched[1].dns, 'ns1.kept.net')
        self.assertEqual(enriched[1].target, 'Paypal')
        self.assertEqual(enriched[2], records[2])
        self.assertEqual((stats.enriched, stats.unchanged, stats.warnings), (2, 0, 1))

    def test_enriching_twice_changes_nothing(self):
        CreateFixture(self.directory).create([
            record(U1, dns='ns1.paypal-login.net', ips=['168.10.10.2'], html_text='paypal login',
                   tag_counts={'div': 3}),
            record(U2, geoip='US-1', ocr_text_own='verify your account'),
        ])
        client = FixtureEnrichmentClient(self.directory)
        records = [record(U1), record(U2, dns='ns1.kept.net'), record(U3, target='Amazon')]

        once = enrich(records, client)
        twice = enrich(once, client)

        self.assertEqual(twice, once)
        self.assertEqual(once[0].tag_counts, {'div': 3})

    def test_capabilities_limit_fields(self):
        CreateFixture(self.directory).create([record(U1, dns='ns1.x.net', target='Paypal')])
        client = FixtureEnrichmentClient(self.directory, capabilities=['target'])

        enriched = enrich([record(U1)], client)[0]

        self.assertEqual(enriched.target, 'Paypal')
        self.assertIsNone(enriched.dns)

    def test_fixture_files(self):
        CreateFixture(self.directory).create([record(U1, ips=['1.1.1.1'], tag_counts={'div': 2})])

        with open(os.path.join(self.directory, fixture_name(U1)), encoding='utf-8') as fixture_file_obj:
            document = json.load(fixture_file_obj)
        self.assertEqual(document, {'url': U1, 'ips': ['1.1.1.1'], 'tag_counts': {'div': 2}})
        self.assertEqual(LoadFixture(self.directory).load(U1), {'ips': ['1.1.1.1'], 'tag_counts': {'div': 2}})

        with self.assertRaises(EnrichmentUnavailable):
            LoadFixture(self.directory).load(U2)

    def test_mongo_client(self):
        """
        Documents are looked up by url; a dropped connection is a miss.
        """
        connection = mock.Mock()
        connection.find_one.side_effect = [
            {'_id': 1, 'url': U1, 'geoip': 'US-1', 'unrelated': True},
            None,
            ConnectionFailure('down'),
        ]
        client = MongoEnrichmentClient(connection)

        self.assertEqual(client.lookup(U1), {'geoip': 'US-1'})
        connection.find_one.assert_called_with({'url': U1})
        with self.assertRaises(EnrichmentUnavailable):
            client.lookup(U2)
        with self.assertRaises(EnrichmentUnavailable):
            client.lookup(U3)
