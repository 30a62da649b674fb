"""
fixtures.py

A module for creating json fixtures that hold enrichment data for URLs and
loading them back.

Layout: one file per URL, named ``<sha256 of the url>.json``, holding a JSON
object with the url and any subset of the enrichable fields::

    {"url": "s286.paypal-login.net", "dns": "ns1.example.net", "ips": ["168.10.10.2"]}

"""
import hashlib
import json
import os

from bson import json_util

from phishcamp.exceptions import EnrichmentUnavailable
from phishcamp.utils.convert import Serializer

#: Record fields an enrichment source may fill in.
ENRICHABLE_FIELDS = (
    'ips',
    'dns',
    'reverse_dns',
    'geoip',
    'country_code',
    'target',
    'html_text',
    'ocr_text_own',
    'ocr_text_pt',
    'tag_counts',
)


def fixture_name(url):
    return '%s.json' % hashlib.sha256(url.encode('utf-8')).hexdigest()


class FixtureBase(object):
    """
    FixtureBase

    Currently only holds the fixture directory
    """

    def __init__(self, directory):

        self.directory = directory

    def path_for(self, url):
        return os.path.join(self.directory, fixture_name(url))


class CreateFixture(FixtureBase):
    """
    Writes enrichment fixtures for a list of records.

    Only fields that are set on the record are written, so a fixture never
    claims a value the source did not have.
    """

    def create(self, records, fields=ENRICHABLE_FIELDS):
        """
        Create one fixture file per record; returns the number written.
        """
        os.makedirs(self.directory, exist_ok=True)
        serializer = Serializer()
        written = 0

        for record in records:
            document = {'url': record.url}
            for name in fields:
                value = getattr(record, name)
                if value is None or (isinstance(value, (str, dict, frozenset)) and not value):
                    continue
                document[name] = value

            with open(self.path_for(record.url), 'w', encoding='utf-8') as fixture_file_obj:
                fixture_file_obj.write(json.dumps(serializer.convert(document),
                                                  default=json_util.default,
                                                  indent=2, sort_keys=True))
            written += 1

        return written


class LoadFixture(FixtureBase):
    """
    Loads the enrichment fixture for one URL.

    """

    def load(self, url):
        """
        Load the fixture for ``url``; raises ``EnrichmentUnavailable`` when the
        directory or the file is missing or unreadable.
        """
        path = self.path_for(url)
        try:
            with open(path, 'r', encoding='utf-8') as fixture_file_obj:
                document = json.load(fixture_file_obj, object_hook=json_util.object_hook)
        except FileNotFoundError:
            raise EnrichmentUnavailable('No fixture for %s (%s)' % (url, path))
        except (OSError, ValueError) as error:
            raise EnrichmentUnavailable('Unreadable fixture for %s: %s' % (url, error))

        if document.get('url') not in (None, url):
            raise EnrichmentUnavailable('Fixture %s belongs to %s, not %s'
                                        % (path, document.get('url'), url))

        return {name: document[name] for name in ENRICHABLE_FIELDS if name in document}
