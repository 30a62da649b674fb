"""
ingest.py

Validates, enriches and filters a dataset and writes it back normalized.
"""
import logging

from phishcamp.management.basecommand import CommandError, PhishcampCommand, make_option
from phishcamp.ingest import load_error_dictionary, write_dataset
from phishcamp.report import prepare_records

logger = logging.getLogger(__name__)


class Command(PhishcampCommand):
    option_list = PhishcampCommand.option_list + (
    make_option('--out',
        dest='out',
        default=None,
        help='Where to write the normalized JSON-lines dataset'),
    )
    help = "Validate and enrich a dataset, writing normalized JSON lines."

    def handle(self, **options):
        out = options.pop('out')
        if not out:
            raise CommandError('ingest needs --out')

        config = self.config(**options)
        dictionary = load_error_dictionary(config.error_dictionary, config.error_token_threshold)
        manifest = {'counts': {}}
        records = prepare_records(config, dictionary, {}, manifest)
        write_dataset(records, out)
        logger.info('Wrote %s records to %s', len(records), out)
        print('%s records written to %s' % (len(records), out))
