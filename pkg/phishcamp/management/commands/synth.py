"""
synth.py

Generates a synthetic dataset with planted campaigns.
"""
import dataclasses
import logging

from phishcamp.ingest import write_dataset
from phishcamp.management.basecommand import BaseCommand, CommandError, make_option
from phishcamp.synth import SynthSpec, generate, load_synth_spec, strip_enrichment, write_truth
from phishcamp.utils.fixtures import CreateFixture

logger = logging.getLogger(__name__)


class Command(BaseCommand):
    option_list = BaseCommand.option_list + (
    make_option('--spec',
        dest='spec',
        default=None,
        help='JSON file of generator parameters (defaults when omitted)'),
    make_option('--out',
        dest='out',
        default=None,
        help='Where to write the JSON-lines dataset'),
    make_option('--truth',
        dest='truth',
        default=None,
        help='Where to write the ground truth (url -> campaign id)'),
    make_option('--fixtures',
        dest='fixtures',
        default=None,
        help='Write the enrichment data as fixtures here and leave it out of the dataset'),
    make_option('--seed',
        dest='seed',
        type=int,
        default=None,
        help='Override the seed of the spec'),
    )
    help = "Generate a synthetic dataset with planted ground-truth campaigns."

    def handle(self, **options):
        if not options['out']:
            raise CommandError('synth needs --out')

        spec = load_synth_spec(options['spec']) if options['spec'] else SynthSpec()
        if options['seed'] is not None:
            spec = dataclasses.replace(spec, seed=options['seed'])

        records, truth = generate(spec)

        if options['fixtures']:
            written = CreateFixture(options['fixtures']).create(records)
            logger.info('Wrote %s enrichment fixtures to %s', written, options['fixtures'])
            records = strip_enrichment(records)

        write_dataset(records, options['out'])
        if options['truth']:
            write_truth(truth, options['truth'])
        print('%s records written to %s' % (len(records), options['out']))
