"""
basecommand.py

Base classes for the ``phishcamp`` subcommands. Options are declared as an
``option_list`` of ``make_option`` tuples and handed to ``argparse``.
"""
import argparse
import logging

from phishcamp.exceptions import PhishcampError
from phishcamp.report import exit_code_for

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s | %(levelname)s | %(name)s | %(message)s'
VERBOSITY_LEVELS = {0: logging.ERROR, 1: logging.WARNING, 2: logging.INFO, 3: logging.DEBUG}


def make_option(*flags, **kwargs):
    return (flags, kwargs)


class CommandError(PhishcampError):
    """
    A subcommand was called with arguments it cannot work with.
    """


class BaseCommand(object):
    #: One line shown by ``phishcamp help``
    help = ''

    #: Positional arguments, as ``(name, help)`` pairs, optionally followed
    #: by a dict of extra ``add_argument`` keywords
    args = ()

    option_list = (
    make_option('-v', '--verbosity',
        dest='verbosity',
        type=int,
        choices=sorted(VERBOSITY_LEVELS),
        default=2,
        help='0 errors only, 1 warnings, 2 progress (default), 3 debug'),
    )

    def create_parser(self, prog_name, subcommand):
        parser = argparse.ArgumentParser(prog='%s %s' % (prog_name, subcommand),
                                         description=self.help)
        for name, help_text, *extra in self.args:
            parser.add_argument(name, help=help_text, **(extra[0] if extra else {}))
        for flags, kwargs in self.option_list:
            parser.add_argument(*flags, **kwargs)
        return parser

    def run_from_argv(self, argv, prog_name='phishcamp', subcommand=None):
        """
        Parse ``argv`` (without the subcommand name) and run the command.
        Returns the exit code.
        """
        parser = self.create_parser(prog_name, subcommand or self.__module__.rsplit('.', 1)[-1])
        options = vars(parser.parse_args(argv))
        return self.execute(**options)

    def execute(self, **options):
        logging.basicConfig(format=LOG_FORMAT,
                            level=VERBOSITY_LEVELS.get(options.get('verbosity', 2), logging.INFO),
                            force=True)
        try:
            self.handle(**options)
        except (PhishcampError, OSError) as error:
            logger.error('%s', error)
            return 2 if isinstance(error, CommandError) else exit_code_for(error)
        return 0

    def handle(self, **options):
        raise NotImplementedError('Subcommands must implement handle()')


class PhishcampCommand(BaseCommand):
    """
    Commands that run the detection pipeline over a dataset.
    """
    args = (('input_file', 'JSON-lines dataset of URL records (same as --input)', {'nargs': '?'}), )

    option_list = BaseCommand.option_list + (
    make_option('--input',
        dest='input_path',
        default=None,
        help='JSON-lines dataset of URL records'),
    make_option('-o', '--output-dir',
        dest='output_dir',
        default='phishcamp-out',
        help='Directory the results are written to'),
    make_option('--signals',
        dest='signals',
        default=None,
        help='Comma separated active signals (default: all)'),
    make_option('--delta',
        dest='delta',
        type=float,
        default=None,
        help='Textual similarity threshold (default 0.6)'),
    make_option('--delta-ip',
        dest='delta_ip',
        type=int,
        default=None,
        help='Shared IPs above which the IP signal adds 2 (default 3)'),
    make_option('--delta-time',
        dest='delta_time_hours',
        type=float,
        default=None,
        help='Submission-time window in hours (default 72)'),
    make_option('--ocr-sim-threshold',
        dest='ocr_sim_threshold',
        type=float,
        default=None,
        help='Similarity above which two OCR texts are treated as one (default 0.8)'),
    make_option('--error-dict', '--error-dictionary',
        dest='error_dictionary',
        default=None,
        help='Error-page phrase file, one phrase per line'),
    make_option('--error-token-threshold',
        dest='error_token_threshold',
        type=float,
        default=None,
        help='Share of error vocabulary that marks a text as an error page (default 0.5)'),
    make_option('--drop-short-tokens',
        dest='drop_short_tokens',
        action='store_true',
        default=None,
        help='Drop single-letter word tokens (default)'),
    make_option('--keep-short-tokens',
        dest='drop_short_tokens',
        action='store_false',
        default=None,
        help='Keep single-letter word tokens'),
    make_option('--drop-url-scheme',
        dest='drop_url_scheme',
        action='store_true',
        default=None,
        help='Drop http, https and www url tokens'),
    make_option('--drop-all-error-text',
        dest='drop_all_error_text',
        action='store_true',
        default=None,
        help='Drop records whose page texts are all error pages'),
    make_option('--structural-threshold',
        dest='structural_threshold',
        type=float,
        default=None,
        help='Proportional tag distance below which pages are linked (default 0.2)'),
    make_option('--layers',
        dest='layers',
        choices=['structural', 'contextual', 'both'],
        default=None,
        help='Layers producing the final campaigns (default both)'),
    make_option('--contextual-scope',
        dest='contextual_scope',
        choices=['global', 'per-structural-cluster'],
        default=None,
        help='Run contextual detection globally or inside each structural cluster'),
    make_option('--cut-distance',
        dest='cut_distance',
        type=float,
        default=None,
        help='Cosine distance at which the component dendrogram is cut (default 0.5)'),
    make_option('--linkage',
        dest='linkage',
        choices=['average', 'complete', 'single'],
        default=None,
        help='Linkage of the component clustering (default average)'),
    make_option('--resolution',
        dest='resolution',
        type=float,
        default=None,
        help='Modularity resolution (default 1.0)'),
    make_option('--community-seed',
        dest='community_seed',
        type=int,
        default=None,
        help='Seed of the community detection (default 0)'),
    make_option('--zero-weight-eps',
        dest='zero_weight_eps',
        type=float,
        default=None,
        help='Weight given to edges no signal contributed to (default 0.01)'),
    make_option('--exact-max-nodes',
        dest='exact_max_nodes',
        type=int,
        default=None,
        help='Largest graph partitioned by exhaustive search (default 8)'),
    make_option('--coherence-eps',
        dest='coherence_eps',
        type=float,
        default=None,
        help='Floor of the inter-campaign similarity (default 0.001)'),
    make_option('--cohmap-threshold',
        dest='cohmap_threshold',
        type=float,
        default=None,
        help='Coherence reported as well separated above this value (default 500)'),
    make_option('--emit-svg',
        dest='emit_svg',
        action='store_true',
        default=None,
        help='Also draw the coherence map as SVG'),
    make_option('--enrichment-dir',
        dest='enrichment_dir',
        default=None,
        help='Directory of enrichment fixtures'),
    make_option('--mongo-host',
        dest='mongo_host',
        default=None,
        help='MongoDB host of the enrichment collection'),
    make_option('--mongo-port',
        dest='mongo_port',
        type=int,
        default=None,
        help='MongoDB port'),
    make_option('-d', '--mongo-db',
        dest='mongo_db',
        default=None,
        help='MongoDB database name'),
    make_option('-c', '--mongo-collection',
        dest='mongo_collection',
        default=None,
        help='MongoDB collection holding one enrichment document per url'),
    make_option('--mongo-retries',
        dest='mongo_retries',
        type=int,
        default=None,
        help='Reconnect attempts after a dropped connection (default 2)'),
    make_option('--workers',
        dest='max_workers',
        type=int,
        default=None,
        help='Enrichment worker threads (default 4)'),
    )

    def config(self, **options):
        from phishcamp.report import PipelineConfig

        input_file = options.pop('input_file', None)
        if input_file and options.get('input_path') and input_file != options['input_path']:
            raise CommandError('Two datasets given: %s and --input %s' % (input_file, options['input_path']))
        options['input_path'] = options.get('input_path') or input_file
        if not options['input_path']:
            raise CommandError('No dataset given; pass it as --input PATH')
        return PipelineConfig.from_options(options)


EXPORT_OPTIONS = (
make_option('--export-dot',
    dest='export_dot',
    metavar='DIR',
    default=None,
    help='Write every weighted URL graph as DOT into DIR'),
make_option('--export-graphml',
    dest='export_graphml',
    metavar='DIR',
    default=None,
    help='Write every weighted URL graph as GraphML into DIR'),
)
