"""
detect.py

Runs the whole pipeline and writes every result file.
"""
from phishcamp.management.basecommand import EXPORT_OPTIONS, PhishcampCommand, make_option
from phishcamp.report import run_pipeline


class Command(PhishcampCommand):
    option_list = PhishcampCommand.option_list + EXPORT_OPTIONS + (
    make_option('--truth',
        dest='truth_path',
        default=None,
        help='Ground truth (url -> campaign id) to score the campaigns against'),
    make_option('--dot',
        dest='export_dot',
        action='store_const',
        const=True,
        help='Write DOT graphs into <output-dir>/graphs'),
    make_option('--graphml',
        dest='export_graphml',
        action='store_const',
        const=True,
        help='Write GraphML graphs into <output-dir>/graphs'),
    )
    help = "Detect phishing campaigns in a dataset of URL records."

    def handle(self, **options):
        artifacts = run_pipeline(self.config(**options))
        print('%s campaigns written to %s' % (len(artifacts.campaigns), artifacts.paths.get('campaigns')))
