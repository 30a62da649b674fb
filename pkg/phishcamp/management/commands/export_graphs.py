"""
export_graphs.py

Writes the weighted URL graphs of a dataset, nodes labeled with their
campaign component.
"""
from phishcamp.management.basecommand import EXPORT_OPTIONS, CommandError, PhishcampCommand, make_option
from phishcamp.report import run_pipeline


class Command(PhishcampCommand):
    option_list = PhishcampCommand.option_list + EXPORT_OPTIONS + (
    make_option('--format',
        dest='graph_format',
        choices=['dot', 'graphml', 'both'],
        default=None,
        help='Graph file format written into <output-dir>/graphs (default both, '
             'unless --export-dot or --export-graphml name the directories)'),
    )
    help = "Export the labeled weighted URL graphs as DOT and/or GraphML."

    def handle(self, **options):
        graph_format = options.pop('graph_format')
        if graph_format or not (options.get('export_dot') or options.get('export_graphml')):
            graph_format = graph_format or 'both'
            options['export_dot'] = options.get('export_dot') or graph_format in ('dot', 'both')
            options['export_graphml'] = options.get('export_graphml') or graph_format in ('graphml', 'both')
        if options.get('layers') == 'structural':
            raise CommandError('URL graphs only exist in the contextual layer')

        artifacts = run_pipeline(self.config(**options), outputs=frozenset(['graphs']))
        print('%s graph files written to %s' % (artifacts.manifest.get('graph_files', 0),
                                                artifacts.paths.get('graphs')))
