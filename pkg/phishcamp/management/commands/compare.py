"""
compare.py

Compares a structural-only run with a combined run over the same dataset.
"""
from phishcamp.management.basecommand import BaseCommand, make_option
from phishcamp.report import compare_layers, load_campaigns


class Command(BaseCommand):
    args = (
        ('structural', 'campaigns.json of a run with --layers structural'),
        ('combined', 'campaigns.json of a run with --layers both'),
    )
    option_list = BaseCommand.option_list + (
    make_option('--out',
        dest='out',
        default='comparison.csv',
        help='Where to write the comparison table (default comparison.csv)'),
    )
    help = "Tabulate campaign counts of the structural and the combined layer."

    def handle(self, **options):
        table = compare_layers(load_campaigns(options['structural']), load_campaigns(options['combined']))
        table.to_csv(options['out'], index=False, encoding='utf-8')
        print(table.to_string(index=False))
