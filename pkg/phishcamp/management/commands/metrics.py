"""
metrics.py

Signal strengths and the coherence map of the campaigns found in a dataset.
"""
from phishcamp.management.basecommand import PhishcampCommand
from phishcamp.report import run_pipeline


class Command(PhishcampCommand):
    option_list = PhishcampCommand.option_list
    help = "Write the signal strength table and the coherence map of a dataset's campaigns."

    def handle(self, **options):
        artifacts = run_pipeline(self.config(**options), outputs=frozenset(['sigs', 'cohmap']))
        for name in ('sigs', 'cohmap', 'cohmap_svg'):
            if name in artifacts.paths:
                print(artifacts.paths[name])
