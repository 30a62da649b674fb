"""
cli.py

The ``phishcamp`` command: dispatches to the subcommands in
``phishcamp.management.commands``.
"""
import importlib
import sys

COMMANDS = ('ingest', 'detect', 'metrics', 'compare', 'synth', 'export-graphs')


def load_command(name):
    module = importlib.import_module('phishcamp.management.commands.%s' % name.replace('-', '_'))
    return module.Command()


def usage():
    lines = ['usage: phishcamp <subcommand> [options]', '', 'Subcommands:']
    for name in COMMANDS:
        lines.append('  %-14s %s' % (name, load_command(name).help))
    lines.append('')
    lines.append("Run 'phishcamp <subcommand> --help' for the options of a subcommand.")
    return '\n'.join(lines)


def main(argv=None):
    """
    Entry point; returns the exit code (0 success, 2 input error, 3 internal
    error).
    """
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv or argv[0] in ('help', '-h', '--help'):
        print(usage())
        return 0

    name = argv[0].replace('_', '-')
    if name not in COMMANDS:
        sys.stderr.write("Unknown subcommand '%s'\n\n%s\n" % (argv[0], usage()))
        return 2

    try:
        return load_command(name).run_from_argv(argv[1:], subcommand=name)
    except SystemExit as exit_obj:
        # argparse rejected the arguments
        return 2 if exit_obj.code else 0


if __name__ == '__main__':
    sys.exit(main())
