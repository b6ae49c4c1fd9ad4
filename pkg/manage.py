#!/usr/bin/env python
"""Command-line entry point: simulate, fit, test and experiment."""
import sys


def main():
    try:
        from harness.cli import main as run
    except ImportError as exc:
        raise ImportError(
            "Couldn't import the pagof packages. Are the requirements installed "
            "and is this directory on your PYTHONPATH?"
        ) from exc
    return run(sys.argv[1:])


if __name__ == '__main__':
    sys.exit(main())
