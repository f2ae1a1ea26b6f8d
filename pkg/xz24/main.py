"""Console entry point for the ``xz24`` command."""

from __future__ import annotations

import sys
from typing import Optional, Sequence

from .cli.commands import COMMANDS, EXIT_STAGE_ERROR
from .cli.parser import build_parser
from .core.config import get_settings
from .core.errors import StageError, XZ24Error
from .core.log import configure_logging


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Parse arguments, configure logging, and dispatch to a subcommand."""

    args = build_parser().parse_args(argv)
    configure_logging(get_settings().log_level, args.verbose)

    try:
        return COMMANDS[args.command](args)
    except StageError as exc:
        print(f"error[{exc.stage}]: {exc.cause}", file=sys.stderr)
    except (XZ24Error, OSError, ValueError) as exc:
        print(f"error[{args.command}]: {exc}", file=sys.stderr)
    return EXIT_STAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
