#!/usr/bin/env python3
"""
Vehicle Visibility
Main entry point for the command-line application
"""

import sys
from typing import List, Optional

from cli import HANDLERS, build_parser
from config.config_manager import ConfigManager
from utils.constants import EXIT_INPUT_ERROR, EXIT_INTERNAL_ERROR
from utils.errors import InputError, VisibilityError
from utils.logger import setup_logger, log_exception

# Set up logging
logger = setup_logger(__name__)


class VisibilityApp:
    """Main application class"""

    def __init__(self, config_path: str = 'config.ini'):
        self.config_manager = ConfigManager(config_path)
        logger.debug("Vehicle visibility app initialized")

    def main(self, command: str, args) -> int:
        """Dispatch one sub-command and translate failures into exit codes"""
        logger.info(f"Starting command: {command}")
        try:
            code = HANDLERS[command](args, self.config_manager)
            logger.info(f"Command {command} finished with exit code {code}")
            return code
        except InputError as e:
            logger.error(f"{command}: {e}")
            print(f"error: {e}", file=sys.stderr)
            return EXIT_INPUT_ERROR
        except OSError as e:
            logger.error(f"{command}: {e}")
            print(f"error: {e}", file=sys.stderr)
            return EXIT_INPUT_ERROR
        except VisibilityError as e:
            log_exception(logger, e, command)
            print(f"error: {e}", file=sys.stderr)
            return e.exit_code
        except Exception as e:
            log_exception(logger, e, f"unexpected failure in {command}")
            print(f"internal error: {e}", file=sys.stderr)
            return EXIT_INTERNAL_ERROR


def main(argv: Optional[List[str]] = None) -> int:
    """Application entry point"""
    args = build_parser().parse_args(argv)
    app = VisibilityApp(args.config)
    return app.main(args.command, args)


if __name__ == "__main__":
    sys.exit(main())
