"""Allow `python -m femtokit` as an alternative to the console script."""

import sys

from .harness.cli import main

sys.exit(main())
