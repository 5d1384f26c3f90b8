# Copyright 2026 The kfree-points Authors
# See LICENSE file for licensing details.

"""Entry point for `python -m kfree_points`."""

import sys

from kfree_points.cli import main

if __name__ == "__main__":
    sys.exit(main())
