#!/usr/bin/env python3
"""
Command-line wrapper for running Hankel Ladder from a source checkout.
"""

import sys
from pathlib import Path

# Add parent directory to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from hankel_ladder.cli import main


if __name__ == "__main__":
    main()
