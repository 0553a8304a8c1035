"""Run the command-line interface with ``python -m embedlouvain``."""

from .cli import main

raise SystemExit(main())
