import sys

from ovals.cli import main

sys.exit(main())
