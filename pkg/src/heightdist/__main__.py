import sys

from heightdist.cli import main

sys.exit(main())
