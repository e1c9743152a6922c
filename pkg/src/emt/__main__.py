import sys

from emt.cli import main

sys.exit(main())
