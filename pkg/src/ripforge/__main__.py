import sys

from ripforge.cli import main

sys.exit(main())
