import sys

from gaitphase.cli import main

sys.exit(main())
