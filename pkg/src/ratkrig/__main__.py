import sys

from ratkrig.cli import main

sys.exit(main())
