"""UK vs rational UK with mean beta0 + beta1 (x - 0.5) on sin(2x), n = 30."""

import sys

from _common import run

if __name__ == "__main__":
    sys.exit(run("universal-sin2x", __doc__))
