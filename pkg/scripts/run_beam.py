"""OK vs RK on the beam deflection curve: n = 11, gaussian and rational-quadratic kernels."""

import sys

from _common import run

if __name__ == "__main__":
    sys.exit(run("beam", __doc__))
