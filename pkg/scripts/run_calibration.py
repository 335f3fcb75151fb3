"""KOH vs RK-KOH estimates of eta over a length-scale grid, 20 noise seeds."""

import sys

from _common import run

if __name__ == "__main__":
    sys.exit(run("calibration", __doc__))
