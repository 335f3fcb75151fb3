"""OK vs RK on the borehole function: 80 uniform points in [0,1]^8, with leave-one-out RMSE."""

import sys

from _common import run

if __name__ == "__main__":
    sys.exit(run("borehole", __doc__, reps=10))
