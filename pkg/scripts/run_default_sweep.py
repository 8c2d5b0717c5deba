#!/usr/bin/env python3
"""Run the default verification campaigns and write CSV reports.

Produces verify-lemma, verify-generalized and oracle-check reports over the
default grids into the directory given as the first argument (default: the
current directory, or MMINF_OUT_DIR if set).
"""

import os
import sys

from mminf.cli import main


def run():
    if len(sys.argv) > 1:
        os.environ["MMINF_OUT_DIR"] = sys.argv[1]
    codes = {}
    codes["sweep"] = main(["sweep", "--kmax", "20", "--nmax", "40"])
    codes["verify-generalized"] = main(["verify-generalized"])
    codes["oracle-check"] = main(["oracle-check"])
    for name, code in codes.items():
        print(f"{name}: exit {code}")
    return max(codes.values())


if __name__ == "__main__":
    sys.exit(run())
