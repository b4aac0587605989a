#!/usr/bin/env python3
"""Regenerates tests/data/cvss3_oracle.tsv.

Scores every CVSS v3.0 base vector with the `cvss` package (decimal
arithmetic, independent of the C++ scorer). Run once; the output is frozen.
"""
import itertools
import sys

import cvss

DOMAINS = [("AV", "NALP"), ("AC", "LH"), ("PR", "NLH"), ("UI", "NR"),
           ("S", "UC"), ("C", "NLH"), ("I", "NLH"), ("A", "NLH")]


def main(out):
    for combo in itertools.product(*[values for _, values in DOMAINS]):
        vector = "/".join(f"{k}:{v}" for (k, _), v in zip(DOMAINS, combo))
        score = cvss.CVSS3("CVSS:3.0/" + vector).base_score
        out.write(f"{vector}\t{score}\n")


if __name__ == "__main__":
    main(sys.stdout)
