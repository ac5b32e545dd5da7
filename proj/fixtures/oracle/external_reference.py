#!/usr/bin/env python3
"""One-off external reference for the canonical-3 fixture.

Feeds the committed per-study (effect, variance) pairs for canonical-3.csv
to statsmodels' meta-analysis routines and freezes the pooled fixed and
DerSimonian-Laird random results under fixtures/expected/.

Why statsmodels and why estimate-level input:

* No R interpreter is available in the build environment, so the R `meta`
  package cannot be run here. statsmodels is the established Python
  implementation of inverse-variance fixed/DL-random pooling.
* Established packages disagree on the SMD *variance* convention at the
  per-study stage: statsmodels' effectsize_smd (like R meta's default
  metacont) approximates var(g) with g^2/(2(n-3.94)), while this toolkit
  uses the exact J^2 * var(d) form. Those conventions differ by far more
  than 1e-4, so the external check is made on the pooled stage, which is
  convention-free: given committed (effect, variance) inputs, fixed and
  DL-random pooling must agree across implementations.

The per-study inputs below were produced by oracle.py (Hedges g with
J^2 * var(d) variance) for canonical-3.csv and are restated literally so
this script stays independent of oracle.py's code paths.

Run once, commit the output, never regenerate silently:

    python3 fixtures/oracle/external_reference.py
"""

import json
import os

import numpy as np
import statsmodels
from statsmodels.stats.meta_analysis import combine_effects

HERE = os.path.dirname(os.path.abspath(__file__))
EXPECTED = os.path.join(os.path.dirname(HERE), "expected")

# canonical-3.csv per-study Hedges g and variance, from fixtures/expected/
# canonical-3.json (oracle.py output).
EFFECTS = [0.3715852848186115, -0.7801826551087623, 0.4807834438292884]
VARIANCES = [0.08566062410150412, 0.10918212099943829, 0.06919502773773295]
LABELS = ["Alpha 1999", "Beta 2003", "Gamma 2008"]


def main():
    res = combine_effects(np.array(EFFECTS), np.array(VARIANCES),
                          method_re="dl")
    frame = res.summary_frame()
    fixed = frame.loc["fixed effect"]
    rand = frame.loc["random effect"]

    payload = {
        "name": "canonical-3-reference",
        "inputs": {
            "labels": LABELS,
            "effects": EFFECTS,
            "variances": VARIANCES,
        },
        "reference": {
            "fixed": {"effect": float(fixed["eff"]),
                      "se": float(fixed["sd_eff"])},
            "random": {"effect": float(rand["eff"]),
                       "se": float(rand["sd_eff"])},
            "tau2": float(res.tau2),
            "Q": float(res.q),
        },
        "provenance": (
            "statsmodels %s, statsmodels.stats.meta_analysis.combine_effects("
            "effects, variances, method_re='dl') run once on 2026-08-10; "
            "inputs are the committed canonical-3 per-study Hedges g values. "
            "The R `meta` package was unavailable in the build environment; "
            "pooled-stage comparison avoids the cross-package SMD variance "
            "convention mismatch described in this script's docstring."
            % statsmodels.__version__),
        "tolerance": 1e-4,
    }

    path = os.path.join(EXPECTED, "canonical-3-reference.json")
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    print("wrote", path)


if __name__ == "__main__":
    main()
