#!/usr/bin/env python3
"""Straight-line oracle for the fixture datasets.

Evaluates every formula the toolkit implements, in the dumbest possible
way, and freezes the results under fixtures/expected/.  This script shares
no code with the C++ implementation; it exists so every golden number in
the test suite traces to an independent evaluation.

Distribution functions come from mpmath at 50 digits of working precision.

Run manually from the repository root:

    python3 fixtures/oracle/oracle.py

Outputs are committed. Do not regenerate silently; if a formula changes,
rerun, diff, and review every affected expectation.
"""

import json
import math
import os
import random

import mpmath

mpmath.mp.dps = 50

HERE = os.path.dirname(os.path.abspath(__file__))
FIXTURES = os.path.dirname(HERE)
EXPECTED = os.path.join(FIXTURES, "expected")

CRIT95 = 1.959964  # fixed critical value used throughout the toolkit


def fmt(x):
    """17 significant digits: enough to round-trip a double exactly."""
    return float.__float__(float(mpmath.nstr(mpmath.mpf(x), 17)))


def normal_cdf(x):
    return mpmath.mpf(1) / 2 * mpmath.erfc(-mpmath.mpf(x) / mpmath.sqrt(2))


def chi2_sf(x, df):
    if df == 0:
        return mpmath.mpf(0 if x > 0 else 1)
    return mpmath.gammainc(mpmath.mpf(df) / 2, mpmath.mpf(x) / 2, mpmath.inf,
                           regularized=True)


# ---------------------------------------------------------------- effects

def smd_cohen(n1, m1, sd1, n2, m2, sd2):
    sp = mpmath.sqrt(((n1 - 1) * mpmath.mpf(sd1) ** 2 +
                      (n2 - 1) * mpmath.mpf(sd2) ** 2) / (n1 + n2 - 2))
    d = (mpmath.mpf(m1) - mpmath.mpf(m2)) / sp
    var = mpmath.mpf(n1 + n2) / (n1 * n2) + d ** 2 / (2 * (n1 + n2))
    return d, var


def smd_hedges(n1, m1, sd1, n2, m2, sd2):
    d, var_d = smd_cohen(n1, m1, sd1, n2, m2, sd2)
    j = 1 - mpmath.mpf(3) / (4 * (n1 + n2 - 2) - 1)
    return j * d, j * j * var_d


def log_odds_ratio(e1, t1, e2, t2):
    a, b, c, d = mpmath.mpf(e1), mpmath.mpf(t1 - e1), mpmath.mpf(e2), mpmath.mpf(t2 - e2)
    if a == 0 or b == 0 or c == 0 or d == 0:
        a, b, c, d = a + mpmath.mpf("0.5"), b + mpmath.mpf("0.5"), \
                     c + mpmath.mpf("0.5"), d + mpmath.mpf("0.5")
    effect = mpmath.log(a * d / (b * c))
    var = 1 / a + 1 / b + 1 / c + 1 / d
    return effect, var


def log_variance_ratio(n1, sd1, n2, sd2):
    effect = mpmath.log(mpmath.mpf(sd1) / mpmath.mpf(sd2))
    var = mpmath.mpf(1) / (2 * (n1 - 1)) + mpmath.mpf(1) / (2 * (n2 - 1))
    return effect, var


# ---------------------------------------------------------------- pooling

def pooled_block(effect, se):
    z = effect / se
    p = 2 * (1 - normal_cdf(abs(z)))
    return {
        "effect": fmt(effect),
        "se": fmt(se),
        "ci_low": fmt(effect - CRIT95 * se),
        "ci_high": fmt(effect + CRIT95 * se),
        "z": fmt(z),
        "p": fmt(p),
    }


def pool(ys, vs):
    ys = [mpmath.mpf(y) for y in ys]
    vs = [mpmath.mpf(v) for v in vs]
    k = len(ys)
    w = [1 / v for v in vs]
    sw = sum(w)
    fixed_effect = sum(wi * yi for wi, yi in zip(w, ys)) / sw
    fixed_se = mpmath.sqrt(1 / sw)

    q = sum(wi * (yi - fixed_effect) ** 2 for wi, yi in zip(w, ys))
    if k == 1:
        q = mpmath.mpf(0)  # identically zero; drop the (w*y)/w - y residue
    df = k - 1
    if k >= 2:
        denom = sw - sum(wi * wi for wi in w) / sw
        tau2 = max(mpmath.mpf(0), (q - df) / denom)
    else:
        tau2 = mpmath.mpf(0)
    i2 = max(mpmath.mpf(0), (q - df) / q) * 100 if q > 0 else mpmath.mpf(0)
    p_q = mpmath.mpf(1) if k == 1 else chi2_sf(q, df)

    ws = [1 / (v + tau2) for v in vs]
    sws = sum(ws)
    random_effect = sum(wi * yi for wi, yi in zip(ws, ys)) / sws
    random_se = mpmath.sqrt(1 / sws)

    return {
        "fixed": pooled_block(fixed_effect, fixed_se),
        "random": pooled_block(random_effect, random_se),
        "heterogeneity": {
            "Q": fmt(q),
            "df": df,
            "tau2": fmt(tau2),
            "I2": fmt(i2),
            "p_Q": fmt(p_q),
        },
    }


# ---------------------------------------------------------------- fixtures

def continuous_expected(name, rows, measure, csv_note):
    """rows: (label, n1, m1, sd1, n2, m2, sd2)"""
    fn = smd_hedges if measure == "smd_hedges" else \
         smd_cohen if measure == "smd_cohen" else log_variance_ratio
    studies = []
    ys, vs = [], []
    for label, n1, m1, sd1, n2, m2, sd2 in rows:
        if measure == "log_variance_ratio":
            y, v = fn(n1, sd1, n2, sd2)
        else:
            y, v = fn(n1, m1, sd1, n2, m2, sd2)
        studies.append({"label": label, "effect": fmt(y), "variance": fmt(v),
                        "n_total": n1 + n2})
        ys.append(y)
        vs.append(v)
    out = {"name": name, "measure": measure, "studies": studies,
           "provenance": csv_note}
    out.update(pool(ys, vs))
    return out


def binary_expected(name, rows, csv_note):
    """rows: (label, e1, t1, e2, t2)"""
    studies = []
    ys, vs = [], []
    for label, e1, t1, e2, t2 in rows:
        y, v = log_odds_ratio(e1, t1, e2, t2)
        studies.append({"label": label, "effect": fmt(y), "variance": fmt(v),
                        "n_total": t1 + t2})
        ys.append(y)
        vs.append(v)
    out = {"name": name, "measure": "log_odds_ratio", "studies": studies,
           "provenance": csv_note}
    out.update(pool(ys, vs))
    return out


def estimate_expected(name, ys, vs, note):
    out = {"name": name, "inputs": {"effects": [fmt(y) for y in ys],
                                    "variances": [fmt(v) for v in vs]},
           "provenance": note}
    out.update(pool(ys, vs))
    return out


def write_json(name, payload):
    path = os.path.join(EXPECTED, name + ".json")
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    print("wrote", path)


def write_csv(name, text, subdir=None):
    path = os.path.join(FIXTURES, subdir, name) if subdir else \
        os.path.join(FIXTURES, name)
    with open(path, "w") as fh:
        fh.write(text)
    print("wrote", path)


CONT_HEADER = ("study,patients n,patients mean,patients sd,"
               "controls n,controls mean,controls sd\n")


def cont_csv(rows):
    return CONT_HEADER + "".join(
        f"{label},{n1},{m1},{sd1},{n2},{m2},{sd2}\n"
        for label, n1, m1, sd1, n2, m2, sd2 in rows)


BIN_HEADER = "study,events treated,total treated,events control,total control\n"


def bin_csv(rows):
    return BIN_HEADER + "".join(
        f"{label},{e1},{t1},{e2},{t2}\n" for label, e1, t1, e2, t2 in rows)


def main():
    os.makedirs(EXPECTED, exist_ok=True)

    # Estimate-level fixtures (pooling kernel only).
    write_json("homogeneous-2", estimate_expected(
        "homogeneous-2", [0.5, 0.5], [0.04, 0.04],
        "two identical studies; hand check: fixed=random=0.5, Q=0"))
    write_json("hetero-2", estimate_expected(
        "hetero-2", [0.0, 1.0], [0.1, 0.1],
        "hand check: w=10 each, Q=5, tau2=(5-1)/(20-200/20)=0.4, I2=80, "
        "random weights 1/(0.1+0.4)=2, random se=sqrt(1/4)=0.5"))

    # Study-level fixtures.
    smd_basic = [("Basic 2000", 10, 1.0, 1.0, 10, 0.0, 1.0)]
    write_csv("smd-basic.csv", cont_csv(smd_basic))
    write_json("smd-basic", continuous_expected(
        "smd-basic", smd_basic, "smd_hedges",
        "hand check: d=1.0, var_d=20/100+1/40=0.225, J=1-3/71"))
    write_json("smd-basic-cohen", continuous_expected(
        "smd-basic-cohen", smd_basic, "smd_cohen",
        "hand check: d=(1-0)/1=1.0, var=0.225"))

    continuous_2 = [("Smith 2001", 12, 4.1, 0.9, 14, 3.8, 1.1),
                    ("Jones 2004", 20, 5.0, 1.2, 18, 4.4, 1.0)]
    write_csv("continuous-2.csv", cont_csv(continuous_2))
    write_json("continuous-2", continuous_expected(
        "continuous-2", continuous_2, "smd_hedges",
        "golden-plot fixture; values from this script only"))
    write_json("continuous-2-lvr", continuous_expected(
        "continuous-2-lvr", continuous_2, "log_variance_ratio",
        "same fixture pooled on ln(sd1/sd2)"))

    binary_2 = [("Adams 1999", 12, 40, 6, 38),
                ("Baker 2005", 9, 55, 14, 60)]
    write_csv("binary-2.csv", bin_csv(binary_2))
    write_json("binary-2", binary_expected(
        "binary-2", binary_2, "log odds ratio fixture, no zero cells"))

    binary_zero = [("Zero 2010", 0, 10, 5, 10)]
    write_csv("binary-zero.csv", bin_csv(binary_zero))
    write_json("binary-zero", binary_expected(
        "binary-zero", binary_zero,
        "hand check: corrected a=0.5 b=10.5 c=5.5 d=5.5, effect=ln(1/21)"))

    canonical_3 = [("Alpha 1999", 22, 103.5, 9.2, 24, 100.1, 8.8),
                   ("Beta 2003", 18, 95.4, 10.1, 20, 103.2, 9.5),
                   ("Gamma 2008", 30, 107.0, 11.3, 28, 101.7, 10.4)]
    write_csv("canonical-3.csv", cont_csv(canonical_3))
    write_json("canonical-3", continuous_expected(
        "canonical-3", canonical_3, "smd_hedges",
        "external-reference dataset; see canonical-3-reference.json"))

    # Randomized small fixtures, seeded so the files are reproducible.
    rng = random.Random(20260810)
    for i in range(1, 7):
        k = rng.randint(2, 8)
        rows = []
        for s in range(k):
            n1 = rng.randint(8, 40)
            n2 = rng.randint(8, 40)
            m1 = round(rng.uniform(-2.0, 6.0), 3)
            m2 = round(rng.uniform(-2.0, 6.0), 3)
            sd1 = round(rng.uniform(0.4, 3.0), 3)
            sd2 = round(rng.uniform(0.4, 3.0), 3)
            rows.append((f"Rand {i}-{s + 1}", n1, m1, sd1, n2, m2, sd2))
        name = f"rand-{i:02d}"
        write_csv(name + ".csv", cont_csv(rows))
        write_json(name, continuous_expected(
            name, rows, "smd_hedges",
            f"seeded random fixture (seed 20260810, index {i})"))

    # Mass-run fixtures: five small continuous tables plus their expected
    # random-model points for the aggregate plot.
    mass_points = []
    for i, tag in enumerate(["a", "b", "c", "d", "e"], start=1):
        k = 2 + (i % 3)
        rows = []
        for s in range(k):
            n1 = 10 + 3 * i + s
            n2 = 12 + 2 * i + s
            m1 = 1.0 + 0.3 * i + 0.11 * s
            m2 = 1.2 + 0.1 * i
            sd1 = 0.8 + 0.05 * i
            sd2 = 1.0 + 0.02 * s
            rows.append((f"Mass {tag}{s + 1}", n1, round(m1, 3), round(sd1, 3),
                         n2, round(m2, 3), round(sd2, 3)))
        name = f"mass-{tag}"
        write_csv(name + ".csv", cont_csv(rows), subdir="mass")
        exp = continuous_expected(name, rows, "smd_hedges",
                                  "deterministic mass fixture")
        write_json(name, exp)
        n_total = sum(r[1] + r[4] for r in rows)
        eff = exp["random"]["effect"]
        se = exp["random"]["se"]
        mass_points.append({"label": name, "effect": eff, "se": se,
                            "n_total": n_total,
                            "significant": abs(eff) >= CRIT95 * se})
    write_json("mass-points", {"name": "mass-points", "points": mass_points,
                               "provenance": "random-model points for the "
                                             "five fixtures under mass/"})

    # Reference values for the distribution functions, mpmath at 50 digits.
    stats_ref = {
        "normal_cdf": [[x, fmt(normal_cdf(x))]
                       for x in [-8.0, -3.5, -1.959964, -0.5, 0.0, 0.5,
                                 1.0, 1.959964, 2.5, 5.0, 8.0]],
        "chi_square_sf": [[x, df, fmt(chi2_sf(x, df))]
                          for x, df in [(0.5, 1), (1.0, 1), (3.84, 1),
                                        (5.0, 1), (2.0, 2), (10.0, 4),
                                        (25.0, 10), (5.0, 49), (80.0, 49),
                                        (0.1, 3), (1e-12, 2)]],
        "provenance": "mpmath dps=50: normal_cdf=erfc(-x/sqrt 2)/2, "
                      "chi_square_sf=gammainc(df/2, x/2, inf, regularized)",
    }
    write_json("stats-reference", stats_ref)


if __name__ == "__main__":
    main()
