#!/usr/bin/env python3
"""Reference values for the DS-6 fixture, computed with exact rationals.

This script is deliberately independent of the Rust implementation: it reads
the raw CSV rows, counts by hand, and evaluates smoothed naive Bayes products
in linear space with `fractions.Fraction`. The golden values asserted by the
Rust test suites were frozen from its output.

    python3 oracle/ds6_oracle.py
"""

import csv
import math
import os
from fractions import Fraction

HERE = os.path.dirname(os.path.abspath(__file__))
FIXTURE = os.path.join(HERE, "..", "fixtures", "ds6.csv")

CLASSES = ["good", "poor"]
ATTRS = ["skill", "experience"]
ALPHA = Fraction(1)


def load():
    with open(FIXTURE, newline="") as fh:
        return [row for row in csv.DictReader(fh)]


ROWS = load()


def vocabulary(attr):
    return sorted({r[attr] for r in ROWS})


def prior(c):
    return Fraction(sum(1 for r in ROWS if r["performance"] == c), len(ROWS))


def likelihood(attr, value, c):
    in_class = [r for r in ROWS if r["performance"] == c]
    count = sum(1 for r in in_class if r[attr] == value)
    v = len(vocabulary(attr))
    return (count + ALPHA) / (len(in_class) + ALPHA * v)


def posterior(evidence):
    """evidence: dict attr -> value; attributes absent from the dict are omitted."""
    joint = {}
    for c in CLASSES:
        p = prior(c)
        for attr, value in evidence.items():
            p *= likelihood(attr, value, c)
        joint[c] = p
    total = sum(joint.values())
    return {c: joint[c] / total for c in CLASSES}


def mutual_information_bits(attr):
    n = len(ROWS)
    mi = 0.0
    for a in vocabulary(attr):
        pa = Fraction(sum(1 for r in ROWS if r[attr] == a), n)
        for c in CLASSES:
            pc = Fraction(sum(1 for r in ROWS if r["performance"] == c), n)
            pac = Fraction(sum(1 for r in ROWS if r[attr] == a and r["performance"] == c), n)
            if pac:
                mi += float(pac) * math.log2(float(pac / (pa * pc)))
    return mi


def show(name, value):
    if isinstance(value, Fraction):
        print(f"{name:<44} {str(value):>12}  = {float(value):.12f}")
    else:
        print(f"{name:<44} {'':>12}    {value:.12f}")


def main():
    show("prior(good)", prior("good"))
    show("prior(poor)", prior("poor"))
    show("P(skill=high|good)", likelihood("skill", "high", "good"))
    show("P(skill=high|poor)", likelihood("skill", "high", "poor"))
    show("P(skill=medium|good)  (unseen)", likelihood("skill", "medium", "good"))
    show("P(skill=medium|poor)  (unseen)", likelihood("skill", "medium", "poor"))

    hj = posterior({"skill": "high", "experience": "junior"})
    show("posterior(good | high, junior)", hj["good"])
    show("posterior(poor | high, junior)", hj["poor"])
    hm = posterior({"skill": "high"})
    show("posterior(good | high, missing)", hm["good"])
    lj = posterior({"skill": "low", "experience": "junior"})
    show("posterior(good | low, junior)", lj["good"])
    show("what-if delta good (low->high, junior)", hj["good"] - lj["good"])

    for attr in ATTRS:
        for value in vocabulary(attr):
            post = posterior({attr: value})
            best = max(CLASSES, key=lambda c: (post[c], -CLASSES.index(c)))
            show(f"rule IF {attr}={value} THEN {best}", post[best])

    show("I(skill; performance) bits", mutual_information_bits("skill"))
    show("I(experience; performance) bits", mutual_information_bits("experience"))

    correct = 0
    for r in ROWS:
        post = posterior({a: r[a] for a in ATTRS})
        best = max(CLASSES, key=lambda c: (post[c], -CLASSES.index(c)))
        correct += best == r["performance"]
    show("resubstitution accuracy", Fraction(correct, len(ROWS)))


if __name__ == "__main__":
    main()
