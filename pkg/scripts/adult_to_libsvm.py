#!/usr/bin/env python3
"""Convert the raw UCI Adult files into the 123-feature binary LIBSVM layout of a9a.

Continuous attributes are quantised (age, fnlwgt, education-num and
hours-per-week into training-set quintiles; capital-gain and capital-loss
into zero / non-zero), categorical attributes are one-hot encoded in the
order listed in ``adult.names``.  Missing values (``?``) produce no feature.

Usage::

    python scripts/adult_to_libsvm.py adult.data adult.test data/a9a data/a9a.t
"""
import argparse

import numpy as np

CATEGORIES = {
    "workclass": "Private, Self-emp-not-inc, Self-emp-inc, Federal-gov, Local-gov, State-gov, "
    "Without-pay, Never-worked",
    "education": "Bachelors, Some-college, 11th, HS-grad, Prof-school, Assoc-acdm, Assoc-voc, 9th, "
    "7th-8th, 12th, Masters, 1st-4th, 10th, Doctorate, 5th-6th, Preschool",
    "marital-status": "Married-civ-spouse, Divorced, Never-married, Separated, Widowed, "
    "Married-spouse-absent, Married-AF-spouse",
    "occupation": "Tech-support, Craft-repair, Other-service, Sales, Exec-managerial, Prof-specialty, "
    "Handlers-cleaners, Machine-op-inspct, Adm-clerical, Farming-fishing, Transport-moving, "
    "Priv-house-serv, Protective-serv, Armed-Forces",
    "relationship": "Wife, Own-child, Husband, Not-in-family, Other-relative, Unmarried",
    "race": "White, Asian-Pac-Islander, Amer-Indian-Eskimo, Other, Black",
    "sex": "Female, Male",
    "native-country": "United-States, Cambodia, England, Puerto-Rico, Canada, Germany, "
    "Outlying-US(Guam-USVI-etc), India, Japan, Greece, South, China, Cuba, Iran, Honduras, "
    "Philippines, Italy, Poland, Jamaica, Vietnam, Mexico, Portugal, Ireland, France, "
    "Dominican-Republic, Laos, Ecuador, Taiwan, Haiti, Columbia, Hungary, Guatemala, Nicaragua, "
    "Scotland, Thailand, Yugoslavia, El-Salvador, Trinadad&Tobago, Peru, Hong, Holand-Netherlands",
}
CATEGORIES = {k: [s.strip() for s in v.split(",")] for k, v in CATEGORIES.items()}

# (name, kind) in column order of the raw files; kind is "q5", "nz" or "cat"
COLUMNS = [
    ("age", "q5"), ("workclass", "cat"), ("fnlwgt", "q5"), ("education", "cat"),
    ("education-num", "q5"), ("marital-status", "cat"), ("occupation", "cat"),
    ("relationship", "cat"), ("race", "cat"), ("sex", "cat"), ("capital-gain", "nz"),
    ("capital-loss", "nz"), ("hours-per-week", "q5"), ("native-country", "cat"),
]


def read_raw(path):
    rows = []
    with open(path) as f:
        for line in f:
            line = line.strip()
            if not line or line.startswith("|"):
                continue
            fields = [s.strip() for s in line.split(",")]
            if len(fields) != 15:
                raise ValueError(f"{path}: unexpected field count in {line!r}")
            rows.append(fields)
    return rows


def quintile_cuts(rows, col):
    values = np.array([float(r[col]) for r in rows])
    return np.percentile(values, [20, 40, 60, 80])


def encode(rows, cuts):
    out = []
    for r in rows:
        label = "+1" if r[14].rstrip(".") == ">50K" else "-1"
        feats = []
        offset = 0
        for col, (name, kind) in enumerate(COLUMNS):
            v = r[col]
            if kind == "q5":
                width = 5
                if v != "?":
                    feats.append(offset + 1 + int(np.searchsorted(cuts[col], float(v), side="right")))
            elif kind == "nz":
                width = 2
                if v != "?":
                    feats.append(offset + (2 if float(v) != 0 else 1))
            else:
                cats = CATEGORIES[name]
                width = len(cats)
                if v != "?":
                    feats.append(offset + 1 + cats.index(v))
            offset += width
        out.append(label + " " + " ".join(f"{j}:1" for j in feats))
    assert offset == 123
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("train_raw")
    ap.add_argument("test_raw")
    ap.add_argument("train_out")
    ap.add_argument("test_out")
    args = ap.parse_args()

    train = read_raw(args.train_raw)
    test = read_raw(args.test_raw)
    cuts = {col: quintile_cuts(train, col) for col, (_, kind) in enumerate(COLUMNS) if kind == "q5"}
    for rows, path in ((train, args.train_out), (test, args.test_out)):
        with open(path, "w") as f:
            f.write("\n".join(encode(rows, cuts)) + "\n")
        print(f"{path}: {len(rows)} points")


if __name__ == "__main__":
    main()
