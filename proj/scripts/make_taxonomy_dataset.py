#!/usr/bin/env python3
"""Builds data/taxonomy/failures.csv, the bundled 200-record failure dataset.

Cause x symptom counts per converter are fixed target cells for the five
most frequent causes. The "Others" row has no target of its own; each of its
cells is the symptom column total minus the five known cells (see
PROVENANCE.md). Subcategory splits follow the target cause marginals.
Location labels are dealt out so that the per-converter location marginals
hit their targets; which cause or symptom a location lands on carries no
information.
"""

import csv
import pathlib

SYMPTOMS = ["Crash", "WrongModel", "BadPerformance", "BuildFailure", "Unreported"]

# converter -> cause -> counts per symptom (Crash, WrongModel, BadPerformance, BuildFailure, Unreported)
JOINT = {
    "tf2onnx": {
        "Incompatibility": [19, 4, 0, 0, 2],
        "TypeProblem": [8, 17, 0, 0, 0],
        "AlgorithmicError": [4, 10, 2, 0, 2],
        "ShapeProblem": [5, 4, 0, 0, 0],
        "APIMisuse": [6, 0, 0, 0, 0],
    },
    "torch_onnx": {
        "Incompatibility": [28, 3, 0, 0, 1],
        "TypeProblem": [14, 13, 1, 0, 1],
        "AlgorithmicError": [3, 3, 0, 0, 0],
        "ShapeProblem": [4, 7, 0, 0, 1],
        "APIMisuse": [5, 1, 0, 0, 0],
    },
}

SYMPTOM_TOTALS = {
    "tf2onnx": [50, 35, 2, 3, 10],
    "torch_onnx": [62, 30, 1, 2, 5],
}

# Subcategory counts per converter; assigned to that cause's records in
# symptom order.
SUBCATEGORIES = {
    "tf2onnx": {
        "Incompatibility": [("External", 23), ("Internal", 2)],
        "TypeProblem": [("Node", 21), ("Conventional", 3), ("Tensor", 1)],
    },
    "torch_onnx": {
        "Incompatibility": [("External", 32), ("Internal", 0)],
        "TypeProblem": [("Node", 25), ("Conventional", 2), ("Tensor", 2)],
    },
}

LOCATIONS = {
    "tf2onnx": [("GraphOptimization", 14), ("LoadModel", 5), ("Protobuf", 1), ("Validation", 0),
                ("NotDistinguishable", 10), ("NodeConversion", 70)],
    "torch_onnx": [("GraphOptimization", 5), ("LoadModel", 6), ("Protobuf", 0), ("Validation", 3),
                   ("NotDistinguishable", 8), ("NodeConversion", 78)],
}


def others_row(conv):
    known = JOINT[conv]
    row = []
    for i, total in enumerate(SYMPTOM_TOTALS[conv]):
        rest = total - sum(counts[i] for counts in known.values())
        assert rest >= 0, (conv, SYMPTOMS[i], rest)
        row.append(rest)
    return row


def records_for(conv):
    recs = []
    causes = dict(JOINT[conv])
    causes["Other"] = others_row(conv)
    for cause, counts in causes.items():
        subs = []
        for name, n in SUBCATEGORIES[conv].get(cause, []):
            subs += [name] * n
        k = 0
        for symptom, n in zip(SYMPTOMS, counts):
            for _ in range(n):
                if cause == "Other":
                    detail = "Unspecified"
                elif subs:
                    detail = subs[k]
                else:
                    detail = ""
                k += 1
                recs.append({"converter": conv, "symptom": symptom, "cause": cause, "cause_detail": detail})
        if subs:
            assert k == len(subs), (conv, cause)
    # Algorithmic errors go to graph optimization first, then the remaining
    # location labels are dealt out in table order.
    pool = []
    for name, n in LOCATIONS[conv]:
        pool += [name] * n
    assert len(pool) == len(recs) == 100
    order = sorted(range(len(recs)), key=lambda i: 0 if recs[i]["cause"] == "AlgorithmicError" else 1)
    for slot, i in enumerate(order):
        recs[i]["location"] = pool[slot]
    return recs


def main():
    out = pathlib.Path(__file__).resolve().parent.parent / "data" / "taxonomy" / "failures.csv"
    rows = []
    for conv, prefix in (("tf2onnx", "tf"), ("torch_onnx", "pt")):
        for i, rec in enumerate(records_for(conv), start=1):
            rec["record_id"] = f"{prefix}-{i:03d}"
            rec["source_url"] = ""
            rows.append(rec)
    with out.open("w", newline="") as f:
        w = csv.DictWriter(f, fieldnames=["record_id", "converter", "symptom", "cause", "cause_detail",
                                          "location", "source_url"], lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    print(f"wrote {len(rows)} records to {out}")
    for conv in JOINT:
        print(conv, "Others by symptom:", dict(zip(SYMPTOMS, others_row(conv))))


if __name__ == "__main__":
    main()
