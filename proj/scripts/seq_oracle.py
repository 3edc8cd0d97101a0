#!/usr/bin/env python3
"""Brute-force sequence-region counts for a mismatched/correct/testsuite trio.

Independent of the C++ code: paths come from networkx, common sequences from
explicit substring enumeration, and the reduction from a naive fixed point.

usage: seq_oracle.py FIXTURE_DIR [--min-len 3] > expected_counts.json
"""

import argparse
import itertools
import json
import pathlib

import networkx as nx


def load_dir(d):
    models = []
    for f in sorted(pathlib.Path(d).glob("*.json")):
        doc = json.loads(f.read_text())
        g = nx.DiGraph()
        producer = {}
        for n in doc["nodes"]:
            g.add_node(n["id"], op=n["op_type"])
            for o in n["outputs"]:
                producer[o] = n["id"]
        for n in doc["nodes"]:
            for i in n["inputs"]:
                if i in producer:
                    g.add_edge(producer[i], n["id"])
        models.append((doc["model_id"], paths_of(g)))
    return models


def paths_of(g):
    sources = [n for n in g if g.in_degree(n) == 0]
    sinks = [n for n in g if g.out_degree(n) == 0]
    out = []
    for s in sources:
        for t in sinks:
            if s == t:
                out.append([s])
            else:
                out.extend(nx.all_simple_paths(g, s, t))
    return [tuple(g.nodes[n]["op"] for n in p) for p in out]


def substrings(seq, min_len):
    return {seq[i:j] for i in range(len(seq)) for j in range(i + min_len, len(seq) + 1)}


def all_subs(paths, min_len):
    s = set()
    for p in paths:
        s |= substrings(p, min_len)
    return s


def shared_within(models, k):
    out = set()
    for (_, a), (_, b) in itertools.combinations(models, 2):
        out |= all_subs(a, k) & all_subs(b, k)
    return out


def shared_between(xs, ys, k):
    out = set()
    for _, a in xs:
        for _, b in ys:
            out |= all_subs(a, k) & all_subs(b, k)
    return out


def is_sub(n, h):
    return any(h[i:i + len(n)] == n for i in range(len(h) - len(n) + 1))


def longest_common(a, b):
    common = substrings(a, 1) & substrings(b, 1)
    if not common:
        return set()
    best = max(len(c) for c in common)
    return {c for c in common if len(c) == best}


def reduce_set(s, k):
    members = set(s)
    while True:
        added = set()
        for a, b in itertools.combinations(sorted(members), 2):
            for c in longest_common(a, b):
                if len(c) >= k and c not in members:
                    added.add(c)
        if not added:
            break
        members |= added
    return {m for m in members if not any(o != m and is_sub(o, m) for o in members)}


def support(seq, models):
    return sum(1 for _, paths in models if any(is_sub(seq, p) for p in paths))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("fixture")
    ap.add_argument("--min-len", type=int, default=3)
    args = ap.parse_args()
    base = pathlib.Path(args.fixture)
    k = args.min_len
    mm, cc, ts = (load_dir(base / d) for d in ("mismatched", "correct", "testsuite"))

    s2 = shared_within(mm, k)
    s3 = shared_between(mm, cc, k)
    s4 = shared_between(mm, ts, k)
    only = s2 - s3
    only_red = reduce_set(only, k)
    supports = [support(s, mm) for s in only_red]
    m = max(supports, default=0)
    n = len(mm)
    outcome = "rejected" if m < 2 else ("supported" if m / n >= 0.5 else "inconclusive")

    def region(s):
        return {"raw": len(s), "reduced": len(reduce_set(s, k))}

    print(json.dumps({
        "min_len": k,
        "shared_mismatched": region(s2),
        "shared_correct": region(s3),
        "shared_test_suite": region(s4),
        "only_mismatched": region(only),
        "only_mismatched_reduced": sorted(list(s) for s in only_red),
        "h2": {"outcome": outcome, "max_support": m, "models": n},
    }, indent=2))


if __name__ == "__main__":
    main()
