"""Convert a discrete BIF network to the package's BN JSON format.

Usage: python tools/bif_to_json.py network.bif out.json [--source TEXT]

Each conditional row is renormalised to sum to exactly 1, since
repository files round entries to a few significant digits.
"""

import argparse
import itertools
import json
import re

import numpy as np

VAR_RE = re.compile(r"variable\s+(\S+)\s*\{\s*type\s+discrete\s*\[\s*\d+\s*\]\s*\{([^}]*)\}", re.S)
PROB_RE = re.compile(r"probability\s*\(\s*([^|)]+?)\s*(?:\|\s*([^)]*))?\)\s*\{([^}]*)\}", re.S)


def parse_bif(text):
    states = {name: [s.strip() for s in body.split(",")] for name, body in VAR_RE.findall(text)}
    nodes = []
    for child, parents, body in PROB_RE.findall(text):
        child = child.strip()
        parents = [p.strip() for p in parents.split(",")] if parents.strip() else []
        k = len(states[child])
        rows = {}
        for line in body.split(";"):
            line = line.strip()
            if not line:
                continue
            if line.startswith("table"):
                rows[()] = [float(v) for v in line[5:].split(",")]
                continue
            m = re.match(r"\(([^)]*)\)\s*(.*)", line, re.S)
            key = tuple(s.strip() for s in m.group(1).split(","))
            rows[key] = [float(v) for v in m.group(2).split(",")]
        cpt = []
        for combo in itertools.product(*(states[p] for p in parents)):
            row = np.asarray(rows[combo])
            assert row.size == k
            cpt.extend((row / row.sum()).tolist())
        nodes.append({"name": child, "parents": parents, "cpt": cpt})
    variables = [{"name": n, "card": len(s), "states": s} for n, s in states.items()]
    return {"variables": variables, "nodes": nodes}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("bif")
    ap.add_argument("out")
    ap.add_argument("--source", default="")
    args = ap.parse_args()
    with open(args.bif) as fh:
        doc = parse_bif(fh.read())
    if args.source:
        doc["source"] = args.source
    with open(args.out, "w") as fh:
        json.dump(doc, fh, indent=1)


if __name__ == "__main__":
    main()
