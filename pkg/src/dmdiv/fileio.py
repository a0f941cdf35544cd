"""JSON model files and CSV data.

DM file::

    {"variables": [{"name": "A", "card": 2}, ...],
     "cliques": [{"vars": ["A", "B"], "table": [...]}, ...]}

BN file::

    {"variables": [...],
     "nodes": [{"name": "X", "parents": ["Y", "Z"], "cpt": [...]}, ...]}

Tables are row-major in the listed variable order (last variable fastest);
for CPTs the order is the parents followed by the child, so the child varies
fastest.

Structure file (input to fitting) carries ``variables`` plus either
``cliques`` (lists of names) or ``edges`` (name pairs).
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .errors import ModelError
from .factor import Factor
from .graph import DirectedGraph, UndirectedGraph, VariableTable
from .model import BayesianNetwork, DecomposableModel


def _variables(doc) -> VariableTable:
    try:
        return VariableTable((v["name"], v["card"]) for v in doc["variables"])
    except (KeyError, TypeError) as exc:
        raise ModelError(f"malformed variables list: {exc}") from exc


def _read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ModelError(f"{path}: invalid JSON ({exc})") from exc


def dm_from_dict(doc) -> DecomposableModel:
    variables = _variables(doc)
    tables = []
    try:
        for c in doc["cliques"]:
            ids = [variables.id_of(name) for name in c["vars"]]
            cards = [variables.cards[i] for i in ids]
            tables.append(Factor.from_ordered(ids, cards, c["table"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelError(f"malformed clique entry: {exc}") from exc
    return DecomposableModel(variables, tables)


def dm_to_dict(m: DecomposableModel) -> dict:
    names = m.vars.names
    return {
        "variables": [{"name": v.name, "card": v.card} for v in m.vars],
        "cliques": [{"vars": [names[i] for i in f.scope], "table": f.flat.tolist()}
                    for f in m.clique_marginals],
    }


def bn_from_dict(doc) -> BayesianNetwork:
    variables = _variables(doc)
    edges, cpts = set(), {}
    try:
        for node in doc["nodes"]:
            x = variables.id_of(node["name"])
            parents = [variables.id_of(p) for p in node.get("parents", [])]
            edges.update((p, x) for p in parents)
            ids = parents + [x]
            cards = [variables.cards[i] for i in ids]
            cpts[x] = Factor.from_ordered(ids, cards, node["cpt"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelError(f"malformed node entry: {exc}") from exc
    return BayesianNetwork(variables, DirectedGraph(len(variables), frozenset(edges)), cpts)


def bn_to_dict(bn: BayesianNetwork) -> dict:
    names = bn.vars.names
    nodes = []
    for x in bn.order:
        parents = bn.parents(x)
        f = bn.cpts[x]
        order = parents + [x]
        perm = [f.scope.index(v) for v in order]
        nodes.append({"name": names[x], "parents": [names[p] for p in parents],
                      "cpt": f.values.transpose(perm).reshape(-1).tolist()})
    return {"variables": [{"name": v.name, "card": v.card} for v in bn.vars], "nodes": nodes}


def load_dm(path) -> DecomposableModel:
    return dm_from_dict(_read_json(path))


def save_dm(m: DecomposableModel, path) -> None:
    Path(path).write_text(json.dumps(dm_to_dict(m), indent=1))


def load_bn(path) -> BayesianNetwork:
    return bn_from_dict(_read_json(path))


def save_bn(bn: BayesianNetwork, path) -> None:
    Path(path).write_text(json.dumps(bn_to_dict(bn), indent=1))


def load_structure(path) -> tuple[VariableTable, UndirectedGraph]:
    doc = _read_json(path)
    variables = _variables(doc)
    n = len(variables)
    try:
        if "cliques" in doc:
            cliques = [[variables.id_of(v) for v in c] for c in doc["cliques"]]
            return variables, UndirectedGraph.from_cliques(n, cliques)
        edges = [(variables.id_of(a), variables.id_of(b)) for a, b in doc.get("edges", [])]
    except (TypeError, ValueError) as exc:
        raise ModelError(f"malformed structure: {exc}") from exc
    return variables, UndirectedGraph(n, frozenset(edges))


def load_csv(path, variables: VariableTable) -> np.ndarray:
    """Rows of integer states; columns matched to variables by header name."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            return np.empty((0, len(variables)), dtype=np.int64)
        header = [h.strip() for h in header]
        if sorted(header) != sorted(variables.names):
            raise ModelError(f"CSV header {header} does not match variables {list(variables.names)}")
        cols = [header.index(name) for name in variables.names]
        rows = []
        for lineno, rec in enumerate(reader, start=2):
            if not rec:
                continue
            try:
                vals = [int(rec[c]) for c in cols]
            except (ValueError, IndexError) as exc:
                raise ModelError(f"{path}:{lineno}: bad row ({exc})") from exc
            rows.append(vals)
    return np.asarray(rows, dtype=np.int64).reshape(-1, len(variables))


def save_csv(rows, variables: VariableTable, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(variables.names)
        w.writerows(np.asarray(rows).tolist())
