"""Combinatorics of centered tense triples on five labels.

A triple ``abc`` has ends ``a``, ``c`` and center ``b``.  Two triples that
share exactly two labels form one of four patterns (C, O, P, Y); P and Y
force a four-point tense set, so they are excluded when enumerating the
tense structures of extremal five-point spaces.
"""
from __future__ import annotations

import itertools
import json
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

LABELS = "abcde"
PERMUTATIONS = tuple(itertools.permutations(range(5)))


@dataclass(frozen=True, order=True)
class CenteredTriple:
    end1: str
    center: str
    end2: str

    def __post_init__(self):
        if len({self.end1, self.center, self.end2}) != 3:
            raise ValueError(f"triple needs three distinct labels: {self}")
        if self.end1 > self.end2:
            e1, e2 = self.end2, self.end1
            object.__setattr__(self, "end1", e1)
            object.__setattr__(self, "end2", e2)

    @classmethod
    def parse(cls, word: str) -> "CenteredTriple":
        """``"abc"`` -> triple with center ``b``."""
        if len(word) != 3:
            raise ValueError(f"bad triple {word!r}")
        return cls(word[0], word[1], word[2])

    @property
    def labels(self) -> frozenset:
        return frozenset((self.end1, self.center, self.end2))

    @property
    def ends(self) -> frozenset:
        return frozenset((self.end1, self.end2))

    def relabel(self, mapping) -> "CenteredTriple":
        return CenteredTriple(mapping[self.end1], mapping[self.center], mapping[self.end2])

    def __str__(self):
        return f"{self.end1}{self.center}{self.end2}"


class NotSharingTwo(ValueError):
    pass


def violates_PY(t1: CenteredTriple, t2: CenteredTriple) -> str | None:
    """Return ``"P"``, ``"Y"`` or ``None`` (patterns C and O) for two triples
    sharing exactly two labels."""
    shared = t1.labels & t2.labels
    if t1 == t2 or len(shared) != 2:
        raise NotSharingTwo(f"{t1} and {t2} do not share exactly two labels")
    c1 = t1.center in shared
    c2 = t2.center in shared
    if c1 and c2:
        return "Y" if t1.center == t2.center else None  # Y or C
    if c1 != c2:
        return "P"
    return None  # O: shared pair are ends of both


def conflicts(candidate: CenteredTriple, config: Iterable[CenteredTriple]) -> list[tuple[str, CenteredTriple]]:
    """All (pattern, existing triple) pairs where ``candidate`` forms P or Y."""
    out = []
    for t in config:
        if len(t.labels & candidate.labels) == 2:
            pat = violates_PY(candidate, t)
            if pat is not None:
                out.append((pat, t))
    return out


def all_triples(labels: str = LABELS) -> list[CenteredTriple]:
    out = []
    for trio in itertools.combinations(labels, 3):
        for center in trio:
            e1, e2 = [x for x in trio if x != center]
            out.append(CenteredTriple(e1, center, e2))
    return out


def _apply(perm: Sequence[int], config) -> frozenset:
    mapping = {LABELS[i]: LABELS[perm[i]] for i in range(5)}
    return frozenset(t.relabel(mapping) for t in config)


def _key(config) -> tuple[str, ...]:
    return tuple(sorted(str(t) for t in config))


def canonical_key(config: Iterable[CenteredTriple]) -> tuple[str, ...]:
    """Lexicographic minimum of the sorted triple words over all 120 relabelings."""
    config = frozenset(config)
    return min(_key(_apply(p, config)) for p in PERMUTATIONS)


def canonical_form(config: Iterable[CenteredTriple]) -> tuple[frozenset, dict]:
    """Canonical configuration and a relabeling ``label -> canonical label``."""
    config = frozenset(config)
    best = None
    for p in PERMUTATIONS:
        k = _key(_apply(p, config))
        if best is None or k < best[0]:
            best = (k, p)
    perm = best[1]
    mapping = {LABELS[i]: LABELS[perm[i]] for i in range(5)}
    return _apply(perm, config), mapping


def stabilizer(config: Iterable[CenteredTriple]) -> list[dict]:
    """Relabelings (as dicts) mapping the configuration onto itself."""
    config = frozenset(config)
    out = []
    for p in PERMUTATIONS:
        if _apply(p, config) == config:
            out.append({LABELS[i]: LABELS[p[i]] for i in range(5)})
    return out


def covered_pairs(config) -> set[frozenset]:
    pairs = set()
    for t in config:
        for a, b in itertools.combinations(sorted(t.labels), 2):
            pairs.add(frozenset((a, b)))
    return pairs


def uncovered_pairs(config) -> list[frozenset]:
    cov = covered_pairs(config)
    return [frozenset(p) for p in itertools.combinations(LABELS, 2) if frozenset(p) not in cov]


def is_py_free(config) -> bool:
    config = list(config)
    for t1, t2 in itertools.combinations(config, 2):
        if len(t1.labels & t2.labels) == 2 and violates_PY(t1, t2) is not None:
            return False
    return True


def candidates_for(config, pair: frozenset | None) -> list[CenteredTriple]:
    """Triples that could extend ``config``.

    With a pair: the (at most 9) triples containing it.  Without: every
    triple.  Triples whose label set is already used are skipped: two tense
    triples on the same three distinct points cannot coexist.
    """
    used = {t.labels for t in config}
    pool = all_triples()
    if pair is not None:
        pool = [t for t in pool if pair <= t.labels]
    return [t for t in pool if t.labels not in used]


def is_terminal(config) -> bool:
    return len(config) >= 5 and not uncovered_pairs(config) and is_py_free(config)


@dataclass
class SearchNode:
    index: int
    config: frozenset
    key: tuple
    pair: frozenset | None
    outcomes: list = field(default_factory=list)  # (candidate, "P"/"Y"/"add", witness or child index)

    @property
    def terminal(self) -> bool:
        return is_terminal(self.config)


@dataclass
class SearchTree:
    nodes: list[SearchNode]
    edges: list[tuple[int, int, str]]

    @property
    def terminals(self) -> list[SearchNode]:
        return [n for n in self.nodes if n.terminal]

    def to_json(self) -> dict:
        return {
            "nodes": [
                {
                    "index": n.index,
                    "triples": sorted(str(t) for t in n.config),
                    "pair": "".join(sorted(n.pair)) if n.pair else None,
                    "terminal": n.terminal,
                    "outcomes": [
                        {"candidate": str(c), "result": r, "witness": (str(w) if r != "add" else w)}
                        for c, r, w in n.outcomes
                    ],
                }
                for n in self.nodes
            ],
            "edges": [[a, b, lab] for a, b, lab in self.edges],
            "terminals": [n.index for n in self.terminals],
        }

    def to_dot(self) -> str:
        lines = ["digraph classification {"]
        for n in self.nodes:
            shape = "box" if n.terminal else "ellipse"
            label = " ".join(sorted(str(t) for t in n.config))
            lines.append(f'  n{n.index} [label="{n.index}: {label}", shape={shape}];')
        for a, b, lab in self.edges:
            lines.append(f'  n{a} -> n{b} [label="{lab}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def greedy_pair(config) -> frozenset | None:
    """Uncovered pair with the fewest admissible extensions (ties: lexicographic)."""
    free = uncovered_pairs(config)
    if not free:
        return None

    def score(pair):
        n_ok = sum(1 for c in candidates_for(config, pair) if not conflicts(c, config))
        return (n_ok, "".join(sorted(pair)))

    return min(free, key=score)


def first_pair(config) -> frozenset | None:
    free = uncovered_pairs(config)
    return min(free, key=lambda p: "".join(sorted(p))) if free else None


def table_pair(config) -> frozenset | None:
    """The pair explored by the hand-search table at the matching row.

    Falls back to :func:`greedy_pair` for configurations the table never
    reaches.
    """
    row = table_row_for(config)
    if row is None:
        return greedy_pair(config)
    if row.pair is None:
        return None
    # carry the table's pair through a relabeling row.config -> config
    for m in _isomorphisms(row.config, frozenset(config)):
        return frozenset(m[x] for x in row.pair)
    raise AssertionError("matched row is not isomorphic")  # pragma: no cover


PAIR_POLICIES = {"table": table_pair, "greedy": greedy_pair, "first": first_pair}


def search_configurations(start: Iterable[CenteredTriple] | None = None, policy: str = "table") -> SearchTree:
    """Breadth-first enumeration of P/Y-free triple configurations.

    Each node extends by triples through one uncovered pair (chosen by
    ``policy``); nodes without a free pair try every triple.  Nodes are
    identified up to relabeling.  The terminal configurations do not depend
    on the policy; the node count does (16 with the table's choices).
    """
    choose_pair = PAIR_POLICIES[policy]
    if start is None:
        start = [CenteredTriple.parse("abc")]
    config, _ = canonical_form(start)
    nodes: list[SearchNode] = []
    index_of: dict[tuple, int] = {}
    edges = []

    def node_for(cfg) -> int:
        key = canonical_key(cfg)
        if key not in index_of:
            canon, _ = canonical_form(cfg)
            index_of[key] = len(nodes)
            nodes.append(SearchNode(len(nodes), canon, key, None))
            queue.append(index_of[key])
        return index_of[key]

    queue: deque[int] = deque()
    node_for(config)
    while queue:
        node = nodes[queue.popleft()]
        node.pair = choose_pair(node.config)
        for cand in candidates_for(node.config, node.pair):
            bad = conflicts(cand, node.config)
            if bad:
                pat, wit = bad[0]
                node.outcomes.append((cand, pat, wit))
                continue
            child = node_for(node.config | {cand})
            node.outcomes.append((cand, "add", child))
            if (node.index, child, str(cand)) not in edges:
                edges.append((node.index, child, str(cand)))
    return SearchTree(nodes, edges)


LEMMA_CONFIGURATIONS = (
    ("abc", "bcd", "cde", "dea", "eab"),
    ("abc", "bcd", "cda", "aec", "bed"),
    ("abc", "bcd", "cda", "dab", "aec", "bed"),
)


def lemma_configurations() -> list[frozenset]:
    return [frozenset(CenteredTriple.parse(w) for w in cfg) for cfg in LEMMA_CONFIGURATIONS]


def parse_config(words: Iterable[str]) -> frozenset:
    return frozenset(CenteredTriple.parse(w) for w in words)


def dumps_tree(tree: SearchTree) -> str:
    return json.dumps(tree.to_json(), indent=2, sort_keys=True)


def _isomorphisms(src: frozenset, dst: frozenset):
    for p in PERMUTATIONS:
        if _apply(p, src) == dst:
            yield {LABELS[i]: LABELS[p[i]] for i in range(5)}


@dataclass(frozen=True)
class TableRow:
    row: int
    config: frozenset
    symmetry: str | None
    pair: frozenset | None
    entries: tuple  # (candidate, result, witness triple or target row)


def load_table() -> list[TableRow]:
    """Rows of the hand-search table shipped as package data."""
    from importlib import resources

    raw = json.loads(resources.files("fivepoint.data").joinpath("classification_table.json").read_text())
    rows = []
    for r in raw["rows"]:
        entries = []
        for cand, res, w in r["entries"]:
            entries.append((CenteredTriple.parse(cand), res, w if res == "add" else CenteredTriple.parse(w)))
        rows.append(TableRow(r["row"], parse_config(r["triples"]), r["symmetry"],
                             frozenset(r["pair"]) if r["pair"] else None, tuple(entries)))
    return rows


_TABLE_INDEX: dict | None = None


def table_row_for(config) -> TableRow | None:
    global _TABLE_INDEX
    if _TABLE_INDEX is None:
        _TABLE_INDEX = {canonical_key(r.config): r for r in load_table()}
    return _TABLE_INDEX.get(canonical_key(config))


# ---------------------------------------------------------------------------
# agreement of machine rows with the hand table


@dataclass
class RowComparison:
    row: int
    node: int
    orbits: int
    missing: list  # orbits with no listed representative
    mismatches: list  # (listed candidate, listed result, machine outcome)
    counts_table: dict
    counts_machine: dict

    @property
    def agrees(self) -> bool:
        return not self.missing and not self.mismatches and self.counts_table == self.counts_machine


def _pair_fixing(config: frozenset, pair: frozenset | None) -> list[dict]:
    autos = stabilizer(config)
    if pair is None:
        return autos
    return [g for g in autos if frozenset(g[x] for x in pair) == pair]


def compare_row(node: SearchNode, row: TableRow) -> RowComparison:
    """Compare a search node with a table row up to the node's symmetry.

    Candidates are grouped into orbits of the automorphisms of the
    configuration that fix the explored pair.  Every orbit needs a listed
    representative, every listed outcome must be reproduced (rejections by a
    triple forming the stated pattern, arrows to the stated row), and the
    per-orbit counts of Y, P and arrows must coincide.
    """
    isos = [g for g in _isomorphisms(row.config, node.config)
            if row.pair is None or frozenset(g[x] for x in row.pair) == node.pair]
    if not isos:
        raise ValueError(f"row {row.row} does not match node {node.index}")
    phi = isos[0]
    group = _pair_fixing(node.config, node.pair)
    cands = candidates_for(node.config, node.pair)
    orbit_of: dict = {}
    orbits: list[list[CenteredTriple]] = []
    for c in cands:
        if c in orbit_of:
            continue
        orb = sorted({c.relabel(g) for g in group})
        for t in orb:
            orbit_of[t] = len(orbits)
        orbits.append(orb)

    rows = {r.row: r for r in load_table()}
    listed: dict[int, str] = {}
    mismatches = []
    for cand, res, w in row.entries:
        c = cand.relabel(phi)
        if c not in orbit_of:
            mismatches.append((str(cand), res, "not a candidate"))
            continue
        bad = conflicts(c, node.config)
        if res == "add":
            ok = not bad and canonical_key(node.config | {c}) == canonical_key(rows[w].config)
        else:
            ok = (res, w.relabel(phi)) in bad
        if not ok:
            mismatches.append((str(cand), res, [p for p, _ in bad] or "add"))
        listed.setdefault(orbit_of[c], res)

    def machine_label(orb):
        bad = conflicts(orb[0], node.config)
        if not bad:
            return "add"
        pats = {p for p, _ in bad}
        return "Y" if "Y" in pats else "P"

    counts_m = {"Y": 0, "P": 0, "add": 0}
    counts_t = {"Y": 0, "P": 0, "add": 0}
    for k, orb in enumerate(orbits):
        m_lab = machine_label(orb)
        counts_m[m_lab] += 1
        if k in listed:
            t_lab = listed[k]
            # a triple may form both patterns; count it under the listed one
            pats = {p for p, _ in conflicts(orb[0], node.config)}
            counts_t[t_lab if t_lab == "add" or t_lab in pats else m_lab] += 1
            if t_lab != m_lab and t_lab in pats:
                counts_m[m_lab] -= 1
                counts_m[t_lab] += 1
    missing = [[str(t) for t in orb] for k, orb in enumerate(orbits) if k not in listed]
    return RowComparison(row.row, node.index, len(orbits), missing, mismatches, counts_t, counts_m)


def compare_with_table(tree: SearchTree) -> list[RowComparison]:
    """One comparison per table row (rows without a matching node are errors)."""
    by_key = {n.key: n for n in tree.nodes}
    out = []
    for row in load_table():
        node = by_key.get(canonical_key(row.config))
        if node is None:
            raise ValueError(f"table row {row.row} has no node in the tree")
        out.append(compare_row(node, row))
    return out


# ---------------------------------------------------------------------------
# matching the tense triples of a metric


@dataclass
class ConfigurationMatch:
    kind: str  # "Cyclic", "SharedCenter" or "NoMatch"
    config_index: int | None = None  # 1, 2 or 3 for the terminal configurations
    mapping: dict | None = None  # terminal label -> metric label
    order: tuple | None = None  # cyclic order for "Cyclic"
    shared: dict | None = None  # roles x, v1, v2, w1, w2 for "SharedCenter"

    def to_json(self) -> dict:
        return {"kind": self.kind, "config_index": self.config_index, "mapping": self.mapping,
                "order": list(self.order) if self.order else None, "shared": self.shared}


def _triples_of(labels: Sequence[str], tense_sets) -> frozenset:
    """Metric triples as configurations over ``abcde`` (by label position)."""
    to_std = {lab: LABELS[i] for i, lab in enumerate(labels)}
    out = set()
    for t in tense_sets:
        if len(t.points) != 3 or getattr(t, "degenerate", False):
            continue
        a, c = t.others
        out.add(CenteredTriple(to_std[a], to_std[t.center], to_std[c]))
    return frozenset(out)


def match_configuration(labels: Sequence[str], tense_sets) -> ConfigurationMatch:
    """Find a terminal configuration inside the tense triples of a 5-point metric.

    ``labels`` are the metric's labels and ``tense_sets`` its three-point
    tense sets.  The cyclic configuration gives the cyclic order; the other
    two give the shared center ``x`` with triples ``v1 x v2`` and
    ``w1 x w2`` (read off the triples ``aec`` and ``bed``).
    """
    labels = list(labels)
    if len(labels) != 5:
        return ConfigurationMatch("NoMatch")
    have = _triples_of(labels, tense_sets)
    back = {LABELS[i]: lab for i, lab in enumerate(labels)}
    configs = dict(enumerate(lemma_configurations(), start=1))
    # configuration 3 contains configuration 2, so test the larger one first
    for idx in (1, 3, 2):
        cfg = configs[idx]
        if len(cfg) > len(have):
            continue
        for p in PERMUTATIONS:
            if _apply(p, cfg) <= have:
                g = {LABELS[i]: back[LABELS[p[i]]] for i in range(5)}
                if idx == 1:
                    return ConfigurationMatch("Cyclic", 1, g, tuple(g[x] for x in "abcde"))
                shared = {"x": g["e"], "v1": g["a"], "v2": g["c"], "w1": g["b"], "w2": g["d"]}
                return ConfigurationMatch("SharedCenter", idx, g, shared=shared)
    return ConfigurationMatch("NoMatch")


def find_shared_center(tense_sets) -> dict | None:
    """Two tense triples ``v1 x v2`` and ``w1 x w2`` with a common center."""
    triples = [t for t in tense_sets if len(t.points) == 3 and not getattr(t, "degenerate", False)]
    for t1, t2 in itertools.combinations(triples, 2):
        if t1.center == t2.center and not set(t1.others) & set(t2.others):
            v1, v2 = t1.others
            w1, w2 = t2.others
            return {"x": t1.center, "v1": v1, "v2": v2, "w1": w1, "w2": w2}
    return None


@dataclass
class ExtremalityReport:
    conditions: dict  # name -> bool
    triples: int
    perturbation_dim: int | None

    @property
    def passed(self) -> bool:
        return all(self.conditions.values())

    def to_json(self) -> dict:
        return {"conditions": self.conditions, "triples": self.triples,
                "perturbation_dim": self.perturbation_dim, "passed": self.passed}


def extremality_necessary(m) -> ExtremalityReport:
    """Necessary (not sufficient) conditions for an extremal 5-point metric.

    A tense set must exist.  When all tense sets have three points, every
    pair must lie in one, there must be at least five of them and no two
    may form P or Y.  The dimension of the space of form perturbations that
    keep the triples tense is reported alongside.
    """
    from .comparison import perturbation_space, tense_structure

    ts = tense_structure(m)
    triples = [t for t in ts.triples if not t.degenerate]
    conds = {"has_tense_set": bool(triples or ts.quads or ts.quints)}
    dim = None
    if ts.quads or ts.quints:
        return ExtremalityReport(conds, len(triples), dim)
    _, dim = perturbation_space(m, triples)
    cfg = _triples_of(m.labels, triples) if m.n == 5 else frozenset()
    conds["pairs_covered"] = m.n == 5 and not uncovered_pairs(cfg)
    conds["at_least_five_triples"] = len(triples) >= 5
    conds["py_free"] = is_py_free(cfg)
    return ExtremalityReport(conds, len(triples), dim)
