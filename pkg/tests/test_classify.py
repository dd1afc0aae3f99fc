import itertools
from types import SimpleNamespace

import pytest

from fivepoint import classify as cl
from fivepoint.comparison import tense_triples
from fivepoint.generators import circle_metric, equilateral_metric, line_metric
from fivepoint.metric import relabel


def T(word):
    return cl.CenteredTriple.parse(word)


def test_patterns():
    assert cl.violates_PY(T("abc"), T("bcd")) is None  # C
    assert cl.violates_PY(T("abc"), T("adc")) is None  # O
    assert cl.violates_PY(T("abc"), T("abd")) == "Y"
    assert cl.violates_PY(T("abc"), T("bda")) == "P"
    with pytest.raises(cl.NotSharingTwo):
        cl.violates_PY(T("abc"), T("bac"))


def test_canonical_key_is_invariant():
    cfg = cl.parse_config(["abc", "bcd", "cde"])
    key = cl.canonical_key(cfg)
    for p in list(itertools.permutations(range(5)))[::7]:
        assert cl.canonical_key(cl._apply(p, cfg)) == key


def test_cyclic_stabilizer_is_dihedral():
    cyc = cl.lemma_configurations()[0]
    assert len(cl.stabilizer(cyc)) == 10


def test_search_tree_reproduces_table():
    tree = cl.search_configurations()
    assert len(tree.nodes) == 16
    found = sorted(cl.canonical_key(n.config) for n in tree.terminals)
    assert found == sorted(cl.canonical_key(c) for c in cl.lemma_configurations())
    rows = cl.compare_with_table(tree)
    assert len(rows) == 16
    assert all(r.agrees for r in rows), [r.row for r in rows if not r.agrees]


def test_terminals_do_not_depend_on_policy():
    want = sorted(cl.canonical_key(c) for c in cl.lemma_configurations())
    for policy in ("greedy", "first"):
        tree = cl.search_configurations(policy=policy)
        assert sorted(cl.canonical_key(n.config) for n in tree.terminals) == want


def test_tree_exports():
    tree = cl.search_configurations()
    dot = tree.to_dot()
    assert dot.startswith("digraph") and dot.rstrip().endswith("}")
    assert dot.count("->") == len(tree.edges)
    obj = tree.to_json()
    assert len(obj["nodes"]) == 16 and len(obj["terminals"]) == 3
    assert cl.dumps_tree(tree) == cl.dumps_tree(cl.search_configurations())


def test_match_cyclic():
    m = circle_metric()
    match = cl.match_configuration(m.labels, tense_triples(m))
    assert match.kind == "Cyclic"
    order = match.order
    # consecutive triples of the returned order are tense
    words = {t.word() for t in tense_triples(m)}
    for i in range(5):
        a, b, c = order[i - 1], order[i], order[(i + 1) % 5]
        assert "".join([min(a, c), b, max(a, c)]) in words


def test_match_relabeled_cyclic():
    m = relabel(circle_metric(), [2, 4, 1, 0, 3])
    match = cl.match_configuration(m.labels, tense_triples(m))
    assert match.kind == "Cyclic"


def test_match_shared_center():
    # configurations 2 and 3 contain two triples through a common center
    for idx, cfg in enumerate(cl.lemma_configurations()[1:], start=2):
        sets = [SimpleNamespace(points=(t.center, t.end1, t.end2), center=t.center,
                                others=(t.end1, t.end2), degenerate=False) for t in cfg]
        match = cl.match_configuration("abcde", sets)
        assert match.kind == "SharedCenter" and match.config_index == idx
        s = match.shared
        words = {str(t) for t in cfg}
        for v, w in (("v1", "v2"), ("w1", "w2")):
            a, c = sorted((s[v], s[w]))
            assert f"{a}{s['x']}{c}" in words or f"{c}{s['x']}{a}" in words


def test_no_match():
    m = equilateral_metric()
    assert cl.match_configuration(m.labels, tense_triples(m)).kind == "NoMatch"


def test_extremality_conditions():
    rep = cl.extremality_necessary(circle_metric())
    assert rep.passed
    rep = cl.extremality_necessary(equilateral_metric())
    assert not rep.conditions["has_tense_set"]
    assert cl.extremality_necessary(line_metric()).conditions["has_tense_set"]


@pytest.mark.parametrize("word", ["abc", "eda"])
def test_triple_parse_round_trip(word):
    assert str(T(word)) in (word, word[::-1])
