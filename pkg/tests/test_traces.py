import json
import random
from math import factorial

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gen import NAMES, random_simple, random_term, random_trace
from oracles import count_linear_extensions, traces_isomorphic
from quantpi.algebra import exhaustive_pretraces, is_simple
from quantpi.equivalence import enumerate_contexts
from quantpi.lts import ContractError
from quantpi.runs import outcome, pretraces
from quantpi.syntax import alpha_equal, compose, parse_term, print_term
from quantpi.traces import (
    EMPTY,
    LinearCombination,
    Trace,
    decompose,
    dual,
    extract_trace,
    from_json,
    implement_trace,
    isomorphic_by_search,
    make_trace,
    sync_count,
    sync_count_by_outcome,
    to_json,
    to_json_text,
    total_orderings,
    trace_par_compose,
)


def P(text):
    return parse_term(text)


def chain(*events):
    """``events`` as (pol, subj) pairs in a total order."""
    n = len(events)
    return make_trace({i + 1: ev for i, ev in enumerate(events)}, [(i, i + 1) for i in range(1, n)])


def antichain(*events):
    return make_trace({i + 1: ev for i, ev in enumerate(events)})


# -- the trace type ---------------------------------------------------------


def test_validation():
    with pytest.raises(ValueError):
        make_trace({1: ("+", "a"), 2: ("+", 1)})  # bound subject without order
    with pytest.raises(ValueError):
        make_trace({1: ("+", "a"), 2: ("+", "a")}, [(1, 2), (2, 1)])
    with pytest.raises(ValueError):
        make_trace({1: ("*", "a")})
    with pytest.raises(ValueError):
        make_trace({1: ("+", "a")}, ready=[("+", 3)])
    with pytest.raises(ValueError):
        make_trace({1: ("+", "A b")})
    t = make_trace({1: ("+", "a"), 2: ("+", 1), 3: ("-", 2)}, [(1, 2), (2, 3)])
    assert (1, 3) in t.order


def test_canonical_single_event():
    t = make_trace({1: ("+", "a")})
    assert t.canonical() is t
    assert make_trace({7: ("+", "a")}).canonical().events == (1,)


def test_canonical_relabelling(rng):
    t = make_trace({1: ("+", "a"), 2: ("-", 1), 3: ("+", "b")}, [(1, 2)], [("-", 2)])
    for _ in range(20):
        ids = rng.sample(range(1, 50), 3)
        u = t.relabel(dict(zip((1, 2, 3), ids)))
        assert u.key == t.key and to_json(u) == to_json(t)


def test_canonical_separates_orders():
    a = antichain(("+", "a"), ("+", "b"))
    b = chain(("+", "a"), ("+", "b"))
    c = chain(("+", "b"), ("+", "a"))
    assert len({a, b, c}) == 3


def test_canonical_matches_isomorphism_search(rng):
    agree = same = 0
    for _ in range(400):
        t = random_trace(rng, 4, max_ready=2)
        u = random_trace(rng, 4, max_ready=2)
        if len(t) != len(u):
            u = t.relabel({e: e + 20 for e in t.events}) if rng.random() < 0.5 else u
        iso = traces_isomorphic(t, u)
        assert (t == u) is iso
        assert isomorphic_by_search(t, u) is iso
        agree += 1
        same += iso
    assert same > 20 and agree == 400


# -- JSON -------------------------------------------------------------------


def test_json_example():
    text = '{"events":[{"id":1,"pol":"+","subj":{"name":"a"}},{"id":2,"pol":"-","subj":{"event":1}}],"order":[[1,2]],"ready":[{"pol":"-","subj":{"name":"b"}}]}'
    t = from_json(text)
    assert to_json_text(t) == text


def test_json_lists_the_hasse_relation():
    t = chain(("+", "a"), ("+", "b"), ("+", "c"))
    assert to_json(t)["order"] == [[1, 2], [2, 3]]


@pytest.mark.parametrize(
    "bad",
    [
        "[]",
        '{"events": [{"id": 1, "pol": "+"}]}',
        '{"events": [{"id": "1", "pol": "+", "subj": {"name": "a"}}]}',
        '{"events": [{"id": 1, "pol": "+", "subj": {"name": "a"}}], "order": [[1, 2]]}',
        '{"events": [{"id": 1, "pol": "+", "subj": {"event": 1}}]}',
        '{"events": [], "extra": 1}',
        '{"ready": [{"pol": "+", "subj": {"name": "a", "event": 1}}]}',
    ],
)
def test_json_rejects_malformed(bad):
    with pytest.raises(ValueError):
        from_json(bad)


def test_json_round_trip(rng):
    for _ in range(200):
        t = random_trace(rng, 4)
        text = to_json_text(t)
        assert from_json(text) == t
        assert to_json_text(from_json(text)) == text


def test_linear_combination_json():
    lc = decompose(P("a.1 | b.1"))
    back = LinearCombination.from_json(json.loads(json.dumps(lc.to_json())))
    assert back == lc and back.semiring.name == "nat"
    assert 0 not in lc.values()


def test_linear_combination_drops_zero():
    lc = LinearCombination("nat")
    lc.add(EMPTY, 0)
    assert lc == {}


# -- extraction and implementation -------------------------------------------


def _extract_all(text):
    s = P(text)
    return [extract_trace(s, rho) for rho in exhaustive_pretraces(s)]


def test_extract_examples():
    assert _extract_all("1") == [EMPTY]
    assert _extract_all("a.0") == [make_trace({}, ready=[("+", "a")])]
    (t,) = _extract_all("lin a+(x). lin x+(z).1")
    assert t == make_trace({1: ("+", "a"), 2: ("+", 1)}, [(1, 2)])
    (t,) = _extract_all("lin a+(x).x.0")
    assert t == make_trace({1: ("+", "a")}, ready=[("+", 1)])
    assert sorted(_extract_all("lin a.1 | lin ~a.1")) == [EMPTY, antichain(("+", "a"), ("-", "a"))]


def test_extract_drops_private_inactions():
    (t,) = _extract_all("new a. (lin a+(x).x.0 | lin ~a.1)")
    assert t == EMPTY
    (t,) = _extract_all("new b. b.0 || lin a.1")
    assert t == antichain(("+", "a"))


def test_extract_rejects_non_exhaustive():
    s = P("lin a.1")
    (empty,) = [rho for rho in pretraces(s) if not rho.labels]
    with pytest.raises(ContractError):
        extract_trace(s, empty)


def test_implement_examples():
    assert alpha_equal(implement_trace(make_trace({}, ready=[("+", "a")])), P("a.0"))
    assert alpha_equal(implement_trace(EMPTY), P("1"))
    assert alpha_equal(implement_trace(antichain(("+", "a"))), P("lin a.1"))
    impl = implement_trace(chain(("+", "a"), ("-", "b")))
    assert print_term(impl) == "new x_1_2 y_1_2. ((lin a.lin ~y_1_2.1 || lin x_1_2.lin ~b.1) | lin y_1_2.lin ~x_1_2.1)"


def test_implement_avoids_public_names():
    t = chain(("+", "x_1_2"), ("+", "z_1"), ("-", "y_1_2"))
    impl = implement_trace(t)
    (rho,) = exhaustive_pretraces(impl)
    assert extract_trace(impl, rho) == t


def test_implementation_round_trip(rng):
    for _ in range(80):
        t = random_trace(rng, 3)
        impl = implement_trace(t)
        assert is_simple(impl)
        (rho,) = exhaustive_pretraces(impl)
        assert extract_trace(impl, rho) == t


# -- synchronisation ----------------------------------------------------------


def test_sync_examples():
    a = antichain(("+", "a"))
    assert sync_count(a, EMPTY) == 0
    assert sync_count(a, antichain(("-", "a"))) == 1
    assert sync_count(a, antichain(("+", "a"))) == 0
    assert sync_count(a, antichain(("-", "b"))) == 0
    assert sync_count(chain(("+", "a"), ("+", "b")), chain(("-", "b"), ("-", "a"))) == 0
    assert sync_count(chain(("+", "a"), ("+", "b")), antichain(("-", "a"), ("-", "b"))) == 1
    assert sync_count(antichain(("+", "a"), ("+", "a")), antichain(("-", "a"), ("-", "a"))) == 2
    # ready clash: one side refuses what the other offers
    t = make_trace({}, ready=[("+", "a")])
    assert sync_count(t, make_trace({}, ready=[("-", "a")])) == 0
    assert sync_count(t, make_trace({}, ready=[("+", "a")])) == 1
    assert sync_count(EMPTY, EMPTY) == 1


def test_sync_bound_subjects():
    t = make_trace({1: ("+", "a"), 2: ("+", 1)}, [(1, 2)])
    u = make_trace({1: ("-", "a"), 2: ("-", 1)}, [(1, 2)])
    assert sync_count(t, u) == 1
    v = make_trace({1: ("-", "a"), 2: ("-", "a")}, [(1, 2)])
    assert sync_count(t, v) == 0


def test_sync_is_symmetric(rng):
    for _ in range(300):
        t, u = random_trace(rng, 3), random_trace(rng, 3)
        assert sync_count(t, u) == sync_count(u, t)


def test_sync_matches_outcome(rng):
    hits = 0
    for _ in range(60):
        t = random_trace(rng, 2)
        u = dual(t) if rng.random() < 0.6 else random_trace(rng, 2)
        n = sync_count(t, u)
        assert n == sync_count_by_outcome(t, u)
        hits += n > 0
    assert hits > 10


# -- orders, duals, composition ------------------------------------------------


def test_total_orderings_examples():
    c = chain(("+", "a"), ("+", "b"), ("-", "a"))
    assert total_orderings(c) == [c]
    assert len(total_orderings(antichain(("+", "a"), ("+", "b")))) == 2
    for n in range(5):
        assert len(total_orderings(antichain(*[("+", "a")] * n))) == factorial(n)


def test_total_orderings_count(rng):
    for _ in range(100):
        t = random_trace(rng, 4)
        tots = total_orderings(t)
        assert len(tots) == count_linear_extensions(t)
        for u in tots:
            assert t.order <= u.order and u.ready == t.ready
            assert len(u.order) == len(u) * (len(u) - 1) // 2


def test_dual_is_an_involution(rng):
    for _ in range(100):
        t = random_trace(rng, 4)
        assert dual(dual(t)) == t
        d = dual(t)
        assert all(d.pol[e] != t.pol[e] for e in t.events)


def test_par_compose_examples():
    assert trace_par_compose(EMPTY, EMPTY) == {EMPTY: 1}
    lc = trace_par_compose(antichain(("+", "a")), antichain(("-", "a")))
    assert lc == {EMPTY: 1, antichain(("+", "a"), ("-", "a")): 1}


def test_par_compose_empty_coefficient_counts_syncs(rng):
    for _ in range(25):
        t = random_trace(rng, 2, max_ready=1)
        u = dual(t) if rng.random() < 0.5 else random_trace(rng, 2, max_ready=1)
        lc = trace_par_compose(t, u)
        closed = sum(v for tr, v in lc.items() if len(tr) == 0 and not tr.ready)
        assert closed == sync_count(t, u)


# -- decomposition --------------------------------------------------------------


def test_decompose_examples():
    assert decompose(P("1")) == {EMPTY: 1}
    assert decompose(P("0")) == {}
    assert decompose(P("a.1")) == {antichain(("+", "a")): 1, make_trace({}, ready=[("+", "a")]): 1}
    assert decompose(P("a.1 (+) a.1"), "bool01") == decompose(P("a.1"), "bool01")
    assert decompose(P("@a.1")) == decompose(P("a.1"))


def test_decompose_of_a_trace_implementation(rng):
    for _ in range(30):
        t = random_trace(rng, 3)
        assert decompose(implement_trace(t)) == {t: 1}


def test_decompose_identity(rng):
    contexts = enumerate_contexts(NAMES, 2)
    for _ in range(25):
        p = random_term(rng, 3)
        lc = decompose(p)
        impls = [(implement_trace(tr), v) for tr, v in lc.items()]
        for r in rng.sample(contexts, 10):
            expected = outcome(compose(p, r))
            assert sum(v * outcome(compose(i, r)) for i, v in impls) == expected, (print_term(p), print_term(r))


def test_simple_decomposition(rng):
    contexts = enumerate_contexts(NAMES, 2)
    for _ in range(25):
        s = random_simple(rng, rng.randint(0, 3))
        impls = [implement_trace(extract_trace(s, rho)) for rho in exhaustive_pretraces(s)]
        for r in rng.sample(contexts, 8):
            assert outcome(compose(s, r)) == sum(outcome(compose(i, r)) for i in impls)


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=0, max_value=2**32))
def test_canonical_key_is_relabelling_invariant(n):
    rng = random.Random(n)
    t = random_trace(rng, 4)
    ids = rng.sample(range(100, 200), len(t))
    assert t.relabel(dict(zip(t.events, ids))).key == t.key
