import pytest
from hypothesis import given, strategies as st

from purify.check import TypeEnv, typecheck
from purify.metrics import (
    CyclicDag, DagNode, TraceDag, UnknownEffect, dag_iso, dyn_span, dyn_work,
    empty_dag, parallel_compose, sequential_compose, simulate_latency,
    single_effect, span, to_dot, work,
)
from purify.propcheck import GenConfig, default_signature, gen_term
from purify.semantics import VUNIT, evaluate, make_const_env, trace_monad
from purify.terms import (
    App, COM, Const, Each, Lam, Lit, Prd, SRC, TGT, Var, relabel,
)
from purify.translate import naive_translate, opt_translate, seq_translate


@pytest.fixture
def sig():
    return default_signature()


def _fetch(lit, lab=SRC):
    return App(Const("fetch", label=lab), Lit(lit, label=lab), label=lab)


def test_span_work_two_fetch_pair(sig):
    t = Prd(Each(_fetch("foo"), label=SRC), Each(_fetch("bar"), label=SRC), label=SRC)
    assert span(t, sig) == 1
    assert work(t, sig) == 2


def test_span_work_of_translated_pair(two_fetches):
    sig, body = two_fetches
    out = opt_translate(body)
    typecheck(out, TGT, TypeEnv(sig))
    assert span(out, sig) == 1
    assert work(out, sig) == 2


def test_values_cost_nothing(sig):
    lam = Lam("x", Var("x", label=COM), label=COM)
    assert span(lam, sig) == 0 and work(lam, sig) == 0


def test_two_chain_program_metrics(two_chains):
    sig, body = two_chains
    assert (span(body, sig), work(body, sig)) == (2, 4)
    opt = opt_translate(body)
    naive = naive_translate(body)
    seq = seq_translate(body)
    env = TypeEnv(sig)
    for t in (opt, naive, seq):
        typecheck(t, TGT, env)
    assert (span(opt, sig), work(opt, sig)) == (2, 4)
    assert (span(seq, sig), work(seq, sig)) == (4, 4)


def test_span_without_signature_counts_marks_only(two_fetches):
    sig, body = two_fetches
    assert span(body) == 1 and work(body) == 2
    out = opt_translate(body)
    typecheck(out, TGT, TypeEnv(sig))
    # without the signature, embedded target calls are invisible
    assert span(out) == 0 and work(out) == 0
    assert span(out, sig) == 1


def test_span_le_work_generated(sig):
    for label in (SRC, TGT):
        for i in range(300):
            t = gen_term(GenConfig(max_depth=5, seed=12000 + i, label=label))
            assert span(t, sig) <= work(t, sig)


# ---------------------------------------------------------------------------
# Trace DAGs
# ---------------------------------------------------------------------------

def test_empty_dag():
    d = empty_dag(VUNIT)
    assert dyn_span(d) == 0 and dyn_work(d) == 0
    assert simulate_latency(d, {}) == 0.0


def test_two_independent_nodes():
    d = parallel_compose(single_effect("f", "", VUNIT), single_effect("f", "", VUNIT), VUNIT)
    assert dyn_span(d) == 1 and dyn_work(d) == 2


def test_chain_of_four():
    d = single_effect("f", "0", VUNIT)
    for i in range(3):
        d = sequential_compose(d, single_effect("f", str(i + 1), VUNIT), VUNIT)
    assert dyn_span(d) == 4 and dyn_work(d) == 4
    assert simulate_latency(d, {"f": 100.0}) == 400.0


def test_latency_parallel_vs_sequential():
    two_par = parallel_compose(single_effect("f", "", VUNIT), single_effect("f", "", VUNIT), VUNIT)
    assert simulate_latency(two_par, {"f": 100.0}) == 100.0
    two_seq = sequential_compose(single_effect("f", "", VUNIT), single_effect("f", "", VUNIT), VUNIT)
    assert simulate_latency(two_seq, {"f": 100.0}) == 200.0


def test_unknown_effect():
    d = single_effect("mystery", "", VUNIT)
    with pytest.raises(UnknownEffect):
        simulate_latency(d, {"f": 1.0})


def test_cyclic_dag_rejected():
    d = TraceDag(
        (DagNode(1, "f", ""), DagNode(2, "f", "")),
        frozenset({(1, 2), (2, 1)}),
        VUNIT,
    )
    with pytest.raises(CyclicDag):
        dyn_span(d)


def test_dag_iso_respects_labels_and_shape():
    a = sequential_compose(single_effect("f", "x", VUNIT), single_effect("g", "y", VUNIT), VUNIT)
    b = sequential_compose(single_effect("f", "x", VUNIT), single_effect("g", "y", VUNIT), VUNIT)
    assert dag_iso(a, b)
    flipped = sequential_compose(single_effect("g", "y", VUNIT), single_effect("f", "x", VUNIT), VUNIT)
    assert not dag_iso(a, flipped)
    par = parallel_compose(single_effect("f", "x", VUNIT), single_effect("g", "y", VUNIT), VUNIT)
    assert not dag_iso(a, par)


def test_to_dot_deterministic():
    d = sequential_compose(single_effect("f", "u", VUNIT), single_effect("g", "", VUNIT), VUNIT)
    dot = to_dot(d)
    assert 'n0 [label="f(u)"];' in dot
    assert "n0 -> n1;" in dot
    assert dot == to_dot(d)


# ---------------------------------------------------------------------------
# Static/dynamic agreement
# ---------------------------------------------------------------------------

def test_static_equals_dynamic_on_source_terms(sig):
    m = trace_monad()
    env = make_const_env(sig, m)
    checked = 0
    for i in range(250):
        t = gen_term(GenConfig(max_depth=5, seed=13000 + i, label=SRC))
        ty = typecheck(t, SRC, TypeEnv(sig))
        from purify.terms import Arrow as ArrowTy
        if isinstance(ty, ArrowTy):
            continue  # function results defer their effects
        d = evaluate(t, SRC, m, env)
        assert dyn_span(d) == span(t, sig), i
        assert dyn_work(d) == work(t, sig), i
        checked += 1
    assert checked > 150


def test_translated_dynamics_bounded_by_source_statics(sig):
    m = trace_monad()
    env = make_const_env(sig, m)
    for i in range(250):
        t = gen_term(GenConfig(max_depth=5, seed=14000 + i, label=SRC))
        ty = typecheck(t, SRC, TypeEnv(sig))
        from purify.terms import Arrow as ArrowTy, Eff as EffTy
        if isinstance(ty, (ArrowTy, EffTy)):
            continue
        out = opt_translate(t)
        typecheck(out, TGT, TypeEnv(sig))
        d = evaluate(out, TGT, m, env).action
        assert dyn_span(d) <= span(t, sig)
        assert dyn_work(d) <= work(t, sig)


@given(st.integers(1, 8), st.integers(0, 7), st.data())
def test_dyn_span_le_dyn_work_random_dags(n, extra_edges, data):
    nodes = tuple(DagNode(i, f"e{i % 3}", "") for i in range(1, n + 1))
    edges = set()
    for _ in range(extra_edges):
        a = data.draw(st.integers(1, n))
        b = data.draw(st.integers(1, n))
        if a < b:
            edges.add((a, b))  # forward edges only: acyclic
    d = TraceDag(nodes, frozenset(edges), VUNIT)
    assert dyn_span(d) <= dyn_work(d)


def test_relabelled_common_terms_stay_effect_free(sig):
    for i in range(200):
        t = gen_term(GenConfig(max_depth=5, seed=15000 + i, label=COM))
        typecheck(t, COM, TypeEnv(sig))
        out = relabel(t, TGT)
        assert span(out, sig) == 0 and work(out, sig) == 0
