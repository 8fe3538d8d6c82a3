import pytest
from hypothesis import given, strategies as st

from purify.pretty import escape_string, pretty, pretty_program
from purify.propcheck import GenConfig, default_signature, gen_term
from purify.surface import (
    DuplicateDecl, LetTooEffectful, MarkUnderLambda, ParseError, UnboundName,
    elaborate, parse, parse_and_elaborate, parse_target_expr, tokenize,
)
from purify.check import TypeEnv, typecheck
from purify.terms import (
    App, Arrow, COM, Const, Each, Eff, Lam, Lit, Prd, Pure, SRC, STR,
    Signature, TGT, UNIT, Var, alpha_eq, subterms,
)
from purify.translate import naive_translate, opt_translate, seq_translate


def test_minimal_program():
    sig, body = parse_and_elaborate('effect f : Str -> Eff Str\npurify { f("a")! }')
    assert sig.lookup("f").effectful
    expected = Each(App(Const("f", label=SRC), Lit("a", label=SRC), label=SRC), label=SRC)
    assert body == expected


def test_nested_marks_program():
    text = """
    prim concat : Str -> Str -> Str
    prim xx : Str
    prim yy : Str
    effect fetch : Str -> Eff Str
    purify { (fetch(fetch(xx)!)! ++ fetch(fetch(yy)!)!) }
    """
    sig, body = parse_and_elaborate(text)
    # concat applied to two doubly-nested marked fetches
    assert isinstance(body, App)
    marks = [n for n in subterms(body) if isinstance(n, Each)]
    assert len(marks) == 4


def test_mark_under_lambda_rejected():
    with pytest.raises(MarkUnderLambda):
        parse_and_elaborate('effect f : Str -> Eff Str\npurify { fun x -> f(x)! }')


def test_comments_and_whitespace():
    sig, body = parse_and_elaborate(
        "-- leading comment\nprim a : Str -- trailing\npurify { a }\n"
    )
    assert body == Const("a", label=SRC)


def test_duplicate_decl():
    with pytest.raises(DuplicateDecl):
        parse("prim a : Str\nprim a : Str\npurify { a }")


def test_unbound_name():
    with pytest.raises(UnboundName):
        parse_and_elaborate("purify { ghost }")


def test_parse_error_positions():
    with pytest.raises(ParseError) as ei:
        parse("purify { (a }")
    assert ei.value.line == 1


def test_let_pure_binding():
    sig, body = parse_and_elaborate(
        'prim shout : Str -> Str\npurify { let x = "a" in shout(x) }'
    )
    # App(Lam x. shout x, "a"), lambda body common
    assert isinstance(body, App)
    assert isinstance(body.fun, Lam)
    assert body.fun.body.label is COM
    assert typecheck(body, SRC, TypeEnv(sig)) == STR


def test_let_single_mark_hoists():
    sig, body = parse_and_elaborate(
        'effect f : Str -> Eff Str\npurify { let x = "a" in f(x)! }'
    )
    expected = Each(
        App(
            Lam("x", App(Const("f", label=COM), Var("x", label=COM), label=COM),
                label=SRC),
            Lit("a", label=SRC),
            label=SRC,
        ),
        label=SRC,
    )
    assert alpha_eq(body, expected)
    assert typecheck(body, SRC, TypeEnv(sig)) == STR


def test_let_effectful_binding_rejected():
    with pytest.raises(LetTooEffectful):
        parse_and_elaborate('effect f : Str -> Eff Str\npurify { let x = f("a")! in x }')


def test_let_multi_mark_continuation_rejected():
    with pytest.raises(LetTooEffectful) as ei:
        parse_and_elaborate(
            'effect f : Str -> Eff Str\n'
            'purify { let x = "a" in (f(x)!, f(x)!) }'
        )
    assert "nested marks" in str(ei.value)


def test_glued_call_parens_bind_tighter_than_mark():
    sig, body = parse_and_elaborate('effect f : Str -> Eff Str\npurify { f("a")! }')
    assert isinstance(body, Each)
    assert isinstance(body.eff, App)


def test_spaced_paren_is_plain_application():
    # f ("a"!) would be ill-typed; use a pure function around a marked arg
    sig, body = parse_and_elaborate(
        'prim shout : Str -> Str\neffect f : Str -> Eff Str\n'
        'purify { shout (f("a")!) }'
    )
    assert isinstance(body, App)
    assert isinstance(body.arg, Each)


def test_postfix_chains():
    sig, body = parse_and_elaborate(
        'prim p : ((Str, Str), Str)\npurify { (((p))).1.2 }'
    )
    from purify.terms import Fst, Snd
    assert isinstance(body, Snd) and isinstance(body.pair, Fst)

    sig, body = parse_and_elaborate(
        'effect pair : Str -> Eff (Str, Str)\nprim q : Str\npurify { pair(q)!.1 }'
    )
    from purify.terms import Fst as FstNode
    assert isinstance(body, FstNode) and isinstance(body.pair, Each)
    assert pretty(body) == "pair(q)!.1"


def test_concat_requires_declaration():
    with pytest.raises(UnboundName):
        parse_and_elaborate('purify { "a" ++ "b" }')


def test_annotation_on_lambda():
    sig, body = parse_and_elaborate("purify { (fun x -> x : Str -> Str) }")
    assert isinstance(body, Lam)
    assert body.param_ty == STR
    assert typecheck(body, SRC, TypeEnv(sig)) == Arrow(STR, STR)


def test_reserved_prefix_rejected_in_programs():
    with pytest.raises(ParseError):
        parse("purify { $x }")
    with pytest.raises(ParseError):
        parse("prim $a : Str\npurify { () }")


def test_elaborate_produces_no_combinators():
    for i in range(100):
        t = gen_term(GenConfig(max_depth=5, seed=9100 + i, label=SRC))
        text = pretty_program(default_signature(), t)
        _, body = parse_and_elaborate(text)
        assert not any(isinstance(n, Pure) for n in subterms(body))


def test_roundtrip_generated_programs():
    sig = default_signature()
    for i in range(300):
        t = gen_term(GenConfig(max_depth=5, seed=8800 + i, label=SRC))
        sig2, back = parse_and_elaborate(pretty_program(sig, t))
        assert alpha_eq(t, back)


def test_roundtrip_translations():
    sig = default_signature()
    env = TypeEnv(sig)
    for i in range(120):
        t = gen_term(GenConfig(max_depth=5, seed=7300 + i, label=SRC))
        for translate in (opt_translate, naive_translate, seq_translate):
            out = translate(t)
            typecheck(out, TGT, env)
            rendered = pretty(out)
            back = parse_target_expr(rendered, sig)
            assert alpha_eq(out, back)
            # pretty is a fixed point of parse . pretty on checked target terms
            typecheck(back, TGT, env)
            assert pretty(back) == rendered


def test_roundtrip_generated_target_terms():
    from purify.terms import Eff as EffTy
    sig = default_signature()
    env = TypeEnv(sig)
    for i in range(200):
        t = gen_term(GenConfig(max_depth=5, seed=6100 + i, label=TGT))
        typecheck(t, TGT, env)
        rendered = pretty(t)
        back = parse_target_expr(rendered, sig)
        assert alpha_eq(t, back), rendered


def test_pretty_examples():
    from purify.terms import Ap, Unt
    assert pretty(Unt(label=COM)) == "()"
    t = Each(App(Const("fetch", label=SRC), Lit("u", label=SRC), label=SRC), label=SRC)
    assert pretty(t) == 'fetch("u")!'
    t2 = Ap(
        Pure(Lam("x", Var("x", label=COM), label=COM), label=TGT),
        Const("ff", label=TGT),
        label=TGT,
    )
    assert pretty(t2) == "ap (pure (fun x -> x)) ff"


@given(st.text(alphabet=st.characters(codec="ascii"), max_size=30))
def test_string_literal_roundtrip(s):
    toks = tokenize(escape_string(s))
    assert toks[0].kind == "string"
    assert toks[0].text == s


def test_tokenizer_rejects_unterminated_string():
    with pytest.raises(ParseError):
        tokenize('"abc')


def test_parse_target_rejects_marks_and_lets():
    sig = Signature()
    with pytest.raises(ParseError):
        parse_target_expr("x!", sig)
    with pytest.raises(ParseError):
        parse_target_expr('let x = "a" in x', sig)
