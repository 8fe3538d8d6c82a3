"""Law-based rewriting of target terms.

The normalizer runs the functor/applicative/monad laws as rewrite rules to
a fixed point: map identity and fusion, the Ap collapses, both unit laws,
and bind associativity.  The optimizing translation already applies the
same collapses while building terms, so its output is usually normal; the
naive translation shows the rules doing real work.
"""

from purify import COM, SRC, TGT, parse_and_elaborate, pretty, span, work
from purify.check import TypeEnv, typecheck
from purify.semantics import actions_agree, builtin_monads, evaluate, make_const_env
from purify.terms import Const, Join, Lam, Map, Pure, Var, alpha_eq
from purify.translate import naive_translate, normalize, opt_translate
from purify.propcheck import default_signature

sig = default_signature()
env = TypeEnv(sig)

print("== single rules ==")
j = Join(Pure(Const("probe", label=COM), label=TGT), label=TGT)
typecheck(j, TGT, env)
print(f"  {pretty(j)}  ~>  {pretty(normalize(j))}    (left unit)")

i = Map(Lam("x", Var("x", label=COM), label=TGT), Const("probe", label=TGT), label=TGT)
typecheck(i, TGT, env)
print(f"  {pretty(i)}  ~>  {pretty(normalize(i))}    (map identity)")

print("\n== cleaning up a naive translation ==")
psig, body = parse_and_elaborate("""
prim concat : Str -> Str -> Str
effect fetch : Str -> Eff Str
purify { fetch(fetch("u")!)! }
""")
penv = TypeEnv(psig)
src_ty = typecheck(body, SRC, penv)
raw = naive_translate(body)
typecheck(raw, TGT, penv)
slim = normalize(raw)
typecheck(slim, TGT, penv)
opt = opt_translate(body)
typecheck(opt, TGT, penv)

print("  naive:     ", pretty(raw))
print("  normalized:", pretty(slim))
print("  one-pass:  ", pretty(opt))
print("  normalize(naive) == one-pass (up to renaming):", alpha_eq(slim, opt))
print("  span/work: naive", span(raw, psig), work(raw, psig),
      "-> normalized", span(slim, psig), work(slim, psig))

for m in builtin_monads():
    cenv = make_const_env(psig, m)
    a = evaluate(raw, TGT, m, cenv).action
    b = evaluate(slim, TGT, m, cenv).action
    assert actions_agree(src_ty, m, a, b)
print("  meaning preserved under all four monads: True")
