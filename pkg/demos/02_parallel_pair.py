"""The two-fetch pair: independent marks translate to applicative code.

The pair components do not depend on each other, so the mixed translation
keeps them parallel (one Ap) instead of chaining them (two binds).  Span
counts the longest chain of effects, work counts all of them: span 1 at
work 2 means the two fetches can run at the same time.
"""

from purify import SRC, TGT, parse_and_elaborate, pretty, span, work
from purify.check import TypeEnv, typecheck
from purify.translate import naive_translate, opt_translate, seq_translate

sig, body = parse_and_elaborate("""
prim concat : Str -> Str -> Str
effect fetch : Str -> Eff Str
purify { (fetch("foo")!, fetch("bar")!) }
""")
env = TypeEnv(sig)
typecheck(body, SRC, env)

print("source:           ", pretty(body))
print("source span/work: ", span(body, sig), "/", work(body, sig))

opt = opt_translate(body)
typecheck(opt, TGT, env)
print("\noptimizing translation (smart constructors):")
print("  ", pretty(opt))
print("   span/work:", span(opt, sig), "/", work(opt, sig), " -- parallelism kept")

naive = naive_translate(body)
typecheck(naive, TGT, env)
print("\nnaive translation (raw constructors, same meaning, more wrapping):")
print("  ", pretty(naive))

seq = seq_translate(body)
typecheck(seq, TGT, env)
print("\nsequential baseline (do-notation style, every effect chained):")
print("  ", pretty(seq))
print("   span/work:", span(seq, sig), "/", work(seq, sig), " -- parallelism lost")
