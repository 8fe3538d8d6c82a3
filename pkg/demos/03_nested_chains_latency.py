"""Mixed sequential/parallel code and what it costs at run time.

Each side fetches a config url and then fetches what it points to (strictly
sequential), but the two sides are independent of each other.  The trace
monad records every executed effect in a dependency DAG; simulating 100ms
per fetch shows 200ms for the mixed translation against 400ms for the
fully sequential baseline.
"""

from purify import SRC, TGT, parse_and_elaborate, pretty, span, work
from purify.check import TypeEnv, typecheck
from purify.metrics import dyn_span, dyn_work, simulate_latency, to_dot
from purify.semantics import evaluate, make_const_env, trace_monad
from purify.translate import opt_translate, seq_translate

sig, body = parse_and_elaborate("""
prim concat : Str -> Str -> Str
prim urlXX : Str
prim urlYY : Str
effect fetch : Str -> Eff Str
purify { fetch(fetch(urlXX)!)! ++ fetch(fetch(urlYY)!)! }
""")
env = TypeEnv(sig)
typecheck(body, SRC, env)
print("source:", pretty(body))
print("static span/work:", span(body, sig), "/", work(body, sig))

opt = opt_translate(body)
seq = seq_translate(body)
for t in (opt, seq):
    typecheck(t, TGT, env)

print("\nmixed translation:", pretty(opt))
print("sequential baseline:", pretty(seq))

m = trace_monad()
cenv = make_const_env(sig, m)
latency = {"fetch": 100.0}

for name, term in (("mixed", opt), ("sequential", seq)):
    dag = evaluate(term, TGT, m, cenv).action
    print(f"\n{name}:")
    print("  static span/work :", span(term, sig), "/", work(term, sig))
    print("  dynamic span/work:", dyn_span(dag), "/", dyn_work(dag))
    print("  simulated latency:", simulate_latency(dag, latency), "ms")

dag = evaluate(opt, TGT, m, cenv).action
print("\ntrace DAG of the mixed translation (graphviz):")
print(to_dot(dag))
