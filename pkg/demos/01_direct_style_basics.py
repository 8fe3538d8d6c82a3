"""Direct-style effect programs: parsing, elaboration, checking, printing.

A program declares its constants and wraps one expression in a purify
block.  The postfix ! mark executes an effect in place; everything else is
ordinary expression syntax.
"""

from purify import (
    SRC, parse, elaborate, pretty, type_name,
    MarkUnderLambda, LetTooEffectful,
)
from purify.check import TypeEnv, typecheck

program = """
-- fetch a url, then fetch what it points to
prim concat : Str -> Str -> Str
effect fetch : Str -> Eff Str
purify { fetch(fetch("https://example.org/config")!)! ++ "!" }
"""

print("== program ==")
print(program.strip())

sig, body = elaborate(parse(program))
print("\ndeclared constants:", ", ".join(d.name for d in sig))

ty = typecheck(body, SRC, TypeEnv(sig))
print("the purify block has type:", type_name(ty))
print("elaborated core term:", pretty(body))

# The mark cannot appear under a lambda: lambda bodies are pure functions.
print("\n== what the language rejects ==")
try:
    elaborate(parse("effect f : Str -> Eff Str\npurify { fun x -> f(x)! }"))
except MarkUnderLambda as exc:
    print("mark under lambda:", exc)

# let is sugar for immediate application; the bound expression must be pure
# and at most one mark may sit at the root of the continuation.
ok = 'effect f : Str -> Eff Str\npurify { let x = "a" in f(x)! }'
sig2, body2 = elaborate(parse(ok))
print("\nlet sugar desugars to:", pretty(body2))

try:
    elaborate(parse('effect f : Str -> Eff Str\npurify { let x = f("a")! in x }'))
except LetTooEffectful as exc:
    print("effectful let binding:", exc)
