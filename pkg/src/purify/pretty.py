"""Deterministic, re-parseable rendering of core terms.

Source and common fragments use the surface grammar (calls are printed in
glued call style, ``f("a")!``); target terms use the combinator keywords
``pure``, ``map``, ``ap`` and ``join`` in prefix form.
"""

from __future__ import annotations

from .terms import (
    App, Ap, Arrow, Const, Each, Fst, Join, Lam, Lit, Map, Prd, Pure,
    Snd, Term, Unt, Var, type_name,
)

CONCAT_NAME = "concat"


def escape_string(s: str) -> str:
    out = []
    for ch in s:
        if ch == "\\":
            out.append("\\\\")
        elif ch == '"':
            out.append('\\"')
        elif ch == "\n":
            out.append("\\n")
        elif ch == "\t":
            out.append("\\t")
        else:
            out.append(ch)
    return '"' + "".join(out) + '"'


def pretty(e: Term) -> str:
    """Render a term; parse(pretty(e)) is alpha-equivalent to e."""
    return _expr(e)


def _is_concat_app(e: Term) -> bool:
    return (
        isinstance(e, App)
        and isinstance(e.fun, App)
        and isinstance(e.fun.fun, Const)
        and e.fun.fun.name == CONCAT_NAME
    )


def _expr(e: Term) -> str:
    if _is_concat_app(e):
        return f"{_operand(e.fun.arg)} ++ {_operand(e.arg)}"
    return _operand(e)


def _operand(e: Term) -> str:
    match e:
        case Lam(param, body, _):
            lam = f"fun {param} -> {_expr(body)}"
            if e.param_ty is not None and isinstance(e.ty, Arrow):
                return f"({lam} : {type_name(e.ty)})"
            return f"({lam})"
        case Each(inner):
            return f"{_post(inner)}!"
        case Fst(p):
            return f"{_post(p)}.1"
        case Snd(p):
            return f"{_post(p)}.2"
        case App():
            return _call(e)
        case Pure(inner):
            return f"pure {_atom(inner)}"
        case Map(f, a):
            return f"map {_atom(f)} {_atom(a)}"
        case Ap(f, a):
            return f"ap {_atom(f)} {_atom(a)}"
        case Join(inner):
            return f"join {_atom(inner)}"
        case _:
            return _atom(e)


def _call(e: App) -> str:
    if _is_concat_app(e):
        return f"({_expr(e)})"
    return f"{_post(e.fun)}({_expr(e.arg)})"


def _post(e: Term) -> str:
    """Position that may take glued postfix operators (call, !, .1, .2)."""
    match e:
        case Var(name) | Const(name):
            return name
        case Unt() | Lit() | Prd():
            return _atom(e)
        case App():
            return _call(e)
        case Fst(p):
            return f"{_post(p)}.1"
        case Snd(p):
            return f"{_post(p)}.2"
        case Each(inner):
            return f"{_post(inner)}!"
        case Lam():
            return _operand(e)  # already parenthesized
        case _:
            return f"({_expr(e)})"


def _atom(e: Term) -> str:
    match e:
        case Var(name) | Const(name):
            return name
        case Unt():
            return "()"
        case Lit(value):
            return escape_string(value)
        case Prd(a, b):
            return f"({_expr(a)}, {_expr(b)})"
        case Lam():
            return _operand(e)  # already parenthesized
        case _:
            return f"({_expr(e)})"


def pretty_program(sig, body: Term) -> str:
    """Render declarations plus a purify block (round-trips through parse)."""
    lines = [f"{decl.kind.value} {decl.name} : {type_name(decl.ty)}" for decl in sig]
    lines.append(f"purify {{ {pretty(body)} }}")
    return "\n".join(lines) + "\n"
