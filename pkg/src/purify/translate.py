"""Translations from direct-style source terms to combinator target terms.

``opt_translate`` is the one-pass optimizing translation built from the
smart constructors ``smart_ap`` and ``smart_join``: law-based collapses are
applied while the target term is constructed.  ``naive_translate`` uses the
same equations with raw constructors.  ``seq_translate`` is the do-notation
baseline: it linearizes every effect into a left-to-right chain of binds
(Join over Map), losing all parallelism.  ``normalize`` rewrites target
terms to a fixed point of the functor/applicative/monad laws.
"""

from __future__ import annotations

from typing import Optional

from .terms import (
    App, Ap, COM, Const, Each, FreshNames, Fst, Join, Lam, Lit, Map, Prd,
    Pure, PurifyError, Snd, TGT, Term, Unt, Var, relabel, size,
)


class FuelExhausted(PurifyError):
    """The rewrite system failed to reach a fixed point within its fuel."""


# ---------------------------------------------------------------------------
# Common-fragment embedding helpers
# ---------------------------------------------------------------------------

def _leaf_as_com(e: Term) -> Term:
    """Copy a source leaf or lambda into the common fragment."""
    match e:
        case Var(name):
            return Var(name, label=COM, ty=e.ty)
        case Const(name):
            return Const(name, label=COM, ty=e.ty)
        case Unt():
            return Unt(label=COM, ty=e.ty)
        case Lit(value):
            return Lit(value, label=COM, ty=e.ty)
        case Lam(param, body, param_ty):
            return Lam(param, body, param_ty, label=COM, ty=e.ty)
    raise PurifyError(f"not a value former: {type(e).__name__}")


def to_com(e: Term) -> Optional[Term]:
    """Rebuild a combinator-free term in the common fragment, or None.

    Used by the normalizer to embed function-position terms into fabricated
    lambda bodies.  Fails on combinators, effect marks, and sequencing
    lambdas (whose bodies are target terms).
    """
    match e:
        case Var(name):
            return Var(name, label=COM, ty=e.ty)
        case Const(name):
            return Const(name, label=COM, ty=e.ty)
        case Unt():
            return Unt(label=COM, ty=e.ty)
        case Lit(value):
            return Lit(value, label=COM, ty=e.ty)
        case Lam(param, body, param_ty):
            if _contains_non_com(body):
                return None
            return Lam(param, body, param_ty, label=COM, ty=e.ty)
        case Prd(a, b):
            ca, cb = to_com(a), to_com(b)
            return None if ca is None or cb is None else Prd(ca, cb, label=COM, ty=e.ty)
        case App(f, a):
            cf, ca = to_com(f), to_com(a)
            return None if cf is None or ca is None else App(cf, ca, label=COM, ty=e.ty)
        case Fst(p):
            cp = to_com(p)
            return None if cp is None else Fst(cp, label=COM, ty=e.ty)
        case Snd(p):
            cp = to_com(p)
            return None if cp is None else Snd(cp, label=COM, ty=e.ty)
        case _:
            return None


def _contains_non_com(body: Term) -> bool:
    from .terms import subterms

    return any(n.label is not COM for n in subterms(body))


# ---------------------------------------------------------------------------
# Smart constructors
# ---------------------------------------------------------------------------

def smart_ap(f: Term, e: Term, fresh: FreshNames | None = None) -> Term:
    """Applicative application with law-based collapses.

    Pure/Pure collapses by the homomorphism law; a Pure on either side
    collapses to a single Map by the identity and interchange laws; anything
    else keeps the parallel Ap node.
    """
    fresh = fresh or FreshNames()
    match f, e:
        case Pure(pf), Pure(pe):
            return Pure(App(pf, pe, label=COM), label=TGT)
        case Pure(pf), _:
            x = fresh.fresh()
            body = App(pf, Var(x, label=COM), label=COM)
            return Map(Lam(x, body, label=TGT), e, label=TGT)
        case _, Pure(pe):
            x = fresh.fresh()
            body = App(Var(x, label=COM), pe, label=COM)
            return Map(Lam(x, body, label=TGT), f, label=TGT)
        case _, _:
            return Ap(f, e, label=TGT)


def smart_join(e: Term) -> Term:
    """Effect flattening; a Pure payload embeds directly into the target."""
    match e:
        case Pure(inner):
            return relabel(inner, TGT)
        case _:
            return Join(e, label=TGT)


def opt_translate(e: Term, fresh: FreshNames | None = None) -> Term:
    """The optimizing one-pass translation from source to target."""
    fresh = fresh or FreshNames()

    def go(t: Term) -> Term:
        match t:
            case Var() | Const() | Unt() | Lit() | Lam():
                return Pure(_leaf_as_com(t), label=TGT)
            case Fst(p):
                x = fresh.fresh()
                lift = Lam(x, Fst(Var(x, label=COM), label=COM), p.ty, label=COM)
                return smart_ap(Pure(lift, label=TGT), go(p), fresh)
            case Snd(p):
                x = fresh.fresh()
                lift = Lam(x, Snd(Var(x, label=COM), label=COM), p.ty, label=COM)
                return smart_ap(Pure(lift, label=TGT), go(p), fresh)
            case Prd(a, b):
                # the inner lambda is never syntactically applied, so it keeps
                # its parameter type from the checked source
                x, y = fresh.fresh(), fresh.fresh()
                pair = Prd(Var(x, label=COM), Var(y, label=COM), label=COM)
                lift = Lam(x, Lam(y, pair, b.ty, label=COM), a.ty, label=COM)
                return smart_ap(
                    smart_ap(Pure(lift, label=TGT), go(a), fresh), go(b), fresh
                )
            case App(f, a):
                return smart_ap(go(f), go(a), fresh)
            case Each(inner):
                return smart_join(go(inner))
        raise PurifyError(f"not a source term former: {type(t).__name__}")

    return go(e)


def naive_translate(e: Term, fresh: FreshNames | None = None) -> Term:
    """Same equations as opt_translate but with raw constructors."""
    fresh = fresh or FreshNames()

    def go(t: Term) -> Term:
        match t:
            case Var() | Const() | Unt() | Lit() | Lam():
                return Pure(_leaf_as_com(t), label=TGT)
            case Fst(p):
                x = fresh.fresh()
                lift = Lam(x, Fst(Var(x, label=COM), label=COM), p.ty, label=COM)
                return Ap(Pure(lift, label=TGT), go(p), label=TGT)
            case Snd(p):
                x = fresh.fresh()
                lift = Lam(x, Snd(Var(x, label=COM), label=COM), p.ty, label=COM)
                return Ap(Pure(lift, label=TGT), go(p), label=TGT)
            case Prd(a, b):
                x, y = fresh.fresh(), fresh.fresh()
                pair = Prd(Var(x, label=COM), Var(y, label=COM), label=COM)
                lift = Lam(x, Lam(y, pair, b.ty, label=COM), a.ty, label=COM)
                return Ap(Ap(Pure(lift, label=TGT), go(a), label=TGT), go(b), label=TGT)
            case App(f, a):
                return Ap(go(f), go(a), label=TGT)
            case Each(inner):
                return Join(go(inner), label=TGT)
        raise PurifyError(f"not a source term former: {type(t).__name__}")

    return go(e)


# ---------------------------------------------------------------------------
# Sequential (do-notation) baseline
# ---------------------------------------------------------------------------

def seq_translate(e: Term, fresh: FreshNames | None = None) -> Term:
    """Fully sequential translation: one left-to-right chain of binds.

    The term is linearized into do-notation bindings, one per effect mark in
    evaluation order (function before argument, left pair component before
    right).  Each bind is the Join-over-Map pattern; the continuation
    lambdas carry explicit combinator bodies, which is what distinguishes
    this baseline from the common-fragment lambdas of the main translation.
    The output contains no Ap node.
    """
    fresh = fresh or FreshNames()
    bindings: list[tuple[str, Term]] = []

    def compile_(t: Term) -> Term:
        """Common-fragment value of ``t``; effect marks become bindings."""
        match t:
            case Var() | Const() | Unt() | Lit() | Lam():
                return _leaf_as_com(t)
            case Prd(a, b):
                ca = compile_(a)
                cb = compile_(b)
                return Prd(ca, cb, label=COM)
            case Fst(p):
                return Fst(compile_(p), label=COM)
            case Snd(p):
                return Snd(compile_(p), label=COM)
            case App(f, a):
                cf = compile_(f)
                ca = compile_(a)
                return App(cf, ca, label=COM)
            case Each(inner):
                payload = compile_(inner)
                name = fresh.fresh()
                bindings.append((name, payload))
                return Var(name, label=COM)
        raise PurifyError(f"not a source term former: {type(t).__name__}")

    final = compile_(e)
    return _build_chain(bindings, final)


def _build_chain(bindings: list[tuple[str, Term]], final: Term) -> Term:
    if not bindings:
        return Pure(final, label=TGT)
    name, payload = bindings[0]
    action = relabel(payload, TGT)
    if len(bindings) == 1:
        return Map(Lam(name, final, label=TGT), action, label=TGT)
    rest = _build_chain(bindings[1:], final)
    return Join(Map(Lam(name, rest, label=TGT), action, label=TGT), label=TGT)


# ---------------------------------------------------------------------------
# Law-based normalizer
# ---------------------------------------------------------------------------

def normalize(e: Term, reassoc: bool = False) -> Term:
    """Rewrite a target term to a fixed point of the law rules.

    Rules: map identity, map composition, the Ap collapses (homomorphism,
    identity, interchange -- the same collapses smart_ap performs), the two
    left-unit forms, right unit, and bind associativity.  The ap-composition
    reassociation is only applied when ``reassoc`` is set.  Fuel is derived
    from term size; exhausting it signals a bug in the rule system.
    """
    sweeps = 4 * size(e) + 4
    fire_cap = 1000 * size(e) + 1000
    fresh = FreshNames()
    cur = e
    fires = 0
    for _ in range(sweeps):
        cur, fired = _sweep(cur, reassoc, fresh)
        if not fired:
            return cur
        fires += fired
        if fires > fire_cap:
            break
    raise FuelExhausted(
        f"normalize did not reach a fixed point within {sweeps} passes"
    )


def _sweep(e: Term, reassoc: bool, fresh: FreshNames) -> tuple[Term, int]:
    """One innermost-first pass; returns the new term and rules fired."""
    from .terms import children, replace_children

    fired = 0
    kids = children(e)
    if kids:
        new_kids = []
        for k in kids:
            nk, f = _sweep(k, reassoc, fresh)
            fired += f
            new_kids.append(nk)
        e = replace_children(e, tuple(new_kids))
    while True:
        out = _apply_rule(e, reassoc, fresh)
        if out is None:
            return e, fired
        e = out
        fired += 1


def _is_identity_lam(f: Term) -> bool:
    return (
        isinstance(f, Lam)
        and isinstance(f.body, Var)
        and f.body.name == f.param
    )


def _is_pure_eta(f: Term) -> bool:
    """Lam x -> pure x, the right-unit continuation."""
    return (
        isinstance(f, Lam)
        and isinstance(f.body, Pure)
        and isinstance(f.body.inner, Var)
        and f.body.inner.name == f.param
    )


def _apply_rule(e: Term, reassoc: bool, fresh: FreshNames) -> Optional[Term]:
    match e:
        case Map(f, a):
            if _is_identity_lam(f):
                return a
            if isinstance(a, Map):
                cf, cg = to_com(f), to_com(a.fun)
                if cf is not None and cg is not None:
                    x = fresh.fresh()
                    body = App(cf, App(cg, Var(x, label=COM), label=COM), label=COM)
                    return Map(Lam(x, body, label=TGT), a.arg, label=TGT)
        case Ap(f, a):
            if isinstance(f, Pure) and isinstance(a, Pure):
                return Pure(App(f.inner, a.inner, label=COM), label=TGT)
            if isinstance(f, Pure):
                x = fresh.fresh()
                body = App(f.inner, Var(x, label=COM), label=COM)
                return Map(Lam(x, body, label=TGT), a, label=TGT)
            if isinstance(a, Pure):
                x = fresh.fresh()
                body = App(Var(x, label=COM), a.inner, label=COM)
                return Map(Lam(x, body, label=TGT), f, label=TGT)
            if reassoc and isinstance(a, Ap):
                u, v, w = f, a.fun, a.arg
                # parameter annotations come from the checker's type stamps;
                # without them the inner composition lambdas cannot be typed
                from .terms import Eff as EffTy

                tys = (u.ty, v.ty, w.ty)
                if not all(isinstance(t, EffTy) for t in tys):
                    return None
                cx, cg, cv = fresh.fresh(), fresh.fresh(), fresh.fresh()
                compose = Lam(
                    cx,
                    Lam(
                        cg,
                        Lam(
                            cv,
                            App(
                                Var(cx, label=COM),
                                App(Var(cg, label=COM), Var(cv, label=COM), label=COM),
                                label=COM,
                            ),
                            tys[2].inner,
                            label=COM,
                        ),
                        tys[1].inner,
                        label=COM,
                    ),
                    tys[0].inner,
                    label=TGT,
                )
                return Ap(Ap(Map(compose, u, label=TGT), v, label=TGT), w, label=TGT)
        case Join(inner):
            if isinstance(inner, Pure):
                return relabel(inner.inner, TGT)  # left unit, join form
            if isinstance(inner, Map):
                g, x = inner.fun, inner.arg
                if isinstance(x, Pure):
                    # left unit, bind form: running a pure action is application
                    return App(g, relabel(x.inner, TGT), label=TGT)
                if _is_pure_eta(g):
                    return x  # right unit
                if isinstance(x, Join) and isinstance(x.nested, Map):
                    # associativity: bind g (bind f e) = bind (bind g . f) e
                    f_in, e_in = x.nested.fun, x.nested.arg
                    v = fresh.fresh()
                    rebound = Join(
                        Map(g, App(f_in, Var(v, label=TGT), label=TGT), label=TGT),
                        label=TGT,
                    )
                    return Join(
                        Map(Lam(v, rebound, label=TGT), e_in, label=TGT), label=TGT
                    )
    return None
