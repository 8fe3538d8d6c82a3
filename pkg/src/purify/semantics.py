"""Evaluation of guest terms under pluggable lawful monads.

Source terms evaluate to monadic actions; common and target terms evaluate
directly to values, with the target combinators mapped onto the active
monad's operations.  Four builtin monads are provided (option, state,
writer, trace), plus a deliberately order-flipped writer whose ``ap`` runs
its argument before its function: it satisfies every law, yet distinguishes
the applicative from the left-to-right bind chaining -- which is exactly why
the translation keeps Ap nodes instead of lowering them to binds.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Optional

from .metrics import TraceDag, dag_iso, empty_dag, parallel_compose, sequential_compose, single_effect
from .terms import (
    App, Ap, Arrow, Const, Each, Eff, Fst, Join, Label, Lam, Lit, Map,
    Prd, Prod, Pure, PurifyError, SRC, STR, Signature, Snd, Term, Unit,
    Str, Unt, Var,
)


class EvalError(PurifyError):
    pass


class SignatureMismatch(PurifyError):
    pass


# ---------------------------------------------------------------------------
# Values
# ---------------------------------------------------------------------------

class Value:
    __slots__ = ()


@dataclass(frozen=True)
class VUnit(Value):
    pass


@dataclass(frozen=True)
class VStr(Value):
    text: str


@dataclass(frozen=True)
class VPair(Value):
    fst: Value
    snd: Value


class VFun(Value):
    """Host closure; total on well-typed arguments."""

    __slots__ = ("fn",)

    def __init__(self, fn: Callable[[Value], Value]):
        self.fn = fn


class VEff(Value):
    """A monadic action as a first-class value (one monad per run)."""

    __slots__ = ("action",)

    def __init__(self, action):
        self.action = action


VUNIT = VUnit()


def render_value(v: Value) -> str:
    match v:
        case VUnit():
            return "()"
        case VStr(text):
            return text
        case VPair(a, b):
            return f"({render_value(a)},{render_value(b)})"
        case VFun():
            return "<fun>"
        case VEff():
            return "<eff>"
    raise EvalError(f"unknown value {v!r}")


def base_value_eq(a: Value, b: Value) -> bool:
    """Structural equality on first-order values."""
    match a, b:
        case VUnit(), VUnit():
            return True
        case VStr(x), VStr(y):
            return x == y
        case VPair(x1, y1), VPair(x2, y2):
            return base_value_eq(x1, x2) and base_value_eq(y1, y2)
        case _:
            if type(a) is not type(b):
                return False
            raise EvalError(
                f"{type(a).__name__} values need a type-directed comparator"
            )


# ---------------------------------------------------------------------------
# Monad dictionaries
# ---------------------------------------------------------------------------

ValueEq = Callable[[Value, Value], bool]


@dataclass
class MonadDict:
    """Runtime bundle of pure/map/ap/bind plus observational equality."""

    name: str
    pure: Callable
    map: Callable
    ap: Callable
    bind: Callable
    run_eq: Callable
    sample_action: Optional[Callable[[random.Random], object]] = None


class _Absent:
    def __repr__(self) -> str:
        return "ABSENT"


ABSENT = _Absent()


def option_monad() -> MonadDict:
    def pure(v):
        return v

    def map_(f, a):
        return ABSENT if a is ABSENT else f(a)

    def ap(af, ax):
        if af is ABSENT or ax is ABSENT:
            return ABSENT
        return af.fn(ax)

    def bind(k, a):
        return ABSENT if a is ABSENT else k(a)

    def run_eq(a, b, value_eq: ValueEq = base_value_eq):
        if (a is ABSENT) != (b is ABSENT):
            return False
        return True if a is ABSENT else value_eq(a, b)

    def sample(rng: random.Random):
        if rng.random() < 0.25:
            return ABSENT
        return pure(_gen_value(rng))

    return MonadDict("option", pure, map_, ap, bind, run_eq, sample)


def state_monad() -> MonadDict:
    def pure(v):
        return lambda s: (v, s)

    def map_(f, a):
        def run(s):
            v, s1 = a(s)
            return f(v), s1

        return run

    def ap(af, ax):
        def run(s):
            vf, s1 = af(s)
            vx, s2 = ax(s1)
            return vf.fn(vx), s2

        return run

    def bind(k, a):
        def run(s):
            v, s1 = a(s)
            return k(v)(s1)

        return run

    def run_eq(a, b, value_eq: ValueEq = base_value_eq):
        for s0 in (0, 1, 2):
            va, sa = a(s0)
            vb, sb = b(s0)
            if sa != sb or not value_eq(va, vb):
                return False
        return True

    def sample(rng: random.Random):
        n = rng.randint(1, 2)

        def run(s):
            return VStr(f"s{s}"), s + n

        return run

    return MonadDict("state", pure, map_, ap, bind, run_eq, sample)


def _writer(name: str, flipped: bool) -> MonadDict:
    def pure(v):
        return (v, ())

    def map_(f, a):
        v, w = a
        return f(v), w

    def ap(af, ax):
        vf, wf = af
        vx, wx = ax
        log = wx + wf if flipped else wf + wx
        return vf.fn(vx), log

    def bind(k, a):
        v, w = a
        v2, w2 = k(v)
        return v2, w + w2

    def run_eq(a, b, value_eq: ValueEq = base_value_eq):
        return a[1] == b[1] and value_eq(a[0], b[0])

    def sample(rng: random.Random):
        tag = f"w{rng.randint(0, 5)}"
        return _gen_value(rng), (tag,)

    return MonadDict(name, pure, map_, ap, bind, run_eq, sample)


def writer_monad() -> MonadDict:
    return _writer("writer", flipped=False)


def mixed_order_writer() -> MonadDict:
    """A fully lawful monad whose ap is the right-to-left applicative.

    Every one of the seven laws holds, yet its ap is not the left-to-right
    bind chain; programs with order-sensitive parallel effects observe the
    difference against the sequential baseline.
    """
    return _writer("writer-rtl", flipped=True)


def trace_monad() -> MonadDict:
    def pure(v):
        return empty_dag(v)

    def map_(f, d: TraceDag):
        return d.with_result(f(d.result))

    def ap(df: TraceDag, dx: TraceDag):
        return parallel_compose(df, dx, df.result.fn(dx.result))

    def bind(k, d: TraceDag):
        d2 = k(d.result)
        return sequential_compose(d, d2, d2.result)

    def run_eq(a: TraceDag, b: TraceDag, value_eq: ValueEq = base_value_eq):
        return dag_iso(a, b) and value_eq(a.result, b.result)

    def sample(rng: random.Random):
        return single_effect(f"e{rng.randint(0, 3)}", "", _gen_value(rng))

    return MonadDict("trace", pure, map_, ap, bind, run_eq, sample)


def builtin_monads() -> list[MonadDict]:
    return [option_monad(), state_monad(), writer_monad(), trace_monad()]


# ---------------------------------------------------------------------------
# Constant environments
# ---------------------------------------------------------------------------

@dataclass
class ConstEnv:
    values: dict[str, Value] = field(default_factory=dict)

    def value(self, name: str) -> Value:
        if name not in self.values:
            raise SignatureMismatch(f"no interpretation for constant {name!r}")
        return self.values[name]


def seed_value(ty, tag: str, m: MonadDict) -> Value:
    """Deterministic, type-correct default value derived from a tag."""
    match ty:
        case Unit():
            return VUNIT
        case Str():
            return VStr(tag)
        case Prod(left, right):
            return VPair(seed_value(left, tag + ".1", m), seed_value(right, tag + ".2", m))
        case Arrow(dom, cod):
            return VFun(lambda v: seed_value(cod, f"{tag}({render_value(v)})", m))
        case Eff(inner):
            return VEff(m.pure(seed_value(inner, tag + "^", m)))
    raise EvalError(f"unknown type {ty!r}")


def _effect_action(m: MonadDict, name: str, args: list[Value], result_ty,
                   behavior: Optional[dict]):
    arg_str = ",".join(render_value(a) for a in args)
    tag = f"{name}({arg_str})" if args else name
    kind = (behavior or {}).get("kind")
    payload = (behavior or {}).get("payload")
    if payload is not None and result_ty == STR:
        result = VStr(str(payload))
    else:
        result = seed_value(result_ty, tag, m)

    if m.name == "option":
        return ABSENT if kind == "absent" else result
    if m.name.startswith("writer"):
        if kind == "value":
            return (result, ())
        entry = str(payload) if (kind == "log" and payload is not None) else tag
        return (result, (entry,))
    if m.name == "state":
        if kind == "value":
            return lambda s: (result, s)

        def run(s):
            if result_ty == STR:
                return VStr(f"{tag}@{s}"), s + 1
            return seed_value(result_ty, f"{tag}@{s}", m), s + 1

        return run
    if m.name == "trace":
        return single_effect(name, arg_str, result)
    return m.pure(result)


def _curried_effect(m: MonadDict, name: str, ty, arity: int,
                    behavior: Optional[dict]) -> Value:
    def build(args: list[Value], t) -> Value:
        if len(args) == arity:
            assert isinstance(t, Eff)
            return VEff(_effect_action(m, name, args, t.inner, behavior))
        assert isinstance(t, Arrow)
        return VFun(lambda v, _t=t, _args=args: build(_args + [v], _t.cod))

    return build([], ty)


def _pure_const(m: MonadDict, name: str, ty) -> Value:
    if name == "concat" and ty == Arrow(STR, Arrow(STR, STR)):
        return VFun(lambda a: VFun(lambda b: VStr(a.text + b.text)))

    def build(t, tag: str) -> Value:
        if isinstance(t, Arrow):
            return VFun(lambda v, _t=t: build(_t.cod, f"{tag}({render_value(v)})"))
        return seed_value(t, tag, m)

    return build(ty, name)


def make_const_env(sig: Signature, m: MonadDict,
                   behaviors: Optional[dict] = None) -> ConstEnv:
    """Interpret every declared constant for one monad.

    Effectful constants become curried functions ending in an action whose
    observable behavior depends on the monad (a trace node, a log entry, a
    state increment, an optional value), optionally overridden per name by
    an effect-behavior config.
    """
    env = ConstEnv()
    for decl in sig:
        if decl.effectful:
            behavior = (behaviors or {}).get(decl.name)
            env.values[decl.name] = _curried_effect(
                m, decl.name, decl.ty, decl.effect_arity() or 0, behavior
            )
        else:
            env.values[decl.name] = _pure_const(m, decl.name, decl.ty)
    return env


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

def _as_action(v: Value):
    if not isinstance(v, VEff):
        raise EvalError(f"expected an effectful value, got {type(v).__name__}")
    return v.action


def evaluate(e: Term, label: Label, m: MonadDict, consts: ConstEnv,
             scope: Optional[dict[str, Value]] = None):
    """Evaluate a checked term: an action at src, a direct value otherwise."""
    scope = scope or {}
    if label is SRC:
        return _eval_src(e, m, consts, scope)
    return _eval_direct(e, m, consts, scope)


def _eval_direct(e: Term, m: MonadDict, consts: ConstEnv,
                 scope: dict[str, Value]) -> Value:
    match e:
        case Var(name):
            if name not in scope:
                raise EvalError(f"unbound variable {name!r} at runtime")
            return scope[name]
        case Const(name):
            return consts.value(name)
        case Unt():
            return VUNIT
        case Lit(text):
            return VStr(text)
        case Prd(a, b):
            return VPair(
                _eval_direct(a, m, consts, scope), _eval_direct(b, m, consts, scope)
            )
        case Fst(p):
            return _pair(_eval_direct(p, m, consts, scope)).fst
        case Snd(p):
            return _pair(_eval_direct(p, m, consts, scope)).snd
        case App(f, a):
            vf = _eval_direct(f, m, consts, scope)
            va = _eval_direct(a, m, consts, scope)
            return _apply(vf, va)
        case Lam(param, body, _):
            def closure(v: Value, _param=param, _body=body) -> Value:
                inner = dict(scope)
                inner[_param] = v
                return _eval_direct(_body, m, consts, inner)

            return VFun(closure)
        case Pure(inner):
            return VEff(m.pure(_eval_direct(inner, m, consts, scope)))
        case Map(f, a):
            vf = _eval_direct(f, m, consts, scope)
            va = _eval_direct(a, m, consts, scope)
            return VEff(m.map(vf.fn, _as_action(va)))
        case Ap(f, a):
            vf = _eval_direct(f, m, consts, scope)
            va = _eval_direct(a, m, consts, scope)
            return VEff(m.ap(_as_action(vf), _as_action(va)))
        case Join(n):
            vn = _eval_direct(n, m, consts, scope)
            return VEff(m.bind(_as_action, _as_action(vn)))
        case Each():
            raise EvalError("Each is a source construct; evaluate at src")
    raise EvalError(f"unknown term former {type(e).__name__}")


def _eval_src(e: Term, m: MonadDict, consts: ConstEnv, scope: dict[str, Value]):
    match e:
        case Var() | Const() | Unt() | Lit() | Lam():
            return m.pure(_eval_direct(e, m, consts, scope))
        case Fst(p):
            return m.map(lambda v: _pair(v).fst, _eval_src(p, m, consts, scope))
        case Snd(p):
            return m.map(lambda v: _pair(v).snd, _eval_src(p, m, consts, scope))
        case App(f, a):
            return m.ap(_eval_src(f, m, consts, scope), _eval_src(a, m, consts, scope))
        case Prd(a, b):
            pairing = m.map(
                lambda va: VFun(lambda vb: VPair(va, vb)),
                _eval_src(a, m, consts, scope),
            )
            return m.ap(pairing, _eval_src(b, m, consts, scope))
        case Each(inner):
            return m.bind(_as_action, _eval_src(inner, m, consts, scope))
    raise EvalError(f"{type(e).__name__} is not a source term former")


def _pair(v: Value) -> VPair:
    if not isinstance(v, VPair):
        raise EvalError(f"expected a pair, got {type(v).__name__}")
    return v


def _apply(vf: Value, va: Value) -> Value:
    if not isinstance(vf, VFun):
        raise EvalError(f"expected a function, got {type(vf).__name__}")
    return vf.fn(va)


# ---------------------------------------------------------------------------
# Type-directed observational equality
# ---------------------------------------------------------------------------

EXTENSIONAL_SAMPLES = 5


def sample_values(ty, m: MonadDict) -> list[Value]:
    """Deterministic sample inputs for extensional function comparison."""
    match ty:
        case Unit():
            return [VUNIT]
        case Str():
            return [VStr(s) for s in ("", "a", "b", "ab", "q")]
        case Prod(left, right):
            ls, rs = sample_values(left, m), sample_values(right, m)
            out = [VPair(l, r) for l in ls for r in rs]
            return out[:EXTENSIONAL_SAMPLES]
        case Arrow(_, cod):
            cods = sample_values(cod, m)

            def pick(i: int) -> Value:
                return VFun(lambda v, _i=i: cods[(len(render_value(v)) + _i) % len(cods)])

            return [pick(i) for i in range(min(3, len(cods)) or 1)]
        case Eff(inner):
            return [VEff(m.pure(s)) for s in sample_values(inner, m)[:3]]
    raise EvalError(f"unknown type {ty!r}")


def value_eq_for(ty, m: MonadDict) -> ValueEq:
    """Observational equality at a type: structural at base types, pointwise
    on sampled arguments for functions, run_eq on underlying actions for
    effect types."""
    match ty:
        case Unit():
            return lambda a, b: True
        case Str():
            return lambda a, b: a.text == b.text
        case Prod(left, right):
            le, re = value_eq_for(left, m), value_eq_for(right, m)
            return lambda a, b: le(a.fst, b.fst) and re(a.snd, b.snd)
        case Arrow(dom, cod):
            args = sample_values(dom, m)[:EXTENSIONAL_SAMPLES]
            ce = value_eq_for(cod, m)
            return lambda a, b: all(ce(a.fn(x), b.fn(x)) for x in args)
        case Eff(inner):
            ie = value_eq_for(inner, m)
            return lambda a, b: m.run_eq(a.action, b.action, ie)
    raise EvalError(f"unknown type {ty!r}")


def actions_agree(ty, m: MonadDict, a, b) -> bool:
    """run_eq two actions whose results have type ``ty``."""
    return m.run_eq(a, b, value_eq_for(ty, m))


# ---------------------------------------------------------------------------
# Law checking
# ---------------------------------------------------------------------------

LAW_NAMES = ("idl", "idr", "asc", "apl", "apr", "aplr", "map_map")


@dataclass
class LawReport:
    monad: str
    trials: int
    seed: int
    passes: dict[str, int]
    failures: dict[str, list[str]]

    @property
    def all_passed(self) -> bool:
        return all(not f for f in self.failures.values())

    def to_dict(self) -> dict:
        return {
            "v": 1,
            "monad": self.monad,
            "trials": self.trials,
            "seed": self.seed,
            "passes": self.passes,
            "failures": self.failures,
        }


def _gen_value(rng: random.Random, depth: int = 0) -> Value:
    r = rng.random()
    if depth < 2 and r < 0.25:
        return VPair(_gen_value(rng, depth + 1), _gen_value(rng, depth + 1))
    if r < 0.35:
        return VUNIT
    return VStr(rng.choice(("", "a", "b", "ab", "xyz")))


def _gen_fun(rng: random.Random) -> Callable[[Value], Value]:
    kind = rng.randrange(4)
    if kind == 0:
        return lambda v: v
    if kind == 1:
        c = _gen_value(rng)
        return lambda v: c
    if kind == 2:
        return lambda v: VStr("f:" + render_value(v))
    return lambda v: VPair(v, VStr("t"))


def _gen_action(rng: random.Random, m: MonadDict):
    if m.sample_action is not None and rng.random() < 0.7:
        return m.sample_action(rng)
    return m.pure(_gen_value(rng))


def _gen_kleisli(rng: random.Random, m: MonadDict) -> Callable[[Value], object]:
    f = _gen_fun(rng)
    if rng.random() < 0.5:
        return lambda v: m.pure(f(v))
    base = _gen_action(rng, m)
    return lambda v: m.map(lambda w, _v=v: VPair(f(_v), w), base)


def check_laws(m: MonadDict, trials: int = 1000, seed: int = 0) -> LawReport:
    """Randomized check of the seven monad/applicative/functor laws."""
    passes = {law: 0 for law in LAW_NAMES}
    failures: dict[str, list[str]] = {law: [] for law in LAW_NAMES}

    for i in range(trials):
        rng = random.Random(seed * 1_000_003 + i)
        x = _gen_value(rng)
        f = _gen_fun(rng)
        g = _gen_fun(rng)
        a = _gen_action(rng, m)
        k1 = _gen_kleisli(rng, m)
        k2 = _gen_kleisli(rng, m)
        fa = m.map(lambda w: VFun(lambda v, _w=w: VPair(_w, f(v))), _gen_action(rng, m))

        checks = {
            "idl": lambda: m.run_eq(m.bind(k1, m.pure(x)), k1(x)),
            "idr": lambda: m.run_eq(m.bind(lambda v: m.pure(f(v)), a), m.map(f, a)),
            "asc": lambda: m.run_eq(
                m.bind(k2, m.bind(k1, a)),
                m.bind(lambda v: m.bind(k2, k1(v)), a),
            ),
            "apl": lambda: m.run_eq(m.ap(m.pure(VFun(f)), a), m.map(f, a)),
            "apr": lambda: m.run_eq(
                m.ap(fa, m.pure(x)), m.map(lambda vf: vf.fn(x), fa)
            ),
            "aplr": lambda: m.run_eq(m.map(f, m.pure(x)), m.pure(f(x))),
            "map_map": lambda: m.run_eq(
                m.map(f, m.map(g, a)), m.map(lambda v: f(g(v)), a)
            ),
        }
        for law, checker in checks.items():
            if checker():
                passes[law] += 1
            elif len(failures[law]) < 5:
                failures[law].append(f"trial {i}: x={render_value(x)}")

    return LawReport(m.name, trials, seed, passes, failures)
