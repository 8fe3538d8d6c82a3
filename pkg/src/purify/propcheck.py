"""Random well-typed term generation and the executable theorem suites.

Generation is type-directed: choose a goal type, then a constructor whose
premises are recursively satisfiable within the remaining depth.  Every
generated term typechecks at its label.  Effectful constants only appear
in saturated calls: under an Each at source, as embedded calls or Pure
payloads at target.  Failures are minimized by greedy subterm shrinking.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Optional

from .check import TypeEnv, typecheck
from .metrics import span, work
from .pretty import pretty
from .semantics import (
    actions_agree, builtin_monads, check_laws, evaluate, make_const_env,
    value_eq_for, _as_action,
)
from .terms import (
    App, Ap, Arrow, COM, Const, ConstDecl, ConstKind, Each, Eff, Fst, Join,
    Label, Lam, Lit, Map, Prd, Prod, Pure, PurifyError, SRC, STR, Signature,
    Snd, TGT, Term, Ty, UNIT, Unt, Var, is_effect_free, relabel, size,
    subterms,
)
from .translate import normalize, opt_translate, seq_translate, smart_ap, smart_join


class Unsatisfiable(PurifyError):
    """No term of the requested type exists within the depth budget."""


@dataclass
class GenConfig:
    max_depth: int = 5
    seed: int = 0
    signature: Optional[Signature] = None
    label: Label = SRC
    goal_type: Optional[Ty] = None

    def sig(self) -> Signature:
        return self.signature if self.signature is not None else default_signature()


def default_signature() -> Signature:
    sig = Signature()
    sig.add(ConstDecl("concat", Arrow(STR, Arrow(STR, STR)), ConstKind.PURE))
    sig.add(ConstDecl("shout", Arrow(STR, STR), ConstKind.PURE))
    sig.add(ConstDecl("pick", Arrow(Prod(STR, STR), STR), ConstKind.PURE))
    sig.add(ConstDecl("fetch", Arrow(STR, Eff(STR)), ConstKind.EFFECTFUL))
    sig.add(ConstDecl("probe", Eff(STR), ConstKind.EFFECTFUL))
    sig.add(ConstDecl("stamp", Arrow(STR, Eff(UNIT)), ConstKind.EFFECTFUL))
    return sig


_WORDS = ("", "a", "b", "foo", "bar", "xy")


class _Gen:
    def __init__(self, rng: random.Random, sig: Signature):
        self.rng = rng
        self.sig = sig
        self._names = 0

    def fresh_var(self) -> str:
        self._names += 1
        return f"v{self._names}"

    # -- helpers ---------------------------------------------------------

    def small_type(self) -> Ty:
        r = self.rng.random()
        if r < 0.6:
            return STR
        if r < 0.85:
            return UNIT
        return Prod(STR, STR)

    def _effect_decls_for(self, inner: Ty) -> list[ConstDecl]:
        out = []
        for d in self.sig:
            if d.effectful:
                t = d.ty
                while isinstance(t, Arrow):
                    t = t.cod
                if isinstance(t, Eff) and t.inner == inner:
                    out.append(d)
        return out

    def _pure_call_decls(self, result: Ty) -> list[tuple[ConstDecl, list[Ty]]]:
        out = []
        for d in self.sig:
            if d.effectful:
                continue
            args, t = [], d.ty
            while isinstance(t, Arrow):
                args.append(t.dom)
                t = t.cod
                if t == result and args:
                    out.append((d, list(args)))
        return out

    # -- minimal terms ---------------------------------------------------

    def minimal(self, t: Ty, lab: Label, env: dict[str, Ty]) -> Term:
        match t:
            case _ if t == UNIT:
                return Unt(label=lab)
            case _ if t == STR:
                return Lit("s", label=lab)
            case Prod(a, b):
                return Prd(self.minimal(a, lab, env), self.minimal(b, lab, env), label=lab)
            case Arrow(d, c):
                try:
                    x = self.fresh_var()
                    body = self.minimal(c, COM, {**env, x: d})
                    return Lam(x, body, d, label=lab)
                except Unsatisfiable:
                    named = [dc.name for dc in self.sig if dc.ty == t]
                    if named:
                        return Const(named[0], label=lab)
                    raise
            case Eff(inner):
                if lab is TGT:
                    return Pure(self.minimal(inner, COM, env), label=TGT)
                if lab is SRC:
                    return self.effect_call(inner, SRC, env, depth=1)
                named = [dc.name for dc in self.sig if dc.ty == t]
                if named:
                    return Const(named[0], label=COM)
                raise Unsatisfiable(f"no common term of type Eff {inner!r}")
        raise Unsatisfiable(f"no minimal term of type {t!r}")

    def effect_call(self, inner: Ty, lab: Label, env: dict[str, Ty], depth: int) -> Term:
        """Saturated application of an effectful constant yielding Eff inner."""
        decls = self._effect_decls_for(inner)
        if not decls:
            raise Unsatisfiable(f"no effectful constant produces Eff {inner!r}")
        d = self.rng.choice(decls)
        if lab is TGT:
            # embedded direct call: argument values are pure, generated in the
            # common fragment and relabelled into the target
            call = self._saturate(d, COM, env, depth)
            return relabel(call, TGT)
        return self._saturate(d, SRC, env, depth)

    def _saturate(self, d: ConstDecl, lab: Label, env: dict[str, Ty], depth: int) -> Term:
        term: Term = Const(d.name, label=lab)
        t = d.ty
        while isinstance(t, Arrow):
            arg = self.gen(t.dom, lab, env, max(depth - 1, 1))
            term = App(term, arg, label=lab)
            t = t.cod
        return term

    # -- main generator --------------------------------------------------

    def gen(self, t: Ty, lab: Label, env: dict[str, Ty], depth: int,
            allow_effect_values: bool = False) -> Term:
        if isinstance(t, Eff):
            return self.gen_eff(t, lab, env, depth, allow_effect_values)
        if depth <= 1:
            return self.gen_leaf(t, lab, env)
        # leaf-heavy near the bottom, effect-heavy higher up (keeps the
        # median source span in the 1..4 band at depth 5)
        leaf_p = 0.4 if depth <= 2 else 0.15
        if self.rng.random() < leaf_p:
            return self.gen_leaf(t, lab, env)
        return self.gen_compound(t, lab, env, depth, allow_effect_values)

    def gen_leaf(self, t: Ty, lab: Label, env: dict[str, Ty]) -> Term:
        opts: list[Callable[[], Term]] = []
        vars_ = [n for n, vt in env.items() if vt == t]
        if vars_:
            opts.append(lambda: Var(self.rng.choice(vars_), label=lab))
        # an unapplied effectful constant is an ordinary function/action value;
        # goals of such types only arise on effect-allowing paths
        consts = [d.name for d in self.sig if d.ty == t]
        if consts:
            opts.append(lambda: Const(self.rng.choice(consts), label=lab))
        if t == UNIT:
            opts.append(lambda: Unt(label=lab))
        if t == STR:
            opts.append(lambda: Lit(self.rng.choice(_WORDS), label=lab))
        if not opts:
            return self.minimal(t, lab, env)
        return self.rng.choice(opts)()

    def gen_compound(self, t: Ty, lab: Label, env: dict[str, Ty], depth: int,
                     allow_effect_values: bool = False) -> Term:
        opts: list[tuple[float, Callable[[], Term]]] = []

        if isinstance(t, Prod):
            opts.append((3.0, lambda: Prd(
                self.gen(t.left, lab, env, depth - 1),
                self.gen(t.right, lab, env, depth - 1), label=lab)))
        if isinstance(t, Arrow):
            def lam():
                x = self.fresh_var()
                body = self.gen(t.cod, COM, {**env, x: t.dom}, depth - 1,
                                allow_effect_values)
                return Lam(x, body, t.dom, label=lab)

            opts.append((3.0, lam))

        def app():
            s = self.small_type()
            f = self.gen(Arrow(s, t), lab, env, depth - 1)
            a = self.gen(s, lab, env, depth - 1)
            return App(f, a, label=lab)

        opts.append((1.2, app))

        def proj():
            s = self.small_type()
            pair_ty = Prod(t, s) if self.rng.random() < 0.5 else Prod(s, t)
            p = self.gen(pair_ty, lab, env, depth - 1)
            if pair_ty.left == t:
                return Fst(p, label=lab)
            return Snd(p, label=lab)

        opts.append((0.8, proj))

        calls = self._pure_call_decls(t)
        if calls:
            def pure_call():
                d, args = self.rng.choice(calls)
                term: Term = Const(d.name, label=lab)
                for at in args:
                    term = App(term, self.gen(at, lab, env, depth - 1), label=lab)
                return term

            opts.append((1.2, pure_call))

        if lab is SRC and self._effect_decls_for(t):
            # weighted so that depth-5 source terms land at median span 1..4
            opts.append((5.0, lambda: Each(
                self.effect_call(t, SRC, env, depth - 1), label=SRC)))

        return self._weighted(opts)

    def gen_eff(self, t: Eff, lab: Label, env: dict[str, Ty], depth: int,
                allow_effect_values: bool) -> Term:
        inner = t.inner
        if lab is SRC:
            return self.effect_call(inner, SRC, env, depth)
        if lab is COM:
            # Effect-typed common terms denote unexecuted actions; only used
            # as Pure payloads, never generated in the plain common suites.
            if not allow_effect_values:
                raise Unsatisfiable("no effect values in plain common terms")
            decls = self._effect_decls_for(inner)
            direct = [d for d in decls if isinstance(d.ty, Eff)]
            if depth <= 1 and direct:
                return Const(self.rng.choice(direct).name, label=COM)
            if decls:
                d = self.rng.choice(decls)
                return self._saturate(d, COM, env, depth)
            raise Unsatisfiable(f"no effectful constant produces Eff {inner!r}")
        # target
        if depth <= 1:
            return Pure(self.gen(inner, COM, env, 1, allow_effect_values=True),
                        label=TGT)
        opts: list[tuple[float, Callable[[], Term]]] = [
            (2.0, lambda: Pure(
                self.gen(inner, COM, env, depth - 1, allow_effect_values=True),
                label=TGT)),
        ]
        if self._effect_decls_for(inner):
            opts.append((2.5, lambda: self.effect_call(inner, TGT, env, depth)))

        def map_():
            s = self.small_type()
            f = self.gen(Arrow(s, inner), TGT, env, depth - 1, allow_effect_values=True)
            a = self.gen(Eff(s), TGT, env, depth - 1)
            return Map(f, a, label=TGT)

        opts.append((1.5, map_))

        def ap_():
            s = self.small_type()
            f = self.gen(Eff(Arrow(s, inner)), TGT, env, depth - 1)
            a = self.gen(Eff(s), TGT, env, depth - 1)
            return Ap(f, a, label=TGT)

        opts.append((1.5, ap_))

        def join_():
            n = self.gen_nested_eff(inner, env, depth - 1)
            return Join(n, label=TGT)

        opts.append((1.0, join_))

        def bind_():
            s = self.small_type()
            x = self.fresh_var()
            body = self.gen(Eff(inner), TGT, {**env, x: s}, depth - 1)
            a = self.gen(Eff(s), TGT, env, depth - 1)
            return Join(Map(Lam(x, body, s, label=TGT), a, label=TGT), label=TGT)

        opts.append((0.7, bind_))
        return self._weighted(opts)

    def gen_nested_eff(self, inner: Ty, env: dict[str, Ty], depth: int) -> Term:
        """A target term of type Eff (Eff inner): a Pure-wrapped action value."""
        payload = self.gen(Eff(inner), COM, env, max(depth, 1), allow_effect_values=True)
        return Pure(payload, label=TGT)

    def _weighted(self, opts: list[tuple[float, Callable[[], Term]]]) -> Term:
        """Pick by weight; fall back to remaining options when one cannot be
        satisfied within the depth budget."""
        remaining = list(opts)
        while remaining:
            total = sum(w for w, _ in remaining)
            r = self.rng.random() * total
            idx = len(remaining) - 1
            for i, (w, _) in enumerate(remaining):
                r -= w
                if r <= 0:
                    idx = i
                    break
            _, chosen = remaining.pop(idx)
            try:
                return chosen()
            except Unsatisfiable:
                continue
        raise Unsatisfiable("no constructor applies at this goal within depth")


_GOALS: list[tuple[float, Ty]] = [
    (5.0, STR),
    (1.5, UNIT),
    (2.0, Prod(STR, STR)),
    (0.5, Prod(STR, UNIT)),
    (1.0, Arrow(STR, STR)),
]


def _pick_goal(rng: random.Random) -> Ty:
    total = sum(w for w, _ in _GOALS)
    r = rng.random() * total
    for w, t in _GOALS:
        r -= w
        if r <= 0:
            return t
    return STR


def gen_term(cfg: GenConfig) -> Term:
    """Generate a term that typechecks at cfg.label with the goal type."""
    rng = random.Random(cfg.seed)
    sig = cfg.sig()
    g = _Gen(rng, sig)
    goal = cfg.goal_type if cfg.goal_type is not None else _pick_goal(rng)
    if isinstance(goal, Eff) and cfg.label is COM:
        raise Unsatisfiable("common terms cannot be generated at effect types")
    term = g.gen(goal, cfg.label, {}, max(cfg.max_depth, 1))
    typecheck(term, cfg.label, TypeEnv(sig))
    return term


# ---------------------------------------------------------------------------
# Shrinking
# ---------------------------------------------------------------------------

def shrink(term: Term, label: Label, sig: Signature,
           still_fails: Callable[[Term], bool]) -> Term:
    """Greedy minimization: prefer well-typed failing subterms, repeatedly."""

    def well_typed(t: Term) -> bool:
        try:
            typecheck(t, label, TypeEnv(sig))
            return True
        except PurifyError:
            return False

    current = term
    improved = True
    while improved:
        improved = False
        candidates = sorted(
            (s for s in subterms(current) if s is not current),
            key=size,
        )
        for cand in candidates:
            if not well_typed(cand):
                continue
            try:
                if still_fails(cand):
                    current = cand
                    improved = True
                    break
            except PurifyError:
                continue
    return current


# ---------------------------------------------------------------------------
# Suites
# ---------------------------------------------------------------------------

@dataclass
class SuiteReport:
    suite: str
    trials: int
    passes: int
    seed: int
    failures: list[dict] = field(default_factory=list)

    @property
    def all_passed(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return {
            "v": 1,
            "suite": self.suite,
            "trials": self.trials,
            "passes": self.passes,
            "seed": self.seed,
            "failures": self.failures,
        }


SUITE_NAMES = (
    "types", "semantics", "span_work", "smart_ctors", "relabel",
    "effect_free", "laws", "normalize", "baseline",
)


def _sub_seed(seed: int, i: int) -> int:
    return seed * 1_000_003 + i


def run_suite(name: str, cfg: GenConfig, trials: int) -> SuiteReport:
    """Run one executable theorem/lemma suite and report failures."""
    if name not in SUITE_NAMES:
        raise PurifyError(f"unknown suite {name!r}; choose from {', '.join(SUITE_NAMES)}")
    sig = cfg.sig()
    report = SuiteReport(name, trials, 0, cfg.seed)

    if name == "laws":
        per = max(trials, 1)
        for m in builtin_monads():
            law_report = check_laws(m, per, cfg.seed)
            if law_report.all_passed:
                report.passes += 1
            else:
                report.failures.append({
                    "seed": cfg.seed,
                    "term_pretty": m.name,
                    "detail": {k: v for k, v in law_report.failures.items() if v},
                })
        report.trials = len(builtin_monads())
        return report

    monads = builtin_monads()
    envs = {m.name: (m, make_const_env(sig, m)) for m in monads}
    env_t = TypeEnv(sig)

    def record_failure(term: Term, detail: str, check: Callable[[Term], Optional[str]],
                       label: Label, trial_seed: int) -> None:
        def fails(t: Term) -> bool:
            return check(t) is not None

        small = shrink(term, label, sig, fails)
        report.failures.append({
            "seed": trial_seed,
            "term_pretty": pretty(small),
            "detail": check(small) or detail,
        })

    def run_trials(label: Label, check: Callable[[Term], Optional[str]],
                   goal: Optional[Ty] = None) -> None:
        for i in range(trials):
            s = _sub_seed(cfg.seed, i)
            sub = GenConfig(cfg.max_depth, s, sig, label, goal)
            try:
                term = gen_term(sub)
            except Unsatisfiable:
                report.passes += 1
                continue
            detail = check(term)
            if detail is None:
                report.passes += 1
            else:
                record_failure(term, detail, check, label, s)

    if name == "types":
        def check(term: Term) -> Optional[str]:
            src_ty = typecheck(term, SRC, env_t)
            out = opt_translate(term)
            out_ty = typecheck(out, TGT, env_t)
            if out_ty != Eff(src_ty):
                return f"expected Eff {src_ty!r}, got {out_ty!r}"
            return None

        run_trials(SRC, check)

    elif name == "semantics":
        def check(term: Term) -> Optional[str]:
            src_ty = typecheck(term, SRC, env_t)
            out = opt_translate(term)
            typecheck(out, TGT, env_t)
            for m, env in envs.values():
                a_src = evaluate(term, SRC, m, env)
                a_tgt = _as_action(evaluate(out, TGT, m, env))
                if not actions_agree(src_ty, m, a_tgt, a_src):
                    return f"disagrees under {m.name}"
            return None

        run_trials(SRC, check)

    elif name == "span_work":
        def check(term: Term) -> Optional[str]:
            typecheck(term, SRC, env_t)
            out = opt_translate(term)
            s0, w0 = span(term, sig), work(term, sig)
            s1, w1 = span(out, sig), work(out, sig)
            if s1 > s0 or w1 > w0:
                return f"span {s0}->{s1}, work {w0}->{w1}"
            return None

        run_trials(SRC, check)

    elif name == "smart_ctors":
        def check_ap(term: Term) -> Optional[str]:
            # term is the Ap of generated arguments; compare raw vs smart
            assert isinstance(term, Ap)
            f, e = term.fun, term.arg
            opt = smart_ap(f, e)
            typecheck(opt, TGT, env_t)
            ty = typecheck(term, TGT, env_t)
            if span(opt, sig) > span(term, sig) or work(opt, sig) > work(term, sig):
                return "smart AP increased span/work"
            for m, env in envs.values():
                a = _as_action(evaluate(opt, TGT, m, env))
                b = _as_action(evaluate(term, TGT, m, env))
                if not actions_agree(ty.inner, m, a, b):
                    return f"AP disagrees under {m.name}"
            return None

        def check_join(term: Term) -> Optional[str]:
            assert isinstance(term, Join)
            opt = smart_join(term.nested)
            typecheck(opt, TGT, env_t)
            ty = typecheck(term, TGT, env_t)
            if span(opt, sig) > span(term, sig) or work(opt, sig) > work(term, sig):
                return "smart JOIN increased span/work"
            for m, env in envs.values():
                a = _as_action(evaluate(opt, TGT, m, env))
                b = _as_action(evaluate(term, TGT, m, env))
                if not actions_agree(ty.inner, m, a, b):
                    return f"JOIN disagrees under {m.name}"
            return None

        for i in range(trials):
            s = _sub_seed(cfg.seed, i)
            rng = random.Random(s)
            g = _Gen(rng, sig)
            inner = _pick_goal(rng)
            try:
                if i % 2 == 0:
                    st = g.small_type()
                    f = g.gen(Eff(Arrow(st, inner)), TGT, {}, cfg.max_depth)
                    e = g.gen(Eff(st), TGT, {}, cfg.max_depth)
                    term: Term = Ap(f, e, label=TGT)
                    check = check_ap
                else:
                    n = g.gen_nested_eff(inner, {}, cfg.max_depth) \
                        if rng.random() < 0.5 \
                        else g.gen(Eff(Eff(inner)), TGT, {}, cfg.max_depth)
                    term = Join(n, label=TGT)
                    check = check_join
                typecheck(term, TGT, env_t)
            except Unsatisfiable:
                report.passes += 1
                continue
            detail = check(term)
            if detail is None:
                report.passes += 1
            else:
                report.failures.append({
                    "seed": s, "term_pretty": pretty(term), "detail": detail,
                })

    elif name == "relabel":
        def check(term: Term) -> Optional[str]:
            ty = typecheck(term, COM, env_t)
            if span(term, sig) != 0 or work(term, sig) != 0:
                return "common term has nonzero span/work"
            out = relabel(term, TGT)
            typecheck(out, TGT, env_t)
            if span(out, sig) != 0 or work(out, sig) != 0:
                return "relabelled term has nonzero span/work"
            for m, env in envs.values():
                va = evaluate(term, COM, m, env)
                vb = evaluate(out, TGT, m, env)
                if not value_eq_for(ty, m)(va, vb):
                    return f"relabel changes value under {m.name}"
            return None

        run_trials(COM, check)

    elif name == "effect_free":
        def check(term: Term) -> Optional[str]:
            typecheck(term, COM, env_t)
            if not is_effect_free(term):
                return "common term contains Each/Join"
            if span(term, sig) != 0 or work(term, sig) != 0:
                return "nonzero span/work on common term"
            return None

        run_trials(COM, check)

    elif name == "normalize":
        def check(term: Term) -> Optional[str]:
            ty = typecheck(term, TGT, env_t)
            out = normalize(term)
            typecheck(out, TGT, env_t)
            if span(out, sig) > span(term, sig) or work(out, sig) > work(term, sig):
                return "normalize increased span/work"
            inner_ty = ty.inner if isinstance(ty, Eff) else None
            for m, env in envs.values():
                if isinstance(ty, Eff):
                    a = _as_action(evaluate(out, TGT, m, env))
                    b = _as_action(evaluate(term, TGT, m, env))
                    if not actions_agree(inner_ty, m, a, b):
                        return f"normalize disagrees under {m.name}"
                else:
                    if not value_eq_for(ty, m)(
                        evaluate(out, TGT, m, env), evaluate(term, TGT, m, env)
                    ):
                        return f"normalize disagrees under {m.name}"
            return None

        for i in range(trials):
            s = _sub_seed(cfg.seed, i)
            rng = random.Random(s)
            g = _Gen(rng, sig)
            goal = Eff(_pick_goal(rng))
            try:
                term = g.gen(goal, TGT, {}, cfg.max_depth)
                typecheck(term, TGT, env_t)
            except Unsatisfiable:
                report.passes += 1
                continue
            detail = check(term)
            if detail is None:
                report.passes += 1
            else:
                report.failures.append({
                    "seed": s, "term_pretty": pretty(term), "detail": detail,
                })

    elif name == "baseline":
        sequential = [m for m in monads if m.name in ("option", "state", "writer")]

        def check(term: Term) -> Optional[str]:
            src_ty = typecheck(term, SRC, env_t)
            out = seq_translate(term)
            typecheck(out, TGT, env_t)
            for m in sequential:
                env = envs[m.name][1]
                a_src = evaluate(term, SRC, m, env)
                a_seq = _as_action(evaluate(out, TGT, m, env))
                if not actions_agree(src_ty, m, a_seq, a_src):
                    return f"sequential baseline disagrees under {m.name}"
            return None

        run_trials(SRC, check)

    return report
