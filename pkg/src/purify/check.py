"""Label and type checking for guest terms.

The checker is syntax directed and post hoc: it validates the labelling
discipline (Each only in source position, combinators only in target
position, lambda bodies common) and synthesizes the unique type of a term,
stamping every node's ``ty`` field along the way.

Lambda parameters do not need annotations when the application site
determines them; an unapplied lambda must carry a ``param_ty`` annotation
(surface syntax ``(fun x -> e : T -> U)``).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .terms import (
    App, Ap, Arrow, COM, Const, Each, Eff, Fst, Join, Label, Lam, Lit, Map,
    Prd, Prod, Pure, PurifyError, SRC, Signature, Snd, STR, TGT, Term, Ty,
    UNIT, Unt, Var, type_name,
)


class TypeCheckError(PurifyError):
    pass


class LabelMismatch(TypeCheckError):
    pass


class TypeMismatch(TypeCheckError):
    pass


class UnboundVar(TypeCheckError):
    pass


class UnknownConst(TypeCheckError):
    pass


class AnnotationNeeded(TypeCheckError):
    pass


@dataclass
class TypeEnv:
    """Scope-ordered variable typing plus the constant signature."""

    sig: Signature
    vars: dict[str, Ty] = field(default_factory=dict)

    def bind(self, name: str, ty: Ty) -> "TypeEnv":
        new = dict(self.vars)
        new[name] = ty
        return TypeEnv(self.sig, new)


def typecheck(e: Term, expected_label: Label, env: TypeEnv) -> Ty:
    """Synthesize the type of ``e`` at ``expected_label`` and stamp nodes."""
    return _synth(e, expected_label, env)


def _require_label(e: Term, want: Label) -> None:
    if e.label is not want:
        raise LabelMismatch(
            f"{type(e).__name__} node labelled {e.label} where {want} is required"
        )


def _stamp(e: Term, ty: Ty) -> Ty:
    e.ty = ty
    return ty


def _synth(e: Term, lab: Label, env: TypeEnv) -> Ty:
    match e:
        case Var(name):
            _require_label(e, lab)
            if name not in env.vars:
                raise UnboundVar(f"unbound variable {name!r}")
            return _stamp(e, env.vars[name])
        case Const(name):
            _require_label(e, lab)
            decl = env.sig.lookup(name)
            if decl is None:
                raise UnknownConst(f"unknown constant {name!r}")
            return _stamp(e, decl.ty)
        case Unt():
            _require_label(e, lab)
            return _stamp(e, UNIT)
        case Lit(_):
            _require_label(e, lab)
            return _stamp(e, STR)
        case Prd(a, b):
            _require_label(e, lab)
            return _stamp(e, _prod(_synth(a, lab, env), _synth(b, lab, env)))
        case Fst(p):
            _require_label(e, lab)
            tp = _synth(p, lab, env)
            if not isinstance(tp, Prod):
                raise TypeMismatch(f"Fst applied to non-pair type {type_name(tp)}")
            return _stamp(e, tp.left)
        case Snd(p):
            _require_label(e, lab)
            tp = _synth(p, lab, env)
            if not isinstance(tp, Prod):
                raise TypeMismatch(f"Snd applied to non-pair type {type_name(tp)}")
            return _stamp(e, tp.right)
        case App(f, a):
            _require_label(e, lab)
            return _stamp(e, _synth_app(f, a, lab, env))
        case Lam():
            _require_label(e, lab)
            if e.param_ty is None:
                raise AnnotationNeeded(
                    "cannot infer parameter type of unapplied lambda; "
                    "annotate it as (fun x -> e : T -> U)"
                )
            return _stamp(e, _check_lam(e, e.param_ty, lab, env))
        case Each(inner):
            if lab is not SRC:
                raise LabelMismatch(f"Each only lives in the source fragment, not {lab}")
            _require_label(e, SRC)
            ti = _synth(inner, SRC, env)
            if not isinstance(ti, Eff):
                raise TypeMismatch(f"Each needs an Eff-typed argument, got {type_name(ti)}")
            return _stamp(e, ti.inner)
        case Pure(inner):
            if lab is not TGT:
                raise LabelMismatch(f"Pure only lives in the target fragment, not {lab}")
            _require_label(e, TGT)
            return _stamp(e, Eff(_synth(inner, COM, env)))
        case Join(nested):
            if lab is not TGT:
                raise LabelMismatch(f"Join only lives in the target fragment, not {lab}")
            _require_label(e, TGT)
            tn = _synth(nested, TGT, env)
            if not (isinstance(tn, Eff) and isinstance(tn.inner, Eff)):
                raise TypeMismatch(
                    f"Join needs an Eff (Eff _)-typed argument, got {type_name(tn)}"
                )
            return _stamp(e, tn.inner)
        case Map(f, a):
            if lab is not TGT:
                raise LabelMismatch(f"Map only lives in the target fragment, not {lab}")
            _require_label(e, TGT)
            ta = _synth(a, TGT, env)
            if not isinstance(ta, Eff):
                raise TypeMismatch(f"Map argument must be Eff-typed, got {type_name(ta)}")
            tf = _synth_fun(f, ta.inner, TGT, env)
            return _stamp(e, Eff(tf.cod))
        case Ap(f, a):
            if lab is not TGT:
                raise LabelMismatch(f"Ap only lives in the target fragment, not {lab}")
            _require_label(e, TGT)
            ta = _synth(a, TGT, env)
            if not isinstance(ta, Eff):
                raise TypeMismatch(f"Ap argument must be Eff-typed, got {type_name(ta)}")
            if isinstance(f, Pure) and isinstance(f.inner, Lam) and f.inner.param_ty is None:
                # a lifted unannotated lambda: its parameter comes from the
                # argument side, like an ordinary application site
                _require_label(f, TGT)
                arrow = _check_lam(f.inner, ta.inner, COM, env)
                tf: Ty = Eff(arrow)
                f.ty = tf
            else:
                tf = _synth(f, TGT, env)
            if not (isinstance(tf, Eff) and isinstance(tf.inner, Arrow)):
                raise TypeMismatch(
                    f"Ap function side must have type Eff (s -> t), got {type_name(tf)}"
                )
            if tf.inner.dom != ta.inner:
                raise TypeMismatch(
                    f"Ap domain {type_name(tf.inner.dom)} does not match argument "
                    f"{type_name(ta.inner)}"
                )
            return _stamp(e, Eff(tf.inner.cod))
    raise TypeCheckError(f"unknown term former {type(e).__name__}")


def _prod(a: Ty, b: Ty) -> Ty:
    return Prod(a, b)


def _check_lam(lam: Lam, dom: Ty, lab: Label, env: TypeEnv) -> Arrow:
    """Check a lambda against a known parameter type."""
    if lam.param_ty is not None and lam.param_ty != dom:
        raise TypeMismatch(
            f"lambda annotated {type_name(lam.param_ty)} used where "
            f"{type_name(dom)} is required"
        )
    body_env = env.bind(lam.param, dom)
    if lam.body.label is COM:
        cod = _synth(lam.body, COM, body_env)
    elif lam.body.label is TGT and lab is TGT:
        # Sequencing lambdas fabricated by the do-notation baseline carry
        # explicit combinator bodies; they only make sense in target terms.
        cod = _synth(lam.body, TGT, body_env)
    else:
        raise LabelMismatch(
            f"lambda body labelled {lam.body.label} (bodies are common, or "
            f"target inside target terms)"
        )
    ty = Arrow(dom, cod)
    lam.ty = ty
    return ty


def _synth_fun(f: Term, dom: Ty, lab: Label, env: TypeEnv) -> Arrow:
    """Type a term in function position whose domain is already known."""
    if isinstance(f, Lam):
        _require_label(f, lab)
        return _check_lam(f, dom, lab, env)
    tf = _synth(f, lab, env)
    if not isinstance(tf, Arrow):
        raise TypeMismatch(f"expected a function, got {type_name(tf)}")
    if tf.dom != dom:
        raise TypeMismatch(
            f"function domain {type_name(tf.dom)} does not match argument "
            f"{type_name(dom)}"
        )
    return tf


def _synth_app(f: Term, a: Term, lab: Label, env: TypeEnv) -> Ty:
    if isinstance(f, Lam) and f.param_ty is None:
        # Argument-first so unannotated lambdas get their parameter type
        # from the application site.
        ta = _synth(a, lab, env)
        tf = _synth_fun(f, ta, lab, env)
        return tf.cod
    tf = _synth(f, lab, env)
    if not isinstance(tf, Arrow):
        raise TypeMismatch(f"application of non-function type {type_name(tf)}")
    ta = _synth(a, lab, env)
    if tf.dom != ta:
        raise TypeMismatch(
            f"argument type {type_name(ta)} does not match domain {type_name(tf.dom)}"
        )
    return tf.cod
