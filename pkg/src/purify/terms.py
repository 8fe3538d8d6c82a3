"""Guest-language types, labels, terms and structural utilities.

Every AST node carries a fragment label (source / target / common) and an
optional type stamp that the checker fills in.  Terms are plain dataclasses;
all operations in this module build fresh trees and never mutate their
arguments (the ``ty`` stamp is a write-once annotation, not part of equality).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterator, Optional


class PurifyError(Exception):
    """Base class for every diagnostic raised by this package."""


class NotCommon(PurifyError):
    """Raised by relabel when a node outside the common fragment is found."""


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------

class Ty:
    """Guest type; one of Unit, Str, Prod, Arrow, Eff."""

    __slots__ = ()

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return type_name(self)


@dataclass(frozen=True, repr=False)
class Unit(Ty):
    pass


@dataclass(frozen=True, repr=False)
class Str(Ty):
    pass


@dataclass(frozen=True, repr=False)
class Prod(Ty):
    left: Ty
    right: Ty


@dataclass(frozen=True, repr=False)
class Arrow(Ty):
    dom: Ty
    cod: Ty


@dataclass(frozen=True, repr=False)
class Eff(Ty):
    inner: Ty


UNIT = Unit()
STR = Str()


def type_name(t: Ty) -> str:
    """Concrete-syntax rendering of a type (re-parseable)."""
    match t:
        case Unit():
            return "Unit"
        case Str():
            return "Str"
        case Prod(left, right):
            return f"({type_name(left)}, {type_name(right)})"
        case Arrow(dom, cod):
            dom_s = type_name(dom)
            if isinstance(dom, Arrow) or isinstance(dom, Eff):
                dom_s = f"({dom_s})"
            return f"{dom_s} -> {type_name(cod)}"
        case Eff(inner):
            inner_s = type_name(inner)
            if isinstance(inner, (Arrow, Eff)):
                inner_s = f"({inner_s})"
            return f"Eff {inner_s}"
    raise PurifyError(f"unknown type {t!r}")


# ---------------------------------------------------------------------------
# Labels
# ---------------------------------------------------------------------------

class Label(enum.Enum):
    """Fragment tag: direct-style source, combinator target, or common."""

    SRC = "src"
    TGT = "tgt"
    COM = "com"

    def __str__(self) -> str:
        return self.value


SRC = Label.SRC
TGT = Label.TGT
COM = Label.COM


# ---------------------------------------------------------------------------
# Terms
# ---------------------------------------------------------------------------

@dataclass
class Term:
    """Base AST node.

    ``label`` places the node in one of the three language fragments.
    ``ty`` is stamped by the checker (excluded from equality and repr).
    """

    label: Label = field(kw_only=True, default=COM)
    ty: Optional[Ty] = field(kw_only=True, default=None, compare=False, repr=False)


@dataclass
class Var(Term):
    name: str


@dataclass
class Const(Term):
    name: str


@dataclass
class Unt(Term):
    pass


@dataclass
class Lit(Term):
    value: str


@dataclass
class Prd(Term):
    fst: Term
    snd: Term


@dataclass
class Fst(Term):
    pair: Term


@dataclass
class Snd(Term):
    pair: Term


@dataclass
class App(Term):
    fun: Term
    arg: Term


@dataclass
class Lam(Term):
    """Function literal.

    The body normally lives in the common fragment.  The sequential baseline
    translation fabricates lambdas whose body is a target term (explicit
    combinator chains); those are only well formed at the target label.
    ``param_ty`` is an optional annotation used by the checker when the
    parameter type is not determined by the application site.
    """

    param: str
    body: Term
    param_ty: Optional[Ty] = field(default=None, compare=False)


@dataclass
class Each(Term):
    """Direct-style effect execution mark (source only)."""

    eff: Term
    label: Label = field(kw_only=True, default=SRC)


@dataclass
class Pure(Term):
    inner: Term
    label: Label = field(kw_only=True, default=TGT)


@dataclass
class Map(Term):
    fun: Term
    arg: Term
    label: Label = field(kw_only=True, default=TGT)


@dataclass
class Ap(Term):
    fun: Term
    arg: Term
    label: Label = field(kw_only=True, default=TGT)


@dataclass
class Join(Term):
    nested: Term
    label: Label = field(kw_only=True, default=TGT)


def children(e: Term) -> tuple[Term, ...]:
    """Immediate subterms, left to right."""
    match e:
        case Var() | Const() | Unt() | Lit():
            return ()
        case Prd(a, b) | App(a, b) | Map(a, b) | Ap(a, b):
            return (a, b)
        case Fst(a) | Snd(a) | Each(a) | Pure(a) | Join(a):
            return (a,)
        case Lam(_, body):
            return (body,)
    raise PurifyError(f"unknown term {e!r}")


def subterms(e: Term) -> Iterator[Term]:
    """The term and all its descendants, preorder."""
    yield e
    for c in children(e):
        yield from subterms(c)


def size(e: Term) -> int:
    return sum(1 for _ in subterms(e))


def replace_children(e: Term, new: tuple[Term, ...]) -> Term:
    """Same node kind and label with replaced immediate subterms."""
    match e:
        case Var() | Const() | Unt() | Lit():
            return e
        case Prd():
            return Prd(new[0], new[1], label=e.label, ty=e.ty)
        case App():
            return App(new[0], new[1], label=e.label, ty=e.ty)
        case Map():
            return Map(new[0], new[1], label=e.label, ty=e.ty)
        case Ap():
            return Ap(new[0], new[1], label=e.label, ty=e.ty)
        case Fst():
            return Fst(new[0], label=e.label, ty=e.ty)
        case Snd():
            return Snd(new[0], label=e.label, ty=e.ty)
        case Each():
            return Each(new[0], label=e.label, ty=e.ty)
        case Pure():
            return Pure(new[0], label=e.label, ty=e.ty)
        case Join():
            return Join(new[0], label=e.label, ty=e.ty)
        case Lam(param, _, param_ty):
            return Lam(param, new[0], param_ty, label=e.label, ty=e.ty)
    raise PurifyError(f"unknown term {e!r}")


# ---------------------------------------------------------------------------
# Constant signatures
# ---------------------------------------------------------------------------

class ConstKind(enum.Enum):
    PURE = "prim"
    EFFECTFUL = "effect"


@dataclass(frozen=True)
class ConstDecl:
    name: str
    ty: Ty
    kind: ConstKind

    @property
    def effectful(self) -> bool:
        return self.kind is ConstKind.EFFECTFUL

    def effect_arity(self) -> Optional[int]:
        """Number of arguments until the declared type reaches its Eff layer.

        None for pure constants and for effectful declarations whose type
        never reaches Eff (rejected by Signature validation anyway).
        """
        if not self.effectful:
            return None
        t, n = self.ty, 0
        while isinstance(t, Arrow):
            t = t.cod
            n += 1
            if isinstance(t, Eff):
                return n
        return 0 if isinstance(self.ty, Eff) else None


class Signature:
    """Ordered, name-unique collection of constant declarations."""

    def __init__(self, decls: list[ConstDecl] | None = None):
        self.decls: list[ConstDecl] = []
        self._by_name: dict[str, ConstDecl] = {}
        for d in decls or []:
            self.add(d)

    def add(self, decl: ConstDecl) -> None:
        if decl.name in self._by_name:
            raise PurifyError(f"duplicate constant {decl.name!r}")
        if decl.effectful and decl.effect_arity() is None:
            raise PurifyError(
                f"effectful constant {decl.name!r} must have a type of shape"
                f" Arrow(..., Eff _) or Eff _, got {type_name(decl.ty)}"
            )
        self.decls.append(decl)
        self._by_name[decl.name] = decl

    def lookup(self, name: str) -> Optional[ConstDecl]:
        return self._by_name.get(name)

    def __contains__(self, name: str) -> bool:
        return name in self._by_name

    def __iter__(self) -> Iterator[ConstDecl]:
        return iter(self.decls)

    def effectful_names(self) -> list[str]:
        return [d.name for d in self.decls if d.effectful]


# ---------------------------------------------------------------------------
# Fresh names
# ---------------------------------------------------------------------------

FRESH_PREFIX = "$"


class FreshNames:
    """Monotone counter namespace, disjoint from user identifiers.

    The parser rejects identifiers starting with the reserved prefix, so
    generated binders can never capture user variables.
    """

    def __init__(self, start: int = 1):
        self._next = start

    def fresh(self, hint: str = "x") -> str:
        name = f"{FRESH_PREFIX}{hint}{self._next}"
        self._next += 1
        return name


# ---------------------------------------------------------------------------
# Structural operations
# ---------------------------------------------------------------------------

def relabel(e: Term, target: Label) -> Term:
    """Copy a common term with every node's label replaced by ``target``.

    Raises NotCommon when any node lies outside the common fragment (which
    also rules out Each/Pure/Map/Ap/Join, since those are never common).
    """
    if e.label is not COM:
        raise NotCommon(f"relabel: node {type(e).__name__} has label {e.label}, not com")
    match e:
        case Var(name):
            return Var(name, label=target, ty=e.ty)
        case Const(name):
            return Const(name, label=target, ty=e.ty)
        case Unt():
            return Unt(label=target, ty=e.ty)
        case Lit(value):
            return Lit(value, label=target, ty=e.ty)
        case Prd(a, b):
            return Prd(relabel(a, target), relabel(b, target), label=target, ty=e.ty)
        case Fst(a):
            return Fst(relabel(a, target), label=target, ty=e.ty)
        case Snd(a):
            return Snd(relabel(a, target), label=target, ty=e.ty)
        case App(f, a):
            return App(relabel(f, target), relabel(a, target), label=target, ty=e.ty)
        case Lam(param, body, param_ty):
            # Lam bodies stay common at every label.
            if any(n.label is not COM for n in subterms(body)):
                raise NotCommon("relabel: lambda body contains non-common nodes")
            return Lam(param, body, param_ty, label=target, ty=e.ty)
    raise NotCommon(f"relabel: {type(e).__name__} is not a common term former")


def is_effect_free(e: Term) -> bool:
    """True iff the term contains no Each and no Join node."""
    return not any(isinstance(n, (Each, Join)) for n in subterms(e))


def alpha_eq(a: Term, b: Term) -> bool:
    """Equality up to consistent renaming of bound variables.

    Labels, constant names and literals are compared exactly; type stamps
    and parameter annotations are ignored.  Binders are compared by level
    so shadowing cannot conflate distinct variables.
    """

    def go(x: Term, y: Term, lx: dict[str, int], ly: dict[str, int],
           depth: int) -> bool:
        if type(x) is not type(y) or x.label is not y.label:
            return False
        match x, y:
            case Var(n1), Var(n2):
                if n1 in lx or n2 in ly:
                    return lx.get(n1) == ly.get(n2)
                return n1 == n2  # both free
            case Const(n1), Const(n2):
                return n1 == n2
            case Unt(), Unt():
                return True
            case Lit(v1), Lit(v2):
                return v1 == v2
            case Lam(p1, b1, _), Lam(p2, b2, _):
                return go(b1, b2, {**lx, p1: depth}, {**ly, p2: depth}, depth + 1)
            case _:
                cx, cy = children(x), children(y)
                return len(cx) == len(cy) and all(
                    go(u, v, lx, ly, depth) for u, v in zip(cx, cy)
                )

    return go(a, b, {}, {}, 0)


def erase_labels(e: Term) -> object:
    """Label-free structural skeleton, handy for relabel identity checks."""
    match e:
        case Var(name):
            return ("var", name)
        case Const(name):
            return ("const", name)
        case Unt():
            return ("unt",)
        case Lit(value):
            return ("lit", value)
        case Lam(param, body, _):
            return ("lam", param, erase_labels(body))
        case _:
            return (type(e).__name__.lower(),) + tuple(
                erase_labels(c) for c in children(e)
            )
