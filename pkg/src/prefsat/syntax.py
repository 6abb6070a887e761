"""Surface syntax and core formula representation.

Formulas are written as s-expressions.  The parser checks names, arities and
sorts against a Signature and produces immutable AST nodes.  Two later passes
normalize a parsed formula for evaluation: `ground` expands quantifiers over
finite sorts and resolves `other`, `desugar` rewrites every derived operator
(syntactic preference variants, the conditional, and the value-layer forms)
into the modal core.  Printing is the inverse of parsing: `format_formula`
emits text that parses back to an equal AST.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .ontology import CONTENDERS, PRINCIPLES, BasicValue, other

# ---------------------------------------------------------------------------
# s-expression reader


class ParseError(Exception):
    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


@dataclass(frozen=True)
class SSym:
    """Bare symbol token, with the line it came from."""

    text: str
    line: int


@dataclass(frozen=True)
class SList:
    """Parenthesized form."""

    items: tuple
    line: int


def read_forms(text: str) -> list:
    """Read all top-level s-expressions.  `;` starts a comment to end of line."""
    tokens: list[tuple[str, int]] = []
    line = 1
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
            i += 1
        elif c in " \t\r":
            i += 1
        elif c == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif c in "()":
            tokens.append((c, line))
            i += 1
        else:
            j = i
            while j < n and text[j] not in " \t\r\n();":
                j += 1
            tokens.append((text[i:j], line))
            i = j

    forms: list = []
    stack: list[tuple[list, int]] = []
    for tok, ln in tokens:
        if tok == "(":
            stack.append(([], ln))
        elif tok == ")":
            if not stack:
                raise ParseError("unbalanced ')'", ln)
            items, open_ln = stack.pop()
            node = SList(tuple(items), open_ln)
            if stack:
                stack[-1][0].append(node)
            else:
                forms.append(node)
        else:
            node = SSym(tok, ln)
            if stack:
                stack[-1][0].append(node)
            else:
                forms.append(node)
    if stack:
        raise ParseError("unclosed '('", stack[-1][1])
    return forms


# ---------------------------------------------------------------------------
# terms


@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Opponent:
    """`(other t)`: the opposing contender of a contender-sorted term."""

    arg: "Term"


Term = Const | Var | Opponent


def resolve_term(t: Term, env: dict[str, Const]) -> Term:
    """Substitute variables from env and fold `other` over constants."""
    if isinstance(t, Var):
        return env.get(t.name, t)
    if isinstance(t, Opponent):
        inner = resolve_term(t.arg, env)
        if isinstance(inner, Const):
            return Const(other(inner.name))
        return Opponent(inner)
    return t


# ---------------------------------------------------------------------------
# formula AST

# Every node is a frozen dataclass, so formulas hash and compare structurally.


class Formula:
    __slots__ = ()


@dataclass(frozen=True)
class Atom(Formula):
    pred: str
    args: tuple[Term, ...] = ()


@dataclass(frozen=True)
class ValAtom(Formula):
    """Incidence atom: a basic value observed for one party at a world."""

    value: BasicValue
    party: Term


@dataclass(frozen=True)
class Not(Formula):
    sub: Formula


@dataclass(frozen=True)
class And(Formula):
    args: tuple[Formula, ...]


@dataclass(frozen=True)
class Or(Formula):
    args: tuple[Formula, ...]


@dataclass(frozen=True)
class Implies(Formula):
    lhs: Formula
    rhs: Formula


@dataclass(frozen=True)
class Iff(Formula):
    lhs: Formula
    rhs: Formula


@dataclass(frozen=True)
class DiaWeak(Formula):
    """Some weakly-better world (reflexive reachability) satisfies the body."""

    sub: Formula


@dataclass(frozen=True)
class BoxWeak(Formula):
    sub: Formula


@dataclass(frozen=True)
class DiaStrict(Formula):
    """Some strictly-better world satisfies the body."""

    sub: Formula


@dataclass(frozen=True)
class BoxStrict(Formula):
    sub: Formula


@dataclass(frozen=True)
class Somewhere(Formula):
    """Global existential modality `E`."""

    sub: Formula


@dataclass(frozen=True)
class Everywhere(Formula):
    """Global universal modality `A`."""

    sub: Formula


@dataclass(frozen=True)
class Forall(Formula):
    var: str
    sort: str
    body: Formula


@dataclass(frozen=True)
class Exists(Formula):
    var: str
    sort: str
    body: Formula


LIFT_PATTERNS = ("ee", "ea", "ae", "aa")


@dataclass(frozen=True)
class SynPref(Formula):
    """Binary preference statement, one of the eight syntactic variants."""

    pattern: str  # ee | ea | ae | aa
    strict: bool
    lhs: Formula
    rhs: Formula


@dataclass(frozen=True)
class CpDiaWeak(Formula):
    """Weak-betterness diamond restricted to worlds agreeing on the guards."""

    guards: tuple[Formula, ...]
    sub: Formula


@dataclass(frozen=True)
class CpDiaStrict(Formula):
    guards: tuple[Formula, ...]
    sub: Formula


@dataclass(frozen=True)
class CpPrefAA(Formula):
    """All-all preference over the guard-respecting relation; world-independent."""

    guards: tuple[Formula, ...]
    strict: bool
    lhs: Formula
    rhs: Formula


@dataclass(frozen=True)
class Cond(Formula):
    """Defeasible conditional: best antecedent worlds satisfy the consequent."""

    lhs: Formula
    rhs: Formula


@dataclass(frozen=True)
class PrincipleExt(Formula):
    """Worlds realizing both values a principle commits a party to."""

    principle: str
    party: Term


@dataclass(frozen=True)
class Agg(Formula):
    """Union-style aggregation of principle extensions."""

    parts: tuple[tuple[str, Term], ...]


@dataclass(frozen=True)
class VPref(Formula):
    """Value preference: the chosen all-exists lift over two aggregations."""

    strict: bool
    lhs: Formula  # PrincipleExt | Agg
    rhs: Formula


@dataclass(frozen=True)
class Promotes(Formula):
    """Factual premises tie a decision to reaching a principle's worlds."""

    premise: Formula
    decision: Formula
    principle: str
    party: Term


@dataclass(frozen=True)
class Conflict(Formula):
    """All four basic values observed for one party at once."""

    party: Term


def make_and(args: list[Formula]) -> Formula:
    if not args:
        raise ValueError("empty conjunction")
    return args[0] if len(args) == 1 else And(tuple(args))


def make_or(args: list[Formula]) -> Formula:
    if not args:
        raise ValueError("empty disjunction")
    return args[0] if len(args) == 1 else Or(tuple(args))


# ---------------------------------------------------------------------------
# signature


RESERVED_HEADS = frozenset(
    {
        "not", "and", "or", "implies", "iff",
        "boxleq", "dialeq", "boxlt", "dialt", "A", "E",
        "forall", "exists", "prefsyn",
        "cp-dialeq", "cp-dialt", "cp-pref-aa", "cond",
        "ext", "agg", "vpref", "promotes", "conflict", "val", "other",
    }
)


@dataclass
class Signature:
    """Declared sorts (finite constant lists) and atoms (argument sorts)."""

    sorts: dict[str, tuple[str, ...]] = field(default_factory=dict)
    atoms: dict[str, tuple[str, ...]] = field(default_factory=dict)

    def __post_init__(self):
        self.sorts.setdefault("contender", CONTENDERS)

    def const_sort(self, name: str) -> str | None:
        for sort, consts in self.sorts.items():
            if name in consts:
                return sort
        return None

    def add_sort(self, name: str, consts: tuple[str, ...], line: int | None = None):
        if name in self.sorts:
            raise ParseError(f"duplicate sort {name!r}", line)
        if not consts:
            raise ParseError(f"sort {name!r} has no constants", line)
        for c in consts:
            if self.const_sort(c) is not None or c in self.atoms:
                raise ParseError(f"name {c!r} already in use", line)
        self.sorts[name] = consts

    def add_atom(self, name: str, arg_sorts: tuple[str, ...], line: int | None = None):
        if name in RESERVED_HEADS or name in PRINCIPLES or name in BasicValue.__members__:
            raise ParseError(f"reserved name {name!r} cannot be an atom", line)
        if name in self.atoms or self.const_sort(name) is not None or name in self.sorts:
            raise ParseError(f"name {name!r} already in use", line)
        for s in arg_sorts:
            if s not in self.sorts:
                raise ParseError(f"unknown sort {s!r} in atom {name!r}", line)
        self.atoms[name] = arg_sorts


def base_signature(*zero_ary_atoms: str) -> Signature:
    sig = Signature()
    for name in zero_ary_atoms:
        sig.add_atom(name, ())
    return sig


# ---------------------------------------------------------------------------
# parsing formulas


def _head(node) -> str | None:
    if isinstance(node, SList) and node.items and isinstance(node.items[0], SSym):
        return node.items[0].text
    return None


def _parse_term(node, sig: Signature, env: dict[str, str]) -> tuple[Term, str]:
    """Parse a term; returns (term, sort name)."""
    if isinstance(node, SSym):
        name = node.text
        if name in env:
            return Var(name), env[name]
        sort = sig.const_sort(name)
        if sort is not None:
            return Const(name), sort
        raise ParseError(f"unknown constant or unbound variable {name!r}", node.line)
    if _head(node) == "other":
        if len(node.items) != 2:
            raise ParseError("other takes one argument", node.line)
        inner, sort = _parse_term(node.items[1], sig, env)
        if sort != "contender":
            raise ParseError("other applies to contender terms only", node.line)
        if isinstance(inner, Const):
            return Const(other(inner.name)), "contender"
        return Opponent(inner), "contender"
    raise ParseError("expected a term", getattr(node, "line", None))


def _parse_party(node, sig: Signature, env: dict[str, str]) -> Term:
    term, sort = _parse_term(node, sig, env)
    if sort != "contender":
        raise ParseError("expected a contender", getattr(node, "line", None))
    return term


def _parse_principle_pair(node, sig, env) -> tuple[str, Term]:
    if not isinstance(node, SList) or len(node.items) != 2:
        raise ParseError("expected (PRINCIPLE party)", getattr(node, "line", None))
    head = node.items[0]
    if not isinstance(head, SSym) or head.text not in PRINCIPLES:
        raise ParseError("unknown principle", node.line)
    return head.text, _parse_party(node.items[1], sig, env)


def _parse_gammas(node, sig, env) -> tuple[Formula, ...]:
    # The guard slot is always a list; each element is parsed as a formula,
    # so a compound singleton guard needs double parens: ((and A B)).
    if not isinstance(node, SList):
        raise ParseError("guard slot must be a parenthesized list", getattr(node, "line", None))
    return tuple(_parse_formula(item, sig, env) for item in node.items)


def _want(node, count: int, what: str):
    if len(node.items) != count + 1:
        raise ParseError(f"{what} takes {count} argument(s)", node.line)


def _parse_formula(node, sig: Signature, env: dict[str, str]) -> Formula:
    if isinstance(node, SSym):
        name = node.text
        if name in env:
            raise ParseError(f"variable {name!r} used as a formula", node.line)
        if name in sig.atoms:
            if sig.atoms[name]:
                raise ParseError(f"atom {name!r} needs arguments", node.line)
            return Atom(name)
        raise ParseError(f"unknown atom {name!r}", node.line)

    if not isinstance(node, SList) or not node.items:
        raise ParseError("empty form", getattr(node, "line", None))
    head = node.items[0]
    if not isinstance(head, SSym):
        raise ParseError("expected an operator or atom name", node.line)
    op = head.text
    items = node.items

    if op == "not":
        _want(node, 1, "not")
        return Not(_parse_formula(items[1], sig, env))
    if op in ("and", "or"):
        if len(items) < 3:
            raise ParseError(f"{op} takes at least 2 arguments", node.line)
        args = tuple(_parse_formula(x, sig, env) for x in items[1:])
        return And(args) if op == "and" else Or(args)
    if op == "implies":
        _want(node, 2, "implies")
        return Implies(_parse_formula(items[1], sig, env), _parse_formula(items[2], sig, env))
    if op == "iff":
        _want(node, 2, "iff")
        return Iff(_parse_formula(items[1], sig, env), _parse_formula(items[2], sig, env))
    if op in ("boxleq", "dialeq", "boxlt", "dialt", "A", "E"):
        _want(node, 1, op)
        cls = {
            "boxleq": BoxWeak, "dialeq": DiaWeak,
            "boxlt": BoxStrict, "dialt": DiaStrict,
            "A": Everywhere, "E": Somewhere,
        }[op]
        return cls(_parse_formula(items[1], sig, env))
    if op in ("forall", "exists"):
        _want(node, 3, op)
        var_node, sort_node, body_node = items[1], items[2], items[3]
        if not isinstance(var_node, SSym) or not isinstance(sort_node, SSym):
            raise ParseError(f"{op} takes a variable, a sort and a body", node.line)
        var, sort = var_node.text, sort_node.text
        if sort not in sig.sorts:
            raise ParseError(f"unknown sort {sort!r}", node.line)
        if var in env:
            raise ParseError(f"variable {var!r} already bound", node.line)
        if sig.const_sort(var) is not None or var in sig.atoms:
            raise ParseError(f"variable {var!r} shadows a declared name", node.line)
        body = _parse_formula(body_node, sig, {**env, var: sort})
        return (Forall if op == "forall" else Exists)(var, sort, body)
    if op == "prefsyn":
        _want(node, 4, "prefsyn")
        pat_node, strict_node = items[1], items[2]
        if not isinstance(pat_node, SSym) or pat_node.text not in LIFT_PATTERNS:
            raise ParseError("pattern must be one of ee ea ae aa", node.line)
        strict = _parse_strictness(strict_node)
        return SynPref(
            pat_node.text, strict,
            _parse_formula(items[3], sig, env), _parse_formula(items[4], sig, env),
        )
    if op in ("cp-dialeq", "cp-dialt"):
        _want(node, 2, op)
        gammas = _parse_gammas(items[1], sig, env)
        sub = _parse_formula(items[2], sig, env)
        return (CpDiaWeak if op == "cp-dialeq" else CpDiaStrict)(gammas, sub)
    if op == "cp-pref-aa":
        _want(node, 4, "cp-pref-aa")
        gammas = _parse_gammas(items[1], sig, env)
        strict = _parse_strictness(items[2])
        return CpPrefAA(
            gammas, strict,
            _parse_formula(items[3], sig, env), _parse_formula(items[4], sig, env),
        )
    if op == "cond":
        _want(node, 2, "cond")
        return Cond(_parse_formula(items[1], sig, env), _parse_formula(items[2], sig, env))
    if op == "ext":
        _want(node, 2, "ext")
        if not isinstance(items[1], SSym) or items[1].text not in PRINCIPLES:
            raise ParseError("unknown principle", node.line)
        return PrincipleExt(items[1].text, _parse_party(items[2], sig, env))
    if op == "agg":
        if len(items) < 2:
            raise ParseError("agg takes at least one (PRINCIPLE party) pair", node.line)
        return Agg(tuple(_parse_principle_pair(x, sig, env) for x in items[1:]))
    if op == "vpref":
        _want(node, 3, "vpref")
        strict = _parse_strictness(items[1])
        lhs = _parse_formula(items[2], sig, env)
        rhs = _parse_formula(items[3], sig, env)
        for side in (lhs, rhs):
            if not isinstance(side, (PrincipleExt, Agg)):
                raise ParseError("vpref sides must be ext or agg forms", node.line)
        return VPref(strict, lhs, rhs)
    if op == "promotes":
        _want(node, 3, "promotes")
        premise = _parse_formula(items[1], sig, env)
        decision = _parse_formula(items[2], sig, env)
        principle, party = _parse_principle_pair(items[3], sig, env)
        return Promotes(premise, decision, principle, party)
    if op == "conflict":
        _want(node, 1, "conflict")
        return Conflict(_parse_party(items[1], sig, env))
    if op == "val":
        _want(node, 2, "val")
        if not isinstance(items[1], SSym) or items[1].text not in BasicValue.__members__:
            raise ParseError("unknown basic value", node.line)
        return ValAtom(BasicValue[items[1].text], _parse_party(items[2], sig, env))

    # anything else must be a declared atom applied to terms
    if op in RESERVED_HEADS:
        raise ParseError(f"misplaced operator {op!r}", node.line)
    if op not in sig.atoms:
        raise ParseError(f"unknown operator or atom {op!r}", node.line)
    arg_sorts = sig.atoms[op]
    if len(items) - 1 != len(arg_sorts):
        raise ParseError(
            f"atom {op!r} takes {len(arg_sorts)} argument(s), got {len(items) - 1}", node.line
        )
    args = []
    for arg_node, want_sort in zip(items[1:], arg_sorts):
        term, got_sort = _parse_term(arg_node, sig, env)
        if got_sort != want_sort:
            raise ParseError(
                f"atom {op!r} expects sort {want_sort!r}, got {got_sort!r}", node.line
            )
        args.append(term)
    return Atom(op, tuple(args))


def _parse_strictness(node) -> bool:
    if isinstance(node, SSym) and node.text in ("weak", "strict"):
        return node.text == "strict"
    raise ParseError("expected weak or strict", getattr(node, "line", None))


def parse_formula(text: str, sig: Signature) -> Formula:
    forms = read_forms(text)
    if len(forms) != 1:
        raise ParseError(f"expected exactly one formula, got {len(forms)}")
    return _parse_formula(forms[0], sig, {})


# ---------------------------------------------------------------------------
# printing


def _format_term(t: Term) -> str:
    if isinstance(t, Const) or isinstance(t, Var):
        return t.name
    return f"(other {_format_term(t.arg)})"


def format_formula(f: Formula) -> str:
    if isinstance(f, Atom):
        if not f.args:
            return f.pred
        return "(" + " ".join([f.pred] + [_format_term(a) for a in f.args]) + ")"
    if isinstance(f, ValAtom):
        return f"(val {f.value.name} {_format_term(f.party)})"
    if isinstance(f, Not):
        return f"(not {format_formula(f.sub)})"
    if isinstance(f, And):
        return "(and " + " ".join(format_formula(a) for a in f.args) + ")"
    if isinstance(f, Or):
        return "(or " + " ".join(format_formula(a) for a in f.args) + ")"
    if isinstance(f, Implies):
        return f"(implies {format_formula(f.lhs)} {format_formula(f.rhs)})"
    if isinstance(f, Iff):
        return f"(iff {format_formula(f.lhs)} {format_formula(f.rhs)})"
    if isinstance(f, DiaWeak):
        return f"(dialeq {format_formula(f.sub)})"
    if isinstance(f, BoxWeak):
        return f"(boxleq {format_formula(f.sub)})"
    if isinstance(f, DiaStrict):
        return f"(dialt {format_formula(f.sub)})"
    if isinstance(f, BoxStrict):
        return f"(boxlt {format_formula(f.sub)})"
    if isinstance(f, Somewhere):
        return f"(E {format_formula(f.sub)})"
    if isinstance(f, Everywhere):
        return f"(A {format_formula(f.sub)})"
    if isinstance(f, Forall):
        return f"(forall {f.var} {f.sort} {format_formula(f.body)})"
    if isinstance(f, Exists):
        return f"(exists {f.var} {f.sort} {format_formula(f.body)})"
    if isinstance(f, SynPref):
        s = "strict" if f.strict else "weak"
        return f"(prefsyn {f.pattern} {s} {format_formula(f.lhs)} {format_formula(f.rhs)})"
    if isinstance(f, CpDiaWeak):
        g = "(" + " ".join(format_formula(x) for x in f.guards) + ")"
        return f"(cp-dialeq {g} {format_formula(f.sub)})"
    if isinstance(f, CpDiaStrict):
        g = "(" + " ".join(format_formula(x) for x in f.guards) + ")"
        return f"(cp-dialt {g} {format_formula(f.sub)})"
    if isinstance(f, CpPrefAA):
        g = "(" + " ".join(format_formula(x) for x in f.guards) + ")"
        s = "strict" if f.strict else "weak"
        return f"(cp-pref-aa {g} {s} {format_formula(f.lhs)} {format_formula(f.rhs)})"
    if isinstance(f, Cond):
        return f"(cond {format_formula(f.lhs)} {format_formula(f.rhs)})"
    if isinstance(f, PrincipleExt):
        return f"(ext {f.principle} {_format_term(f.party)})"
    if isinstance(f, Agg):
        pairs = " ".join(f"({p} {_format_term(x)})" for p, x in f.parts)
        return f"(agg {pairs})"
    if isinstance(f, VPref):
        s = "strict" if f.strict else "weak"
        return f"(vpref {s} {format_formula(f.lhs)} {format_formula(f.rhs)})"
    if isinstance(f, Promotes):
        pair = f"({f.principle} {_format_term(f.party)})"
        return f"(promotes {format_formula(f.premise)} {format_formula(f.decision)} {pair})"
    if isinstance(f, Conflict):
        return f"(conflict {_format_term(f.party)})"
    raise TypeError(f"cannot format {type(f).__name__}")


# ---------------------------------------------------------------------------
# grounding: expand quantifiers over finite sorts, resolve variables


def _subst(f: Formula, env: dict[str, Const]) -> Formula:
    if isinstance(f, Atom):
        return Atom(f.pred, tuple(resolve_term(a, env) for a in f.args))
    if isinstance(f, ValAtom):
        return ValAtom(f.value, resolve_term(f.party, env))
    if isinstance(f, Not):
        return Not(_subst(f.sub, env))
    if isinstance(f, And):
        return And(tuple(_subst(a, env) for a in f.args))
    if isinstance(f, Or):
        return Or(tuple(_subst(a, env) for a in f.args))
    if isinstance(f, Implies):
        return Implies(_subst(f.lhs, env), _subst(f.rhs, env))
    if isinstance(f, Iff):
        return Iff(_subst(f.lhs, env), _subst(f.rhs, env))
    if isinstance(f, (DiaWeak, BoxWeak, DiaStrict, BoxStrict, Somewhere, Everywhere)):
        return type(f)(_subst(f.sub, env))
    if isinstance(f, (Forall, Exists)):
        return type(f)(f.var, f.sort, _subst(f.body, env))
    if isinstance(f, SynPref):
        return SynPref(f.pattern, f.strict, _subst(f.lhs, env), _subst(f.rhs, env))
    if isinstance(f, (CpDiaWeak, CpDiaStrict)):
        return type(f)(tuple(_subst(g, env) for g in f.guards), _subst(f.sub, env))
    if isinstance(f, CpPrefAA):
        return CpPrefAA(
            tuple(_subst(g, env) for g in f.guards),
            f.strict, _subst(f.lhs, env), _subst(f.rhs, env),
        )
    if isinstance(f, Cond):
        return Cond(_subst(f.lhs, env), _subst(f.rhs, env))
    if isinstance(f, PrincipleExt):
        return PrincipleExt(f.principle, resolve_term(f.party, env))
    if isinstance(f, Agg):
        return Agg(tuple((p, resolve_term(x, env)) for p, x in f.parts))
    if isinstance(f, VPref):
        return VPref(f.strict, _subst(f.lhs, env), _subst(f.rhs, env))
    if isinstance(f, Promotes):
        return Promotes(
            _subst(f.premise, env), _subst(f.decision, env),
            f.principle, resolve_term(f.party, env),
        )
    if isinstance(f, Conflict):
        return Conflict(resolve_term(f.party, env))
    raise TypeError(f"cannot substitute in {type(f).__name__}")


def ground(f: Formula, sig: Signature) -> Formula:
    """Expand forall/exists into conjunctions/disjunctions over sort constants."""
    if isinstance(f, (Forall, Exists)):
        consts = sig.sorts.get(f.sort)
        if not consts:
            raise ParseError(f"cannot ground over empty or unknown sort {f.sort!r}")
        expanded = [ground(_subst(f.body, {f.var: Const(c)}), sig) for c in consts]
        return make_and(expanded) if isinstance(f, Forall) else make_or(expanded)
    if isinstance(f, (Atom, ValAtom)):
        return f
    if isinstance(f, Not):
        return Not(ground(f.sub, sig))
    if isinstance(f, And):
        return And(tuple(ground(a, sig) for a in f.args))
    if isinstance(f, Or):
        return Or(tuple(ground(a, sig) for a in f.args))
    if isinstance(f, Implies):
        return Implies(ground(f.lhs, sig), ground(f.rhs, sig))
    if isinstance(f, Iff):
        return Iff(ground(f.lhs, sig), ground(f.rhs, sig))
    if isinstance(f, (DiaWeak, BoxWeak, DiaStrict, BoxStrict, Somewhere, Everywhere)):
        return type(f)(ground(f.sub, sig))
    if isinstance(f, SynPref):
        return SynPref(f.pattern, f.strict, ground(f.lhs, sig), ground(f.rhs, sig))
    if isinstance(f, (CpDiaWeak, CpDiaStrict)):
        return type(f)(tuple(ground(g, sig) for g in f.guards), ground(f.sub, sig))
    if isinstance(f, CpPrefAA):
        return CpPrefAA(
            tuple(ground(g, sig) for g in f.guards),
            f.strict, ground(f.lhs, sig), ground(f.rhs, sig),
        )
    if isinstance(f, Cond):
        return Cond(ground(f.lhs, sig), ground(f.rhs, sig))
    if isinstance(f, (PrincipleExt, Agg, VPref, Promotes, Conflict)):
        return f
    raise TypeError(f"cannot ground {type(f).__name__}")


def _require_party_const(t: Term) -> Term:
    if not isinstance(t, Const):
        raise ParseError("value-layer forms need a resolved party; ground first")
    return t


# ---------------------------------------------------------------------------
# desugaring into the modal core


def _desugar_synpref(pattern: str, strict: bool, lhs: Formula, rhs: Formula) -> Formula:
    dia = DiaStrict if strict else DiaWeak
    # The existential/universal "box of the complement" variants flip flavor:
    # weak uses the strict box, strict uses the weak box.
    box = BoxWeak if strict else BoxStrict
    if pattern == "ee":
        return Somewhere(And((lhs, dia(rhs))))
    if pattern == "ae":
        return Everywhere(Implies(lhs, dia(rhs)))
    if pattern == "ea":
        return Somewhere(And((rhs, box(Not(lhs)))))
    if pattern == "aa":
        return Everywhere(Implies(rhs, box(Not(lhs))))
    raise ValueError(f"unknown pattern {pattern!r}")


def _principle_conjunction(principle: str, party: Term) -> Formula:
    _require_party_const(party)
    v1, v2 = PRINCIPLES[principle]
    return And((ValAtom(v1, party), ValAtom(v2, party)))


def desugar(f: Formula) -> Formula:
    """Rewrite derived operators into the modal core.  Quantifier-free input."""
    if isinstance(f, (Atom, ValAtom)):
        return f
    if isinstance(f, Not):
        return Not(desugar(f.sub))
    if isinstance(f, And):
        return And(tuple(desugar(a) for a in f.args))
    if isinstance(f, Or):
        return Or(tuple(desugar(a) for a in f.args))
    if isinstance(f, Implies):
        return Implies(desugar(f.lhs), desugar(f.rhs))
    if isinstance(f, Iff):
        return Iff(desugar(f.lhs), desugar(f.rhs))
    if isinstance(f, (DiaWeak, BoxWeak, DiaStrict, BoxStrict, Somewhere, Everywhere)):
        return type(f)(desugar(f.sub))
    if isinstance(f, SynPref):
        return _desugar_synpref(f.pattern, f.strict, desugar(f.lhs), desugar(f.rhs))
    if isinstance(f, (CpDiaWeak, CpDiaStrict)):
        return type(f)(tuple(desugar(g) for g in f.guards), desugar(f.sub))
    if isinstance(f, CpPrefAA):
        return CpPrefAA(
            tuple(desugar(g) for g in f.guards),
            f.strict, desugar(f.lhs), desugar(f.rhs),
        )
    if isinstance(f, Cond):
        lhs, rhs = desugar(f.lhs), desugar(f.rhs)
        return Everywhere(Implies(lhs, DiaWeak(And((lhs, BoxWeak(Implies(lhs, rhs)))))))
    if isinstance(f, PrincipleExt):
        return _principle_conjunction(f.principle, f.party)
    if isinstance(f, Agg):
        return make_or([_principle_conjunction(p, x) for p, x in f.parts])
    if isinstance(f, VPref):
        return _desugar_synpref("ae", f.strict, desugar(f.lhs), desugar(f.rhs))
    if isinstance(f, Promotes):
        target = _principle_conjunction(f.principle, f.party)
        return Implies(
            desugar(f.premise),
            BoxStrict(Iff(desugar(f.decision), DiaStrict(target))),
        )
    if isinstance(f, Conflict):
        party = _require_party_const(f.party)
        return And(tuple(ValAtom(v, party) for v in BasicValue))
    if isinstance(f, (Forall, Exists)):
        raise ParseError("desugar expects grounded input (quantifier found)")
    raise TypeError(f"cannot desugar {type(f).__name__}")


def elaborate(f: Formula, sig: Signature) -> Formula:
    """ground + desugar: the normal form the evaluator and encoder accept."""
    return desugar(ground(f, sig))


# ---------------------------------------------------------------------------
# symbol collection (used for oracle enumeration and model validation)


def collect_symbols(f: Formula) -> tuple[set[tuple[str, tuple[str, ...]]], set[tuple[BasicValue, str]]]:
    """Ground atom keys and incidence keys occurring in a normalized formula."""
    atoms: set[tuple[str, tuple[str, ...]]] = set()
    incidence: set[tuple[BasicValue, str]] = set()

    def walk(g: Formula):
        if isinstance(g, Atom):
            names = []
            for a in g.args:
                if not isinstance(a, Const):
                    raise ParseError("collect_symbols expects grounded input")
                names.append(a.name)
            atoms.add((g.pred, tuple(names)))
        elif isinstance(g, ValAtom):
            party = _require_party_const(g.party)
            incidence.add((g.value, party.name))
        elif isinstance(g, Not):
            walk(g.sub)
        elif isinstance(g, (And, Or)):
            for a in g.args:
                walk(a)
        elif isinstance(g, (Implies, Iff)):
            walk(g.lhs)
            walk(g.rhs)
        elif isinstance(g, (DiaWeak, BoxWeak, DiaStrict, BoxStrict, Somewhere, Everywhere)):
            walk(g.sub)
        elif isinstance(g, (CpDiaWeak, CpDiaStrict)):
            for x in g.guards:
                walk(x)
            walk(g.sub)
        elif isinstance(g, CpPrefAA):
            for x in g.guards:
                walk(x)
            walk(g.lhs)
            walk(g.rhs)
        else:
            raise ParseError(f"collect_symbols expects desugared input, found {type(g).__name__}")

    walk(f)
    return atoms, incidence
