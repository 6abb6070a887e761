"""Knowledge bases: named axioms, facts, goals, and proof scripts.

A KB document is a sequence of top-level forms: (import NAME), (sort NAME
CONST+), (atom NAME SORT*), (axiom NAME FORMULA), (fact NAME FORMULA),
(goal NAME FORMULA), (option KEY VALUE).  Imports are resolved relative to
the importing file; merged names must stay unique.  Axioms hold at every
world, facts and goals at the designated world 0.

A proof script is a sequence of (step NAME FORMULA (uses NAME+) (bound N))
forms.  Replay checks each step as a bounded entailment from exactly the
entries its uses-list names: cited axioms hold globally, cited facts and
cited earlier steps hold at world 0.  A step fails if a countermodel refutes
it, and also when any of its citations is broken: a name that resolves to
nothing (missing) or an earlier step that itself failed (unavailable).  The
entailment search still runs on the surviving support so a failing step can
render a countermodel when one exists.  Failure propagates: a failed step is
never usable as support.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from . import syntax as sx
from .solver import (
    DEFAULT_BOUND,
    BoundedValid,
    Query,
    Verdict,
    check,
)

_CASES_DIR = Path(__file__).resolve().parent / "cases"


class ConfigError(Exception):
    pass


@dataclass
class KnowledgeBase:
    name: str
    sig: sx.Signature
    axioms: dict[str, sx.Formula] = field(default_factory=dict)
    facts: dict[str, sx.Formula] = field(default_factory=dict)
    goals: dict[str, sx.Formula] = field(default_factory=dict)
    options: dict[str, str] = field(default_factory=dict)
    imports: tuple[str, ...] = ()

    def entry_names(self) -> set[str]:
        return set(self.axioms) | set(self.facts) | set(self.goals)

    def elaborated_axioms(self) -> tuple[sx.Formula, ...]:
        return tuple(sx.elaborate(f, self.sig) for f in self.axioms.values())

    def elaborated_facts(self) -> tuple[sx.Formula, ...]:
        return tuple(sx.elaborate(f, self.sig) for f in self.facts.values())


def _sym_text(node, what: str) -> str:
    if not isinstance(node, sx.SSym):
        raise sx.ParseError(f"expected a {what} name", getattr(node, "line", None))
    return node.text


def load_kb(path: str | Path, _loading: frozenset | None = None) -> KnowledgeBase:
    path = Path(path).resolve()
    loading = _loading or frozenset()
    if path in loading:
        raise ConfigError(f"import cycle through {path.name}")
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigError(f"cannot read KB file {path}: {e}") from None

    kb = KnowledgeBase(name=path.stem, sig=sx.Signature())
    imports: list[str] = []
    for form in sx.read_forms(text):
        if not isinstance(form, sx.SList) or not form.items:
            raise sx.ParseError("expected a (...) form at top level", getattr(form, "line", None))
        head = _sym_text(form.items[0], "form")
        items = form.items
        if head == "import":
            if len(items) != 2:
                raise sx.ParseError("import takes one name", form.line)
            dep_name = _sym_text(items[1], "KB")
            dep_path = path.parent / f"{dep_name}.kb"
            dep = load_kb(dep_path, loading | {path})
            _merge_into(kb, dep, form.line)
            imports.append(dep_name)
        elif head == "sort":
            if len(items) < 3:
                raise sx.ParseError("sort takes a name and at least one constant", form.line)
            name = _sym_text(items[1], "sort")
            consts = tuple(_sym_text(x, "constant") for x in items[2:])
            kb.sig.add_sort(name, consts, form.line)
        elif head == "atom":
            if len(items) < 2:
                raise sx.ParseError("atom takes a name and argument sorts", form.line)
            name = _sym_text(items[1], "atom")
            arg_sorts = tuple(_sym_text(x, "sort") for x in items[2:])
            kb.sig.add_atom(name, arg_sorts, form.line)
        elif head in ("axiom", "fact", "goal"):
            if len(items) != 3:
                raise sx.ParseError(f"{head} takes a name and a formula", form.line)
            name = _sym_text(items[1], head)
            if name in kb.entry_names():
                raise sx.ParseError(f"duplicate entry name {name!r}", form.line)
            formula = sx._parse_formula(items[2], kb.sig, {})
            getattr(kb, head + "s")[name] = formula
        elif head == "option":
            if len(items) != 3:
                raise sx.ParseError("option takes a key and a value", form.line)
            kb.options[_sym_text(items[1], "option")] = _sym_text(items[2], "value")
        else:
            raise sx.ParseError(f"unknown top-level form {head!r}", form.line)
    kb.imports = tuple(imports)
    return kb


def _merge_into(kb: KnowledgeBase, dep: KnowledgeBase, line: int | None):
    for sort, consts in dep.sig.sorts.items():
        if sort == "contender":
            continue
        kb.sig.add_sort(sort, consts, line)
    for atom, arg_sorts in dep.sig.atoms.items():
        kb.sig.add_atom(atom, arg_sorts, line)
    overlap = kb.entry_names() & dep.entry_names()
    if overlap:
        raise ConfigError(f"duplicate entry names after import: {sorted(overlap)}")
    kb.axioms.update(dep.axioms)
    kb.facts.update(dep.facts)
    kb.goals.update(dep.goals)
    for key, value in dep.options.items():
        kb.options.setdefault(key, value)


def default_general_knowledge() -> KnowledgeBase:
    """The shipped two-party animal-dispute KB (no case specifics)."""
    return load_kb(_CASES_DIR / "general.kb")


def case_kb(name: str) -> KnowledgeBase:
    """One of the shipped cases: pierson, post, conti."""
    path = _CASES_DIR / f"{name}.kb"
    if not path.exists():
        raise ConfigError(f"no shipped case named {name!r}")
    return load_kb(path)


def case_proof_path(name: str) -> Path:
    return _CASES_DIR / f"{name}.proof"


# ---------------------------------------------------------------------------
# queries from a KB


def _q_opts(kb: KnowledgeBase, overrides: dict) -> dict:
    opts = {}
    if "bound" in kb.options:
        opts["bound"] = int(kb.options["bound"])
    if "total" in kb.options:
        opts["total"] = kb.options["total"] in ("true", "yes", "1")
    opts.update({k: v for k, v in overrides.items() if v is not None})
    return opts


def goal_query(kb: KnowledgeBase, goal_name: str, with_facts: bool = True,
               **overrides) -> Query:
    """Refutation query for one named goal: axioms globally, optionally the
    facts at world 0, the goal's negation at world 0."""
    if goal_name not in kb.goals:
        raise ConfigError(f"no goal named {goal_name!r} in {kb.name}")
    target = sx.elaborate(kb.goals[goal_name], kb.sig)
    return Query(
        axioms=kb.elaborated_axioms(),
        facts=kb.elaborated_facts() if with_facts else (),
        target=target,
        mode="refute",
        **_q_opts(kb, overrides),
    )


def sat_query(kb: KnowledgeBase, **overrides) -> Query:
    """Model-finding query: axioms globally, facts at world 0."""
    return Query(
        axioms=kb.elaborated_axioms(),
        facts=kb.elaborated_facts(),
        target=None,
        mode="find",
        **_q_opts(kb, overrides),
    )


def audit_queries(kb: KnowledgeBase, **overrides) -> dict[str, Query]:
    """Per-party refutation query: does the KB force a value conflict at the
    designated world?"""
    from .ontology import CONTENDERS

    out: dict[str, Query] = {}
    for party in CONTENDERS:
        target = sx.desugar(sx.Conflict(sx.Const(party)))
        out[party] = Query(
            axioms=kb.elaborated_axioms(),
            facts=kb.elaborated_facts(),
            target=target,
            mode="refute",
            **_q_opts(kb, overrides),
        )
    return out


def conflict_audit(kb: KnowledgeBase, **overrides) -> dict[str, Verdict]:
    """Run the audit queries; a countermodel is the healthy answer."""
    return {party: check(q) for party, q in audit_queries(kb, **overrides).items()}


# ---------------------------------------------------------------------------
# proof scripts


@dataclass(frozen=True)
class ProofStep:
    name: str
    formula: sx.Formula
    uses: tuple[str, ...]
    bound: int


@dataclass
class StepResult:
    name: str
    passed: bool
    verdict: Verdict
    missing: tuple[str, ...] = ()      # cited names that resolved to nothing
    unavailable: tuple[str, ...] = ()  # cited steps that had already failed


def load_proof(path: str | Path, sig: sx.Signature) -> list[ProofStep]:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigError(f"cannot read proof file {path}: {e}") from None
    steps: list[ProofStep] = []
    names: list[str] = []
    for form in sx.read_forms(text):
        if not isinstance(form, sx.SList) or _sym_text(form.items[0], "form") != "step":
            raise sx.ParseError("proof files contain only (step ...) forms",
                                getattr(form, "line", None))
        if len(form.items) < 3:
            raise sx.ParseError("step takes a name and a formula", form.line)
        name = _sym_text(form.items[1], "step")
        if name in names:
            raise sx.ParseError(f"unresolved reference: duplicate step name {name!r}", form.line)
        formula = sx._parse_formula(form.items[2], sig, {})
        uses: tuple[str, ...] = ()
        bound = DEFAULT_BOUND
        for extra in form.items[3:]:
            if not isinstance(extra, sx.SList) or not extra.items:
                raise sx.ParseError("expected (uses ...) or (bound N)", form.line)
            key = _sym_text(extra.items[0], "clause")
            if key == "uses":
                uses = tuple(_sym_text(x, "reference") for x in extra.items[1:])
            elif key == "bound":
                if len(extra.items) != 2 or not isinstance(extra.items[1], sx.SSym):
                    raise sx.ParseError("bound takes one integer", extra.line)
                try:
                    bound = int(extra.items[1].text)
                except ValueError:
                    raise sx.ParseError("bound takes one integer", extra.line) from None
            else:
                raise sx.ParseError(f"unknown step clause {key!r}", extra.line)
        steps.append(ProofStep(name, formula, uses, bound))
        names.append(name)
    # structural check: a step may cite only earlier steps, never itself or later ones
    for i, step in enumerate(steps):
        later = {s.name for s in steps[i:]}
        for ref in step.uses:
            if ref in later:
                raise sx.ParseError(
                    f"unresolved reference: step {step.name!r} cites {ref!r} "
                    "which is not an earlier step"
                )
    return steps


def step_queries(steps: list[ProofStep], kb: KnowledgeBase,
                 **overrides) -> list[tuple[str, Query]]:
    """The entailment query each step would run when all its cited steps are
    established; used for cross-checking engines on the replay workload."""
    out: list[tuple[str, Query]] = []
    elaborated: dict[str, sx.Formula] = {}
    for step in steps:
        axioms: list[sx.Formula] = []
        at_w0: list[sx.Formula] = []
        for ref in step.uses:
            if ref in kb.axioms:
                axioms.append(sx.elaborate(kb.axioms[ref], kb.sig))
            elif ref in kb.facts:
                at_w0.append(sx.elaborate(kb.facts[ref], kb.sig))
            elif ref in elaborated:
                at_w0.append(elaborated[ref])
        target = sx.elaborate(step.formula, kb.sig)
        elaborated[step.name] = target
        opts = {"bound": step.bound}
        opts.update({k: v for k, v in overrides.items() if v is not None})
        out.append((step.name, Query(axioms=tuple(axioms), facts=tuple(at_w0),
                                     target=target, mode="refute", **opts)))
    return out


def replay(steps: list[ProofStep], kb: KnowledgeBase, *, engine: str | None = None,
           total: bool | None = None, budget: float | None = None) -> list[StepResult]:
    """Check every step against exactly its cited support."""
    results: list[StepResult] = []
    established: dict[str, sx.Formula] = {}  # passed steps, elaborated
    failed: set[str] = set()
    for step in steps:
        axioms: list[sx.Formula] = []
        at_w0: list[sx.Formula] = []
        missing: list[str] = []
        unavailable: list[str] = []
        for ref in step.uses:
            if ref in kb.axioms:
                axioms.append(sx.elaborate(kb.axioms[ref], kb.sig))
            elif ref in kb.facts:
                at_w0.append(sx.elaborate(kb.facts[ref], kb.sig))
            elif ref in established:
                at_w0.append(established[ref])
            elif ref in failed:
                unavailable.append(ref)
            else:
                missing.append(ref)
        target = sx.elaborate(step.formula, kb.sig)
        q = Query(
            axioms=tuple(axioms),
            facts=tuple(at_w0),
            target=target,
            mode="refute",
            bound=step.bound,
            engine=engine or "sat",
            total=bool(total),
            budget=budget,
        )
        verdict = check(q)
        # broken support fails the step even when the shrunken check passes;
        # the verdict is kept so a genuine countermodel can still be rendered
        passed = isinstance(verdict, BoundedValid) and not missing and not unavailable
        if passed:
            established[step.name] = target
        else:
            failed.add(step.name)
        results.append(StepResult(step.name, passed, verdict,
                                  tuple(missing), tuple(unavailable)))
    return results
