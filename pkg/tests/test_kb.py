"""KB loading, imports, derived queries, and proof replay."""
import textwrap

import pytest

import prefsat.syntax as sx
from prefsat.kb import (
    ConfigError,
    audit_queries,
    case_kb,
    case_proof_path,
    conflict_audit,
    default_general_knowledge,
    goal_query,
    load_kb,
    load_proof,
    replay,
    sat_query,
    step_queries,
)
from prefsat.solver import BoundedValid, Countermodel, Satisfiable, check


def write(tmp_path, name, body):
    p = tmp_path / name
    p.write_text(textwrap.dedent(body))
    return p


# ---------------------------------------------------------------------------
# document loading


def test_load_kb_collects_entries(tmp_path):
    p = write(tmp_path, "demo.kb", """\
        ; a comment
        (atom Rain)
        (atom Wet contender)
        (axiom a1 (implies Rain (Wet p)))
        (fact f1 Rain)
        (goal g1 (Wet p))
        (option bound 3)
        """)
    kb = load_kb(p)
    assert kb.name == "demo"
    assert set(kb.axioms) == {"a1"} and set(kb.facts) == {"f1"} and set(kb.goals) == {"g1"}
    assert kb.options == {"bound": "3"}
    assert kb.sig.atoms["Wet"] == ("contender",)


def test_load_kb_rejects_malformed_documents(tmp_path):
    bad = [
        ("(axiom a1)", "name and a formula"),
        ("(atom)", "atom takes"),
        ("(sort s)", "at least one"),
        ("(blah x y)", "unknown top-level"),
        ("(atom Rain) (axiom a1 Rain) (fact a1 Rain)", "duplicate entry"),
        ("plain-symbol", "top level"),
    ]
    for i, (body, message) in enumerate(bad):
        with pytest.raises(sx.ParseError, match=message):
            load_kb(write(tmp_path, f"bad{i}.kb", body))
    with pytest.raises(ConfigError, match="cannot read"):
        load_kb(tmp_path / "absent.kb")


def test_imports_merge_and_stay_unique(tmp_path):
    write(tmp_path, "base.kb", "(atom Rain) (axiom a1 Rain) (option bound 2)")
    child = write(tmp_path, "child.kb", """\
        (import base)
        (fact f1 Rain)
        (option bound 5)
        """)
    kb = load_kb(child)
    assert kb.imports == ("base",)
    assert set(kb.axioms) == {"a1"} and set(kb.facts) == {"f1"}
    assert kb.options["bound"] == "5"  # the importing file wins

    write(tmp_path, "clash.kb", "(import base) (axiom a1 (not Rain))")
    with pytest.raises(sx.ParseError, match="duplicate entry"):
        load_kb(tmp_path / "clash.kb")

    write(tmp_path, "self.kb", "(import self)")
    with pytest.raises(ConfigError, match="cycle"):
        load_kb(tmp_path / "self.kb")


def test_goal_query_and_overrides(tmp_path):
    p = write(tmp_path, "demo.kb", """\
        (atom Rain)
        (axiom a1 (A Rain))
        (fact f1 Rain)
        (goal g1 (boxleq Rain))
        (option bound 3)
        """)
    kb = load_kb(p)
    q = goal_query(kb, "g1")
    assert q.bound == 3 and q.mode == "refute" and len(q.facts) == 1
    assert goal_query(kb, "g1", with_facts=False).facts == ()
    assert goal_query(kb, "g1", bound=6, engine="both").bound == 6
    assert isinstance(check(q), BoundedValid)
    with pytest.raises(ConfigError, match="no goal"):
        goal_query(kb, "nope")
    s = sat_query(kb)
    assert s.mode == "find" and isinstance(check(s), Satisfiable)


# ---------------------------------------------------------------------------
# shipped cases


def test_shipped_cases_load_and_rule():
    for name, goal, party in [
        ("pierson", "ruling-for-d", "d"),
        ("post", "ruling-for-p", "p"),
        ("conti", "ruling-for-p", "p"),
    ]:
        kb = case_kb(name)
        assert kb.imports == ("general",)
        assert list(kb.goals) == [goal]
        v = check(goal_query(kb, goal))
        assert isinstance(v, BoundedValid), (name, v.kind)
        assert sx.format_formula(kb.goals[goal]) == f"(boxlt (For {party}))"


def test_unknown_case_rejected():
    with pytest.raises(ConfigError, match="no shipped case"):
        case_kb("marbury")


def test_general_knowledge_alone_decides_nothing():
    kb = default_general_knowledge()
    assert not kb.goals and not kb.facts
    # without case facts the ruling direction is open
    probe = sx.elaborate(sx.parse_formula("(boxlt (For d))", kb.sig), kb.sig)
    from prefsat.solver import Query

    v = check(Query(axioms=kb.elaborated_axioms(), target=probe, mode="refute"))
    assert isinstance(v, Countermodel)


def test_case_facts_matter():
    # same goal formula, no facts: the entailment breaks
    kb = case_kb("pierson")
    v = check(goal_query(kb, "ruling-for-d", with_facts=False))
    assert isinstance(v, Countermodel)


def test_conflict_audit_is_clean_on_shipped_cases():
    for name in ("pierson", "post", "conti"):
        kb = case_kb(name)
        queries = audit_queries(kb)
        assert set(queries) == {"p", "d"}
        for party, verdict in conflict_audit(kb).items():
            assert isinstance(verdict, Countermodel), (name, party)


# ---------------------------------------------------------------------------
# proof scripts


def test_load_proof_structure():
    kb = case_kb("pierson")
    steps = load_proof(case_proof_path("pierson"), kb.sig)
    assert [s.name for s in steps] == [
        "s1-wild-setting", "s2-pref-instance", "s3-pref-lifted", "s4-will-link",
        "s5-stab-link", "s6-exhaustive", "s7-stab-forced", "s8-ruling",
    ]
    assert all(s.bound == 4 for s in steps)
    assert steps[1].uses == ("s1-wild-setting", "R2")


def test_load_proof_rejects_bad_references(tmp_path):
    kb = case_kb("pierson")
    fwd = write(tmp_path, "fwd.proof", """\
        (step a appWildAnimal (uses b))
        (step b appWildAnimal)
        """)
    with pytest.raises(sx.ParseError, match="unresolved reference"):
        load_proof(fwd, kb.sig)
    dup = write(tmp_path, "dup.proof", """\
        (step a appWildAnimal)
        (step a appAnimal)
        """)
    with pytest.raises(sx.ParseError, match="duplicate step"):
        load_proof(dup, kb.sig)
    selfref = write(tmp_path, "self.proof", "(step a appWildAnimal (uses a))")
    with pytest.raises(sx.ParseError, match="unresolved reference"):
        load_proof(selfref, kb.sig)
    with pytest.raises(sx.ParseError, match="only .step"):
        load_proof(write(tmp_path, "junk.proof", "(lemma a appAnimal)"), kb.sig)
    with pytest.raises(sx.ParseError, match="integer"):
        load_proof(write(tmp_path, "badb.proof", "(step a appAnimal (bound x))"), kb.sig)


def test_replay_full_ruling_passes():
    kb = case_kb("pierson")
    steps = load_proof(case_proof_path("pierson"), kb.sig)
    results = replay(steps, kb)
    assert [r.passed for r in results] == [True] * 8
    assert all(isinstance(r.verdict, BoundedValid) for r in results)
    assert all(not r.missing and not r.unavailable for r in results)


def test_replay_uses_only_cited_support():
    from dataclasses import replace

    kb = case_kb("pierson")
    steps = load_proof(case_proof_path("pierson"), kb.sig)
    # s1 cites no preference rule, so a step citing only s1 cannot conclude one
    s2_trimmed = replace(steps[1], uses=("s1-wild-setting",))
    results = replay([steps[0], s2_trimmed], kb)
    assert results[0].passed and not results[1].passed
    assert isinstance(results[1].verdict, Countermodel)


def test_replay_marks_missing_and_unavailable_support():
    kb = case_kb("pierson")
    del kb.axioms["R2"]
    steps = load_proof(case_proof_path("pierson"), kb.sig)
    results = {r.name: r for r in replay(steps, kb)}
    assert results["s2-pref-instance"].missing == ("R2",)
    assert not results["s2-pref-instance"].passed
    assert results["s7-stab-forced"].unavailable == ("s3-pref-lifted",)
    assert results["s8-ruling"].unavailable == ("s7-stab-forced",)
    assert results["s1-wild-setting"].passed  # independent steps still pass


def test_step_queries_mirror_the_replay_workload():
    kb = case_kb("pierson")
    steps = load_proof(case_proof_path("pierson"), kb.sig)
    named = step_queries(steps, kb)
    assert [n for n, _ in named] == [s.name for s in steps]
    q2 = dict(named)["s2-pref-instance"]
    assert len(q2.axioms) == 1 and len(q2.facts) == 1  # R2 global, s1 at world 0
    assert all(isinstance(check(q), BoundedValid) for _, q in named)
