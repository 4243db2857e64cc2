from __future__ import annotations

import time

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import APPS, read
from xbound.app import (
    InfluenceSet, Program, analyze_app, backward_inter, backward_intra, evaluate, find_call_sites, load_program,
)
from xbound.rules import AppRuleSpec, builtin_rules
from xbound.script.parser import parse_module

RULES = builtin_rules()
RUN = RULES[0]
RULES7 = APPS / "rules7"


def program(src: str, path: str = "app.js") -> Program:
    return Program([parse_module(src, path)])


def kinds(infl: InfluenceSet) -> set:
    return {(e.kind, e.name) for e in infl.entities}


def outer_leaves(prog: Program, infl: InfluenceSet) -> set:
    """Entities left after dropping parameters of functions that have direct callers."""
    cg = prog.call_graph
    return {(e.kind, e.name) for e in infl.entities
            if not (e.kind == "param"
                    and any(c.kind == "call" for c in cg.callers_of(e.function, e.location.path)))}


# rules

def test_builtin_rules_are_the_seven_table_rows():
    assert [r.signature for r in RULES] == [
        "run(_, data)", "parseXml(xml)", "powm(_, pow)", "setTimezone(tz)",
        "query(_, values, _)", "encode(data)", "toBigIntLE(buff)",
    ]
    assert all(sum(r.arity) == 1 for r in RULES)
    assert all(r.sources == ("req", "req.body", "req.params", "req.query") for r in RULES)


def test_rule_needs_exactly_one_tracked_position():
    with pytest.raises(ValueError):
        AppRuleSpec("run", (True, True))
    with pytest.raises(ValueError):
        AppRuleSpec("run", (False,))


def test_source_patterns_and_wildcards():
    r = AppRuleSpec("f", (True,), ("req", "req.params.*"))
    assert r.source_matches("req.body.x") == "req"
    assert r.source_matches("req.params.id") == "req.params.*"
    assert r.source_matches("request") is None
    only_wild = AppRuleSpec("f", (True,), ("req.params.*",))
    assert only_wild.source_matches("req.params") is None


# call sites

def test_sqlite_listing_has_one_run_site():
    prog = load_program(APPS / "sqlite_ideas")
    sites = find_call_sites(prog, RUN)
    assert len(sites) == 1
    line = read(APPS / "sqlite_ideas" / "server.js").splitlines()[sites[0].location.line - 1]
    assert "db.run(query, values, function(err)" in line


def test_no_api_no_sites():
    assert find_call_sites(program("function f(x) { return x; }\n"), RUN) == []


def test_two_run_calls_two_sites():
    sites = find_call_sites(load_program(APPS / "dup_calls"), RUN)
    assert len(sites) == 2 and len({s.function for s in sites}) == 2


def test_arity_must_cover_tracked_position():
    assert find_call_sites(program("db.run('x');\n"), RUN) == []


# intra-procedural

def test_destructured_request_body_reaches_values():
    prog = load_program(APPS / "sqlite_ideas")
    site = find_call_sites(prog, RUN)[0]
    infl = backward_intra(prog, site, RUN.tracked)
    assert "req.body" in infl
    assert evaluate(RUN, infl, site)[0]


def test_literal_argument_has_literal_influence_only():
    prog = program("function f() {\n  db.run('q', 42);\n}\n")
    site = find_call_sites(prog, RUN)[0]
    infl = backward_intra(prog, site, RUN.tracked)
    assert {e.kind for e in infl.entities} == {"literal"}
    assert evaluate(RUN, infl, site) == (False, None)


def test_intermediate_assignment_equals_direct_use():
    direct = program("app.post('/', (req, res) => {\n  db.run('q', req.body.x);\n});\n")
    via = program("app.post('/', (req, res) => {\n  const v = req.body.x;\n  let w;\n  w = v;\n  db.run('q', w);\n});\n")
    a = backward_intra(direct, find_call_sites(direct, RUN)[0], RUN.tracked)
    b = backward_intra(via, find_call_sites(via, RUN)[0], RUN.tracked)
    assert kinds(a) == kinds(b) == {("param", "req.body.x")}


def test_orthogonal_calls_are_opaque_leaves():
    prog = program("app.post('/', (req, res) => {\n  db.run('q', sanitize(req.body));\n});\n")
    infl = backward_intra(prog, find_call_sites(prog, RUN)[0], RUN.tracked)
    assert {e.kind for e in infl.entities} == {"opaque"}


# inter-procedural

def test_request_body_crosses_into_helper():
    prog = load_program(APPS / "inter")
    site = find_call_sites(prog, RUN)[0]
    assert site.function == "save"
    assert "req.body" not in backward_intra(prog, site, RUN.tracked)
    infl = backward_inter(prog, site, RUN)
    assert "req.body" in infl
    misuse, finding = evaluate(RUN, infl, site)
    assert misuse and finding.chain[-1] == "save" and len(finding.chain) == 2


def test_uncalled_function_keeps_intra_result():
    prog = program("function lonely() {\n  const v = config.value;\n  db.run('q', v);\n}\n")
    site = find_call_sites(prog, RUN)[0]
    assert kinds(backward_inter(prog, site, RUN)) == kinds(backward_intra(prog, site, RUN.tracked))


def test_three_deep_chain_equals_inlined_version():
    deep = load_program(APPS / "three_deep")
    flat = load_program(APPS / "three_deep_inlined")
    d = backward_inter(deep, find_call_sites(deep, RUN)[0], RUN)
    f = backward_inter(flat, find_call_sites(flat, RUN)[0], RUN)
    assert not d.truncated
    assert outer_leaves(deep, d) == outer_leaves(flat, f) == {("param", "req.body.item"), ("opaque", "Date.now()")}


def test_depth_zero_equals_intra():
    for app in [APPS / "inter", APPS / "three_deep", APPS / "recursive", APPS / "sqlite_ideas"]:
        prog = load_program(app)
        for site in find_call_sites(prog, RUN):
            inter = backward_inter(prog, site, RUN, depth=0)
            assert inter.entities == backward_intra(prog, site, RUN.tracked).entities


def test_depth_exceeded_marks_truncation():
    prog = load_program(APPS / "three_deep")
    site = find_call_sites(prog, RUN)[0]
    assert backward_inter(prog, site, RUN, depth=1).truncated
    assert not backward_inter(prog, site, RUN, depth=16).truncated


def test_influence_grows_with_depth():
    for app in [APPS / "inter", APPS / "three_deep", APPS / "recursive", APPS / "multi_file"]:
        prog = load_program(app)
        site = find_call_sites(prog, RUN)[0]
        previous = frozenset()
        for depth in range(6):
            current = backward_inter(prog, site, RUN, depth=depth).entities
            assert previous <= current
            previous = current


def test_recursion_terminates_and_finds_source():
    prog = load_program(APPS / "recursive")
    assert ("insertAll", "insertAll") in {t[:2] for t in prog.call_graph.internal().triples}
    site = find_call_sites(prog, RUN)[0]
    start = time.perf_counter()
    infl = backward_inter(prog, site, RUN, depth=1000)
    assert time.perf_counter() - start < 2.0
    assert "req.body.rows" in infl


@st.composite
def call_chains(draw):
    """A random acyclic or cyclic chain of helpers passing one value down to db.run."""
    n = draw(st.integers(1, 6))
    back = draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=4))
    lines = []
    for i in range(n):
        calls = [f"  h{i + 1}(v);" if i + 1 < n else "  db.run('q', v);"]
        calls += [f"  h{b}(v);" for a, b in back if a == i]
        lines.append(f"function h{i}(v) {{\n" + "\n".join(calls) + "\n}")
    lines.append("app.post('/', (req, res) => {\n  h0(req.query.v);\n});")
    return n, "\n".join(lines) + "\n"


@settings(max_examples=60, deadline=None)
@given(call_chains())
def test_random_chains_terminate_and_reach_the_handler(chain):
    n, src = chain
    prog = program(src)
    site = find_call_sites(prog, RUN)[0]
    infl = backward_inter(prog, site, RUN, depth=n + 1)
    assert "req.query.v" in infl
    assert not infl.truncated


# evaluate

def test_evaluate_is_pure():
    prog = load_program(APPS / "sqlite_ideas")
    site = find_call_sites(prog, RUN)[0]
    infl = backward_inter(prog, site, RUN)
    assert evaluate(RUN, infl, site) == evaluate(RUN, infl, site)


def test_attack_value_shape_is_recorded_for_sqlite():
    prog = load_program(APPS / "sqlite_ideas")
    site = find_call_sites(prog, RUN)[0]
    _, finding = evaluate(RUN, backward_inter(prog, site, RUN), site)
    # an object such as {toString: 23} under req.body.img reaches the tracked parameter
    assert finding.source == "req.body" and finding.entity == "req.body"


def test_known_false_positive_still_alerts():
    report = analyze_app(APPS / "rides_fp", RULES)
    assert len(report.findings) == 1
    assert report.findings[0].entity == "req.body.driver_name"


# corpus

@pytest.mark.parametrize("app,rule", [
    ("sqlite3", "run"), ("libxml", "parseXml"), ("bignum", "powm"), ("time", "setTimezone"),
    ("pg_native", "query"), ("opus", "encode"), ("bigint_buffer", "toBigIntLE"),
])
def test_each_minimal_app_trips_only_its_rule(app, rule):
    findings = analyze_app(RULES7 / app, RULES).findings
    assert [f.api for f in findings] == [rule]


def test_seven_app_corpus_has_seven_findings_and_clean_app_none():
    total = sum(len(analyze_app(d, RULES).findings) for d in sorted(RULES7.iterdir()))
    assert total == 7
    assert analyze_app(APPS / "clean", RULES).findings == []


def test_cross_file_flow():
    findings = analyze_app(APPS / "multi_file", RULES).findings
    assert [(f.entity, f.chain) for f in findings] == [("req.body.idea", ("anon@4:19", "save"))]
