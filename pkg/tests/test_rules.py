from __future__ import annotations

import random
import re

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bvalid.errors import EvalError, ParseError, RuleFileError
from bvalid.evaluator import Env
from bvalid.lang import INT, STRING, parse_expr, parse_pred, seq_of
from bvalid.rules import (RunConfig, check_rule, expand_defs, format_message, load_rule_texts,
                          parse_rule_file, run_all)
from bvalid.values import mk_set, render

from randrules import random_case

OMAP_RULES = '''
DEFINITION OMAP == "Trackside OMAP"
DEFINITION equipment_by_sector == %i.(i : dom(Equipment!Sector) | Equipment!Sector(i) |-> Equipment!Type(i))

RULE R12
  COUNTEREXAMPLE "sector %1 has %3 OMAPs"
  ANY urbalisSectorID, equipment, nb WHERE
    urbalisSectorID : ran(Sectors!Id) & equipment = OMAP &
    nb = card({i | i : dom(equipment_by_sector) & equipment_by_sector(i) = (urbalisSectorID |-> equipment)})
  EXPECTED nb >= 1
  END
END
'''


def seq(*xs):
    return mk_set(enumerate(xs, start=1))


def omap_env(sectors, equipment):
    values = {"Sectors!Id": seq(*sectors),
              "Equipment!Sector": seq(*(s for s, _ in equipment)),
              "Equipment!Type": seq(*(t for _, t in equipment))}
    return Env(values, {"Sectors!Id": seq_of(STRING), "Equipment!Sector": seq_of(STRING),
                        "Equipment!Type": seq_of(STRING)})


def load(text, env):
    defs, rules = parse_rule_file(text)
    return expand_defs(defs, rules, data_names=set(env.globals))


# -- parse_rule_file -----------------------------------------------------------

def test_one_rule_one_block():
    defs, rules = parse_rule_file('RULE R1 COUNTEREXAMPLE "m" ANY x WHERE x : {1} EXPECTED x = 1 END END')
    assert defs == [] and len(rules) == 1
    (r,) = rules
    assert r.id == "R1" and len(r.blocks) == 1
    b = r.blocks[0]
    assert b.params == ("x",) and b.where == parse_pred("x : {1}") and b.expected == parse_pred("x = 1")


def test_placeholders_checked_against_parameters():
    ok = 'RULE R COUNTEREXAMPLE "sector %1 has %3 OMAPs" ANY a, b, c WHERE a : {1} & b = a & c = a EXPECTED a = 1 END END'
    parse_rule_file(ok)
    bad = ok.replace("ANY a, b, c", "ANY a, b").replace(" & c = a", "")
    with pytest.raises(RuleFileError) as exc:
        parse_rule_file(bad)
    assert exc.value.kind == "placeholder-out-of-range" and exc.value.loc is not None


def test_percent_zero_is_out_of_range():
    with pytest.raises(RuleFileError):
        parse_rule_file('RULE R COUNTEREXAMPLE "%0" ANY a WHERE a : {1} EXPECTED a = 1 END END')


def test_duplicate_rule_id():
    text = 'RULE R1 COUNTEREXAMPLE "m" ANY x WHERE x : {1} EXPECTED x = 1 END END\n' * 2
    with pytest.raises(RuleFileError) as exc:
        parse_rule_file(text)
    assert exc.value.kind == "duplicate-rule-id"


def test_duplicate_rule_id_across_files():
    text = 'RULE R1 COUNTEREXAMPLE "m" ANY x WHERE x : {1} EXPECTED x = 1 END END\n'
    with pytest.raises(RuleFileError, match="also in a.rules"):
        load_rule_texts([("a.rules", text), ("b.rules", text)])


def test_rule_needs_a_block():
    with pytest.raises(ParseError, match="COUNTEREXAMPLE"):
        parse_rule_file("RULE R END")


def test_syntax_error_location_and_file():
    with pytest.raises(ParseError) as exc:
        parse_rule_file('RULE R\n  COUNTEREXAMPLE "m" ANY x WHERE x : {1} &\n  EXPECTED x = 1 END END', "x.rules")
    assert str(exc.value).startswith("x.rules:3:3")


def test_parameters_must_be_distinct():
    with pytest.raises(ParseError, match="twice"):
        parse_rule_file('RULE R COUNTEREXAMPLE "m" ANY x, x WHERE x : {1} EXPECTED x = 1 END END')


def test_multi_block_order_and_comments():
    defs, rules = parse_rule_file('''
        // leading comment
        DEFINITION d == {1, 2}
        RULE "quoted id"
          COUNTEREXAMPLE "first" ANY x WHERE x : d EXPECTED x > 0 END
          COUNTEREXAMPLE "second" ANY y WHERE y : d EXPECTED y > 0 END
        END''')
    assert [d.name for d in defs] == ["d"]
    assert rules[0].id == "quoted id"
    assert [b.message for b in rules[0].blocks] == ["first", "second"]


# -- expand_defs ---------------------------------------------------------------

def test_expand_simple():
    defs, rules = parse_rule_file('DEFINITION d == {1,2}\nRULE R COUNTEREXAMPLE "m" ANY x WHERE x : d '
                                  'EXPECTED x > 0 END END')
    (r,) = expand_defs(defs, rules)
    assert r.blocks[0].where == parse_pred("x : {1,2}")


def test_expand_nested_and_predicate_defs():
    defs, rules = parse_rule_file('''
        DEFINITION base == {1, 2, 3}
        DEFINITION evens == {v | v : base & v mod 2 = 0}
        DEFINITION nonempty == card(base) > 0
        RULE R COUNTEREXAMPLE "m" ANY x WHERE x : evens EXPECTED nonempty & x > 0 END END''')
    (r,) = expand_defs(defs, rules)
    assert r.blocks[0].where == parse_pred("x : {v | v : {1,2,3} & v mod 2 = 0}")
    assert r.blocks[0].expected == parse_pred("card({1,2,3}) > 0 & x > 0")


def test_cycle_detected():
    defs, rules = parse_rule_file("DEFINITION a == b\nDEFINITION b == a\n")
    with pytest.raises(RuleFileError) as exc:
        expand_defs(defs, rules)
    assert exc.value.kind == "cyclic-definition"
    assert "a -> b -> a" in exc.value.message


def test_unknown_name_in_definition():
    defs, rules = parse_rule_file("DEFINITION a == Missing!Col\n")
    with pytest.raises(RuleFileError) as exc:
        expand_defs(defs, rules, data_names={"T!c"})
    assert exc.value.kind == "unknown-name" and "Missing!Col" in exc.value.message


def test_definition_collides_with_data_name():
    defs, rules = parse_rule_file("DEFINITION dup == {1}\n")
    with pytest.raises(RuleFileError) as exc:
        expand_defs(defs, rules, data_names={"dup"})
    assert exc.value.kind == "name-collision"


def test_parameter_may_not_shadow_definition():
    defs, rules = parse_rule_file('DEFINITION d == {1}\nRULE R COUNTEREXAMPLE "m" ANY d WHERE d : {1} '
                                  'EXPECTED d = 1 END END')
    with pytest.raises(RuleFileError) as exc:
        expand_defs(defs, rules, data_names=set())
    assert exc.value.kind == "name-collision"


def test_definition_capture_is_rejected():
    defs, rules = parse_rule_file('DEFINITION big == x > 3\nRULE R COUNTEREXAMPLE "m" ANY y WHERE '
                                  'y : {1} EXPECTED #(x).(x : {1} & big) END END')
    with pytest.raises(RuleFileError, match="rebound"):
        expand_defs(defs, rules)


def test_definition_error_points_at_its_own_file():
    defs, rules = load_rule_texts([("shared.rules", "DEFINITION a ==\n  Nope!X\n"),
                                   ("r.rules", 'RULE R COUNTEREXAMPLE "m" ANY x WHERE x : {1} EXPECTED x = 1 END END')])
    with pytest.raises(RuleFileError) as exc:
        expand_defs(defs, rules, data_names=set())
    assert str(exc.value).startswith("shared.rules:2:3")


# -- format_message ------------------------------------------------------------

@pytest.mark.parametrize("template,params,binding,want", [
    ("%1 has %3", ("a", "b", "c"), {"a": "S1", "b": 7, "c": 2}, "S1 has 2"),
    ("100%% done", (), {}, "100% done"),
    ("%2", ("x", "y"), {"x": 1, "y": mk_set([2, 1])}, "{1,2}"),
    ("%1%1 % x", ("a",), {"a": True}, "TRUETRUE % x"),
    ("pair %1", ("p",), {"p": (1, "z")}, "pair (1|->z)"),
])
def test_format_message(template, params, binding, want):
    assert format_message(template, params, binding) == want


# -- check_rule ----------------------------------------------------------------

def test_trivially_true_block_passes():
    (r,) = load('RULE R COUNTEREXAMPLE "m" ANY x WHERE x : {1,2} EXPECTED 0 = 0 END END', Env({}))
    res = check_rule(r, Env({}))
    assert res.verdict == "PASS" and res.findings == [] and res.error is None


def test_omap_rule_two_sectors():
    sectors = ["S1", "S2"]
    equipment = [("S1", "Trackside OMAP"), ("S1", "Onboard"), ("S2", "Onboard")]
    env = omap_env(sectors, equipment)
    (r,) = load(OMAP_RULES, env)
    res = check_rule(r, env)
    # brute-force count per sector
    counts = {s: sum(1 for e in equipment if e == (s, "Trackside OMAP")) for s in sectors}
    assert counts == {"S1": 1, "S2": 0}
    assert res.verdict == "FAIL"
    assert [f.message for f in res.findings] == ["sector S2 has 0 OMAPs"]
    assert res.findings[0].witness == {"urbalisSectorID": '"S2"', "equipment": '"Trackside OMAP"',
                                       "nb": "0"}


def _area_env(areas, overlapping):
    values = {"t_regenerativeBraking": mk_set(areas),
              "a_regenerativeBrakingArea": mk_set([(r, 100 * r) for r in areas]),
              "f_areaIntersectArea": mk_set(overlapping)}
    from bvalid.lang import pair_of, set_of
    types = {"t_regenerativeBraking": set_of(INT),
             "a_regenerativeBrakingArea": set_of(pair_of(INT, INT)),
             "f_areaIntersectArea": set_of(pair_of(INT, INT))}
    return Env(values, types)


NON_OVERLAP = '''
RULE NON_OVERLAP
  COUNTEREXAMPLE "areas %1 and %2 overlap"
  ANY r1, r2 WHERE r1 : t_regenerativeBraking & r2 : t_regenerativeBraking & r1 /= r2
  EXPECTED a_regenerativeBrakingArea(r1) |-> a_regenerativeBrakingArea(r2) /: f_areaIntersectArea
  END
END
'''


def test_non_overlap_block_on_two_areas():
    env = _area_env([1, 2], [(100, 200), (200, 100)])
    (r,) = load(NON_OVERLAP, env)
    res = check_rule(r, env)
    assert res.verdict == "FAIL"
    assert [f.message for f in res.findings] == ["areas 1 and 2 overlap", "areas 2 and 1 overlap"]


def test_blocks_run_in_order_and_errors_keep_findings():
    env = Env({"s": seq(5, 6)}, {"s": seq_of(INT)})
    (r,) = load('''RULE R
        COUNTEREXAMPLE "first %1" ANY i WHERE i : dom(s) EXPECTED s(i) > 5 END
        COUNTEREXAMPLE "second %1" ANY i WHERE i : 1..3 EXPECTED s(i) > 0 END
        END''', env)
    res = check_rule(r, env)
    assert res.verdict == "ERROR"
    assert [f.message for f in res.findings] == ["first 1"]
    assert res.error.kind == "wd-apply-outside-domain"
    assert res.error.witness == {"i": "3"}


def test_truncation_is_a_hard_stop():
    (r,) = load('RULE R COUNTEREXAMPLE "%1" ANY x WHERE x : 1..100 EXPECTED x > 1000 END END', Env({}))
    res = check_rule(r, Env({}), max_findings=7)
    assert res.truncated and len(res.findings) == 7 and res.verdict == "FAIL"
    assert [f.message for f in res.findings] == [str(k) for k in range(1, 8)]


@pytest.mark.parametrize("where,expected,kind", [
    ("x > 1", "x = 1", "unbounded-variable"),
    ("x : {1}", "x = TRUE", "type-mismatch"),
    ("x : {1}", "x / 0 = 1", "wd-div-by-zero"),
    ("x : 1..10000000", "x > 0", "resource-limit"),
])
def test_rule_errors(where, expected, kind):
    (r,) = load(f'RULE RX COUNTEREXAMPLE "m" ANY x WHERE {where} EXPECTED {expected} END END', Env({}))
    res = check_rule(r, Env({}))
    assert res.verdict == "ERROR" and res.error.kind == kind
    if kind == "resource-limit":
        assert "RX" in str(res.error)


def test_blocks_do_not_share_values():
    env = Env({})
    (r,) = load('''RULE R
        COUNTEREXAMPLE "a" ANY nb WHERE nb = 3 EXPECTED nb = 3 END
        COUNTEREXAMPLE "b %1" ANY nb WHERE nb = 4 EXPECTED nb = 3 END
        END''', env)
    res = check_rule(r, env)
    assert [f.message for f in res.findings] == ["b 4"]


# -- run_all -------------------------------------------------------------------

THREE = '''
RULE P COUNTEREXAMPLE "p" ANY x WHERE x : {1} EXPECTED x = 1 END END
RULE F COUNTEREXAMPLE "f %1" ANY x WHERE x : {1, 2} EXPECTED x = 1 END END
RULE E COUNTEREXAMPLE "e" ANY x WHERE x : {1} EXPECTED x / 0 = 1 END END
'''


def test_run_all_empty():
    rep = run_all([], Env({}))
    assert rep.results == []
    assert set(rep.summary.values()) == {0}


@pytest.mark.parametrize("jobs", [1, 3])
def test_run_all_order_and_summary(jobs):
    rules = load(THREE, Env({}))
    rep = run_all(rules, Env({}), RunConfig(jobs=jobs))
    assert [(r.rule_id, r.verdict) for r in rep.results] == [("P", "PASS"), ("F", "FAIL"), ("E", "ERROR")]
    assert rep.summary["pass"] == rep.summary["fail"] == rep.summary["error"] == 1
    assert rep.summary["findings"] == 1


def test_parallel_matches_serial():
    rng = random.Random(5)
    cases = [random_case(rng) for _ in range(40)]
    text = "".join(c.rule_text(f"R{i}") for i, c in enumerate(cases))
    # every case uses the same data names, so give them one shared dataset
    env = cases[0].env()
    rules = load(text, env)
    a = run_all(rules, env, RunConfig(jobs=1))
    b = run_all(rules, env, RunConfig(jobs=4))
    strip = lambda rep: [(r.rule_id, r.verdict, r.findings, str(r.error)) for r in rep.results]
    assert strip(a) == strip(b)


# -- properties ----------------------------------------------------------------

@given(st.integers(0, 10 ** 9))
@settings(max_examples=300, deadline=None)
def test_block_semantics_equivalence(seed):
    case = random_case(random.Random(seed))
    env = case.env()
    (r,) = load(case.rule_text(), env)
    res = check_rule(r, env)
    want = [{p: render(b[p], True) for p in case.params} for b in case.findings()]
    assert [f.witness for f in res.findings] == want
    # verdict soundness
    assert res.error is None
    assert (res.verdict == "FAIL") == bool(res.findings)
    assert (res.verdict == "PASS") == (not res.findings)


_PH = re.compile(r"%[0-9]")
_PLAIN_VALUES = st.one_of(st.integers(-50, 50), st.booleans(), st.text("ab %", max_size=3),
                          st.lists(st.integers(0, 3)).map(mk_set))


@given(st.lists(st.sampled_from(["%1", "%2", "%%", "%% ", "x", " ", "%", "1", "%%x"]), max_size=8),
       _PLAIN_VALUES, _PLAIN_VALUES)
@settings(max_examples=300)
def test_message_totality(parts, p, q):
    template = "".join(parts)
    text = f'RULE R COUNTEREXAMPLE "{template}" ANY p, q WHERE p : {{1}} & q : {{1}} EXPECTED p = 0 END END'
    try:
        _, (rule,) = parse_rule_file(text)
    except RuleFileError:
        assert re.search(r"%%%?[0-9]", template)
        return
    msg = format_message(rule.blocks[0].message, ("p", "q"), {"p": p, "q": q})
    leftover = _PH.findall(msg)
    # a '%digit' may only come from a rendered value that itself contains '%'
    assert not leftover or "%" in render(p) + render(q)


def test_escaped_percent_before_digit_is_rejected():
    with pytest.raises(RuleFileError, match="ambiguous"):
        parse_rule_file('RULE R COUNTEREXAMPLE "100%%1" ANY p WHERE p : {1} EXPECTED p = 0 END END')
    with pytest.raises(RuleFileError, match="ambiguous"):
        parse_rule_file('RULE R COUNTEREXAMPLE "%%%1" ANY p WHERE p : {1} EXPECTED p = 0 END END')


def test_verdict_invariants_over_random_rules():
    rng = random.Random(3)
    for _ in range(200):
        case = random_case(rng)
        env = case.env()
        (r,) = load(case.rule_text(), env)
        res = check_rule(r, env)
        assert res.verdict in ("PASS", "FAIL", "ERROR")
        if res.verdict == "FAIL":
            assert res.findings and res.error is None
        if res.verdict == "PASS":
            assert not res.findings and res.error is None
        if res.verdict == "ERROR":
            assert res.error is not None
