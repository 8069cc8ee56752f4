"""Acceptance suite.

Each test checks one acceptance criterion at its stated tolerance and prints
a single ``criterion N: PASS|FAIL ...`` line to the terminal (printed even
without ``-s``). Run it alone with::

    python3 -m pytest tests/test_acceptance.py -v
"""

from __future__ import annotations

import csv
import random
import time

import pytest

from bvalid import synth
from bvalid.project import load_project, run_project, with_overrides, write_reports
from bvalid.rules import check_rule, expand_defs, parse_rule_file

from helpers import write_project
from randrules import random_case


class Console:
    """Prints straight to the terminal, bypassing pytest's capture."""

    def __init__(self, capsys) -> None:
        self._capsys = capsys

    def note(self, text: str) -> None:
        with self._capsys.disabled():
            print(f"\n{text}")

    def __call__(self, n: int, ok: bool, detail: str) -> bool:
        self.note(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
        return ok


@pytest.fixture
def verdict_line(capsys):
    return Console(capsys)


def _load(text, env):
    defs, rules = parse_rule_file(text)
    return expand_defs(defs, rules, data_names=set(env.globals))


# -- 1: oracle equivalence ---------------------------------------------------------

def test_criterion_1_oracle_equivalence(verdict_line):
    rng = random.Random(20240611)
    n, mismatches, nonempty = 1000, [], 0
    t0 = time.perf_counter()
    for k in range(n):
        case = random_case(rng)
        env = case.env()
        (rule,) = _load(case.rule_text(f"R{k}"), env)
        res = check_rule(rule, env)
        got = [tuple(f.witness[p] for p in case.params) for f in res.findings]
        want = [tuple(str(b[p]) for p in case.params) for b in case.findings()]
        nonempty += bool(want)
        if res.error is not None or got != want:
            mismatches.append((k, case.rule_text(), res.error, got, want))
    dt = time.perf_counter() - t0
    ok = not mismatches and dt < 60
    verdict_line(1, ok, f"{n} random rules, {len(mismatches)} mismatches, "
                        f"{nonempty} with findings, {dt:.1f} s")
    assert not mismatches, mismatches[:3]
    assert dt < 60
    assert nonempty > n // 10      # the oracle is not vacuous


# -- 2: non-overlap property -------------------------------------------------------

AREA_DECLS = '''DATA Braking!AreaId : seq(INT) SOURCE "Braking.csv" COLUMN "AreaId"
DATA Braking!BeginCm : seq(INT) SOURCE "Braking.csv" COLUMN "BeginCm"
DATA Braking!EndCm : seq(INT) SOURCE "Braking.csv" COLUMN "EndCm"
'''

AREA_RULES = '''
DEFINITION area == (Braking!AreaId~ ; %i.(i : dom(Braking!AreaId) | Braking!BeginCm(i) |-> Braking!EndCm(i)))
DEFINITION intersect == {a, b | a : dom(area) & b : dom(area) &
                         prj1(area(a)) < prj2(area(b)) & prj1(area(b)) < prj2(area(a))}

RULE BRAKING_AREAS_DISJOINT
  COUNTEREXAMPLE "braking areas %1 and %2 overlap"
  ANY a1, a2 WHERE a1 : dom(area) & a2 : dom(area) & a1 /= a2
  EXPECTED a1 |-> a2 /: intersect
  END
END
'''


def _brute_overlaps(areas):
    return sorted((a, b) for a, (b1, e1) in areas.items() for b, (b2, e2) in areas.items()
                  if a != b and b1 < e2 and b2 < e1)


def _areas_csv(areas):
    return "AreaId;BeginCm;EndCm\n" + "".join(f"{a};{b};{e}\n" for a, (b, e) in areas.items())


def test_criterion_2_non_overlap(tmp_path, verdict_line):
    overlapping = {10: (0, 1000), 20: (900, 2000), 30: (2500, 3000)}
    disjoint = {10: (0, 1000), 20: (1000, 2000), 30: (2500, 3000)}
    want = _brute_overlaps(overlapping)
    assert want == [(10, 20), (20, 10)] and _brute_overlaps(disjoint) == []

    outcomes = []
    for name, areas in (("overlap", overlapping), ("disjoint", disjoint)):
        cfg = write_project(tmp_path / name, csvs={"Braking.csv": _areas_csv(areas)},
                            decls=AREA_DECLS, rules=AREA_RULES)
        report, code = run_project(load_project(cfg))
        (res,) = report.results
        got = sorted((int(f.witness["a1"]), int(f.witness["a2"])) for f in res.findings)
        outcomes.append((res.verdict, got, code))
    ok = outcomes == [("FAIL", want, 1), ("PASS", [], 0)]
    verdict_line(2, ok, f"overlapping fixture -> {outcomes[0][0]} {len(outcomes[0][1])} findings; "
                        f"disjoint fixture -> {outcomes[1][0]} {len(outcomes[1][1])} findings")
    assert ok, outcomes


# -- 3: OMAP count -----------------------------------------------------------------

OMAP_DECLS = '''DATA Sectors!SectorId : seq(STRING) SOURCE "Sectors.csv" COLUMN "SectorId"
DATA Equipment!Sector : seq(STRING) SOURCE "Equipment.csv" COLUMN "Sector"
DATA Equipment!Type : seq(STRING) SOURCE "Equipment.csv" COLUMN "Type"
'''

OMAP_RULES = '''
DEFINITION ATC_Equipment_Type == %i.(i : dom(Equipment!Sector) | Equipment!Sector(i) |-> Equipment!Type(i))
DEFINITION OMAP == "Trackside OMAP"

RULE OMAP_PER_SECTOR
  COUNTEREXAMPLE "only %1 Trackside OMAP on the line"
  ANY nb WHERE
    nb = card({i | i : dom(ATC_Equipment_Type) & prj2(ATC_Equipment_Type(i)) = OMAP})
  EXPECTED nb >= 1
  END
  COUNTEREXAMPLE "sector %1 has %3 Trackside OMAP"
  ANY urbalisSectorID, equipment, nb WHERE
    urbalisSectorID : ran(Sectors!SectorId) & equipment = OMAP &
    nb = card({i | i : dom(ATC_Equipment_Type) & ATC_Equipment_Type(i) = (urbalisSectorID |-> equipment)})
  EXPECTED nb >= 1
  END
END
'''


def test_criterion_3_omap_count(tmp_path, verdict_line):
    sectors = ["S1", "S2", "S3"]
    equipment = [("S1", "Trackside OMAP"), ("S1", "Balise"), ("S3", "Trackside OMAP"),
                 ("S2", "Axle counter"), ("S1", "Trackside OMAP"), ("S2", "Onboard OMAP")]
    counts = {s: sum(1 for sec, t in equipment if sec == s and t == "Trackside OMAP") for s in sectors}
    assert counts == {"S1": 2, "S2": 0, "S3": 1}
    want = [f"sector {s} has {c} Trackside OMAP" for s, c in counts.items() if c < 1]

    cfg = write_project(tmp_path, csvs={
        "Sectors.csv": "SectorId\n" + "\n".join(sectors) + "\n",
        "Equipment.csv": "Sector;Type\n" + "".join(f"{s};{t}\n" for s, t in equipment)},
        decls=OMAP_DECLS, rules=OMAP_RULES)
    report, code = run_project(load_project(cfg))
    (res,) = report.results
    msgs = [f.message for f in res.findings]
    blocks = [f.block for f in res.findings]
    ok = msgs == want == ["sector S2 has 0 Trackside OMAP"] and blocks == [2] and res.verdict == "FAIL"
    ok = ok and res.findings[0].witness == {"urbalisSectorID": '"S2"', "equipment": '"Trackside OMAP"',
                                            "nb": "0"}
    verdict_line(3, ok, f"findings {msgs} (expected {want})")
    assert ok
    assert code == 1


# -- 4 and 5: scale and determinism ----------------------------------------------------

@pytest.fixture(scope="module")
def bench(tmp_path_factory):
    root = tmp_path_factory.mktemp("bench")
    return synth.write_project(root / "p200", rows=2000, rules=200), root


def _timed_run(cfg_path, out):
    cfg = with_overrides(load_project(cfg_path), output=out)
    t0 = time.perf_counter()
    report, code = run_project(cfg)
    write_reports(report, cfg)
    return report, code, time.perf_counter() - t0


def test_criterion_4_scale(bench, verdict_line):
    cfg_path, root = bench
    cfg = load_project(cfg_path)
    cells = 0
    for p in sorted(cfg.data_dir.glob("*.csv")):
        with open(p, encoding="utf-8", newline="") as fh:
            rows = list(csv.reader(fh, delimiter=";"))
        cells += len(rows[0]) * (len(rows) - 1)
    report, code, dt = _timed_run(cfg_path, root / "out4")
    ok = cells == 50_000 and report.summary["rules"] == 200 and dt < 600
    verdict_line(4, ok, f"{cells} cells, {report.summary['rules']} rules, {dt:.1f} s including reports "
                        f"(bar 600 s), exit {code}")

    # secondary reference point: 125 rules on the same data
    cfg125 = synth.write_project(root / "p125", rows=2000, rules=125)
    r125, _, dt125 = _timed_run(cfg125, root / "out125")
    verdict_line.note(f"benchmark: {r125.summary['rules']} rules on {cells} cells in {dt125:.1f} s "
                      "(reference point 300 s, not a gate)")

    assert cells == 50_000 and report.summary["rules"] == 200
    assert report.summary["error"] == 0 and not report.data_issues
    assert dt < 600
    # every planted fault shows up, each through the rule aimed at it
    found = {f.message for r in report.results for f in r.findings}
    for msg in ("signal 17 refers to unknown track 2500", "Track row 42: SpeedKmh = 200 outside [10, 160]",
                "zones 300 and 301 overlap", "Signals row 99: PosCm = -5 outside [0, 1000000000]",
                "Track row 1234 ends at 0 before it begins at 12330000",
                "Signals row 555: Aspects = 7 outside [2, 4]", "Zones row 777: unexpected Kind CAVE"):
        assert msg in found
    assert code == 1


def test_criterion_5_determinism(bench, verdict_line):
    cfg_path, root = bench
    runs = []
    for k in range(2):
        out = root / f"det{k}"
        cfg = with_overrides(load_project(cfg_path), output=out, formats=("csv", "json"))
        report, code = run_project(cfg)
        write_reports(report, cfg)
        runs.append((code, (out / "report.csv").read_bytes(), (out / "report.json").read_bytes()))
    same_csv, same_json, same_code = (runs[0][i] == runs[1][i] for i in (1, 2, 0))
    ok = same_csv and same_json and same_code
    verdict_line(5, ok, f"csv identical={same_csv}, json identical={same_json}, "
                        f"exit codes {runs[0][0]}/{runs[1][0]}")
    assert ok


# -- 6: well-definedness ------------------------------------------------------------

WD_DECLS = 'DATA D!a : seq(INT) SOURCE "D.csv" COLUMN "a"\n'

WD_RULES = {
    "APPLY_OUTSIDE_DOMAIN": "ANY i WHERE i : 1..5 EXPECTED D!a(i) > 0",
    "DIV_BY_ZERO": "ANY x WHERE x = 1 / (D!a(1) - D!a(1)) EXPECTED x = 0",
    "MOD_BY_ZERO": "ANY x WHERE x : ran(D!a) EXPECTED x mod (x - x) = 0",
    "MIN_OF_EMPTY": "ANY m WHERE m = min({v | v : ran(D!a) & v > 100}) EXPECTED m > 0",
    "MAX_OF_EMPTY": "ANY i WHERE i : dom(D!a) EXPECTED max(D!a[{i + 10}]) > 0",
    "UNBOUNDED_ANY": "ANY x WHERE x > 1 EXPECTED x > 0",
    "UNBOUNDED_FORALL": "ANY i WHERE i : dom(D!a) EXPECTED !(y).(y > D!a(i))",
    "SIZE_OF_NON_SEQUENCE": "ANY n WHERE n = size({1 |-> 5, 3 |-> 6}) EXPECTED n = 2",
    "APPLY_NON_FUNCTION": "ANY v WHERE v = {1 |-> 2, 1 |-> 3}(1) EXPECTED v = 2",
    "OVERFLOW": "ANY v WHERE v = 9223372036854775807 + D!a(1) EXPECTED v > 0",
}


def test_criterion_6_wd_discipline(tmp_path, verdict_line):
    text = "\n".join(f'RULE {rid} COUNTEREXAMPLE "bad %1" {body} END END' for rid, body in WD_RULES.items())
    cfg = write_project(tmp_path, csvs={"D.csv": "a\n1\n2\n3\n"}, decls=WD_DECLS, rules=text)
    report, code = run_project(load_project(cfg))
    verdicts = {r.rule_id: r.verdict for r in report.results}
    kinds = {r.rule_id: r.error.kind for r in report.results if r.error is not None}
    ok = (len(verdicts) == 10 and set(verdicts.values()) == {"ERROR"} and code == 2
          and all(not r.findings for r in report.results))
    verdict_line(6, ok, f"{sum(v == 'ERROR' for v in verdicts.values())}/10 ERROR, exit {code}; "
                        f"kinds: {sorted(set(kinds.values()))}")
    assert verdicts == {rid: "ERROR" for rid in WD_RULES}, verdicts
    assert code == 2


# -- 7: ingestion completeness ------------------------------------------------------------

INGEST_DECLS = '''DATA T!Id : seq(INT) SOURCE "T.csv" COLUMN "Id"
DATA T!Speed : seq(INT) SOURCE "T.csv" COLUMN "Speed"
DATA T!Lit : seq(BOOL) SOURCE "T.csv" COLUMN "Lit"
DATA T!Name : seq(STRING) SOURCE "T.csv" COLUMN "Name"
'''
INGEST_RULE = 'RULE ANY_SPEED COUNTEREXAMPLE "%1" ANY i WHERE i : dom(T!Speed) EXPECTED T!Speed(i) >= 0 END END'


def test_criterion_7_ingestion_completeness(tmp_path, verdict_line):
    n = 2000
    details, all_ok = [], True
    for k in (1, 5, 50):
        rng = random.Random(1000 + k)
        rows = [[str(i), str(rng.randint(0, 160)), rng.choice(["TRUE", "FALSE"]), f"N{i}"]
                for i in range(1, n + 1)]
        cells = sorted(rng.sample([(r, c) for r in range(1, n + 1) for c in (1, 2, 3)], k))
        bad = {1: ["x", "1.5", "", "12a"], 2: ["9" * 20, "ten", "--3"], 3: ["true", "1", "yes", ""]}
        for r, c in cells:
            rows[r - 1][c - 1] = rng.choice(bad[c])
        body = "".join(";".join(row) + "\n" for row in rows)
        cfg = write_project(tmp_path / f"k{k}", csvs={"T.csv": "Id;Speed;Lit;Name\n" + body},
                            decls=INGEST_DECLS, rules=INGEST_RULE)
        report, code = run_project(load_project(cfg))
        got = sorted(i.row for i in report.data_issues)
        want = sorted(r for r, _ in cells)
        ok = got == want and code == 2 and report.results == []
        all_ok &= ok
        details.append(f"k={k}: {len(report.data_issues)} issues, rows match={got == want}, exit {code}")
    verdict_line(7, all_ok, "; ".join(details))
    assert all_ok
