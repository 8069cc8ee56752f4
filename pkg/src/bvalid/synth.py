"""Generate a synthetic benchmark project.

The project has three CSV files (``Track.csv``, ``Signals.csv`` and
``Zones.csv``) with 25 columns in total, one declaration file, and a rule
set mixing per-row checks, cross-column joins, per-sector aggregates and
quantified pair rules over small index windows. A handful of faults are
planted so the run produces real findings. Everything derives from a fixed
seed, so two generations with the same arguments are byte-identical.

Usage::

    python3 -m bvalid.synth OUTDIR [--rows 2000] [--rules 200] [--seed 1]
"""

from __future__ import annotations

import argparse
import csv
import random
from dataclasses import dataclass
from pathlib import Path

TRACK_COLS = ["TrackId", "Name", "Line", "BeginCm", "EndCm", "SpeedKmh", "Gradient",
              "Electrified", "NextTrack"]
SIGNAL_COLS = ["SignalId", "TrackId", "PosCm", "Kind", "Direction", "Aspects", "Lit", "ZoneId"]
ZONE_COLS = ["ZoneId", "Sector", "BeginCm", "EndCm", "MaxSpeed", "Kind", "Priority", "Active"]

COLUMN_TYPES = {
    "Track": {"TrackId": "INT", "Name": "STRING", "Line": "STRING", "BeginCm": "INT", "EndCm": "INT",
              "SpeedKmh": "INT", "Gradient": "INT", "Electrified": "BOOL", "NextTrack": "INT"},
    "Signals": {"SignalId": "INT", "TrackId": "INT", "PosCm": "INT", "Kind": "STRING",
                "Direction": "STRING", "Aspects": "INT", "Lit": "BOOL", "ZoneId": "INT"},
    "Zones": {"ZoneId": "INT", "Sector": "STRING", "BeginCm": "INT", "EndCm": "INT", "MaxSpeed": "INT",
              "Kind": "STRING", "Priority": "INT", "Active": "BOOL"},
}

TRACK_LEN = 10_000
LINES = ["L1", "L2", "L3", "L4"]
SIGNAL_KINDS = ["MAIN", "SHUNT", "DISTANT", "REPEATER"]
ZONE_KINDS = ["PLATFORM", "TUNNEL", "OPEN", "DEPOT"]


@dataclass(frozen=True)
class Fault:
    table: str
    row: int          # 1-based body row
    column: str
    value: str
    note: str


def _bool(b: bool) -> str:
    return "TRUE" if b else "FALSE"


def make_tables(rows: int, seed: int) -> tuple[dict[str, list[list[str]]], list[Fault]]:
    """Clean tables for ``rows`` rows, then apply the planted faults."""
    rng = random.Random(seed)
    n = rows
    track = []
    for i in range(1, n + 1):
        begin = (i - 1) * TRACK_LEN
        line = LINES[(i - 1) * len(LINES) // n]
        last_of_line = i == n or LINES[i * len(LINES) // n] != line
        track.append([str(i), f"T{i:04d}", line, str(begin), str(begin + TRACK_LEN - rng.randint(0, 500)),
                      str(rng.choice(range(30, 130, 10))), str(rng.randint(-35, 35)),
                      _bool(rng.random() < 0.9), "0" if last_of_line else str(i + 1)])
    zones = []
    for i in range(1, n + 1):
        begin = (i - 1) * TRACK_LEN
        zones.append([str(i), f"S{(i - 1) * 20 // n + 1:02d}", str(begin), str(begin + 9_000),
                      str(rng.choice(range(40, 110, 10))), rng.choice(ZONE_KINDS),
                      str(rng.randint(1, 5)), _bool(rng.random() < 0.8)])
    signals = []
    for i in range(1, n + 1):
        t = rng.randint(1, n)
        tb, te = int(track[t - 1][3]), int(track[t - 1][4])
        kind = rng.choice(SIGNAL_KINDS)
        aspects = rng.choice([3, 4]) if kind == "MAIN" else 2
        signals.append([str(1000 + i), str(t), str(rng.randint(tb, te)), kind, rng.choice(["UP", "DOWN"]),
                        str(aspects), _bool(rng.random() < 0.97), str(rng.randint(1, n))])

    faults = []

    def plant(table, rows_, cols, row, col, value, note):
        if row <= len(rows_):
            rows_[row - 1][cols.index(col)] = value
            faults.append(Fault(table, row, col, value, note))

    plant("Signals", signals, SIGNAL_COLS, 17, "TrackId", str(n + 500), "signal on unknown track")
    plant("Track", track, TRACK_COLS, 42, "SpeedKmh", "200", "speed above line maximum")
    if n >= 301:
        plant("Zones", zones, ZONE_COLS, 300, "EndCm", str(int(zones[300][2]) + 500), "overlaps next zone")
    plant("Signals", signals, SIGNAL_COLS, 99, "PosCm", "-5", "signal before track start")
    plant("Track", track, TRACK_COLS, min(1234, n), "EndCm", "0", "track ends before it begins")
    plant("Signals", signals, SIGNAL_COLS, min(555, n), "Aspects", "7", "too many aspects")
    plant("Zones", zones, ZONE_COLS, min(777, n), "Kind", "CAVE", "unknown zone kind")
    return {"Track": track, "Signals": signals, "Zones": zones}, faults


# -- rules ---------------------------------------------------------------------

def _rule(rid: str, msg: str, any_: str, where: str, expected: str) -> str:
    return (f'RULE {rid}\n  COUNTEREXAMPLE "{msg}"\n  ANY {any_} WHERE\n    {where}\n'
            f"  EXPECTED {expected}\n  END\nEND\n")


_INT_BOUNDS = {
    ("Track", "SpeedKmh"): (10, 160), ("Track", "Gradient"): (-40, 40),
    ("Track", "BeginCm"): (0, 10 ** 9), ("Track", "NextTrack"): (0, 10 ** 6),
    ("Signals", "Aspects"): (2, 4), ("Signals", "PosCm"): (0, 10 ** 9),
    ("Zones", "MaxSpeed"): (20, 120), ("Zones", "Priority"): (1, 5), ("Zones", "BeginCm"): (0, 10 ** 9),
}
_STR_SETS = {
    ("Track", "Line"): LINES, ("Signals", "Kind"): SIGNAL_KINDS, ("Signals", "Direction"): ["UP", "DOWN"],
    ("Zones", "Kind"): ZONE_KINDS, ("Zones", "Sector"): [f"S{k:02d}" for k in range(1, 21)],
}


def _str_set(xs) -> str:
    return "{" + ", ".join(f'"{x}"' for x in xs) + "}"


def _row_checks() -> list[str]:
    out = []
    for (t, c), (lo, hi) in _INT_BOUNDS.items():
        for k, (a, b) in enumerate([(lo, hi), (lo - 1, hi + 1), (lo, 2 * hi + 1)]):
            out.append(_rule(f"ROW_{t}_{c}_RANGE_{k}".upper(), f"{t} row %1: {c} = %2 outside [{a}, {b}]",
                             "i, v", f"i : dom({t}!{c}) & v = {t}!{c}(i)", f"v >= {a} & v <= {b}"))
    for (t, c), xs in _STR_SETS.items():
        for k in range(2):
            allowed = _str_set(xs)
            out.append(_rule(f"ROW_{t}_{c}_ENUM_{k}".upper(), f"{t} row %1: unexpected {c} %2",
                             "i, v", f"i : dom({t}!{c}) & v = {t}!{c}(i)",
                             f"v : {allowed}" if k == 0 else f"not(v /: {allowed})"))
    for t in ("Track", "Zones"):
        out.append(_rule(f"ROW_{t}_ORDERED".upper(), f"{t} row %1 ends at %3 before it begins at %2",
                         "i, b, e", f"i : dom({t}!BeginCm) & b = {t}!BeginCm(i) & e = {t}!EndCm(i)",
                         "b < e"))
        out.append(_rule(f"ROW_{t}_LENGTH".upper(), f"{t} row %1 has length %2",
                         "i, len", f"i : dom({t}!BeginCm) & len = {t}!EndCm(i) - {t}!BeginCm(i)",
                         f"len > 0 & len <= {TRACK_LEN}"))
    out.append(_rule("ROW_SIGNAL_ASPECTS_KIND", "signal %1 of kind %2 shows %3 aspects",
                     "i, k, a", "i : dom(Signals!Kind) & k = Signals!Kind(i) & a = Signals!Aspects(i)",
                     '(k = "MAIN" => a >= 3) & (k /= "MAIN" => a = 2)'))
    for col in ("TrackId", "Name"):
        out.append(_rule(f"ROW_TRACK_{col}_NONEMPTY".upper(), f"track row %1 has an empty {col}",
                         "i", f"i : dom(Track!{col})",
                         f"Track!{col}(i) /= " + ('""' if col == "Name" else "0")))
    return out


def _joins() -> list[str]:
    out = []
    for t, c in (("Track", "TrackId"), ("Signals", "SignalId"), ("Zones", "ZoneId"), ("Track", "Name")):
        out.append(_rule(f"JOIN_{t}_{c}_UNIQUE".upper(), f"{c} %2 appears %3 times in {t}", "i, v, nb",
                         f"i : dom({t}!{c}) & v = {t}!{c}(i) & nb = card({t}!{c}~[{{v}}])", "nb = 1"))
    out.append(_rule("JOIN_SIGNAL_TRACK_EXISTS", "signal %1 refers to unknown track %2", "s, t",
                     "s : dom(Signals!TrackId) & t = Signals!TrackId(s)", "t : ran(Track!TrackId)"))
    out.append(_rule("JOIN_SIGNAL_ZONE_EXISTS", "signal %1 refers to unknown zone %2", "s, z",
                     "s : dom(Signals!ZoneId) & z = Signals!ZoneId(s)", "z : ran(Zones!ZoneId)"))
    out.append(_rule("JOIN_NEXT_TRACK_EXISTS", "track %1 continues on unknown track %2", "i, n",
                     "i : dom(Track!NextTrack) & n = Track!NextTrack(i) & n /= 0", "n : ran(Track!TrackId)"))
    out.append(_rule("JOIN_SIGNAL_ON_TRACK", "signal %1 at %2 lies outside track row %3", "s, p, k",
                     "s : dom(Signals!PosCm) & p = Signals!PosCm(s) & k : Track!TrackId~[{Signals!TrackId(s)}]",
                     "Track!BeginCm(k) <= p & p <= Track!EndCm(k)"))
    out.append(_rule("JOIN_NEXT_TRACK_SAME_LINE", "track %1 continues on track %2 of another line", "i, n, k",
                     "i : dom(Track!NextTrack) & n = Track!NextTrack(i) & k : Track!TrackId~[{n}]",
                     "Track!Line(k) = Track!Line(i)"))
    out.append(_rule("JOIN_NEXT_TRACK_CONTIGUOUS", "track %1 ends at %3, next track starts at %4",
                     "i, k, e, b",
                     "i : dom(Track!NextTrack) & k : Track!TrackId~[{Track!NextTrack(i)}] & "
                     "e = Track!EndCm(i) & b = Track!BeginCm(k)", "b >= e"))
    out.append(_rule("JOIN_SIGNAL_SPEED_ZONE", "signal %1 on a %4 km/h track sits in a %5 km/h zone",
                     "s, t, z, v, w",
                     "s : dom(Signals!TrackId) & t : Track!TrackId~[{Signals!TrackId(s)}] & "
                     "z : Zones!ZoneId~[{Signals!ZoneId(s)}] & "
                     "v = Track!SpeedKmh(t) & w = Zones!MaxSpeed(z)", "v <= w + 100"))
    out.append(_rule("JOIN_TRACK_SIGNALS_IN_RANGE", "track %1 carries a signal outside its extent", "t",
                     "t : dom(Track!TrackId)",
                     "!(k).(k : Signals!TrackId~[{Track!TrackId(t)}] => "
                     "Signals!PosCm(k) >= Track!BeginCm(t) & Signals!PosCm(k) <= Track!EndCm(t))"))
    out.append(_rule("JOIN_UNLIT_MAIN", "main signal %1 is not lit", "s",
                     's : Signals!Kind~[{"MAIN"}]', "Signals!Lit(s) = TRUE"))
    out.append(_rule("JOIN_ELECTRIFIED_LINE", "line %1 has %2 non-electrified tracks", "l, nb",
                     "l : ran(Track!Line) & nb = card(Track!Line~[{l}] /\\ Track!Electrified~[{FALSE}])",
                     "nb <= 200"))
    return out


def _aggregates() -> list[str]:
    out = []
    for k in (1, 50, 100):
        out.append(_rule(f"AGG_SECTOR_ZONES_{k}", f"sector %1 has %2 zones, expected at least {k}", "s, nb",
                         "s : ran(Zones!Sector) & nb = card(Zones!Sector~[{s}])", f"nb >= {k}"))
    out.append(_rule("AGG_SECTOR_ACTIVE_ZONE", "sector %1 has no active zone", "s",
                     "s : ran(Zones!Sector)",
                     "#(z).(z : Zones!Sector~[{s}] & Zones!Active(z) = TRUE)"))
    for kind in SIGNAL_KINDS:
        out.append(_rule(f"AGG_SIGNAL_KIND_{kind}", f"only %1 {kind} signals", "nb",
                         f'nb = card(Signals!Kind~[{{"{kind}"}}])', "nb >= 10"))
    out.append(_rule("AGG_LINE_SPEED", "line %1 has top speed %2", "l, top",
                     "l : ran(Track!Line) & top = max(Track!SpeedKmh[Track!Line~[{l}]])", "top <= 160"))
    out.append(_rule("AGG_ZONES_PER_TRACK", "track %1 hosts %2 signals", "t, nb",
                     "t : ran(Track!TrackId) & nb = card(Signals!TrackId~[{t}])", "nb <= 12"))
    return out


def _pairs(rows: int, count: int) -> list[str]:
    out = []
    for w in range(count):
        width = (20, 30, 40)[w % 3]
        lo = (w * 97) % max(1, rows - width) + 1
        hi = min(rows, lo + width - 1)
        where = f"a : {lo} .. {hi} & b : {lo} .. {hi}"
        kind = w % 3
        if kind == 0:
            out.append(_rule(f"PAIR_ZONES_DISJOINT_{w:03d}", "zones %1 and %2 overlap", "a, b",
                             f"{where} & a /= b",
                             "Zones!EndCm(a) <= Zones!BeginCm(b) or Zones!EndCm(b) <= Zones!BeginCm(a)"))
        elif kind == 1:
            out.append(_rule(f"PAIR_TRACKS_ORDERED_{w:03d}", "tracks %1 and %2 are out of order", "a, b",
                             f"{where} & a < b", "Track!BeginCm(a) < Track!BeginCm(b)"))
        else:
            out.append(_rule(f"PAIR_SIGNALS_APART_{w:03d}", "signals %1 and %2 share a position", "a, b",
                             f"{where} & a < b & Signals!TrackId(a) = Signals!TrackId(b)",
                             "Signals!PosCm(a) /= Signals!PosCm(b)"))
    return out


DEFINITIONS = """// shared constructs
DEFINITION zone_span == %z.(z : dom(Zones!ZoneId) | Zones!BeginCm(z) |-> Zones!EndCm(z))
DEFINITION main_signals == Signals!Kind~[{"MAIN"}]
"""

_DEF_RULES = [
    _rule("DEF_ZONE_SPAN_POSITIVE", "zone %1 spans %2", "z, s",
          "z : dom(zone_span) & s = zone_span(z)", "prj1(s) < prj2(s)"),
    _rule("DEF_MAIN_SIGNALS_ASPECTS", "main signal %1 shows %2 aspects", "s, a",
          "s : main_signals & a = Signals!Aspects(s)", "a : {3, 4}"),
]


def make_rules(rows: int, n_rules: int) -> dict[str, list[str]]:
    """Rule texts grouped by file name. The families are interleaved so any
    prefix of the list is still a mix."""
    families = {"rows.rules": _row_checks(), "joins.rules": _joins() + _DEF_RULES,
                "aggregates.rules": _aggregates()}
    fixed = sum(len(v) for v in families.values())
    families["pairs.rules"] = _pairs(rows, max(0, n_rules - fixed))
    order = []
    iters = {k: iter(v) for k, v in families.items()}
    while iters and len(order) < n_rules:
        for name in list(iters):
            r = next(iters[name], None)
            if r is None:
                del iters[name]
            elif len(order) < n_rules:
                order.append((name, r))
    out: dict[str, list[str]] = {name: [] for name in families}
    for name, r in order:
        out[name].append(r)
    return out


def write_project(root, rows: int = 2000, rules: int = 200, seed: int = 1, jobs: int = 1,
                  formats: str = "text, csv, json") -> Path:
    """Write the project under ``root`` and return the config path."""
    root = Path(root)
    (root / "data").mkdir(parents=True, exist_ok=True)
    (root / "rules").mkdir(exist_ok=True)
    tables, faults = make_tables(rows, seed)
    headers = {"Track": TRACK_COLS, "Signals": SIGNAL_COLS, "Zones": ZONE_COLS}
    for name, body in tables.items():
        with open(root / "data" / f"{name}.csv", "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, delimiter=";", lineterminator="\n")
            w.writerow(headers[name])
            w.writerows(body)
    decl = [f'DATA {t}!{c} : seq({ty}) SOURCE "{t}.csv" COLUMN "{c}"'
            for t, cols in COLUMN_TYPES.items() for c, ty in cols.items()]
    (root / "project.decl").write_text("\n".join(decl) + "\n", encoding="utf-8")
    (root / "rules" / "shared.rules").write_text(DEFINITIONS, encoding="utf-8")
    files = ["rules/shared.rules"]
    for name, texts in make_rules(rows, rules).items():
        (root / "rules" / name).write_text("\n".join(texts), encoding="utf-8")
        files.append(f"rules/{name}")
    (root / "faults.txt").write_text(
        "".join(f"{f.table};{f.row};{f.column};{f.value};{f.note}\n" for f in faults), encoding="utf-8")
    cfg = root / "project.ini"
    cfg.write_text("data_dir = data\ndeclarations = project.decl\nrules =\n"
                   + "".join(f"    {f}\n" for f in files)
                   + f"output = out\nformats = {formats}\njobs = {jobs}\n", encoding="utf-8")
    return cfg


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="python3 -m bvalid.synth", description=__doc__.split("\n\n")[0])
    ap.add_argument("outdir")
    ap.add_argument("--rows", type=int, default=2000)
    ap.add_argument("--rules", type=int, default=200)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args(argv)
    print(write_project(args.outdir, args.rows, args.rules, args.seed))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
