"""Runtime values and the set/relation algebra.

Values are plain Python objects: ``int`` for INT, ``bool`` for BOOL, ``str``
for STRING, 2-tuples for pairs and :class:`BSet` for finite sets. Relations,
functions and sequences are sets of pairs. Python's own ordering on these
objects is the canonical order (``str`` compares by code point, which is the
same as comparing UTF-8 bytes).
"""

from __future__ import annotations

import enum
from typing import Iterable

from .errors import EvalError
from .lang.printer import quote

DEFAULT_MAX_SET_SIZE = 1_000_000

INT_MIN = -(2 ** 63)
INT_MAX = 2 ** 63 - 1

_MULTI = object()
_MISSING = object()


class BSet:
    """Immutable finite set stored as a strictly increasing tuple.

    Lookup structures (membership, function index) are built lazily and kept.
    """

    __slots__ = ("elems", "_members", "_fn", "_rel", "_seq", "_hash")

    def __init__(self, elems: tuple = ()) -> None:
        self.elems = elems
        self._members = None
        self._fn = None
        self._rel = None
        self._seq = None
        self._hash = None

    def __len__(self) -> int:
        return len(self.elems)

    def __iter__(self):
        return iter(self.elems)

    def __contains__(self, x) -> bool:
        return x in self.members

    @property
    def members(self) -> frozenset:
        m = self._members
        if m is None:
            m = self._members = frozenset(self.elems)
        return m

    def fn_index(self) -> dict:
        """first component -> second component, or a marker when not unique."""
        d = self._fn
        if d is None:
            d = {}
            for a, b in self.elems:
                d[a] = _MULTI if a in d else b
            self._fn = d
        return d

    def rel_index(self) -> dict:
        d = self._rel
        if d is None:
            d = {}
            for a, b in self.elems:
                d.setdefault(a, []).append(b)
            self._rel = d
        return d

    def is_sequence(self) -> bool:
        s = self._seq
        if s is None:
            s = self._seq = all(
                isinstance(p, tuple) and p[0] == i and not isinstance(p[0], bool)
                for i, p in enumerate(self.elems, 1))
        return s

    def __eq__(self, other) -> bool:
        return isinstance(other, BSet) and self.elems == other.elems

    def __ne__(self, other) -> bool:
        return not self.__eq__(other)

    def __lt__(self, other: "BSet") -> bool:
        return self.elems < other.elems

    def __le__(self, other: "BSet") -> bool:
        return self.elems <= other.elems

    def __gt__(self, other: "BSet") -> bool:
        return self.elems > other.elems

    def __ge__(self, other: "BSet") -> bool:
        return self.elems >= other.elems

    def __hash__(self) -> int:
        h = self._hash
        if h is None:
            h = self._hash = hash(self.elems)
        return h

    def __repr__(self) -> str:
        return render(self, quoted=True)

    def __reduce__(self):
        return (BSet, (self.elems,))


EMPTY = BSet(())


class Ordering(enum.Enum):
    LESS = -1
    EQUAL = 0
    GREATER = 1


def canonical_compare(a, b) -> Ordering:
    if a == b:
        return Ordering.EQUAL
    return Ordering.LESS if a < b else Ordering.GREATER


def mk_set(elems: Iterable) -> BSet:
    return BSet(tuple(sorted(set(elems))))


def check_canonical(v) -> None:
    """Debug validator: raise AssertionError unless every set inside ``v`` is canonical."""
    if isinstance(v, tuple):
        assert len(v) == 2, v
        check_canonical(v[0])
        check_canonical(v[1])
    elif isinstance(v, BSet):
        assert isinstance(v.elems, tuple)
        for x, y in zip(v.elems, v.elems[1:]):
            assert x < y, f"set not strictly increasing: {v.elems!r}"
        kinds = {_shape(e) for e in v.elems}
        assert len(kinds) <= 1, f"mixed element kinds {kinds}"
        for e in v.elems:
            check_canonical(e)
    else:
        assert isinstance(v, (bool, int, str)), type(v)


def _shape(v):
    if isinstance(v, bool):
        return "BOOL"
    if isinstance(v, int):
        return "INT"
    if isinstance(v, str):
        return "STRING"
    if isinstance(v, tuple):
        return ("pair", _shape(v[0]), _shape(v[1]))
    return "set"


def render(v, quoted: bool = False) -> str:
    """Text form of a value. Strings are bare unless ``quoted``."""
    if isinstance(v, bool):
        return "TRUE" if v else "FALSE"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, str):
        return quote(v) if quoted else v
    if isinstance(v, tuple):
        return f"({render(v[0], quoted)}|->{render(v[1], quoted)})"
    return "{" + ",".join(render(e, quoted) for e in v.elems) + "}"


# -- algebra ---------------------------------------------------------------

def _too_big(what: str, n: int, limit: int):
    return EvalError("resource-limit", f"{what} would have {n} elements (limit {limit})")


def apply_fn(f: BSet, x):
    b = f.fn_index().get(x, _MISSING)
    if b is _MISSING:
        raise EvalError("wd-apply-outside-domain",
                        f"function applied outside its domain at argument {render(x, True)}")
    if b is _MULTI:
        raise EvalError("wd-not-functional",
                        f"relation is not functional at argument {render(x, True)}")
    return b


def _dom(r: BSet) -> BSet:
    out = []
    last = _MISSING
    for a, _ in r.elems:
        if last is _MISSING or a != last:
            out.append(a)
            last = a
    return BSet(tuple(out))


def _require_seq(s: BSet, op: str) -> None:
    if not s.is_sequence():
        raise EvalError("wd-not-a-sequence", f"{op} applied to a relation that is not a sequence")


def interval(lo: int, hi: int, limit: int = DEFAULT_MAX_SET_SIZE) -> BSet:
    if hi < lo:
        return EMPTY
    n = hi - lo + 1
    if n > limit:
        raise _too_big(f"interval {lo}..{hi}", n, limit)
    return BSet(tuple(range(lo, hi + 1)))


def cartesian(a: BSet, b: BSet, limit: int = DEFAULT_MAX_SET_SIZE) -> BSet:
    n = len(a) * len(b)
    if n > limit:
        raise _too_big("cartesian product", n, limit)
    be = b.elems
    return BSet(tuple((x, y) for x in a.elems for y in be))


def union(a: BSet, b: BSet) -> BSet:
    if not a.elems:
        return b
    if not b.elems:
        return a
    return BSet(tuple(sorted(a.members | b.members)))


def inter(a: BSet, b: BSet) -> BSet:
    m = b.members
    return BSet(tuple(e for e in a.elems if e in m))


def diff(a: BSet, b: BSet) -> BSet:
    if not b.elems:
        return a
    m = b.members
    return BSet(tuple(e for e in a.elems if e not in m))


def image(r: BSet, s: BSet) -> BSet:
    if len(s) < len(r):
        idx = r.rel_index()
        return mk_set(y for x in s.elems for y in idx.get(x, ()))
    m = s.members
    return mk_set(y for x, y in r.elems if x in m)


def compose(r1: BSet, r2: BSet) -> BSet:
    idx = r2.rel_index()
    return mk_set((a, c) for a, b in r1.elems for c in idx.get(b, ()))


def override(r1: BSet, r2: BSet) -> BSet:
    if not r2.elems:
        return r1
    d2 = r2.fn_index()
    return mk_set([p for p in r1.elems if p[0] not in d2] + list(r2.elems))


def _min(s: BSet):
    if not s.elems:
        raise EvalError("wd-empty-min-max", "min of the empty set")
    return s.elems[0]


def _max(s: BSet):
    if not s.elems:
        raise EvalError("wd-empty-min-max", "max of the empty set")
    return s.elems[-1]


def size(s: BSet) -> int:
    _require_seq(s, "size")
    return len(s.elems)


def first(s: BSet):
    _require_seq(s, "first")
    if not s.elems:
        raise EvalError("wd-empty-min-max", "first of the empty sequence")
    return s.elems[0][1]


def last(s: BSet):
    _require_seq(s, "last")
    if not s.elems:
        raise EvalError("wd-empty-min-max", "last of the empty sequence")
    return s.elems[-1][1]


REL_OPS = {
    "union": union,
    "inter": inter,
    "set-minus": diff,
    "cartesian": cartesian,
    "dom": _dom,
    "ran": lambda r: mk_set(b for _, b in r.elems),
    "inverse": lambda r: mk_set((b, a) for a, b in r.elems),
    "image": image,
    "compose": compose,
    "override": override,
    "dom-restrict": lambda s, r: BSet(tuple(p for p in r.elems if p[0] in s.members)),
    "dom-subtract": lambda s, r: BSet(tuple(p for p in r.elems if p[0] not in s.members)),
    "ran-restrict": lambda r, t: BSet(tuple(p for p in r.elems if p[1] in t.members)),
    "ran-subtract": lambda r, t: BSet(tuple(p for p in r.elems if p[1] not in t.members)),
    "card": len,
    "min": _min,
    "max": _max,
    "size": size,
    "first": first,
    "last": last,
    "interval": interval,
}


def rel_op(tag: str, args: list, limit: int = DEFAULT_MAX_SET_SIZE):
    """Apply the named set/relation operator. Outputs are canonical."""
    fn = REL_OPS[tag]
    if tag in ("cartesian", "interval"):
        return fn(*args, limit=limit)
    return fn(*args)
