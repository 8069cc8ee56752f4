"""B types: INT, BOOL, STRING, pairs and finite sets. Sequences are sets of
``INT * T`` pairs, there is no separate sequence type."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True, slots=True)
class BType:
    kind: str                       # INT | BOOL | STRING | pair | set | any
    args: tuple["BType", ...] = ()

    def __str__(self) -> str:
        if self.kind == "pair":
            return f"({self.args[0]} * {self.args[1]})"
        if self.kind == "set":
            return f"POW({self.args[0]})"
        if self.kind == "any":
            return "?"
        return self.kind

    @property
    def is_set(self) -> bool:
        return self.kind == "set"

    @property
    def elem(self) -> "BType":
        return self.args[0]


INT = BType("INT")
BOOL = BType("BOOL")
STRING = BType("STRING")
# element type of a set that is always empty, e.g. ``card({})``
UNKNOWN = BType("any")


def pair_of(a: BType, b: BType) -> BType:
    return BType("pair", (a, b))


def set_of(t: BType) -> BType:
    return BType("set", (t,))


def seq_of(t: BType) -> BType:
    return set_of(pair_of(INT, t))


BASIC = {"INT": INT, "BOOL": BOOL, "STRING": STRING}
