"""Lexer, parser, printer and typechecker for the B notation subset."""

from .ast import Node, conjuncts, free_names
from .lexer import Token, tokenize
from .parser import Parser, parse_expr, parse_pred
from .printer import unparse
from .typecheck import typecheck, typecheck_block
from .types import BOOL, INT, STRING, BType, pair_of, seq_of, set_of

__all__ = [
    "Node", "Token", "Parser", "BType", "INT", "BOOL", "STRING",
    "tokenize", "parse_pred", "parse_expr", "unparse", "typecheck", "typecheck_block",
    "conjuncts", "free_names", "pair_of", "set_of", "seq_of",
]
