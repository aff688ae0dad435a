"""Parser, planner and executor for the read-only Cypher subset."""

from .executor import execute, run_query
from .lexer import LexError
from .parser import ParseError, parse
from .planner import GraphSchema, Plan, SemanticError, plan
from .printer import to_text
from .result import ResultTable

__all__ = [
    "GraphSchema",
    "LexError",
    "ParseError",
    "Plan",
    "ResultTable",
    "SemanticError",
    "execute",
    "parse",
    "plan",
    "run_query",
    "to_text",
]
