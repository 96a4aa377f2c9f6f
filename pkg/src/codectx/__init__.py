"""Statement-tree code representations enriched with static-analysis context."""

__version__ = "0.1.0"

from .tree import AstNode, load_ast_record, serialize_ast
from .minilang import parse_mini

__all__ = ["AstNode", "load_ast_record", "serialize_ast", "parse_mini", "__version__"]
