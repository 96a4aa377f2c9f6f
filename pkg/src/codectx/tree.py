"""Generic typed AST nodes and the line-delimited record format.

Every program in the pipeline, whether parsed from the built-in
mini-language or imported from an external parser, is held as a tree of
:class:`AstNode`. The node-kind set below is closed for the mini-language
and open for imported trees.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterator

from .errors import FormatError

# Mini-language node kinds. Simple statements carry no nested statements;
# compound statements own a body of further statements.
KIND_COMPILATION_UNIT = "CompilationUnit"
KIND_END_BLOCK = "END_BLOCK"

SIMPLE_STATEMENT_KINDS = frozenset(
    {"Decl", "Assign", "CallStmt", "Return", "FieldDecl", "MethodSig"}
)
COMPOUND_STATEMENT_KINDS = frozenset(
    {"FuncDef", "MethodDef", "CtorDef", "ClassDecl", "InterfaceDecl", "If", "While", "For"}
)
STATEMENT_KINDS = SIMPLE_STATEMENT_KINDS | COMPOUND_STATEMENT_KINDS

MINILANG_KINDS = tuple(
    sorted(
        STATEMENT_KINDS
        | {
            KIND_COMPILATION_UNIT,
            KIND_END_BLOCK,
            "Block",
            "ForInit",
            "ForUpdate",
            "Modifier",
            "TypeRef",
            "ParamList",
            "Param",
            "Extends",
            "Implements",
            "Call",
            "Member",
            "New",
            "BinaryOp",
            "UnaryOp",
            "Identifier",
            "Literal",
            "Operator",
            "This",
        }
    )
)


@dataclass
class AstNode:
    """One tree node: a kind label, an optional lexeme, ordered children.

    Line spans are parser-side metadata used to attach warnings to
    statements; they are excluded from equality and never serialized.
    """

    kind: str
    token: str | None = None
    children: list["AstNode"] = field(default_factory=list)
    line: int = field(default=0, compare=False, repr=False)
    line_end: int = field(default=0, compare=False, repr=False)


def preorder(node: AstNode) -> Iterator[AstNode]:
    stack = [node]
    while stack:
        n = stack.pop()
        yield n
        stack.extend(reversed(n.children))


def tokens(node: AstNode) -> list[str]:
    """Preorder sequence of all lexemes in the tree."""
    return [n.token for n in preorder(node) if n.token is not None]


def node_symbol(node: AstNode) -> str:
    """Vocabulary symbol of a node: its lexeme if present, else its kind."""
    return node.token if node.token is not None else node.kind


def count_nodes(node: AstNode) -> int:
    return sum(1 for _ in preorder(node))


def to_record(node: AstNode) -> dict:
    return {
        "kind": node.kind,
        "token": node.token,
        "children": [to_record(c) for c in node.children],
    }


def from_record(rec: object) -> AstNode:
    """Rebuild a tree from one record object, naming the first bad field."""
    if not isinstance(rec, dict):
        raise FormatError("node")
    kind = rec.get("kind")
    if not isinstance(kind, str) or not kind:
        raise FormatError("kind")
    token = rec.get("token")
    if token is not None and not isinstance(token, str):
        raise FormatError("token")
    children = rec.get("children", [])
    if not isinstance(children, list):
        raise FormatError("children")
    return AstNode(kind, token, [from_record(c) for c in children])


def serialize_ast(node: AstNode) -> str:
    """Canonical one-line JSON encoding of a tree."""
    return json.dumps(to_record(node), sort_keys=True, separators=(",", ":"))


def load_ast_record(data: str | bytes) -> AstNode:
    """Parse one canonical AST record; round-trips with :func:`serialize_ast`."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        rec = json.loads(data)
    except json.JSONDecodeError as e:
        raise FormatError(f"record: {e.msg}") from e
    return from_record(rec)
