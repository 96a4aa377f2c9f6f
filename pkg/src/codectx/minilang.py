"""Lexer and recursive-descent parser for the built-in mini-language.

A small Java-flavored language: functions, class/interface declarations
with modifiers, field/variable declarations, assignment, if/else, while,
for, return, calls, and binary operators. It exists to generate realistic
statement trees at desk scale; real corpora enter through the AST record
format instead.

Grammar sketch::

    unit      := (classdecl | interfacedecl | funcdef | decl)*
    classdecl := modifier* "class" IDENT ("extends" IDENT)?
                 ("implements" IDENT ("," IDENT)*)? "{" member* "}"
    interfacedecl := "interface" IDENT "{" (type IDENT "(" params? ")" ";")* "}"
    member    := modifier* (ctor | method | field)
    funcdef   := type IDENT "(" params? ")" block
    stmt      := block | if | while | for | return | decl | assign ";" | call ";"
    for       := "for" "(" simple? ";" expr? ";" simple? ")" stmt

Lexemes land on leaf nodes (Identifier, Literal, Operator, TypeRef,
Modifier, This) in source order, so the preorder lexeme stream of a parse
equals the token stream of the input minus comments, whitespace, and
structural punctuation/keywords.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import MiniSyntaxError
from .tree import KIND_COMPILATION_UNIT, AstNode

KEYWORDS = frozenset(
    {
        "class", "interface", "extends", "implements", "if", "else", "while",
        "for", "return", "new", "this",
        "public", "private", "static", "abstract", "override",
    }
)
MODIFIERS = frozenset({"public", "private", "static", "abstract", "override"})

_TWO_CHAR_OPS = ("==", "!=", "<=", ">=", "&&", "||")
_ONE_CHAR_OPS = "+-*/%<>!"
_PUNCT = "(){};,.="

# Lexemes that become leaf tokens of the parse tree, in source order.
_LEAF_KEYWORDS = MODIFIERS | {"this"}


@dataclass
class Token:
    type: str  # IDENT, NUMBER, STRING, KEYWORD, OP, PUNCT, EOF
    value: str
    line: int
    col: int


def lex(source: str) -> list[Token]:
    """Tokenize, dropping comments and whitespace."""
    toks: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(source)
    while i < n:
        c = source[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if source.startswith("//", i):
            while i < n and source[i] != "\n":
                i += 1
            continue
        if source.startswith("/*", i):
            end = source.find("*/", i + 2)
            if end < 0:
                raise MiniSyntaxError("unterminated comment", line, col)
            skipped = source[i : end + 2]
            nl = skipped.count("\n")
            if nl:
                line += nl
                col = len(skipped) - skipped.rfind("\n")
            else:
                col += len(skipped)
            i = end + 2
            continue
        start_line, start_col = line, col
        if c.isalpha() or c == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            word = source[i:j]
            toks.append(Token("KEYWORD" if word in KEYWORDS else "IDENT", word, start_line, start_col))
            col += j - i
            i = j
            continue
        if c.isdigit():
            j = i
            while j < n and (source[j].isdigit() or source[j] == "."):
                j += 1
            toks.append(Token("NUMBER", source[i:j], start_line, start_col))
            col += j - i
            i = j
            continue
        if c == '"':
            j = i + 1
            while j < n and source[j] != '"':
                if source[j] == "\n":
                    raise MiniSyntaxError("unterminated string", start_line, start_col)
                j += 1
            if j >= n:
                raise MiniSyntaxError("unterminated string", start_line, start_col)
            toks.append(Token("STRING", source[i : j + 1], start_line, start_col))
            col += j + 1 - i
            i = j + 1
            continue
        two = source[i : i + 2]
        if two in _TWO_CHAR_OPS:
            toks.append(Token("OP", two, start_line, start_col))
            i += 2
            col += 2
            continue
        if c == "=":
            toks.append(Token("PUNCT", "=", start_line, start_col))
            i += 1
            col += 1
            continue
        if c in _ONE_CHAR_OPS:
            toks.append(Token("OP", c, start_line, start_col))
            i += 1
            col += 1
            continue
        if c in _PUNCT:
            toks.append(Token("PUNCT", c, start_line, start_col))
            i += 1
            col += 1
            continue
        raise MiniSyntaxError(f"unexpected character {c!r}", line, col)
    toks.append(Token("EOF", "", line, col))
    return toks


def significant_lexemes(source: str) -> list[str]:
    """Input token values that must reappear, in order, as tree lexemes."""
    out = []
    for t in lex(source):
        if t.type in ("IDENT", "NUMBER", "STRING", "OP"):
            out.append(t.value)
        elif t.type == "KEYWORD" and t.value in _LEAF_KEYWORDS:
            out.append(t.value)
    return out


class _Parser:
    def __init__(self, toks: list[Token]):
        self.toks = toks
        self.pos = 0

    @property
    def cur(self) -> Token:
        return self.toks[self.pos]

    def peek(self, ahead: int = 1) -> Token:
        return self.toks[min(self.pos + ahead, len(self.toks) - 1)]

    def error(self, msg: str) -> MiniSyntaxError:
        t = self.cur
        what = "end-of-input" if t.type == "EOF" else repr(t.value)
        return MiniSyntaxError(f"{msg}, got {what}", t.line, t.col)

    def advance(self) -> Token:
        t = self.cur
        if t.type != "EOF":
            self.pos += 1
        return t

    def accept(self, value: str) -> bool:
        if self.cur.type in ("PUNCT", "KEYWORD", "OP") and self.cur.value == value:
            self.advance()
            return True
        return False

    def expect(self, value: str) -> Token:
        if self.cur.value == value and self.cur.type != "EOF":
            return self.advance()
        raise self.error(f"expected {value!r}")

    def expect_ident(self, what: str = "identifier") -> Token:
        if self.cur.type != "IDENT":
            raise self.error(f"expected {what}")
        return self.advance()

    def at_keyword(self, word: str) -> bool:
        return self.cur.type == "KEYWORD" and self.cur.value == word

    def _end_line(self) -> int:
        return self.toks[max(self.pos - 1, 0)].line

    # --- declarations -------------------------------------------------

    def parse_unit(self) -> AstNode:
        root = AstNode(KIND_COMPILATION_UNIT)
        while self.cur.type != "EOF":
            root.children.append(self.parse_topdecl())
        return root

    def parse_topdecl(self) -> AstNode:
        if self.at_keyword("interface"):
            return self.parse_interface()
        if self.at_keyword("class") or (self.cur.type == "KEYWORD" and self.cur.value in MODIFIERS):
            return self.parse_class()
        # type IDENT then "(" means function, otherwise variable declaration
        if self.cur.type == "IDENT" and self.peek().type == "IDENT":
            if self.peek(2).value == "(":
                return self.parse_funcdef()
            return self.parse_decl()
        raise self.error("expected declaration")

    def parse_modifiers(self) -> list[AstNode]:
        mods = []
        while self.cur.type == "KEYWORD" and self.cur.value in MODIFIERS:
            t = self.advance()
            mods.append(AstNode("Modifier", t.value, line=t.line, line_end=t.line))
        return mods

    def parse_typeref(self) -> AstNode:
        t = self.expect_ident("type name")
        return AstNode("TypeRef", t.value, line=t.line, line_end=t.line)

    def parse_class(self) -> AstNode:
        start = self.cur.line
        mods = self.parse_modifiers()
        if not self.at_keyword("class"):
            raise self.error("expected 'class'")
        self.advance()
        name = self.expect_ident("class name")
        children = mods + [AstNode("Identifier", name.value, line=name.line, line_end=name.line)]
        if self.accept("extends"):
            children.append(AstNode("Extends", children=[self.parse_typeref()]))
        if self.accept("implements"):
            impls = [self.parse_typeref()]
            while self.accept(","):
                impls.append(self.parse_typeref())
            children.append(AstNode("Implements", children=impls))
        self.expect("{")
        while not self.accept("}"):
            if self.cur.type == "EOF":
                raise self.error("expected class member or '}'")
            children.append(self.parse_member(name.value))
        return AstNode("ClassDecl", children=children, line=start, line_end=self._end_line())

    def parse_member(self, class_name: str) -> AstNode:
        start = self.cur.line
        mods = self.parse_modifiers()
        if (
            self.cur.type == "IDENT"
            and self.cur.value == class_name
            and self.peek().value == "("
        ):
            name = self.advance()
            params = self.parse_paramlist()
            body = self.parse_block()
            kids = mods + [
                AstNode("Identifier", name.value, line=name.line, line_end=name.line),
                params,
                body,
            ]
            return AstNode("CtorDef", children=kids, line=start, line_end=self._end_line())
        typ = self.parse_typeref()
        name = self.expect_ident("member name")
        ident = AstNode("Identifier", name.value, line=name.line, line_end=name.line)
        if self.cur.value == "(":
            params = self.parse_paramlist()
            body = self.parse_block()
            kids = mods + [typ, ident, params, body]
            return AstNode("MethodDef", children=kids, line=start, line_end=self._end_line())
        kids = mods + [typ, ident]
        if self.accept("="):
            kids.append(self.parse_expr())
        self.expect(";")
        return AstNode("FieldDecl", children=kids, line=start, line_end=self._end_line())

    def parse_interface(self) -> AstNode:
        start = self.cur.line
        self.advance()
        name = self.expect_ident("interface name")
        children = [AstNode("Identifier", name.value, line=name.line, line_end=name.line)]
        self.expect("{")
        while not self.accept("}"):
            if self.cur.type == "EOF":
                raise self.error("expected method signature or '}'")
            sig_start = self.cur.line
            typ = self.parse_typeref()
            mname = self.expect_ident("method name")
            params = self.parse_paramlist()
            self.expect(";")
            children.append(
                AstNode(
                    "MethodSig",
                    children=[typ, AstNode("Identifier", mname.value, line=mname.line, line_end=mname.line), params],
                    line=sig_start,
                    line_end=self._end_line(),
                )
            )
        return AstNode("InterfaceDecl", children=children, line=start, line_end=self._end_line())

    def parse_funcdef(self) -> AstNode:
        start = self.cur.line
        typ = self.parse_typeref()
        name = self.expect_ident("function name")
        params = self.parse_paramlist()
        body = self.parse_block()
        kids = [typ, AstNode("Identifier", name.value, line=name.line, line_end=name.line), params, body]
        return AstNode("FuncDef", children=kids, line=start, line_end=self._end_line())

    def parse_paramlist(self) -> AstNode:
        self.expect("(")
        params = []
        if self.cur.value != ")":
            while True:
                typ = self.parse_typeref()
                name = self.expect_ident("parameter name")
                params.append(
                    AstNode(
                        "Param",
                        children=[typ, AstNode("Identifier", name.value, line=name.line, line_end=name.line)],
                    )
                )
                if not self.accept(","):
                    break
        self.expect(")")
        return AstNode("ParamList", children=params)

    # --- statements ---------------------------------------------------

    def parse_block(self) -> AstNode:
        start = self.cur.line
        self.expect("{")
        stmts = []
        while not self.accept("}"):
            if self.cur.type == "EOF":
                raise self.error("expected statement or '}'")
            stmts.append(self.parse_stmt())
        return AstNode("Block", children=stmts, line=start, line_end=self._end_line())

    def _as_block(self, stmt: AstNode) -> AstNode:
        if stmt.kind == "Block":
            return stmt
        return AstNode("Block", children=[stmt], line=stmt.line, line_end=stmt.line_end)

    def parse_stmt(self) -> AstNode:
        start = self.cur.line
        if self.cur.value == "{" and self.cur.type == "PUNCT":
            return self.parse_block()
        if self.at_keyword("if"):
            self.advance()
            self.expect("(")
            cond = self.parse_expr()
            self.expect(")")
            then = self._as_block(self.parse_stmt())
            kids = [cond, then]
            if self.accept("else"):
                kids.append(self._as_block(self.parse_stmt()))
            return AstNode("If", children=kids, line=start, line_end=self._end_line())
        if self.at_keyword("while"):
            self.advance()
            self.expect("(")
            cond = self.parse_expr()
            self.expect(")")
            body = self._as_block(self.parse_stmt())
            return AstNode("While", children=[cond, body], line=start, line_end=self._end_line())
        if self.at_keyword("for"):
            self.advance()
            self.expect("(")
            kids = []
            if self.cur.value != ";":
                kids.append(self.parse_simple("ForInit"))
            self.expect(";")
            if self.cur.value != ";":
                kids.append(self.parse_expr())
            self.expect(";")
            if self.cur.value != ")":
                kids.append(self.parse_simple("ForUpdate"))
            self.expect(")")
            kids.append(self._as_block(self.parse_stmt()))
            return AstNode("For", children=kids, line=start, line_end=self._end_line())
        if self.at_keyword("return"):
            self.advance()
            kids = []
            if self.cur.value != ";":
                kids.append(self.parse_expr())
            self.expect(";")
            return AstNode("Return", children=kids, line=start, line_end=self._end_line())
        if self.cur.type == "IDENT" and self.peek().type == "IDENT":
            return self.parse_decl()
        # assignment or call statement
        target = self.parse_postfix()
        if self.accept("="):
            value = self.parse_expr()
            self.expect(";")
            return AstNode("Assign", children=[target, value], line=start, line_end=self._end_line())
        if target.kind != "Call":
            raise self.error("expected statement")
        self.expect(";")
        return AstNode("CallStmt", children=[target], line=start, line_end=self._end_line())

    def parse_decl(self) -> AstNode:
        start = self.cur.line
        typ = self.parse_typeref()
        name = self.expect_ident("variable name")
        kids = [typ, AstNode("Identifier", name.value, line=name.line, line_end=name.line)]
        if self.accept("="):
            kids.append(self.parse_expr())
        self.expect(";")
        return AstNode("Decl", children=kids, line=start, line_end=self._end_line())

    def parse_simple(self, kind: str) -> AstNode:
        """Assignment or call inside a for header, wrapped in a non-statement kind."""
        start = self.cur.line
        target = self.parse_postfix()
        if self.accept("="):
            value = self.parse_expr()
            return AstNode(kind, children=[target, value], line=start, line_end=self._end_line())
        if target.kind != "Call":
            raise self.error("expected assignment or call")
        return AstNode(kind, children=[target], line=start, line_end=self._end_line())

    # --- expressions --------------------------------------------------

    _BINARY_LEVELS = (("||",), ("&&",), ("==", "!="), ("<", ">", "<=", ">="), ("+", "-"), ("*", "/", "%"))

    def parse_expr(self, level: int = 0) -> AstNode:
        if level == len(self._BINARY_LEVELS):
            return self.parse_unary()
        node = self.parse_expr(level + 1)
        ops = self._BINARY_LEVELS[level]
        while self.cur.type == "OP" and self.cur.value in ops:
            op = self.advance()
            op_leaf = AstNode("Operator", op.value, line=op.line, line_end=op.line)
            rhs = self.parse_expr(level + 1)
            node = AstNode("BinaryOp", children=[node, op_leaf, rhs], line=node.line, line_end=rhs.line_end)
        return node

    def parse_unary(self) -> AstNode:
        if self.cur.type == "OP" and self.cur.value in ("-", "!"):
            op = self.advance()
            op_leaf = AstNode("Operator", op.value, line=op.line, line_end=op.line)
            operand = self.parse_unary()
            return AstNode("UnaryOp", children=[op_leaf, operand], line=op.line, line_end=operand.line_end)
        return self.parse_postfix()

    def parse_postfix(self) -> AstNode:
        node = self.parse_primary()
        while True:
            if self.accept("."):
                name = self.expect_ident("member name")
                member = AstNode(
                    "Member",
                    children=[node, AstNode("Identifier", name.value, line=name.line, line_end=name.line)],
                    line=node.line,
                    line_end=name.line,
                )
                if self.cur.value == "(":
                    node = self._finish_call(member)
                else:
                    node = member
            elif self.cur.value == "(" and self.cur.type == "PUNCT":
                node = self._finish_call(node)
            else:
                return node

    def _finish_call(self, callee: AstNode) -> AstNode:
        self.expect("(")
        args = []
        if self.cur.value != ")":
            while True:
                args.append(self.parse_expr())
                if not self.accept(","):
                    break
        self.expect(")")
        return AstNode("Call", children=[callee] + args, line=callee.line, line_end=self._end_line())

    def parse_primary(self) -> AstNode:
        t = self.cur
        if t.type == "IDENT":
            self.advance()
            return AstNode("Identifier", t.value, line=t.line, line_end=t.line)
        if t.type in ("NUMBER", "STRING"):
            self.advance()
            return AstNode("Literal", t.value, line=t.line, line_end=t.line)
        if self.at_keyword("this"):
            self.advance()
            return AstNode("This", "this", line=t.line, line_end=t.line)
        if self.at_keyword("new"):
            self.advance()
            typ = self.parse_typeref()
            node = self._finish_call(AstNode("New", children=[typ], line=t.line, line_end=typ.line_end))
            return node
        if self.accept("("):
            inner = self.parse_expr()
            self.expect(")")
            return inner
        raise self.error("expected expression")


def parse_mini(source: str) -> AstNode:
    """Parse mini-language source into an AST rooted at CompilationUnit."""
    return _Parser(lex(source)).parse_unit()
