"""Parser contract: structure, lexeme preservation, determinism, errors."""

import pytest

from codectx.errors import FormatError, MiniSyntaxError
from codectx.minilang import parse_mini, significant_lexemes
from codectx.tree import (
    AstNode,
    from_record,
    load_ast_record,
    preorder,
    serialize_ast,
    tokens,
)

SAMPLES = [
    "int f(){return 1;}",
    "int f(){int a; while(a<1){a=a+1;} return a;}",
    "int g(int x, int y){if(x<y){return x;}else{return y;}}",
    "void h(){for(i=0; i<10; i=i+1){total = total + i;} print(total);}",
    "int k(){int a = 1*2+3; a = -a; if(a!=0 && a<9){a = f(a, 2);} return a;}",
    """
    interface Shape { int area(int scale); }
    public class Box extends Base implements Shape {
        private Box instance;
        static int count = 0;
        private Box() { count = count + 1; }
        static Box getInstance() { if (instance == null) { instance = new Box(); } return instance; }
        int area(int scale) { return this.width * scale; }
    }
    """,
    "void m(){obj.call(1, \"two\"); x = a.b.c(d);}",
    "int nested(){while(a<3){if(b>0){b=b-1;}else{while(c){c=c-1;}}} return 0;}",
]


def path_kinds(root: AstNode) -> list[list[str]]:
    """All root-to-leaf kind sequences."""
    if not root.children:
        return [[root.kind]]
    return [[root.kind] + p for c in root.children for p in path_kinds(c)]


def has_path_subsequence(root: AstNode, kinds: list[str]) -> bool:
    for path in path_kinds(root):
        it = iter(path)
        if all(k in it for k in kinds):
            return True
    return False


def test_single_return_tree():
    tree = parse_mini("int f(){return 1;}")
    assert tree.kind == "CompilationUnit"
    assert has_path_subsequence(tree, ["CompilationUnit", "FuncDef", "Return", "Literal"])
    literals = [n for n in preorder(tree) if n.kind == "Literal"]
    assert [n.token for n in literals] == ["1"]


def test_empty_input_is_empty_unit():
    tree = parse_mini("")
    assert tree.kind == "CompilationUnit"
    assert tree.children == []


def test_unbalanced_block_raises_at_eof():
    with pytest.raises(MiniSyntaxError) as exc:
        parse_mini("int f(){")
    assert "end-of-input" in str(exc.value)


@pytest.mark.parametrize("src", ["int f({}", "int f(){ 3; }", "class {  }", "int x = ;"])
def test_bad_programs_raise(src):
    with pytest.raises(MiniSyntaxError):
        parse_mini(src)


@pytest.mark.parametrize("src", SAMPLES)
def test_lexeme_stream_preserved(src):
    tree = parse_mini(src)
    assert tokens(tree) == significant_lexemes(src)


@pytest.mark.parametrize("src", SAMPLES)
def test_parse_deterministic(src):
    assert parse_mini(src) == parse_mini(src)


def test_comments_and_whitespace_do_not_change_tree():
    plain = parse_mini("int f(){return 1;}")
    noisy = parse_mini("int  f( )\n{ // say one\n  return /* inline */ 1;\n}\n")
    assert plain == noisy


@pytest.mark.parametrize("src", SAMPLES)
def test_record_round_trip(src):
    tree = parse_mini(src)
    assert load_ast_record(serialize_ast(tree)) == tree
    # serialize is canonical: a second round trip is byte-identical
    once = serialize_ast(tree)
    assert serialize_ast(load_ast_record(once)) == once


def test_load_record_direct_mapping():
    rec = '{"kind":"Return","token":null,"children":[{"kind":"Literal","token":"1","children":[]}]}'
    tree = load_ast_record(rec)
    assert tree.kind == "Return"
    assert tree.children[0].token == "1"
    assert sum(1 for _ in preorder(tree)) == 2


def test_record_missing_kind():
    with pytest.raises(FormatError, match="kind"):
        from_record({"token": None, "children": []})


def test_record_bad_children():
    with pytest.raises(FormatError, match="children"):
        from_record({"kind": "Return", "token": None, "children": "nope"})


def test_class_members_shape():
    tree = parse_mini(SAMPLES[5])
    classes = [n for n in preorder(tree) if n.kind == "ClassDecl"]
    assert len(classes) == 1
    kinds = [c.kind for c in classes[0].children]
    assert "Extends" in kinds and "Implements" in kinds
    assert kinds.count("FieldDecl") == 2
    assert kinds.count("CtorDef") == 1
    assert kinds.count("MethodDef") == 2
    ifaces = [n for n in preorder(tree) if n.kind == "InterfaceDecl"]
    assert len(ifaces) == 1
