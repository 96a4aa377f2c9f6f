"""Statement-tree splitting, vocabulary, embeddings, and the fused encoder.

A program is split into an ordered sequence of statement trees (compound
statements contribute a header tree, their nested statements, then one
END_BLOCK marker). Each statement tree is encoded by fusing node
embeddings with projected context vectors via elementwise max, running a
bottom-up message pass, and max-pooling node states; the statement
sequence is then encoded by a bidirectional GRU whose per-step
concatenated states are max-pooled into the code vector.

All forwards return a cache consumed by the matching backward; gradients
accumulate into the shared :class:`~codectx.nn.ParamSet`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyInputError, ShapeError
from .nn import (
    ParamSet,
    gru_step,
    gru_step_backward,
    init_gru_params,
    max_pool,
    max_pool_backward,
)
from .tree import (
    COMPOUND_STATEMENT_KINDS,
    KIND_END_BLOCK,
    MINILANG_KINDS,
    SIMPLE_STATEMENT_KINDS,
    AstNode,
    node_symbol,
    preorder,
)

PAD = "<pad>"
UNK = "<unk>"

CHANNEL_BUG = "BUG"
CHANNEL_PATTERN = "PATTERN"
WHOLE_UNIT = None  # scope value for unit-wide context vectors


# --- statement splitting ------------------------------------------------


@dataclass
class StatementTree:
    """A statement's subtree with nested statements excised.

    ``line``/``line_end`` span the original statement including its body,
    so warnings anywhere inside a compound statement overlap its header.
    """

    root: AstNode
    line: int = 0
    line_end: int = 0

    @property
    def is_marker(self) -> bool:
        return self.root.kind == KIND_END_BLOCK

    def symbols(self) -> list[str]:
        return [node_symbol(n) for n in preorder(self.root)]


def _copy_subtree(node: AstNode) -> AstNode:
    return AstNode(
        node.kind,
        node.token,
        [_copy_subtree(c) for c in node.children],
        line=node.line,
        line_end=node.line_end,
    )


def _header_and_body(node: AstNode) -> tuple[list[AstNode], list[AstNode]]:
    """Partition a compound statement's children into header and body."""
    kind = node.kind
    if kind in ("FuncDef", "MethodDef", "CtorDef"):
        return node.children[:-1], node.children[-1:]
    if kind in ("If", "While"):
        return node.children[:1], node.children[1:]
    if kind == "For":
        return node.children[:-1], node.children[-1:]
    if kind == "ClassDecl":
        header = [c for c in node.children if c.kind not in ("FieldDecl", "CtorDef", "MethodDef")]
        body = [c for c in node.children if c.kind in ("FieldDecl", "CtorDef", "MethodDef")]
        return header, body
    if kind == "InterfaceDecl":
        return node.children[:1], node.children[1:]
    raise ValueError(f"not a compound statement kind: {kind}")


def split_statements(ast: AstNode) -> list[StatementTree]:
    """Preorder statement-tree sequence with END_BLOCK after each compound body."""
    out: list[StatementTree] = []

    def walk(node: AstNode) -> None:
        if node.kind in COMPOUND_STATEMENT_KINDS:
            header_children, body = _header_and_body(node)
            header = AstNode(node.kind, node.token, [_copy_subtree(c) for c in header_children])
            out.append(StatementTree(header, node.line, node.line_end))
            for child in body:
                walk(child)
            out.append(StatementTree(AstNode(KIND_END_BLOCK), node.line_end, node.line_end))
        elif node.kind in SIMPLE_STATEMENT_KINDS:
            out.append(StatementTree(_copy_subtree(node), node.line, node.line_end))
        else:
            # CompilationUnit, bare blocks: transparent containers
            for child in node.children:
                walk(child)

    walk(ast)
    return out


# --- vocabulary ----------------------------------------------------------


@dataclass
class Vocabulary:
    """Dense symbol-to-index map with reserved entries.

    Index 0 is PAD, index 1 UNK, then every node-kind label (END_BLOCK
    among them), then corpus tokens ordered by frequency desc / lexeme asc.
    """

    index: dict[str, int]
    n_reserved: int

    def __len__(self) -> int:
        return len(self.index)

    def lookup(self, symbol: str) -> int:
        return self.index.get(symbol, self.index[UNK])

    def lookup_node(self, node: AstNode) -> int:
        return self.lookup(node_symbol(node))


def build_vocab(corpus: list[AstNode], min_count: int = 1) -> Vocabulary:
    if min_count < 1:
        raise ValueError("min_count must be >= 1")
    kinds = set(MINILANG_KINDS)
    counts: dict[str, int] = {}
    for tree in corpus:
        for node in preorder(tree):
            kinds.add(node.kind)
            if node.token is not None:
                counts[node.token] = counts.get(node.token, 0) + 1
    index: dict[str, int] = {PAD: 0, UNK: 1}
    for kind in sorted(kinds):
        if kind not in index:
            index[kind] = len(index)
    n_reserved = len(index)
    kept = [(tok, c) for tok, c in counts.items() if c >= min_count and tok not in index]
    kept.sort(key=lambda tc: (-tc[1], tc[0]))
    for tok, _ in kept:
        index[tok] = len(index)
    return Vocabulary(index, n_reserved)


def symbol_sequence(ast: AstNode) -> list[str]:
    """Flat symbol stream of a program's statement trees, markers included."""
    seq: list[str] = []
    for stmt in split_statements(ast):
        seq.extend(stmt.symbols())
    return seq


# --- skip-gram embeddings -------------------------------------------------


def train_embeddings(
    corpus: list[AstNode],
    vocab: Vocabulary,
    d: int,
    window: int = 3,
    epochs: int = 5,
    seed: int = 0,
    lr: float = 0.025,
    negatives: int = 5,
) -> np.ndarray:
    """Skip-gram with negative sampling over statement-tree symbol streams.

    Returns the V x d input-embedding matrix; epochs=0 returns the seeded
    random initialization unchanged.
    """
    rng = np.random.default_rng(seed)
    V = len(vocab)
    emb_in = rng.uniform(-0.5 / d, 0.5 / d, size=(V, d))
    emb_out = np.zeros((V, d))

    sequences = [[vocab.lookup(s) for s in symbol_sequence(t)] for t in corpus]
    counts = np.zeros(V)
    for seq in sequences:
        for idx in seq:
            counts[idx] += 1
    if counts.sum() == 0 or epochs == 0:
        return emb_in
    noise = counts**0.75
    noise /= noise.sum()

    for _ in range(epochs):
        for seq in sequences:
            for i, center in enumerate(seq):
                lo = max(0, i - window)
                hi = min(len(seq), i + window + 1)
                for j in range(lo, hi):
                    if j == i:
                        continue
                    ctx = seq[j]
                    targets = [(ctx, 1.0)]
                    negs = rng.choice(V, size=negatives, p=noise)
                    targets.extend((int(n), 0.0) for n in negs if int(n) != ctx)
                    v_c = emb_in[center]
                    grad_c = np.zeros(d)
                    for o, y in targets:
                        score = 1.0 / (1.0 + np.exp(-float(v_c @ emb_out[o])))
                        coef = lr * (y - score)
                        grad_c += coef * emb_out[o]
                        emb_out[o] += coef * v_c
                    emb_in[center] = v_c + grad_c
    return emb_in


# --- context vectors ------------------------------------------------------


@dataclass
class ContextVector:
    """One static-analysis channel's contribution, already projected to d.

    ``raw`` keeps the pre-projection features so training can push
    gradients into the channel's projection matrix.
    """

    channel: str
    scope: int | None  # statement index, or WHOLE_UNIT (None)
    values: np.ndarray
    raw: np.ndarray = field(default=None, repr=False)  # type: ignore[assignment]


def project_context(channel: str, raw: np.ndarray, ps: ParamSet, scope: int | None) -> ContextVector:
    P = ps[f"proj.{channel}"]
    if raw.shape != (P.shape[1],):
        raise ShapeError(f"context {channel}: raw{raw.shape} vs projection {P.shape}")
    return ContextVector(channel, scope, P @ raw, raw)


# --- encoder parameters ----------------------------------------------------


@dataclass
class EncoderParams:
    """All trainable arrays of the encoder, plus its dimensions and vocabulary."""

    d: int
    h: int
    rounds: int
    fusion: str  # "node" or "statement"
    vocab: Vocabulary
    ps: ParamSet


def init_encoder_params(
    vocab: Vocabulary,
    d: int,
    h: int,
    channel_widths: dict[str, int],
    seed: int,
    rounds: int = 1,
    fusion: str = "node",
    embeddings: np.ndarray | None = None,
) -> EncoderParams:
    if d <= 0 or h <= 0 or rounds < 1:
        raise ValueError("dims and rounds must be positive")
    if fusion not in ("node", "statement"):
        raise ValueError(f"unknown fusion mode {fusion!r}")
    rng = np.random.default_rng(seed)
    ps = ParamSet()
    if embeddings is not None:
        if embeddings.shape != (len(vocab), d):
            raise ShapeError(f"embeddings {embeddings.shape} vs ({len(vocab)}, {d})")
        ps.add("emb", embeddings.copy())
    else:
        ps.add("emb", rng.uniform(-0.5 / d, 0.5 / d, size=(len(vocab), d)))
    scale = 1.0 / np.sqrt(d)
    ps.add("tree.W_self", rng.uniform(-scale, scale, (d, d)))
    ps.add("tree.W_child", rng.uniform(-scale, scale, (d, d)))
    ps.add("tree.b", np.zeros(d))
    for channel, width in sorted(channel_widths.items()):
        ps.add(f"proj.{channel}", rng.uniform(-scale, scale, (d, width)))
    init_gru_params(ps, "seq_f.", d, h, rng)
    init_gru_params(ps, "seq_b.", d, h, rng)
    return EncoderParams(d, h, rounds, fusion, vocab, ps)


# --- statement encoding -----------------------------------------------------


def encode_statement(
    stmt: StatementTree, contexts: list[ContextVector], enc: EncoderParams
) -> tuple[np.ndarray, dict]:
    """Fuse, run the bottom-up pass, and pool node states.

    With node fusion, every node's input is the elementwise max of its
    embedding and all projected context vectors; with statement fusion the
    contexts join only at the final pooling.
    """
    ps = enc.ps
    for ctx in contexts:
        if ctx.values.shape != (enc.d,):
            raise ShapeError(f"context dim {ctx.values.shape} != ({enc.d},)")
    nodes = list(preorder(stmt.root))
    # children precede parents in reversed preorder only within this list;
    # record child positions explicitly for the message pass
    pos = {id(n): i for i, n in enumerate(nodes)}
    children_idx = [[pos[id(c)] for c in n.children] for n in nodes]
    order = sorted(range(len(nodes)), key=lambda i: -_depth_of(nodes, children_idx, i))

    emb = ps["emb"]
    rows = [None] * len(nodes)
    xs = [None] * len(nodes)
    fuse_arg = [None] * len(nodes)
    ctx_values = [c.values for c in contexts]
    node_fusion = enc.fusion == "node" and contexts
    for i, node in enumerate(nodes):
        row = _lookup_row(enc, node)
        rows[i] = row
        e = emb[row]
        if node_fusion:
            xs[i], fuse_arg[i] = max_pool([e] + ctx_values)
        else:
            xs[i] = e

    W_self, W_child, b = ps["tree.W_self"], ps["tree.W_child"], ps["tree.b"]
    states = []  # one list of node states per round
    inputs = xs
    for _ in range(enc.rounds):
        s = [None] * len(nodes)
        for i in _bottom_up(children_idx):
            acc = W_self @ inputs[i] + b
            for c in children_idx[i]:
                acc += W_child @ s[c]
            s[i] = np.tanh(acc)
        states.append(s)
        inputs = s
    final = states[-1]
    pooled, pool_arg = max_pool(final)
    if enc.fusion == "statement" and contexts:
        vec, stmt_arg = max_pool([pooled] + ctx_values)
    else:
        vec, stmt_arg = pooled, None
    cache = {
        "nodes": nodes,
        "children_idx": children_idx,
        "rows": rows,
        "xs": xs,
        "fuse_arg": fuse_arg,
        "states": states,
        "pool_arg": pool_arg,
        "stmt_arg": stmt_arg,
        "contexts": contexts,
    }
    return vec, cache


def _lookup_row(enc: EncoderParams, node: AstNode) -> int:
    # vocab indices are resolved before encoding; nodes carry them in a
    # side table built by the caller
    return node._vocab_row  # type: ignore[attr-defined]


def resolve_rows(stmt: StatementTree, vocab: Vocabulary) -> None:
    """Annotate each node with its vocabulary row (idempotent)."""
    for node in preorder(stmt.root):
        node._vocab_row = vocab.lookup_node(node)  # type: ignore[attr-defined]


def _depth_of(nodes, children_idx, i, _memo=None) -> int:
    depth = 0
    stack = [(i, 0)]
    while stack:
        j, d_ = stack.pop()
        depth = max(depth, d_)
        stack.extend((c, d_ + 1) for c in children_idx[j])
    return depth


def _bottom_up(children_idx: list[list[int]]) -> list[int]:
    """Indices ordered children-first (reverse of preorder works: parents
    always precede their children in preorder)."""
    return list(range(len(children_idx)))[::-1]


def encode_statement_backward(dvec: np.ndarray, cache: dict, enc: EncoderParams) -> None:
    """Accumulates grads into embeddings, tree weights, and projections."""
    ps = enc.ps
    contexts: list[ContextVector] = cache["contexts"]
    ctx_grads = [np.zeros(enc.d) for _ in contexts]

    if cache["stmt_arg"] is not None:
        routed = max_pool_backward(dvec, cache["stmt_arg"], 1 + len(contexts))
        dpooled = routed[0]
        for k in range(len(contexts)):
            ctx_grads[k] += routed[k + 1]
    else:
        dpooled = dvec

    states = cache["states"]
    children_idx = cache["children_idx"]
    n = len(children_idx)
    W_self, W_child = ps["tree.W_self"], ps["tree.W_child"]

    ds_final = max_pool_backward(dpooled, cache["pool_arg"], n)
    ds = list(ds_final)
    for r in range(len(states) - 1, -1, -1):
        s = states[r]
        inputs = cache["xs"] if r == 0 else states[r - 1]
        dinputs = [np.zeros(enc.d) for _ in range(n)]
        # parents first so child grads are complete when reached
        for i in range(n):
            dpre = ds[i] * (1.0 - s[i] * s[i])
            ps.accumulate("tree.W_self", np.outer(dpre, inputs[i]))
            ps.accumulate("tree.b", dpre)
            dinputs[i] += W_self.T @ dpre
            for c in children_idx[i]:
                ps.accumulate("tree.W_child", np.outer(dpre, s[c]))
                ds[c] += W_child.T @ dpre
        ds = dinputs
    dxs = ds

    node_fusion = enc.fusion == "node" and contexts
    for i in range(n):
        dx = dxs[i]
        if node_fusion:
            routed = max_pool_backward(dx, cache["fuse_arg"][i], 1 + len(contexts))
            demb = routed[0]
            for k in range(len(contexts)):
                ctx_grads[k] += routed[k + 1]
        else:
            demb = dx
        ps.grads["emb"][cache["rows"][i]] += demb

    for ctx, dvals in zip(contexts, ctx_grads):
        if ctx.raw is not None:
            ps.accumulate(f"proj.{ctx.channel}", np.outer(dvals, ctx.raw))


# --- sequence encoding -------------------------------------------------------


def encode_code(stmt_vecs: list[np.ndarray], enc: EncoderParams) -> tuple[np.ndarray, dict]:
    """Bidirectional recurrence over statement vectors, max-pooled."""
    if not stmt_vecs:
        raise EmptyInputError("encode_code over empty statement sequence")
    ps = enc.ps
    T = len(stmt_vecs)
    h = enc.h
    h_f = np.zeros(h)
    h_b = np.zeros(h)
    caches_f, caches_b = [], []
    hs_f, hs_b = [], []
    for t in range(T):
        h_f, c = gru_step(stmt_vecs[t], h_f, ps, "seq_f.")
        caches_f.append(c)
        hs_f.append(h_f)
    for t in range(T - 1, -1, -1):
        h_b, c = gru_step(stmt_vecs[t], h_b, ps, "seq_b.")
        caches_b.append(c)
        hs_b.append(h_b)
    hs_b.reverse()
    caches_b.reverse()
    steps = [np.concatenate([hs_f[t], hs_b[t]]) for t in range(T)]
    code, pool_arg = max_pool(steps)
    cache = {
        "caches_f": caches_f,
        "caches_b": caches_b,
        "pool_arg": pool_arg,
        "T": T,
    }
    return code, cache


def encode_code_backward(dcode: np.ndarray, cache: dict, enc: EncoderParams) -> list[np.ndarray]:
    """Returns grads w.r.t. the statement vectors."""
    ps = enc.ps
    T = cache["T"]
    h = enc.h
    dsteps = max_pool_backward(dcode, cache["pool_arg"], T)
    dxs = [np.zeros(enc.d) for _ in range(T)]
    carry = np.zeros(h)
    for t in range(T - 1, -1, -1):
        dh = dsteps[t][:h] + carry
        dx, carry = gru_step_backward(dh, cache["caches_f"][t], ps, "seq_f.")
        dxs[t] += dx
    carry = np.zeros(h)
    for t in range(T):
        dh = dsteps[t][h:] + carry
        dx, carry = gru_step_backward(dh, cache["caches_b"][t], ps, "seq_b.")
        dxs[t] += dx
    return dxs


# --- whole-unit convenience ---------------------------------------------------


def encode_unit(
    stmts: list[StatementTree],
    contexts_per_stmt: list[list[ContextVector]],
    enc: EncoderParams,
) -> tuple[np.ndarray, dict]:
    """Encode an already-split program; returns (code vector, cache)."""
    vecs = []
    stmt_caches = []
    for stmt, ctxs in zip(stmts, contexts_per_stmt):
        v, c = encode_statement(stmt, ctxs, enc)
        vecs.append(v)
        stmt_caches.append(c)
    code, seq_cache = encode_code(vecs, enc)
    return code, {"stmt_caches": stmt_caches, "seq_cache": seq_cache}


def encode_unit_backward(dcode: np.ndarray, cache: dict, enc: EncoderParams) -> None:
    dvecs = encode_code_backward(dcode, cache["seq_cache"], enc)
    for dv, sc in zip(dvecs, cache["stmt_caches"]):
        encode_statement_backward(dv, sc, enc)
