"""Dense-vector kernels with hand-derived gradients, Adam, and a checker.

Tensors are C-contiguous float64 numpy arrays. No autodiff graph: each
kernel ships a forward and an explicit backward, and every backward is
validated against central finite differences (see :func:`grad_check`).
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .errors import EmptyInputError, LabelRangeError, ShapeError

FLOAT = np.float64


def sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


class ParamSet:
    """Named parameters with matching gradient accumulators."""

    def __init__(self):
        self.params: dict[str, np.ndarray] = {}
        self.grads: dict[str, np.ndarray] = {}

    def add(self, name: str, value: np.ndarray) -> np.ndarray:
        if name in self.params:
            raise ValueError(f"duplicate parameter {name!r}")
        arr = np.ascontiguousarray(value, dtype=FLOAT)
        self.params[name] = arr
        self.grads[name] = np.zeros_like(arr)
        return arr

    def __getitem__(self, name: str) -> np.ndarray:
        return self.params[name]

    def __contains__(self, name: str) -> bool:
        return name in self.params

    def names(self) -> list[str]:
        return list(self.params)

    def zero_grads(self) -> None:
        for g in self.grads.values():
            g[...] = 0.0

    def accumulate(self, name: str, grad: np.ndarray) -> None:
        self.grads[name] += grad

    def copy(self) -> "ParamSet":
        ps = ParamSet()
        for name, value in self.params.items():
            ps.add(name, value.copy())
        return ps


# --- affine ------------------------------------------------------------


def affine(x: np.ndarray, W: np.ndarray, b: np.ndarray) -> np.ndarray:
    """y = Wx + b."""
    if W.ndim != 2 or x.shape != (W.shape[1],) or b.shape != (W.shape[0],):
        raise ShapeError(f"affine: x{x.shape} W{W.shape} b{b.shape}")
    return W @ x + b


def affine_backward(
    dy: np.ndarray, x: np.ndarray, W: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Returns (dx, dW, db) for y = Wx + b."""
    return W.T @ dy, np.outer(dy, x), dy


# --- GRU cell ----------------------------------------------------------

GRU_PARAM_NAMES = ("W_z", "U_z", "b_z", "W_r", "U_r", "b_r", "W_h", "U_h", "b_h")


def init_gru_params(ps: ParamSet, prefix: str, d_in: int, d_hidden: int, rng: np.random.Generator) -> None:
    scale_in = 1.0 / np.sqrt(d_in)
    scale_h = 1.0 / np.sqrt(d_hidden)
    for gate in ("z", "r", "h"):
        ps.add(f"{prefix}W_{gate}", rng.uniform(-scale_in, scale_in, (d_hidden, d_in)))
        ps.add(f"{prefix}U_{gate}", rng.uniform(-scale_h, scale_h, (d_hidden, d_hidden)))
        ps.add(f"{prefix}b_{gate}", np.zeros(d_hidden))


def gru_step(
    x: np.ndarray, h: np.ndarray, ps: ParamSet, prefix: str = ""
) -> tuple[np.ndarray, dict]:
    """Update/reset-gate recurrence with tanh candidate.

    z = sig(Wz x + Uz h + bz); r = sig(Wr x + Ur h + br)
    c = tanh(Wh x + Uh (r*h) + bh); h' = (1-z)*h + z*c
    """
    Wz, Uz, bz = ps[f"{prefix}W_z"], ps[f"{prefix}U_z"], ps[f"{prefix}b_z"]
    Wr, Ur, br = ps[f"{prefix}W_r"], ps[f"{prefix}U_r"], ps[f"{prefix}b_r"]
    Wh, Uh, bh = ps[f"{prefix}W_h"], ps[f"{prefix}U_h"], ps[f"{prefix}b_h"]
    if x.shape != (Wz.shape[1],) or h.shape != (Uz.shape[1],):
        raise ShapeError(f"gru_step: x{x.shape} h{h.shape} W_z{Wz.shape}")
    z = sigmoid(Wz @ x + Uz @ h + bz)
    r = sigmoid(Wr @ x + Ur @ h + br)
    rh = r * h
    c = np.tanh(Wh @ x + Uh @ rh + bh)
    h_new = (1.0 - z) * h + z * c
    cache = {"x": x, "h": h, "z": z, "r": r, "rh": rh, "c": c}
    return h_new, cache


def gru_step_backward(
    dh_new: np.ndarray, cache: dict, ps: ParamSet, prefix: str = ""
) -> tuple[np.ndarray, np.ndarray]:
    """Accumulates parameter grads into ``ps``; returns (dx, dh_prev)."""
    x, h, z, r, rh, c = (cache[k] for k in ("x", "h", "z", "r", "rh", "c"))
    Wz, Uz = ps[f"{prefix}W_z"], ps[f"{prefix}U_z"]
    Wr, Ur = ps[f"{prefix}W_r"], ps[f"{prefix}U_r"]
    Wh, Uh = ps[f"{prefix}W_h"], ps[f"{prefix}U_h"]

    dz = dh_new * (c - h)
    dc = dh_new * z
    dh = dh_new * (1.0 - z)

    dc_pre = dc * (1.0 - c * c)
    ps.accumulate(f"{prefix}W_h", np.outer(dc_pre, x))
    ps.accumulate(f"{prefix}U_h", np.outer(dc_pre, rh))
    ps.accumulate(f"{prefix}b_h", dc_pre)
    drh = Uh.T @ dc_pre
    dr = drh * h
    dh += drh * r

    dz_pre = dz * z * (1.0 - z)
    ps.accumulate(f"{prefix}W_z", np.outer(dz_pre, x))
    ps.accumulate(f"{prefix}U_z", np.outer(dz_pre, h))
    ps.accumulate(f"{prefix}b_z", dz_pre)
    dh += Uz.T @ dz_pre

    dr_pre = dr * r * (1.0 - r)
    ps.accumulate(f"{prefix}W_r", np.outer(dr_pre, x))
    ps.accumulate(f"{prefix}U_r", np.outer(dr_pre, h))
    ps.accumulate(f"{prefix}b_r", dr_pre)
    dh += Ur.T @ dr_pre

    dx = Wz.T @ dz_pre + Wr.T @ dr_pre + Wh.T @ dc_pre
    return dx, dh


# --- pooling -----------------------------------------------------------


def max_pool(vs: Sequence[np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
    """Elementwise max over equal-length vectors.

    Returns (out, argmax) where argmax[i] is the index of the winning
    input (first index on ties), used to route the gradient.
    """
    if len(vs) == 0:
        raise EmptyInputError("max_pool over empty list")
    stacked = np.stack(vs)
    if stacked.ndim != 2:
        raise ShapeError("max_pool: inputs must be equal-length vectors")
    argmax = np.argmax(stacked, axis=0)
    cols = np.arange(stacked.shape[1])
    return stacked[argmax, cols], argmax


def max_pool_backward(dout: np.ndarray, argmax: np.ndarray, n_inputs: int) -> list[np.ndarray]:
    """Routes each component's gradient to its argmax input."""
    dvs = [np.zeros_like(dout) for _ in range(n_inputs)]
    for j, src in enumerate(argmax):
        dvs[src][j] = dout[j]
    return dvs


# --- loss --------------------------------------------------------------


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - np.max(logits)
    e = np.exp(shifted)
    return e / e.sum()


def softmax_xent(logits: np.ndarray, label: int) -> tuple[float, np.ndarray]:
    """Max-shifted cross-entropy; grad = softmax - onehot."""
    if not 0 <= label < logits.shape[0]:
        raise LabelRangeError(f"label {label} out of range for {logits.shape[0]} classes")
    shifted = logits - np.max(logits)
    log_z = np.log(np.exp(shifted).sum())
    loss = float(log_z - shifted[label])
    grad = np.exp(shifted - log_z)
    grad[label] -= 1.0
    return loss, grad


# --- optimizer ---------------------------------------------------------


class Adam:
    """Adam with bias correction; state keyed by parameter name."""

    def __init__(self, ps: ParamSet, lr: float = 1e-3, betas: tuple[float, float] = (0.9, 0.999), eps: float = 1e-8):
        self.lr = lr
        self.beta1, self.beta2 = betas
        self.eps = eps
        self.t = 0
        self.m = {k: np.zeros_like(v) for k, v in ps.params.items()}
        self.v = {k: np.zeros_like(v) for k, v in ps.params.items()}

    def step(self, ps: ParamSet) -> None:
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        for name, p in ps.params.items():
            g = ps.grads[name]
            m = self.m[name]
            v = self.v[name]
            m *= b1
            m += (1 - b1) * g
            v *= b2
            v += (1 - b2) * g * g
            m_hat = m / (1 - b1**self.t)
            v_hat = v / (1 - b2**self.t)
            p -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


def optimizer_step(ps: ParamSet, opt: Adam) -> None:
    opt.step(ps)


# --- gradient checking ---------------------------------------------------


def grad_check(f: Callable[[], float], ps: ParamSet, eps: float = 1e-5, names: Sequence[str] | None = None) -> float:
    """Max relative error between analytic grads and central differences.

    ``f`` must be pure given ``ps``: it returns the scalar loss and fills
    ``ps.grads``. Relative error per component is
    |g_a - g_n| / max(1, |g_a|, |g_n|).
    """
    ps.zero_grads()
    f()
    analytic = {k: g.copy() for k, g in ps.grads.items()}
    worst = 0.0
    for name in names if names is not None else ps.names():
        flat = ps.params[name].ravel()
        g_ana = analytic[name].ravel()
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + eps
            lp = f()
            flat[i] = orig - eps
            lm = f()
            flat[i] = orig
            g_num = (lp - lm) / (2.0 * eps)
            err = abs(g_ana[i] - g_num) / max(1.0, abs(g_ana[i]), abs(g_num))
            worst = max(worst, err)
    ps.zero_grads()
    return worst
