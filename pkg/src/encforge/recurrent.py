"""GRU cell and sequence runners (single- and bi-directional).

Gate convention, fixed so checkpoints are unambiguous:

    u = sigmoid(W_z x + U_z h + b_z)
    r = sigmoid(W_r x + U_r h + b_r)
    c = tanh(W_h x + U_h (r*h) + b_h)
    h' = (1 - u) * h + u * c          # update gate scales the candidate

Inputs may be single vectors (I,) or batches (B, I); hidden states follow
the same layout. All functions are pure over their parameters.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .autodiff import DimensionError, ParamStore, Tensor

GATE_CONVENTION = "h=(1-u)*h+u*cand"


@dataclass
class GruParams:
    """Weights for one GRU cell: W_* (H,I), U_* (H,H), b_* (H,)."""

    W_z: Tensor
    U_z: Tensor
    b_z: Tensor
    W_r: Tensor
    U_r: Tensor
    b_r: Tensor
    W_h: Tensor
    U_h: Tensor
    b_h: Tensor
    input_width: int
    hidden_width: int

    @classmethod
    def init(cls, input_width: int, hidden_width: int, rng: np.random.Generator,
             store: ParamStore, prefix: str) -> "GruParams":
        """Register freshly initialized cell weights under ``prefix.*``."""
        tensors = {}
        for gate in ("z", "r", "h"):
            tensors[f"W_{gate}"] = store.add(
                f"{prefix}.W_{gate}", ad.glorot(rng, hidden_width, input_width))
            tensors[f"U_{gate}"] = store.add(
                f"{prefix}.U_{gate}", ad.glorot(rng, hidden_width, hidden_width))
            tensors[f"b_{gate}"] = store.add(f"{prefix}.b_{gate}", np.zeros(hidden_width))
        return cls(W_z=tensors["W_z"], U_z=tensors["U_z"], b_z=tensors["b_z"],
                   W_r=tensors["W_r"], U_r=tensors["U_r"], b_r=tensors["b_r"],
                   W_h=tensors["W_h"], U_h=tensors["U_h"], b_h=tensors["b_h"],
                   input_width=input_width, hidden_width=hidden_width)

    @classmethod
    def from_store(cls, store: ParamStore, prefix: str,
                   input_width: int, hidden_width: int) -> "GruParams":
        kw = {f"{w}_{g}": store[f"{prefix}.{w}_{g}"] for w in ("W", "U", "b") for g in ("z", "r", "h")}
        return cls(input_width=input_width, hidden_width=hidden_width, **kw)


def _apply(W: Tensor, v: Tensor) -> Tensor:
    # W is (H, I); v is (I,) or batched (B, I)
    if v.ndim == 1:
        return ad.matmul(W, v)
    return ad.matmul_t(v, W)


def gru_cell(x, h_prev, p: GruParams) -> Tensor:
    """One GRU step; returns the new hidden state."""
    x, h_prev = ad.as_tensor(x), ad.as_tensor(h_prev)
    if x.shape[-1] != p.input_width:
        raise DimensionError(
            f"gru_cell: input width {x.shape} does not match cell input {p.input_width}")
    if h_prev.shape[-1] != p.hidden_width:
        raise DimensionError(
            f"gru_cell: hidden width {h_prev.shape} does not match cell hidden {p.hidden_width}")
    if x.ndim != h_prev.ndim or (x.ndim == 2 and x.shape[0] != h_prev.shape[0]):
        raise DimensionError(f"gru_cell: batch shapes {x.shape} and {h_prev.shape} disagree")
    u = ad.sigmoid(ad.add(ad.add(_apply(p.W_z, x), _apply(p.U_z, h_prev)), p.b_z))
    r = ad.sigmoid(ad.add(ad.add(_apply(p.W_r, x), _apply(p.U_r, h_prev)), p.b_r))
    c = ad.tanh(ad.add(ad.add(_apply(p.W_h, x), _apply(p.U_h, ad.hadamard(r, h_prev))), p.b_h))
    # h + u*(c - h) == (1-u)*h + u*c
    return ad.add(h_prev, ad.hadamard(u, ad.sub(c, h_prev)))


def run_gru(seq, h0, p: GruParams):
    """Run a GRU over a sequence; returns (all hidden states, final state)."""
    if len(seq) == 0:
        raise ValueError("run_gru: empty sequence")
    h = ad.as_tensor(h0)
    hiddens = []
    for x in seq:
        h = gru_cell(x, h, p)
        hiddens.append(h)
    return hiddens, h


def zero_state(like, hidden_width: int) -> Tensor:
    """Zero hidden state matching the batch layout of one sequence element."""
    x = ad.as_tensor(like)
    if x.ndim == 1:
        return Tensor(np.zeros(hidden_width))
    return Tensor(np.zeros((x.shape[0], hidden_width)))


def run_bigru(seq, p_fwd: GruParams, p_bwd: GruParams) -> Tensor:
    """Concatenate the final forward and backward hidden states (width 2H).

    Both passes start from zero state; the backward pass consumes the
    sequence in reverse order.
    """
    if len(seq) == 0:
        raise ValueError("run_bigru: empty sequence")
    if (p_fwd.input_width, p_fwd.hidden_width) != (p_bwd.input_width, p_bwd.hidden_width):
        raise DimensionError("run_bigru: forward/backward cells must share widths")
    _, fwd = run_gru(seq, zero_state(seq[0], p_fwd.hidden_width), p_fwd)
    _, bwd = run_gru(list(seq)[::-1], zero_state(seq[0], p_bwd.hidden_width), p_bwd)
    return ad.concat(fwd, bwd, axis=-1)
