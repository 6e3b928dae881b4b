"""Two-layer graph convolution and parameter accounting.

The encoder for one snapshot is ``Z = A_hat relu(A_hat X W1) W2`` with the
symmetrically normalized adjacency ``A_hat``. Events here carry no node
attributes, so ``X`` defaults to the identity, in which case ``X W1``
collapses to selecting the W1 rows of the snapshot's nodes; W1 is allocated
over the whole registry so that every node owns a persistent row.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Union

import numpy as np

from .errors import ShapeError
from .graphs import SnapshotGraph
from .tape import Tensor, as_tensor, matmul, relu, rows

if TYPE_CHECKING:
    from .model import ModelConfig

Array = np.ndarray


@dataclass
class GcnParams:
    """Weights of one snapshot encoder: first layer (global rows) and second."""

    w1: Tensor
    w2: Tensor


@dataclass(frozen=True)
class IdentityFeatures:
    """Marker standing in for an identity feature matrix.

    Multiplying the identity restricted to a snapshot's nodes into W1 is
    exactly a row selection, so the marker only needs the node ids.
    """

    ids: tuple[int, ...]


@dataclass(frozen=True)
class Embeddings:
    """Final-layer node representations aligned with sorted snapshot nodes."""

    z: Array
    ids: tuple[int, ...]

    def row(self, u: int) -> Array:
        try:
            return self.z[self.ids.index(u)]
        except ValueError:
            raise KeyError(f"node {u} has no embedding") from None


def identity_features(g: SnapshotGraph) -> IdentityFeatures:
    return IdentityFeatures(ids=g.nodes)


def first_layer_input(features: Union[IdentityFeatures, Array, Tensor], w1: Tensor) -> Tensor:
    """``X W1`` for dense features, or the row selection for identity ones."""
    if isinstance(features, IdentityFeatures):
        ids = np.asarray(features.ids, dtype=np.intp)
        if ids.size and ids.max() >= w1.shape[0]:
            raise ShapeError(f"node id {int(ids.max())} outside the {w1.shape[0]} W1 rows")
        return rows(w1, ids)
    return matmul(as_tensor(features), w1)


def gcn_forward(a_hat, features, params: GcnParams) -> Tensor:
    """One snapshot encoder pass; returns the (n_k, embed_dim) output."""
    a = as_tensor(a_hat)
    if a.value.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeError(f"normalized adjacency must be square, got {a.shape}")
    xw = first_layer_input(features, params.w1)
    if xw.shape[0] != a.shape[0]:
        raise ShapeError(f"first-layer input has {xw.shape[0]} rows for "
                         f"{a.shape[0]} nodes")
    hidden = relu(matmul(a, xw))
    return matmul(matmul(a, hidden), params.w2)


def count_params(cfg: "ModelConfig", n_global: int) -> int:
    """Trainable scalar count for a window model over ``n_global`` nodes.

    One global first-layer matrix, one second-layer matrix per snapshot in
    the window, and per transition ``heads`` attention heads holding a
    (hidden x hidden) transform plus a scoring vector of length 2*hidden.
    Evolved first-layer weights are derived values, not leaves, so they do
    not count.
    """
    if n_global < 1:
        raise ShapeError(f"n_global must be positive, got {n_global}")
    d1, d2 = cfg.hidden_dim, cfg.embed_dim
    return (n_global * d1
            + (cfg.window + 1) * d1 * d2
            + cfg.window * cfg.heads * (d1 * d1 + 2 * d1))
