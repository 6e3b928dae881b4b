"""Window model: a chain of snapshot encoders linked by attention transitions.

The model over a window of ``window + 1`` consecutive snapshots holds one
free first-layer matrix for the oldest snapshot, a second-layer matrix per
snapshot, and ``window`` attention transitions that derive each later
first-layer matrix from the previous one. Training reconstructs the final
snapshot's weighted adjacency from sigmoid pair scores.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import expit

from .attention import AttentionHead, Transition, evolve_weights
from .errors import ConfigError, ShapeError
from .gcn import Embeddings, GcnParams, gcn_forward, identity_features
from .graphs import SnapshotGraph, normalize_adjacency
from .tape import Tensor, add, matmul, mean, param, scale, sigmoid, sqrt, square, sub, transpose

Array = np.ndarray

ROLES = ("teacher", "student")


@dataclass(frozen=True)
class ModelConfig:
    """Hyperparameters of one window model.

    ``window`` is the number of snapshots chained before the current one
    (the model spans ``window + 1`` snapshots). ``gamma`` only matters for
    students: it blends their own reconstruction loss against matching the
    teacher's soft reconstruction.
    """

    window: int = 3
    heads: int = 3
    hidden_dim: int = 32
    embed_dim: int = 16
    lr: float = 1e-3
    epochs: int = 200
    gamma: float = 0.5
    seed: int = 0
    role: str = "teacher"

    def __post_init__(self):
        if self.window < 0:
            raise ConfigError(f"window must be >= 0, got {self.window}")
        if self.heads < 1:
            raise ConfigError(f"heads must be >= 1, got {self.heads}")
        if not 0 < self.embed_dim <= self.hidden_dim:
            raise ConfigError(f"need 0 < embed_dim <= hidden_dim, got "
                              f"{self.embed_dim} and {self.hidden_dim}")
        if self.lr <= 0:
            raise ConfigError(f"lr must be positive, got {self.lr}")
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")
        if not 0.0 <= self.gamma <= 1.0:
            raise ConfigError(f"gamma must be in [0, 1], got {self.gamma}")
        if self.role not in ROLES:
            raise ConfigError(f"role must be one of {ROLES}, got {self.role!r}")


def teacher_defaults(**overrides) -> ModelConfig:
    return replace(ModelConfig(role="teacher"), **overrides)


def student_defaults(**overrides) -> ModelConfig:
    """Compact distillation target. Students are around five times
    smaller than teachers, so the default schedule runs them longer and
    slightly hotter for a comparable wall-clock budget."""
    base = ModelConfig(heads=1, hidden_dim=8, embed_dim=4, role="student",
                       epochs=600, lr=2e-3)
    return replace(base, **overrides)


class GcnChain:
    """Parameters of one window model, all tape leaves.

    ``w1_first`` covers every registered node (n_global rows); the later
    first-layer matrices are derived during the forward pass and are not
    leaves. ``registry`` is carried along for persistence.
    """

    def __init__(self, config: ModelConfig, n_global: int, w1_first: Tensor,
                 w2: list[Tensor], transitions: list[Transition],
                 registry: dict[int, int] | None = None):
        self.config = config
        self.n_global = n_global
        self.w1_first = w1_first
        self.w2 = w2
        self.transitions = transitions
        self.registry = dict(registry) if registry else {}
        self._validate()

    def _validate(self) -> None:
        cfg = self.config
        d1, d2 = cfg.hidden_dim, cfg.embed_dim
        if self.n_global < 1:
            raise ConfigError(f"n_global must be positive, got {self.n_global}")
        if self.w1_first.shape != (self.n_global, d1):
            raise ShapeError(f"w1 shape {self.w1_first.shape} does not match "
                             f"({self.n_global}, {d1})")
        if len(self.w2) != cfg.window + 1:
            raise ShapeError(f"expected {cfg.window + 1} second-layer matrices, "
                             f"got {len(self.w2)}")
        for t in self.w2:
            if t.shape != (d1, d2):
                raise ShapeError(f"w2 shape {t.shape} does not match ({d1}, {d2})")
        if len(self.transitions) != cfg.window:
            raise ShapeError(f"expected {cfg.window} transitions, got {len(self.transitions)}")
        for tr in self.transitions:
            if len(tr.heads) != cfg.heads:
                raise ShapeError(f"transition with {len(tr.heads)} heads, expected {cfg.heads}")

    @classmethod
    def init(cls, config: ModelConfig, n_global: int,
             registry: dict[int, int] | None = None) -> "GcnChain":
        """Seeded uniform init: [-r, r] with r = 1/sqrt(hidden) for the
        first layer and attention, Glorot-uniform for the output layer."""
        rng = np.random.default_rng(config.seed)
        d1, d2 = config.hidden_dim, config.embed_dim
        r = 1.0 / np.sqrt(d1)
        r_out = np.sqrt(6.0 / (d1 + d2))

        def draw(shape, name, scale=r):
            return param(rng.uniform(-scale, scale, size=shape), name)

        w1 = draw((n_global, d1), "w1/0")
        w2 = [draw((d1, d2), f"w2/{i}", r_out) for i in range(config.window + 1)]
        transitions = []
        for t in range(config.window):
            heads = [AttentionHead(transform=draw((d1, d1), f"attn/{t}/{j}/transform"),
                                   score_vec=draw((2 * d1, 1), f"attn/{t}/{j}/score"))
                     for j in range(config.heads)]
            transitions.append(Transition(heads=heads))
        return cls(config, n_global, w1, w2, transitions, registry)

    def trainable(self) -> dict[str, Tensor]:
        """Named leaves in a fixed, reproducible order."""
        out: dict[str, Tensor] = {"w1/0": self.w1_first}
        for i, t in enumerate(self.w2):
            out[f"w2/{i}"] = t
        for t, tr in enumerate(self.transitions):
            for j, head in enumerate(tr.heads):
                out[f"attn/{t}/{j}/transform"] = head.transform
                out[f"attn/{t}/{j}/score"] = head.score_vec
        return out

    def param_arrays(self) -> dict[str, Array]:
        return {k: t.value.copy() for k, t in self.trainable().items()}

    def param_digest(self) -> str:
        h = hashlib.sha256()
        for name, arr in self.param_arrays().items():
            h.update(name.encode())
            h.update(arr.astype("<f8").tobytes())
        return h.hexdigest()[:16]

    def forward(self, window: list[SnapshotGraph],
                a_hats: list[Array] | None = None) -> list[Tensor]:
        """Embeddings for every window snapshot, recorded on the tape."""
        if len(window) != self.config.window + 1:
            raise ConfigError(f"window of {len(window)} snapshots for a model "
                              f"spanning {self.config.window + 1}")
        for g in window:
            if g.features is not None:
                raise ConfigError("chained models require identity features")
        if a_hats is None:
            a_hats = [normalize_adjacency(g) for g in window]
        zs: list[Tensor] = []
        w1 = self.w1_first
        for i, g in enumerate(window):
            if i > 0:
                w1 = evolve_weights(g, self.transitions[i - 1], w1)
            z = gcn_forward(a_hats[i], identity_features(g), GcnParams(w1=w1, w2=self.w2[i]))
            zs.append(z)
        return zs

    def embeddings(self, window: list[SnapshotGraph]) -> Embeddings:
        """Inference-only final-snapshot embeddings."""
        z = self.forward(window)[-1]
        return Embeddings(z=z.value.copy(), ids=window[-1].nodes)


def reconstruction_loss(z, g: SnapshotGraph) -> Tensor:
    """Root mean squared gap between sigmoid pair scores and the adjacency.

    The target matrix is the snapshot's weighted adjacency with a zero
    diagonal; the mean runs over all n^2 ordered pairs.
    """
    zt = z if isinstance(z, Tensor) else Tensor(z)
    if zt.value.ndim != 2 or zt.shape[0] != g.n:
        raise ShapeError(f"embeddings with {zt.shape} rows for a {g.n}-node snapshot")
    target = Tensor(g.adjacency())
    scores = sigmoid(matmul(zt, transpose(zt)))
    return sqrt(mean(square(sub(scores, target))))


def soft_scores(z: Array) -> Array:
    """Sigmoid pair-score matrix of a fixed embedding (no gradient)."""
    z = np.asarray(z, dtype=np.float64)
    return expit(z @ z.T)


def distillation_loss(z_student, z_teacher, g: SnapshotGraph, gamma: float) -> Tensor:
    """Blend of matching the teacher's soft scores and fitting the data.

    ``(1 - gamma)`` weights the root mean squared deviation between the
    student's and the teacher's sigmoid pair scores; ``gamma`` weights the
    student's own reconstruction loss. The teacher side is a constant.
    At the boundaries only the active term is evaluated, so ``gamma = 1``
    reproduces plain reconstruction training exactly.
    """
    if not 0.0 <= gamma <= 1.0:
        raise ConfigError(f"gamma must be in [0, 1], got {gamma}")
    z_t = z_teacher.z if isinstance(z_teacher, Embeddings) else np.asarray(z_teacher)
    return _distillation_from_soft(z_student, soft_scores(z_t), g, gamma)


def _distillation_from_soft(z_student, soft_target: Array, g: SnapshotGraph,
                            gamma: float) -> Tensor:
    zs = z_student if isinstance(z_student, Tensor) else Tensor(z_student)
    if zs.value.ndim != 2 or zs.shape[0] != g.n:
        raise ShapeError(f"student embeddings with {zs.shape} rows for a "
                         f"{g.n}-node snapshot")
    if gamma == 1.0:
        return reconstruction_loss(zs, g)
    if soft_target.shape != (g.n, g.n):
        raise ShapeError(f"soft target shape {soft_target.shape} does not match "
                         f"({g.n}, {g.n})")
    student_scores = sigmoid(matmul(zs, transpose(zs)))
    teacher_term = sqrt(mean(square(sub(student_scores, Tensor(soft_target)))))
    if gamma == 0.0:
        return teacher_term
    return add(scale(teacher_term, 1.0 - gamma), scale(reconstruction_loss(zs, g), gamma))
