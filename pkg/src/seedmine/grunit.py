"""Graph-based global reasoning unit, toy classifier head, and training loop.

The unit projects grid features onto a small set of latent nodes, mixes the
nodes once over a learned adjacency, projects back to the grid, and adds the
result to the input (residual). All math runs in float64 so the analytic
gradients can be checked against central finite differences.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field

import numpy as np

from . import formats
from .errors import DivergenceError, ParameterError, ShapeError
from .maps import AttentionStack


@dataclass
class FeatureGrid:
    """Grid features flattened to (L, K), L = height * width."""

    values: np.ndarray
    height: int
    width: int

    def __post_init__(self):
        self.values = np.ascontiguousarray(self.values, dtype=np.float64)
        if self.values.ndim != 2:
            raise ShapeError(f"features must be (L, K), got shape {self.values.shape}")
        if self.values.shape[0] != self.height * self.width:
            raise ShapeError(
                f"L={self.values.shape[0]} does not match {self.height}x{self.width}"
            )
        if not np.isfinite(self.values).all():
            raise ParameterError("features must be finite")

    @property
    def loc_count(self) -> int:
        return self.values.shape[0]

    @property
    def feat_dim(self) -> int:
        return self.values.shape[1]

    def save(self, path) -> None:
        grid = self.values.T.reshape(self.feat_dim, self.height, self.width)
        formats.write_fmap(path, grid)

    @classmethod
    def load(cls, path) -> "FeatureGrid":
        grid = formats.read_fmap(path)  # (K, H, W)
        k, h, w = grid.shape
        return cls(grid.reshape(k, h * w).T, height=h, width=w)


@dataclass
class GrParams:
    """Reasoning-unit weights plus the 1x1 classifier head.

    node_proj    (N, L) grid-to-node projection; its transpose projects back
    adjacency    (N, N) latent node adjacency
    state_update (K, K) node state update
    cls_weight   (C, K), cls_bias (C,) per-pixel classifier
    """

    node_proj: np.ndarray
    adjacency: np.ndarray
    state_update: np.ndarray
    cls_weight: np.ndarray
    cls_bias: np.ndarray

    def __post_init__(self):
        for name in ("node_proj", "adjacency", "state_update", "cls_weight", "cls_bias"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=np.float64)
            if not np.isfinite(arr).all():
                raise ParameterError(f"{name} must be finite")
            setattr(self, name, arr)
        n, l = self.node_proj.shape
        if self.adjacency.shape != (n, n):
            raise ShapeError(f"adjacency: expected {(n, n)}, got {self.adjacency.shape}")
        k = self.state_update.shape[0]
        if self.state_update.shape != (k, k):
            raise ShapeError(f"state_update must be square, got {self.state_update.shape}")
        c = self.cls_weight.shape[0]
        if self.cls_weight.shape != (c, k):
            raise ShapeError(f"cls_weight: expected ({c}, {k}), got {self.cls_weight.shape}")
        if self.cls_bias.shape != (c,):
            raise ShapeError(f"cls_bias: expected ({c},), got {self.cls_bias.shape}")

    @property
    def node_count(self) -> int:
        return self.node_proj.shape[0]

    @property
    def loc_count(self) -> int:
        return self.node_proj.shape[1]

    @property
    def feat_dim(self) -> int:
        return self.state_update.shape[0]

    @property
    def class_count(self) -> int:
        return self.cls_weight.shape[0]

    def copy(self) -> "GrParams":
        return copy.deepcopy(self)

    def save(self, path) -> None:
        formats.write_tensor_container(
            path,
            formats.GRPM_MAGIC,
            [self.node_proj, self.adjacency, self.state_update, self.cls_weight, self.cls_bias],
        )

    @classmethod
    def load(cls, path) -> "GrParams":
        arrays = formats.read_tensor_container(path, formats.GRPM_MAGIC)
        if len(arrays) != 5:
            raise formats.FormatError(f"{path}: expected 5 tensors, found {len(arrays)}")
        return cls(*arrays)


@dataclass
class GrGrads:
    node_proj: np.ndarray
    adjacency: np.ndarray
    state_update: np.ndarray
    features: np.ndarray
    cls_weight: np.ndarray | None = None
    cls_bias: np.ndarray | None = None


def init_params(
    node_count: int, feat_dim: int, loc_count: int, class_count: int, seed: int
) -> GrParams:
    """Uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) init; adjacency starts at zero
    so the unit begins as a plain projection."""
    rng = np.random.default_rng(seed)

    def uniform(shape, fan_in):
        bound = 1.0 / np.sqrt(fan_in)
        return rng.uniform(-bound, bound, size=shape)

    return GrParams(
        node_proj=uniform((node_count, loc_count), loc_count),
        adjacency=np.zeros((node_count, node_count)),
        state_update=uniform((feat_dim, feat_dim), feat_dim),
        cls_weight=uniform((class_count, feat_dim), feat_dim),
        cls_bias=np.zeros(class_count),
    )


def _check_features(params: GrParams, x: FeatureGrid) -> None:
    if x.values.shape != (params.loc_count, params.feat_dim):
        raise ShapeError(
            f"features: expected {(params.loc_count, params.feat_dim)}, "
            f"got {x.values.shape}"
        )


def gr_forward(params: GrParams, x: FeatureGrid) -> FeatureGrid:
    """Residual global reasoning pass.

    nodes = P X; mixed = ((I - A) nodes) U; out = X + P^T mixed,
    with P the node projection, A the adjacency, U the state update.
    """
    _check_features(params, x)
    nodes = params.node_proj @ x.values
    eye = np.eye(params.node_count)
    mixed = ((eye - params.adjacency) @ nodes) @ params.state_update
    y = params.node_proj.T @ mixed
    return FeatureGrid(x.values + y, height=x.height, width=x.width)


def gr_backward(params: GrParams, x: FeatureGrid, upstream: np.ndarray) -> GrGrads:
    """Analytic gradients of gr_forward for an (L, K) upstream gradient.

    The projection matrix appears in both the forward and the reverse
    projection, so its gradient sums both contributions.
    """
    _check_features(params, x)
    upstream = np.asarray(upstream, dtype=np.float64)
    if upstream.shape != x.values.shape:
        raise ShapeError(
            f"upstream: expected {x.values.shape}, got {upstream.shape}"
        )
    eye = np.eye(params.node_count)
    mix = eye - params.adjacency
    nodes = params.node_proj @ x.values          # (N, K)
    pre_update = mix @ nodes                     # (N, K)
    mixed = pre_update @ params.state_update     # (N, K)

    d_mixed = params.node_proj @ upstream        # (N, K)
    d_state_update = pre_update.T @ d_mixed      # (K, K)
    d_pre = d_mixed @ params.state_update.T      # (N, K)
    d_adjacency = -(d_pre @ nodes.T)             # (N, N)
    d_nodes = mix.T @ d_pre                      # (N, K)
    d_proj = d_nodes @ x.values.T + mixed @ upstream.T   # (N, L)
    d_features = upstream + params.node_proj.T @ d_nodes
    return GrGrads(
        node_proj=d_proj,
        adjacency=d_adjacency,
        state_update=d_state_update,
        features=d_features,
    )


def classify(params: GrParams, x: FeatureGrid) -> tuple[np.ndarray, AttentionStack]:
    """Per-class image scores and the rectified per-pixel score maps.

    Pixel scores come from the 1x1 classifier applied to the reasoning-unit
    output; image score p_c is the spatial mean, the attention plane for
    class c is max(pixel score, 0).
    """
    out = gr_forward(params, x)
    pixel_scores = out.values @ params.cls_weight.T + params.cls_bias  # (L, C)
    scores = pixel_scores.mean(axis=0)
    cam = np.maximum(pixel_scores, 0.0).T.reshape(
        params.class_count, x.height, x.width
    )
    return scores, AttentionStack(cam)


def classify_backward(params: GrParams, x: FeatureGrid, d_scores: np.ndarray) -> GrGrads:
    """Gradients of the image scores w.r.t. all parameters and the features."""
    out = gr_forward(params, x)
    loc_count = x.loc_count
    d_pixel = np.tile(np.asarray(d_scores, dtype=np.float64) / loc_count, (loc_count, 1))
    d_cls_weight = d_pixel.T @ out.values
    d_cls_bias = d_pixel.sum(axis=0)
    d_out = d_pixel @ params.cls_weight
    grads = gr_backward(params, x, d_out)
    grads.cls_weight = d_cls_weight
    grads.cls_bias = d_cls_bias
    return grads


def mlsm_loss(scores: np.ndarray, present: np.ndarray) -> tuple[float, np.ndarray]:
    """Multi-label soft margin loss and its gradient in the scores.

    loss = -(1/C) sum_c [y_c log sig(p_c) + (1 - y_c) log(1 - sig(p_c))],
    computed via softplus for stability; d loss / d p_c = (sig(p_c) - y_c) / C.
    """
    p = np.asarray(scores, dtype=np.float64)
    y = np.asarray(present, dtype=np.float64)
    if p.ndim != 1 or p.shape != y.shape:
        raise ShapeError(f"scores {p.shape} and labels {y.shape} must be equal 1-d")
    c = p.size
    if c < 1:
        raise ParameterError("need at least one class")
    softplus = np.logaddexp(0.0, p)          # log(1 + e^p)
    softplus_neg = np.logaddexp(0.0, -p)
    loss = float(np.sum(y * softplus_neg + (1.0 - y) * softplus) / c)
    expnt = np.exp(-np.abs(p))
    sigmoid = np.where(p >= 0, 1.0 / (1.0 + expnt), expnt / (1.0 + expnt))
    return loss, (sigmoid - y) / c


def _class_indicator(classes, class_count: int) -> np.ndarray:
    y = np.zeros(class_count)
    for c in classes:
        if not 1 <= c <= class_count:
            raise ParameterError(f"class id {c} outside 1..{class_count}")
        y[c - 1] = 1.0
    return y


@dataclass
class TrainResult:
    params: GrParams
    loss_trace: list[float]
    snapshots: list[GrParams] = field(default_factory=list)


def train_toy(
    dataset,
    *,
    epochs: int,
    learning_rate: float = 1e-3,
    momentum: float = 0.9,
    seed: int = 0,
    node_count: int = 8,
    record_snapshots: bool = False,
) -> TrainResult:
    """Full-batch gradient descent with momentum on mlsm_loss over classify.

    ``dataset`` is a list of (FeatureGrid, iterable of class ids). The loss
    trace holds the pre-update loss of every epoch plus the final loss
    (epochs + 1 entries). Deterministic for a fixed seed.
    """
    if not dataset:
        raise ParameterError("dataset must be non-empty")
    class_count = max(max(classes) for _, classes in dataset)
    first = dataset[0][0]
    params = init_params(
        node_count, first.feat_dim, first.loc_count, class_count, seed
    )
    targets = [_class_indicator(classes, class_count) for _, classes in dataset]

    velocity = {name: np.zeros_like(getattr(params, name)) for name in
                ("node_proj", "adjacency", "state_update", "cls_weight", "cls_bias")}
    trace: list[float] = []
    snapshots: list[GrParams] = []

    def batch_pass():
        total_loss = 0.0
        sums = {name: np.zeros_like(v) for name, v in velocity.items()}
        for (grid, _), y in zip(dataset, targets):
            scores, _ = classify(params, grid)
            loss, d_scores = mlsm_loss(scores, y)
            total_loss += loss
            grads = classify_backward(params, grid, d_scores)
            sums["node_proj"] += grads.node_proj
            sums["adjacency"] += grads.adjacency
            sums["state_update"] += grads.state_update
            sums["cls_weight"] += grads.cls_weight
            sums["cls_bias"] += grads.cls_bias
        n = len(dataset)
        return total_loss / n, {name: g / n for name, g in sums.items()}

    for epoch in range(epochs):
        loss, grads = batch_pass()
        if not np.isfinite(loss):
            raise DivergenceError(epoch, loss)
        trace.append(loss)
        for name, grad in grads.items():
            velocity[name] = momentum * velocity[name] + grad
            setattr(params, name, getattr(params, name) - learning_rate * velocity[name])
        if record_snapshots:
            snapshots.append(params.copy())

    final_loss, _ = batch_pass()
    if not np.isfinite(final_loss):
        raise DivergenceError(epochs, final_loss)
    trace.append(final_loss)
    return TrainResult(params=params, loss_trace=trace, snapshots=snapshots)
