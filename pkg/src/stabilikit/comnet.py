"""Fully connected CoM regressor: forward pass, backprop, and training loop.

The network maps hip-centered, flattened, z-scored joint coordinates to a
hip-relative 3D CoM offset. Two hidden layers (batch-norm, ReLU, dropout)
feed a linear 3-unit output head. Training uses mini-batch Adam on an RMSE
loss with a piecewise-constant learning-rate schedule, and is deterministic
given the seed: initialization, shuffle order, and dropout masks all come
from one seeded generator.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Hashable, NamedTuple, Optional, Sequence

import numpy as np

from .errors import (
    EmptyDataset,
    InsufficientSubjects,
    MissingObservation,
    NonFiniteLoss,
    ShapeMismatch,
)
from .geometry import Point3
from .pose import LAYOUTS, Pose3dFrame, hip_center

DEFAULT_WIDTH = 3072
BN_EPS = 1e-5
BN_MOMENTUM = 0.1
ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8

TRAINABLE_GROUPS = ("w1", "b1", "gamma1", "beta1", "w2", "b2", "gamma2", "beta2", "w3", "b3")


@dataclass
class TrainConfig:
    epochs: int = 25
    initial_lr: float = 5e-4
    lr_drop_factor: float = 0.25
    lr_drop_every: int = 5  # epochs
    batch_size: int = 256
    seed: int = 0
    width: int = DEFAULT_WIDTH
    dropout_rate: float = 0.5

    def __post_init__(self):
        if min(self.epochs, self.lr_drop_every, self.batch_size, self.width) <= 0:
            raise ValueError("epochs, lr_drop_every, batch_size and width must be positive")
        if self.initial_lr <= 0 or self.lr_drop_factor <= 0:
            raise ValueError("learning rates must be positive")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError("dropout_rate must be in [0, 1)")

    def learning_rate(self, epoch: int) -> float:
        return self.initial_lr * self.lr_drop_factor ** (epoch // self.lr_drop_every)


@dataclass
class MlpParams:
    """Weights, batch-norm state and input normalization of the regressor."""

    layout_name: str
    n_features: int
    width: int
    w1: np.ndarray
    b1: np.ndarray
    gamma1: np.ndarray
    beta1: np.ndarray
    run_mean1: np.ndarray
    run_var1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    gamma2: np.ndarray
    beta2: np.ndarray
    run_mean2: np.ndarray
    run_var2: np.ndarray
    w3: np.ndarray
    b3: np.ndarray
    feat_mean: np.ndarray
    feat_std: np.ndarray
    dropout_rate: float = 0.5
    bn_eps: float = BN_EPS
    bn_momentum: float = BN_MOMENTUM

    def __post_init__(self):
        for name in TRAINABLE_GROUPS + ("run_mean1", "run_var1", "run_mean2", "run_var2",
                                        "feat_mean", "feat_std"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            setattr(self, name, arr)
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"non-finite values in parameter group {name}")
        if np.any(self.run_var1 <= 0) or np.any(self.run_var2 <= 0):
            raise ValueError("running variances must be positive")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError("dropout_rate must be in [0, 1)")

    def trainable(self) -> dict:
        return {name: getattr(self, name) for name in TRAINABLE_GROUPS}


def init_params(
    layout_name: str,
    width: int = DEFAULT_WIDTH,
    *,
    rng: Optional[np.random.Generator] = None,
    dropout_rate: float = 0.5,
) -> MlpParams:
    """He-initialized parameters for the given joint-set layout."""
    rng = rng or np.random.default_rng(0)
    f = 3 * LAYOUTS[layout_name].n_joints
    w = width
    return MlpParams(
        layout_name=layout_name,
        n_features=f,
        width=w,
        w1=rng.normal(0.0, np.sqrt(2.0 / f), size=(f, w)),
        b1=np.zeros(w),
        gamma1=np.ones(w),
        beta1=np.zeros(w),
        run_mean1=np.zeros(w),
        run_var1=np.ones(w),
        w2=rng.normal(0.0, np.sqrt(2.0 / w), size=(w, w)),
        b2=np.zeros(w),
        gamma2=np.ones(w),
        beta2=np.zeros(w),
        run_mean2=np.zeros(w),
        run_var2=np.ones(w),
        w3=rng.normal(0.0, np.sqrt(1.0 / w), size=(w, 3)),
        b3=np.zeros(3),
        feat_mean=np.zeros(f),
        feat_std=np.ones(f),
        dropout_rate=dropout_rate,
    )


def pose_features(pose: Pose3dFrame) -> np.ndarray:
    """Hip-centered flattened joint coordinates (raw mm, before z-scoring)."""
    if not pose.valid.all():
        bad = [pose.layout.joints[i] for i in np.flatnonzero(~pose.valid)]
        raise MissingObservation(f"invalid joints in regressor input: {', '.join(bad)}")
    hip = hip_center(pose).as_array()
    return (pose.positions - hip).ravel()


class _Cache(NamedTuple):
    x: np.ndarray
    layers: list


def _bn_forward(a, gamma, beta, run_mean, run_var, eps, mode, frozen):
    if mode == "train" and not frozen:
        mu = a.mean(axis=0)
        var = a.var(axis=0)
    else:
        mu, var = run_mean, run_var
    ivar = 1.0 / np.sqrt(var + eps)
    xhat = (a - mu) * ivar
    return gamma * xhat + beta, xhat, ivar, mu, var


def _forward(
    features: np.ndarray,
    params: MlpParams,
    mode: str = "eval",
    *,
    rng: Optional[np.random.Generator] = None,
    frozen_bn: bool = False,
    update_running: bool = True,
    want_cache: bool = False,
):
    """Batched forward pass; features is (B, F) raw (unnormalized) input."""
    if features.ndim != 2 or features.shape[1] != params.n_features:
        raise ShapeMismatch(
            f"expected (batch, {params.n_features}) features, got {features.shape}"
        )
    if mode not in ("train", "eval"):
        raise ValueError(f"mode must be 'train' or 'eval', got {mode!r}")
    train = mode == "train"
    if train and params.dropout_rate > 0 and rng is None:
        raise ValueError("training-mode forward with dropout needs an rng")

    x = (features - params.feat_mean) / params.feat_std
    h = x
    layers = []
    for w, b, gamma, beta, rm, rv in (
        (params.w1, params.b1, params.gamma1, params.beta1, params.run_mean1, params.run_var1),
        (params.w2, params.b2, params.gamma2, params.beta2, params.run_mean2, params.run_var2),
    ):
        a = h @ w + b
        z, xhat, ivar, mu, var = _bn_forward(
            a, gamma, beta, rm, rv, params.bn_eps, mode, frozen_bn
        )
        if train and not frozen_bn and update_running:
            m = params.bn_momentum
            rm *= 1.0 - m
            rm += m * mu
            rv *= 1.0 - m
            rv += m * var
        r = np.maximum(z, 0.0)
        if train and params.dropout_rate > 0:
            mask = (rng.random(r.shape) >= params.dropout_rate) / (1.0 - params.dropout_rate)
            h_next = r * mask
        else:
            mask = None
            h_next = r
        layers.append((h, a, xhat, ivar, z, mask))
        h = h_next
    out = h @ params.w3 + params.b3
    if want_cache:
        return out, _Cache(x=x, layers=layers + [(h, None, None, None, None, None)])
    return out


def rmse_loss(pred: np.ndarray, target: np.ndarray):
    """Square root of the mean squared error over the whole mini-batch.

    Returns (loss, dloss/dpred); the gradient is defined as zero at exactly
    zero loss.
    """
    diff = pred - target
    with np.errstate(over="ignore"):
        mse = float(np.mean(diff**2))
    loss = float(np.sqrt(mse))
    if loss == 0.0:
        return 0.0, np.zeros_like(pred)
    return loss, diff / (diff.size * loss)


def _backward(params: MlpParams, cache: _Cache, dout: np.ndarray, *, frozen_bn: bool) -> dict:
    grads = {}
    h2 = cache.layers[2][0]
    grads["w3"] = h2.T @ dout
    grads["b3"] = dout.sum(axis=0)
    dh = dout @ params.w3.T
    for idx, (w_name, g_name) in ((1, ("w2", "gamma2")), (0, ("w1", "gamma1"))):
        h_in, a, xhat, ivar, z, mask = cache.layers[idx]
        if mask is not None:
            dh = dh * mask
        dz = dh * (z > 0)
        gamma = getattr(params, g_name)
        grads[g_name] = (dz * xhat).sum(axis=0)
        grads[g_name.replace("gamma", "beta")] = dz.sum(axis=0)
        dxhat = dz * gamma
        if frozen_bn:
            da = dxhat * ivar
        else:
            b = dz.shape[0]
            da = (ivar / b) * (
                b * dxhat - dxhat.sum(axis=0) - xhat * (dxhat * xhat).sum(axis=0)
            )
        w = getattr(params, w_name)
        grads[w_name] = h_in.T @ da
        grads[w_name.replace("w", "b")] = da.sum(axis=0)
        dh = da @ w.T
    return grads


def loss_and_grads(
    params: MlpParams,
    features: np.ndarray,
    targets: np.ndarray,
    *,
    mode: str = "train",
    rng: Optional[np.random.Generator] = None,
    frozen_bn: bool = False,
    update_running: bool = True,
):
    out, cache = _forward(
        features,
        params,
        mode,
        rng=rng,
        frozen_bn=frozen_bn,
        update_running=update_running,
        want_cache=True,
    )
    loss, dout = rmse_loss(out, targets)
    grads = _backward(params, cache, dout, frozen_bn=frozen_bn)
    return loss, grads


def comnet_forward(
    pose: Pose3dFrame,
    params: MlpParams,
    mode: str = "eval",
    *,
    rng: Optional[np.random.Generator] = None,
) -> Point3:
    """Predict the world-frame CoM for one pose.

    Eval mode uses running batch-norm statistics and no dropout, and is
    fully deterministic.
    """
    if pose.layout.name != params.layout_name:
        raise ShapeMismatch(
            f"pose layout {pose.layout.name} does not match model layout {params.layout_name}"
        )
    feats = pose_features(pose)[None, :]
    offset = _forward(feats, params, mode, rng=rng)[0]
    hip = hip_center(pose).as_array()
    return Point3(*(hip + offset))


class _Adam:
    def __init__(self, params: MlpParams):
        self.m = {k: np.zeros_like(v) for k, v in params.trainable().items()}
        self.v = {k: np.zeros_like(v) for k, v in params.trainable().items()}
        self.t = 0

    def step(self, params: MlpParams, grads: dict, lr: float):
        self.t += 1
        bc1 = 1.0 - ADAM_BETA1**self.t
        bc2 = 1.0 - ADAM_BETA2**self.t
        for k, g in grads.items():
            m = self.m[k]
            v = self.v[k]
            m *= ADAM_BETA1
            m += (1.0 - ADAM_BETA1) * g
            v *= ADAM_BETA2
            v += (1.0 - ADAM_BETA2) * g * g
            theta = getattr(params, k)
            theta -= lr * (m / bc1) / (np.sqrt(v / bc2) + ADAM_EPS)


def training_arrays(dataset: Sequence) -> tuple:
    """Stack (pose, gt_com) pairs into feature and hip-relative target arrays."""
    feats = []
    targets = []
    for pose, gt_com in dataset:
        feats.append(pose_features(pose))
        targets.append(gt_com.as_array() - hip_center(pose).as_array())
    return np.array(feats), np.array(targets)


def comnet_train(
    dataset: Sequence,
    cfg: TrainConfig,
    *,
    layout_name: Optional[str] = None,
    history: Optional[list] = None,
) -> MlpParams:
    """Train the regressor on (Pose3dFrame, Point3 GT CoM) pairs.

    Input normalization statistics come from this training set only. If
    history is a list, the mean loss of each epoch is appended to it.
    """
    if len(dataset) == 0:
        raise EmptyDataset("no training samples")
    layout_name = layout_name or dataset[0][0].layout.name
    if any(pose.layout.name != layout_name for pose, _ in dataset):
        raise ShapeMismatch("all training poses must share one layout")

    x, y = training_arrays(dataset)
    rng = np.random.default_rng(cfg.seed)
    params = init_params(layout_name, cfg.width, rng=rng, dropout_rate=cfg.dropout_rate)
    params.feat_mean = x.mean(axis=0)
    std = x.std(axis=0)
    std[std < 1e-12] = 1.0
    params.feat_std = std

    adam = _Adam(params)
    n = x.shape[0]
    for epoch in range(cfg.epochs):
        lr = cfg.learning_rate(epoch)
        perm = rng.permutation(n)
        losses = []
        for start in range(0, n, cfg.batch_size):
            idx = perm[start : start + cfg.batch_size]
            loss, grads = loss_and_grads(params, x[idx], y[idx], mode="train", rng=rng)
            if not np.isfinite(loss):
                raise NonFiniteLoss(
                    f"loss became {loss} at epoch {epoch}, step {start // cfg.batch_size} "
                    f"(lr={lr}, batch={len(idx)})"
                )
            adam.step(params, grads, lr)
            losses.append(loss)
        if history is not None:
            history.append(float(np.mean(losses)))
    return params


def evaluate_com_errors(
    dataset: Sequence,
    predict: Callable[[Pose3dFrame], Point3],
) -> np.ndarray:
    """Per-sample 3D Euclidean error (mm) of a CoM predictor against GT labels."""
    errors = []
    for pose, gt_com in dataset:
        pred = predict(pose)
        errors.append(float(np.linalg.norm(pred.as_array() - gt_com.as_array())))
    return np.array(errors)


def gradient_check(
    params: MlpParams,
    features: np.ndarray,
    targets: np.ndarray,
    *,
    frozen_bn: bool = True,
    step: float = 1e-5,
    max_per_group: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
) -> dict:
    """Central finite-difference check of every trainable parameter group.

    Dropout is disabled for the check. Returns the max relative error per
    group, comparing analytic gradients against (L(t+h) - L(t-h)) / 2h.
    """
    import copy

    p = copy.deepcopy(params)
    p.dropout_rate = 0.0
    rng = rng or np.random.default_rng(0)

    def loss_only():
        out = _forward(features, p, "train", frozen_bn=frozen_bn, update_running=False)
        return rmse_loss(out, targets)[0]

    _, grads = loss_and_grads(
        p, features, targets, mode="train", frozen_bn=frozen_bn, update_running=False
    )
    worst = {}
    for name in TRAINABLE_GROUPS:
        theta = getattr(p, name)
        flat = theta.ravel()
        idxs = np.arange(flat.size)
        if max_per_group is not None and flat.size > max_per_group:
            idxs = rng.choice(flat.size, size=max_per_group, replace=False)
        g_flat = grads[name].ravel()
        err = 0.0
        for i in idxs:
            orig = flat[i]
            h = step * max(1.0, abs(orig))
            flat[i] = orig + h
            lp = loss_only()
            flat[i] = orig - h
            lm = loss_only()
            flat[i] = orig
            fd = (lp - lm) / (2.0 * h)
            denom = max(abs(g_flat[i]), abs(fd), 1e-6)
            err = max(err, abs(g_flat[i] - fd) / denom)
        worst[name] = err
    return worst


class LosoSplit(NamedTuple):
    subject_id: Hashable
    train: tuple
    test: tuple


def loso_splits(takes: Sequence, subject_of: Callable) -> list:
    """One leave-one-subject-out split per subject.

    Each subject's takes form the test set of exactly one split; everything
    else is the training set.
    """
    subjects = sorted({subject_of(t) for t in takes})
    if len(subjects) < 2:
        raise InsufficientSubjects(f"need >= 2 subjects, got {len(subjects)}")
    splits = []
    for s in subjects:
        test = tuple(t for t in takes if subject_of(t) == s)
        train = tuple(t for t in takes if subject_of(t) != s)
        splits.append(LosoSplit(s, train, test))
    return splits
