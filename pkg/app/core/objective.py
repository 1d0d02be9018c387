"""Augmented loss L(a; λ) = λ·L_data + (1 − λ)·L_knowledge

Inputs (data points and anchors) are expected on the normalized unit box;
model outputs and landmark output granules are in native output units.
"""

from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from .benchgen import LabeledDataset
from .errors import ConfigurationError, DomainError
from .granulation import GaussianGranule, gaussian_membership
from .landmarks import KnowledgeLandmark
from .network import ModelParameters, backward, forward


@dataclass
class ObjectiveConfig:
    """λ, output normalization, frozen anchors and the landmark set"""
    lam: float
    y_span: float
    anchors: np.ndarray
    landmarks: Sequence[KnowledgeLandmark]

    # anchor activations A_i(x_q) and output-granule arrays, cached once
    activations: np.ndarray = field(init=False, repr=False)
    centers: np.ndarray = field(init=False, repr=False)
    spreads: np.ndarray = field(init=False, repr=False)
    specificities: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not 0.0 <= self.lam <= 1.0:
            raise ConfigurationError(f"lambda must lie in [0, 1], got {self.lam}")
        if not self.y_span > 0:
            raise ConfigurationError("y_span must be > 0")
        self.anchors = np.atleast_2d(np.asarray(self.anchors, dtype=float))
        self.landmarks = list(self.landmarks)
        if self.lam < 1.0 and (self.anchors.shape[0] == 0 or self.anchors.size == 0):
            raise ConfigurationError("anchors must be non-empty when lambda < 1")
        if self.lam < 1.0 and not self.landmarks:
            raise ConfigurationError("landmark set is empty while lambda < 1")
        if self.landmarks:
            self.activations = np.column_stack([lm.input.membership(self.anchors) for lm in self.landmarks])
        else:
            self.activations = np.zeros((self.anchors.shape[0], 0))
        self.centers = np.array([lm.output.center for lm in self.landmarks])
        self.spreads = np.array([lm.output.spread for lm in self.landmarks])
        self.specificities = np.array([lm.output_specificity for lm in self.landmarks])

    def with_lambda(self, lam: float) -> "ObjectiveConfig":
        """Same anchors and landmarks under another λ"""
        return ObjectiveConfig(lam, self.y_span, self.anchors, self.landmarks)


def output_span(targets) -> float:
    """y_span = max − min of the local targets"""
    targets = np.asarray(targets, dtype=float)
    span = float(targets.max() - targets.min()) if targets.size else 0.0
    if not span > 0:
        raise ConfigurationError("local targets have zero span")
    return span


def match_numeric(y, g: GaussianGranule, specificity: Optional[float] = None):
    """B(y)·sp(B)"""
    sp = g.specificity if specificity is None else specificity
    return gaussian_membership(g, y) * sp


def _matching(cfg: ObjectiveConfig, outputs: np.ndarray) -> np.ndarray:
    """V_qi for anchor outputs, shape (N₂, c)"""
    diff = outputs[:, None] - cfg.centers[None, :]
    return np.exp(-diff ** 2 / cfg.spreads ** 2) * cfg.specificities


def data_loss(params: ModelParameters, dataset: LabeledDataset, y_span: float) -> float:
    """Σ (M(x_k) − target_k)² / (N₁·y_span²)"""
    if len(dataset) == 0:
        raise DomainError("dataset is empty")
    residual = forward(params, dataset.inputs) - dataset.targets
    return float(np.sum(residual ** 2) / (len(dataset) * y_span ** 2))


def knowledge_loss(params: ModelParameters, cfg: ObjectiveConfig) -> float:
    """(1/N₂)·Σ_q Σ_i A_i(x_q)·(1 − V_i(x_q))²"""
    if not cfg.landmarks or cfg.anchors.shape[0] == 0:
        if cfg.lam < 1.0:
            raise ConfigurationError("landmarks and anchors are required while lambda < 1")
        return 0.0
    V = _matching(cfg, forward(params, cfg.anchors))
    return float(np.sum(cfg.activations * (1.0 - V) ** 2) / cfg.anchors.shape[0])


def augmented_loss(params: ModelParameters, dataset: LabeledDataset, cfg: ObjectiveConfig) -> float:
    return cfg.lam * data_loss(params, dataset, cfg.y_span) + (1.0 - cfg.lam) * knowledge_loss(params, cfg)


def loss_output_derivative(y_pred, cfg: ObjectiveConfig, targets=None, n_samples: Optional[int] = None):
    """dL/dM per sample (data term, when targets are given) or per anchor (knowledge term)

    Data term: 2λ(M − target)/(N₁·y_span²).
    Knowledge term: Σ_i (1 − λ)(2/N₂)·A_i(x_q)(1 − V_i)(−dV_i/dM), dV_i/dM = V_i·(−2(M − c_i)/σ_i²).
    """
    y_pred = np.asarray(y_pred, dtype=float).reshape(-1)
    if targets is not None:
        targets = np.asarray(targets, dtype=float).reshape(-1)
        n = n_samples or targets.size
        return 2.0 * cfg.lam * (y_pred - targets) / (n * cfg.y_span ** 2)
    if not cfg.landmarks:
        return np.zeros_like(y_pred)
    n = n_samples or cfg.anchors.shape[0]
    V = _matching(cfg, y_pred)
    dV = V * (-2.0 * (y_pred[:, None] - cfg.centers) / cfg.spreads ** 2)
    per_anchor = np.sum(cfg.activations * (1.0 - V) * (-dV), axis=1)
    return (1.0 - cfg.lam) * (2.0 / n) * per_anchor


def loss_and_gradient(params: ModelParameters, dataset: LabeledDataset, cfg: ObjectiveConfig) -> Tuple[float, float, float, ModelParameters]:
    """(L, L_data, L_knowledge, ∇L) in one forward/backward pass over data and anchors"""
    pred = forward(params, dataset.inputs)
    residual = pred - dataset.targets
    l_data = float(np.sum(residual ** 2) / (len(dataset) * cfg.y_span ** 2))
    upstream_data = loss_output_derivative(pred, cfg, targets=dataset.targets)

    if cfg.landmarks and cfg.lam < 1.0:
        anchor_pred = forward(params, cfg.anchors)
        V = _matching(cfg, anchor_pred)
        l_know = float(np.sum(cfg.activations * (1.0 - V) ** 2) / cfg.anchors.shape[0])
        upstream_know = loss_output_derivative(anchor_pred, cfg)
        inputs = np.vstack([dataset.inputs, cfg.anchors])
        upstream = np.concatenate([upstream_data, upstream_know])
    else:
        l_know = knowledge_loss(params, cfg)
        inputs, upstream = dataset.inputs, upstream_data

    total = cfg.lam * l_data + (1.0 - cfg.lam) * l_know
    return total, l_data, l_know, backward(params, inputs, upstream)
