"""Soft-margin linear SVM trained by dual coordinate descent.

The bias is folded into the weight vector through a constant input of 1,
so the solver minimises ``0.5 * (|w|^2 + b^2) + C * sum(hinge)`` and the
dual has box constraints only (no equality constraint).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DimensionMismatch, SingleClass

TOL = 1e-6
MAX_PASSES = 10000


@dataclass
class LinearSVMModel:
    weights: np.ndarray
    bias: float
    C: float
    mean: np.ndarray
    scale: np.ndarray
    dual_objective: list = field(default_factory=list)
    n_passes: int = 0

    @property
    def dim(self) -> int:
        return len(self.weights)

    def standardize(self, X):
        return (np.asarray(X, dtype=np.float64) - self.mean) / self.scale

    def decision_function(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.dim:
            raise DimensionMismatch(f"model expects {self.dim} inputs, got {X.shape[1]}")
        return self.standardize(X) @ self.weights + self.bias

    def predict(self, X) -> np.ndarray:
        """1 = depressed; a zero score goes to depressed."""
        return (self.decision_function(X) >= 0).astype(int)


def fit_standardizer(X: np.ndarray):
    mean = X.mean(axis=0)
    scale = X.std(axis=0)
    scale = np.where(scale > 0, scale, 1.0)
    return mean, scale


def svm_train(X, y, C: float = 1.0, tol: float = TOL, max_passes: int = MAX_PASSES) -> LinearSVMModel:
    X = np.asarray(X, dtype=np.float64)
    y01 = np.asarray(y).astype(int)
    if X.ndim != 2 or len(X) != len(y01):
        raise DimensionMismatch(f"X {X.shape} does not match {len(y01)} labels")
    if len(np.unique(y01)) < 2:
        raise SingleClass("training labels contain a single class")
    mean, scale = fit_standardizer(X)
    Z = np.hstack([(X - mean) / scale, np.ones((len(X), 1))])
    ys = np.where(y01 == 1, 1.0, -1.0)
    n = len(Z)
    q_diag = np.einsum("ij,ij->i", Z, Z)
    alpha = np.zeros(n)
    w = np.zeros(Z.shape[1])
    trace = []
    passes = 0
    for passes in range(1, max_passes + 1):
        pg_max, pg_min = -np.inf, np.inf
        for i in range(n):
            g = ys[i] * (w @ Z[i]) - 1.0
            a = alpha[i]
            if a <= 0.0:
                pg = min(g, 0.0)
            elif a >= C:
                pg = max(g, 0.0)
            else:
                pg = g
            pg_max = max(pg_max, pg)
            pg_min = min(pg_min, pg)
            if pg != 0.0:
                a_new = min(max(a - g / q_diag[i], 0.0), C)
                if a_new != a:
                    w += (a_new - a) * ys[i] * Z[i]
                    alpha[i] = a_new
        trace.append(0.5 * (w @ w) - alpha.sum())
        if pg_max - pg_min < tol:
            break
    return LinearSVMModel(w[:-1].copy(), float(w[-1]), float(C), mean, scale, trace, passes)


def svm_predict(m: LinearSVMModel, x):
    """Label (1 = depressed) and margin score for one input vector."""
    score = float(m.decision_function(x)[0])
    return int(score >= 0), score
