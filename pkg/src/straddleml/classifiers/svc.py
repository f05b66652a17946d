"""RBF-kernel support vector classifier with probability calibration.

Training uses a simplified SMO: sweep over candidates violating the KKT
conditions, pair each with the partner maximizing |E_i - E_j|, and solve the
two-variable subproblem in closed form under the box [0, C].  Features are
standardized first and gamma defaults to 1 / (n_features * X.var()) on the
standardized matrix.

The margin f(x) has no probability meaning on its own, so a one-dimensional
logistic sigma(A * f + B) is fitted on the training margins by Newton steps
with a tiny L2 term to keep separable fits finite.
"""

from __future__ import annotations

import numpy as np

from .base import Standardizer
from .logistic import _sigmoid

_ALPHA_TOL = 1e-5
_CALIBRATION_L2 = 1e-6


def _rbf(A: np.ndarray, B: np.ndarray, gamma: float) -> np.ndarray:
    aa = (A * A).sum(axis=1)[:, None]
    bb = (B * B).sum(axis=1)[None, :]
    d2 = np.maximum(aa + bb - 2.0 * (A @ B.T), 0.0)
    return np.exp(-gamma * d2)


def _fit_calibration(scores: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """Newton fit of sigma(A * score + B) against binary labels."""
    theta = np.zeros(2)
    Z = np.column_stack([scores, np.ones_like(scores)])
    yf = y.astype(float)
    for _ in range(100):
        p = _sigmoid(Z @ theta)
        grad = Z.T @ (p - yf) + _CALIBRATION_L2 * theta
        h = p * (1.0 - p)
        hess = (Z * h[:, None]).T @ Z + _CALIBRATION_L2 * np.eye(2)
        step = np.linalg.solve(hess, grad)
        theta -= step
        if np.abs(step).max() < 1e-10:
            break
    return float(theta[0]), float(theta[1])


class SVCModel:
    def __init__(
        self,
        standardizer: Standardizer,
        support_X: np.ndarray,
        support_coef: np.ndarray,
        bias: float,
        gamma: float,
        calib_A: float,
        calib_B: float,
        n_iter: int,
    ) -> None:
        self.standardizer = standardizer
        self.support_X = support_X
        self.support_coef = support_coef
        self.bias = bias
        self.gamma = gamma
        self.calib_A = calib_A
        self.calib_B = calib_B
        self.n_iter = n_iter

    @classmethod
    def fit(
        cls,
        X: np.ndarray,
        y: np.ndarray,
        C: float = 1.0,
        gamma: float | str = "scale",
        tol: float = 1e-3,
        max_passes: int = 10000,
    ) -> "SVCModel":
        scaler = Standardizer().fit(X)
        Xs = scaler.transform(X)
        if gamma == "scale":
            var = float(Xs.var())
            gamma_val = 1.0 / (Xs.shape[1] * var) if var > 0 else 1.0
        else:
            gamma_val = float(gamma)
        s = 2.0 * np.asarray(y, dtype=float) - 1.0
        n = len(Xs)
        K = _rbf(Xs, Xs, gamma_val)
        alpha = np.zeros(n)
        b = 0.0
        F = np.zeros(n)  # running f(x_i) = sum_j alpha_j s_j K_ij + b

        passes = 0
        while passes < max_passes:
            changed = 0
            for i in range(n):
                Ei = F[i] - s[i]
                if not (
                    (s[i] * Ei < -tol and alpha[i] < C)
                    or (s[i] * Ei > tol and alpha[i] > 0.0)
                ):
                    continue
                E = F - s
                j = int(np.argmax(np.abs(E - Ei)))
                if j == i:
                    continue
                Ej = E[j]
                eta = 2.0 * K[i, j] - K[i, i] - K[j, j]
                if eta >= 0.0:
                    continue
                if s[i] != s[j]:
                    low = max(0.0, alpha[j] - alpha[i])
                    high = min(C, C + alpha[j] - alpha[i])
                else:
                    low = max(0.0, alpha[i] + alpha[j] - C)
                    high = min(C, alpha[i] + alpha[j])
                if low >= high:
                    continue
                aj_new = np.clip(alpha[j] - s[j] * (Ei - Ej) / eta, low, high)
                if abs(aj_new - alpha[j]) < _ALPHA_TOL:
                    continue
                ai_new = alpha[i] + s[i] * s[j] * (alpha[j] - aj_new)
                di = s[i] * (ai_new - alpha[i])
                dj = s[j] * (aj_new - alpha[j])
                b1 = b - Ei - di * K[i, i] - dj * K[i, j]
                b2 = b - Ej - di * K[i, j] - dj * K[j, j]
                if 0.0 < ai_new < C:
                    b_new = b1
                elif 0.0 < aj_new < C:
                    b_new = b2
                else:
                    b_new = 0.5 * (b1 + b2)
                F += di * K[i] + dj * K[j] + (b_new - b)
                alpha[i] = ai_new
                alpha[j] = aj_new
                b = b_new
                changed += 1
            passes += 1
            if changed == 0:
                # pair selection is deterministic, so a clean pass is terminal
                break

        support = alpha > 0.0
        coef = alpha[support] * s[support]
        margins = K[:, support] @ coef + b
        A, B = _fit_calibration(margins, np.asarray(y))
        return cls(
            standardizer=scaler,
            support_X=Xs[support],
            support_coef=coef,
            bias=b,
            gamma=gamma_val,
            calib_A=A,
            calib_B=B,
            n_iter=passes,
        )

    def decision_function(self, X: np.ndarray) -> np.ndarray:
        Q = self.standardizer.transform(np.asarray(X, dtype=float))
        if len(self.support_coef) == 0:
            return np.full(len(Q), self.bias)
        return _rbf(Q, self.support_X, self.gamma) @ self.support_coef + self.bias

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return _sigmoid(self.calib_A * self.decision_function(X) + self.calib_B)
