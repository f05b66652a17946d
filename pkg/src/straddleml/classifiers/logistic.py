"""L2-regularized logistic regression trained with BFGS.

Minimizes

    0.5 * w.w + C * sum_i log(1 + exp(-s_i * (x_i.w + c)))

over standardized features, where s_i = 2*y_i - 1.  The intercept c is not
penalized.  Line search is Armijo backtracking, so the recorded objective
history is non-increasing.  Supports warm starting from a previous fit by
carrying coefficients over in raw feature space.
"""

from __future__ import annotations

import numpy as np

from .base import Standardizer

_ARMIJO_C1 = 1e-4
_MAX_BACKTRACKS = 60


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def objective_and_grad(
    theta: np.ndarray, X: np.ndarray, signed_y: np.ndarray, C: float
) -> tuple[float, np.ndarray]:
    """Objective and analytic gradient at theta = (w..., c), labels in {-1, +1}."""
    w, c = theta[:-1], theta[-1]
    z = signed_y * (X @ w + c)
    obj = 0.5 * float(w @ w) + C * float(np.logaddexp(0.0, -z).sum())
    # d/dz log(1 + exp(-z)) = -sigma(-z)
    coef = -C * signed_y * _sigmoid(-z)
    grad = np.empty_like(theta)
    grad[:-1] = w + X.T @ coef
    grad[-1] = coef.sum()
    return obj, grad


class LogisticModel:
    def __init__(
        self,
        standardizer: Standardizer,
        w: np.ndarray,
        c: float,
        C: float,
        obj_history: list[float],
        converged: bool,
    ) -> None:
        self.standardizer = standardizer
        self.w = w
        self.c = c
        self.C = C
        self.obj_history = obj_history
        self.converged = converged

    @classmethod
    def fit(
        cls,
        X: np.ndarray,
        y: np.ndarray,
        C: float = 1.0,
        max_iter: int = 100,
        tol: float = 1e-6,
        warm_start: "LogisticModel | None" = None,
    ) -> "LogisticModel":
        scaler = Standardizer().fit(X)
        Xs = scaler.transform(X)
        s = 2.0 * np.asarray(y, dtype=float) - 1.0
        n_features = X.shape[1]

        theta = np.zeros(n_features + 1)
        if warm_start is not None and warm_start.w.shape == (n_features,):
            w_raw, c_raw = warm_start.raw_coefficients()
            theta[:-1] = w_raw * scaler.scale
            theta[-1] = c_raw + float(w_raw @ scaler.mean)

        def objective_grad(t: np.ndarray) -> tuple[float, np.ndarray]:
            return objective_and_grad(t, Xs, s, C)

        obj, grad = objective_grad(theta)
        history = [obj]
        H = np.eye(n_features + 1)
        converged = bool(np.abs(grad).max() <= tol)

        for _ in range(max_iter):
            if converged:
                break
            direction = -H @ grad
            slope = float(grad @ direction)
            if slope >= 0.0:
                # curvature information went bad; restart from steepest descent
                H = np.eye(n_features + 1)
                direction = -grad
                slope = float(grad @ direction)
            step = 1.0
            for _ in range(_MAX_BACKTRACKS):
                trial = theta + step * direction
                trial_obj, trial_grad = objective_grad(trial)
                if trial_obj <= obj + _ARMIJO_C1 * step * slope:
                    break
                step *= 0.5
            else:
                break
            delta = trial - theta
            gamma = trial_grad - grad
            curvature = float(delta @ gamma)
            if curvature > 1e-12:
                rho = 1.0 / curvature
                I = np.eye(n_features + 1)
                V = I - rho * np.outer(delta, gamma)
                H = V @ H @ V.T + rho * np.outer(delta, delta)
            theta, obj, grad = trial, trial_obj, trial_grad
            history.append(obj)
            converged = bool(np.abs(grad).max() <= tol)

        return cls(
            standardizer=scaler,
            w=theta[:-1].copy(),
            c=float(theta[-1]),
            C=C,
            obj_history=history,
            converged=converged,
        )

    def raw_coefficients(self) -> tuple[np.ndarray, float]:
        """Coefficients expressed against unstandardized features."""
        w_raw = self.w / self.standardizer.scale
        c_raw = self.c - float(w_raw @ self.standardizer.mean)
        return w_raw, c_raw

    def decision_function(self, X: np.ndarray) -> np.ndarray:
        return self.standardizer.transform(np.asarray(X, dtype=float)) @ self.w + self.c

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return _sigmoid(self.decision_function(X))
