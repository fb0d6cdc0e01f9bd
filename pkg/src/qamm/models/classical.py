"""Classical baselines: L2 logistic regression, CART trees, a bagged
forest, and residual-fitting gradient boosting.  All from first
principles on numpy; no external learners."""

from __future__ import annotations

import numpy as np

from ..errors import NotFitted
from .base import check_binary_labels, log_loss, sigmoid

# ---------------------------------------------------------------------------
# Logistic regression


class LogisticModel:
    """L2-penalized logistic regression trained by plain gradient
    descent with a step size from the curvature bound, so the loss is
    monotone without a line search.  The intercept is not penalized."""

    def __init__(self, C: float = 1.0, max_iter: int = 2000, tol: float = 1e-6):
        self.C = C
        self.max_iter = max_iter
        self.tol = tol
        self.w: np.ndarray | None = None
        self.b: float = 0.0
        self.n_iter: int = 0

    def _objective(self, X, y, w, b):
        z = X @ w + b
        # log(1 + exp(-z)) for y=1, log(1 + exp(z)) for y=0
        nll = np.logaddexp(0.0, np.where(y == 1, -z, z)).mean()
        return nll + (w @ w) / (2.0 * self.C * X.shape[0])

    def fit(self, X: np.ndarray, y: np.ndarray, seed: int = 0) -> "LogisticModel":
        X = np.asarray(X, dtype=np.float64)
        y = check_binary_labels(y).astype(np.float64)
        n, d = X.shape
        # Hessian spectral bound over the augmented design [X, 1] so the
        # intercept's curvature is counted: lambda_max/(4n) + 1/(Cn).
        Xa = np.concatenate([X, np.ones((n, 1))], axis=1)
        lam_max = float(np.linalg.eigvalsh(Xa.T @ Xa).max())
        step = 1.0 / (lam_max / (4.0 * n) + 1.0 / (self.C * n))
        w = np.zeros(d)
        b = 0.0
        for it in range(self.max_iter):
            p = sigmoid(X @ w + b)
            err = p - y
            gw = X.T @ err / n + w / (self.C * n)
            gb = err.mean()
            gnorm = np.sqrt(gw @ gw + gb * gb)
            if gnorm < self.tol:
                break
            w -= step * gw
            b -= step * gb
        self.w = w
        self.b = b
        self.n_iter = it + 1
        return self

    def gradient(self, X, y, w, b):
        """Analytic gradient at (w, b); exposed for the FD check."""
        X = np.asarray(X, dtype=np.float64)
        n = X.shape[0]
        p = sigmoid(X @ w + b)
        err = p - np.asarray(y, dtype=np.float64)
        return X.T @ err / n + w / (self.C * n), err.mean()

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        if self.w is None:
            raise NotFitted("LogisticModel.predict before fit")
        return sigmoid(np.asarray(X, dtype=np.float64) @ self.w + self.b)

    def predict(self, X: np.ndarray) -> np.ndarray:
        return (self.predict_proba(X) >= 0.5).astype(np.int8)

    def to_dict(self) -> dict:
        return {
            "kind": "logistic",
            "C": self.C,
            "w": self.w.tolist(),
            "b": self.b,
            "n_iter": self.n_iter,
        }


# ---------------------------------------------------------------------------
# CART


def _best_split_column(x, target, is_classification):
    """Best threshold on one column; returns (score, threshold) with
    score = weighted child impurity (to minimize) or (inf, 0) when the
    column admits no split.  Ties on score keep the lowest threshold."""
    order = np.argsort(x, kind="stable")
    xs = x[order]
    ts = target[order]
    n = xs.shape[0]
    boundary = np.nonzero(xs[1:] > xs[:-1])[0] + 1  # split sizes
    if boundary.size == 0:
        return np.inf, 0.0
    nl = boundary.astype(np.float64)
    nr = n - nl
    if is_classification:
        cp = np.cumsum(ts)
        pos_l = cp[boundary - 1]
        pos_r = cp[-1] - pos_l
        pl = pos_l / nl
        pr = pos_r / nr
        gini_l = 1.0 - pl * pl - (1.0 - pl) ** 2
        gini_r = 1.0 - pr * pr - (1.0 - pr) ** 2
        score = (nl * gini_l + nr * gini_r) / n
    else:
        s = np.cumsum(ts)
        s2 = np.cumsum(ts * ts)
        sse_l = s2[boundary - 1] - (s[boundary - 1] ** 2) / nl
        sse_r = (s2[-1] - s2[boundary - 1]) - ((s[-1] - s[boundary - 1]) ** 2) / nr
        score = (sse_l + sse_r) / n
    k = int(np.argmin(score))
    thr = 0.5 * (xs[boundary[k] - 1] + xs[boundary[k]])
    return float(score[k]), float(thr)


class DecisionTree:
    """CART for binary classification (gini) or regression (variance).

    Rows with x < threshold go left.  The split search scans features in
    ascending index order and requires a strict impurity improvement, so
    equal-quality splits resolve to the lowest feature index and then
    the lowest threshold.
    """

    def __init__(
        self,
        max_depth: int = 10,
        min_samples_split: int = 5,
        max_features: str | None = None,
        classification: bool = True,
    ):
        self.max_depth = max_depth
        self.min_samples_split = min_samples_split
        self.max_features = max_features
        self.classification = classification
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.value: list[float] = []

    def _node_impurity(self, target):
        if self.classification:
            p = target.mean()
            return 1.0 - p * p - (1.0 - p) ** 2
        return float(((target - target.mean()) ** 2).mean())

    def _new_node(self, value):
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(float(value))
        return len(self.feature) - 1

    def _grow(self, X, target, depth, rng):
        node = self._new_node(target.mean())
        n, d = X.shape
        if depth >= self.max_depth or n < self.min_samples_split:
            return node
        impurity = self._node_impurity(target)
        if impurity <= 0.0:
            return node
        if self.max_features == "sqrt" and rng is not None:
            k = max(1, int(np.sqrt(d)))
            cand = np.sort(rng.choice(d, size=k, replace=False))
        else:
            cand = np.arange(d)
        best_score = impurity
        best = None
        for f in cand:
            score, thr = _best_split_column(X[:, f], target, self.classification)
            if score < best_score:
                best_score = score
                best = (int(f), thr)
        if best is None:
            return node
        f, thr = best
        mask = X[:, f] < thr
        self.feature[node] = f
        self.threshold[node] = thr
        self.left[node] = self._grow(X[mask], target[mask], depth + 1, rng)
        self.right[node] = self._grow(X[~mask], target[~mask], depth + 1, rng)
        return node

    def fit(self, X: np.ndarray, target: np.ndarray, seed: int = 0) -> "DecisionTree":
        X = np.asarray(X, dtype=np.float64)
        target = np.asarray(target, dtype=np.float64)
        rng = np.random.default_rng(seed) if self.max_features else None
        self.feature.clear()
        self.threshold.clear()
        self.left.clear()
        self.right.clear()
        self.value.clear()
        self._grow(X, target, 0, rng)
        return self

    def predict_value(self, X: np.ndarray) -> np.ndarray:
        if not self.feature:
            raise NotFitted("DecisionTree.predict before fit")
        X = np.asarray(X, dtype=np.float64)
        out = np.empty(X.shape[0])
        for i in range(X.shape[0]):
            node = 0
            while self.feature[node] >= 0:
                if X[i, self.feature[node]] < self.threshold[node]:
                    node = self.left[node]
                else:
                    node = self.right[node]
            out[i] = self.value[node]
        return out

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def to_dict(self) -> dict:
        return {
            "feature": list(self.feature),
            "threshold": list(self.threshold),
            "left": list(self.left),
            "right": list(self.right),
            "value": list(self.value),
        }

    @classmethod
    def from_dict(cls, doc: dict, **kwargs) -> "DecisionTree":
        tree = cls(**kwargs)
        tree.feature = list(doc["feature"])
        tree.threshold = list(doc["threshold"])
        tree.left = list(doc["left"])
        tree.right = list(doc["right"])
        tree.value = list(doc["value"])
        return tree


# ---------------------------------------------------------------------------
# Random forest


class RandomForestModel:
    """Bagged CART trees with sqrt-feature subsampling per split and
    majority-averaged leaf probabilities."""

    def __init__(
        self,
        n_estimators: int = 100,
        max_depth: int = 10,
        min_samples_split: int = 5,
        max_features: str | None = "sqrt",
        bootstrap: bool = True,
        compute_oob: bool = False,
    ):
        self.n_estimators = n_estimators
        self.max_depth = max_depth
        self.min_samples_split = min_samples_split
        self.max_features = max_features
        self.bootstrap = bootstrap
        self.compute_oob = compute_oob
        self.trees: list[DecisionTree] = []
        self.oob_score: float | None = None

    def fit(self, X: np.ndarray, y: np.ndarray, seed: int = 0) -> "RandomForestModel":
        X = np.asarray(X, dtype=np.float64)
        y = check_binary_labels(y).astype(np.float64)
        n = X.shape[0]
        rng = np.random.default_rng(seed)
        tree_seeds = rng.integers(0, 2**63 - 1, size=self.n_estimators)
        self.trees = []
        oob_sum = np.zeros(n)
        oob_cnt = np.zeros(n)
        for b in range(self.n_estimators):
            t_rng = np.random.default_rng(tree_seeds[b])
            if self.bootstrap:
                idx = t_rng.integers(0, n, size=n)
            else:
                idx = np.arange(n)
            tree = DecisionTree(
                max_depth=self.max_depth,
                min_samples_split=self.min_samples_split,
                max_features=self.max_features,
                classification=True,
            )
            tree.fit(X[idx], y[idx], seed=int(tree_seeds[b]) ^ 0x5EED)
            self.trees.append(tree)
            if self.compute_oob and self.bootstrap:
                out_mask = np.ones(n, dtype=bool)
                out_mask[np.unique(idx)] = False
                if out_mask.any():
                    oob_sum[out_mask] += tree.predict_value(X[out_mask])
                    oob_cnt[out_mask] += 1.0
        if self.compute_oob and self.bootstrap:
            seen = oob_cnt > 0
            if seen.any():
                pred = (oob_sum[seen] / oob_cnt[seen]) >= 0.5
                self.oob_score = float((pred == (y[seen] >= 0.5)).mean())
        return self

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        if not self.trees:
            raise NotFitted("RandomForestModel.predict before fit")
        acc = np.zeros(np.asarray(X).shape[0])
        for tree in self.trees:
            acc += tree.predict_value(X)
        return acc / len(self.trees)

    def predict(self, X: np.ndarray) -> np.ndarray:
        return (self.predict_proba(X) >= 0.5).astype(np.int8)

    def to_dict(self) -> dict:
        return {
            "kind": "random_forest",
            "n_estimators": self.n_estimators,
            "max_depth": self.max_depth,
            "trees": [t.to_dict() for t in self.trees],
        }


# ---------------------------------------------------------------------------
# Gradient boosting


class GradientBoostingModel:
    """Stagewise logistic boosting: F_0 is the prior log-odds, each
    stage fits a regression tree to the residual y - sigmoid(F) and
    F <- F + lr * tree.  Probabilities are sigmoid(F_M)."""

    def __init__(self, n_estimators: int = 100, learning_rate: float = 0.1,
                 max_depth: int = 6):
        self.n_estimators = n_estimators
        self.learning_rate = learning_rate
        self.max_depth = max_depth
        self.f0: float = 0.0
        self.trees: list[DecisionTree] = []
        self.train_losses: list[float] = []

    def fit(self, X: np.ndarray, y: np.ndarray, seed: int = 0) -> "GradientBoostingModel":
        X = np.asarray(X, dtype=np.float64)
        y = check_binary_labels(y).astype(np.float64)
        p0 = y.mean()
        self.f0 = float(np.log(p0 / (1.0 - p0)))
        F = np.full(X.shape[0], self.f0)
        self.trees = []
        self.train_losses = [log_loss(sigmoid(F), y)]
        for _ in range(self.n_estimators):
            residual = y - sigmoid(F)
            tree = DecisionTree(
                max_depth=self.max_depth,
                min_samples_split=2,
                max_features=None,
                classification=False,
            )
            tree.fit(X, residual)
            F = F + self.learning_rate * tree.predict_value(X)
            self.trees.append(tree)
            self.train_losses.append(log_loss(sigmoid(F), y))
        return self

    def decision_function(self, X: np.ndarray) -> np.ndarray:
        if not self.trees:
            raise NotFitted("GradientBoostingModel.predict before fit")
        F = np.full(np.asarray(X).shape[0], self.f0)
        for tree in self.trees:
            F = F + self.learning_rate * tree.predict_value(X)
        return F

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return sigmoid(self.decision_function(X))

    def predict(self, X: np.ndarray) -> np.ndarray:
        return (self.predict_proba(X) >= 0.5).astype(np.int8)

    def to_dict(self) -> dict:
        return {
            "kind": "gradient_boosting",
            "n_estimators": self.n_estimators,
            "learning_rate": self.learning_rate,
            "f0": self.f0,
            "trees": [t.to_dict() for t in self.trees],
        }
