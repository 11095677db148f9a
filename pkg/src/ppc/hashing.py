"""Out-of-sample hashing: one Gaussian-kernel classifier per code bit.

Each bit's optimal in-sample vector becomes the target of a regularized
kernel logistic fit; the classifier's own in-sample predictions are what
get accumulated, so the next bit corrects the classifier's mistakes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.spatial.distance import cdist, pdist
from scipy.special import expit

from ppc.affinity import Dataset, ProximityLabels
from ppc.seeds import derive_seed
from ppc.trainer import (
    TrainConfig,
    TrainerState,
    accumulate,
    empirical_loss,
    optimize_alpha,
    solve_bit,
    weight_matrix,
)

MODEL_VERSION = 1


@dataclass
class KernelConfig:
    """Gaussian-kernel classifier settings shared across all bits."""

    bandwidth: float | None = None  # None -> median pairwise distance
    ridge: float = 1e-3
    max_centers: int = 1000
    max_iter: int = 500
    tol: float = 1e-5
    bandwidth_sample: int = 1000

    def __post_init__(self):
        if self.bandwidth is not None and self.bandwidth <= 0:
            raise ValueError("bandwidth must be positive")
        if self.ridge < 0 or self.max_centers < 1 or self.max_iter < 1:
            raise ValueError("invalid kernel config")


@dataclass
class KernelClassifier:
    """sign(sum_j coeff_j exp(-||x - center_j||^2 / (2 sigma^2)) + bias)."""

    centers: np.ndarray
    coefficients: np.ndarray
    bias: float
    bandwidth: float

    def __post_init__(self):
        if self.centers.ndim != 2 or self.centers.shape[0] < 1:
            raise ValueError("need at least one kernel center")
        if self.coefficients.shape != (self.centers.shape[0],):
            raise ValueError("coefficient count must match center count")
        if self.bandwidth <= 0:
            raise ValueError("bandwidth must be positive")


@dataclass
class FitResult:
    classifier: KernelClassifier
    accuracy: float
    converged: bool
    iterations: int


@dataclass
class HashModel:
    """p per-bit classifiers plus the retrieval threshold of the final code."""

    classifiers: list[KernelClassifier]
    alpha: float
    p: int
    train_bit_accuracy: list[float] = field(default_factory=list)

    def __post_init__(self):
        if self.p != len(self.classifiers):
            raise ValueError("p must equal the number of classifiers")
        if self.p < 1:
            raise ValueError("model must have at least one bit")


def median_bandwidth(features: np.ndarray, seed: int, sample: int = 1000) -> float:
    """Median pairwise distance over a seeded subsample; 1.0 if degenerate."""
    n = features.shape[0]
    if n > sample:
        rng = np.random.default_rng(seed)
        idx = np.sort(rng.choice(n, size=sample, replace=False))
        features = features[idx]
    if features.shape[0] < 2:
        return 1.0
    med = float(np.median(pdist(features)))
    return med if med > 0 else 1.0


def _kernel_matrix(X: np.ndarray, centers: np.ndarray, sigma: float) -> np.ndarray:
    sq = cdist(X, centers, "sqeuclidean")
    return np.exp(-sq / (2.0 * sigma * sigma))


def _spectral_norm(K1: np.ndarray, iters: int = 60) -> float:
    """Power-iteration estimate of the largest singular value."""
    rng = np.random.default_rng(0)
    v = rng.standard_normal(K1.shape[1])
    v /= np.linalg.norm(v)
    for _ in range(iters):
        u = K1 @ v
        nu = np.linalg.norm(u)
        if nu == 0:
            return 0.0
        w = K1.T @ (u / nu)
        nw = np.linalg.norm(w)
        if nw == 0:
            return 0.0
        v = w / nw
    return float(np.linalg.norm(K1 @ v))


def _fit_logistic(K: np.ndarray, targets: np.ndarray, cfg: KernelConfig, lipschitz: float | None):
    """Ridge-penalized kernel logistic regression by accelerated full-gradient
    descent (deterministic: zero start, fixed 1/L step)."""
    n, m = K.shape
    t = targets.astype(np.float64)
    if lipschitz is None:
        s = _spectral_norm(np.hstack([K, np.ones((n, 1))]))
        lipschitz = (s * s) / (4.0 * n) + cfg.ridge
    step = 1.0 / max(lipschitz, 1e-12)

    theta = np.zeros(m + 1)
    look = theta.copy()
    t_acc = 1.0
    best = theta
    best_loss = np.inf
    converged = False
    it = 0
    for it in range(1, cfg.max_iter + 1):
        f = K @ look[:m] + look[m]
        margin = t * f
        s_neg = expit(-margin)
        grad = np.empty(m + 1)
        grad[:m] = -(K.T @ (t * s_neg)) / n + cfg.ridge * look[:m]
        grad[m] = -(t * s_neg).sum() / n
        new = look - step * grad
        t_next = (1.0 + np.sqrt(1.0 + 4.0 * t_acc * t_acc)) / 2.0
        look = new + ((t_acc - 1.0) / t_next) * (new - theta)
        theta, t_acc = new, t_next

        loss = float(np.logaddexp(0.0, -(t * (K @ theta[:m] + theta[m]))).mean()) + 0.5 * cfg.ridge * float(
            theta[:m] @ theta[:m]
        )
        if loss < best_loss:
            best, best_loss = theta.copy(), loss
        if float(np.abs(grad).max()) <= cfg.tol:
            converged = True
            break
    return best[:m], float(best[m]), converged, it


def fit_bit_classifier(
    data: Dataset | np.ndarray,
    target_bits: np.ndarray,
    cfg: KernelConfig,
    seed: int = 0,
    centers_idx: np.ndarray | None = None,
    _gram: np.ndarray | None = None,
    _lipschitz: float | None = None,
) -> FitResult:
    """Fit one bit's classifier on (features, ±1 targets).

    Accepts a Dataset or a bare feature matrix (the latter admits the
    single-sample case). Single-class targets produce a constant
    classifier (zero coefficients, bias = the class sign). Non-convergence
    within the iteration cap returns the best iterate with converged=False.
    """
    t = np.asarray(target_bits)
    X = data.features if isinstance(data, Dataset) else np.atleast_2d(np.asarray(data, dtype=np.float64))
    n = X.shape[0]
    if t.shape != (n,) or not np.isin(t, (-1, 1)).all():
        raise ValueError("target bits must be ±1 and match the point count")

    if centers_idx is None:
        m = min(n, cfg.max_centers)
        rng = np.random.default_rng(derive_seed(seed, "centers"))
        centers_idx = np.sort(rng.choice(n, size=m, replace=False))
    centers = X[centers_idx]
    sigma = cfg.bandwidth
    if sigma is None:
        sigma = median_bandwidth(X, derive_seed(seed, "bandwidth"), cfg.bandwidth_sample)

    if np.all(t == t[0]):
        clf = KernelClassifier(
            centers=centers,
            coefficients=np.zeros(centers.shape[0]),
            bias=float(t[0]),
            bandwidth=sigma,
        )
        return FitResult(classifier=clf, accuracy=1.0, converged=True, iterations=0)

    K = _gram if _gram is not None else _kernel_matrix(X, centers, sigma)
    coef, bias, converged, iters = _fit_logistic(K, t, cfg, _lipschitz)
    clf = KernelClassifier(centers=centers, coefficients=coef, bias=bias, bandwidth=sigma)
    preds = _predict_from_kernel(K, coef, bias)
    accuracy = float(np.mean(preds == t))
    return FitResult(classifier=clf, accuracy=accuracy, converged=converged, iterations=iters)


def _predict_from_kernel(K: np.ndarray, coef: np.ndarray, bias: float) -> np.ndarray:
    return np.where(K @ coef + bias >= 0, 1, -1).astype(np.int8)


def predict_bit(clf: KernelClassifier, x: np.ndarray) -> int:
    """±1 prediction for a single feature vector; sign(0) -> +1."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (clf.centers.shape[1],):
        raise ValueError("feature dimension does not match classifier centers")
    K = _kernel_matrix(x[None, :], clf.centers, clf.bandwidth)
    return int(_predict_from_kernel(K, clf.coefficients, clf.bias)[0])


def encode(model: HashModel, X: np.ndarray) -> np.ndarray:
    """p x n_query ±1 codes for a matrix of query features."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    rows = []
    cache: dict[tuple[int, float], np.ndarray] = {}
    for clf in model.classifiers:
        key = (id(clf.centers), clf.bandwidth)
        if key not in cache:
            if X.shape[1] != clf.centers.shape[1]:
                raise ValueError("query feature dimension does not match model centers")
            cache[key] = _kernel_matrix(X, clf.centers, clf.bandwidth)
        rows.append(_predict_from_kernel(cache[key], clf.coefficients, clf.bias))
    return np.stack(rows)


def train_with_hashing(
    data: Dataset,
    labels: ProximityLabels,
    config: TrainConfig,
    kernel: KernelConfig | None = None,
) -> tuple[HashModel, TrainerState]:
    """Bit-sequential training with per-bit classifiers and error correction.

    Per bit: solve the cut for the optimal in-sample vector, fit the
    classifier on it, then accumulate the classifier's own in-sample
    predictions so later bits compensate its mistakes. The model stores
    the retrieval threshold recomputed on the classifier-produced code.
    """
    kernel = kernel or KernelConfig()
    n = data.n
    if labels.n != n:
        raise ValueError("labels and dataset disagree on point count")

    m = min(n, kernel.max_centers)
    rng = np.random.default_rng(derive_seed(config.seed, "centers"))
    centers_idx = np.sort(rng.choice(n, size=m, replace=False))
    sigma = kernel.bandwidth
    if sigma is None:
        sigma = median_bandwidth(
            data.features, derive_seed(config.seed, "bandwidth"), kernel.bandwidth_sample
        )
    K = _kernel_matrix(data.features, data.features[centers_idx], sigma)
    lipschitz = (_spectral_norm(np.hstack([K, np.ones((n, 1))])) ** 2) / (4.0 * n) + kernel.ridge
    resolved = KernelConfig(
        bandwidth=sigma,
        ridge=kernel.ridge,
        max_centers=kernel.max_centers,
        max_iter=kernel.max_iter,
        tol=kernel.tol,
        bandwidth_sample=kernel.bandwidth_sample,
    )

    state = TrainerState.empty(n)
    classifiers: list[KernelClassifier] = []
    accuracies: list[float] = []
    for _ in range(config.max_bits):
        W = weight_matrix(labels, state)
        target, solver_report = solve_bit(W, config, bit_index=state.bits_done)
        fit = fit_bit_classifier(
            data,
            target,
            resolved,
            seed=config.seed,
            centers_idx=centers_idx,
            _gram=K,
            _lipschitz=lipschitz,
        )
        corrected = _predict_from_kernel(K, fit.classifier.coefficients, fit.classifier.bias)
        state = accumulate(state, corrected)
        result = optimize_alpha(labels, state)
        state.alpha_hat = result.alpha
        state.beta_hat = result.beta
        loss = empirical_loss(labels, state, result.alpha)
        state.loss_history.append(loss)
        state.solver_reports.append(solver_report)
        classifiers.append(fit.classifier)
        accuracies.append(fit.accuracy)
        if loss.empirical <= config.target_empirical_loss:
            break

    # one shared centers array lets encode() build the query kernel once
    shared = data.features[centers_idx].copy()
    classifiers = [
        KernelClassifier(
            centers=shared, coefficients=c.coefficients, bias=c.bias, bandwidth=c.bandwidth
        )
        for c in classifiers
    ]
    model = HashModel(
        classifiers=classifiers,
        alpha=float(state.alpha_hat),
        p=len(classifiers),
        train_bit_accuracy=accuracies,
    )
    return model, state


# ---------------------------------------------------------------------------
# Model file


def save_model(model: HashModel, path: str | Path):
    """Versioned JSON with centers shared across bits."""
    centers = model.classifiers[0].centers
    sigma = model.classifiers[0].bandwidth
    for clf in model.classifiers:
        if clf.centers.shape != centers.shape or not np.array_equal(clf.centers, centers):
            raise ValueError("model file format requires centers shared across bits")
    doc = {
        "version": MODEL_VERSION,
        "p": model.p,
        "alpha": model.alpha,
        "kernel": {"type": "gaussian", "sigma": sigma},
        "centers": [[float(v) for v in row] for row in centers],
        "bits": [
            {"coeffs": [float(c) for c in clf.coefficients], "bias": float(clf.bias)}
            for clf in model.classifiers
        ],
        "train_accuracy": [float(a) for a in model.train_bit_accuracy],
    }
    Path(path).write_text(json.dumps(doc), encoding="utf-8")


def load_model(path: str | Path) -> HashModel:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if doc.get("version") != MODEL_VERSION:
        raise ValueError(f"{path}: unsupported model version {doc.get('version')}")
    if doc.get("kernel", {}).get("type") != "gaussian":
        raise ValueError(f"{path}: unsupported kernel type")
    sigma = float(doc["kernel"]["sigma"])
    centers = np.asarray(doc["centers"], dtype=np.float64)
    classifiers = [
        KernelClassifier(
            centers=centers,
            coefficients=np.asarray(b["coeffs"], dtype=np.float64),
            bias=float(b["bias"]),
            bandwidth=sigma,
        )
        for b in doc["bits"]
    ]
    return HashModel(
        classifiers=classifiers,
        alpha=float(doc["alpha"]),
        p=int(doc["p"]),
        train_bit_accuracy=[float(a) for a in doc.get("train_accuracy", [])],
    )
