"""Bit-sequential code construction.

Each bit alternates two steps: pick the Hamming threshold that balances
the misclassified Near and Far pair counts, then solve a signed min-cut
on the logistic-gradient weight matrix and append the winning bit.
The gram matrix B = C^T C carries everything the pair losses need.

Distances follow the doubled convention d_H = k - B_ij (twice the
mismatch count after k bits).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.spatial.distance import squareform
from scipy.special import expit

from ppc.affinity import ProximityLabels
from ppc.mincut import (
    INITIALIZERS,
    ONE_MINUS_EPS,
    SolverReport,
    UPDATE_SCHEMES,
    check_bits,
    objective,
)
from ppc.seeds import derive_seed


@dataclass
class LossReport:
    """Pair losses of the current code at threshold alpha.

    `empirical` counts violated pairs (Near with d_H > alpha, Far with
    d_H <= alpha); `relaxed` is the logistic total at beta = bits - alpha.
    """

    empirical: int
    relaxed: float
    alpha: float
    margin_min: float
    margin_mean: float


@dataclass
class AlphaResult:
    alpha: float
    beta: float
    misclassified_near: int
    misclassified_far: int
    degenerate: bool = False


@dataclass
class TrainConfig:
    max_bits: int
    target_empirical_loss: int = 0
    solver: str = "bit"  # bit | vector
    init: str = "random"
    restarts: int = 4
    seed: int = 0

    def __post_init__(self):
        if self.max_bits < 1:
            raise ValueError("max_bits must be >= 1")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.solver not in UPDATE_SCHEMES:
            raise ValueError(f"unknown solver {self.solver!r}")
        if self.init not in INITIALIZERS:
            raise ValueError(f"unknown init {self.init!r}")


@dataclass
class TrainerState:
    """Accumulated gram matrix and per-bit bookkeeping."""

    gram: np.ndarray
    bits_done: int = 0
    alpha_hat: float | None = None
    beta_hat: float = 0.0
    loss_history: list[LossReport] = field(default_factory=list)
    solver_reports: list[SolverReport] = field(default_factory=list)

    @classmethod
    def empty(cls, n: int) -> "TrainerState":
        return cls(gram=np.zeros((n, n), dtype=np.int64))

    @property
    def n(self) -> int:
        return self.gram.shape[0]


def hamming_from_gram(gram_entry: int, bits: int) -> int:
    """Doubled Hamming distance k - B_ij recovered from a gram entry."""
    g = int(gram_entry)
    if abs(g) > bits:
        raise ValueError(f"|B_ij|={abs(g)} exceeds bit count {bits}")
    if (g - bits) % 2 != 0:
        raise ValueError(f"gram entry {g} has wrong parity for {bits} bits")
    return bits - g


def _pair_gram(state: TrainerState) -> np.ndarray:
    iu = np.triu_indices(state.n, 1)
    return state.gram[iu]


def pair_distances(state: TrainerState) -> np.ndarray:
    """Condensed doubled Hamming distances of the current code."""
    return state.bits_done - _pair_gram(state)


def empirical_loss(labels: ProximityLabels, state: TrainerState, alpha: float) -> LossReport:
    """Count violated pairs at threshold alpha (z = 0 does not violate)."""
    if state.bits_done < 1:
        raise ValueError("empirical loss needs at least one bit")
    d = pair_distances(state)
    y = labels.signs().astype(np.float64)
    z = y * (alpha - d)
    count = int(np.count_nonzero(z < 0))
    beta = state.bits_done - alpha
    return LossReport(
        empirical=count,
        relaxed=relaxed_loss(labels, state, beta),
        alpha=float(alpha),
        margin_min=float(z.min()),
        margin_mean=float(z.mean()),
    )


def relaxed_loss(labels: ProximityLabels, state: TrainerState, beta: float) -> float:
    """Logistic total sum ln(1 + exp(-y (B_ij - beta))) over unordered pairs."""
    g = _pair_gram(state).astype(np.float64)
    y = labels.signs().astype(np.float64)
    z = y * (g - beta)
    return float(np.logaddexp(0.0, -z).sum())


def optimize_alpha(labels: ProximityLabels, state: TrainerState) -> AlphaResult:
    """Threshold balancing the misclassified Near and Far counts.

    Achievable distances after k bits are the even values 0..2k, so the
    scan runs over the odd midpoints plus the sentinels -1 and 2k-1; the
    candidate minimizing | |E_N| - |E_F| | wins, ties toward smaller alpha.
    Degenerate label sets (no Near or no Far pairs) short-circuit to an
    extreme alpha with the degenerate flag set.
    """
    k = state.bits_done
    if k < 1:
        raise ValueError("alpha optimization needs at least one bit")
    d = pair_distances(state)
    near = labels.near_mask()

    if labels.near_count == 0 or labels.far_count == 0:
        alpha = float(2 * k - 1) if labels.far_count == 0 else -1.0
        e_n = int(np.count_nonzero(d[near] > alpha))
        e_f = int(np.count_nonzero(d[~near] <= alpha))
        return AlphaResult(alpha, k - alpha, e_n, e_f, degenerate=True)

    # histogram over the 2k+1 possible distance values, then cumulative counts
    hist_near = np.bincount(d[near], minlength=2 * k + 1)
    hist_far = np.bincount(d[~near], minlength=2 * k + 1)
    cum_near = np.concatenate(([0], np.cumsum(hist_near)))
    cum_far = np.concatenate(([0], np.cumsum(hist_far)))

    candidates = np.arange(-1, 2 * k, 2)
    # pairs with d <= alpha for odd alpha are those with d <= alpha + 1 - 2 = alpha - 1,
    # i.e. cumulative count through bin alpha (d values are even)
    upto = np.clip(candidates, -1, 2 * k).astype(np.int64)
    e_n = labels.near_count - cum_near[upto + 1]
    e_f = cum_far[upto + 1]
    gap = np.abs(e_n - e_f)
    best = int(np.argmin(gap))
    alpha = float(candidates[best])
    return AlphaResult(alpha, k - alpha, int(e_n[best]), int(e_f[best]))


def weight_matrix(labels: ProximityLabels, state: TrainerState) -> np.ndarray:
    """Signed weights for the next bit's cut problem.

    W_ij = y_ij / (1 + exp(y_ij (B_ij - beta))), the negated logistic-loss
    gradient at the carried margin. Signs match the pair labels, magnitudes
    lie in (0, 1) (clamped away from the boundary where float rounding
    would saturate), and the diagonal is zero. Before any bits exist the
    margin is zero and the weights are ±1/2.
    """
    y = labels.signs().astype(np.float64)
    if state.bits_done == 0:
        g = np.zeros(labels.num_pairs)
        beta = 0.0
    else:
        g = _pair_gram(state).astype(np.float64)
        beta = state.beta_hat
    z = y * (g - beta)
    mag = np.clip(expit(-z), np.finfo(np.float64).tiny, ONE_MINUS_EPS)
    return squareform(y * mag)


def accumulate(state: TrainerState, b: np.ndarray) -> TrainerState:
    """Add one bit's rank-1 outer product to the gram matrix."""
    b = check_bits(b, state.n).astype(np.int64)
    return replace(
        state,
        gram=state.gram + np.outer(b, b),
        bits_done=state.bits_done + 1,
        loss_history=list(state.loss_history),
        solver_reports=list(state.solver_reports),
    )


def solve_bit(W: np.ndarray, config: TrainConfig, bit_index: int) -> tuple[np.ndarray, SolverReport]:
    """Best-of-restarts signed-cut solve for one bit.

    Restart 0 uses the configured initial guess; for the deterministic
    spectral guesses the remaining restarts fall back to seeded random
    vectors so they are not wasted on duplicates.
    """
    update = UPDATE_SCHEMES[config.solver]
    make_init = INITIALIZERS[config.init]
    best = None
    best_report = None
    for r in range(config.restarts):
        seed = derive_seed(config.seed, "init", bit_index, r)
        if r == 0 or config.init in ("random", "random-projection"):
            b0 = make_init(W, seed)
        else:
            b0 = INITIALIZERS["random"](W, seed)
        b, report = update(W, b0)
        if best is None or report.objective > best_report.objective:
            best, best_report = b, report
    return best, best_report


def train_bit(
    state: TrainerState, labels: ProximityLabels, config: TrainConfig
) -> tuple[np.ndarray, TrainerState, LossReport]:
    """Run one full bit step: threshold, weights, cut, accumulate, report."""
    W = weight_matrix(labels, state)
    b, report = solve_bit(W, config, bit_index=state.bits_done)
    new_state = accumulate(state, b)
    result = optimize_alpha(labels, new_state)
    new_state.alpha_hat = result.alpha
    new_state.beta_hat = result.beta
    loss = empirical_loss(labels, new_state, result.alpha)
    new_state.loss_history.append(loss)
    new_state.solver_reports.append(report)
    return b, new_state, loss


def train(labels: ProximityLabels, config: TrainConfig) -> tuple[np.ndarray, TrainerState]:
    """Emit bits until the empirical loss drops to the target or max_bits.

    Returns the p x n ±1 code matrix and the final trainer state (whose
    alpha_hat is the retrieval threshold for the finished code).
    """
    state = TrainerState.empty(labels.n)
    rows = []
    for _ in range(config.max_bits):
        b, state, loss = train_bit(state, labels, config)
        rows.append(b)
        if loss.empirical <= config.target_empirical_loss:
            break
    codes = np.stack(rows).astype(np.int8)
    return codes, state


def bit_log_records(state: TrainerState) -> list[dict]:
    """Per-bit training log rows (one JSON-ready dict per emitted bit)."""
    records = []
    for k, (loss, rep) in enumerate(zip(state.loss_history, state.solver_reports), start=1):
        records.append(
            {
                "bit": k,
                "alpha": loss.alpha,
                "beta": k - loss.alpha,
                "empirical_loss": loss.empirical,
                "relaxed_loss": loss.relaxed,
                "solver_objective": rep.objective,
                "iterations": rep.iterations,
            }
        )
    return records
