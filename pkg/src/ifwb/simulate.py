"""Link-level Monte Carlo validation with uncoded PAM streams.

Each trial sends one PAM symbol per stream (scaled so the per-stream average
power equals snr) through Y = H X + Z with unit-variance Gaussian noise. The
receiver equalizes toward the integer matrix A and decodes the integer
combinations one at a time with noise prediction; at this uncoded scale the
scheme coincides with lattice-reduction-aided SIC, and a decision-feedback
decoder over the reduced channel is provided to check that equivalence
trial by trial.

Randomness is counter-based: a Philox generator keyed by the seed produces
the symbol and noise arrays in a fixed layout, so trial t's randomness is a
pure function of (seed, t) and results do not depend on execution order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ShapeMismatch
from .rates import ChannelInstance, as_integer_matrix, gdfe_filters, if_effective_model


@dataclass(frozen=True)
class SimConfig:
    """Monte Carlo run description; identical configs give identical results."""

    ch: ChannelInstance
    A: np.ndarray
    pam_points: int
    trials: int
    seed: int

    def __post_init__(self):
        a = as_integer_matrix(self.A)
        if a.shape[0] != self.ch.num_streams:
            raise ValueError(
                f"A must be {self.ch.num_streams}x{self.ch.num_streams} for this channel"
            )
        object.__setattr__(self, "A", a)
        self.A.setflags(write=False)
        q = int(self.pam_points)
        if q < 2 or q % 2 != 0:
            raise ValueError(f"pam_points must be an even integer >= 2, got {self.pam_points}")
        object.__setattr__(self, "pam_points", q)
        t = int(self.trials)
        if t < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        object.__setattr__(self, "trials", t)
        object.__setattr__(self, "seed", int(self.seed) & (2**64 - 1))

    @property
    def symbol_scale(self) -> float:
        """PAM half-spacing c: symbols are c * {+-1, +-3, ...} with mean power snr."""
        q = self.pam_points
        return math.sqrt(3.0 * self.ch.snr / (q * q - 1.0))


@dataclass(frozen=True)
class TrialResult:
    """Aggregated error rates plus raw per-trial decisions for cross-checks."""

    symbol_error_rate: tuple  # per stream
    equation_error_rate: tuple  # per decoding step
    empirical_Ktilde: np.ndarray
    equation_decisions: np.ndarray  # trials x M integer grid indices
    stream_decisions: np.ndarray  # trials x M decoded odd integers
    trials: int


def _draw(cfg: SimConfig, noise_scale: float):
    """Counter-based draws: PAM levels (exact odd ints) and receiver noise."""
    rng = np.random.Generator(np.random.Philox(key=cfg.seed))
    u = rng.integers(0, cfg.pam_points, size=(cfg.trials, cfg.ch.num_streams))
    noise = rng.standard_normal((cfg.trials, cfg.ch.num_receive))
    odd = (2 * u - (cfg.pam_points - 1)).astype(np.int64)
    return odd, noise_scale * noise


def _received(cfg: SimConfig, odd: np.ndarray, noise: np.ndarray) -> np.ndarray:
    x = cfg.symbol_scale * odd.astype(float)
    return x @ cfg.ch.H.T + noise


def _slice_grid(values: np.ndarray, scale: float, parity: int) -> np.ndarray:
    """Round to the nearest point of scale * (2Z + parity), returning grid indices."""
    return np.rint((values / scale - parity) / 2.0).astype(np.int64)


def _solve_streams(cfg: SimConfig, eq_indices: np.ndarray, parity: np.ndarray) -> np.ndarray:
    """Invert the integer combinations and slice each stream to its constellation."""
    v_int = 2 * eq_indices + parity[None, :]
    x_hat = v_int.astype(float) @ np.linalg.inv(cfg.A.astype(float)).T
    odd_hat = 2 * np.rint((x_hat - 1.0) / 2.0).astype(np.int64) + 1
    lim = cfg.pam_points - 1
    return np.clip(odd_hat, -lim, lim)


def _finalize(cfg: SimConfig, odd, eq_idx, eq_true, y_eff, v_true) -> TrialResult:
    stream_hat = _solve_streams(cfg, eq_idx, _parities(cfg))
    z_eff = y_eff - cfg.symbol_scale * v_true.astype(float)
    return TrialResult(
        symbol_error_rate=tuple(np.mean(stream_hat != odd, axis=0).tolist()),
        equation_error_rate=tuple(np.mean(eq_idx != eq_true, axis=0).tolist()),
        empirical_Ktilde=z_eff.T @ z_eff / cfg.trials,
        equation_decisions=eq_idx,
        stream_decisions=stream_hat,
        trials=cfg.trials,
    )


def _parities(cfg: SimConfig) -> np.ndarray:
    return np.array([int(row.sum()) % 2 for row in cfg.A], dtype=np.int64)


def run_successive_if_trials(cfg: SimConfig, noise_scale: float = 1.0) -> TrialResult:
    """Successive integer-forcing with noise prediction.

    Step m subtracts sqrt(snr) * L[m, :m] @ w from the m-th equalized row,
    slices the result to the m-th combination's integer grid, then recovers
    the whitened noise coordinate w_m from its own decision. Streams are
    solved from the decided combinations at the end. ``noise_scale=0`` is the
    noiseless diagnostic.
    """
    model = if_effective_model(cfg.ch, cfg.A)
    odd, noise = _draw(cfg, noise_scale)
    y = _received(cfg, odd, noise)
    y_eff = y @ model.B.T
    v_true = odd @ cfg.A.T
    parity = _parities(cfg)
    eq_true = (v_true - parity[None, :]) // 2
    c = cfg.symbol_scale
    sq = math.sqrt(cfg.ch.snr)
    m = cfg.ch.num_streams
    w = np.zeros((cfg.trials, m))
    eq_idx = np.zeros((cfg.trials, m), dtype=np.int64)
    for step in range(m):
        predicted = sq * (w[:, :step] @ model.L[step, :step]) if step else 0.0
        target = y_eff[:, step] - predicted
        k_hat = _slice_grid(target, c, parity[step])
        v_hat = c * (2 * k_hat + parity[step]).astype(float)
        w[:, step] = (target - v_hat) / (sq * model.L[step, step])
        eq_idx[:, step] = k_hat
    return _finalize(cfg, odd, eq_idx, eq_true, y_eff, v_true)


def run_lr_aided_sic_trials(cfg: SimConfig, noise_scale: float = 1.0) -> TrialResult:
    """Decision-feedback SIC on the unimodularly reduced channel.

    Uses the monic feedback form: the forward filter is R B and decided
    combinations are fed back through R - I. For any full-rank A this makes
    the same per-trial decisions as run_successive_if_trials, realizing
    lattice-reduction-aided SIC when A comes from a reduction.
    """
    filters = gdfe_filters(cfg.ch, cfg.A)
    model = if_effective_model(cfg.ch, cfg.A)
    odd, noise = _draw(cfg, noise_scale)
    y = _received(cfg, odd, noise)
    y_fwd = y @ filters.B.T
    v_true = odd @ cfg.A.T
    parity = _parities(cfg)
    eq_true = (v_true - parity[None, :]) // 2
    c = cfg.symbol_scale
    m = cfg.ch.num_streams
    v_hat = np.zeros((cfg.trials, m))
    eq_idx = np.zeros((cfg.trials, m), dtype=np.int64)
    for step in range(m):
        fed_back = v_hat[:, :step] @ filters.Cfeedback[step, :step] if step else 0.0
        target = y_fwd[:, step] - fed_back
        k_hat = _slice_grid(target, c, parity[step])
        v_hat[:, step] = c * (2 * k_hat + parity[step]).astype(float)
        eq_idx[:, step] = k_hat
    y_eff = y @ model.B.T  # effective noise bookkeeping matches the prediction path
    return _finalize(cfg, odd, eq_idx, eq_true, y_eff, v_true)


def run_mmse_sic_trials(cfg: SimConfig, noise_scale: float = 1.0) -> TrialResult:
    """Plain MMSE-SIC: the A = I special case of successive integer forcing."""
    m = cfg.ch.num_streams
    forced = SimConfig(
        ch=cfg.ch,
        A=np.eye(m, dtype=np.int64),
        pam_points=cfg.pam_points,
        trials=cfg.trials,
        seed=cfg.seed,
    )
    return run_successive_if_trials(forced, noise_scale=noise_scale)


def empirical_generalized_covariance(samples) -> np.ndarray:
    """Average of (1/n) X X^T over sample matrices X of identical shape M x n.

    Entry (i, j) estimates the time-averaged inner product between rows i
    and j; the result is symmetric by construction.
    """
    mats = [np.asarray(s, dtype=float) for s in samples]
    if not mats:
        raise ShapeMismatch("need at least one sample")
    shape = mats[0].shape
    if len(shape) != 2 or shape[1] < 1:
        raise ShapeMismatch(f"samples must be M x n matrices, got shape {shape}")
    acc = np.zeros((shape[0], shape[0]))
    for s in mats:
        if s.shape != shape:
            raise ShapeMismatch(f"sample shape {s.shape} differs from {shape}")
        acc += s @ s.T
    return acc / (len(mats) * shape[1])
