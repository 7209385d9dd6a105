"""Achievable-rate engine for integer-forcing MIMO receivers.

Implements, for a real channel Y = H X + Z at a given per-stream SNR:

- white-input mutual information and the water-filling capacity,
- MMSE-SIC (noise prediction) per-stream rates,
- integer-forcing and successive integer-forcing effective-noise models and
  the per-equation / per-step rates they support,
- pseudo-triangularization of the integer target matrix and the resulting
  sum-rate-optimal rate allocations,
- the optimal integer matrix via Korkin-Zolotarev reduction (with an
  exhaustive oracle mode),
- the equivalent decision-feedback (GDFE) filter realization,
- closed-form decoding error bound quantities.

Rates are in bits per real channel use; logs are base 2 throughout.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionTooLarge,
    IfwbError,
    InfeasiblePermutation,
    SingularA,
)
from .lattice import (
    brute_force_min_max,
    int_det,
    kz_approx_successive_lll,
    kz_reduce,
)
from .linalg import as_matrix, cholesky_lower

MAX_PSEUDO_TRI_DIM = 6


# ---------------------------------------------------------------------------
# channel
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ChannelInstance:
    """Immutable problem statement: real channel matrix H (N x M) and linear SNR."""

    H: np.ndarray
    snr: float

    def __post_init__(self):
        h = as_matrix(self.H, "H")
        snr = float(self.snr)
        if not (math.isfinite(snr) and snr > 0):
            raise ValueError(f"snr must be a positive finite number, got {self.snr}")
        object.__setattr__(self, "H", h.copy())
        object.__setattr__(self, "snr", snr)
        self.H.setflags(write=False)

    @property
    def num_streams(self) -> int:
        return self.H.shape[1]

    @property
    def num_receive(self) -> int:
        return self.H.shape[0]

    def with_columns(self, order) -> "ChannelInstance":
        """Channel with transmit streams reordered (columns permuted)."""
        return ChannelInstance(self.H[:, list(order)], self.snr)


def as_integer_matrix(a, name: str = "A") -> np.ndarray:
    """Validate an integer square matrix, returned as int64."""
    arr = np.asarray(a)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"{name} must be square, got shape {arr.shape}")
    if arr.dtype.kind == "f":
        if not np.all(np.isfinite(arr)) or not np.all(arr == np.round(arr)):
            raise ValueError(f"{name} must have integer entries")
        arr = np.round(arr)
    return arr.astype(np.int64)


def _validate_full_rank(a: np.ndarray, name: str = "A") -> np.ndarray:
    a = as_integer_matrix(a, name)
    if int_det(a) == 0:
        raise SingularA(f"{name} is singular (exact integer determinant is zero)")
    return a


def _derived(ch: ChannelInstance, key: str, build) -> np.ndarray:
    """Cache matrices that are pure functions of the (immutable) channel.

    Concurrent first calls may both build; they produce identical read-only
    arrays, so the race is benign and results stay deterministic.
    """
    store = ch.__dict__.setdefault("_derived_cache", {})
    if key not in store:
        value = build()
        value.setflags(write=False)
        store[key] = value
    return store[key]


def capacity_gram(ch: ChannelInstance) -> np.ndarray:
    """I + snr * H^T H, the Gram matrix behind every rate expression."""
    return _derived(
        ch,
        "capacity_gram",
        lambda: np.eye(ch.num_streams) + ch.snr * (ch.H.T @ ch.H),
    )


def error_gram(ch: ChannelInstance) -> np.ndarray:
    """(I + snr * H^T H)^{-1}, symmetrized; the MMSE error covariance over snr."""

    def build():
        s = np.linalg.inv(capacity_gram(ch))
        return 0.5 * (s + s.T)

    return _derived(ch, "error_gram", build)


def mmse_equalizer(ch: ChannelInstance) -> np.ndarray:
    """Forward MMSE filter H^T (I/snr + H H^T)^{-1}."""

    def build():
        gram = np.eye(ch.num_receive) / ch.snr + ch.H @ ch.H.T
        return ch.H.T @ np.linalg.inv(gram)

    return _derived(ch, "mmse_equalizer", build)


# ---------------------------------------------------------------------------
# capacities
# ---------------------------------------------------------------------------

def white_input_capacity(ch: ChannelInstance) -> float:
    """White-input mutual information (1/2) log2 det(I + snr H^T H)."""
    sign, logdet = np.linalg.slogdet(capacity_gram(ch))
    if sign <= 0:
        raise IfwbError("capacity Gram matrix not positive definite")
    return 0.5 * logdet / math.log(2.0)


def waterfilling_capacity(ch: ChannelInstance) -> tuple[float, np.ndarray]:
    """Capacity under the total power constraint trace(Q) <= M * snr.

    The optimal input covariance Q is diagonal in the right-singular basis
    of H with powers set by water-filling; the water level is found by
    bisection until the allocated power matches the budget to 1e-12.
    Returns (capacity_bits, Q).
    """
    m = ch.num_streams
    _, sing, vt = np.linalg.svd(ch.H, full_matrices=True)
    gains = np.zeros(m)
    gains[: len(sing)] = sing**2
    budget = m * ch.snr
    positive = gains > (gains.max() * 1e-14 if gains.max() > 0 else np.inf)
    if not positive.any():
        return 0.0, np.zeros((m, m))
    inv_gain = 1.0 / gains[positive]

    def allocated(level: float) -> float:
        return float(np.maximum(0.0, level - inv_gain).sum())

    lo, hi = 0.0, budget + inv_gain.max()
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if allocated(mid) > budget:
            hi = mid
        else:
            lo = mid
    level = 0.5 * (lo + hi)
    powers = np.zeros(m)
    powers[positive] = np.maximum(0.0, level - inv_gain)
    value = float(0.5 * np.sum(np.log2(1.0 + powers * gains)))
    q = vt.T @ np.diag(powers) @ vt
    return value, 0.5 * (q + q.T)


# ---------------------------------------------------------------------------
# MMSE-SIC via noise prediction
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SicPlan:
    """MMSE-SIC noise-prediction outcome for a fixed decoding order."""

    G: np.ndarray  # lower-triangular Cholesky factor of (I + snr H^T H)^{-1}
    decode_order: tuple  # stream indices in decoding sequence (0-based)
    rates: tuple  # rate of the k-th decoded stream, -log2 g_kk
    stream_rates: tuple  # same rates indexed by original stream
    sum_rate: float


def mmse_sic_plan(ch: ChannelInstance, decode_order=None) -> SicPlan:
    """Per-stream MMSE-SIC rates -1/2 log2(g_mm^2) for a decoding order.

    The default order decodes stream 0 first. A different order permutes the
    channel columns before factoring, which reproduces the other corner
    points of the rate region; ``stream_rates`` maps the results back to the
    original stream indices.
    """
    m = ch.num_streams
    order = tuple(range(m)) if decode_order is None else tuple(int(i) for i in decode_order)
    if sorted(order) != list(range(m)):
        raise ValueError(f"decode_order must be a permutation of 0..{m - 1}")
    chp = ch if order == tuple(range(m)) else ch.with_columns(order)
    g = cholesky_lower(error_gram(chp))
    diag = np.diag(g)
    assert np.all(diag > 0) and np.all(diag <= 1.0 + 1e-12), "g_mm must lie in (0, 1]"
    rates = tuple(float(-np.log2(d)) for d in diag)
    stream_rates = [0.0] * m
    for step, stream in enumerate(order):
        stream_rates[stream] = rates[step]
    return SicPlan(
        G=g,
        decode_order=order,
        rates=rates,
        stream_rates=tuple(stream_rates),
        sum_rate=float(sum(rates)),
    )


# ---------------------------------------------------------------------------
# integer-forcing effective model
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EffectiveNoiseModel:
    """Equalizer and effective-noise geometry for one integer target matrix."""

    A: np.ndarray  # int64, full rank
    B: np.ndarray  # M x N equalizer
    Ktilde: np.ndarray  # generalized covariance of the effective noise
    L: np.ndarray  # lower Cholesky factor of A (I + snr H^T H)^{-1} A^T
    snr: float

    def __post_init__(self):
        if int_det(self.A) == 0:
            raise SingularA("effective model requires full-rank A")
        scale = max(np.abs(self.Ktilde).max(), 1e-300)
        if np.abs(self.Ktilde - self.snr * self.L @ self.L.T).max() > 1e-9 * scale:
            raise IfwbError("Ktilde does not match snr * L L^T")


def if_effective_model(ch: ChannelInstance, a) -> EffectiveNoiseModel:
    """Optimal equalizer B, generalized covariance Ktilde and Cholesky L for A.

    B = A H^T (I/snr + H H^T)^{-1} and Ktilde = snr A (I + snr H^T H)^{-1} A^T.
    The two expressions for Ktilde (direct filter algebra and the
    matrix-inversion-lemma form) are cross-checked to 1e-8 relative.
    """
    a = _validate_full_rank(a)
    m = ch.num_streams
    if a.shape[0] != m:
        raise ValueError(f"A must be {m}x{m} for this channel, got {a.shape}")
    af = a.astype(float)
    s = error_gram(ch)
    core = af @ s @ af.T
    ktilde = ch.snr * core
    l = cholesky_lower(0.5 * (core + core.T))
    b = af @ mmse_equalizer(ch)
    mismatch = b @ ch.H - af
    direct = ch.snr * (mismatch @ mismatch.T) + b @ b.T
    scale = max(np.abs(ktilde).max(), 1e-300)
    if np.abs(direct - ktilde).max() > 1e-8 * scale:
        raise IfwbError("filter-algebra and inversion-lemma covariances disagree")
    return EffectiveNoiseModel(A=a, B=b, Ktilde=ktilde, L=l, snr=ch.snr)


# ---------------------------------------------------------------------------
# per-equation and per-step rates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IfRates:
    """Standard (parallel) integer-forcing rates per equation."""

    raw: tuple  # -1/2 log2 of the L row norms; may be negative
    rates: tuple  # raw clamped at zero
    undecodable: tuple  # flags where clamping occurred
    symmetric_rate: float  # M * min rate


@dataclass(frozen=True)
class SuccessiveIfRates:
    """Successive integer-forcing per-step rates."""

    per_step: tuple  # -1/2 log2 l_mm^2
    symmetric_total: float  # M * min per_step
    sum_rate: float  # sum of per-step rates
    det_gap: float  # log2 |det A|


def if_rates(ch: ChannelInstance, a) -> IfRates:
    """Parallel IF rates (1/2) log2(snr / Ktilde_mm) per equation.

    Negative values (effective variance above snr) are clamped to zero and
    flagged undecodable; ``raw`` keeps the unclamped values.
    """
    model = if_effective_model(ch, a)
    row_sq = np.sum(model.L * model.L, axis=1)
    raw = tuple(float(-0.5 * np.log2(v)) for v in row_sq)
    rates = tuple(max(0.0, v) for v in raw)
    return IfRates(
        raw=raw,
        rates=rates,
        undecodable=tuple(v < 0.0 for v in raw),
        symmetric_rate=float(len(raw) * min(rates)),
    )


def successive_if_rates(ch: ChannelInstance, a) -> SuccessiveIfRates:
    """Per-step successive IF rates -1/2 log2(l_mm^2) from the Cholesky diagonal.

    The per-step rates telescope: their sum equals the white-input mutual
    information minus log2|det A|.
    """
    model = if_effective_model(ch, a)
    diag = np.diag(model.L)
    per_step = tuple(float(-np.log2(d)) for d in diag)
    det = abs(int_det(model.A))
    return SuccessiveIfRates(
        per_step=per_step,
        symmetric_total=float(len(per_step) * min(per_step)),
        sum_rate=float(sum(per_step)),
        det_gap=float(math.log2(det)),
    )


# ---------------------------------------------------------------------------
# pseudo-triangularization and rate allocation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PseudoTriangularization:
    """One feasible permutation with its eliminating filter: Atilde = R @ A."""

    permutation: tuple  # 0-based column permutation
    R: np.ndarray  # unit-diagonal lower triangular
    Atilde: np.ndarray  # Atilde[:, permutation] is upper triangular


def _feasible_permutations(a: np.ndarray) -> list[tuple]:
    """Permutations realizable by elimination without row swaps or scaling.

    A permutation is feasible iff every leading principal minor of the
    column-permuted matrix is nonzero; minors are computed in exact integer
    arithmetic.
    """
    m = a.shape[0]
    if m > MAX_PSEUDO_TRI_DIM:
        raise DimensionTooLarge(
            f"pseudo-triangularization scans {m}! permutations; guarded to {MAX_PSEUDO_TRI_DIM}"
        )
    feasible = []
    for perm in itertools.permutations(range(m)):
        cols = a[:, perm]
        if all(int_det(cols[:k, :k]) != 0 for k in range(1, m + 1)):
            feasible.append(perm)
    return feasible


def pseudo_triangularize(a) -> list[PseudoTriangularization]:
    """All column permutations under which A becomes upper triangular.

    Feasibility of a permutation is decided exactly: Gaussian elimination
    without row swaps or scaling succeeds iff every leading principal minor
    of the column-permuted matrix is nonzero (checked in integer
    arithmetic). At least one permutation is always feasible for full-rank A.
    """
    a = _validate_full_rank(a)
    m = a.shape[0]
    results = []
    for perm in _feasible_permutations(a):
        cols = a[:, perm]
        work = cols.astype(float)
        r = np.eye(m)
        for j in range(m - 1):
            for i in range(j + 1, m):
                factor = work[i, j] / work[j, j]
                work[i, :] -= factor * work[j, :]
                r[i, :] -= factor * r[j, :]
        atilde = r @ a.astype(float)
        strict_lower = np.tril(atilde[:, perm], -1)
        if np.abs(strict_lower).max() > 1e-10 * max(1.0, np.abs(atilde).max()):
            raise IfwbError("elimination failed to triangularize a feasible permutation")
        results.append(PseudoTriangularization(permutation=perm, R=r, Atilde=atilde))
    if not results:
        raise IfwbError("full-rank matrix produced no feasible permutation")
    return results


@dataclass(frozen=True)
class AllocationPlan:
    """Rate allocation for one feasible permutation of the integer matrix."""

    permutation: tuple
    stream_rates: tuple  # rate of stream m (original indexing)
    monotone_feasible: bool  # Cholesky diagonal is nondecreasing (or A == I)
    sum_rate: float
    sum_rate_gap: float  # log2 |det A|


def allocate_rates(ch: ChannelInstance, a, permutation) -> AllocationPlan:
    """Per-stream rate allocation for a feasible permutation.

    Stream m is assigned the per-step rate at position perm^{-1}(m). The plan
    is marked feasible when the squared Cholesky diagonal is nondecreasing
    (always, for A = I, where the allocation degenerates to plain SIC); an
    infeasible plan falls back to the conservative symmetric allocation.
    """
    a = _validate_full_rank(a)
    m = ch.num_streams
    perm = tuple(int(i) for i in permutation)
    if sorted(perm) != list(range(m)):
        raise ValueError(f"permutation must be a permutation of 0..{m - 1}")
    if perm not in _feasible_permutations(a):
        raise InfeasiblePermutation(f"permutation {perm} is not feasible for this A")
    model = if_effective_model(ch, a)
    diag = np.diag(model.L)
    per_step = tuple(float(-np.log2(d)) for d in diag)
    diag_sq = diag**2
    det_gap = float(math.log2(abs(int_det(a))))
    is_identity = np.array_equal(a, np.eye(m, dtype=np.int64))
    monotone = bool(np.all(diag_sq[:-1] <= diag_sq[1:] * (1.0 + 1e-12)))
    feasible = monotone or is_identity
    if feasible:
        stream_rates = tuple(per_step[perm.index(s)] for s in range(m))
        sum_rate = float(sum(stream_rates))
    else:
        sym = max(0.0, min(per_step))
        stream_rates = (sym,) * m
        sum_rate = float(m * sym)
    return AllocationPlan(
        permutation=perm,
        stream_rates=stream_rates,
        monotone_feasible=feasible,
        sum_rate=sum_rate,
        sum_rate_gap=det_gap,
    )


# ---------------------------------------------------------------------------
# optimal integer matrix
# ---------------------------------------------------------------------------

def sic_cholesky(ch: ChannelInstance) -> np.ndarray:
    """Lower Cholesky factor G of (I + snr H^T H)^{-1}."""
    return cholesky_lower(error_gram(ch))


def optimal_a(ch: ChannelInstance, mode: str = "kz_exact", bound: int | None = None) -> np.ndarray:
    """Integer matrix minimizing the worst per-step prediction residual.

    Modes:
    - "kz_exact": exact Korkin-Zolotarev reduction of the lattice spanned by
      G^T; the returned A is unimodular and provably optimal.
    - "kz_lll": successive-LLL approximation of the KZ basis (no dimension
      guard, optimality not guaranteed).
    - "brute_force": exhaustive search over entries in [-bound, bound]
      (requires ``bound``; dimension guarded), used as an independent oracle.
    """
    g = sic_cholesky(ch)
    if mode == "kz_exact":
        report = kz_reduce(g.T)
        return report.transform.T.copy()
    if mode == "kz_lll":
        report = kz_approx_successive_lll(g.T)
        return report.transform.T.copy()
    if mode == "brute_force":
        if bound is None:
            raise ValueError("brute_force mode requires an entry bound")
        a, _ = brute_force_min_max(g, bound, objective="successive_if")
        return a
    raise ValueError(f"unknown mode {mode!r}")


def successive_objective(ch: ChannelInstance, a) -> float:
    """max_m l_mm^2 for the given A: the quantity optimal_a minimizes."""
    model = if_effective_model(ch, a)
    return float(np.max(np.diag(model.L) ** 2))


# ---------------------------------------------------------------------------
# decision-feedback (GDFE) realization
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GdfeFilters:
    """Forward filter, monic feedback filter and the diagonalized covariance."""

    B: np.ndarray  # forward filter, M x N
    Rmonic: np.ndarray  # unit-diagonal lower triangular
    Cfeedback: np.ndarray  # Rmonic - I (strictly lower triangular)
    Kee: np.ndarray  # resulting error covariance snr * diag(l_11^2 .. l_MM^2)


def gdfe_filters(ch: ChannelInstance, a) -> GdfeFilters:
    """Optimal decision-feedback filters equivalent to noise prediction.

    With R = diag(l_11..l_MM) L^{-1} the error covariance becomes exactly
    snr * diag(l_mm^2), so the per-step rates coincide with
    successive_if_rates.
    """
    model = if_effective_model(ch, a)
    l = model.L
    diag = np.diag(l)
    rmonic = np.tril(np.diag(diag) @ np.linalg.inv(l))
    np.fill_diagonal(rmonic, 1.0)
    cfeedback = rmonic - np.eye(l.shape[0])
    np.fill_diagonal(cfeedback, 0.0)
    b = rmonic @ model.B
    rl = rmonic @ l
    kee = ch.snr * (rl @ rl.T)
    off = np.abs(kee - np.diag(np.diag(kee))).max()
    if off > 1e-9 * np.trace(kee):
        raise IfwbError("GDFE covariance failed to diagonalize")
    if np.abs(np.diag(kee) - ch.snr * diag**2).max() > 1e-9 * np.abs(kee).max():
        raise IfwbError("GDFE covariance diagonal does not match snr * l_mm^2")
    return GdfeFilters(B=b, Rmonic=rmonic, Cfeedback=cfeedback, Kee=kee)


# ---------------------------------------------------------------------------
# decoding error bounds
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DecodingErrorBounds:
    poltyrev_exponent_positive: bool
    construction_a_component_bound: float


def decoding_error_bounds(rate: float, snr: float, sigma2_eff: float) -> DecodingErrorBounds:
    """Sign of the fine-lattice error exponent and the per-component slip bound.

    The exponent is positive iff (1/2) log2(snr / sigma2_eff) exceeds the
    rate; the per-component bound for integer-lattice (PAM-alphabet)
    codebooks is exp(-(pi e / 4) 2^{2 rate}).
    """
    if not (snr > 0 and sigma2_eff > 0 and rate >= 0):
        raise ValueError("rate must be >= 0 and snr, sigma2_eff positive")
    exponent = 0.5 * math.log2(snr / sigma2_eff) - rate
    bound = math.exp(-(math.pi * math.e / 4.0) * 2.0 ** (2.0 * rate))
    return DecodingErrorBounds(
        poltyrev_exponent_positive=exponent > 0.0,
        construction_a_component_bound=bound,
    )
