"""Two-user MAC rate-region enumeration for successive integer-forcing.

Scans a bounded box of integer target matrices, keeps every feasible
allocation plus the two plain-SIC corner points, and extracts the Pareto
frontier together with the capacity pentagon. Enumeration is deterministic:
candidates are generated in lexicographic order and results are sorted by
rate tuple before deduplication and frontier extraction.
"""

from __future__ import annotations

import itertools
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DimensionTooLarge, IfwbError, WrongDimension
from .lattice import int_det
from .rates import (
    ChannelInstance,
    allocate_rates,
    mmse_sic_plan,
    pseudo_triangularize,
    white_input_capacity,
)

MAX_COEFF_BOUND = 5
_DEDUP_TOL = 1e-9


def default_workers() -> int:
    """Worker count for enumeration: IFWB_THREADS if set, else hardware default."""
    env = os.environ.get("IFWB_THREADS")
    if env is not None:
        count = int(env)
        if count < 1:
            raise ValueError("IFWB_THREADS must be a positive integer")
        return count
    return os.cpu_count() or 1


@dataclass(frozen=True)
class RatePoint:
    """One achievable rate tuple and how it was obtained."""

    rates: tuple
    source: str  # "sic_corner" or "successive_if"
    A: tuple  # integer matrix as nested tuples
    permutation: tuple

    @property
    def det_a(self) -> int:
        return int_det(np.array(self.A, dtype=np.int64))


@dataclass(frozen=True)
class RateRegion:
    points: tuple
    frontier: tuple
    capacity_vertices: tuple


def capacity_polytope_2user(ch: ChannelInstance):
    """Vertices of the 2-user pentagon {R1 <= I1, R2 <= I2, R1+R2 <= C_WI}, CCW.

    I_m is the single-user rate (1/2) log2(1 + snr ||h_m||^2); the corner
    points coincide with the MMSE-SIC rates under the two decode orders.
    """
    if ch.num_streams != 2:
        raise WrongDimension(f"pentagon geometry needs 2 streams, got {ch.num_streams}")
    i1 = 0.5 * np.log2(1.0 + ch.snr * float(ch.H[:, 0] @ ch.H[:, 0]))
    i2 = 0.5 * np.log2(1.0 + ch.snr * float(ch.H[:, 1] @ ch.H[:, 1]))
    c = white_input_capacity(ch)
    raw = [
        (0.0, 0.0),
        (i1, 0.0),
        (i1, c - i1),
        (c - i2, i2),
        (0.0, i2),
    ]
    vertices = []
    for v in raw:
        if not vertices or max(abs(v[0] - vertices[-1][0]), abs(v[1] - vertices[-1][1])) > 1e-12:
            vertices.append((float(v[0]), float(v[1])))
    return vertices


def pentagon_contains(ch: ChannelInstance, rates, slack: float = 1e-9) -> bool:
    """Whether a rate pair satisfies the individual and sum constraints."""
    if ch.num_streams != 2:
        raise WrongDimension("containment check is 2-user only")
    r1, r2 = float(rates[0]), float(rates[1])
    i1 = 0.5 * np.log2(1.0 + ch.snr * float(ch.H[:, 0] @ ch.H[:, 0]))
    i2 = 0.5 * np.log2(1.0 + ch.snr * float(ch.H[:, 1] @ ch.H[:, 1]))
    c = white_input_capacity(ch)
    return (
        r1 >= -slack
        and r2 >= -slack
        and r1 <= i1 + slack
        and r2 <= i2 + slack
        and r1 + r2 <= c + slack
    )


def _points_for_matrices(ch: ChannelInstance, matrices) -> list:
    points = []
    for a in matrices:
        if int_det(a) == 0:
            continue
        for tri in pseudo_triangularize(a):
            plan = allocate_rates(ch, a, tri.permutation)
            if not plan.monotone_feasible:
                continue
            rates = tuple(max(0.0, r) for r in plan.stream_rates)
            points.append(
                RatePoint(
                    rates=rates,
                    source="successive_if",
                    A=tuple(tuple(int(v) for v in row) for row in a),
                    permutation=plan.permutation,
                )
            )
    return points


def enumerate_achievable_points(
    ch: ChannelInstance, coeff_bound: int, workers: int | None = None
) -> RateRegion:
    """Achievable region: feasible allocations over a bounded integer box.

    Scans every full-rank integer A with entries in [-coeff_bound,
    coeff_bound], keeps allocation plans that are monotone-feasible, adds the
    two SIC corners, deduplicates rate tuples to 1e-9 and computes the Pareto
    frontier. Rates are clamped at zero (sending nothing is always allowed).
    """
    if ch.num_streams != 2:
        raise DimensionTooLarge("region enumeration is guarded to 2 streams")
    bound = int(coeff_bound)
    if not 1 <= bound <= MAX_COEFF_BOUND:
        raise ValueError(f"coeff_bound must be in [1, {MAX_COEFF_BOUND}]")

    points = []
    for order in ((0, 1), (1, 0)):
        plan = mmse_sic_plan(ch, decode_order=order)
        points.append(
            RatePoint(
                rates=tuple(max(0.0, r) for r in plan.stream_rates),
                source="sic_corner",
                A=((1, 0), (0, 1)),
                permutation=order,
            )
        )

    entries = range(-bound, bound + 1)
    matrices = [
        np.array([[a, b], [c, d]], dtype=np.int64)
        for a, b, c, d in itertools.product(entries, repeat=4)
    ]
    nworkers = default_workers() if workers is None else max(1, int(workers))
    if nworkers == 1 or len(matrices) < 256:
        points.extend(_points_for_matrices(ch, matrices))
    else:
        chunks = np.array_split(np.arange(len(matrices)), nworkers)
        with ThreadPoolExecutor(max_workers=nworkers) as pool:
            parts = pool.map(
                lambda idx: _points_for_matrices(ch, [matrices[i] for i in idx]), chunks
            )
            for part in parts:  # chunk order fixed, merge deterministic
                points.extend(part)

    for p in points:
        if not pentagon_contains(ch, p.rates):
            raise IfwbError(f"enumerated point {p.rates} exceeds the capacity pentagon")

    points.sort(key=lambda p: (p.rates, p.source, p.A, p.permutation))
    kept = []
    for p in points:
        duplicate = any(
            abs(p.rates[0] - k.rates[0]) <= _DEDUP_TOL
            and abs(p.rates[1] - k.rates[1]) <= _DEDUP_TOL
            for k in kept
        )
        if not duplicate:
            kept.append(p)

    frontier = tuple(p for p in kept if not _dominated(p, kept))
    return RateRegion(
        points=tuple(kept),
        frontier=frontier,
        capacity_vertices=tuple(capacity_polytope_2user(ch)),
    )


def _dominated(p: RatePoint, points) -> bool:
    for q in points:
        if q is p:
            continue
        if (
            q.rates[0] >= p.rates[0]
            and q.rates[1] >= p.rates[1]
            and (q.rates[0] > p.rates[0] or q.rates[1] > p.rates[1])
        ):
            return True
    return False
