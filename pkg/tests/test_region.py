import numpy as np
import pytest

from ifwb.errors import DimensionTooLarge, WrongDimension
from ifwb.rates import ChannelInstance, mmse_sic_plan, white_input_capacity
from ifwb.region import (
    capacity_polytope_2user,
    enumerate_achievable_points,
    pentagon_contains,
)

ANCHOR_TOL = 5e-4


def _contains_rate_pair(points, r1, r2, tol=ANCHOR_TOL):
    return any(abs(p.rates[0] - r1) <= tol and abs(p.rates[1] - r2) <= tol for p in points)


class TestCapacityPolytope:
    def test_example_corners(self, example1):
        vertices = capacity_polytope_2user(example1)
        assert _contains_rate_pair_like(vertices, 0.7776, 2.5139)
        assert _contains_rate_pair_like(vertices, 3.0028, 0.2887)

    def test_corner_sums_equal_cwi(self, example1):
        vertices = capacity_polytope_2user(example1)
        cwi = white_input_capacity(example1)
        sums = sorted(v[0] + v[1] for v in vertices)
        # the two sum-face vertices hit the sum-capacity
        assert abs(sums[-1] - cwi) <= 1e-9
        assert abs(sums[-2] - cwi) <= 1e-9

    def test_corners_match_sic_orders(self, example1):
        vertices = capacity_polytope_2user(example1)
        for order in ((0, 1), (1, 0)):
            plan = mmse_sic_plan(example1, decode_order=order)
            assert _contains_rate_pair_like(vertices, *plan.stream_rates, tol=1e-9)

    def test_orthogonal_equal_norm_degenerates_to_rectangle(self):
        ch = ChannelInstance(np.eye(2), 10.0)
        vertices = capacity_polytope_2user(ch)
        assert len(vertices) == 4  # pentagon collapses: sum face is a point
        i1 = 0.5 * np.log2(11.0)
        assert _contains_rate_pair_like(vertices, i1, i1, tol=1e-9)

    def test_wrong_dimension(self):
        with pytest.raises(WrongDimension):
            capacity_polytope_2user(ChannelInstance(np.eye(3), 2.0))


def _contains_rate_pair_like(pairs, r1, r2, tol=ANCHOR_TOL):
    return any(abs(p[0] - r1) <= tol and abs(p[1] - r2) <= tol for p in pairs)


@pytest.fixture(scope="module")
def region():
    ch = ChannelInstance(np.array([[np.sqrt(2.0), 1.0]]), 10.0**1.5)
    return ch, enumerate_achievable_points(ch, 3, workers=1)


class TestEnumerateAchievablePoints:
    def test_frontier_contains_all_marked_points(self, region):
        _, reg = region
        assert _contains_rate_pair(reg.frontier, 1.8452, 1.4463)
        assert _contains_rate_pair(reg.frontier, 1.4463, 1.8452)
        assert _contains_rate_pair(reg.frontier, 0.7776, 2.5139)
        assert _contains_rate_pair(reg.frontier, 3.0028, 0.2887)

    def test_sic_corners_present_as_sources(self, region):
        _, reg = region
        corners = [p for p in reg.points if p.source == "sic_corner"]
        assert len(corners) == 2

    def test_points_inside_pentagon(self, region):
        ch, reg = region
        for p in reg.points:
            assert pentagon_contains(ch, p.rates, slack=1e-9)

    def test_unimodular_points_on_sum_face(self, region):
        ch, reg = region
        cwi = white_input_capacity(ch)
        for p in reg.points:
            if p.source == "successive_if" and abs(p.det_a) == 1:
                assert abs(sum(p.rates) - cwi) <= 1e-9

    def test_identity_only_scan_gives_sic_rectangles(self, region):
        ch, reg = region
        ident = ((1, 0), (0, 1))
        ident_points = {p.rates for p in reg.points if p.A == ident}
        corner_points = {p.rates for p in reg.points if p.source == "sic_corner"}
        # A = I achievable points coincide with the plain-SIC corners
        for rates in ident_points:
            assert any(
                max(abs(rates[i] - c[i]) for i in (0, 1)) <= 1e-9 for c in corner_points
            )

    def test_frontier_is_undominated_subset(self, region):
        _, reg = region
        point_set = {p.rates for p in reg.points}
        for f in reg.frontier:
            assert f.rates in point_set
            for q in reg.points:
                if q.rates == f.rates:
                    continue
                dominated = (
                    q.rates[0] >= f.rates[0]
                    and q.rates[1] >= f.rates[1]
                    and (q.rates[0] > f.rates[0] or q.rates[1] > f.rates[1])
                )
                assert not dominated

    def test_deterministic_and_worker_independent(self, region):
        ch, reg = region
        again = enumerate_achievable_points(ch, 3, workers=1)
        threaded = enumerate_achievable_points(ch, 3, workers=4)
        assert [p.rates for p in again.points] == [p.rates for p in reg.points]
        assert [p.rates for p in threaded.points] == [p.rates for p in reg.points]
        assert [p.rates for p in threaded.frontier] == [p.rates for p in reg.frontier]

    def test_guards(self):
        with pytest.raises(DimensionTooLarge):
            enumerate_achievable_points(ChannelInstance(np.eye(3), 2.0), 2)
        ch = ChannelInstance(np.eye(2), 2.0)
        with pytest.raises(ValueError):
            enumerate_achievable_points(ch, 0)
        with pytest.raises(ValueError):
            enumerate_achievable_points(ch, 6)


class TestWorkerEnv:
    def test_env_caps_worker_count(self, monkeypatch):
        from ifwb.region import default_workers

        monkeypatch.setenv("IFWB_THREADS", "2")
        assert default_workers() == 2
        monkeypatch.setenv("IFWB_THREADS", "0")
        with pytest.raises(ValueError):
            default_workers()
        monkeypatch.delenv("IFWB_THREADS")
        assert default_workers() >= 1

    def test_env_applies_to_enumeration(self, monkeypatch, region):
        ch, reg = region
        monkeypatch.setenv("IFWB_THREADS", "2")
        threaded = enumerate_achievable_points(ch, 3)
        assert [p.rates for p in threaded.points] == [p.rates for p in reg.points]
