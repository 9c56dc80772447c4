import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dirmax.geometry import (
    Rect,
    make_directions,
    mc_intersection_area,
    rect_contains,
    rect_double,
    rect_intersection_area,
    rect_reslope,
)

rect_strategy = st.builds(
    Rect,
    center=st.tuples(
        st.floats(-1.0, 2.0, allow_nan=False), st.floats(-1.0, 2.0, allow_nan=False)
    ),
    h=st.floats(0.05, 2.0, allow_nan=False),
    ecc=st.floats(0.05, 1.0, allow_nan=False),
    theta=st.floats(0.0, math.pi, exclude_max=True, allow_nan=False),
)


class TestRect:
    def test_validation(self):
        with pytest.raises(ValueError):
            Rect(center=(0, 0), h=-1.0, ecc=0.5, theta=0.0)
        with pytest.raises(ValueError):
            Rect(center=(0, 0), h=1.0, ecc=0.0, theta=0.0)
        with pytest.raises(ValueError):
            Rect(center=(0, 0), h=1.0, ecc=1.5, theta=0.0)
        with pytest.raises(ValueError):
            Rect(center=(0, 0), h=1.0, ecc=0.5, theta=math.pi)

    def test_area_formula(self):
        r = Rect(center=(0.3, 0.4), h=0.5, ecc=0.25, theta=1.0)
        assert r.area == 0.25 * 0.5 * 0.5
        assert r.w == 0.25 * 0.5

    def test_contains_center(self):
        r = Rect(center=(0, 0), h=2.0, ecc=0.5, theta=0.0)
        assert rect_contains(r, (0.0, 0.0))

    def test_contains_beyond_half_length(self):
        r = Rect(center=(0, 0), h=2.0, ecc=0.5, theta=0.0)
        assert not rect_contains(r, (1.01, 0.0))

    def test_contains_rotated_90(self):
        # Rotating by 90 degrees swaps the roles of the axes: the long
        # half-extent (1.0) now runs along y and the half-width (0.5)
        # along x.  Checked by hand-rotating the coordinates.
        r = Rect(center=(0, 0), h=2.0, ecc=0.5, theta=math.pi / 2)
        assert rect_contains(r, (0.0, 0.9))
        assert rect_contains(r, (0.4, 0.0))  # inside: |0.4| <= w/2 = 0.5
        assert not rect_contains(r, (0.6, 0.0))
        assert not rect_contains(r, (0.0, 1.01))


class TestIntersectionArea:
    def test_self_intersection(self):
        r = Rect(center=(0.2, 0.7), h=0.8, ecc=0.3, theta=0.9)
        assert rect_intersection_area(r, r) == pytest.approx(r.area, rel=1e-12)

    def test_disjoint(self):
        r1 = Rect(center=(0, 0), h=1.0, ecc=0.5, theta=0.3)
        r2 = Rect(center=(10, 0), h=1.0, ecc=0.5, theta=1.2)
        assert rect_intersection_area(r1, r2) == 0.0

    def test_square_rotated_45(self):
        # Unit square against its own 45-degree rotation: a regular octagon
        # of area 2 (sqrt(2) - 1).
        r1 = Rect(center=(0, 0), h=1.0, ecc=1.0, theta=0.0)
        r2 = Rect(center=(0, 0), h=1.0, ecc=1.0, theta=math.pi / 4)
        expected = 2.0 * (math.sqrt(2.0) - 1.0)
        area = rect_intersection_area(r1, r2)
        assert area == pytest.approx(expected, rel=1e-9)
        est, se = mc_intersection_area(r1, r2, 10**6, seed=7)
        assert abs(est - expected) <= 3.0 * se + 1e-9

    @settings(max_examples=60, deadline=None)
    @given(rect_strategy, rect_strategy)
    def test_symmetry(self, r1, r2):
        a = rect_intersection_area(r1, r2)
        b = rect_intersection_area(r2, r1)
        assert a == pytest.approx(b, rel=1e-12, abs=1e-12)

    @settings(max_examples=60, deadline=None)
    @given(rect_strategy, rect_strategy)
    def test_doubling_monotone(self, r1, r2):
        a = rect_intersection_area(r1, r2)
        b = rect_intersection_area(rect_double(r1), r2)
        assert b >= a - 1e-12

    @settings(max_examples=60, deadline=None)
    @given(rect_strategy, rect_strategy)
    def test_bounded_by_either_area(self, r1, r2):
        a = rect_intersection_area(r1, r2)
        assert -1e-12 <= a <= min(r1.area, r2.area) + 1e-9

    def test_monte_carlo_agreement_bulk(self):
        # Distributional agreement: individual pairs exceed 3 sigma at the
        # Gaussian rate, so check the 99th percentile and a 6-sigma cap.
        rng = np.random.default_rng(11)
        devs = []
        for k in range(10**4):
            r1 = Rect(center=tuple(rng.uniform(0, 1, 2)), h=float(rng.uniform(0.1, 1.0)),
                      ecc=float(rng.uniform(0.05, 1.0)), theta=float(rng.uniform(0, math.pi)))
            r2 = Rect(center=tuple(np.asarray(r1.center) + rng.uniform(-0.4, 0.4, 2)),
                      h=float(rng.uniform(0.1, 1.0)), ecc=float(rng.uniform(0.05, 1.0)),
                      theta=float(rng.uniform(0, math.pi)))
            area = rect_intersection_area(r1, r2)
            est, se = mc_intersection_area(r1, r2, 400, seed=k)
            devs.append(abs(area - est) / (3.0 * se + 1e-9))
        devs = np.asarray(devs)
        assert float(np.quantile(devs, 0.99)) <= 1.0
        assert float(np.max(devs)) <= 2.0


class TestDoubleReslope:
    def test_double_fields(self):
        r = Rect(center=(0.1, 0.2), h=1.0, ecc=0.5, theta=0.4)
        d = rect_double(r)
        assert d.center == r.center and d.theta == r.theta
        assert d.h == 2.0 and d.ecc == r.ecc
        assert d.area == pytest.approx(4.0 * r.area, rel=1e-12)

    def test_double_contains_original(self):
        r = Rect(center=(0.1, 0.2), h=1.0, ecc=0.5, theta=0.4)
        assert rect_intersection_area(r, rect_double(r)) == pytest.approx(r.area, rel=1e-12)

    def test_reslope(self):
        r = Rect(center=(0.5, 0.5), h=0.25, ecc=0.5, theta=0.3)
        p = rect_reslope(r, 0.1)
        assert p.center == r.center and p.h == 0.5 and p.theta == 0.1

    def test_reslope_same_angle_is_double(self):
        r = Rect(center=(0.5, 0.5), h=0.25, ecc=0.5, theta=0.3)
        assert rect_reslope(r, r.theta) == rect_double(r)

    def test_double_reslope_twice_not_identity(self):
        r = Rect(center=(0.5, 0.5), h=0.25, ecc=0.5, theta=0.3)
        rr = rect_reslope(rect_reslope(r, 0.1), r.theta)
        assert rr.h == 4.0 * r.h


class TestDirections:
    def test_uniform(self):
        ds = make_directions("uniform", count=4)
        assert ds.slopes == (1.0, 0.75, 0.5, 0.25)

    def test_lacunary(self):
        ds = make_directions("lacunary", ratio=0.5, count=3)
        assert ds.slopes == (0.5, 0.25, 0.125)

    def test_explicit_sector_convention(self):
        ds = make_directions("explicit", slopes=[0.9, 0.5, 0.1], anchors=[0.9, 0.1])
        # 0.5 falls in the sector opened by the larger anchor 0.9.
        assert ds.sector_of[ds.slopes.index(0.5)] == ds.sector_of[ds.slopes.index(0.9)]

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError):
            make_directions("explicit", slopes=[])
        with pytest.raises(ValueError):
            make_directions("explicit", slopes=[0.5, 1.5])
        with pytest.raises(ValueError):
            make_directions("explicit", slopes=[0.5, 0.5, 0.2])
        with pytest.raises(ValueError):
            make_directions("uniform", count=0)
        with pytest.raises(ValueError):
            make_directions("lacunary", ratio=1.2, count=3)

    def test_anchor_stride(self):
        ds = make_directions("uniform", count=6, anchors=("every", 2))
        assert ds.anchor_indices == (0, 2, 4)

    @settings(max_examples=40, deadline=None)
    @given(
        st.lists(st.floats(0.001, 1.0, allow_nan=False), min_size=1, max_size=12,
                 unique=True),
        st.integers(1, 4),
    )
    def test_sector_partition(self, slopes, stride):
        ds = make_directions("explicit", slopes=sorted(slopes, reverse=True),
                             anchors=("every", stride))
        seen = []
        for j in range(ds.sector_count):
            members = ds.sector_members(j)
            assert not set(members) & set(seen)
            seen.extend(members)
        assert sorted(seen) == list(range(ds.size))
        # anchors carry the sector they open
        for rank, idx in enumerate(ds.anchor_indices):
            assert ds.sector_of[idx] == rank + 1

    def test_angles_match_slopes(self):
        ds = make_directions("uniform", count=5)
        for s, a in zip(ds.slopes, ds.angles):
            assert a == pytest.approx(math.atan(s), rel=1e-15)
