from __future__ import annotations

import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polycong.regions import (Ball, Box, Ellipsoid, OracleRegion, Polytope, RegionError, ShellBudgetError, Simplex,
                              load_region, random_polytope, region_from_spec, wellshaped_constant)


class TestMembership:
    def test_ball_boundary_residue_is_inside(self):
        B = Ball([0.5, 0.5], 0.3)
        # (8, 5)/10 lies exactly on the circle
        assert B.contains_residues(np.array([[8, 5], [9, 5]]), 10).tolist() == [True, False]

    def test_box_closed(self):
        B = Box([0, 0], ["0.5", "0.5"])
        assert B.contains_residues(np.array([[5, 5], [6, 0]]), 10).tolist() == [True, False]

    def test_polytope_exact_tie(self):
        P = Polytope([([1, 1], "1")])
        assert P.contains_residues(np.array([[3, 7], [4, 7]]), 10).tolist() == [True, False]

    def test_ball_outside_cube_rejected(self):
        with pytest.raises(RegionError):
            Ball([0.1, 0.5], 0.3)


class TestMeasure:
    def test_exact_values(self):
        assert Box([0, 0], ["0.5", "0.25"]).measure().value == pytest.approx(0.125)
        assert Ball([0.5] * 3, 0.3).measure().value == pytest.approx(4 / 3 * math.pi * 0.027)
        assert Simplex([[0, 0], [1, 0], [0, 1]]).measure().value == pytest.approx(0.5)
        assert Ellipsoid([0.5, 0.5], [0.4, 0.2]).measure().value == pytest.approx(math.pi * 0.08)

    def test_polytope_volume(self):
        P = Polytope([([1, 1], "1")])
        assert P.measure().value == pytest.approx(0.5)

    def test_monte_carlo_error_bar_covers_truth(self):
        R = OracleRegion.wrap(Ball([0.5, 0.5], 0.25))
        est = R.measure(200_000, seed=3)
        assert est.method == "monte-carlo"
        assert abs(est.value - math.pi / 16) <= est.error_bound

    def test_seeded_estimates_repeat(self):
        R = OracleRegion.wrap(Ball([0.5, 0.5], 0.25))
        assert R.measure(70_000, seed=5) == R.measure(70_000, seed=5)


class TestShells:
    def test_box_outer_strip(self):
        # only the right edge of [0, 0.9] x [0, 1] can grow inside the cube
        est = Box([0, 0], ["0.9", "1"]).shell_measure(0.1, "outer")
        assert est.value == pytest.approx(0.1)

    def test_ball_inner_annulus(self):
        est = Ball([0.5, 0.5], 0.25).shell_measure(0.05, "inner")
        assert est.value == pytest.approx(math.pi * (0.25**2 - 0.2**2))

    @pytest.mark.parametrize("side", ["outer", "inner"])
    def test_exact_and_sampled_agree(self, side):
        B = Ball([0.5, 0.5], 0.3)
        exact = B.shell_measure(0.05, side)
        sampled = OracleRegion.wrap(B, with_distance=True).shell_measure(0.05, side, budget=400_000, seed=1)
        assert abs(exact.value - sampled.value) <= sampled.error_bound + 1e-12

    def test_probe_budget_error(self):
        R = OracleRegion(2, lambda p: np.linalg.norm(p - 0.5, axis=1) <= 0.3)
        with pytest.raises(ShellBudgetError):
            R.shell_measure(0.001, "outer", budget=1000)

    def test_wellshaped_constant_box(self):
        # shells of [0, 1/2]^2 have measure about 2 eps
        est = wellshaped_constant(Box([0, 0], ["0.5", "0.5"]), [0.02, 0.01])
        assert 1.9 <= est.C <= 2.05


class TestSpecs:
    @pytest.mark.parametrize("spec", [
        {"kind": "box", "lo": ["0.1", "0.2"], "hi": ["0.7", "0.9"]},
        {"kind": "ball", "center": ["0.5", "0.5", "0.5"], "radius": "0.3"},
        {"kind": "ellipsoid", "center": ["0.5", "0.5"], "axes": ["0.3", "0.2"]},
        {"kind": "polytope", "halfspaces": [{"normal": ["1", "1"], "offset": "1"}]},
        {"kind": "simplex", "vertices": [["0", "0"], ["1", "0"], ["0", "1"]]},
    ])
    def test_round_trip(self, spec):
        R = region_from_spec(spec)
        again = region_from_spec(json.loads(R.describe()))
        pts = np.random.default_rng(0).random((500, R.dims))
        assert (R.contains_many(pts) == again.contains_many(pts)).all()

    def test_load_full(self):
        assert load_region("full", 3).measure().value == 1.0
        with pytest.raises(RegionError):
            load_region("full")

    def test_unknown_kind(self):
        with pytest.raises(RegionError):
            region_from_spec({"kind": "torus"})


@given(st.integers(2, 3), st.integers(0, 2**32 - 1))
@settings(max_examples=15, deadline=None)
def test_random_polytope_distance_is_consistent(d, seed):
    rng = np.random.default_rng(seed)
    P = random_polytope(d, 10, rng)
    pts = rng.random((300, d))
    dist = P.distance(pts)
    inside = P.contains_many(pts)
    assert (dist[inside] == 0).all()
    assert (dist[~inside] > 0).all()
    # distance is 1-Lipschitz
    q = pts + rng.normal(scale=0.01, size=pts.shape)
    assert (np.abs(P.distance(q) - dist) <= np.linalg.norm(q - pts, axis=1) + 1e-9).all()


def test_fraction_inputs_are_exact():
    B = Box([Fraction(1, 3), 0], [Fraction(2, 3), 1])
    assert B.contains_residues(np.array([[1, 0], [2, 3]]), 3).tolist() == [True, True]
    assert B.contains_residues(np.array([[0, 0]]), 3).tolist() == [False]
