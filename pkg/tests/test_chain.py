from __future__ import annotations

import pytest

from polycong.chain import check_instance, j_stats, run_cell, run_grid
from polycong.counting import count_J, count_T
from polycong.poly import Polynomial, parse


def test_single_instance_passes_every_link():
    F = parse("x1^2+3*x1*x2+x2", 11)
    res = check_instance(F, [2, 5], 4, 3, 3, 2)
    assert res.ok
    G = F.translate([2, 5]) - Polynomial(11, 2, {(0, 0): 4})
    assert res.T_star == count_T(G, res.u_star, 3, 2).count
    assert res.J0 == count_J(2, 2, 2, 0, 3).count
    assert res.J_max_other <= res.J0
    assert res.uset_star <= res.uset_bound
    assert "master pass" in res.to_text()


def test_instance_with_long_interval():
    res = check_instance(parse("x1^3+2*x1", 7), [1], 0, 6, 7, 1)
    assert res.ok and res.R == 7


def test_bad_sizes():
    with pytest.raises(ValueError):
        check_instance(parse("x1^2", 7), [0], 0, 0, 1, 1)
    with pytest.raises(ValueError):
        run_grid({"s": (0,)})
    with pytest.raises(ValueError):
        run_grid({"m": ()})


def test_j_stats_cached_and_consistent():
    a = j_stats(2, 2, 1, 4)
    assert a is j_stats(2, 2, 1, 4)
    assert a.J0 == count_J(2, 2, 1, 0, 4).count
    assert 0 < a.max_other <= a.J0


def test_cell_shares_instances_across_R():
    rows = run_cell(1, 2, 7, 3, 1, ["1", "H", "m"], seed=3, polys=5)
    assert [r.R for r in rows] == [1, 3, 7]
    assert all(r.instances == 5 and r.violations == 0 for r in rows)


def test_small_grid_is_deterministic():
    grid = {"d": (1, 2), "k": (2,), "m": (5, 6, 11), "H": (2, 3), "s": (1,)}
    a = run_grid(grid, seed=7, polys=4, threads=1).to_text()
    b = run_grid(grid, seed=7, polys=4, threads=3).to_text()
    assert a == b
    assert "violations=0" in a.splitlines()[0]
    assert len(a.splitlines()) == 2 + 2 * 3 * 2 * 3
