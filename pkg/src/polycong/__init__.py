"""Exact counting of solutions to polynomial congruences in well-shaped sets.

Modules:

* :mod:`polycong.poly`     sparse polynomials over Z_m and multi-index bookkeeping
* :mod:`polycong.regions`  regions of the unit cube, measures and boundary shells
* :mod:`polycong.cover`    anchored dyadic cube covers
* :mod:`polycong.counting` exhaustive counters and the convolution oracle
* :mod:`polycong.chain`    exact check of the inequality chain for box counts
* :mod:`polycong.bounds`   bound shapes and dyadic depth choices
* :mod:`polycong.cli`      command-line front end
"""

from .bounds import (BoundReport, ParamChoice, bound_cor32, bound_cor33, bound_thm31, bound_thm34, bound_thm35,
                     choose_params_thm34, choose_params_thm35, heuristic_count, verify_bound)
from .counting import (BudgetError, CountResult, LambdaVector, count_J, count_J_convolution, count_MF, count_NF,
                       count_T, lambda_vector, uset_cardinality)
from .cover import Anchor, Cover, CoverReport, build_cover, verify_cover
from .poly import Polynomial, index_count, iter_multiindices, parse, weight_sum
from .regions import Ball, Box, Ellipsoid, OracleRegion, Polytope, Simplex, load_region

__version__ = "0.1.0"

__all__ = [
    "Anchor", "Ball", "BoundReport", "Box", "BudgetError", "CountResult", "Cover", "CoverReport", "Ellipsoid",
    "LambdaVector", "OracleRegion", "ParamChoice", "Polynomial", "Polytope", "Simplex", "bound_cor32",
    "bound_cor33", "bound_thm31", "bound_thm34", "bound_thm35", "build_cover", "choose_params_thm34",
    "choose_params_thm35", "count_J", "count_J_convolution", "count_MF", "count_NF", "count_T", "heuristic_count",
    "index_count", "iter_multiindices", "lambda_vector", "load_region", "parse", "uset_cardinality",
    "verify_bound", "verify_cover", "weight_sum",
]
