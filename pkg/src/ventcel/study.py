"""Multi-level convergence studies."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

from . import analysis, fem, meshgen
from .geometry import PrismDomain
from .problems import Problem

log = logging.getLogger(__name__)


@dataclass
class StudyResult:
    report: analysis.ConvergenceReport
    levels: list = field(default_factory=list)   # per-level solver metadata

    @property
    def final_rate(self) -> float:
        return self.report.rates[-1]


def solve_level(domain: PrismDomain, k: int, mu, problem: Problem, R0=None,
                rel_tol=1e-10, max_iter=None) -> fem.Solution:
    mesh = meshgen.generate_mesh(domain, meshgen.GradingSpec.for_level(k, mu, R0))
    sol = fem.solve_problem(mesh, problem.f, problem.g, rel_tol, max_iter)
    sol.meta["k"] = k
    return sol


def run_study(domain: PrismDomain, mu, k_min: int, k_max: int, problem: Problem, R0=None,
              rel_tol=1e-10, max_iter=None, on_level=None) -> StudyResult:
    """Solve on levels ``k_min..k_max`` (``h = 2**-k``) and tabulate V-norm quantities.

    With an exact solution the table holds ``||u - u_h||_V``; otherwise the
    successive differences ``||u_h - u_2h||_V``, whose rates start at the
    third level.  ``on_level(report)`` is called after each level.
    """
    kind = "vnorm_error_exact" if problem.has_exact else "vnorm_diff_successive"
    report = analysis.ConvergenceReport(kind)
    result = StudyResult(report)
    prev = None
    for k in range(k_min, k_max + 1):
        sol = solve_level(domain, k, mu, problem, R0, rel_tol, max_iter)
        if problem.has_exact:
            value = analysis.vnorm_error_exact(sol, problem.exact, problem.grad)
        elif prev is not None:
            value = analysis.vnorm_diff(sol, prev)
        else:
            value = None
        report.add(2.0 ** -k, sol.meta["n_free"], sol.mesh.n_tets, value)
        meta = {key: sol.meta[key] for key in ("k", "iterations", "residual", "n_free",
                                               "energy", "load_dot")}
        result.levels.append(meta)
        log.info("level %d: %d tets, %d dofs, %d CG its, value %s", k, sol.mesh.n_tets,
                 sol.meta["n_free"], sol.meta["iterations"], value)
        if on_level is not None:
            on_level(report)
        prev = sol
    return result
