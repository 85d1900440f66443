"""Exact resource counters, the asymptotic cost models, and the
recursion-depth planner.

Two kinds of numbers are kept strictly apart: *measured* counters are
exact integer tallies from driving operators on states; *model* values
evaluate the asymptotic formulas with unit constants and are only
meaningful as ratios and trends across a grid.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

from .statevec import Tally

ETA_REGIME = 2.0 ** -5

TABLE_COLUMNS = ("variant", "delta", "eps", "mu", "q", "nu",
                 "N_U_model", "N_U_measured", "N_A", "N_P")

_VARIANT_ORDER = ("pea", "voting", "modified", "fixed_point")


@dataclass(frozen=True)
class ComplexityCounters:
    """N_U applications of U or U+, N_A ancilla qubits, N_P applications of
    the estimation operator or its adjoint."""

    n_u: int
    n_a: int
    n_p: int

    def __post_init__(self) -> None:
        if min(self.n_u, self.n_a, self.n_p) < 0:
            raise ValueError("counters must be nonnegative")

    @classmethod
    def from_tally(cls, tally: Tally, ancillas: int) -> "ComplexityCounters":
        return cls(n_u=tally.get("U"), n_a=int(ancillas), n_p=tally.get("P"))

    def pea_consistent(self, mu: int) -> bool:
        """Estimation-derived constructions satisfy N_U = N_P * 2^mu."""
        return self.n_u == self.n_p * 2 ** mu


@dataclass(frozen=True)
class PlanRequest:
    """Error budget for a whole procedure: either a direct eps target or a
    total invocation count Q with a safety factor c, giving eps = c / Q."""

    delta: float
    eps_target: float | None = None
    invocations: int | None = None
    safety: float = 0.01

    def __post_init__(self) -> None:
        if (self.eps_target is None) == (self.invocations is None):
            raise ValueError("set exactly one of eps_target and invocations")
        if self.invocations is not None and self.invocations < 1:
            raise ValueError("invocations must be positive")
        if not (0.0 < self.resolved_eps < 1.0):
            raise ValueError(f"resolved eps {self.resolved_eps!r} outside (0, 1)")

    @property
    def resolved_eps(self) -> float:
        if self.eps_target is not None:
            return self.eps_target
        return self.safety / self.invocations


def plan_recursion(eta: float, eps_target: float) -> int:
    """Smallest recursion level q with h_q eta^{3^q} <= eps_target,
    evaluated in log space.  eps_target >= eta trivially yields q = 0."""
    if not (0.0 < eta <= ETA_REGIME):
        raise ValueError(f"eta {eta!r} outside the working regime (0, 2^-5]")
    if not (0.0 < eps_target < 1.0):
        raise ValueError(f"eps_target {eps_target!r} outside (0, 1)")
    log_eta = math.log(eta)
    log_eps = math.log(eps_target)
    log3 = math.log(3.0)
    q = 0
    while True:
        m = 3 ** q
        if 3.0 * (m - 1) / 4.0 * log3 + m * log_eta <= log_eps:
            return q
        q += 1


def _models(delta: float, eps: float) -> list[dict]:
    """Unit-constant asymptotic rows for one (delta, eps) cell."""
    ln_eps = math.log(1.0 / eps)
    lg_delta = math.log2(1.0 / delta)
    rows = [
        {"variant": "pea",
         "mu": math.log2(1.0 / (delta * eps * eps)),
         "q": None, "nu": None,
         "n_u": 1.0 / (delta * eps * eps),
         "n_a": math.log2(1.0 / (delta * eps * eps)),
         "n_p": 1.0},
        {"variant": "voting",
         "mu": lg_delta, "q": None, "nu": ln_eps,
         "n_u": ln_eps / delta,
         "n_a": ln_eps * lg_delta,
         "n_p": ln_eps},
        {"variant": "modified",
         "mu": lg_delta, "q": None, "nu": ln_eps,
         "n_u": ln_eps / delta,
         "n_a": lg_delta + ln_eps,
         "n_p": ln_eps},
        {"variant": "fixed_point",
         "mu": lg_delta, "q": None, "nu": None,
         "n_u": ln_eps * ln_eps / delta,
         "n_a": lg_delta,
         "n_p": ln_eps * ln_eps},
    ]
    return rows


def tabulate(delta_grid, eps_grid, measured=()) -> list[dict]:
    """Cost comparison over a (delta, eps) grid.

    Model columns carry the Theta formulas with unit constants; measured
    columns are filled from ``measured`` records (dicts with variant,
    delta, eps, and exact mu/q/nu/n_u/n_a/n_p from a real run) where
    present.  Rows come back in canonical order (variant, delta, eps).
    """
    if not delta_grid or not eps_grid:
        raise ValueError("delta and eps grids must be nonempty")
    by_cell = {(m["variant"], float(m["delta"]), float(m["eps"])): m for m in measured}
    rows = []
    for delta in delta_grid:
        for eps in eps_grid:
            for model in _models(float(delta), float(eps)):
                got = by_cell.get((model["variant"], float(delta), float(eps)))
                rows.append({
                    "variant": model["variant"],
                    "delta": float(delta),
                    "eps": float(eps),
                    "mu": got["mu"] if got else model["mu"],
                    "q": got.get("q") if got else model["q"],
                    "nu": got.get("nu") if got else model["nu"],
                    "N_U_model": model["n_u"],
                    "N_U_measured": got["n_u"] if got else None,
                    "N_A": got["n_a"] if got else model["n_a"],
                    "N_P": got["n_p"] if got else model["n_p"],
                })
    rows.sort(key=lambda r: (_VARIANT_ORDER.index(r["variant"]), r["delta"], r["eps"]))
    return rows


def write_table_csv(rows, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=TABLE_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow({
                "variant": row["variant"],
                "delta": repr(row["delta"]),
                "eps": repr(row["eps"]),
                "mu": _fmt(row["mu"]),
                "q": _fmt(row["q"]),
                "nu": _fmt(row["nu"]),
                "N_U_model": _fmt(row["N_U_model"]),
                "N_U_measured": _fmt(row["N_U_measured"]),
                "N_A": _fmt(row["N_A"]),
                "N_P": _fmt(row["N_P"]),
            })


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)
