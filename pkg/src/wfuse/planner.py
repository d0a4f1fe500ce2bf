"""Resource planning on top of the fusion pipeline.

Costs count expected seed states under the accounting where a failed
fusion destroys both inputs; the dynamic program picks the cheapest split
for every reachable size.  The campaign simulator estimates the same
quantity by Monte Carlo and can optionally feed recyclable failure
products back into production, which the analytic accounting ignores.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np

MAX_PLAN_SIZE = 10_000


class FuseRule(NamedTuple):
    output_size: int
    success_prob: Fraction


@dataclass(frozen=True)
class SchemeSpec:
    """A fusion rule: two input sizes to an output size and a success odds."""

    name: str
    fuse: Callable[[int, int], FuseRule]
    min_input: int = 2


def ps_qlf(n: int, m: int) -> Fraction:
    """Success probability of the loss-free fusion of sizes n and m."""
    if n < 2 or m < 2:
        raise ValueError("input sizes must be >= 2")
    return Fraction(n + m, 2 * n * m)


def qlf_scheme() -> SchemeSpec:
    return SchemeSpec("qlf", lambda n, m: FuseRule(n + m, ps_qlf(n, m)), 2)


def compose_cost(
    cost_n: Fraction, cost_m: Fraction, scheme: SchemeSpec, n: int, m: int
) -> Fraction:
    """Expected cost of the output given the input costs, all-lost-on-failure."""
    if n < scheme.min_input or m < scheme.min_input:
        raise ValueError(
            f"scheme {scheme.name} needs inputs of size >= {scheme.min_input}"
        )
    rule = scheme.fuse(n, m)
    if not 0 < rule.success_prob <= 1:
        raise ValueError("success probability must lie in (0, 1]")
    return (Fraction(cost_n) + Fraction(cost_m)) / rule.success_prob


@dataclass(frozen=True)
class CostEntry:
    opt_cost: Fraction
    best_split: Optional[tuple[int, int]]


@dataclass(frozen=True)
class CostTable:
    scheme_name: str
    seed_size: int
    seed_cost: Fraction
    entries: dict


def optimal_costs(
    scheme: SchemeSpec, seed_size: int, seed_cost, max_size: int
) -> CostTable:
    """Cheapest fusion plan for every size reachable from one seed.

    Exact fractions throughout; ties go to the most balanced split, then
    to the smaller left input.  Fusions that do not grow the state are
    ignored, which keeps the sweep well founded.
    """
    if seed_size < scheme.min_input:
        raise ValueError("seed is smaller than the scheme's minimum input")
    if not 1 <= max_size <= MAX_PLAN_SIZE:
        raise ValueError(f"max size must be in 1..{MAX_PLAN_SIZE}")
    seed_cost = Fraction(seed_cost)
    if seed_cost <= 0:
        raise ValueError("seed cost must be positive")
    entries: dict[int, CostEntry] = {}
    best: dict[int, tuple] = {}
    if seed_size <= max_size:
        entries[seed_size] = CostEntry(seed_cost, None)
    for right in range(seed_size, max_size + 1):
        if right in best and right not in entries:
            cost, _, k = best[right]
            entries[right] = CostEntry(cost, (k, right - k))
        if right not in entries:
            continue
        for left in sorted(entries):
            if left > right:
                break
            rule = scheme.fuse(left, right)
            if rule.output_size <= right or rule.output_size > max_size:
                continue
            cost = (entries[left].opt_cost + entries[right].opt_cost) / rule.success_prob
            cand = (cost, right - left, left)
            if rule.output_size not in best or cand < best[rule.output_size]:
                best[rule.output_size] = cand
    return CostTable(scheme.name, seed_size, seed_cost, entries)


def compare_schemes(
    schemes: Sequence[SchemeSpec],
    seed_configs: Sequence[tuple[int, object]],
    max_size: int,
) -> list[CostTable]:
    """One cost table per (scheme, seed size, seed cost) combination."""
    return [
        optimal_costs(scheme, seed_size, seed_cost, max_size)
        for scheme in schemes
        for seed_size, seed_cost in seed_configs
    ]


CSV_HEADER = "size,scheme,seed_size,seed_cost,opt_cost,split_k,split_rest"


def _fmt(value) -> str:
    return f"{float(value):.12g}"


def cost_tables_csv(tables: Sequence[CostTable]) -> str:
    """Render cost tables as CSV, rows ordered by table then size."""
    lines = [CSV_HEADER]
    for table in tables:
        for size in sorted(table.entries):
            entry = table.entries[size]
            if entry.best_split is None:
                split_k = split_rest = ""
            else:
                split_k, split_rest = map(str, entry.best_split)
            lines.append(
                f"{size},{table.scheme_name},{table.seed_size},"
                f"{_fmt(table.seed_cost)},{_fmt(entry.opt_cost)},{split_k},{split_rest}"
            )
    return "\n".join(lines) + "\n"


def plot_data(tables: Sequence[CostTable]) -> str:
    """Two-column size/cost text, one block per curve."""
    blocks = []
    for table in tables:
        lines = [f"# scheme={table.scheme_name} seed={table.seed_size}"]
        for size in sorted(table.entries):
            lines.append(f"{size} {_fmt(table.entries[size].opt_cost)}")
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"


@dataclass(frozen=True)
class CampaignResult:
    target_size: int
    trials: int
    mean_seeds_consumed: float
    std_error: float
    recycling_enabled: bool

    def to_json_obj(self) -> dict:
        from .optics import round_sig12

        return {
            "target": self.target_size,
            "trials": self.trials,
            "mean": round_sig12(self.mean_seeds_consumed),
            "stderr": round_sig12(self.std_error),
            "recycling": self.recycling_enabled,
        }


def _branch_probs(k: int, r: int) -> tuple[float, float]:
    """Success probability and the recyclable-pair share of one attempt."""
    success = float(ps_qlf(k, r))
    pair = (k - 1) * (r - 1) / (k * r)
    return success, pair


def _simulate_trial(
    target: int,
    seed_size: int,
    splits: dict,
    probs: dict,
    recycling: bool,
    rng,
) -> int:
    seeds_used = 0
    pool: dict[int, int] = {}

    def obtain(size: int) -> None:
        nonlocal seeds_used
        if recycling and pool.get(size, 0) > 0:
            pool[size] -= 1
            return
        if size == seed_size:
            seeds_used += 1
            return
        k, r = splits[size]
        p_success, p_pair = probs[(k, r)]
        while True:
            obtain(k)
            obtain(r)
            u = rng.random()
            if u < p_success:
                return
            if recycling:
                if u < p_success + p_pair:
                    for back in (k - 1, r - 1):
                        if back >= 2:
                            pool[back] = pool.get(back, 0) + 1
                else:
                    back = k + r - 2
                    pool[back] = pool.get(back, 0) + 1

    obtain(target)
    return seeds_used


def run_campaign(
    target_size: int,
    seed_size: int,
    trials: int,
    recycling: bool,
    rng_seed: int,
) -> CampaignResult:
    """Monte-Carlo estimate of seeds consumed per target state produced.

    Follows the dynamic program's best splits; with recycling on, failure
    products of size >= 2 go to a pool that future needs draw from first.
    Each trial derives its own child seed, so trials are order-independent.
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    table = optimal_costs(qlf_scheme(), seed_size, 1, target_size)
    if target_size not in table.entries:
        raise ValueError(
            f"size {target_size} is not reachable from seed {seed_size}"
        )
    splits = {
        size: e.best_split
        for size, e in table.entries.items()
        if e.best_split is not None
    }
    probs = {split: _branch_probs(*split) for split in splits.values()}
    counts = np.empty(trials)
    for t in range(trials):
        rng = np.random.default_rng([rng_seed, t])
        counts[t] = _simulate_trial(
            target_size, seed_size, splits, probs, recycling, rng
        )
    mean = float(counts.mean())
    std_error = (
        float(counts.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    )
    return CampaignResult(target_size, trials, mean, std_error, recycling)
