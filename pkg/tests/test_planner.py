"""Tests for the resource planner and the sampling campaign.

The dynamic program is validated against a brute-force enumeration of every
fusion tree reachable from the seed, carried out in exact rational arithmetic.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

import pytest

from wfuse.planner import (
    CSV_HEADER,
    CostTable,
    compare_schemes,
    compose_cost,
    cost_tables_csv,
    optimal_costs,
    plot_data,
    ps_qlf,
    qlf_scheme,
    run_campaign,
)

# ---------------------------------------------------------------------------
# brute-force oracle: enumerate every fusion tree
# ---------------------------------------------------------------------------


def all_tree_costs(seed: int, target: int, limit: int) -> set:
    """Expected costs of every distinct fusion tree for the target size."""

    @lru_cache(maxsize=None)
    def costs(size: int) -> frozenset:
        if size == seed:
            base = {Fraction(1)}
        else:
            base = set()
        for left in range(seed, size):
            right = size - left
            if right < seed or left > right:
                continue
            if left < 2 or right < 2:
                continue
            p = ps_qlf(left, right)
            for cl in costs(left):
                for cr in costs(right):
                    base.add((cl + cr) / p)
        return frozenset(base)

    found = costs(target)
    assert len(found) <= limit
    return set(found)


# ---------------------------------------------------------------------------
# success probability
# ---------------------------------------------------------------------------


def test_success_probability_values():
    assert ps_qlf(2, 2) == Fraction(1, 2)
    assert ps_qlf(2, 3) == Fraction(5, 12)
    assert ps_qlf(3, 3) == Fraction(1, 3)
    assert ps_qlf(2, 4) == Fraction(3, 8)
    assert ps_qlf(5, 5) == Fraction(1, 5)


def test_success_probability_symmetry_and_bound():
    for n in range(2, 9):
        for m in range(2, 9):
            p = ps_qlf(n, m)
            assert p == ps_qlf(m, n)
            assert Fraction(0) < p <= Fraction(1, 2)


def test_success_probability_rejects_small_inputs():
    with pytest.raises(ValueError):
        ps_qlf(1, 3)
    with pytest.raises(ValueError):
        ps_qlf(2, 0)


def test_compose_cost():
    scheme = qlf_scheme()
    assert compose_cost(Fraction(1), Fraction(1), scheme, 2, 2) == Fraction(4)
    assert compose_cost(Fraction(1), Fraction(1), scheme, 3, 3) == Fraction(6)
    assert compose_cost(Fraction(1), Fraction(4), scheme, 2, 4) == Fraction(40, 3)


# ---------------------------------------------------------------------------
# dynamic program
# ---------------------------------------------------------------------------


def test_pair_seed_table_known_values():
    table = optimal_costs(qlf_scheme(), 2, Fraction(1), 10)
    got = {size: entry.opt_cost for size, entry in table.entries.items()}
    assert got == {
        2: Fraction(1),
        4: Fraction(4),
        6: Fraction(40, 3),
        8: Fraction(32),
        10: Fraction(416, 5),
    }


def test_triple_seed_table_known_values():
    table = optimal_costs(qlf_scheme(), 3, Fraction(1), 9)
    got = {size: entry.opt_cost for size, entry in table.entries.items()}
    assert got == {3: Fraction(1), 6: Fraction(6), 9: Fraction(28)}


@pytest.mark.parametrize("seed", [2, 3])
def test_dynamic_program_matches_tree_enumeration(seed):
    table = optimal_costs(qlf_scheme(), seed, Fraction(1), 10)
    for size, entry in table.entries.items():
        if size == seed:
            continue
        trees = all_tree_costs(seed, size, limit=100_000)
        assert trees, f"no fusion tree reaches size {size}"
        assert entry.opt_cost == min(trees)


def test_recorded_splits_recompose():
    table = optimal_costs(qlf_scheme(), 2, Fraction(1), 24)
    for size, entry in table.entries.items():
        if entry.best_split is None:
            assert size == 2
            continue
        k, rest = entry.best_split
        assert k + rest == size
        expected = (
            table.entries[k].opt_cost + table.entries[rest].opt_cost
        ) / ps_qlf(k, rest)
        assert entry.opt_cost == expected


def test_seed_cost_scales_linearly():
    unit = optimal_costs(qlf_scheme(), 2, Fraction(1), 16)
    scaled = optimal_costs(qlf_scheme(), 2, Fraction(3, 2), 16)
    for size in unit.entries:
        assert scaled.entries[size].opt_cost == Fraction(3, 2) * unit.entries[size].opt_cost


def test_triple_seed_never_beaten_by_pair_seed_at_common_sizes():
    pair, triple = compare_schemes(
        [qlf_scheme()], [(2, Fraction(1)), (3, Fraction(1))], 50
    )
    common = sorted(set(pair.entries) & set(triple.entries))
    assert common, "tables share no sizes"
    for size in common:
        assert triple.entries[size].opt_cost <= pair.entries[size].opt_cost


def test_unreachable_sizes_are_absent():
    table = optimal_costs(qlf_scheme(), 2, Fraction(1), 11)
    assert set(table.entries) == {2, 4, 6, 8, 10}
    table3 = optimal_costs(qlf_scheme(), 3, Fraction(1), 11)
    assert set(table3.entries) == {3, 6, 9}


def test_max_size_below_seed_yields_empty_table():
    table = optimal_costs(qlf_scheme(), 4, Fraction(1), 3)
    assert table.entries == {}


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def test_csv_header_and_rows():
    table = optimal_costs(qlf_scheme(), 2, Fraction(1), 6)
    text = cost_tables_csv([table])
    lines = text.splitlines()
    assert lines[0] == CSV_HEADER
    assert lines[1] == "2,qlf,2,1,1,,"
    assert lines[2] == "4,qlf,2,1,4,2,2"
    assert lines[3] == "6,qlf,2,1,13.3333333333,2,4"
    assert text.endswith("\n")


def test_csv_is_deterministic():
    tables = [
        optimal_costs(qlf_scheme(), 2, Fraction(1), 30),
        optimal_costs(qlf_scheme(), 3, Fraction(1), 30),
    ]
    assert cost_tables_csv(tables) == cost_tables_csv(tables)


def test_plot_data_blocks():
    tables = [
        optimal_costs(qlf_scheme(), 2, Fraction(1), 8),
        optimal_costs(qlf_scheme(), 3, Fraction(1), 8),
    ]
    text = plot_data(tables)
    blocks = text.strip().split("\n\n")
    assert len(blocks) == 2
    first = blocks[0].splitlines()
    assert first[0] == "# scheme=qlf seed=2"
    assert first[1].split() == ["2", "1"]
    assert first[2].split() == ["4", "4"]


# ---------------------------------------------------------------------------
# sampling campaign
# ---------------------------------------------------------------------------


def test_campaign_is_deterministic():
    a = run_campaign(4, 2, 500, recycling=False, rng_seed=42)
    b = run_campaign(4, 2, 500, recycling=False, rng_seed=42)
    assert a.mean_seeds_consumed == b.mean_seeds_consumed
    assert a.std_error == b.std_error


def test_campaign_rejects_bad_arguments():
    with pytest.raises(ValueError):
        run_campaign(4, 2, 0, recycling=False, rng_seed=1)
    with pytest.raises(ValueError):
        run_campaign(5, 2, 100, recycling=False, rng_seed=1)


def test_campaign_mean_matches_planner_cost():
    table = optimal_costs(qlf_scheme(), 2, Fraction(1), 4)
    expected = float(table.entries[4].opt_cost)
    result = run_campaign(4, 2, 40_000, recycling=False, rng_seed=9)
    assert result.std_error > 0
    assert abs(result.mean_seeds_consumed - expected) < 3 * result.std_error


def test_recycling_reduces_seed_consumption():
    off = run_campaign(8, 2, 30_000, recycling=False, rng_seed=5)
    on = run_campaign(8, 2, 30_000, recycling=True, rng_seed=5)
    assert on.mean_seeds_consumed < off.mean_seeds_consumed
    assert off.mean_seeds_consumed - on.mean_seeds_consumed > 3 * max(on.std_error, off.std_error)


def test_campaign_json_shape():
    result = run_campaign(4, 2, 100, recycling=True, rng_seed=3)
    doc = result.to_json_obj()
    assert set(doc) == {"target", "trials", "mean", "stderr", "recycling"}
    assert doc["target"] == 4
    assert doc["trials"] == 100
    assert doc["recycling"] is True
