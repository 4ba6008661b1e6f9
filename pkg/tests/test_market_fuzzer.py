"""
╔══════════════════════════════════════════════════════════════════════════════╗
║              RANDOM MARKET FUZZER TESTS                                      ║
╚══════════════════════════════════════════════════════════════════════════════╝
"""

from dataclasses import replace

import numpy as np
import pytest

import market_fuzzer
from hungarian_solver import EdgeDropped, solve
from market_core import INF, CapacityError
from market_fuzzer import (
    FuzzCase, FuzzParams, _check_trace, check_instance, first_failure, generate_instance,
    instance_at, run_fuzz,
)


class TestGenerator:

    def test_same_seed_same_market(self):
        a = generate_instance(np.random.default_rng(5), 4, 3, 6)
        b = generate_instance(np.random.default_rng(5), 4, 3, 6)
        assert a == b
        assert (a.n, a.k) == (4, 3)

    def test_entry_ranges(self):
        inst = generate_instance(np.random.default_rng(0), 6, 4, 3)
        for i in range(inst.n):
            for j in range(1, inst.k + 1):
                assert 0 <= inst.v[i][j] <= 3
                assert 0 <= inst.r[i][j] <= 3
                assert inst.m[i][j] == INF or 1 <= inst.m[i][j] <= 3

    def test_no_reserves_no_caps(self):
        inst = generate_instance(np.random.default_rng(1), 3, 3, 5,
                                 reserve_probability=0.0, inf_weight=1.0)
        assert all(x == 0 for row in inst.r for x in row)
        assert all(x == INF for row in inst.m for x in row)

    def test_instance_at_depends_only_on_seed_and_index(self):
        params = FuzzParams(seed=9)
        assert instance_at(params, 3) == instance_at(FuzzParams(seed=9, count=1), 3)
        assert instance_at(params, 3) != instance_at(params, 4)


class TestCheckInstance:

    def test_reference_markets_pass(self, ex1, ex2):
        assert check_instance(ex1, with_oracle=True) == []
        assert check_instance(ex2, with_oracle=True) == []

    def test_empty_market(self):
        assert check_instance(generate_instance(np.random.default_rng(0), 0, 0, 3)) == []

    def test_items_without_bidders(self):
        inst = generate_instance(np.random.default_rng(0), 0, 2, 3)
        assert inst.k == 2
        assert check_instance(inst, with_oracle=True) == []

    def test_repeated_drop_flagged(self, ex2):
        result = solve(ex2, engine="simple", trace=True)
        drops = [ev for ev in result.trace if isinstance(ev, EdgeDropped)]
        assert len(drops) == len({(ev.bidder, ev.item) for ev in drops}) == 1
        assert _check_trace(ex2, result) == []
        doubled = replace(result, trace=result.trace + drops)
        assert any("重复移除" in f for f in _check_trace(ex2, doubled))

    def test_missing_minimal_prices_fails(self, ex2, monkeypatch):
        real = market_fuzzer.enumerate_stable
        monkeypatch.setattr(market_fuzzer, "enumerate_stable",
                            lambda inst, **kw: replace(real(inst, **kw), min_prices=None))
        failures = check_instance(ex2, with_oracle=True)
        assert any("逐点最小" in f for f in failures)
        assert check_instance(ex2) == []

    def test_oracle_capacity(self, ex1):
        assert check_instance(ex1, with_oracle=True, max_bidders=3, max_items=2) == []
        with pytest.raises(CapacityError):
            check_instance(ex1, with_oracle=True, max_bidders=2)


class TestRunFuzz:

    def test_serial_batch_passes(self):
        summary = run_fuzz(FuzzParams(seed=3, count=60))
        assert summary.checked == 60
        assert summary.ok, [c.failures for c in summary.failed]
        assert first_failure(summary) is None

    def test_workers_do_not_change_results(self):
        params = FuzzParams(seed=4, count=24, bidders=3, items=2)
        serial = run_fuzz(params)
        parallel = run_fuzz(params, workers=2)
        assert serial.checked == parallel.checked == 24
        assert [c.index for c in serial.failed] == [c.index for c in parallel.failed]

    def test_zero_count(self):
        summary = run_fuzz(FuzzParams(count=0), workers=2)
        assert summary.checked == 0
        assert summary.ok

    def test_first_failure(self, ex1):
        summary = run_fuzz(FuzzParams(count=0))
        summary.failed.append(FuzzCase(7, ex1, ["boom"]))
        assert first_failure(summary).index == 7
        assert not summary.ok

    def test_oracle_capacity_from_params(self):
        params = FuzzParams(seed=2, count=3, bidders=3, items=2, with_oracle=True,
                            oracle_bidders=2)
        with pytest.raises(CapacityError):
            run_fuzz(params)
        assert run_fuzz(replace(params, oracle_bidders=3)).checked == 3

    def test_oracle_batch(self):
        summary = run_fuzz(FuzzParams(seed=11, count=25, bidders=3, items=2, max_value=4,
                                      with_oracle=True))
        assert summary.ok, [c.failures for c in summary.failed]

    @pytest.mark.slow
    def test_large_oracle_batch(self):
        params = FuzzParams(seed=2024, count=500, bidders=5, items=3, max_value=6,
                            with_oracle=True)
        summary = run_fuzz(params, workers=4)
        assert summary.ok, [(c.index, c.failures) for c in summary.failed]
