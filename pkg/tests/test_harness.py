import math

import pytest

from ccmsp.harness import (
    CampaignConfig,
    ConfigError,
    ResultRow,
    read_results,
    results_text,
    run_campaign,
    stop_policy,
    summarize,
    write_results,
    write_summary,
)
from ccmsp.instances import GridPoint, GridSpec
from ccmsp.model import Instance, Variant
from ccmsp.solvers import FirstOf, SwapStable, TargetFitness


def small_config(**kw):
    grid = kw.pop("grid", GridSpec(ks=(4,), sizes=(10,), cs=(1e-2,)))
    return CampaignConfig(grid, **kw)


def test_config_validation():
    with pytest.raises(ConfigError):
        small_config(repetitions=0)
    with pytest.raises(ConfigError):
        small_config(cap=-1)
    with pytest.raises(ConfigError):
        small_config(algorithms=())
    with pytest.raises(ConfigError):
        CampaignConfig.from_mapping({"variant": "CCMSP1", "colour": "blue"})
    with pytest.raises(ConfigError):
        CampaignConfig.from_mapping({"variant": "CCMSP1", "m": "3"})


def test_config_from_mapping():
    cfg = CampaignConfig.from_mapping({"variant": "CCMSP1", "k": "4 8", "m": "10",
                                       "c": "0.01", "algorithms": "RLS", "repetitions": "3",
                                       "cap": "500", "seed": "9"})
    assert cfg.grid.ks == (4, 8) and cfg.repetitions == 3 and cfg.cap == 500 and cfg.seed == 9
    assert [a.value for a in cfg.algorithms] == ["RLS"]


def test_stop_policy_per_variant():
    p1 = next(GridSpec(ks=(4,), sizes=(10,), cs=(1e-2,)).points())
    stop = stop_policy(p1, 100)
    assert any(isinstance(c, TargetFitness) for c in stop.criteria)
    plus = list(GridSpec(variant="CCMSP2PLUS", ks=(4,), sizes=(10,)).points())
    even = stop_policy(plus[0], 100)
    odd = stop_policy(plus[1], 100)
    assert SwapStable() in even.criteria
    assert any(isinstance(c, TargetFitness) for c in odd.criteria)


def test_oracle_refusal_before_any_run():
    inst = Instance((3, 4), 100.0, 0.01, 1e-7, 0.05, Variant.CCMSP2PLUS)
    # an odd instance mislabelled as even still gets its oracle, a broken one is refused
    bad = GridPoint("bad", Instance((2, 2, 3), 100.0, 0.01, 1e-7, 0.05, Variant.CCMSP2PLUS),
                    Variant.CCMSP2PLUS, 3, 1, 1e-7, "odd")
    ok = GridPoint("ok", inst, Variant.CCMSP2PLUS, 2, 1, 1e-7, "odd")
    rows = run_campaign(small_config(repetitions=1, cap=10), points=[ok, bad])
    assert {r.instance_id for r in rows} == {"ok", "bad"}
    broken = GridPoint("broken", Instance((2, 3), 100.0, 0.01, (0.1, 0.2), 0.05), Variant.CCMSP2PLUS,
                       2, 1, 0.1, "even")
    with pytest.raises((ConfigError, ValueError)):
        run_campaign(small_config(repetitions=1, cap=10), points=[ok, broken])


def test_cap_zero_censors_everything():
    rows = run_campaign(small_config(repetitions=1, cap=0))
    assert len(rows) == 2
    assert all(r.iterations == 0 and r.stop_reason == "cap" for r in rows)


def test_campaign_rows_and_paired_seeds():
    rows = run_campaign(small_config(repetitions=4, cap=100_000))
    assert [(r.algorithm, r.repetition) for r in rows] == [
        ("RLS", 0), ("RLS", 1), ("RLS", 2), ("RLS", 3),
        ("EA11", 0), ("EA11", 1), ("EA11", 2), ("EA11", 3)]
    assert [r.seed for r in rows[:4]] == [r.seed for r in rows[4:]]
    assert all(r.stop_reason == "target" and r.iterations <= r.cap for r in rows)


def test_campaign_deterministic_and_parallel_safe(tmp_path):
    cfg = small_config(grid=GridSpec(variant="CCMSP2PLUS", ks=(4, 8), sizes=(10,)), repetitions=3)
    a = results_text(run_campaign(cfg))
    b = results_text(run_campaign(cfg, workers=2))
    assert a == b
    assert "\r" not in a


def test_results_round_trip(tmp_path):
    rows = run_campaign(small_config(repetitions=2, cap=1000))
    write_results(tmp_path / "r.csv", rows, timing=True)
    back = read_results(tmp_path / "r.csv")
    assert [r.instance_id for r in back] == [r.instance_id for r in rows]
    assert [r.iterations for r in back] == [r.iterations for r in rows]
    assert back[0].final_fitness == pytest.approx(rows[0].final_fitness, rel=1e-11)
    write_results(tmp_path / "q.csv", rows)
    assert "wall_ms" not in (tmp_path / "q.csv").read_text().splitlines()[0]


def _row(iid="x", algo="RLS", rep=0, its=5, cap=10, fit=1.0, reason="target", **kw):
    base = dict(instance_id=iid, variant="CCMSP1", k=4, n=40, size_param=10, c=0.01,
                parity="even", algorithm=algo, repetition=rep, seed=rep, cap=cap,
                iterations=its, final_fitness=fit, stop_reason=reason)
    base.update(kw)
    return ResultRow(**base)


def test_summary_censored_rows():
    rows = [_row(rep=r, its=10, reason="cap") for r in range(30)]
    s = summarize(rows).rows[0]
    assert s["mean_iterations"] == 10 and s["censored"] == 30 and s["runs"] == 30


def test_summary_statistics():
    rows = [_row(rep=r, its=v, fit=f) for r, (v, f) in enumerate([(1, 3.0), (2, 1.0), (9, 2.0)])]
    s = summarize(rows)
    row = s.rows[0]
    assert row["mean_iterations"] == 4 and row["median_iterations"] == 2
    assert (row["min_iterations"], row["max_iterations"]) == (1, 9)
    assert row["mean_final_fitness"] == 2.0 and row["min_final_fitness"] == 1.0
    assert s.plot[0]["x"] == 2.0 and s.plot[0]["series"] == "m=10"
    assert s.table1 == []


def test_summary_errors():
    with pytest.raises(ValueError):
        summarize([])
    with pytest.raises(ValueError):
        summarize([_row(cap=10), _row(rep=1, cap=20)])
    with pytest.raises(ValueError):
        summarize([_row(), _row()])


def test_summary_is_pure():
    rows = [_row(rep=r, its=r + 1) for r in range(5)]
    assert summarize(rows) == summarize(list(rows))
    assert summarize(rows) == summarize(list(reversed(rows)))


def test_table1_pairs_even_and_odd(tmp_path):
    cfg = small_config(grid=GridSpec(variant="CCMSP2PLUS", ks=(4,), sizes=(10,)),
                       algorithms=("RLS",), repetitions=3)
    summary = summarize(run_campaign(cfg))
    (row,) = summary.table1
    assert row["makespan_even"] == pytest.approx(2001.9494, abs=1e-3)
    assert row["makespan_odd"] == pytest.approx(2101.9975, abs=1e-3)
    assert 99 < row["gap"] < 101
    paths = write_summary(summary, tmp_path)
    assert [p.name for p in paths] == ["summary.csv", "plot_data.csv", "table1.csv"]
    assert (tmp_path / "table1.csv").read_text().splitlines()[1].startswith("4,10,40,2001.9494")
