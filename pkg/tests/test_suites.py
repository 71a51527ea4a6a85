import json

import pytest

from wpcurves.plotting import emit_plots, series_csv
from wpcurves.suites import CRITERIA, SUITES, Check, CriterionResult, SuiteConfig, at_least, at_most, within


def test_suites_cover_every_criterion():
    covered = sorted({k for ks in SUITES.values() for k in ks})
    assert covered == sorted(CRITERIA) == list(range(1, 12))
    assert SuiteConfig().criteria() == list(range(1, 12))
    assert SuiteConfig(("cauchy", "identities", "cauchy")).criteria() == [7, 8, 9, 1, 2]


@pytest.mark.parametrize("kwargs", [
    dict(suites=("bogus",)),
    dict(sizes=(1024, 512)),
    dict(sizes=(512,)),
    dict(sizes=(96, 192)),
    dict(sizes=(32, 64)),
    dict(c2=()),
    dict(c2=(float("nan"),)),
    dict(tol=0.0),
    dict(seed=-1),
    dict(seed=1.5),
])
def test_config_rejects(kwargs):
    with pytest.raises(ValueError):
        SuiteConfig(**kwargs)


def test_config_routing():
    cfg = SuiteConfig(sizes=(256, 512), c2=(0.3, 0.1, 0.2), seed=4)
    assert cfg.cauchy_c2 == 0.2
    assert cfg.kwargs(5)["sizes"] == (256, 512)
    assert cfg.kwargs(7) == dict(sizes=(256, 512), c2=0.2, seed=4)
    assert cfg.kwargs(3) == {}
    assert json.loads(json.dumps(cfg.to_dict()))["c2"] == [0.3, 0.1, 0.2]


def test_check_relations():
    assert at_most("a", 1e-12, 1e-11).passed and not at_most("a", 1e-10, 1e-11).passed
    assert at_least("r", 4.0, 4.0).passed and not at_least("r", 3.9, 4.0).passed
    assert within("r", 5.0, 4.0, 8.0).passed and not within("r", 9.0, 4.0, 8.0).passed
    # NaN never passes
    assert not at_most("a", float("nan"), 1.0).passed


def test_summary_line_names_failures():
    ok = Check("x", 0.0, 1.0, True, "<=")
    bad = Check("y", 2.0, 1.0, False, "<=")
    result = CriterionResult(9, "demo", [ok, bad])
    line = result.summary_line()
    assert line.startswith("[FAIL] criterion  9: demo") and "y" in line
    assert CriterionResult(9, "demo", [ok]).summary_line().startswith("[PASS]")


def test_plot_files(tmp_path):
    series = {"x": [1, 2], "y": [1e-3, 1e-6], "xlabel": "n", "ylabel": "residual", "logy": True}
    assert series_csv(series).splitlines() == ["n,residual", "1.0,0.001", "2.0,1e-06"]
    result = CriterionResult(5, "demo", [], series={"welding_residual": series})
    names = emit_plots([result], tmp_path)
    assert names == ["criterion05_welding_residual.csv", "criterion05_welding_residual.png"]
    assert (tmp_path / names[1]).stat().st_size > 0
