import csv
import io
import json
import math

import numpy as np
import pytest

from varscale.exceptions import ConfigError
from varscale.harness import (
    DeltaGrid,
    ExperimentConfig,
    ModcontConfig,
    RateFitWarning,
    RateReport,
    RateRow,
    deblur_config,
    eddington_bound,
    eddington_precondition_check,
    fit_rate_exponent,
    load_config,
    norm_equivalence_check,
    run_deblur_experiment,
    run_eddington_experiment,
    run_rate_experiment,
)
from varscale.harness.cli import main
from varscale.operators import FourierGrid
from varscale.operators import eddington_symbol

SMALL = {"operator": {"n": 200}, "deltas": {"start": 1e-2, "stop": 1e-5, "count": 8}}


def small(**over):
    d = json.loads(json.dumps(SMALL))
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(d.get(k), dict):
            d[k].update(v)
        else:
            d[k] = v
    return ExperimentConfig.from_dict(d)


class TestConfig:
    def test_defaults(self):
        cfg = ExperimentConfig()
        assert cfg.seed == 42
        np.testing.assert_allclose(cfg.deltas.values(), np.geomspace(1e-2, 1e-6, 9))

    @pytest.mark.parametrize(
        "bad",
        [
            {"deltas": {"start": 1e-6, "stop": 1e-2, "count": 9}},
            {"deltas": {"count": 5}},
            {"seed": -1},
            {"seed": 2**64},
            {"scheme": "landweber"},
            {"choice": {"rule": "nope"}},
            {"choice": {"rule": "cheng_yamamoto", "c_lo": 2, "c_hi": 1}},
            {"choice": {"rule": "discrepancy", "C_dis": -1}},
            {"trim": 3},
            {"operator": {"kind": "diagonal", "n": 0}},
            {"operator": {"kind": "mystery"}},
            {"source": {"kind": "monomial", "mu": -1}},
            {"noise": {"model": "pink"}},
            {"unknown_key": 1},
            [1, 2],
        ],
    )
    def test_invalid(self, bad):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_dict(bad)

    def test_merge(self):
        cfg = ExperimentConfig.from_dict({"source": {"mu": 0.25}}, base=ExperimentConfig())
        assert cfg.source.mu == 0.25 and cfg.operator.n == 400

    def test_load_shipped(self):
        for name in ("rates_mu05", "rates_mu025", "discrepancy"):
            cfg = load_config(f"configs/{name}.json")
            assert cfg.deltas.count >= 8
        ModcontConfig.from_dict(json.load(open("configs/modcont.json")))

    def test_load_errors(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text("{not json")
        with pytest.raises(ConfigError):
            load_config(p)
        with pytest.raises(ConfigError):
            load_config(tmp_path / "missing.json")

    def test_round_trip(self):
        cfg = small(seed=7)
        assert ExperimentConfig.from_dict(cfg.to_dict()) == cfg

    def test_delta_grid(self):
        with pytest.raises(ConfigError):
            DeltaGrid(1e-2, 1e-2, 9)


class TestFit:
    D = np.geomspace(1e-2, 1e-6, 9)

    def test_exact(self):
        slope, rms = fit_rate_exponent(list(zip(self.D, self.D**0.5)))
        np.testing.assert_allclose(slope, 0.5, rtol=1e-12)
        assert rms < 1e-12

    def test_scaled(self):
        slope, _ = fit_rate_exponent(list(zip(self.D, 2 * self.D**0.4)))
        np.testing.assert_allclose(slope, 0.4, rtol=1e-12)

    def test_mixed_regime(self):
        err = np.where(self.D > 1e-4, self.D**0.8, 1e-4**0.3 * self.D**0.5)
        slope, rms = fit_rate_exponent(list(zip(self.D, err)))
        assert 0.5 < slope < 0.8
        assert rms > 0

    def test_rows_objects(self):
        rows = [RateRow(d, 0.0, 0.0, d**0.5) for d in self.D]
        np.testing.assert_allclose(fit_rate_exponent(rows)[0], 0.5, rtol=1e-12)

    def test_excludes_nonpositive(self):
        err = self.D**0.5
        err[0] = 0.0
        err[1] = -1.0
        with pytest.warns(RateFitWarning):
            slope, _ = fit_rate_exponent(list(zip(self.D, err)))
        np.testing.assert_allclose(slope, 0.5, rtol=1e-12)

    def test_too_few(self):
        with pytest.raises(ValueError):
            fit_rate_exponent(list(zip(self.D[:5], self.D[:5])))
        err = self.D.copy()
        err[:4] = 0
        with pytest.warns(RateFitWarning), pytest.raises(ValueError):
            fit_rate_exponent(list(zip(self.D, err)))


class TestReport:
    def test_sorted_and_csv(self):
        rows = [RateRow(d, 1.0, 2.0, 3.0, None, 4.0, "x") for d in (1e-3, 1e-1, 1e-2)]
        rep = RateReport("t", rows)
        assert [r.delta for r in rep.rows] == [1e-1, 1e-2, 1e-3]
        lines = rep.to_csv().splitlines()
        assert lines[0] == "delta,alpha,residual,error,chi_norm,bound,regime"
        assert lines[1].startswith("1.0000000000000001e-01,")
        assert rep.passed is None

    def test_passed(self):
        rep = RateReport("t", [], slope=0.45, theory_slope=0.5)
        assert rep.passed
        rep.checks["x"] = False
        assert rep.passed is False


class TestRates:
    def test_determinism(self):
        a = run_rate_experiment(small()).to_csv()
        b = run_rate_experiment(small()).to_csv()
        c = run_rate_experiment(small(workers=4)).to_csv()
        assert a == b == c

    def test_seed_changes_output(self):
        assert run_rate_experiment(small(seed=1)).to_csv() != run_rate_experiment(small(seed=2)).to_csv()

    def test_noise_exact(self):
        rep = run_rate_experiment(small())
        assert rep.checks["noise_exact"]
        for r in rep.rows:
            assert abs(r.noise_norm - r.delta) <= 1e-12 * r.delta

    def test_bound_domination(self):
        rep = run_rate_experiment(small())
        assert rep.checks["bound"]
        assert all(r.dominated for r in rep.rows)

    def test_mu_half(self):
        rep = run_rate_experiment(ExperimentConfig())
        assert rep.theory_slope == 0.5
        assert 0.4 <= rep.slope <= 0.6
        assert rep.passed

    def test_R1_invariance(self):
        base = run_rate_experiment(ExperimentConfig())
        big = run_rate_experiment(ExperimentConfig.from_dict({"source": {"R1": 2.0}}, base=ExperimentConfig()))
        assert abs(base.slope - big.slope) < 0.05

    def test_noiseless(self):
        rep = run_rate_experiment(small(noiseless=True))
        assert rep.theory_slope is None
        assert rep.checks["errors_decrease"]

    def test_saturation_no_theory(self):
        rep = run_rate_experiment(small(source={"mu": 1.0}))
        assert rep.theory_slope is None and rep.notes

    def test_discrepancy(self):
        rep = run_rate_experiment(load_config("configs/discrepancy.json"))
        assert rep.checks["discrepancy"]

    def test_trim_recorded(self):
        rep = run_rate_experiment(small(trim=2))
        assert rep.trimmed == 2

    def test_write_csv(self, tmp_path):
        rep = run_rate_experiment(small())
        p = tmp_path / "out.csv"
        rep.write_csv(p)
        rows = list(csv.reader(p.open()))
        assert len(rows) == 1 + 8
        assert all(float(x) > 0 for x in rows[1][:4])


class TestDeblur:
    def test_l0_no_theory(self):
        rep = run_deblur_experiment(0)
        assert rep.theory_slope is None
        assert rep.meta["no_theory"]
        assert "no theory slope" in rep.summary()

    @pytest.mark.parametrize("l", [1, 2])
    def test_rates(self, l):
        rep = run_deblur_experiment(l)
        assert rep.theory_slope == pytest.approx(2 * l / (2 * l + 3))
        assert abs(rep.slope - rep.theory_slope) <= 0.1

    def test_config(self):
        cfg = deblur_config()
        assert cfg.operator.kind == "partial_blur"
        assert cfg.rule().name == "cheng_yamamoto"


class TestEddington:
    def test_theta(self):
        assert eddington_symbol(math.sqrt(2.0)) == pytest.approx(0.5, rel=1e-15)

    def test_precondition(self):
        assert all(eddington_precondition_check().values())

    def test_bound_regimes(self):
        b, reg = eddington_bound(0.01, 1.0)
        assert reg == "log" and b == pytest.approx(0.01 * (1 + math.log(100)))
        assert eddington_bound(2.0, 1.0) == (1.0, "const")

    def test_norm_equivalence(self, rng):
        ok, lo, hi = norm_equivalence_check(FourierGrid(1024, 100.0), rng)
        assert ok and lo >= 0.5 and hi <= 1.0

    def test_experiment(self):
        rep = run_eddington_experiment()
        assert rep.checks["log_bound"] and rep.checks["norm_equivalence"]
        assert rep.passed


class TestCLI:
    def test_bounds_ok(self, capsys):
        assert main(["bounds", "--psi", "pow 0.5", "--eps", "0.01", "--zeta", "1", "--quiet"]) == 0
        out = capsys.readouterr().out.splitlines()
        assert out[0] == "psi,eps,zeta,bound,verified"
        assert float(out[1].split(",")[3]) == pytest.approx(0.1)

    def test_bounds_unverified(self):
        assert main(["bounds", "--psi", "pow 2", "--eps", "0.1", "--zeta", "1", "--quiet"]) == 1

    def test_bad_expression(self):
        assert main(["bounds", "--psi", "pow", "--eps", "0.1", "--zeta", "1"]) == 2

    def test_config_error(self, tmp_path):
        p = tmp_path / "c.json"
        p.write_text(json.dumps({"deltas": {"count": 3}}))
        assert main(["rates", str(p)]) == 2

    def test_rates_to_file(self, tmp_path):
        p = tmp_path / "c.json"
        p.write_text(json.dumps(SMALL))
        out = tmp_path / "r.csv"
        assert main(["rates", str(p), "--seed", "3", "--out", str(out), "--quiet"]) == 0
        assert out.read_text().startswith("delta,alpha,")
        out2 = tmp_path / "r2.csv"
        assert main(["--seed", "3", "--out", str(out2), "--quiet", "rates", str(p)]) == 0
        assert out.read_text() == out2.read_text()

    def test_seed_range(self):
        with pytest.raises(SystemExit):
            main(["--seed", "-1", "bounds", "--psi", "id", "--eps", "1", "--zeta", "1"])

    def test_modcont(self, capsys):
        assert main(["modcont", "configs/modcont.json", "--quiet"]) == 0
        head = capsys.readouterr().out.splitlines()[0]
        assert head == "R,delta,bound_direct,bound_nested,rel_dev"

    def test_check_subset(self, capsys):
        assert main(["check", "--only", "1,2"]) == 0
        out = capsys.readouterr().out
        assert "[PASS] criterion  1 " in out and "2/2 criteria passed" in out


def test_module_entry():
    import subprocess
    import sys

    out = subprocess.run(
        [sys.executable, "-m", "varscale", "bounds", "--psi", "id", "--eps", "0.3", "--zeta", "2", "--quiet"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert out.returncode == 0
    assert io.StringIO(out.stdout).readlines()[1].split(",")[3].startswith("2.0")
