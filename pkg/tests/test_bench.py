import os

import numpy as np
import pytest

from spinbath import bench
from spinbath.errors import ConfigError


def make_config(**overrides):
    base = dict(
        mode="static_measure", model="ring", j_system=-1.0,
        coupling_seed=3, env_seed=4,
        n_sys_list=(2,), n_env_list=(4,),
        lambda_list=(0.0, 1.0), beta_list=(0.5,),
        n_realizations=24, master_seed=11,
    )
    base.update(overrides)
    return bench.ExperimentConfig(**base)


CONFIG_TEXT = """
# comment line
mode = theory_overlay
model = chain
j_iso = 1
omega_iso = 1
delta_iso = 1
n_sys = 2
n_env = 4
lambda_list = 0 0.5     # trailing comment
beta_list = 0.4 1.2
n_realizations = 16
master_seed = 7
output = sweep.csv
"""


class TestConfigParsing:
    def test_roundtrip(self):
        cfg = bench.parse_config(CONFIG_TEXT)
        assert cfg.mode == "theory_overlay"
        assert cfg.lambda_list == (0.0, 0.5)
        assert cfg.beta_list == (0.4, 1.2)
        again = bench.parse_config(bench.render_config(cfg))
        assert again == cfg

    def test_unknown_key_line_number(self):
        with pytest.raises(ConfigError, match="line 3"):
            bench.parse_config("mode = moment_check\nmodel = ring\nbogus = 1\n")

    def test_bad_value_line_number(self):
        with pytest.raises(ConfigError, match="line 2"):
            bench.parse_config("mode = moment_check\nmaster_seed = xyz\n")

    def test_empty_lambda_list_rejected(self):
        with pytest.raises(ConfigError, match="lambda_list"):
            make_config(lambda_list=())

    def test_unknown_mode_rejected(self):
        with pytest.raises(ConfigError):
            make_config(mode="frobnicate")

    def test_bond_tables(self):
        text = (
            "mode = static_measure\nmodel = explicit\n"
            "n_sys = 2\nn_env = 1\nlambda = 1\nbeta = 0.5\nn_realizations = 4\n"
            "[system_bonds]\n1 2 1 1 1\n[coupling_bonds]\n2 1 0.5 0.5 0.5\n"
        )
        cfg = bench.parse_config(text)
        model = cfg.build_model(2, 1, 1.0)
        assert model.system_bonds == ((1, 2, 1.0, 1.0, 1.0),)
        assert model.coupling_bonds == ((2, 1, 0.5, 0.5, 0.5),)

    def test_malformed_bond_row(self):
        with pytest.raises(ConfigError, match="line 3"):
            bench.parse_config("mode = static_measure\n[system_bonds]\n1 2 3\n")

    def test_model_config_roundtrip(self):
        from spinbath.hamiltonian import build_ring_model

        model = build_ring_model(2, 3, -1.0, 5, 6, 0.7)
        text = bench.model_to_config(model)
        again = bench.model_from_config(text)
        assert again.system_bonds == model.system_bonds
        assert again.env_bonds == model.env_bonds
        assert again.coupling_bonds == model.coupling_bonds
        assert again.lam == model.lam

    def test_default_realizations(self):
        assert bench.default_realizations(12) == 1000
        assert bench.default_realizations(13) == 10
        assert bench.default_realizations(21) == 1


class TestRun:
    def test_reproducible_and_parallel_equivalent(self):
        cfg = make_config()
        a = bench.run(cfg).to_csv()
        b = bench.run(cfg).to_csv()
        assert a == b
        os.environ[bench.WORKERS_ENV] = "3"
        try:
            c = bench.run(cfg).to_csv()
        finally:
            del os.environ[bench.WORKERS_ENV]
        assert a == c

    def test_aggregate_consistency(self):
        table = bench.run(make_config())
        for point_rows in [[r for r in table.dicts() if r["lam"] == lam] for lam in (0.0, 1.0)]:
            samples = [r["sigma"] for r in point_rows
                       if isinstance(r["realization"], int)]
            mean = next(r["sigma"] for r in point_rows if r["realization"] == "mean")
            err = next(r["sigma"] for r in point_rows if r["realization"] == "stderr")
            n = next(r["sigma"] for r in point_rows if r["realization"] == "n")
            assert n == len(samples) == 24
            assert abs(mean - np.mean(samples)) < 1e-12
            assert abs(err - np.std(samples, ddof=1) / np.sqrt(n)) < 1e-12

    def test_common_random_numbers_across_lambda_and_beta(self):
        # realization r shares its random state across the lambda and beta
        # axes, so the lam = 0 samples agree between different sweeps
        t1 = bench.run(make_config(lambda_list=(0.0,), beta_list=(0.5,)))
        t2 = bench.run(make_config(lambda_list=(0.0, 0.3), beta_list=(0.5, 0.8)))
        s1 = [r["sigma"] for r in t1.dicts()
              if isinstance(r["realization"], int) and r["beta"] == 0.5]
        s2 = [r["sigma"] for r in t2.dicts()
              if isinstance(r["realization"], int) and r["lam"] == 0.0 and r["beta"] == 0.5]
        assert s1 == s2

    def test_exact_and_chebyshev_methods_agree(self):
        a = bench.run(make_config(method="exact", n_realizations=6))
        b = bench.run(make_config(method="chebyshev", n_realizations=6))
        sa = a.column("sigma", lambda r: isinstance(r["realization"], int))
        sb = b.column("sigma", lambda r: isinstance(r["realization"], int))
        assert np.abs(np.array(sa) - np.array(sb)).max() < 1e-9

    def test_failed_point_recorded_in_row(self):
        cfg = make_config(n_env_list=(1, 4))   # ring needs n_env >= 2
        table = bench.run(cfg)
        assert table.failed_points > 0
        good = [r for r in table.dicts() if r["n_env"] == 4 and r["realization"] == "mean"]
        assert len(good) == len(cfg.lambda_list)

    def test_csv_roundtrip(self):
        table = bench.run(make_config(n_realizations=4))
        again = bench.ResultTable.from_csv(table.to_csv())
        assert again.columns == table.columns
        assert len(again.rows) == len(table.rows)
        assert again.meta["mode"] == "static_measure"

    def test_theory_overlay_matches_closed_form(self):
        cfg = bench.parse_config(CONFIG_TEXT)
        cfg = bench.ExperimentConfig(**{**cfg.__dict__, "n_realizations": 200})
        table = bench.run(cfg)
        from spinbath.hamiltonian import build_chain_model
        from spinbath.theory import prediction_inputs, sigma2_full

        model = build_chain_model(2, 4, 1.0, 1.0, 1.0, 0.0)
        for beta in cfg.beta_list:
            samples = np.array([r["sigma"] ** 2 for r in table.dicts()
                                if isinstance(r["realization"], int)
                                and r["lam"] == 0.0 and r["beta"] == beta])
            ref = sigma2_full(prediction_inputs(model, beta))
            dev = abs(samples.mean() - ref) / (samples.std(ddof=1) / np.sqrt(len(samples)))
            assert dev < 3.0
            mean_row = next(r for r in table.dicts()
                            if r["lam"] == 0.0 and r["beta"] == beta
                            and r["realization"] == "mean")
            assert abs(mean_row["theory_sigma"] - np.sqrt(ref)) < 1e-12


class TestOtherModes:
    def test_symmetry_check(self):
        cfg = make_config(mode="symmetry_check", beta_list=(0.4, 1.0))
        table = bench.run(cfg)
        for row in table.dicts():
            assert row["rel_a"] < 1e-10 and row["rel_b"] < 1e-10
        broken = bench.run(make_config(mode="symmetry_check", beta_list=(0.4,),
                                       identity_shift=0.3))
        assert any(r["rel_a"] > 1e-3 for r in broken.dicts())

    def test_normalization_diag(self):
        cfg = make_config(mode="normalization_diag", lambda_list=(0.0,),
                          beta_list=(1.0,), n_env_list=(2, 4), n_realizations=8)
        table = bench.run(cfg)
        medians = [r["diff"] for r in table.dicts() if r["realization"] == "median"]
        assert len(medians) == 2 and medians[0] > medians[1]

    def test_moment_check_mode(self):
        cfg = make_config(mode="moment_check", n_sys_list=(2,), n_env_list=(2,),
                          n_draws=4000)
        table = bench.run(cfg)
        rows = list(table.dicts())
        assert [r["moment"] for r in rows] == ["x", "x2", "xx"]
        assert all(r["deviation_se"] < 4.0 for r in rows)

    def test_time_trace_mode(self):
        cfg = make_config(mode="time_trace", lambda_list=(1.0,), beta_list=(0.8,),
                          t_max=5.0, dt=0.5, t_burn=1.0)
        table = bench.run(cfg)
        ts = [r["t"] for r in table.dicts() if isinstance(r["t"], float)]
        assert len(ts) == 11 and ts[0] == 0.0 and ts[-1] == 5.0
        assert any(r["t"] == "mean" for r in table.dicts())

    def test_time_trace_needs_single_point(self):
        with pytest.raises(ConfigError):
            bench.run(make_config(mode="time_trace"))


class TestAnalysis:
    def test_sigma2_excess_pairing(self):
        table = bench.run(make_config(n_realizations=32))
        excess = bench.sigma2_excess(table)
        (key, (mean, err, n)), = excess.items()
        assert key == (2, 4, 0.5, 1.0) and n == 32
        # paired noise is far below the unpaired sigma^2 spread
        samples = np.array([r["sigma"] ** 2 for r in table.dicts()
                            if isinstance(r["realization"], int) and r["lam"] == 0.0])
        assert err < np.std(samples, ddof=1) / np.sqrt(32)

    def test_fit_power_law(self):
        xs = np.array([0.2, 0.4, 0.8, 1.6])
        ys = -3.0 * xs**2.5
        errs = np.full(4, 1e-12)
        k, n = bench.fit_power_law(xs, ys, errs)
        assert n == 4 and abs(k - 2.5) < 1e-9

    def test_fit_power_law_noise_floor(self):
        with pytest.raises(ValueError):
            bench.fit_power_law([1, 2, 3], [0.0, 0.0, 1.0], [1.0, 1.0, 0.1])


class TestPlotExport:
    def test_static_blocks_and_determinism(self):
        table = bench.run(make_config(mode="theory_overlay", n_realizations=8,
                                      beta_list=(0.4, 1.2)))
        data, script = bench.plot_export(table)
        assert data.count("# curve") == 2          # one block per lambda
        assert "theory" in script
        assert (data, script) == bench.plot_export(table)

    def test_trace_export(self):
        cfg = make_config(mode="time_trace", lambda_list=(1.0,), beta_list=(0.8,),
                          t_max=2.0, dt=0.5)
        data, script = bench.plot_export(bench.run(cfg))
        assert data.startswith("# spinbath trace")
        assert "with lines" in script
