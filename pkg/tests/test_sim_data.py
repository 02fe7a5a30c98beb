import json
import math

import numpy as np
import pytest

from modelspace import (
    Model,
    fit_stats,
    generate_dataset,
    load_dataset,
    save_dataset,
    snr_to_r2,
)


class TestSnrMapping:
    def test_reference_points(self):
        assert snr_to_r2(4.0) == pytest.approx(0.8, abs=1e-15)
        assert snr_to_r2(9.0) == pytest.approx(0.9, abs=1e-15)
        assert snr_to_r2(5.67) == pytest.approx(0.85, abs=0.001)

    def test_edges(self):
        assert snr_to_r2(0.0) == 0.0
        with pytest.raises(ValueError):
            snr_to_r2(-1.0)
        with pytest.raises(ValueError):
            snr_to_r2(math.inf)


class TestGeneration:
    def test_coefficient_magnitude(self):
        data = generate_dataset(50, 12, 5, 4.0, np.random.default_rng(0))
        active = np.asarray(data.true_model.indices) - 1
        np.testing.assert_allclose(data.true_beta[active], math.sqrt(4.0 / 5.0))
        inactive = np.setdiff1d(np.arange(12), active)
        assert np.all(data.true_beta[inactive] == 0.0)
        assert data.noise_var == 1.0
        assert data.true_model.size == 5

    def test_population_snr_identity(self):
        # Var(X beta) = sum beta_j^2 = snr by construction
        data = generate_dataset(30, 9, 3, 2.5, np.random.default_rng(1))
        assert float(data.true_beta @ data.true_beta) == pytest.approx(2.5, rel=1e-12)

    def test_random_sign_mode(self):
        data = generate_dataset(
            200, 40, 20, 4.0, np.random.default_rng(5), coef_mode="random-sign"
        )
        active = np.asarray(data.true_model.indices) - 1
        vals = data.true_beta[active]
        np.testing.assert_allclose(np.abs(vals), math.sqrt(4.0 / 20.0))
        assert np.any(vals > 0) and np.any(vals < 0)
        assert float(vals @ vals) == pytest.approx(4.0, rel=1e-12)

    def test_reproducible(self):
        a = generate_dataset(25, 6, 2, 4.0, np.random.default_rng(77))
        b = generate_dataset(25, 6, 2, 4.0, np.random.default_rng(77))
        np.testing.assert_array_equal(a.y, b.y)
        np.testing.assert_array_equal(a.X, b.X)
        assert a.true_model == b.true_model

    def test_zero_snr(self):
        data = generate_dataset(20, 5, 2, 0.0, np.random.default_rng(0))
        assert np.all(data.true_beta == 0.0)
        assert data.true_model.size == 2

    def test_sample_r2_near_population(self):
        # large-n check: fitted R^2 of the true model near snr/(1+snr)
        data = generate_dataset(100_000, 8, 5, 4.0, np.random.default_rng(11))
        st = fit_stats(data, data.true_model)
        assert abs(st.r_squared - 0.8) < 0.01

    def test_covariate_moments(self):
        n = 100_000
        data = generate_dataset(n, 6, 2, 4.0, np.random.default_rng(3))
        means = data.X.mean(axis=0)
        variances = data.X.var(axis=0)
        assert np.all(np.abs(means) < 3.0 / math.sqrt(n))
        assert np.all(np.abs(variances - 1.0) < 3.0 * math.sqrt(2.0 / n))

    def test_validation(self):
        rng = np.random.default_rng(0)
        with pytest.raises(ValueError):
            generate_dataset(2, 5, 2, 4.0, rng)
        with pytest.raises(ValueError):
            generate_dataset(20, 5, 6, 4.0, rng)
        with pytest.raises(ValueError):
            generate_dataset(20, 5, 2, -1.0, rng)
        with pytest.raises(ValueError):
            generate_dataset(20, 5, 2, 4.0, rng, coef_mode="weird")
        with pytest.raises(ValueError):
            generate_dataset(20, 5, 0, 4.0, rng)  # snr > 0 with no signal


class TestRoundTrip:
    def test_save_load_exact(self, tmp_path):
        data = generate_dataset(37, 5, 2, 4.0, np.random.default_rng(13))
        csv_path = tmp_path / "toy.csv"
        sidecar = save_dataset(data, csv_path)
        assert sidecar == tmp_path / "toy.json"
        again = load_dataset(csv_path)
        np.testing.assert_array_equal(again.y, data.y)
        np.testing.assert_array_equal(again.X, data.X)
        np.testing.assert_array_equal(again.true_beta, data.true_beta)
        assert again.true_model == data.true_model
        assert again.noise_var == data.noise_var

    def test_sidecar_contents(self, tmp_path):
        data = generate_dataset(12, 4, 2, 1.0, np.random.default_rng(2))
        save_dataset(data, tmp_path / "d.csv")
        meta = json.loads((tmp_path / "d.json").read_text())
        assert meta["n"] == 12 and meta["p"] == 4
        assert meta["true_model"] == list(data.true_model.indices)
        assert meta["noise_var"] == 1.0

    def test_header_mismatch_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b\r\n1,2\r\n")
        (tmp_path / "bad.json").write_text("{}")
        with pytest.raises(ValueError):
            load_dataset(path)

    def test_column_count_checked_against_sidecar(self, tmp_path):
        data = generate_dataset(10, 3, 1, 1.0, np.random.default_rng(0))
        save_dataset(data, tmp_path / "d.csv")
        meta = json.loads((tmp_path / "d.json").read_text())
        meta["p"] = 7
        (tmp_path / "d.json").write_text(json.dumps(meta))
        with pytest.raises(ValueError):
            load_dataset(tmp_path / "d.csv")
