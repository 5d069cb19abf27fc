import json
import math

import numpy as np
import pytest

import nonlindep as nd


def test_gaussian_mi_closed_form():
    assert nd.gaussian_mi(0.5) == pytest.approx(-0.5 * math.log(0.75), abs=1e-15)
    assert nd.gaussian_mi(0.0) == 0.0
    with pytest.raises(nd.NonlindepError):
        nd.gaussian_mi(1.0)


def test_mi_is_rank_based_and_symmetric():
    rng = np.random.default_rng(0)
    x = rng.standard_normal(720)
    y = x + rng.standard_normal(720)
    mi = nd.mutual_information(x, y)
    assert mi == nd.mutual_information(np.exp(x), y)
    assert mi == nd.mutual_information(y, x)
    assert nd.mutual_information(x, x) == pytest.approx(math.log(8), abs=1e-12)
    counts = np.bincount(nd.equiquantal_bins(x, 8))
    assert counts.max() - counts.min() <= 1


def test_surrogate_preserves_correlations():
    rng = np.random.default_rng(1)
    values = rng.standard_normal((128, 4)).cumsum(axis=1)
    surr = nd.ft_surrogate(values, 3)
    assert surr.shape == values.shape
    np.testing.assert_allclose(np.corrcoef(surr.T), np.corrcoef(values.T), atol=1e-9)
    assert not np.allclose(surr, values)


def test_pairwise_matches_numpy():
    spec = {"kind": "gaussian_ar1", "T": 240, "N": 5, "seed": 4, "params": {"ar": 0.3}}
    values = nd.synth(json.dumps(spec))
    r = nd.pairwise(values, "correlation")
    ref = np.corrcoef(values.T)
    assert r[nd.condensed_index(1, 3, 5)] == pytest.approx(ref[1, 3], abs=1e-6)
    curve = nd.build_calibration(240, 8, [0.0, 0.3, 0.6, 0.9], 100, seed=1)
    mi = nd.pairwise(values, "mi", curve=curve)
    assert len(mi) == 10 and (mi >= 0).all()
    assert nd.significance_threshold(0.05, 99) == 95


def test_analyze_end_to_end(tmp_path):
    values = nd.synth(json.dumps({"kind": "quadratic_coupled", "T": 240, "N": 4, "seed": 2}))
    path = tmp_path / "grid.csv"
    np.savetxt(path, np.column_stack([np.arange(240), values]), delimiter=",",
               header="t," + ",".join(f"node{i}" for i in range(4)), comments="", fmt="%.17g")
    sidecar = {"format": "csv", "T": 240, "N": 4, "period": 12, "time_start": 1,
               "nodes": [{"lat": 10.0 * i, "lon": 5.0 * i} for i in range(4)]}
    (tmp_path / "grid.csv.json").write_text(json.dumps(sidecar))
    config = {"input": {"path": "grid.csv", "format": "csv"},
              "calibration": {"rho_grid": [0.0, 0.3, 0.6, 0.9], "replicates": 100},
              "surrogate": {"n_surr": 19, "master_seed": 5},
              "output": {"dir": "run"}}
    summary = json.loads(nd.analyze(json.dumps(config), str(tmp_path)))
    assert summary["total_pairs"] == 6
    n, kind, data = nd.load_pair_matrix(str(tmp_path / "run" / "mi.pmat"))
    assert (n, kind, len(data)) == (4, "mi_calibrated", 6)
