import math
import random

import pytest

from pathloss_ann import baseline, data
from pathloss_ann.baseline import DegenerateDesignError, LinearModel, fit_ols, predict_linear
from pathloss_ann.data import Dataset, Sample


def noiseless(**kw):
    return data.generate(data.preset("area-a-analog", noise_sigma=0.0, **kw))


def train_rmse(a, b, c, ds):
    res = [a + b * math.log10(s.distance) + c * math.log10(s.frequency) - s.path_loss for s in ds.samples]
    return math.sqrt(math.fsum(r * r for r in res) / len(res))


def test_recovers_generator_coefficients():
    cfg = data.preset("area-a-analog", noise_sigma=0.0)
    m = fit_ols(data.generate(cfg))
    assert abs(m.intercept - cfg.intercept) < 1e-9
    assert abs(m.distance_coeff - cfg.slope_near) < 1e-9
    assert abs(m.frequency_coeff - cfg.freq_slope) < 1e-9


def test_residuals_orthogonal_to_design():
    ds = data.generate(data.preset("area-b-analog", samples_per_frequency=500))
    m = fit_ols(ds)
    res = [p - s.path_loss for p, s in zip(m.predict_dataset(ds), ds.samples)]
    cols = [
        [1.0] * len(ds),
        [math.log10(s.distance) for s in ds.samples],
        [math.log10(s.frequency) for s in ds.samples],
    ]
    for col in cols:
        assert abs(math.fsum(r * v for r, v in zip(res, col))) / len(ds) < 1e-8


def test_single_frequency_is_degenerate_unless_dropped():
    ds = noiseless(frequencies=(3400.0,), samples_per_frequency=100)
    with pytest.raises(DegenerateDesignError):
        fit_ols(ds)
    m = fit_ols(ds, drop_degenerate=True)
    assert m.frequency_coeff == 0.0
    assert abs(m.distance_coeff - 35.0) < 1e-9


def test_identical_distances_are_degenerate():
    ds = Dataset(tuple(Sample(100.0, f, 90.0 + i, "A") for i, f in enumerate([3400.0, 5300.0, 6400.0] * 3)))
    with pytest.raises(DegenerateDesignError):
        fit_ols(ds)


def test_too_few_samples():
    with pytest.raises(data.DataError):
        fit_ols(Dataset((Sample(10.0, 3400.0, 80.0, "A"), Sample(20.0, 5300.0, 85.0, "A"))))


def test_ols_beats_perturbed_triples():
    ds = data.generate(data.preset("area-b-analog", samples_per_frequency=300))
    m = fit_ols(ds)
    best = train_rmse(m.intercept, m.distance_coeff, m.frequency_coeff, ds)
    r = random.Random(0)
    for _ in range(1000):
        scale = 10 ** r.uniform(-6, 0)
        trial = (
            m.intercept + scale * r.gauss(0, 10),
            m.distance_coeff + scale * r.gauss(0, 1),
            m.frequency_coeff + scale * r.gauss(0, 1),
        )
        assert best <= train_rmse(*trial, ds) + 1e-12


def test_order_invariance():
    ds = data.generate(data.preset("area-b-analog", samples_per_frequency=200))
    shuffled = list(ds.samples)
    random.Random(1).shuffle(shuffled)
    a = fit_ols(ds)
    b = fit_ols(Dataset(tuple(shuffled)))
    for u, v in zip(a.to_dict().values(), b.to_dict().values()):
        assert u == pytest.approx(v, rel=1e-12, abs=1e-12)


def test_per_frequency_variant():
    ds = noiseless()
    m = fit_ols(ds, variant="per-frequency")
    assert abs(m.distance_coeff - 35.0) < 1e-9
    for f, a in m.frequency_intercepts:
        assert abs(a - (-60.0 + 20.0 * math.log10(f))) < 1e-9
    with pytest.raises(ValueError):
        m.predict(100.0, 1000.0)
    with pytest.raises(ValueError):
        fit_ols(ds, variant="hata")


def test_predict_examples():
    m = LinearModel(0.0, 10.0, 0.0)
    assert predict_linear(m, 100.0, 3400.0) == 20.0
    m = LinearModel(-40.0, 37.0, 21.0)
    assert m.predict(400.0, 5300.0) - m.predict(200.0, 5300.0) == pytest.approx(37.0 * math.log10(2), abs=1e-12)
    for bad in ((0.0, 3400.0), (100.0, -1.0)):
        with pytest.raises(ValueError):
            m.predict(*bad)


def test_fitted_value_consistency():
    ds = data.generate(data.preset("area-b-analog", samples_per_frequency=50))
    m = fit_ols(ds)
    s = ds.samples[17]
    assert m.predict_dataset(ds)[17] == m.predict(s.distance, s.frequency)


def test_solve_matches_hand_system():
    x = baseline.solve([[2.0, 1.0], [1.0, 3.0]], [3.0, 5.0])
    assert x == pytest.approx([0.8, 1.4], abs=1e-15)
    # requires pivoting: zero in the leading position
    assert baseline.solve([[0.0, 1.0], [1.0, 0.0]], [2.0, 3.0]) == [3.0, 2.0]


def test_model_dict_round_trip():
    m = fit_ols(noiseless(), variant="per-frequency")
    assert LinearModel.from_dict(m.to_dict()) == m
