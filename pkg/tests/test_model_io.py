import math
import struct

import pytest

from pathloss_ann import data, mlp, model_io
from pathloss_ann.mlp import NetworkConfig
from pathloss_ann.model_io import ModelFormatError, SavedModel
from pathloss_ann.numeric import Rng


def bits(x):
    return struct.pack("<d", x)


@pytest.fixture
def model():
    cfg = NetworkConfig(hidden_layers=2, hidden_nodes=7, activation="sigmoid", l2_alpha=3e-5)
    net = mlp.init_weights(cfg, Rng(12))
    # awkward values: subnormal, huge, negative zero, long mantissas
    flat = list(mlp.flatten(net))
    flat[:4] = [5e-324, -1.7976931348623157e308 / 3, -0.0, 1 / 3]
    net = mlp.unflatten(cfg, flat)
    t = data.FeatureTransform((2.123456789012345, 3.6), (0.4000000000000001, 0.0812))
    return SavedModel(net, t, seed=2**64 - 1, training={"loss": 0.1}, run_config={"seed": 0})


def test_round_trip_is_bit_exact(model, tmp_path):
    path = model_io.save(model, tmp_path / "m.json")
    back = model_io.load(path)
    assert [bits(v) for v in mlp.flatten(back.network)] == [bits(v) for v in mlp.flatten(model.network)]
    assert back.network.config == model.network.config
    assert back.transform == model.transform
    assert back.seed == model.seed
    assert model_io.dumps(back) == model_io.dumps(model)


def test_predict_uses_transform(model):
    x = model.transform.point(120.0, 3400.0)
    assert model.predict(120.0, 3400.0) == mlp.predict(model.network, x)[0, 0]
    assert x[0, 0] == pytest.approx((math.log10(120.0) - model.transform.mean[0]) / model.transform.std[0], rel=1e-15)


@pytest.mark.parametrize("mutate", [
    lambda d: d.update(format_version=2),
    lambda d: d.pop("weights"),
    lambda d: d["weights"].pop(),
    lambda d: d["config"].update(activation="gelu"),
    lambda d: d["preprocessing"].update(std=[0.0, 1.0]),
])
def test_inconsistent_documents_rejected(model, mutate):
    d = model_io.to_dict(model)
    mutate(d)
    with pytest.raises(ModelFormatError):
        model_io.from_dict(d)


def test_garbage_files_rejected(tmp_path):
    p = tmp_path / "m.json"
    p.write_text("[1, 2]")
    with pytest.raises(ModelFormatError):
        model_io.load(p)
    p.write_bytes(b"\xff\xfe{")
    with pytest.raises(ModelFormatError):
        model_io.load(p)
    with pytest.raises(OSError):
        model_io.load(tmp_path / "absent.json")
