import itertools

import numpy as np
import pytest

from anchormatch.embedding.gin import (
    GinModel,
    StarBatch,
    canonical_sum,
    embed_triples,
    forward,
    gin_forward,
    init_label_features,
    load_model,
    save_model,
)
from anchormatch.errors import DigestMismatchError, FormatError, LabelOutOfRangeError
from anchormatch.features import AnchoredStar


def dense_oracle(model: GinModel, star: AnchoredStar) -> np.ndarray:
    """Matrix form of the same network on the star's adjacency matrix."""
    labels = [star.center_label, star.anchor_label, *star.leaf_labels]
    k = len(labels)
    adj = np.zeros((k, k))
    adj[0, 1:] = adj[1:, 0] = 1.0
    h = model.features[labels].copy()
    h[1] += model.anchor_tag
    for layer in model.layers:
        z = (adj + (1.0 + layer.epsilon) * np.eye(k)) @ h
        h = np.maximum(z @ layer.weight.T + layer.bias, 0.0)
    return model.final_weight @ h.sum(axis=0)


@pytest.mark.parametrize("layers", [1, 2, 3])
def test_matches_dense_oracle(layers):
    model = GinModel.initialize(4, n=6, m=3, layer_count=layers, seed=5)
    for star in [AnchoredStar(0, 1, ()), AnchoredStar(2, 1, (3,)), AnchoredStar(1, 1, (0, 3, 3, 2))]:
        np.testing.assert_allclose(gin_forward(model, star), dense_oracle(model, star), rtol=1e-12, atol=1e-12)


def test_nonzero_epsilon_matches_oracle():
    model = GinModel.initialize(3, n=5, m=2, seed=1, epsilon=0.25)
    star = AnchoredStar(0, 2, (1, 1))
    np.testing.assert_allclose(gin_forward(model, star), dense_oracle(model, star), rtol=1e-12)


def test_leaf_permutations_are_bit_identical():
    model = GinModel.initialize(5, seed=9)
    leaves = (4, 0, 2, 2, 3)
    ref = gin_forward(model, AnchoredStar(1, 3, leaves)).tobytes()
    batch = StarBatch(
        np.array([1] * 120), np.array([3] * 120), np.array(list(itertools.permutations(leaves)))
    )
    out = forward(model, batch)
    assert all(row.tobytes() == ref for row in out)


def test_batch_composition_does_not_change_bits():
    model = GinModel.initialize(6, seed=2)
    rng = np.random.default_rng(0)
    triples = [(int(rng.integers(6)), int(rng.integers(6)), tuple(int(x) for x in rng.integers(0, 6, rng.integers(0, 7)))) for _ in range(40)]
    whole = embed_triples(model, triples)
    for i, t in enumerate(triples):
        assert embed_triples(model, [t])[0].tobytes() == whole[i].tobytes()
    assert embed_triples(model, triples, chunk=7).tobytes() == whole.tobytes()


def test_anchor_is_distinguished_from_leaves():
    model = GinModel.initialize(3, seed=0)
    a = gin_forward(model, AnchoredStar(0, 1, (2,)))
    b = gin_forward(model, AnchoredStar(0, 2, (1,)))
    assert not np.array_equal(a, b)


def test_zero_final_weight_gives_zero_vector():
    model = GinModel.initialize(3, seed=0)
    model.final_weight[:] = 0.0
    model.touch()
    assert not gin_forward(model, AnchoredStar(0, 1, (2, 2))).any()


def test_output_shape_follows_m():
    model = GinModel.initialize(3, n=8, m=5)
    assert gin_forward(model, AnchoredStar(0, 1, ())).shape == (5,)
    assert [p.shape for p in model.parameters()] == [(8, 8), (8,), (8, 8), (8,), (5, 8)]


def test_label_features_deterministic_and_distinct():
    a = init_label_features(50, 10, 3)
    assert np.array_equal(a, init_label_features(50, 10, 3))
    assert len({row.tobytes() for row in a}) == 50
    assert not np.array_equal(a, init_label_features(50, 10, 4))


def test_label_out_of_range():
    model = GinModel.initialize(3)
    with pytest.raises(LabelOutOfRangeError):
        gin_forward(model, AnchoredStar(0, 3, ()))


def test_canonical_sum_ignores_order():
    rng = np.random.default_rng(1)
    vecs = rng.standard_normal((1, 6, 4)) * 1e8
    valid = np.ones((1, 6), dtype=bool)
    ref = canonical_sum(vecs, valid)
    for perm in itertools.islice(itertools.permutations(range(6)), 200):
        assert canonical_sum(vecs[:, list(perm)], valid).tobytes() == ref.tobytes()


def test_save_load_round_trip(tmp_path):
    model = GinModel.initialize(7, n=4, m=2, layer_count=3, seed=11, epsilon=0.5)
    path = tmp_path / "m.bin"
    save_model(model, path)
    again = load_model(path)
    assert again == model
    assert again.digest() == model.digest()
    star = AnchoredStar(6, 0, (1, 5))
    assert gin_forward(again, star).tobytes() == gin_forward(model, star).tobytes()


def test_load_rejects_corruption(tmp_path):
    path = tmp_path / "m.bin"
    save_model(GinModel.initialize(3), path)
    data = bytearray(path.read_bytes())
    bad = tmp_path / "bad.bin"
    bad.write_bytes(b"XXXXXXXX" + data[8:])
    with pytest.raises(FormatError):
        load_model(bad)
    bad.write_bytes(data[:-40])
    with pytest.raises(FormatError):
        load_model(bad)
    data[60] ^= 0xFF
    bad.write_bytes(bytes(data))
    with pytest.raises(DigestMismatchError):
        load_model(bad)
