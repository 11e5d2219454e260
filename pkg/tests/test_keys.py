import itertools

import numpy as np
import pytest

from anchormatch.embedding.gin import GinModel
from anchormatch.embedding.keys import (
    WL_DIGEST,
    GinEmbedder,
    WLEmbedder,
    embedding_key,
    make_embedder,
    quantize,
    quantize_rows,
    wl_hash_key,
)
from anchormatch.features import AnchoredStar


def test_quantize_example():
    assert quantize([0.5980004, 0.6360001, 0.0]) == (598000, 636000, 0)


def test_quantize_rounds_halves_away_from_zero():
    assert quantize([0.0000005, -0.0000005, 0.0000015]) == (1, -1, 2)
    assert quantize([-0.0]) == (0,)


def test_quantize_rows_agrees_with_scalar_version():
    rng = np.random.default_rng(4)
    x = rng.standard_normal((200, 3)) * 10
    assert [tuple(r) for r in quantize_rows(x).tolist()] == [quantize(r) for r in x]


@pytest.mark.parametrize("bad", [float("nan"), float("inf"), -float("inf")])
def test_non_finite_rejected(bad):
    with pytest.raises(ValueError):
        quantize([0.0, bad])
    with pytest.raises(ValueError):
        quantize_rows(np.array([[bad, 0.0]]))


def test_zero_vector_key():
    model = GinModel.initialize(3)
    key = embedding_key(np.zeros(3), model)
    assert key.values == (0, 0, 0)
    assert key.backend == "gin" and key.model_digest == model.digest()


def small_stars(sigma=3, max_leaves=4):
    for c, a in itertools.product(range(sigma), repeat=2):
        for r in range(max_leaves + 1):
            for leaves in itertools.combinations_with_replacement(range(sigma), r):
                yield AnchoredStar(c, a, leaves)


def test_wl_keys_are_injective_on_small_stars():
    stars = list(small_stars())
    keys = {wl_hash_key(s) for s in stars}
    assert len(keys) == len(stars)
    assert all(k.model_digest == WL_DIGEST for k in keys)


def test_wl_key_ignores_leaf_order():
    assert wl_hash_key(AnchoredStar(0, 1, (2, 0, 1))) == wl_hash_key(AnchoredStar(0, 1, (1, 2, 0)))


def test_embedders_agree_on_isomorphic_stars():
    model = GinModel.initialize(3, seed=3)
    for emb in (WLEmbedder(), GinEmbedder(model)):
        a = emb.key(AnchoredStar(2, 0, (1, 1, 0)))
        b = emb.key(AnchoredStar(2, 0, (0, 1, 1)))
        assert a == b


def test_gin_embedder_cache_is_transparent():
    model = GinModel.initialize(3, seed=3)
    stars = list(small_stars(max_leaves=2))
    first = GinEmbedder(model).keys(stars)
    emb = GinEmbedder(model)
    emb.keys(stars[::-1])
    assert emb.keys(stars) == first


def test_make_embedder():
    assert isinstance(make_embedder("wl"), WLEmbedder)
    with pytest.raises(ValueError):
        make_embedder("gin")
    with pytest.raises(ValueError):
        make_embedder("nope")
