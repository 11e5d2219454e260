import itertools

import numpy as np
import pytest

from anchormatch.embedding.gin import GinModel, StarBatch, forward
from anchormatch.embedding.training import (
    TrainConfig,
    assign_training_labels,
    compute_loss,
    grid_side,
    loss_and_grad,
    pairwise_hinge,
    train_model,
    training_stars,
)
from anchormatch.errors import EmptyTrainingSetError, InfeasibleLabelGridError
from anchormatch.features import AnchoredStar, iter_star_shapes
from anchormatch.graph import Graph, normalized_edges
from anchormatch.embedding.training import star_center
from anchormatch.workbench.generators import GenSpec, generate_graph


def loop_loss(out, labels):
    total = 0.0
    for i in range(len(out)):
        for j in range(i + 1, len(out)):
            total += max(0.0, np.linalg.norm(labels[i] - labels[j]) - np.linalg.norm(out[i] - out[j]))
    return total


def test_grid_for_eight_stars_in_three_dims():
    labels = assign_training_labels(8, 3, xi=1.0)
    assert grid_side(8, 3) == 2
    assert all(len(set(labels[:, k])) == 2 for k in range(3))
    assert len({tuple(r) for r in labels}) == 8


def test_single_star_grid():
    assert assign_training_labels(1, 3).shape == (1, 3)


@pytest.mark.parametrize("count, m, xi", [(9, 2, 1.0), (30, 3, 0.5), (100, 3, 2.0), (17, 4, 1.0)])
def test_labels_are_distinct_and_xi_apart(count, m, xi):
    labels = assign_training_labels(count, m, xi=xi, seed=1)
    for a, b in itertools.combinations(labels, 2):
        assert np.linalg.norm(a - b) >= xi - 1e-12


def test_labels_stay_in_range():
    labels = assign_training_labels(27, 3, xi=1.0, value_range=(-1.0, 5.0))
    assert labels.min() == -1.0 and labels.max() == 5.0


def test_infeasible_range_rejected():
    with pytest.raises(InfeasibleLabelGridError):
        assign_training_labels(27, 3, xi=1.0, value_range=(0.0, 1.0))
    with pytest.raises(InfeasibleLabelGridError):
        assign_training_labels(0, 3)


def test_loss_matches_double_loop():
    rng = np.random.default_rng(0)
    out, labels = rng.standard_normal((30, 3)), rng.standard_normal((30, 3)) * 3
    loss, _ = pairwise_hinge(out, labels)
    assert loss == pytest.approx(loop_loss(out, labels), rel=1e-12)


def test_isomorphic_pair_contributes_label_distance():
    model = GinModel.initialize(3, seed=1)
    stars = [AnchoredStar(0, 1, (2, 1)), AnchoredStar(0, 1, (1, 2))]
    labels = np.array([[0.0, 0.0, 0.0], [3.0, 4.0, 0.0]])
    assert compute_loss(model, stars, labels) == pytest.approx(5.0)


def test_hinge_clamps_at_zero():
    out = np.array([[0.0, 0.0], [10.0, 0.0]])
    labels = np.array([[0.0, 0.0], [1.0, 0.0]])
    loss, grad = pairwise_hinge(out, labels)
    assert loss == 0.0 and not grad.any()


def test_gradient_matches_finite_differences():
    g = generate_graph(GenSpec("nws", 30, 4, 3, seed=5))
    batch = training_stars(g, 6).take(np.arange(0, 40))
    model = GinModel.initialize(3, n=5, m=3, seed=2)
    labels = assign_training_labels(len(batch), 3, xi=1.0, seed=0)
    _, grads = loss_and_grad(model, batch, labels)
    h = 1e-6
    rng = np.random.default_rng(0)
    for p, gp in zip(model.parameters(), grads):
        for flat in rng.choice(p.size, size=min(6, p.size), replace=False):
            idx = np.unravel_index(flat, p.shape)
            old = p[idx]
            p[idx] = old + h
            up = compute_loss(model, batch, labels)
            p[idx] = old - h
            down = compute_loss(model, batch, labels)
            p[idx] = old
            assert gp[idx] == pytest.approx((up - down) / (2 * h), rel=1e-4, abs=1e-6)


def test_training_stars_cover_every_star_of_every_indexed_edge():
    g = generate_graph(GenSpec("ba", 40, 4, 3, seed=1))
    batch = training_stars(g, 4)
    expected = 0
    for e in normalized_edges(g):
        ca = star_center(g, e, 4)
        if ca is not None:
            expected += sum(m for _, m in iter_star_shapes(g, ca))
    assert len(batch) == expected


def test_empty_training_set():
    g = Graph.from_edges([0] * 4, [(0, 1), (1, 2), (2, 3), (0, 2), (0, 3), (1, 3)], 1)
    with pytest.raises(EmptyTrainingSetError):
        train_model(g, 2, TrainConfig(epochs=1))


def test_training_is_deterministic_and_reduces_loss():
    g = generate_graph(GenSpec("nws", 40, 4, 3, seed=8))
    cfg = TrainConfig(epochs=4, lr=1e-2, batch_size=128, seed=3, max_stars=512)
    a = train_model(g, 4, cfg)
    b = train_model(g, 4, cfg)
    assert a.model.digest() == b.model.digest()
    assert a.epoch_losses == b.epoch_losses
    assert a.epoch_losses[-1] < a.epoch_losses[0]


def test_forward_on_training_batch_is_finite():
    g = generate_graph(GenSpec("nws", 30, 4, 3, seed=5))
    batch = training_stars(g, 6)
    assert len(batch) > 0
    out = forward(GinModel.initialize(3), batch)
    assert isinstance(batch, StarBatch) and np.isfinite(out).all()
