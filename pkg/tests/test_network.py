import numpy as np
import pytest

from relucalc import (
    AffineLayer,
    DimensionError,
    NetworkFormatError,
    evaluate,
    evaluate_batch,
    evaluate_scalar,
    metrics,
    network,
    read_network,
    write_network,
)
from conftest import hat_reference, random_net


def test_identity_via_relu_pair():
    # x = rho(x) - rho(-x), checked at a negative input
    net = network([([[1.0], [-1.0]], [0.0, 0.0]), ([[1.0, -1.0]], [0.0])])
    assert evaluate_scalar(net, -3.0) == -3.0


def test_hat_value(hat_net):
    assert evaluate_scalar(hat_net, 0.25) == 0.5


def test_hat_matches_reference_on_grid(hat_net):
    xs = np.linspace(-0.5, 1.5, 401)
    got = evaluate_batch(hat_net, xs.reshape(-1, 1))[:, 0]
    want = np.array([hat_reference(x) for x in xs])
    np.testing.assert_allclose(got, want, atol=1e-14)


def test_double_hat_by_hand_iteration(hat_net):
    # g(g(0.125)): inner 0.25, outer 0.5
    inner = evaluate_scalar(hat_net, 0.125)
    assert evaluate_scalar(hat_net, inner) == 0.5


def test_single_layer_is_plain_affine():
    net = network([([[2.0]], [1.0])])
    assert evaluate_scalar(net, -5.0) == -9.0  # no ReLU after the only layer


def test_dimension_mismatch_raises(hat_net):
    with pytest.raises(DimensionError):
        evaluate(hat_net, [1.0, 2.0])


def test_bad_layer_chain_raises():
    with pytest.raises(DimensionError):
        network([([[1.0], [1.0]], [0.0, 0.0]), ([[1.0]], [0.0])])


def test_nonfinite_entries_rejected():
    with pytest.raises(ValueError):
        AffineLayer([[np.nan]], [0.0])


def test_metrics_hat(hat_net):
    m = metrics(hat_net)
    assert m.depth == 2
    assert m.width == 3
    assert m.connectivity == 8
    assert m.weight_magnitude == 4.0


def test_metrics_single_affine():
    m = metrics(network([([[2.0]], [1.0])]))
    assert (m.depth, m.width, m.connectivity, m.weight_magnitude) == (1, 1, 2, 2.0)


def test_metrics_zero_layer():
    m = metrics(network([([[0.0]], [0.0])]))
    assert m.connectivity == 0


def test_metrics_connectivity_bound_random():
    rng = np.random.default_rng(7)
    for _ in range(25):
        net = random_net(rng)
        m = metrics(net)
        assert m.connectivity <= m.depth * m.width * (m.width + 1)


def test_immutability(hat_net):
    with pytest.raises(ValueError):
        hat_net.layers[0].matrix[0, 0] = 9.0


def test_serialization_round_trip(tmp_path):
    rng = np.random.default_rng(3)
    for i in range(5):
        net = random_net(rng)
        path = tmp_path / f"net{i}.txt"
        write_network(net, path)
        back = read_network(path)
        assert back.dims == net.dims
        for a, b in zip(net.layers, back.layers):
            assert np.array_equal(a.matrix, b.matrix)
            assert np.array_equal(a.bias, b.bias)


def test_serialization_rejects_bad_magic(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("not a network\n")
    with pytest.raises(NetworkFormatError):
        read_network(path)


def test_serialization_rejects_truncation(tmp_path, hat_net):
    path = tmp_path / "net.txt"
    write_network(hat_net, path)
    text = path.read_text().split()
    path.write_text(" ".join(text[:-2]))
    with pytest.raises(NetworkFormatError):
        read_network(path)


def test_compiled_and_fallback_paths_bit_identical(monkeypatch):
    import relucalc.core as core

    rng = np.random.default_rng(12)
    for _ in range(5):
        net = random_net(rng)
        xs = rng.uniform(-3, 3, size=(64, net.in_dim))
        fast = evaluate_batch(net, xs)
        monkeypatch.setattr(core, "_njit", None)
        slow = evaluate_batch(net, xs)
        monkeypatch.undo()
        assert np.array_equal(fast, slow)
