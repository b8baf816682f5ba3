import numpy as np
import pytest

from kracl.core.errors import ConfigError, DimensionError, DomainError, SegmentIndexError
from kracl.engine import ComputationGraph, Tensor, grad_check, grad_check_parameters, ops


@pytest.fixture
def rng():
    return np.random.default_rng(7)


def weighted(fn, weights):
    """Scalar reduction sum(fn(x) * w); fixed random weights keep gradients non-trivial."""
    return lambda t: ops.sum(ops.mul(fn(t), weights))


# Linear algebra

def test_matmul_examples():
    identity = Tensor(np.eye(2))
    column = Tensor([[3.0], [5.0]])
    np.testing.assert_array_equal(ops.matmul(identity, column).values, [[3.0], [5.0]])
    result = ops.matmul(Tensor([[1.0, 2.0], [3.0, 4.0]]), Tensor([[1.0], [1.0]]))
    np.testing.assert_array_equal(result.values, [[3.0], [7.0]])


def test_matmul_matches_triple_loop(rng):
    a, b = rng.normal(size=(7, 5)), rng.normal(size=(5, 4))
    expected = np.zeros((7, 4))
    for i in range(7):
        for j in range(4):
            for k in range(5):
                expected[i, j] += a[i, k] * b[k, j]
    np.testing.assert_allclose(ops.matmul(Tensor(a), Tensor(b)).values, expected, rtol=0, atol=1e-12)


def test_matmul_shape_mismatch_names_shapes():
    with pytest.raises(DimensionError, match=r"\(2, 3\).*\(2, 3\)"):
        ops.matmul(Tensor(np.ones((2, 3))), Tensor(np.ones((2, 3))))


# Elementwise

def test_elementwise_examples():
    np.testing.assert_array_equal(ops.elementwise("tanh", Tensor(np.zeros(3))).values, np.zeros(3))
    leaky = ops.elementwise("leaky_relu", Tensor([-1.0, 2.0]), slope=0.2)
    np.testing.assert_allclose(leaky.values, [-0.2, 2.0])
    x = Tensor([1.5, -2.0, 3.0])
    assert ops.elementwise("dropout", x, rate=0.0, seed=3) is x


def test_elementwise_rejects_unknown_kind():
    with pytest.raises(ConfigError):
        ops.elementwise("cube", Tensor([1.0]))


def test_log_of_non_positive_is_domain_error():
    with pytest.raises(DomainError):
        ops.log(Tensor([1.0, 0.0]))


def test_add_broadcasts_trailing_axis_and_unbroadcasts_gradient(rng):
    x = rng.normal(size=(4, 3))
    bias = Tensor(rng.normal(size=3), requires_grad=True)
    with ComputationGraph() as graph:
        loss = ops.sum(ops.add(Tensor(x), bias))
    np.testing.assert_allclose(graph.gradient(graph.backward(loss), bias), np.full(3, 4.0))


def test_add_rejects_incompatible_shapes():
    with pytest.raises(DimensionError):
        ops.add(Tensor(np.ones((2, 3))), Tensor(np.ones(2)))


class TestDropout:
    def test_evaluation_mode_is_identity(self):
        x = Tensor(np.ones((4, 4)))
        assert ops.dropout(x, 0.5, seed=0, train_mode=False) is x

    @pytest.mark.parametrize("rate", [-0.1, 1.0, 1.5])
    def test_rate_outside_unit_interval(self, rate):
        with pytest.raises(ConfigError):
            ops.dropout(Tensor(np.ones(3)), rate)

    def test_survivors_are_rescaled(self):
        x = Tensor(np.full(1000, 2.0))
        out = ops.dropout(x, 0.25, seed=11).values
        assert set(np.unique(out)) <= {0.0, 2.0 / 0.75}
        assert 0 < np.count_nonzero(out == 0.0) < 1000

    def test_same_seed_same_mask(self):
        x = Tensor(np.ones(64))
        np.testing.assert_array_equal(ops.dropout(x, 0.5, seed=4).values, ops.dropout(x, 0.5, seed=4).values)


# Convolution and composition kernels

def conv_oracle(x, filters):
    c_out, c_in, kh, kw = filters.shape
    _, height, width = x.shape
    out = np.zeros((c_out, height - kh + 1, width - kw + 1))
    for o in range(c_out):
        for i in range(height - kh + 1):
            for j in range(width - kw + 1):
                for c in range(c_in):
                    for u in range(kh):
                        for v in range(kw):
                            out[o, i, j] += x[c, i + u, j + v] * filters[o, c, u, v]
    return out


def test_conv2d_scalar_and_identity_kernels(rng):
    doubled = ops.conv2d(Tensor(np.ones((1, 2, 2))), Tensor(np.full((1, 1, 1, 1), 2.0)))
    np.testing.assert_array_equal(doubled.values, np.full((1, 2, 2), 2.0))
    x = rng.normal(size=(1, 5, 4))
    np.testing.assert_array_equal(ops.conv2d(Tensor(x), Tensor(np.ones((1, 1, 1, 1)))).values, x)


def test_conv2d_matches_nested_loop_oracle(rng):
    x, filters = rng.normal(size=(2, 8, 8)), rng.normal(size=(3, 2, 3, 3))
    np.testing.assert_allclose(ops.conv2d(Tensor(x), Tensor(filters)).values, conv_oracle(x, filters), atol=1e-12)


def test_conv2d_batched_matches_per_image(rng):
    x, filters = rng.normal(size=(3, 1, 6, 5)), rng.normal(size=(2, 1, 3, 3))
    batched = ops.conv2d(Tensor(x), Tensor(filters)).values
    for b in range(3):
        np.testing.assert_allclose(batched[b], conv_oracle(x[b], filters), atol=1e-12)


def test_conv2d_kernel_larger_than_input():
    with pytest.raises(DimensionError):
        ops.conv2d(Tensor(np.ones((1, 2, 2))), Tensor(np.ones((1, 1, 3, 3))))


def test_circular_correlation_matches_definition(rng):
    a, b = rng.normal(size=6), rng.normal(size=6)
    expected = [sum(a[i] * b[(k + i) % 6] for i in range(6)) for k in range(6)]
    np.testing.assert_allclose(ops.circular_correlation(Tensor(a), Tensor(b)).values, expected, atol=1e-12)


def test_rotate_pairs_quarter_turn():
    out = ops.rotate_pairs(Tensor([1.0, 0.0]), Tensor([np.pi / 2, 0.0])).values
    np.testing.assert_allclose(out, [0.0, 1.0], atol=1e-15)


def test_rotate_pairs_odd_dimension():
    with pytest.raises(ConfigError):
        ops.rotate_pairs(Tensor(np.ones(3)), Tensor(np.ones(3)))


# Graph reductions

def test_segment_weighted_sum_examples():
    messages = Tensor([[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]])
    out = ops.segment_weighted_sum(messages, Tensor(np.ones(3)), np.zeros(3, dtype=int), 2).values
    np.testing.assert_array_equal(out, [[9.0, 12.0], [0.0, 0.0]])


def test_segment_weighted_sum_matches_grouping_loop(rng):
    messages, weights = rng.normal(size=(50, 8)), rng.normal(size=50)
    segments = rng.integers(0, 5, size=50)
    expected = np.zeros((5, 8))
    for edge in range(50):
        expected[segments[edge]] += weights[edge] * messages[edge]
    out = ops.segment_weighted_sum(Tensor(messages), Tensor(weights), segments, 5).values
    np.testing.assert_allclose(out, expected, atol=1e-12)


def test_segment_id_out_of_range():
    with pytest.raises(SegmentIndexError):
        ops.segment_weighted_sum(Tensor(np.ones((2, 2))), Tensor(np.ones(2)), [0, 2], 2)
    with pytest.raises(IndexError):
        ops.softmax_segments(Tensor(np.ones(2)), [0, -1], 2)


def test_softmax_segments_examples():
    np.testing.assert_allclose(ops.softmax_segments(Tensor([3.0, 3.0]), [0, 0]).values, [0.5, 0.5])
    np.testing.assert_allclose(ops.softmax_segments(Tensor([-4.0]), [0]).values, [1.0])
    assert ops.softmax_segments(Tensor(np.zeros(0)), np.zeros(0, dtype=int)).shape == (0,)


@pytest.mark.parametrize("scale", [1.0, 1e3])
def test_softmax_segments_sums_to_one(rng, scale):
    scores = rng.normal(size=20) * scale
    segments = rng.integers(0, 4, size=20)
    out = ops.softmax_segments(Tensor(scores), segments, 4).values
    assert np.all(out >= 0)
    for segment in np.unique(segments):
        members = segments == segment
        assert abs(out[members].sum() - 1.0) <= 1e-9
        if scale == 1.0:
            direct = np.exp(scores[members]) / np.exp(scores[members]).sum()
            np.testing.assert_allclose(out[members], direct, atol=1e-12)


def test_gather_rows_out_of_range():
    with pytest.raises(SegmentIndexError):
        ops.gather_rows(Tensor(np.ones((3, 2))), [0, 3])


# Gradient checks, double precision

UNARY_CASES = {
    "tanh": ops.tanh,
    "leaky_relu": lambda t: ops.leaky_relu(t, 0.2),
    "exp": ops.exp,
    "sigmoid": ops.sigmoid,
    "softplus": ops.softplus,
    "l2_normalize_rows": ops.l2_normalize_rows,
    "softmax_rows": ops.softmax_rows,
    "transpose": lambda t: ops.transpose(ops.reshape(t, (4, 3))),
    "mean_axis": lambda t: ops.mean(t, axis=0),
}


@pytest.mark.parametrize("name", sorted(UNARY_CASES))
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_unary_gradients(name, seed):
    rng = np.random.default_rng(seed)
    fn = UNARY_CASES[name]
    x = rng.normal(size=(3, 4))
    weights = rng.normal(size=fn(Tensor(x)).shape)
    assert grad_check(weighted(fn, weights), x) <= 1e-4


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_log_gradient(seed):
    rng = np.random.default_rng(seed)
    x = rng.uniform(0.5, 2.0, size=(3, 4))
    assert grad_check(weighted(ops.log, rng.normal(size=(3, 4))), x) <= 1e-4


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_binary_gradients(seed):
    rng = np.random.default_rng(seed)
    other = Tensor(rng.uniform(0.5, 2.0, size=(3, 4)))
    weights = rng.normal(size=(3, 4))
    x = rng.normal(size=(3, 4))
    for op in (ops.add, ops.sub, ops.mul, ops.div):
        assert grad_check(weighted(lambda t: op(t, other), weights), x) <= 1e-4
        assert grad_check(weighted(lambda t: op(other, ops.add(t, 3.0)), weights), x) <= 1e-4


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_matmul_and_concat_gradients(seed):
    rng = np.random.default_rng(seed)
    right = Tensor(rng.normal(size=(4, 2)))
    assert grad_check(weighted(lambda t: ops.matmul(t, right), rng.normal(size=(3, 2))), rng.normal(size=(3, 4))) <= 1e-4
    left = Tensor(rng.normal(size=(3, 2)))
    fn = lambda t: ops.concat([left, t, t], axis=1)  # noqa: E731
    assert grad_check(weighted(fn, rng.normal(size=(3, 10))), rng.normal(size=(3, 4))) <= 1e-4


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_gather_and_segment_gradients(seed):
    rng = np.random.default_rng(seed)
    index = rng.integers(0, 4, size=9)
    segments = rng.integers(0, 3, size=9)
    messages = Tensor(rng.normal(size=(9, 2)))
    weights = rng.normal(size=(3, 2))

    assert grad_check(weighted(lambda t: ops.gather_rows(t, index), rng.normal(size=(9, 2))), rng.normal(size=(4, 2))) <= 1e-4
    by_weight = lambda t: ops.segment_weighted_sum(messages, t, segments, 3)  # noqa: E731
    assert grad_check(weighted(by_weight, weights), rng.normal(size=9)) <= 1e-4
    edge_weights = Tensor(rng.normal(size=9))
    by_message = lambda t: ops.segment_weighted_sum(t, edge_weights, segments, 3)  # noqa: E731
    assert grad_check(weighted(by_message, weights), rng.normal(size=(9, 2))) <= 1e-4
    softmax = lambda t: ops.softmax_segments(t, segments, 3)  # noqa: E731
    assert grad_check(weighted(softmax, rng.normal(size=9)), rng.normal(size=9)) <= 1e-4


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_kernel_gradients(seed):
    rng = np.random.default_rng(seed)
    other = Tensor(rng.normal(size=(2, 6)))
    weights = rng.normal(size=(2, 6))
    assert grad_check(weighted(lambda t: ops.circular_correlation(t, other), weights), rng.normal(size=(2, 6))) <= 1e-4
    assert grad_check(weighted(lambda t: ops.circular_correlation(other, t), weights), rng.normal(size=(2, 6))) <= 1e-4
    assert grad_check(weighted(lambda t: ops.rotate_pairs(t, other), weights), rng.normal(size=(2, 6))) <= 1e-4
    assert grad_check(weighted(lambda t: ops.rotate_pairs(other, t), weights), rng.normal(size=(2, 6))) <= 1e-4

    filters = Tensor(rng.normal(size=(2, 1, 2, 2)))
    image_weights = rng.normal(size=(3, 2, 3, 4))
    assert grad_check(weighted(lambda t: ops.conv2d(t, filters), image_weights), rng.normal(size=(3, 1, 4, 5))) <= 1e-4
    images = Tensor(rng.normal(size=(3, 1, 4, 5)))
    assert grad_check(weighted(lambda t: ops.conv2d(images, t), image_weights), rng.normal(size=(2, 1, 2, 2))) <= 1e-4


def test_prelu_gradient_covers_slope():
    rng = np.random.default_rng(5)
    x = Tensor(rng.normal(size=(4, 3)), requires_grad=True)
    slope = Tensor(np.array([0.25]), requires_grad=True)
    weights = rng.normal(size=(4, 3))
    error = grad_check_parameters(lambda: ops.sum(ops.mul(ops.prelu(x, slope), weights)), [x, slope])
    assert error <= 1e-4


def test_grad_check_examples():
    rng = np.random.default_rng(3)
    assert grad_check(lambda t: ops.sum(t), rng.normal(size=5)) <= 1e-10
    assert grad_check(lambda t: ops.sum(ops.mul(t, t)), rng.normal(size=5), eps=1e-5) <= 1e-7
