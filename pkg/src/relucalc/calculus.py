"""Network calculus: composition, depth extension, parallelization, sums,
weight reduction, and pruning.

All operations are pure and return new networks that realize the stated
function exactly (in exact arithmetic) while respecting explicit bounds on
depth, width, connectivity, and weight magnitude.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .core import AffineLayer, DimensionError, ReluNetwork


def _stack_pm(layer: AffineLayer) -> AffineLayer:
    """Replace W by (W; -W), duplicating the affine map with flipped sign."""
    return AffineLayer(
        np.vstack([layer.matrix, -layer.matrix]),
        np.concatenate([layer.bias, -layer.bias]),
    )


def compose(outer: ReluNetwork, inner: ReluNetwork) -> ReluNetwork:
    """Network realizing outer(inner(x)).

    Depth adds, connectivity at most doubles on each side, width is at most
    max(2 * interface_dim, widths), magnitude is the max of the two.  The
    interface channels the value through rho(x) - rho(-x).
    """
    d2 = inner.out_dim
    if d2 != outer.in_dim:
        raise DimensionError(
            f"inner output dim {d2} does not match outer input dim {outer.in_dim}"
        )
    inner_last = _stack_pm(inner.layers[-1])
    first = outer.layers[0]
    outer_first = AffineLayer(
        np.hstack([first.matrix, -first.matrix]), first.bias
    )
    return ReluNetwork(
        inner.layers[:-1] + (inner_last, outer_first) + outer.layers[1:]
    )


def extend_depth(net: ReluNetwork, target_depth: int) -> ReluNetwork:
    """Pointwise-equal network of exactly the requested (larger) depth.

    The last affine map is split into (A; -A) followed by identity layers and
    a final recombination that also carries the last bias, which keeps the
    added connectivity within d2 * width + 2 * d2 * (K - L).
    """
    if target_depth <= net.depth:
        raise ValueError(
            f"target depth {target_depth} must exceed current depth {net.depth}"
        )
    d2 = net.out_dim
    last = net.layers[-1]
    split = AffineLayer(
        np.vstack([last.matrix, -last.matrix]), np.zeros(2 * d2)
    )
    eye = np.eye(2 * d2)
    mid = AffineLayer(eye, np.zeros(2 * d2))
    recombine = AffineLayer(
        np.hstack([np.eye(d2), -np.eye(d2)]), last.bias
    )
    n_mid = target_depth - net.depth - 1
    return ReluNetwork(
        net.layers[:-1] + (split,) + (mid,) * n_mid + (recombine,)
    )


def identity_network(dim: int, depth: int = 1) -> ReluNetwork:
    """Network realizing x -> x with the given depth."""
    plain = ReluNetwork((AffineLayer(np.eye(dim), np.zeros(dim)),))
    if depth == 1:
        return plain
    return extend_depth(plain, depth)


def _pad_all(nets: Sequence[ReluNetwork]) -> list[ReluNetwork]:
    target = max(n.depth for n in nets)
    return [n if n.depth == target else extend_depth(n, target) for n in nets]


def _block_diag(blocks: Sequence[np.ndarray]) -> np.ndarray:
    rows = sum(b.shape[0] for b in blocks)
    cols = sum(b.shape[1] for b in blocks)
    out = np.zeros((rows, cols))
    r = c = 0
    for b in blocks:
        out[r : r + b.shape[0], c : c + b.shape[1]] = b
        r += b.shape[0]
        c += b.shape[1]
    return out


def parallelize(nets: Sequence[ReluNetwork]) -> ReluNetwork:
    """Block-diagonal run of equal-depth networks on concatenated inputs."""
    if not nets:
        raise ValueError("parallelize needs at least one network")
    depths = {n.depth for n in nets}
    if len(depths) != 1:
        raise DimensionError(f"depth mismatch in parallelize: {sorted(depths)}")
    layers = []
    for ell in range(nets[0].depth):
        mats = [n.layers[ell].matrix for n in nets]
        biases = [n.layers[ell].bias for n in nets]
        layers.append(AffineLayer(_block_diag(mats), np.concatenate(biases)))
    return ReluNetwork(tuple(layers))


def parallelize_shared(nets: Sequence[ReluNetwork]) -> ReluNetwork:
    """(Phi_1(x), ..., Phi_n(x)) for networks sharing one input."""
    if not nets:
        raise ValueError("parallelize_shared needs at least one network")
    d = nets[0].in_dim
    if any(n.in_dim != d for n in nets):
        raise DimensionError("shared parallelization needs equal input dims")
    nets = _pad_all(list(nets))
    par = parallelize(nets)
    first = par.layers[0]
    stacked = np.vstack([n.layers[0].matrix for n in nets])
    return ReluNetwork((AffineLayer(stacked, first.bias),) + par.layers[1:])


def linear_combination(
    nets: Sequence[ReluNetwork], coeffs: Sequence[float]
) -> ReluNetwork:
    """sum_i a_i Phi_i(x_i) on distinct inputs; output dims must agree."""
    if len(nets) != len(coeffs):
        raise ValueError(
            f"{len(nets)} networks but {len(coeffs)} coefficients"
        )
    if not nets:
        raise ValueError("linear_combination needs at least one network")
    d_out = nets[0].out_dim
    if any(n.out_dim != d_out for n in nets):
        raise DimensionError("linear combination needs equal output dims")
    nets = _pad_all(list(nets))
    par = parallelize(nets)
    last = par.layers[-1]
    mats = [a * n.layers[-1].matrix for a, n in zip(coeffs, nets)]
    bias = sum(
        (a * n.layers[-1].bias for a, n in zip(coeffs, nets)),
        start=np.zeros(d_out),
    )
    return ReluNetwork(par.layers[:-1] + (AffineLayer(np.hstack(mats), bias),))


def linear_combination_shared(
    nets: Sequence[ReluNetwork], coeffs: Sequence[float]
) -> ReluNetwork:
    """sum_i a_i Phi_i(x) for networks sharing one input."""
    if len(nets) != len(coeffs):
        raise ValueError(
            f"{len(nets)} networks but {len(coeffs)} coefficients"
        )
    if not nets:
        raise ValueError("linear_combination_shared needs at least one network")
    d = nets[0].in_dim
    if any(n.in_dim != d for n in nets):
        raise DimensionError("shared combination needs equal input dims")
    nets = _pad_all(list(nets))
    if nets[0].depth == 1:
        # Single affine layer: the combination collapses to one affine map.
        mat = sum(a * n.layers[0].matrix for a, n in zip(coeffs, nets))
        bias = sum(a * n.layers[0].bias for a, n in zip(coeffs, nets))
        return ReluNetwork((AffineLayer(mat, bias),))
    comb = linear_combination(nets, coeffs)
    first = comb.layers[0]
    stacked = np.vstack([n.layers[0].matrix for n in nets])
    return ReluNetwork((AffineLayer(stacked, first.bias),) + comb.layers[1:])


def scalar_mult_network(a: float, dim: int = 1) -> ReluNetwork:
    """Network computing x -> a*x with all weights bounded by 1.

    For |a| <= 1 this is a plain affine layer; otherwise the magnitude is
    traded for depth floor(log2|a|) + 4 via repeated doubling of the pair
    (rho(x), rho(-x)).
    """
    if not math.isfinite(a):
        raise ValueError("scale must be finite")
    if abs(a) <= 1.0:
        return ReluNetwork((AffineLayer(a * np.eye(dim), np.zeros(dim)),))
    k = math.floor(math.log2(abs(a)))
    # 2**k <= |a| < 2**(k+1) must hold exactly; guard against log2 rounding.
    while 2.0 ** k > abs(a):
        k -= 1
    while 2.0 ** (k + 1) <= abs(a):
        k += 1
    alpha = a * 2.0 ** (-(k + 1))
    one_dim = ReluNetwork(
        (
            AffineLayer([[1.0], [-1.0]], [0.0, 0.0]),
            AffineLayer([[1.0, 0.0], [1.0, 1.0], [0.0, 1.0]], [0.0, 0.0, 0.0]),
        )
        + (
            AffineLayer(
                [[1.0, 1.0, -1.0], [1.0, 1.0, 1.0], [-1.0, 1.0, 1.0]],
                [0.0, 0.0, 0.0],
            ),
        )
        * (k + 1)
        + (AffineLayer([[alpha, 0.0, -alpha]], [0.0]),)
    )
    if dim == 1:
        return one_dim
    return parallelize([one_dim] * dim)


def affine_network(matrix, bias) -> ReluNetwork:
    """Network computing x -> Ax + b with all weights bounded by 1.

    Entries larger than 1 in magnitude are normalized out and restored by a
    scalar multiplication stage, giving depth at most floor(log2 a) + 5.
    """
    matrix = np.atleast_2d(np.asarray(matrix, dtype=np.float64))
    bias = np.atleast_1d(np.asarray(bias, dtype=np.float64))
    a = max(float(np.max(np.abs(matrix))), float(np.max(np.abs(bias))), 0.0)
    plain = ReluNetwork((AffineLayer(matrix, bias),))
    if a <= 1.0:
        return plain
    normalized = ReluNetwork((AffineLayer(matrix / a, bias / a),))
    return compose(scalar_mult_network(a, matrix.shape[0]), normalized)


def reduce_weights(net: ReluNetwork) -> ReluNetwork:
    """Pointwise-equal network with weight magnitude at most 1.

    Matrices are scaled by 1/B and the layer-l bias by B**-l, which keeps the
    hidden activations positively scaled copies of the originals; a final
    scalar multiplication by B**L restores the output.
    """
    from .core import metrics

    b = metrics(net).weight_magnitude
    if b <= 1.0:
        return net
    scaled = []
    for ell, layer in enumerate(net.layers, start=1):
        scaled.append(AffineLayer(layer.matrix / b, layer.bias / b ** ell))
    a = float(b) ** net.depth
    if not math.isfinite(a):
        raise OverflowError(
            f"weight magnitude {b} at depth {net.depth} overflows the rescale factor"
        )
    return compose(scalar_mult_network(a, net.out_dim), ReluNetwork(tuple(scaled)))


def sum_finite_width(nets: Sequence[ReluNetwork]) -> ReluNetwork:
    """sum_i Phi_i(x) with width independent of the number of summands.

    Each summand runs in its own depth segment while two identity channel
    groups carry the input forward and the running total backward, so the
    width stays within 2d + 2d' + max(2d, max_i width_i).
    """
    if not nets:
        raise ValueError("sum_finite_width needs at least one network")
    d = nets[0].in_dim
    d_out = nets[0].out_dim
    if any(n.in_dim != d or n.out_dim != d_out for n in nets):
        raise DimensionError("sum_finite_width needs equal input and output dims")

    a_in = np.vstack([np.eye(d), np.zeros((d_out, d)), np.eye(d)])
    mid = np.zeros((2 * d + d_out, d + 2 * d_out))
    mid[:d, :d] = np.eye(d)
    mid[d : d + d_out, d : d + d_out] = np.eye(d_out)
    mid[d : d + d_out, d + d_out :] = np.eye(d_out)
    mid[d + d_out :, :d] = np.eye(d)
    a_out = np.hstack([np.zeros((d_out, d)), np.eye(d_out), np.eye(d_out)])

    def segment(sub: ReluNetwork, first: bool, last: bool) -> ReluNetwork:
        block = parallelize(
            [
                identity_network(d, sub.depth),
                identity_network(d_out, sub.depth),
                sub,
            ]
        )
        layers = list(block.layers)
        if first:
            lay = layers[0]
            layers[0] = AffineLayer(lay.matrix @ a_in, lay.bias)
        post = a_out if last else mid
        lay = layers[-1]
        layers[-1] = AffineLayer(post @ lay.matrix, post @ lay.bias)
        return ReluNetwork(tuple(layers))

    total = segment(nets[0], first=True, last=len(nets) == 1)
    for i, sub in enumerate(nets[1:], start=1):
        seg = segment(sub, first=False, last=i == len(nets) - 1)
        total = compose(seg, total)
    return total


def append_relu(net: ReluNetwork) -> ReluNetwork:
    """Network realizing rho(net(x))."""
    d = net.out_dim
    return ReluNetwork(net.layers + (AffineLayer(np.eye(d), np.zeros(d)),))


def scale_output(net: ReluNetwork, c: float) -> ReluNetwork:
    """Scale the realized function by c by scaling the last layer."""
    last = net.layers[-1]
    return ReluNetwork(
        net.layers[:-1] + (AffineLayer(c * last.matrix, c * last.bias),)
    )


def precompose_affine(net: ReluNetwork, matrix, bias) -> ReluNetwork:
    """Network realizing net(Ax + b) by merging the map into the first layer."""
    matrix = np.atleast_2d(np.asarray(matrix, dtype=np.float64))
    bias = np.atleast_1d(np.asarray(bias, dtype=np.float64))
    first = net.layers[0]
    if first.in_dim != matrix.shape[0]:
        raise DimensionError("affine output dim does not match network input dim")
    merged = AffineLayer(first.matrix @ matrix, first.matrix @ bias + first.bias)
    return ReluNetwork((merged,) + net.layers[1:])


def prune(net: ReluNetwork) -> ReluNetwork:
    """Remove hidden nodes with no outgoing nonzero edge (cascading).

    The result is pointwise equal.  A hidden layer whose nodes all die is
    collapsed into the following layer as a constant.  Degenerate input or
    output nodes cannot be removed without changing the signature; the
    encoder rejects them instead.
    """
    mats = [np.array(l.matrix) for l in net.layers]
    biases = [np.array(l.bias) for l in net.layers]
    changed = True
    while changed:
        changed = False
        # Hidden layer ell sits between mats[ell] (into it) and mats[ell+1] (out).
        for ell in range(len(mats) - 2, -1, -1):
            keep = np.any(mats[ell + 1] != 0.0, axis=0)
            if np.all(keep):
                continue
            changed = True
            if not np.any(keep):
                # Whole layer dead: the next layer sees rho(anything)=const 0,
                # so layers ell and ell+1 collapse into a constant affine map.
                const = biases[ell + 1]
                mats[ell : ell + 2] = [
                    np.zeros((const.shape[0], mats[ell].shape[1]))
                ]
                biases[ell : ell + 2] = [const]
            else:
                mats[ell] = mats[ell][keep, :]
                biases[ell] = biases[ell][keep]
                mats[ell + 1] = mats[ell + 1][:, keep]
            break
    return ReluNetwork(tuple(AffineLayer(m, b) for m, b in zip(mats, biases)))


def is_nondegenerate(net: ReluNetwork) -> bool:
    """True when every non-output node has an outgoing nonzero edge and every
    output node an incoming one."""
    for layer in net.layers:
        if not np.all(np.any(layer.matrix != 0.0, axis=0)):
            return False
    return bool(np.all(np.any(net.layers[-1].matrix != 0.0, axis=1)))
