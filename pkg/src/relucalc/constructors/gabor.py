"""Cutoff plateaus, modulated (cosine/sine-carrier) networks, and the
multivariate Gaussian bump.

The cutoff is exact: 1 on the inner box, 0 outside the outer box, with every
plateau value reproduced bitwise.  Modulation multiplies a trusted
approximation of the envelope by a cosine of a linear form.  The Gaussian
composes a sum-of-squares stage with an exponential stage and is clamped to
exact zero far out by a cutoff factor.
"""

from __future__ import annotations

import math

import numpy as np

from ..calculus import (
    affine_network,
    append_relu,
    compose,
    linear_combination,
    parallelize_shared,
    scalar_mult_network,
)
from ..core import AffineLayer, ReluNetwork
from .algebra import multiply_network, _check_eps
from .smooth import SmoothDescriptor, smooth_network_general
from .trig import cosine_network, cosine_shifted_network


def _box_gate_layers(y: float, dim: int, scale: float) -> ReluNetwork:
    """Network computing chi(t)/scale: 1 on [-y, y]^dim, 0 outside
    [-y-1, y+1]^dim, in [0, 1] between, all plateau values exact.

    Per coordinate the nested form rho(1 - rho(t - y) - rho(-t - y)) never
    accumulates rounding on the plateaus; the final layer checks that all
    coordinates are active.  scale must be a power of two.
    """
    inv = 1.0 / scale
    rows = np.zeros((2 * dim, dim))
    bias1 = np.empty(2 * dim)
    for i in range(dim):
        rows[2 * i, i] = inv
        rows[2 * i + 1, i] = -inv
        bias1[2 * i] = -y * inv
        bias1[2 * i + 1] = -y * inv
    collect = np.zeros((dim, 2 * dim))
    for i in range(dim):
        collect[i, 2 * i] = -1.0
        collect[i, 2 * i + 1] = -1.0
    layer2 = AffineLayer(collect, np.full(dim, inv))
    layer3 = AffineLayer(np.ones((1, dim)), [-(dim - 1) * inv])
    layer4 = AffineLayer([[1.0]], [0.0])
    return ReluNetwork((AffineLayer(rows, bias1), layer2, layer3, layer4))


def cutoff_network(y: float, dim: int = 1) -> ReluNetwork:
    """Network equal to 1 on [-y, y]^dim, 0 outside [-y-1, y+1]^dim, and in
    [0, 1] in between; the plateau values are exact."""
    if y <= 0:
        raise ValueError("inner half-width must be positive")
    if dim < 1:
        raise ValueError("dimension must be positive")
    return _box_gate_layers(float(y), dim, 1.0)


def _scaled_cutoff(y: float, dim: int) -> tuple[ReluNetwork, float]:
    """Cutoff divided by a power of two so that all weights are at most 1."""
    scale = 2.0 ** max(0.0, math.ceil(math.log2(max(1.0, y, float(dim - 1)))))
    return _box_gate_layers(float(y), dim, scale), scale


def modulated_network(
    envelope: ReluNetwork,
    envelope_bound: float,
    frequency,
    half_width: float,
    eps: float,
) -> tuple[ReluNetwork, ReluNetwork]:
    """Real and imaginary parts of the modulation of a trusted envelope.

    envelope approximates some f within eps on [-D, D]^d (trusted) and
    envelope_bound is max(1, sup|f|).  Returns networks approximating
    cos(2 pi <xi, t>) f(t) and sin(2 pi <xi, t>) f(t); the two sup errors sum
    to at most 3 eps on the box.
    """
    _check_eps(eps)
    xi = np.atleast_1d(np.asarray(frequency, dtype=np.float64))
    d = envelope.in_dim
    if xi.shape[0] != d:
        raise ValueError(
            f"frequency has {xi.shape[0]} coordinates, envelope expects {d}"
        )
    s_f = max(1.0, float(envelope_bound))
    if not np.any(xi):
        zero = ReluNetwork(
            (AffineLayer(np.zeros((1, d)), [0.0]),)
        )
        return envelope, zero

    reach = d * float(half_width) * float(np.max(np.abs(xi)))
    carrier_tol = eps / (6.0 * s_f)

    def carrier(kind: str) -> ReluNetwork:
        if kind == "re":
            osc = cosine_network(2.0 * math.pi, reach, carrier_tol)
        else:
            osc = cosine_shifted_network(
                2.0 * math.pi, math.pi / 2.0, reach, carrier_tol
            )
        return compose(osc, affine_network(xi.reshape(1, -1), [0.0]))

    product = multiply_network(s_f + 0.5, eps / 6.0)

    def assemble(kind: str) -> ReluNetwork:
        pair = parallelize_shared([carrier(kind), envelope])
        return compose(product, pair)

    return assemble("re"), assemble("im")


def _clamp_above(threshold: float) -> ReluNetwork:
    """Network computing min(u, threshold) for u >= 0 with weights at most 1."""
    s = 2.0 ** max(0.0, math.ceil(math.log2(max(1.0, threshold))))
    inv = 1.0 / s
    split = ReluNetwork(
        (
            AffineLayer([[inv], [inv]], [0.0, -threshold * inv]),
            AffineLayer([[1.0, -1.0]], [0.0]),
        )
    )
    if s == 1.0:
        return split
    return compose(scalar_mult_network(s), split)


def gaussian_network(dim: int, eps: float) -> ReluNetwork:
    """Approximate exp(-|x|_2^2) on all of R^dim within eps.

    A sum of per-coordinate squares feeds an exponential network; the squared
    radius is clamped where the Gaussian falls below eps/4, which keeps the
    exponential stage on a short interval.  A cutoff factor forces exact zero
    outside [-R-1, R+1]^dim where R is the integer ceiling of log2(1/eps),
    beyond which the Gaussian itself is below eps.
    """
    if dim < 1:
        raise ValueError("dimension must be positive")
    _check_eps(eps)
    radius = max(1, math.ceil(math.log2(1.0 / eps)))
    outer = radius + 1.0

    budget = eps / 4.0
    dup = ReluNetwork((AffineLayer([[1.0], [1.0]], [0.0, 0.0]),))
    square_1d = compose(multiply_network(outer, budget / dim), dup)
    sum_squares = linear_combination([square_1d] * dim, [1.0] * dim)
    clamp_at = float(math.ceil(math.log(4.0 / eps)) + 1)
    clamped = compose(_clamp_above(clamp_at), append_relu(sum_squares))

    decay = SmoothDescriptor(
        lambda yv: math.exp(-yv), (0.0, clamp_at + 1.0), "exp decay"
    )
    envelope = compose(smooth_network_general(decay, budget), clamped)

    gate, scale = _scaled_cutoff(float(radius), dim)
    product = multiply_network(2.0, budget / scale)
    gated = compose(product, parallelize_shared([envelope, gate]))
    if scale == 1.0:
        return gated
    return compose(scalar_mult_network(scale), gated)
