"""Cardinal B-spline networks, spline wavelets, Haar elements, and the
dilation/translation transform for affine dictionary elements.

The B-spline is assembled from shifted rectified monomials and localized by
an exact plateau gate, so the network vanishes identically outside the
support neighbourhood.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

import numpy as np

from ..calculus import (
    affine_network,
    append_relu,
    compose,
    linear_combination_shared,
    parallelize_shared,
    scalar_mult_network,
    sum_finite_width,
)
from ..core import AffineLayer, ReluNetwork
from .algebra import multiply_network, polynomial_network, _check_eps


@lru_cache(maxsize=None)
def _bspline_exact(m: int, x: Fraction) -> Fraction:
    if m == 1:
        return Fraction(1) if 0 <= x < 1 else Fraction(0)
    prev = m - 1
    return (
        x * _bspline_exact(prev, x) + (m - x) * _bspline_exact(prev, x - 1)
    ) / prev


def cardinal_bspline(m: int, x) -> float:
    """Cardinal B-spline of order m (the m-fold convolution power of the unit
    indicator), evaluated exactly via the two-term recurrence."""
    if m < 1:
        raise ValueError("order must be a positive integer")
    return float(_bspline_exact(m, Fraction(x).limit_denominator(10 ** 12)))


def _plateau_gate(lo: float, hi: float, ramp: float) -> tuple[ReluNetwork, float]:
    """Network g and amplitude A with A*g(x) equal to 1 on [lo, hi], 0 outside
    [lo - ramp, hi + ramp], and linear in between.

    The nested form rho(ramp - rho(x - hi) - rho(lo - x)) keeps the plateaus
    exact in floating point: inside, both inner terms are exactly zero;
    outside, monotone rounding keeps the pre-activation nonpositive.  The
    first layer is pre-scaled by a power of two so all weights stay at
    most 1 and the scaled arithmetic mirrors the unscaled one bit for bit.
    """
    s = 2.0 ** max(0.0, math.ceil(math.log2(max(1.0, abs(lo), abs(hi), ramp))))
    inv = 1.0 / s
    net = ReluNetwork(
        (
            AffineLayer([[inv], [-inv]], [-hi * inv, lo * inv]),
            AffineLayer([[-1.0, -1.0]], [ramp * inv]),
            AffineLayer([[1.0]], [0.0]),
        )
    )
    return net, s / ramp


def bspline_network(m: int, eps: float) -> ReluNetwork:
    """Approximate the order-m cardinal B-spline within eps on all of R.

    For m >= 2 the truncated-power representation
    sum_k (-1)^k C(m, k) rho(x - k)^(m-1) / (m-1)! reproduces the spline; a
    plateau gate multiplied in keeps the output exactly zero outside
    [-1, m+1].  Order 1 is the unit indicator and is realized by a steep gate
    alone (ramp width eps^2 / 2 around the jumps).  Weights stay bounded by 1.
    """
    if m < 1:
        raise ValueError("order must be a positive integer")
    _check_eps(eps)
    if m == 1:
        body = ReluNetwork((AffineLayer([[0.0]], [1.0]),))
        gate, amp = _plateau_gate(0.0, 1.0, eps * eps / 2.0)
    else:
        mono = [0.0] * (m - 1) + [1.0]
        power = polynomial_network(mono, float(m + 2), eps / (4.0 * (m + 2)))
        terms = []
        for k in range(m + 1):
            coeff = (-1.0) ** k * math.comb(m, k) / math.factorial(m - 1)
            shifted = affine_network([[1.0]], [-float(k)])
            term = compose(power, append_relu(shifted))
            terms.append(compose(scalar_mult_network(coeff), term))
        body = sum_finite_width(terms)
        gate, amp = _plateau_gate(0.0, float(m), 1.0)
    mult = multiply_network(1.0 + eps / 2.0, eps / (2.0 * amp))
    gated = compose(mult, parallelize_shared([body, gate]))
    if amp == 1.0:
        return gated
    return compose(scalar_mult_network(amp), gated)


def spline_wavelet_coeffs(m: int) -> tuple[float, ...]:
    """Coefficients q_1..q_{3m-1} expanding the order-m spline wavelet in
    half-integer shifts of the order-m B-spline."""
    if m < 1:
        raise ValueError("order must be a positive integer")
    out = []
    for n in range(1, 3 * m):
        total = Fraction(0)
        for j in range(m + 1):
            total += math.comb(m, j) * _bspline_exact(2 * m, Fraction(n - j))
        total *= Fraction((-1) ** (n + 1), 2 ** (m - 1))
        out.append(float(total))
    return tuple(out)


def spline_wavelet_reference(m: int, x) -> float:
    """Exact spline wavelet value sum_n q_n N_m(2x - n + 1)."""
    q = spline_wavelet_coeffs(m)
    return float(
        sum(
            qn * cardinal_bspline(m, 2.0 * float(x) - n + 1)
            for n, qn in enumerate(q, start=1)
        )
    )


def dilate_translate(
    base, matrix, shift, p: float, half_width: float, eta: float
) -> ReluNetwork:
    """Network approximating |det A|**(1/p) * f(Ax - e) on [-E, E]**d.

    base is a constructor handle (D, eta) -> network approximating f on
    [-D, D]**d within eta.  The input transform is absorbed as a plain affine
    layer; the amplitude factor is applied at the output.
    """
    a = np.atleast_2d(np.asarray(matrix, dtype=np.float64))
    e = np.atleast_1d(np.asarray(shift, dtype=np.float64))
    d = a.shape[0]
    if a.shape[0] != a.shape[1] or e.shape[0] != d:
        raise ValueError("need a square matrix and a matching shift vector")
    det = float(np.linalg.det(a))
    if abs(det) <= 1e-12:
        raise ValueError("dilation matrix is singular")
    reach = d * float(half_width) * float(np.max(np.abs(a))) + float(
        np.max(np.abs(e)) if e.size else 0.0
    )
    net = base(reach, eta)
    net = compose(net, ReluNetwork((AffineLayer(a, -e),)))
    factor = 1.0 if math.isinf(p) else abs(det) ** (1.0 / p)
    if factor != 1.0:
        net = compose(ReluNetwork((AffineLayer([[factor]], [0.0]),)), net)
    return net


def spline_wavelet_network(m: int, eps: float) -> ReluNetwork:
    """Approximate the order-m spline wavelet within eps on its support."""
    _check_eps(eps)
    q = spline_wavelet_coeffs(m)
    budget = sum(abs(c) for c in q)
    eta = eps / budget
    terms = [
        dilate_translate(
            lambda reach, tol: bspline_network(m, tol),
            [[2.0]],
            [float(n - 1)],
            math.inf,
            2.0 * m,
            eta,
        )
        for n in range(1, 3 * m)
    ]
    return linear_combination_shared(terms, q)


def haar_mother_network(eps: float) -> ReluNetwork:
    """Continuous ramp approximation of the Haar mother wavelet with
    transition half-width eps**2."""
    _check_eps(eps)
    delta = eps * eps
    inv = 1.0 / (2.0 * delta)
    mat = [[1.0]] * 6
    bias = [delta, -delta, -(0.5 - delta), -(0.5 + delta), -(1.0 - delta), -(1.0 + delta)]
    out = [[inv, -inv, -2.0 * inv, 2.0 * inv, inv, -inv]]
    return ReluNetwork((AffineLayer(mat, bias), AffineLayer(out, [0.0])))


def haar_reference(x: float) -> float:
    """The Haar mother wavelet: 1 on [0, 1/2), -1 on [1/2, 1), 0 elsewhere."""
    if 0.0 <= x < 0.5:
        return 1.0
    if 0.5 <= x < 1.0:
        return -1.0
    return 0.0


def haar_element_network(n: int, k: int, eps: float) -> ReluNetwork:
    """Scaled and shifted Haar element 2**(n/2) * psi(2**n x - k) with ramp
    half-width eps**2; connectivity is exactly 18."""
    if n < 0:
        raise ValueError("scale index must be nonnegative")
    if not 0 <= k <= 2 ** n - 1:
        raise ValueError(f"shift index {k} out of range for scale {n}")
    _check_eps(eps)
    delta = eps * eps
    amp = 2.0 ** (n / 2.0)
    dil = 2.0 ** n
    mat = [[dil]] * 6
    bias = [
        -k + delta,
        -k - delta,
        -k - (0.5 - delta),
        -k - (0.5 + delta),
        -k - (1.0 - delta),
        -k - (1.0 + delta),
    ]
    inv = 1.0 / (2.0 * delta)
    out = [[amp * inv, -amp * inv, -2.0 * amp * inv, 2.0 * amp * inv, amp * inv, -amp * inv]]
    return ReluNetwork((AffineLayer(mat, bias), AffineLayer(out, [0.0])))
