"""Weight quantization onto a dyadic lattice and the self-delimiting
bit-exact network codec.

The lattice for resolution parameter m and tolerance eps is
2**(-m*ceil(log2(1/eps))) * Z clipped to [-eps**-m, eps**-m].  Lattice
indices are handled as exact integers (floats are dyadic rationals), so
round trips are bitwise and the grid step may be far below the subnormal
range without loss.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import AffineLayer, ReluNetwork, metrics
from .calculus import is_nondegenerate


class QuantizationError(ValueError):
    """Violated quantization precondition."""


class CodecError(ValueError):
    """Malformed or inconsistent bitstring."""


def _ceil_log2_int(x: int) -> int:
    """ceil(log2(x)) for a positive integer."""
    return (x - 1).bit_length()


def _ceil_log2_inv(eps: float) -> int:
    """ceil(log2(1/eps)) computed exactly for float eps in (0, 1)."""
    frac = Fraction(eps)
    # smallest t with 2**t >= 1/eps
    t = 0
    while Fraction(2) ** t < 1 / frac:
        t += 1
    return t


@dataclass(frozen=True)
class QuantGrid:
    """Dyadic weight lattice with resolution m at tolerance eps."""

    m: int
    eps: float

    def __post_init__(self):
        if self.m < 1:
            raise QuantizationError("resolution parameter must be positive")
        if not (0.0 < self.eps < 0.5):
            raise QuantizationError(
                f"tolerance must lie in (0, 1/2), got {self.eps}"
            )

    @property
    def step_exponent(self) -> int:
        """t such that the lattice step is 2**-t."""
        return self.m * _ceil_log2_inv(self.eps)

    @property
    def step(self) -> float:
        return 2.0 ** -self.step_exponent

    @property
    def bound(self) -> float:
        try:
            return float(self.eps) ** -self.m
        except OverflowError:
            return math.inf

    @property
    def bound_exact(self) -> Fraction:
        return Fraction(self.eps) ** -self.m

    @property
    def bits_per_weight(self) -> int:
        """Fixed offset-binary width 2*(m*ceil(log2(1/eps)) + 1)."""
        return 2 * (self.step_exponent + 1)

    def index_of(self, value: float) -> int:
        """Nearest lattice index, ties toward smaller absolute value."""
        if not math.isfinite(value):
            raise QuantizationError("weights must be finite")
        num, den = float(value).as_integer_ratio()
        t = self.step_exponent
        # value = num / 2**s with den = 2**s
        s = den.bit_length() - 1
        if t >= s:
            return num << (t - s)
        shift = s - t
        sign = -1 if num < 0 else 1
        mag = abs(num)
        half = 1 << (shift - 1)
        # round to nearest, exact ties toward zero
        return sign * ((mag + half - 1) >> shift)

    def value_of(self, index: int) -> float:
        """Exact float value of a lattice index."""
        return float(Fraction(index, 2 ** self.step_exponent))

    def _in_range(self, value: float) -> bool:
        # bound = eps**-m can exceed the float range; compare exactly then
        return abs(Fraction(value)) <= self.bound_exact

    def round(self, value: float) -> float:
        """Nearest lattice value; raises if it falls outside the clip range."""
        idx = self.index_of(value)
        out = self.value_of(idx)
        if not self._in_range(out):
            raise QuantizationError(
                f"weight {value!r} exceeds the lattice range eps**-{self.m}"
            )
        return out

    def contains(self, value: float) -> bool:
        num, den = float(value).as_integer_ratio()
        s = den.bit_length() - 1
        return s <= self.step_exponent and self._in_range(value)


def minimal_quantization_k(net: ReluNetwork, eps: float) -> int:
    """Smallest k with connectivity and magnitude both at most eps**-k."""
    m = metrics(net)
    need = max(float(m.connectivity), m.weight_magnitude, 1.0)
    if need <= 1.0:
        return 1
    k = max(1, math.ceil(math.log(need) / math.log(1.0 / eps) - 1e-12))
    while float(eps) ** -k < need:
        k += 1
    return k


def quantization_resolution(
    net: ReluNetwork, k: int, domain_half_width: float
) -> int:
    """Resolution m = ceil(3 k L + log2(ceil(D)))."""
    d_ceil = max(1, math.ceil(domain_half_width))
    return math.ceil(3 * k * net.depth + math.log2(d_ceil))


def quantize_network(
    net: ReluNetwork, k: int, domain_half_width: float, eps: float
) -> tuple[ReluNetwork, int]:
    """Replace every weight by its nearest lattice value.

    Requires connectivity and weight magnitude at most eps**-k; with the
    returned resolution m, outputs on [-D, D]^d deviate by at most eps.
    """
    if k < 1:
        raise QuantizationError("k must be a positive integer")
    grid_probe = QuantGrid(1, eps)  # validates eps
    del grid_probe
    cap = float(eps) ** -k
    stats = metrics(net)
    problems = []
    if stats.connectivity > cap:
        problems.append(f"connectivity {stats.connectivity} > {cap:g}")
    if stats.weight_magnitude > cap:
        problems.append(f"magnitude {stats.weight_magnitude:g} > {cap:g}")
    if problems:
        k_min = minimal_quantization_k(net, eps)
        raise QuantizationError(
            "; ".join(problems) + f"; smallest admissible k is {k_min}"
        )
    m = quantization_resolution(net, k, domain_half_width)
    grid = QuantGrid(m, eps)
    layers = []
    for layer in net.layers:
        mat = np.array(
            [grid.round(v) for v in layer.matrix.ravel()]
        ).reshape(layer.matrix.shape)
        bias = np.array([grid.round(v) for v in layer.bias])
        layers.append(AffineLayer(mat, bias))
    return ReluNetwork(tuple(layers)), m


# --- bitstrings -------------------------------------------------------------


class BitString:
    """Append-only bit sequence with random-access reads.

    Complete bytes are packed most-significant-bit first; a small pending
    accumulator holds the unaligned tail, keeping appends linear in the
    number of bits written.
    """

    __slots__ = ("_bytes", "_pending", "_pending_bits")

    def __init__(self, bits=()):
        self._bytes = bytearray()
        self._pending = 0
        self._pending_bits = 0
        for b in bits:
            self.append_bit(b)

    def __len__(self) -> int:
        return 8 * len(self._bytes) + self._pending_bits

    def append_uint(self, value: int, width: int) -> None:
        if width < 0 or value < 0 or value >> width:
            raise CodecError(f"value {value} does not fit in {width} bits")
        acc = (self._pending << width) | value
        total = self._pending_bits + width
        tail = total % 8
        whole = total // 8
        if whole:
            self._bytes += (acc >> tail).to_bytes(whole, "big")
        self._pending = acc & ((1 << tail) - 1)
        self._pending_bits = tail

    def append_bit(self, bit: int) -> None:
        self.append_uint(bit & 1, 1)

    def append_unary(self, count: int) -> None:
        """count ones followed by a single zero."""
        self.append_uint((1 << (count + 1)) - 2, count + 1)

    def extend(self, other: "BitString") -> None:
        for chunk in range(0, len(other._bytes), 512):
            block = other._bytes[chunk : chunk + 512]
            self.append_uint(int.from_bytes(block, "big"), 8 * len(block))
        if other._pending_bits:
            self.append_uint(other._pending, other._pending_bits)

    def uint(self, pos: int, width: int) -> int:
        if pos < 0 or width < 0 or pos + width > len(self):
            raise CodecError("bitstring truncated")
        if width == 0:
            return 0
        first = pos // 8
        last = (pos + width - 1) // 8
        n_whole = len(self._bytes)
        chunk = 0
        got_bits = 0
        hi = min(last, n_whole - 1)
        if first < n_whole:
            chunk = int.from_bytes(self._bytes[first : hi + 1], "big")
            got_bits = 8 * (hi + 1 - first)
        if last >= n_whole:
            chunk = (chunk << self._pending_bits) | self._pending
            got_bits += self._pending_bits
        # chunk now holds bits [8*first, 8*first + got_bits)
        drop = (8 * first + got_bits) - (pos + width)
        return (chunk >> drop) & ((1 << width) - 1)

    def bit(self, pos: int) -> int:
        if not 0 <= pos < len(self):
            raise IndexError(pos)
        return self.uint(pos, 1)

    def to_list(self) -> list[int]:
        return [self.bit(i) for i in range(len(self))]

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, BitString)
            and len(self) == len(other)
            and self._bytes == other._bytes
            and self._pending == other._pending
        )

    def __repr__(self) -> str:
        if len(self) <= 64:
            return f"BitString('{''.join(str(b) for b in self.to_list())}')"
        return f"BitString(<{len(self)} bits>)"

    def to_bytes(self) -> bytes:
        """Wire format: 64-bit big-endian bit count, then the bits packed
        most-significant first and zero-padded to a byte boundary."""
        nbits = len(self)
        header = nbits.to_bytes(8, "big")
        body = bytes(self._bytes)
        if self._pending_bits:
            body += bytes([self._pending << (8 - self._pending_bits)])
        return header + body

    @classmethod
    def from_bytes(cls, blob: bytes) -> "BitString":
        if len(blob) < 8:
            raise CodecError("missing bit-count header")
        nbits = int.from_bytes(blob[:8], "big")
        nbytes = (nbits + 7) // 8
        if len(blob) < 8 + nbytes:
            raise CodecError("bitstring truncated")
        out = cls()
        whole = nbits // 8
        out._bytes = bytearray(blob[8 : 8 + whole])
        out._pending_bits = nbits % 8
        if out._pending_bits:
            out._pending = blob[8 + whole] >> (8 - out._pending_bits)
        return out


def write_bitstring(bits: BitString, path) -> None:
    with open(path, "wb") as fh:
        fh.write(bits.to_bytes())


def read_bitstring(path) -> BitString:
    with open(path, "rb") as fh:
        return BitString.from_bytes(fh.read())


# --- codec ------------------------------------------------------------------


def code_length_bound(connectivity: int, m: int, eps: float) -> int:
    """Closed-form bit budget for a network with the given connectivity."""
    if connectivity < 0:
        raise ValueError("connectivity must be nonnegative")
    if connectivity == 0:
        return 1
    big_m = connectivity
    b_eps = QuantGrid(m, eps).bits_per_weight
    return (
        3 * big_m * b_eps
        + 3 * big_m * _ceil_log2_int(2 * big_m)
        + (big_m + 2) * _ceil_log2_int(big_m)
        + big_m
        + 1
    )


def _index_width(total: int) -> int:
    """Width for values 1..total with an all-zero terminator."""
    return max(1, _ceil_log2_int(total + 1))


def _size_width(connectivity: int) -> int:
    return max(1, _ceil_log2_int(connectivity))


def encode(
    net: ReluNetwork, m: int, eps: float, bits_per_weight: int | None = None
) -> BitString:
    """Serialize a non-degenerate network with lattice weights to bits.

    Layout: unary connectivity; depth; layer dimensions; per non-output node
    the ascending child indices (zero-terminated); then per node its node
    weight followed by the edge weights to its children, each as an
    offset-binary lattice index.
    """
    grid = QuantGrid(m, eps)
    width_b = grid.bits_per_weight if bits_per_weight is None else bits_per_weight
    stats = metrics(net)
    big_m = stats.connectivity
    out = BitString()
    if big_m == 0:
        out.append_bit(0)
        return out
    if not is_nondegenerate(net):
        raise CodecError(
            "encoder requires every non-output node to have an outgoing edge "
            "and every output node an incoming one (prune first)"
        )
    for layer in net.layers:
        for v in np.concatenate([layer.matrix.ravel(), layer.bias]):
            if v and not grid.contains(v):
                raise CodecError(f"weight {v!r} is not on the quantization lattice")

    out.append_unary(big_m)
    w_m = _size_width(big_m)
    depth = net.depth
    dims = net.dims
    if depth >> w_m or any(d >> w_m for d in dims):
        raise CodecError(
            f"dimensions {dims} or depth {depth} overflow the {w_m}-bit size "
            f"fields implied by connectivity {big_m}"
        )
    out.append_uint(depth, w_m)
    for d in dims:
        out.append_uint(d, w_m)

    total_nodes = sum(dims)
    w_n = _index_width(total_nodes)
    # global node index, layer-major starting at 1
    offsets = np.concatenate([[0], np.cumsum(dims)])

    def children(layer_idx: int, local: int) -> list[int]:
        mat = net.layers[layer_idx].matrix
        rows = np.nonzero(mat[:, local])[0]
        base = offsets[layer_idx + 1]
        return [int(base + r + 1) for r in rows]

    for ell in range(depth):
        for local in range(dims[ell]):
            for child in children(ell, local):
                out.append_uint(child, w_n)
            out.append_uint(0, w_n)

    offset = 1 << (width_b - 1)

    def emit_weight(value: float) -> None:
        idx = grid.index_of(value)
        coded = idx + offset
        if coded < 0 or coded >> width_b:
            raise CodecError(
                f"lattice index {idx} overflows {width_b} bits per weight"
            )
        out.append_uint(coded, width_b)

    for ell in range(depth):
        for local in range(dims[ell]):
            # node weight: bias feeding this node; input nodes carry none
            emit_weight(0.0 if ell == 0 else float(net.layers[ell - 1].bias[local]))
            for row in np.nonzero(net.layers[ell].matrix[:, local])[0]:
                emit_weight(float(net.layers[ell].matrix[row, local]))
    for local in range(dims[depth]):
        emit_weight(float(net.layers[depth - 1].bias[local]))
    return out


def decode(
    bits: BitString, m: int, eps: float, bits_per_weight: int | None = None
) -> ReluNetwork | None:
    """Invert encode; returns None for the connectivity-zero sentinel."""
    grid = QuantGrid(m, eps)
    width_b = grid.bits_per_weight if bits_per_weight is None else bits_per_weight
    pos = 0

    def take(width: int) -> int:
        nonlocal pos
        value = bits.uint(pos, width)
        pos += width
        return value

    big_m = 0
    while True:
        if take(1) == 0:
            break
        big_m += 1
    if big_m == 0:
        return None
    w_m = _size_width(big_m)
    depth = take(w_m)
    if depth < 1:
        raise CodecError("decoded depth must be positive")
    dims = [take(w_m) for _ in range(depth + 1)]
    if any(d < 1 for d in dims):
        raise CodecError("decoded layer dimensions must be positive")
    total_nodes = sum(dims)
    w_n = _index_width(total_nodes)
    offsets = np.concatenate([[0], np.cumsum(dims)])

    children: list[list[int]] = []
    for ell in range(depth):
        lo, hi = offsets[ell + 1], offsets[ell + 2]
        for local in range(dims[ell]):
            kids = []
            while True:
                idx = take(w_n)
                if idx == 0:
                    break
                if not lo < idx <= hi:
                    raise CodecError(
                        f"child index {idx} points outside layer {ell + 1}"
                    )
                kids.append(idx)
            if kids != sorted(kids):
                raise CodecError("child indices must be ascending")
            children.append(kids)

    mats = [np.zeros((dims[ell + 1], dims[ell])) for ell in range(depth)]
    biases = [np.zeros(dims[ell + 1]) for ell in range(depth)]
    offset = 1 << (width_b - 1)

    node = 0
    for ell in range(depth):
        for local in range(dims[ell]):
            node_weight = grid.value_of(take(width_b) - offset)
            if ell > 0:
                biases[ell - 1][local] = node_weight
            elif node_weight != 0.0:
                raise CodecError("input nodes must carry zero node weights")
            for child in children[node]:
                row = child - offsets[ell + 1] - 1
                mats[ell][row, local] = grid.value_of(take(width_b) - offset)
            node += 1
    for local in range(dims[depth]):
        biases[depth - 1][local] = grid.value_of(take(width_b) - offset)
    if pos != len(bits):
        raise CodecError(f"{len(bits) - pos} trailing bits after decode")
    return ReluNetwork(
        tuple(AffineLayer(mt, bs) for mt, bs in zip(mats, biases))
    )
