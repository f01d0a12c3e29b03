"""Interior-node quadrature and the discrete norms built on it.

All spatial integrals in the model are taken over interior nodal values
only (x_1..x_{M-1}); the boundary values are owned by the boundary
conditions and never enter an integral.  The rule stitches together an open
Milne rule over the first four cells, composite Simpson panels in the
middle, and a second open Milne rule over the last four cells.  Both end
rules have degree of precision 3, so the composite rule integrates cubics
exactly and converges at fourth order for smooth integrands despite never
touching x_0 or x_M.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InvalidParameter


@dataclass(frozen=True)
class InteriorVector:
    """Nodal values at x_1..x_{M-1} together with the spacing h.

    The length must be odd and at least 7, i.e. M - 1 for some admissible
    mesh with M = 2*(m_prime + 3); carrying h around removes an entire class
    of "norm computed with the wrong mesh" mistakes.
    """

    values: np.ndarray
    h: float

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "h", float(self.h))
        if values.ndim != 1:
            raise DimensionMismatch(f"interior vector must be one-dimensional, got shape {values.shape}")
        n = values.shape[0]
        if n % 2 == 0 or n < 7:
            raise DimensionMismatch(
                f"interior vector length must be odd and >= 7 (got {n}); "
                "lengths are M - 1 with M = 2*(m_prime + 3)"
            )
        if not (math.isfinite(self.h) and self.h > 0.0):
            raise InvalidParameter(f"h must be positive and finite, got {self.h!r}")

    def __len__(self) -> int:
        return self.values.shape[0]


def qh(v: InteriorVector) -> float:
    """Integrate interior nodal values over [0, a_dagger].

    Summation is a fixed left-to-right pass (end rule, Simpson panels in
    index order, end rule) so repeated calls on equal inputs are
    bit-identical.
    """
    val = v.values
    h = v.h
    m_prime = (len(val) + 1) // 2 - 3
    four_thirds = 4.0 * h / 3.0
    left = four_thirds * (2.0 * val[0] - val[1] + 2.0 * val[2])
    right = four_thirds * (2.0 * val[-3] - val[-2] + 2.0 * val[-1])
    if m_prime >= 2:
        # Simpson panel for i in 2..m_prime covers nodes 2i, 2i+1, 2i+2
        # (zero-based indices 2i-1, 2i, 2i+1).
        a = val[3 : 2 * m_prime : 2]
        b = val[4 : 2 * m_prime + 1 : 2]
        c = val[5 : 2 * m_prime + 2 : 2]
        panels = a + 4.0 * b + c
        interior = float(np.cumsum(panels)[-1])
    else:
        interior = 0.0
    return left + (h / 3.0) * interior + right


def weights(n: int, h: float) -> np.ndarray:
    """Weight vector w with qh(v) = sum(w * v.values) for length-n vectors.

    Built with the same elementary expressions as :func:`qh`, so applying
    qh to a unit basis vector reproduces the corresponding entry exactly.
    Note w[1] and w[-2] are negative: the rule is not monotone.
    """
    if n % 2 == 0 or n < 7:
        raise DimensionMismatch(f"weight vector length must be odd and >= 7, got {n}")
    h = float(h)
    m_prime = (n + 1) // 2 - 3
    four_thirds = 4.0 * h / 3.0
    third = h / 3.0
    w = np.zeros(n)
    w[0] = four_thirds * 2.0
    w[1] = four_thirds * -1.0
    w[2] = four_thirds * 2.0
    w[-3] = four_thirds * 2.0
    w[-2] = four_thirds * -1.0
    w[-1] = four_thirds * 2.0
    if m_prime >= 2:
        counts = np.zeros(n)
        for i in range(2, m_prime + 1):
            counts[2 * i - 1] += 1.0
            counts[2 * i] += 4.0
            counts[2 * i + 1] += 1.0
        inner = slice(3, 2 * m_prime + 2)
        w[inner] = third * counts[inner]
    return w


def pointwise_product(u: InteriorVector, v: InteriorVector) -> InteriorVector:
    if len(u) != len(v) or u.h != v.h:
        raise DimensionMismatch(
            f"pointwise product needs matching vectors, got lengths {len(u)}/{len(v)} "
            f"and h {u.h!r}/{v.h!r}"
        )
    return InteriorVector(u.values * v.values, u.h)


def l2_norm(v: InteriorVector) -> float:
    """Mesh-weighted l2 norm sqrt(sum_i h * v_i**2) over interior nodes."""
    return math.sqrt(v.h * float(np.sum(v.values * v.values)))


def inf_norm(v: InteriorVector) -> float:
    return float(np.max(np.abs(v.values)))


def star_norm(trace: np.ndarray, k: float) -> float:
    """Time-trace norm sqrt(sum_n k * z_n**2) over all stored levels."""
    trace = np.asarray(trace, dtype=float)
    if trace.ndim != 1:
        raise DimensionMismatch(f"trace must be one-dimensional, got shape {trace.shape}")
    k = float(k)
    if not (math.isfinite(k) and k > 0.0):
        raise InvalidParameter(f"k must be positive and finite, got {k!r}")
    return math.sqrt(k * float(np.sum(trace * trace)))
