"""Distinguished tensors (d-tensors) on J1(R, M).

Each index of a d-tensor is one of six slot kinds. Time slots have extent 1
and are kept as real axes so the number of axes equals the number of indices.
The paired velocity index ``(j)(1)`` transforms as a single index with factor
``(dx~/dx)(dt/dt~)``.
"""

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError
from .jet import JetPoint


class IndexSlot(enum.Enum):
    TIME_UP = "time-up"
    TIME_DOWN = "time-down"
    SPACE_UP = "space-up"
    SPACE_DOWN = "space-down"
    VEL_UP = "vel-up"
    VEL_DOWN = "vel-down"

    @property
    def is_time(self):
        return self in (IndexSlot.TIME_UP, IndexSlot.TIME_DOWN)

    @property
    def is_up(self):
        return self in (IndexSlot.TIME_UP, IndexSlot.SPACE_UP, IndexSlot.VEL_UP)


@dataclass(frozen=True, eq=False)
class DTensorValue:
    """Components of a d-tensor at one base point."""

    signature: tuple
    components: np.ndarray
    base: JetPoint

    def __post_init__(self):
        sig = tuple(IndexSlot(s) for s in self.signature)
        comps = np.array(self.components, dtype=float)
        n = self.base.n
        expected = tuple(1 if s.is_time else n for s in sig)
        if comps.shape != expected:
            raise DimensionError(f"components of shape {comps.shape} do not match signature extents {expected}")
        object.__setattr__(self, "signature", sig)
        object.__setattr__(self, "components", comps)


class DTensorField:
    """A d-tensor field: ``evaluator(p)`` returns components (array) at ``p``."""

    def __init__(self, signature, evaluator):
        self.signature = tuple(IndexSlot(s) for s in signature)
        self.evaluator = evaluator

    def __call__(self, p):
        out = self.evaluator(p)
        if isinstance(out, DTensorValue):
            if out.signature != self.signature:
                raise DimensionError("evaluator returned a value with a different signature")
            return out
        return DTensorValue(self.signature, out, p)


def slot_factor(slot, cj):
    """Matrix ``F`` with ``D~[..p..] = F[p, i] D[..i..]`` for one slot."""
    if slot is IndexSlot.TIME_UP:
        return np.array([[cj.dtt]])
    if slot is IndexSlot.TIME_DOWN:
        return np.array([[cj.s]])
    if slot is IndexSlot.SPACE_UP:
        return cj.J
    if slot is IndexSlot.SPACE_DOWN:
        return cj.K.T
    if slot is IndexSlot.VEL_UP:
        return cj.J * cj.s
    return cj.K.T * cj.dtt


def _contract_axes(comps, factors):
    out = comps
    for axis, F in enumerate(factors):
        out = np.moveaxis(np.tensordot(F, out, axes=([1], [axis])), 0, axis)
    return out


def transform_dtensor(value, change):
    """Components of ``value`` in the tilde chart of ``change`` (at the prolonged point)."""
    cj = change.at(value.base)
    factors = [slot_factor(s, cj) for s in value.signature]
    return DTensorValue(value.signature, _contract_axes(value.components, factors), cj.image)


def liouville(p):
    """Canonical Liouville d-tensor ``C^(i)_(1) = y^i``."""
    return DTensorValue((IndexSlot.VEL_UP,), p.y.copy(), p)


def h_normalization(h, p):
    """``J^(i)_(1)1j = h11 delta^i_j``."""
    h11, _ = h.jet(p.t)
    comps = (h11 * np.eye(p.n))[:, None, :]
    return DTensorValue((IndexSlot.VEL_UP, IndexSlot.TIME_DOWN, IndexSlot.SPACE_DOWN), comps, p)


def h_liouville(h, p):
    """``L^(i)_(1)11 = h11 y^i``, i.e. the Liouville d-tensor times ``h``."""
    h11, _ = h.jet(p.t)
    comps = (h11 * p.y)[:, None, None]
    return DTensorValue((IndexSlot.VEL_UP, IndexSlot.TIME_DOWN, IndexSlot.TIME_DOWN), comps, p)


def tensor_product(a, b):
    """Outer product of two d-tensor values at the same base point."""
    if a.base != b.base:
        raise ValueError("tensor product needs values at the same point")
    return DTensorValue(a.signature + b.signature,
                        np.multiply.outer(a.components, b.components), a.base)


def classical_contraction(value, frame, coframe, args):
    """Evaluate the classical tensor built from ``value`` in an adapted basis.

    ``frame`` and ``coframe`` are the adapted frame/coframe matrices of a
    nonlinear connection at ``value.base`` (rows in the natural basis). Up
    slots consume a covector and down slots a vector, both given by natural
    components; the result is a chart-independent scalar.
    """
    n = value.base.n
    blocks = {"t": slice(0, 1), "x": slice(1, 1 + n), "y": slice(1 + n, 1 + 2 * n)}
    kind = {IndexSlot.TIME_UP: "t", IndexSlot.TIME_DOWN: "t", IndexSlot.SPACE_UP: "x",
            IndexSlot.SPACE_DOWN: "x", IndexSlot.VEL_UP: "y", IndexSlot.VEL_DOWN: "y"}
    if len(args) != len(value.signature):
        raise DimensionError("one argument per slot is required")
    out = value.components
    for slot, arg in zip(value.signature, args):
        rows = (frame if slot.is_up else coframe)[blocks[kind[slot]]]
        out = np.tensordot(rows @ np.asarray(arg, dtype=float), out, axes=([0], [0]))
    return float(out)
