"""Registry of test functions f used in expectations E f(.).

Each registry entry has an integer code and up to three real parameters so the
compiled lattice kernels can evaluate it without Python callbacks.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from ._accel import njit
from .errors import DomainError

ONE, COS, SIN, TANH, INDICATOR_SMOOTH, XSQ = range(6)

_NAMES = {
    "one": ONE,
    "cos": COS,
    "sin": SIN,
    "tanh": TANH,
    "indicator_smooth": INDICATOR_SMOOTH,
    "xsq": XSQ,
}
_ODD = {SIN, TANH}


@njit(cache=True)
def eval_code(code, p0, p1, p2, x):
    """Scalar evaluation used inside the lattice kernels."""
    if code == ONE:
        return 1.0
    if code == COS:
        return math.cos(x)
    if code == SIN:
        return math.sin(x)
    if code == TANH:
        return math.tanh(x)
    if code == INDICATOR_SMOOTH:
        # 1 on [a, b], linear ramps of width w on each side
        if x < p0 - p2 or x > p1 + p2:
            return 0.0
        if x < p0:
            return (x - (p0 - p2)) / p2
        if x > p1:
            return ((p1 + p2) - x) / p2
        return 1.0
    return x * x


@dataclass(frozen=True)
class TestFunction:
    """A registry function with its parameters.

    ``sup_norm`` is ``inf`` for ``xsq``; such functions are accepted only
    when the caller acknowledges unboundedness.
    """

    __test__ = False  # not a pytest class

    name: str
    code: int
    params: tuple = (0.0, 0.0, 0.0)

    @property
    def sup_norm(self) -> float:
        if self.code == XSQ:
            return math.inf
        return 1.0

    @property
    def bounded(self) -> bool:
        return self.code != XSQ

    @property
    def odd(self) -> bool:
        return self.code in _ODD

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        c = self.code
        if c == ONE:
            return np.ones_like(x)
        if c == COS:
            return np.cos(x)
        if c == SIN:
            return np.sin(x)
        if c == TANH:
            return np.tanh(x)
        if c == INDICATOR_SMOOTH:
            a, b, w = self.params
            up = np.clip((x - (a - w)) / w, 0.0, 1.0)
            down = np.clip(((b + w) - x) / w, 0.0, 1.0)
            return np.minimum(up, down)
        return x * x

    def spec(self) -> str:
        if self.code == INDICATOR_SMOOTH:
            return "indicator_smooth({:.17g},{:.17g},{:.17g})".format(*self.params)
        return self.name


_CALL = re.compile(r"^\s*([a-z_]+)\s*(?:\((.*)\))?\s*$")


def get_function(spec, allow_unbounded: bool = False) -> TestFunction:
    """Resolve a registry name such as ``cos`` or ``indicator_smooth(-1,1,0.1)``."""
    if isinstance(spec, TestFunction):
        fn = spec
    else:
        match = _CALL.match(str(spec))
        if not match or match.group(1) not in _NAMES:
            raise DomainError(f"unknown function {spec!r}; choose from {sorted(_NAMES)}")
        name, args = match.group(1), match.group(2)
        code = _NAMES[name]
        if code == INDICATOR_SMOOTH:
            try:
                a, b, w = (float(v) for v in (args or "").split(","))
            except ValueError:
                raise DomainError("indicator_smooth takes three arguments (a,b,w)") from None
            if not (a <= b and w > 0):
                raise DomainError("indicator_smooth requires a <= b and w > 0")
            fn = TestFunction(name, code, (a, b, w))
        else:
            if args not in (None, ""):
                raise DomainError(f"{name} takes no arguments")
            fn = TestFunction(name, code)
    if not fn.bounded and not allow_unbounded:
        raise DomainError(f"{fn.name} is unbounded; pass allow_unbounded to use it")
    return fn


def names():
    return sorted(_NAMES)
