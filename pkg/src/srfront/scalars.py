"""Scalar-field helpers shared by the metric and expression machinery.

Chart coefficients are plain callables of (x1, x2).  When a chart is marked
complex-capable, the same callables must accept complex arguments, which lets
us differentiate them by the complex-step rule with no subtractive
cancellation.  Otherwise we fall back to central differences with a
cube-root-of-epsilon step, and downstream tolerances relax accordingly.
"""

from __future__ import annotations

import cmath
import math

EPS = 2.220446049250313e-16
FD_STEP = EPS ** (1.0 / 3.0)
# Imaginary step for complex-step derivatives.  Large enough that products of
# several perturbed factors stay far above the denormal range.
CSTEP = 1e-100


def _dispatch(freal, fcplx):
    def f(z):
        if isinstance(z, complex):
            return fcplx(z)
        return freal(z)

    return f


sin = _dispatch(math.sin, cmath.sin)
cos = _dispatch(math.cos, cmath.cos)
tan = _dispatch(math.tan, cmath.tan)
sinh = _dispatch(math.sinh, cmath.sinh)
cosh = _dispatch(math.cosh, cmath.cosh)
tanh = _dispatch(math.tanh, cmath.tanh)
exp = _dispatch(math.exp, cmath.exp)
sqrt = _dispatch(math.sqrt, cmath.sqrt)

FUNCTIONS = {
    "sin": sin,
    "cos": cos,
    "tan": tan,
    "sinh": sinh,
    "cosh": cosh,
    "tanh": tanh,
    "exp": exp,
    "sqrt": sqrt,
}


def grad2(f, x1, x2, complex_ok):
    """Both first partials of a scalar field f(x1, x2)."""
    if complex_ok:
        h = CSTEP
        d1 = f(complex(x1, h), x2).imag / h
        d2 = f(x1, complex(x2, h)).imag / h
        return d1, d2
    h1 = FD_STEP * max(1.0, abs(x1))
    h2 = FD_STEP * max(1.0, abs(x2))
    d1 = (f(x1 + h1, x2) - f(x1 - h1, x2)) / (2.0 * h1)
    d2 = (f(x1, x2 + h2) - f(x1, x2 - h2)) / (2.0 * h2)
    return d1, d2


def partial1(f, x1, x2, complex_ok):
    """First partial with respect to x1 only."""
    if complex_ok:
        return f(complex(x1, CSTEP), x2).imag / CSTEP
    h = FD_STEP * max(1.0, abs(x1))
    return (f(x1 + h, x2) - f(x1 - h, x2)) / (2.0 * h)
