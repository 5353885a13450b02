"""Level-set surfaces with horizontal gradients and their intrinsic graphs.

A surface is the zero set (or a general level set) of a scalar function on
the group with nonvanishing horizontal gradient.  Over a window of the
vertical subgroup N the surface is the image of a graph map
Phi2(n) = n * (phi2hat(n) * b1): for each n the scalar graph coordinate
phi2hat(n) is the unique root of a strictly monotone one-variable function,
found here by bracketed bisection with a Newton polish.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import MarginViolated, NoSignChange
from .hgroup import (
    Frame,
    Point,
    VerticalCoords,
    embed_N,
    horizontal_derivative,
    mul,
)

__all__ = [
    "PolySurface",
    "SurfaceHandle",
    "GraphPatch",
    "horiz_grad_poly",
    "y_derivatives",
    "solve_graph_scalar",
    "graph_map",
]

MAX_TOTAL_DEGREE = 16


# ---------------------------------------------------------------------------
# Polynomial surfaces
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PolySurface:
    """Trivariate polynomial p(x11, x12, t) = sum c_ijk x11^i x12^j t^k.

    coefficients maps exponent triples (i, j, k) to reals; zero entries are
    dropped.  ``level`` is the level-set value the surface refers to.
    """

    coefficients: dict[tuple[int, int, int], float] = field(default_factory=dict)
    level: float = 0.0

    def __post_init__(self):
        cleaned = {}
        for key, c in self.coefficients.items():
            i, j, k = key
            if i < 0 or j < 0 or k < 0:
                raise ValueError(f"exponents must be nonnegative, got {key!r}")
            if i + j + k > MAX_TOTAL_DEGREE:
                raise ValueError(
                    f"total degree {i + j + k} exceeds bound {MAX_TOTAL_DEGREE}"
                )
            if c != 0.0:
                cleaned[(int(i), int(j), int(k))] = float(c)
        object.__setattr__(self, "coefficients", cleaned)

    @classmethod
    def from_quadruples(cls, quads, level: float = 0.0) -> "PolySurface":
        """Build from [i, j, k, coefficient] rows, summing repeated exponents."""
        coeffs: dict[tuple[int, int, int], float] = {}
        for row in quads:
            if len(row) != 4:
                raise ValueError(f"expected [i, j, k, coeff] quadruple, got {row!r}")
            i, j, k, c = row
            key = (int(i), int(j), int(k))
            coeffs[key] = coeffs.get(key, 0.0) + float(c)
        return cls(coeffs, level=level)

    def __call__(self, x: Point) -> float:
        return self.eval_coords(x.x11, x.x12, x.t)

    def eval_coords(self, x11, x12, t):
        """Evaluate at coordinates; works elementwise on numpy arrays."""
        if _any_array(x11, x12, t):
            acc = np.zeros(np.broadcast(np.asarray(x11), np.asarray(x12), np.asarray(t)).shape)
        else:
            acc = 0.0
        for (i, j, k), c in self.coefficients.items():
            term = c
            if i:
                term = term * x11**i
            if j:
                term = term * x12**j
            if k:
                term = term * t**k
            acc = acc + term
        return acc

    def partial(self, var: int) -> "PolySurface":
        """Coordinate partial derivative; var is 0 for x11, 1 for x12, 2 for t."""
        out: dict[tuple[int, int, int], float] = {}
        for key, c in self.coefficients.items():
            e = key[var]
            if e == 0:
                continue
            new = list(key)
            new[var] = e - 1
            k = tuple(new)
            out[k] = out.get(k, 0.0) + c * e
        return PolySurface(out, level=self.level)

    def shift(self, var: int) -> "PolySurface":
        """Multiply by the coordinate variable ``var`` (same indexing as partial)."""
        out = {}
        for key, c in self.coefficients.items():
            new = list(key)
            new[var] += 1
            out[tuple(new)] = c
        return PolySurface(out, level=self.level)

    def __add__(self, other: "PolySurface") -> "PolySurface":
        out = dict(self.coefficients)
        for key, c in other.coefficients.items():
            out[key] = out.get(key, 0.0) + c
        return PolySurface(out, level=self.level)

    def scaled(self, a: float) -> "PolySurface":
        return PolySurface({k: a * c for k, c in self.coefficients.items()}, level=self.level)

    def max_euclidean_gradient(self, box) -> float:
        """Coarse bound for |grad p| (all three coordinate partials) over a box."""
        corners = list(itertools.product(*box))
        parts = [self.partial(v) for v in range(3)]
        best = 0.0
        for x11, x12, t in corners:
            g = math.sqrt(sum(p.eval_coords(x11, x12, t) ** 2 for p in parts))
            best = max(best, g)
        return best


def _any_array(*xs) -> bool:
    return any(isinstance(x, np.ndarray) for x in xs)


def horiz_grad_poly(p: PolySurface) -> tuple[PolySurface, PolySurface]:
    """Exact horizontal gradient (X1 p, X2 p) as polynomials.

    The left-invariant horizontal fields act on coordinates as
    X1 = d/dx11 - x12 * d/dt and X2 = d/dx12 + x11 * d/dt; both keep the
    polynomial ring closed.
    """
    dt = p.partial(2)
    x1p = p.partial(0) + dt.shift(1).scaled(-1.0)
    x2p = p.partial(1) + dt.shift(0)
    return x1p, x2p


# ---------------------------------------------------------------------------
# Surface handles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SurfaceHandle:
    """A surface as an evaluator plus its horizontal gradient (X1 f, X2 f)."""

    eval: Callable[[Point], float]
    grad_h: Callable[[Point], tuple[float, float]]
    provenance: str = "user-supplied"
    poly: PolySurface | None = None

    @classmethod
    def from_polynomial(cls, p: PolySurface, validate: bool = True) -> "SurfaceHandle":
        x1p, x2p = horiz_grad_poly(p)

        def grad(x: Point) -> tuple[float, float]:
            return (x1p(x), x2p(x))

        handle = cls(eval=p, grad_h=grad, provenance="polynomial-symbolic", poly=p)
        if validate:
            check_gradient(handle)
        return handle

    @classmethod
    def from_callable(cls, f: Callable[[Point], float], grad_h=None,
                      fd_step: float = 1e-6) -> "SurfaceHandle":
        if grad_h is not None:
            return cls(eval=f, grad_h=grad_h, provenance="user-supplied")

        def grad(x: Point) -> tuple[float, float]:
            return (
                horizontal_derivative(f, x, (1.0, 0.0), fd_step),
                horizontal_derivative(f, x, (0.0, 1.0), fd_step),
            )

        return cls(eval=f, grad_h=grad, provenance="finite-difference")

    def translated(self, p: Point) -> "SurfaceHandle":
        """The handle of x -> f(p * x); gradients translate along for free."""
        def ev(x: Point) -> float:
            return self.eval(mul(p, x))

        def grad(x: Point) -> tuple[float, float]:
            return self.grad_h(mul(p, x))

        return SurfaceHandle(eval=ev, grad_h=grad, provenance=self.provenance)


_CHECK_POINTS = [
    Point(0.0, 0.0, 0.0),
    Point(0.3, -0.2, 0.1),
    Point(-0.5, 0.4, -0.3),
    Point(1.1, 0.7, 0.9),
    Point(-0.9, -1.3, 0.6),
]


def check_gradient(handle: SurfaceHandle, points=None, h: float = 1e-5,
                   tol: float = 1e-6) -> float:
    """Cross-check grad_h against central differences along group curves.

    Returns the max deviation over the sample; raises if it exceeds tol.
    Deviation scales like h**2 for smooth surfaces, so the default step
    keeps well under the tolerance for moderate-degree polynomials.
    """
    worst = 0.0
    for x in points if points is not None else _CHECK_POINTS:
        g1, g2 = handle.grad_h(x)
        d1 = horizontal_derivative(handle.eval, x, (1.0, 0.0), h)
        d2 = horizontal_derivative(handle.eval, x, (0.0, 1.0), h)
        scale = 1.0 + abs(g1) + abs(g2)
        worst = max(worst, abs(g1 - d1) / scale, abs(g2 - d2) / scale)
    if worst > tol:
        raise ValueError(
            f"horizontal gradient fails finite-difference cross-check: {worst:.3e} > {tol:.3e}"
        )
    return worst


def y_derivatives(f: SurfaceHandle, x: Point, fr: Frame) -> tuple[float, float]:
    """Derivatives (Y1 f, Y2 f) along the frame directions b1, b2."""
    g1, g2 = f.grad_h(x)
    return (
        g1 * fr.b1[0] + g2 * fr.b1[1],
        g1 * fr.b2[0] + g2 * fr.b2[1],
    )


# ---------------------------------------------------------------------------
# Intrinsic graph patches
# ---------------------------------------------------------------------------

class GraphPatch:
    """A window of the vertical subgroup over which f2 admits an intrinsic graph.

    Construction certifies, on a sample grid of window x bracket, that the
    graph direction derivative Y1 f2 keeps one sign and stays above
    ``margin`` in absolute value; that makes the per-point root problem
    strictly monotone and bisection safe.

    Parameters
    ----------
    frame    : Frame with b1 the graph direction.
    f2       : SurfaceHandle of the defining function.
    base_n   : VerticalCoords of the base point's N-component.
    window   : ((eta_min, eta_max), (tau_min, tau_max)) in N-coordinates.
    bracket  : (s_min, s_max) allowed range of the graph coordinate.
    level    : level-set value (f2 = level on the graph).
    margin   : required lower bound for |Y1 f2| on the sampled region.
    grid_n   : sample density per axis for the margin certificate.
    """

    def __init__(self, frame: Frame, f2: SurfaceHandle,
                 base_n: VerticalCoords = VerticalCoords(0.0, 0.0),
                 window=((-0.5, 0.5), (-0.5, 0.5)),
                 bracket=(-2.0, 2.0),
                 level: float = 0.0,
                 margin: float = 1e-6,
                 grid_n: int = 7):
        if margin <= 0.0:
            raise ValueError("margin must be positive")
        self.frame = frame
        self.f2 = f2
        self.base_n = base_n
        self.window = (tuple(window[0]), tuple(window[1]))
        self.bracket = (float(bracket[0]), float(bracket[1]))
        self.level = float(level)
        self.margin = float(margin)
        self.grid_n = int(grid_n)
        self._certify_margin()
        self._s_base = self.solve_scalar(base_n)

    # -- margin certificate --------------------------------------------------

    def _y1f2_at(self, n: VerticalCoords, s: float) -> float:
        x = self._graph_line_point(n, s)
        g1, g2 = self.f2.grad_h(x)
        return g1 * self.frame.b1[0] + g2 * self.frame.b1[1]

    def _certify_margin(self):
        (emin, emax), (tmin, tmax) = self.window
        smin, smax = self.bracket
        etas = np.linspace(emin, emax, self.grid_n)
        taus = np.linspace(tmin, tmax, self.grid_n)
        ss = np.linspace(smin, smax, max(self.grid_n, 3))
        sign = 0.0
        worst = math.inf
        for eta in etas:
            for tau in taus:
                n = VerticalCoords(float(eta), float(tau))
                for s in ss:
                    y1 = self._y1f2_at(n, float(s))
                    worst = min(worst, abs(y1))
                    if abs(y1) < self.margin:
                        raise MarginViolated(
                            f"|Y1 f2| = {abs(y1):.3e} < margin {self.margin:.3e} "
                            f"at n=({eta:.3g},{tau:.3g}), s={s:.3g}"
                        )
                    if sign == 0.0:
                        sign = math.copysign(1.0, y1)
                    elif math.copysign(1.0, y1) != sign:
                        raise MarginViolated(
                            "Y1 f2 changes sign on the sampled window"
                        )
        self.y1_sign = sign
        self.y1_min_sampled = worst

    # -- graph solves ----------------------------------------------------------

    def _graph_line_point(self, n: VerticalCoords, s: float) -> Point:
        b1 = self.frame.b1
        return mul(embed_N(n, self.frame), Point(s * b1[0], s * b1[1], 0.0))

    def _g(self, n: VerticalCoords, s: float) -> float:
        return self.f2.eval(self._graph_line_point(n, s)) - self.level

    def contains(self, n: VerticalCoords, slack: float = 1e-9) -> bool:
        (emin, emax), (tmin, tmax) = self.window
        return (emin - slack <= n.eta <= emax + slack
                and tmin - slack <= n.tau <= tmax + slack)

    def solve_scalar(self, n: VerticalCoords, hint: float | None = None,
                     gtol: float = 1e-13) -> float:
        """The graph coordinate phi2hat(n): unique root of s -> f2(n * s b1) - level."""
        if not self.contains(n):
            raise ValueError(f"n = ({n.eta!r}, {n.tau!r}) outside the patch window")

        if hint is not None:
            s = self._newton(n, hint, gtol)
            if s is not None:
                return s

        s0 = hint if hint is not None else getattr(self, "_s_base", 0.0)
        lo, hi = self._expand_bracket(n, s0)
        s = self._bisect(n, lo, hi, gtol)
        polished = self._newton(n, s, gtol)
        return polished if polished is not None else s

    def _newton(self, n: VerticalCoords, s: float, gtol: float) -> float | None:
        smin, smax = self.bracket
        for _ in range(12):
            g = self._g(n, s)
            if abs(g) <= gtol:
                return s
            y1 = self._y1f2_at(n, s)
            if abs(y1) < self.margin:
                return None
            s_next = s - g / y1
            if not (smin - 1e-9 <= s_next <= smax + 1e-9) or not math.isfinite(s_next):
                return None
            s = s_next
        return s if abs(self._g(n, s)) <= 1e-10 else None

    def _expand_bracket(self, n: VerticalCoords, s0: float) -> tuple[float, float]:
        smin, smax = self.bracket
        s0 = min(max(s0, smin), smax)
        w = max(1e-3, 0.0625 * (smax - smin))
        g0 = self._g(n, s0)
        if g0 == 0.0:
            return s0, s0
        while True:
            lo = max(smin, s0 - w)
            hi = min(smax, s0 + w)
            glo = self._g(n, lo)
            ghi = self._g(n, hi)
            if glo == 0.0:
                return lo, lo
            if ghi == 0.0:
                return hi, hi
            if glo * g0 < 0.0:
                return lo, s0
            if ghi * g0 < 0.0:
                return s0, hi
            if lo == smin and hi == smax:
                if glo * ghi < 0.0:
                    return lo, hi
                raise NoSignChange(
                    f"no sign change for the graph equation over bracket "
                    f"[{smin}, {smax}] at n=({n.eta:.3g},{n.tau:.3g})"
                )
            w *= 2.0

    def _bisect(self, n: VerticalCoords, lo: float, hi: float, gtol: float) -> float:
        if lo == hi:
            return lo
        for s_end in (lo, hi):
            if abs(self._y1f2_at(n, s_end)) < self.margin:
                raise MarginViolated(
                    f"|Y1 f2| below margin {self.margin:.3e} inside the solve bracket"
                )
        glo = self._g(n, lo)
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            gm = self._g(n, mid)
            if abs(gm) <= gtol or hi - lo < 1e-15:
                return mid
            if glo * gm < 0.0:
                hi = mid
            else:
                lo, glo = mid, gm
        return 0.5 * (lo + hi)

    def graph_point(self, n: VerticalCoords, hint: float | None = None) -> Point:
        """Phi2(n) = n * (phi2hat(n) * b1); satisfies f2 = level to solver tolerance."""
        s = self.solve_scalar(n, hint=hint)
        return self._graph_line_point(n, s)

    @property
    def base_coordinate(self) -> float:
        return self._s_base


def solve_graph_scalar(patch: GraphPatch, n: VerticalCoords) -> float:
    """Scalar graph coordinate phi2hat(n) over the patch."""
    return patch.solve_scalar(n)


def graph_map(patch: GraphPatch, n: VerticalCoords) -> Point:
    """Graph point Phi2(n) over the patch."""
    return patch.graph_point(n)
