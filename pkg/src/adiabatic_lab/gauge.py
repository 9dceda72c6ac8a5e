"""Static vector potentials and their path-dependent phase factors.

``exp(i e int_P A . dx)`` is evaluated by Gauss-Legendre quadrature on
each straight segment of a polyline.  Potentials provided:

* an infinitely thin solenoid along z with flux ``flux``;
* a Dirac monopole of strength ``g`` in the north gauge (string along -z)
  or south gauge (string along +z);
* a pure gauge ``A = grad chi``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from adiabatic_lab import tolerances as tol
from adiabatic_lab.errors import GridError, NumericalError, SingularPathError

_BIG = 1e12


@dataclass(frozen=True)
class PathPolyline:
    points: np.ndarray
    closed: bool = False

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 3 or pts.shape[0] < 2:
            raise ValueError(f"path needs at least two 3-vectors, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("path has non-finite points")
        if self.closed and not np.allclose(pts[0], pts[-1], rtol=0, atol=1e-12):
            raise ValueError("closed path must end where it starts")
        object.__setattr__(self, "points", pts)

    @property
    def start(self):
        return self.points[0]

    @property
    def end(self):
        return self.points[-1]

    def then(self, other: "PathPolyline") -> "PathPolyline":
        """Concatenate; ``other`` must start where this path ends."""
        if not np.allclose(self.end, other.start, rtol=0, atol=1e-12):
            raise ValueError("paths do not join")
        pts = np.vstack([self.points, other.points[1:]])
        return PathPolyline(pts, closed=bool(np.allclose(pts[0], pts[-1], rtol=0, atol=1e-12)))

    def reversed(self) -> "PathPolyline":
        return PathPolyline(self.points[::-1].copy(), closed=self.closed)


def circle(radius: float, n_segments: int, center=(0.0, 0.0, 0.0), turns: float = 1.0,
           start_angle: float = 0.0) -> PathPolyline:
    """Polygon inscribed in a horizontal circle, counter-clockwise seen from +z.

    ``turns`` may be negative (clockwise) or fractional (an arc).
    """
    ang = start_angle + 2 * np.pi * turns * np.linspace(0.0, 1.0, n_segments + 1)
    c = np.asarray(center, dtype=float)
    pts = np.column_stack([c[0] + radius * np.cos(ang), c[1] + radius * np.sin(ang), np.full(ang.size, c[2])])
    closed = float(turns).is_integer() and turns != 0
    if closed:
        pts[-1] = pts[0]
    return PathPolyline(pts, closed=closed)


def _segment_distance(p0, p1, q0, q1):
    """Smallest distance between segments p0-p1 and q0-q1, vectorised over p."""
    d1 = p1 - p0
    d2 = q1 - q0
    r = p0 - q0
    a = np.einsum("ij,ij->i", d1, d1)
    e = float(d2 @ d2)
    c = np.einsum("ij,ij->i", d1, r)
    if e == 0.0:
        s = np.clip(-c / np.where(a > 0, a, 1.0), 0.0, 1.0)
        return np.linalg.norm(p0 + s[:, None] * d1 - q0, axis=1)
    f = r @ d2
    b = d1 @ d2
    denom = a * e - b * b
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.where(denom > 1e-300 * np.maximum(a * e, 1.0), np.clip((b * f - c * e) / denom, 0.0, 1.0), 0.0)
    t = np.clip((b * s + f) / e, 0.0, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.where(a > 0, np.clip((b * t - c) / a, 0.0, 1.0), 0.0)
    diff = p0 + s[:, None] * d1 - (q0 + t[:, None] * d2)
    return np.linalg.norm(diff, axis=1)


@dataclass(frozen=True)
class VectorPotential:
    """Spatial gauge potential ``A(x)`` with charge coupling ``charge``.

    ``evaluate`` maps points ``(n, 3)`` to ``A`` at those points.  ``singular``
    lists the singular set as line segments ``(q0, q1)``; a point singularity
    is a zero-length segment.
    """

    kind: str
    evaluate: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    charge: float = 1.0
    singular: tuple = ()
    params: dict = field(default_factory=dict)

    def __call__(self, points) -> np.ndarray:
        return self.evaluate(np.atleast_2d(np.asarray(points, dtype=float)))

    def distance_to_singular(self, path: PathPolyline) -> float:
        if not self.singular:
            return float("inf")
        p0, p1 = path.points[:-1], path.points[1:]
        return float(min(np.min(_segment_distance(p0, p1, q0, q1)) for q0, q1 in self.singular))


def solenoid(flux: float, charge: float = 1.0, center=(0.0, 0.0)) -> VectorPotential:
    """Thin solenoid along z through ``center``: A = flux / (2 pi rho) phi_hat."""
    cx, cy = center

    def f(x):
        dx, dy = x[:, 0] - cx, x[:, 1] - cy
        rho2 = dx * dx + dy * dy
        k = flux / (2 * np.pi * rho2)
        return np.column_stack([-k * dy, k * dx, np.zeros_like(dx)])

    axis = (np.array([cx, cy, -_BIG]), np.array([cx, cy, _BIG]))
    return VectorPotential("solenoid", f, charge, (axis,), {"flux": flux, "center": (cx, cy)})


def monopole(g: float, charge: float = 1.0, gauge: str = "north") -> VectorPotential:
    """Dirac monopole at the origin.

    north: A = g (1 - cos t) / (r sin t) phi_hat, string along -z;
    south: A = -g (1 + cos t) / (r sin t) phi_hat, string along +z.
    """
    if gauge not in ("north", "south"):
        raise ValueError(f"gauge must be 'north' or 'south', got {gauge!r}")
    sign = 1.0 if gauge == "north" else -1.0

    def f(x):
        r = np.linalg.norm(x, axis=1)
        rho2 = x[:, 0] ** 2 + x[:, 1] ** 2
        # g (1 -/+ z/r) / rho along phi_hat, written with rho^2 to avoid atan2
        k = g * (sign - x[:, 2] / r) / rho2
        return np.column_stack([-k * x[:, 1], k * x[:, 0], np.zeros_like(r)])

    origin = np.zeros(3)
    string = (origin, np.array([0.0, 0.0, -sign * _BIG]))
    return VectorPotential("monopole", f, charge, (string, (origin, origin)), {"g": g, "gauge": gauge})


def pure_gauge(grad_chi: Callable[[np.ndarray], np.ndarray], charge: float = 1.0,
               chi: Optional[Callable[[np.ndarray], np.ndarray]] = None) -> VectorPotential:
    return VectorPotential("pure-gauge", grad_chi, charge, (), {"chi": chi})


def line_integral(A: VectorPotential, path: PathPolyline, order: int = tol.GAUSS_ORDER,
                  min_dist: float = tol.MIN_SINGULAR_DIST) -> float:
    """``int_path A . dx`` by per-segment Gauss-Legendre quadrature."""
    dist = A.distance_to_singular(path)
    if dist < min_dist:
        raise SingularPathError(f"path passes within {dist:.3e} of the singular set of {A.kind}")
    nodes, weights = np.polynomial.legendre.leggauss(order)
    t = 0.5 * (nodes + 1.0)
    w = 0.5 * weights
    p0, p1 = path.points[:-1], path.points[1:]
    d = p1 - p0
    pts = p0[:, None, :] + t[None, :, None] * d[:, None, :]
    a = A(pts.reshape(-1, 3)).reshape(pts.shape)
    val = float(np.einsum("q,sqi,si->", w, a, d))
    if not np.isfinite(val):
        raise NumericalError("line integral is not finite")
    return val


def phase_factor_line_integral(A: VectorPotential, path: PathPolyline, **kw) -> complex:
    """Non-integrable phase factor ``exp(i e int A . dx)`` (unit modulus by construction)."""
    return complex(np.exp(1j * A.charge * line_integral(A, path, **kw)))


@dataclass(frozen=True)
class MonopoleResult:
    flux: float
    quantized: bool
    north_circulation: float
    south_circulation: float
    transition_factor: complex

    def to_dict(self) -> dict:
        return {
            "flux": self.flux,
            "quantized": self.quantized,
            "north_circulation": self.north_circulation,
            "south_circulation": self.south_circulation,
            "transition_factor_re": self.transition_factor.real,
            "transition_factor_im": self.transition_factor.imag,
        }


def monopole_quantization_check(g: float, e: float, n_patch_grid: int) -> MonopoleResult:
    """Total flux of a monopole from two gauge patches glued at the equator.

    The north cap is covered by the north-gauge potential, the south cap by
    the south-gauge one; each cap's flux is the circulation of its potential
    around the cap boundary with the induced orientation.  The two
    potentials differ by the gradient of ``2 g phi``, so the wave function
    transition factor ``exp(i e 4 pi g)`` is single-valued exactly when
    ``2 e g`` is an integer.
    """
    if n_patch_grid < tol.MIN_PATCH_GRID:
        raise GridError(f"n_patch_grid must be >= {tol.MIN_PATCH_GRID}, got {n_patch_grid}")
    equator = circle(1.0, n_patch_grid)
    north = line_integral(monopole(g, e, "north"), equator)
    south = line_integral(monopole(g, e, "south"), equator.reversed())
    flux = north + south
    expected = 4 * np.pi * g
    if abs(flux - expected) > tol.MONOPOLE_FLUX_RTOL * abs(expected):
        raise NumericalError(f"two-patch flux {flux!r} misses 4 pi g = {expected!r}")
    two_eg = 2 * e * g
    quantized = abs(two_eg - round(two_eg)) <= tol.QUANTIZATION_TOL
    diff = line_integral(monopole(g, e, "north"), equator) - line_integral(monopole(g, e, "south"), equator)
    return MonopoleResult(float(flux), bool(quantized), north, south, complex(np.exp(1j * e * diff)))
