"""Exact planar geometry of characteristic vectors.

A counter value n is encoded as the vector sigma^n(kappa); tau undoes one
sigma step.  Everything here is exact rational arithmetic on ``Fraction``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Union

from .errors import CapExceeded, ConstantsError, DomainError

RatLike = Union[Fraction, int, str]


def parse_rat(value: RatLike) -> Fraction:
    """Read "p/q", a decimal such as "0.06", an int or a Fraction, exactly."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ValueError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        try:
            return Fraction(text)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"not a rational: {value!r}") from exc
    raise TypeError(f"cannot read {type(value).__name__} as a rational")


def format_rat(x: Fraction) -> str:
    """Canonical "num/den" text (integers print without a denominator)."""
    return str(Fraction(x))


def exact_sqrt(x: Fraction) -> Fraction | None:
    """Rational square root of x if it has one, else None."""
    if x < 0:
        return None
    n, d = x.numerator, x.denominator
    rn, rd = math.isqrt(n), math.isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


@dataclass(frozen=True)
class Vec2:
    x1: Fraction
    x2: Fraction

    def __post_init__(self):
        object.__setattr__(self, "x1", parse_rat(self.x1))
        object.__setattr__(self, "x2", parse_rat(self.x2))

    def __add__(self, other: Vec2) -> Vec2:
        return Vec2(self.x1 + other.x1, self.x2 + other.x2)

    def __sub__(self, other: Vec2) -> Vec2:
        return Vec2(self.x1 - other.x1, self.x2 - other.x2)

    def scale(self, k: Fraction) -> Vec2:
        return Vec2(k * self.x1, k * self.x2)

    def dot(self, other: Vec2) -> Fraction:
        return self.x1 * other.x1 + self.x2 * other.x2

    def __iter__(self):
        yield self.x1
        yield self.x2

    def __str__(self) -> str:
        return f"({format_rat(self.x1)}, {format_rat(self.x2)})"


def convex(lam: Fraction, x: Vec2, y: Vec2) -> Vec2:
    """lam*x + (1-lam)*y."""
    return x.scale(lam) + y.scale(1 - lam)


@dataclass(frozen=True)
class GeometryConstants:
    """q, kappa and gamma together with the exact value of sqrt(4q-3).

    Construction validates every constraint the witness builders rely on.
    """

    q: Fraction
    kappa: Vec2
    gamma: Fraction
    sqrt_disc: Fraction | None = None

    def __post_init__(self):
        q = parse_rat(self.q)
        gamma = parse_rat(self.gamma)
        kappa = self.kappa if isinstance(self.kappa, Vec2) else Vec2(*self.kappa)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "kappa", kappa)
        if not (Fraction(3, 4) < q < 1):
            raise ConstantsError("q out of (3/4,1)")
        root = exact_sqrt(4 * q - 3)
        if root is None:
            raise ConstantsError("4q-3 has no rational square root")
        if self.sqrt_disc is not None and parse_rat(self.sqrt_disc) != root:
            raise ConstantsError("sqrt_disc^2 != 4q-3")
        object.__setattr__(self, "sqrt_disc", root)
        k1, k2 = kappa.x1, kappa.x2
        if not (self.iq_lower < k1 < self.iq_upper):
            raise ConstantsError("kappa_1 outside I_q")
        if not k2 > 0:
            raise ConstantsError("kappa_2 must be positive")
        if not k1 + k2 < q - Fraction(1, 2):
            raise ConstantsError("kappa_1 + kappa_2 must be below q - 1/2")
        if not (1 - q) * k2 < gamma:
            raise ConstantsError("gamma must exceed (1-q)*kappa_2")
        if not gamma < self.gamma_upper:
            raise ConstantsError("gamma must be below 3/4 - 5q/4 + q^2/2")

    @property
    def iq_lower(self) -> Fraction:
        return (1 - self.sqrt_disc) / 2

    @property
    def iq_upper(self) -> Fraction:
        return (1 + self.sqrt_disc) / 2

    @property
    def gamma_upper(self) -> Fraction:
        q = self.q
        return Fraction(3, 4) - Fraction(5, 4) * q + q * q / 2

    def to_json(self) -> dict:
        return {
            "q": format_rat(self.q),
            "sqrt_disc": format_rat(self.sqrt_disc),
            "kappa": [format_rat(self.kappa.x1), format_rat(self.kappa.x2)],
            "gamma": format_rat(self.gamma),
        }

    @classmethod
    def from_json(cls, data: dict) -> GeometryConstants:
        k1, k2 = data["kappa"]
        return cls(
            q=parse_rat(data["q"]),
            kappa=Vec2(parse_rat(k1), parse_rat(k2)),
            gamma=parse_rat(data["gamma"]),
            sqrt_disc=parse_rat(data["sqrt_disc"]) if "sqrt_disc" in data else None,
        )


def default_constants() -> GeometryConstants:
    return GeometryConstants(
        q=Fraction(13, 16),
        kappa=Vec2(Fraction(17, 64), Fraction(1, 32)),
        gamma=Fraction(3, 50),
    )


def in_W(c: GeometryConstants, v: Vec2) -> bool:
    return c.iq_lower < v.x1 < c.iq_upper and v.x2 >= 0


def _require_W(c: GeometryConstants, v: Vec2) -> None:
    if not in_W(c, v):
        raise DomainError(f"{v} is not in W")


def tau(c: GeometryConstants, v: Vec2) -> Vec2:
    _require_W(c, v)
    return Vec2((c.q - 1 + v.x1) / v.x1, v.x2 / v.x1)


def sigma(c: GeometryConstants, v: Vec2) -> Vec2:
    _require_W(c, v)
    d = 1 - v.x1
    return Vec2((1 - c.q) / d, v.x2 * (1 - c.q) / d)


def iterate(c: GeometryConstants, f: Callable[[GeometryConstants, Vec2], Vec2] | str,
            v: Vec2, n: int) -> Vec2:
    """f^n(v) for f in {tau, sigma} (also accepted by name)."""
    if isinstance(f, str):
        f = {"tau": tau, "sigma": sigma}[f]
    if n < 0:
        raise ValueError("n must be non-negative")
    for _ in range(n):
        v = f(c, v)
        _require_W(c, v)
    return v


@lru_cache(maxsize=None)
def _orbit(c: GeometryConstants, which: str, n: int) -> tuple[Vec2, ...]:
    f = tau if which == "tau" else sigma
    pts = [c.kappa]
    for _ in range(n):
        pts.append(f(c, pts[-1]))
    return tuple(pts)


def sigma_orbit(c: GeometryConstants, n: int) -> tuple[Vec2, ...]:
    """(kappa, sigma(kappa), ..., sigma^n(kappa)), cached."""
    return _orbit(c, "sigma", n)


def tau_orbit(c: GeometryConstants, n: int) -> tuple[Vec2, ...]:
    return _orbit(c, "tau", n)


def sigma_n(c: GeometryConstants, n: int) -> Vec2:
    """sigma^n(kappa): the encoding of counter value n."""
    return sigma_orbit(c, n)[n]


def slope(v: Vec2, u: Vec2) -> Fraction:
    if v.x1 == u.x1:
        raise DomainError("vertical segment has no slope")
    return (u.x2 - v.x2) / (u.x1 - v.x1)


def segment_contains(c: GeometryConstants, u: Vec2, w: Vec2) -> bool:
    """w on L(u): the segment from u (included) to tau(u) (excluded)."""
    t = tau(c, u)
    lam = (w.x1 - t.x1) / (u.x1 - t.x1)  # u.x1 < t.x1 always
    if not (0 < lam <= 1):
        return False
    return w.x2 - t.x2 == lam * (u.x2 - t.x2)


def halfspace_contains(c: GeometryConstants, u: Vec2, w: Vec2) -> bool:
    """w in H(u), the closed half-plane above the line through u and tau(u)."""
    t = tau(c, u)
    normal = Vec2(t.x2 - u.x2, u.x1 - t.x1)
    return normal.dot(w - u) <= 0


def area_contains(c: GeometryConstants, v: Vec2, depth: int = 64) -> bool:
    """Membership in Area(kappa), truncated to the orbit points of index <= depth."""
    if depth < 0:
        raise ValueError("depth must be non-negative")
    if not in_W(c, v):
        return False
    for u in tau_orbit(c, depth) + sigma_orbit(c, depth):
        if not halfspace_contains(c, u, v):
            return False
    return True


def find_segment_origin(c: GeometryConstants, v: Vec2, depth: int = 64,
                        cap: int = 10_000) -> Vec2:
    """The point u with u_1 = sigma^k(kappa)_1 whose segment L(u) passes through v.

    k is the least index with sigma^k(kappa)_1 <= v_1.
    """
    if not in_W(c, v) or v.x1 > c.kappa.x1:
        raise DomainError(f"{v} must lie in W with first component <= kappa_1")
    if area_contains(c, v, depth):
        raise DomainError(f"{v} already lies in Area(kappa)")
    point = c.kappa
    for _ in range(cap):
        if point.x1 <= v.x1:
            break
        point = sigma(c, point)
    else:
        raise CapExceeded(f"no sigma^k(kappa)_1 <= {v.x1} within {cap} steps")
    u1 = point.x1
    core = c.q - 1 + u1 * (1 - u1)
    u = Vec2(u1, v.x2 * core / ((1 - u1) * (v.x1 - u1) + core))
    assert segment_contains(c, u, v), "segment origin postcondition failed"
    return u


def sigma_limit_gap(c: GeometryConstants, k: int) -> Fraction:
    """sigma^k(kappa)_1 - iq_lower; positive and strictly decreasing in k."""
    return sigma_n(c, k).x1 - c.iq_lower


def convex_weight_after_tau(lam: Fraction, x: Vec2, y: Vec2) -> Fraction:
    """The weight lam' with tau(lam x + (1-lam) y) = lam' tau(x) + (1-lam') tau(y)."""
    return lam * x.x1 / (lam * x.x1 + (1 - lam) * y.x1)
