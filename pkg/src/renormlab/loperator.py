"""Sum-of-substitutions operators Lv(x) = sum_i phi_i(x) v(psi_i(x)).

The derivative of the renormalization operator has this form (plus a rank-one
part from the scaling sensitivity, stored separately), and the composition
algebra is closed: substituting one sum into another yields another sum.  The
associated positive operator weights each term by |Dpsi_i|^gamma; since it is
positive its sup-norm on continuous functions is attained at v = 1, which
makes norm growth under composition directly measurable.

All inner maps carry analytic derivatives (chain rule over the stored
composition); nothing here differentiates numerically.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.polynomial.chebyshev import chebpts1

from .errors import OperatorDomainError, TermBlowup
from .maps import UnimodalMap
from .renorm import RenormStep, detect

CONTAINMENT_GRID = 128
CONTAINMENT_TOL = 1e-10
NORM_GRID = 512
COMPOSE_CAP = 4096


@dataclass(frozen=True)
class SmoothMap1D:
    """A map of [-1,1] with its analytic derivative."""

    fn: Callable[[np.ndarray], np.ndarray]
    dfn: Callable[[np.ndarray], np.ndarray]
    label: str = ""

    def __call__(self, x):
        return self.fn(np.asarray(x, dtype=float))

    def d(self, x):
        return self.dfn(np.asarray(x, dtype=float))


def identity_map() -> SmoothMap1D:
    return SmoothMap1D(lambda x: x, np.ones_like, "id")


def affine_map(a: float, b: float) -> SmoothMap1D:
    return SmoothMap1D(lambda x: a * x + b,
                       lambda x: np.full_like(x, a),
                       f"{a}*x+{b}")


def compose_smooth(outer: SmoothMap1D, inner: SmoothMap1D) -> SmoothMap1D:
    def fn(x):
        return outer.fn(inner.fn(x))

    def dfn(x):
        return outer.dfn(inner.fn(x)) * inner.dfn(x)

    return SmoothMap1D(fn, dfn, f"{outer.label}({inner.label})")


def _iter_val_deriv(f: UnimodalMap, z0: np.ndarray, k: int):
    """(f^k(z0), Df^k(z0)), vectorized; raw polynomial evaluation."""
    z = np.asarray(z0, dtype=float)
    dz = np.ones_like(z)
    for _ in range(k):
        dz = dz * (2.0 * z * f.phi_deriv(z * z, 1))
        z = f.phi(z * z)
    return z, dz


def map_iterate(f: UnimodalMap, k: int, scale: float = 1.0) -> SmoothMap1D:
    """x -> f^k(scale*x) with derivative scale*Df^k(scale*x)."""

    def fn(x):
        val, _ = _iter_val_deriv(f, scale * np.asarray(x, float), k)
        return val

    def dfn(x):
        _, dv = _iter_val_deriv(f, scale * np.asarray(x, float), k)
        return scale * dv

    return SmoothMap1D(fn, dfn, f"f^{k}({scale:.6g}x)")


@dataclass(frozen=True)
class RankOneTail:
    """x -> weight(x) * sum_j coeffs[j] * v(nodes[j])."""

    weight: Callable[[np.ndarray], np.ndarray]
    nodes: np.ndarray
    coeffs: np.ndarray

    def __post_init__(self):
        nodes = np.atleast_1d(np.asarray(self.nodes, dtype=float))
        coeffs = np.atleast_1d(np.asarray(self.coeffs, dtype=float))
        if nodes.shape != coeffs.shape:
            raise OperatorDomainError("tail nodes and coeffs differ in shape")
        nodes.setflags(write=False)
        coeffs.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "coeffs", coeffs)

    def functional(self, v) -> float:
        return float(np.dot(self.coeffs, v(self.nodes)))

    def apply(self, v, x: np.ndarray) -> np.ndarray:
        return self.weight(np.asarray(x, float)) * self.functional(v)


@dataclass(frozen=True)
class LOperator:
    """terms: (phi_i, psi_i) pairs; tails: additive rank-one parts.

    Every psi_i must map [-1,1] into itself (checked on a uniform grid at
    construction).  gamma_range is a recorded annotation of the exponent
    budget for the associated positive operator; nothing enforces it.
    """

    terms: tuple[tuple[Callable, SmoothMap1D], ...]
    tails: tuple[RankOneTail, ...] = ()
    gamma_range: tuple[float, float] | None = None
    label: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        object.__setattr__(self, "tails", tuple(self.tails))
        grid = np.linspace(-1.0, 1.0, CONTAINMENT_GRID)
        for i, (_, psi) in enumerate(self.terms):
            img = psi(grid)
            excess = float(np.max(np.abs(img))) - 1.0
            if excess > CONTAINMENT_TOL:
                raise OperatorDomainError(
                    f"term {i}: psi image leaves [-1,1] by {excess:.3e}")
        for t in self.tails:
            excess = float(np.max(np.abs(t.nodes))) - 1.0
            if excess > CONTAINMENT_TOL:
                raise OperatorDomainError(
                    f"tail node outside [-1,1] by {excess:.3e}")

    @property
    def n_terms(self) -> int:
        return len(self.terms)


def identity_operator() -> LOperator:
    return LOperator(terms=((lambda x: np.ones_like(x), identity_map()),),
                     label="identity")


def apply(L: LOperator, v, grid, include_tails: bool = True) -> np.ndarray:
    """Pointwise Lv on grid points in [-1,1]."""
    x = np.asarray(grid, dtype=float)
    if x.size and float(np.max(np.abs(x))) > 1.0 + CONTAINMENT_TOL:
        raise OperatorDomainError("grid leaves [-1,1]")
    out = np.zeros_like(x)
    for phi, psi in L.terms:
        out = out + phi(x) * v(psi(x))
    if include_tails:
        for t in L.tails:
            out = out + t.apply(v, x)
    return out


@dataclass(frozen=True)
class PositiveOperator:
    source: LOperator
    gamma: float

    def __post_init__(self):
        if not self.gamma > 0.0:
            raise OperatorDomainError(f"gamma must be positive, "
                                      f"got {self.gamma}")


def associated(L: LOperator, gamma: float) -> PositiveOperator:
    return PositiveOperator(source=L, gamma=float(gamma))


def apply_positive(P: PositiveOperator, v, grid) -> np.ndarray:
    """L_gamma v(x) = sum_i |phi_i(x)| |Dpsi_i(x)|^gamma v(psi_i(x)).

    Acts on the principal terms only; the rank-one tails are not of
    substitution form and stay outside the positive-operator estimates.
    """
    x = np.asarray(grid, dtype=float)
    out = np.zeros_like(x)
    for phi, psi in P.source.terms:
        out = out + (np.abs(phi(x)) * np.abs(psi.d(x))**P.gamma) * v(psi(x))
    return out


def gamma_norm(P: PositiveOperator) -> float:
    """Sup-norm of L_gamma on C[-1,1]; attained at v = 1 by positivity."""
    grid = chebpts1(NORM_GRID)
    vals = apply_positive(P, lambda y: np.ones_like(y), grid)
    return float(np.max(vals))


def _product_phi(phi1, phi2, psi1):
    def phi(x):
        return phi1(x) * phi2(psi1(x))

    return phi


def _pullback_weight(phi1, psi1, w2):
    def weight(x):
        return phi1(x) * w2(psi1(x))

    return weight


def _scaled_weight(w, c: float):
    def weight(x):
        return c * w(x)

    return weight


def compose(L1: LOperator, L2: LOperator, cap: int = COMPOSE_CAP) -> LOperator:
    """L1 after L2: (L1 L2)v(x) = sum_ij phi1_i(x) phi2_j(psi1_i(x)) v(psi2_j(psi1_i(x))).

    Rank-one parts propagate: L1's principal terms pull L2's tails back
    through psi1; L1's tails evaluate all of L2 at their nodes, which stays
    rank-one.  TermBlowup guards the product growth.
    """
    n_terms = L1.n_terms * L2.n_terms
    if n_terms > cap:
        raise TermBlowup(f"composition would carry {n_terms} terms "
                         f"(cap {cap})")
    terms = []
    for phi1, psi1 in L1.terms:
        for phi2, psi2 in L2.terms:
            terms.append((_product_phi(phi1, phi2, psi1),
                          compose_smooth(psi2, psi1)))
    tails = []
    # principal(L1) applied to each tail of L2
    for phi1, psi1 in L1.terms:
        for t2 in L2.tails:
            tails.append(RankOneTail(_pullback_weight(phi1, psi1, t2.weight),
                                     t2.nodes, t2.coeffs))
    # tails of L1 applied to all of L2: functional(L2 v) re-expands over nodes
    for t1 in L1.tails:
        nodes = []
        coeffs = []
        for phi2, psi2 in L2.terms:
            nodes.append(psi2(t1.nodes))
            coeffs.append(t1.coeffs * phi2(t1.nodes))
        if nodes:
            merged = np.concatenate(nodes)
            if merged.size > cap:
                raise TermBlowup(f"composed tail would carry {merged.size} "
                                 f"nodes (cap {cap})")
            tails.append(RankOneTail(t1.weight, merged,
                                     np.concatenate(coeffs)))
        for t2 in L2.tails:
            c = float(np.dot(t1.coeffs, t2.weight(t1.nodes)))
            tails.append(RankOneTail(_scaled_weight(t1.weight, c),
                                     t2.nodes, t2.coeffs))
    label = f"({L1.label})({L2.label})" if L1.label or L2.label else ""
    return LOperator(terms=tuple(terms), tails=tuple(tails),
                     gamma_range=L1.gamma_range, label=label)


def compose_power(L: LOperator, m: int, cap: int = COMPOSE_CAP) -> LOperator:
    if m < 1:
        raise OperatorDomainError(f"power must be >= 1, got {m}")
    out = L
    for _ in range(m - 1):
        out = compose(out, L, cap=cap)
    return out


def _renorm_phi(f: UnimodalMap, lam: float, p: int, j: int):
    def phi(x):
        y, _ = _iter_val_deriv(f, lam * np.asarray(x, float), p - j)
        _, dj = _iter_val_deriv(f, y, j)
        return dj / lam

    return phi


def renorm_derivative_as_loperator(f: UnimodalMap,
                                   step: RenormStep | None = None) -> LOperator:
    """Derivative of the renormalization at f, as substitution terms plus a
    rank-one tail.

    Term j has phi_j(x) = Df^j(f^{p-j}(lam x)) / lam and
    psi_j(x) = f^{p-j-1}(lam x); the tail carries the scaling sensitivity,
    with weight (x Df^p(lam x) - f^p(lam x)/lam)/lam and the critical-orbit
    functional sum_j Df^j(f^{p-j}(0)) v(f^{p-j-1}(0)).
    """
    if step is None:
        step = detect(f)
    p, lam = step.p, step.lam

    terms = [(_renorm_phi(f, lam, p, j), map_iterate(f, p - j - 1, lam))
             for j in range(p)]

    zc = np.zeros(1)
    crit = [0.0]
    for _ in range(p):
        zc = f.phi(zc * zc)
        crit.append(float(zc[0]))
    nodes = np.array([crit[p - j - 1] for j in range(p)])
    coeffs = np.empty(p)
    for j in range(p):
        _, dj = _iter_val_deriv(f, np.array([crit[p - j]]), j)
        coeffs[j] = dj[0]

    def tail_weight(x):
        x = np.asarray(x, dtype=float)
        zp, dp = _iter_val_deriv(f, lam * x, p)
        return (x * dp - zp / lam) / lam

    tail = RankOneTail(tail_weight, nodes, coeffs)
    return LOperator(terms=tuple(terms), tails=(tail,),
                     label=f"DR[p={p}]")


def norm_growth(L: LOperator, gamma: float, m_max: int,
                cap: int = COMPOSE_CAP) -> np.ndarray:
    """gamma_norm of L, L^2, ..., L^m_max (principal parts)."""
    out = np.empty(m_max)
    power = L
    for m in range(1, m_max + 1):
        if m > 1:
            power = compose(power, L, cap=cap)
        out[m - 1] = gamma_norm(associated(power, gamma))
    return out
