"""Newton solving for renormalization fixed points and cycles, and spectra
of the operator's derivative.

Everything happens in the coefficient space of phi.  The derivative of
T(f) = f^p(lam x)/lam at f, acting on an even perturbation v, is

    DT(f) v (x) = (1/lam) sum_{j<p} Df^j(f^{p-j}(lam x)) v(f^{p-j-1}(lam x))
                + (1/lam) [x (Tf)'(x) - Tf(x)] sum_{j<p} Df^j(z_{p-j}) v(z_{p-j-1})

with z_i = f^i(0); the second, rank-one term is the sensitivity of the
scaling lam = f^p(0) to the perturbation.  Projected onto the basis this
gives a dense matrix whose dominant eigenvalue at the period-doubling fixed
point is the expansion constant delta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import basis as _basis
from .basis import PhiBasis
from .errors import (CombinatoricsMismatch, DegenerateScaling, DomainError,
                     InvalidMap, NoConvergence, NotRenormalizable,
                     RenormlabError, TruncationLoss, WindowNotFound)
from .maps import QuadraticFamily, UnimodalMap
from .renorm import (THETA_DOUBLING, RenormStep, Renormalized, detect,
                     renormalize, renormalize_with)

COLUMN_RESIDUAL_CAP = 1e-8
UNSTABLE_CUTOFF = 1e-6   # |eig| > 1 + cutoff counts as expanding

# classical starting guess for the period-doubling fixed point
DOUBLING_SEED_C = 1.5276


@dataclass(frozen=True)
class NewtonSettings:
    tol: float = 1e-10
    max_iters: int = 50
    max_halvings: int = 8
    residual_grid: int = 200


def _orbit_stack(f: UnimodalMap, x0: np.ndarray, p: int):
    """(Z, FP): Z[i] = f^i(x0) for i = 0..p, FP[i] = f'(Z[i]) for i < p."""
    z = np.array(x0, dtype=float)
    zs = [z]
    fps = []
    for _ in range(p):
        fps.append(2.0 * z * f.phi_deriv(z * z, 1))
        z = f.phi(z * z)
        zs.append(z)
    return np.stack(zs), np.stack(fps)


def derivative_matrix(f: UnimodalMap, step: RenormStep | None = None,
                      degree: int | None = None,
                      residual_cap: float | None = None) -> np.ndarray:
    """Matrix of DT(f) on the coefficient space, shape (D+1, D+1).

    Column n is the projection of DT(f) applied to the n-th basis element,
    using the same oversampled least-squares projection renormalize uses, so
    this matrix is exactly the derivative of the discretized operator (what
    Newton and finite-difference checks need).  Images of high-order basis
    elements genuinely exceed degree D, so their fit residual at the nodes is
    not small and is informational; pass residual_cap to turn it into a hard
    TruncationLoss bound.
    """
    if step is None:
        step = detect(f)
    p, lam = step.p, step.lam
    dim = (degree if degree is not None else f.degree) + 1
    u_nodes = _basis.collocation_nodes(2 * dim)
    x = np.sqrt(u_nodes)

    zs, fps = _orbit_stack(f, lam * x, p)
    # suffix products: amp[j] = Df^j evaluated at z_{p-j}
    amp = np.ones((p + 1, x.size))
    for j in range(1, p + 1):
        amp[j] = amp[j - 1] * fps[p - j]
    # basis values at the arguments of v: rows j = 0..p-1 use z_{p-j-1}
    args = np.stack([zs[p - j - 1] for j in range(p)])
    design = _basis.design_matrix(args.ravel() ** 2, dim - 1, f.basis)
    design = design.reshape(p, x.size, dim)
    principal = np.einsum("jt,jtn->tn", amp[:p], design) / lam

    # scaling sensitivity along the critical orbit
    zc, fpc = _orbit_stack(f, np.zeros(1), p)
    campl = np.ones(p + 1)
    for j in range(1, p + 1):
        campl[j] = campl[j - 1] * fpc[p - j, 0]
    crit_args = np.array([zc[p - j - 1, 0] for j in range(p)])
    crit_design = _basis.design_matrix(crit_args ** 2, dim - 1, f.basis)
    sens = campl[:p] @ crit_design
    tf_vals = zs[p] / lam
    tail_weight = (x * amp[p] - tf_vals) / lam
    image = principal + np.outer(tail_weight, sens)

    gram = _basis.design_matrix(u_nodes, dim - 1, f.basis)
    mat, *_ = np.linalg.lstsq(gram, image, rcond=None)
    if residual_cap is not None:
        fit_err = float(np.max(np.abs(gram @ mat - image)))
        if fit_err >= residual_cap:
            raise TruncationLoss(
                f"derivative column residual {fit_err:.3e} exceeds "
                f"{residual_cap:.1e}", residual=fit_err)
    return mat


def finite_difference_matrix(f: UnimodalMap, h: float = 1e-6,
                             degree: int | None = None) -> np.ndarray:
    """Central-difference check of derivative_matrix via raw coefficient
    perturbations (the perturbed maps are built unchecked on purpose: the
    operator itself never assumes f(0) = 1)."""
    target = degree if degree is not None else f.degree
    dim = target + 1
    base = np.zeros(dim)
    base[: f.coeffs.size] = f.coeffs
    cols = np.empty((dim, dim))
    for n in range(dim):
        plus, minus = base.copy(), base.copy()
        plus[n] += h
        minus[n] -= h
        c_plus = _project_T(UnimodalMap(plus, f.basis, check=False), target)
        c_minus = _project_T(UnimodalMap(minus, f.basis, check=False), target)
        cols[:, n] = (c_plus - c_minus) / (2.0 * h)
    return cols


def _project_T(f: UnimodalMap, degree: int) -> np.ndarray:
    """Coefficients of T(f) without renormalizing the constant term."""
    step = detect(f, validate_input=False)
    lam, p = step.lam, step.p

    def phi_rf(u):
        z = f.phi((lam * lam) * u)
        for _ in range(p - 1):
            z = f.phi(z * z)
        return z / lam

    coeffs, _ = _basis.project_function(phi_rf, degree, f.basis)
    return coeffs


@dataclass(frozen=True)
class SpectralReport:
    matrix_dim: int
    eigenvalues: np.ndarray          # sorted by modulus desc, pairs adjacent
    delta: float                     # leading eigenvalue (real part)
    gap: float                       # modulus of the second eigenvalue
    hyperbolic: bool                 # exactly one eigenvalue outside the disk
    unstable_vector: np.ndarray      # coefficient vector, sup-norm 1 as a map
    stable_functional: np.ndarray    # left eigenvector, sigma(u) = 1


def _sorted_eigensystem(mat: np.ndarray):
    vals, vecs = scipy.linalg.eig(mat)
    order = np.lexsort((-vals.imag, -vals.real, -np.abs(vals)))
    return vals[order], vecs[:, order]


def _realified(vec: np.ndarray) -> np.ndarray:
    pivot = vec[int(np.argmax(np.abs(vec)))]
    rotated = vec * np.conj(pivot) / abs(pivot)
    return np.real(rotated)


def _increasing_c_direction(dim: int, basis: PhiBasis) -> np.ndarray:
    """Tangent of c -> (1 - c u) in coefficient space."""
    out = np.zeros(dim)
    if basis is PhiBasis.ORTHOGONAL:
        out[0] = -0.5
        out[1] = -0.5
    else:
        out[1] = -1.0
    return out


def spectral_report(mat: np.ndarray, basis: PhiBasis,
                    sup_grid: int = 512) -> SpectralReport:
    vals, vecs = _sorted_eigensystem(mat)
    dim = mat.shape[0]
    outside = np.abs(vals) > 1.0 + UNSTABLE_CUTOFF
    hyperbolic = int(np.count_nonzero(outside)) == 1
    delta = float(vals[0].real)
    gap = float(np.abs(vals[1]))

    u_vec = _realified(vecs[:, 0])
    grid = np.linspace(0.0, 1.0, sup_grid)
    sup = float(np.max(np.abs(_basis.eval_phi(u_vec, basis, grid))))
    u_vec = u_vec / sup

    lvals, lvecs = _sorted_eigensystem(mat.T)
    li = int(np.argmin(np.abs(lvals - vals[0])))
    sigma = _realified(lvecs[:, li])
    pairing = float(sigma @ u_vec)
    sigma = sigma / pairing

    direction = _increasing_c_direction(dim, basis)
    if float(sigma @ direction) < 0.0:
        u_vec = -u_vec
        sigma = -sigma
    return SpectralReport(matrix_dim=dim, eigenvalues=vals, delta=delta,
                          gap=gap, hyperbolic=hyperbolic,
                          unstable_vector=u_vec, stable_functional=sigma)


def spectrum(f: UnimodalMap, step: RenormStep | None = None) -> SpectralReport:
    """Eigendata of DT at f (usually a solved fixed point)."""
    mat = derivative_matrix(f, step)
    return spectral_report(mat, f.basis)


@dataclass(frozen=True)
class FixedPointResult:
    map: UnimodalMap
    theta: tuple[int, ...]
    lambda_star: float
    residual: float                 # sup |Rg - g| on the residual grid
    newton_iters: int
    history: tuple[float, ...]      # residual per accepted iterate

    @property
    def g(self) -> UnimodalMap:
        return self.map


def _sup_distance(f: UnimodalMap, g: UnimodalMap, grid: int) -> float:
    xs = np.linspace(-1.0, 1.0, grid)
    return float(np.max(np.abs(f(xs) - g(xs))))


_NEWTON_RECOVERABLE = (InvalidMap, NotRenormalizable, DegenerateScaling,
                       CombinatoricsMismatch, TruncationLoss, DomainError)


def _newton_polish(g: UnimodalMap, thetas: tuple[tuple[int, ...], ...],
                   settings: NewtonSettings,
                   start_cycle: tuple[UnimodalMap, ...] | None = None):
    """Damped Newton on the m-cycle system R(g_i) = g_{i+1 mod m}.

    Returns (cycle, steps, residual, history).  m = 1 is the fixed-point
    equation; the block Jacobian couples consecutive cycle positions.
    """
    m = len(thetas)
    dim = g.coeffs.size
    basis = g.basis
    norm_row = _basis.design_matrix(np.zeros(1), dim - 1, basis)[0]

    def build_cycle(c_stack: np.ndarray):
        cycle, rens = [], []
        for i in range(m):
            cycle.append(UnimodalMap(c_stack[i], basis))
        for i in range(m):
            rens.append(renormalize_with(cycle[i], thetas[i], degree=dim - 1))
        res = 0.0
        for i in range(m):
            res = max(res, _sup_distance(rens[i].map, cycle[(i + 1) % m],
                                         settings.residual_grid))
        return tuple(cycle), tuple(rens), res

    if start_cycle is None:
        c_stack = np.tile(g.coeffs, (m, 1))
    else:
        c_stack = np.stack([h.coeffs for h in start_cycle])
    cycle, rens, res = build_cycle(c_stack)
    history = [res]

    for it in range(1, settings.max_iters + 1):
        if res < settings.tol:
            return cycle, rens, res, tuple(history), it - 1
        jac = np.zeros((m * dim, m * dim))
        rhs = np.zeros(m * dim)
        for i in range(m):
            mat = derivative_matrix(cycle[i], rens[i].step, degree=dim - 1)
            rows = slice(i * dim, (i + 1) * dim)
            jac[rows, rows] = mat
            nxt = (i + 1) % m
            jac[rows, nxt * dim:(nxt + 1) * dim] -= np.eye(dim)
            rhs[rows] = -(rens[i].map.coeffs - cycle[nxt].coeffs)
            # pin the normalization of g_i in place of its constant equation
            jac[i * dim, :] = 0.0
            jac[i * dim, i * dim:(i + 1) * dim] = norm_row
            rhs[i * dim] = 0.0
        delta = scipy.linalg.solve(jac, rhs).reshape(m, dim)

        scale = 1.0
        for _ in range(settings.max_halvings + 1):
            try:
                trial = np.stack([
                    _basis.normalized_constant(c_stack[i] + scale * delta[i],
                                               basis) for i in range(m)])
                cyc_t, rens_t, res_t = build_cycle(trial)
            except _NEWTON_RECOVERABLE:
                scale /= 2.0
                continue
            if res_t < res:
                c_stack, cycle, rens, res = trial, cyc_t, rens_t, res_t
                history.append(res)
                break
            scale /= 2.0
        else:
            raise NoConvergence(
                f"Newton stalled at residual {res:.3e} after {it} steps",
                history=tuple(history))
    raise NoConvergence(
        f"residual {res:.3e} after {settings.max_iters} iterations",
        history=tuple(history))


def solve_fixed_point(theta: tuple[int, ...] = THETA_DOUBLING,
                      degree: int = 24, tol: float = 1e-10,
                      settings: NewtonSettings | None = None,
                      seed: UnimodalMap | None = None) -> FixedPointResult:
    """Fixed point of R with combinatorial type theta.

    The doubling type starts from the classical quadratic guess; other types
    are seeded by chasing the nested parameter windows of the quadratic
    family and renormalizing a parameter from deep inside.
    """
    settings = settings or NewtonSettings()
    if tol != settings.tol:
        settings = NewtonSettings(tol=tol, max_iters=settings.max_iters,
                                  max_halvings=settings.max_halvings,
                                  residual_grid=settings.residual_grid)
    theta = tuple(theta)
    if seed is None:
        seed = _seed_map((theta,), degree)
    cycle, rens, res, history, iters = _newton_polish(
        seed, (theta,), settings)
    g = cycle[0]
    return FixedPointResult(map=g, theta=theta, lambda_star=rens[0].step.lam,
                            residual=res, newton_iters=iters, history=history)


@dataclass(frozen=True)
class PeriodicOrbitResult:
    cycle: tuple[UnimodalMap, ...]
    combinatorics: tuple[tuple[int, ...], ...]
    residual: float
    multipliers: SpectralReport      # spectrum of the cycle product
    newton_iters: int
    history: tuple[float, ...]


def solve_periodic_orbit(thetas, degree: int = 24, tol: float = 1e-10,
                         settings: NewtonSettings | None = None,
                         seeds: tuple[UnimodalMap, ...] | None = None
                         ) -> PeriodicOrbitResult:
    """Cycle g_0 -> g_1 -> ... -> g_0 of R with prescribed per-step types."""
    thetas = tuple(tuple(t) for t in thetas)
    if not thetas:
        raise DomainError("need at least one combinatorial type")
    settings = settings or NewtonSettings()
    if tol != settings.tol:
        settings = NewtonSettings(tol=tol, max_iters=settings.max_iters,
                                  max_halvings=settings.max_halvings,
                                  residual_grid=settings.residual_grid)
    if seeds is None:
        seeds = _seed_cycle(thetas, degree)
    cycle, rens, res, history, iters = _newton_polish(
        seeds[0], thetas, settings, start_cycle=seeds)
    product = np.eye(degree + 1)
    for i in range(len(thetas)):
        product = derivative_matrix(cycle[i], rens[i].step) @ product
    report = spectral_report(product, cycle[0].basis)
    observed = tuple(rens[i].step.perm for i in range(len(thetas)))
    return PeriodicOrbitResult(cycle=cycle, combinatorics=observed,
                               residual=res, multipliers=report,
                               newton_iters=iters, history=history)


# ---------------------------------------------------------------------------
# seeding via nested parameter windows of the quadratic family

_SEED_FAMILY = QuadraticFamily()
_SEED_DEGREE = 16


def _itinerary_ok(c: float, prefix) -> bool:
    try:
        g = _SEED_FAMILY.member(float(c), degree=_SEED_DEGREE)
        for theta in prefix:
            step = detect(g, grid=32)
            if step.perm != theta:
                return False
            g = renormalize(g, step=step, degree=_SEED_DEGREE).map
    except RenormlabError:
        return False
    return True


def _refine_edge(c_out: float, c_in: float, prefix, bits: int = 10) -> float:
    for _ in range(bits):
        mid = 0.5 * (c_out + c_in)
        if mid == c_out or mid == c_in:
            break
        if _itinerary_ok(mid, prefix):
            c_in = mid
        else:
            c_out = mid
    return c_in


def _window_for_prefix(prefix, bracket, grids=(129, 513, 2049)):
    lo, hi = bracket
    for grid in grids:
        cs = np.linspace(lo, hi, grid)
        mask = np.array([_itinerary_ok(c, prefix) for c in cs])
        if mask.any():
            break
    else:
        raise WindowNotFound(
            f"no parameter with itinerary {list(prefix)} in "
            f"[{lo:.12g}, {hi:.12g}]", depth=len(prefix))
    runs = []
    start = None
    for i, hit in enumerate(mask):
        if hit and start is None:
            start = i
        elif not hit and start is not None:
            runs.append((start, i - 1))
            start = None
    if start is not None:
        runs.append((start, len(mask) - 1))
    a, b = max(runs, key=lambda r: r[1] - r[0])
    left = cs[a] if a == 0 else _refine_edge(cs[a - 1], cs[a], prefix)
    right = cs[b] if b == len(cs) - 1 else _refine_edge(cs[b + 1], cs[b], prefix)
    return left, right


def _seed_parameter(prefix) -> float:
    bracket = (0.3, 2.0)
    for d in range(1, len(prefix) + 1):
        bracket = _window_for_prefix(tuple(prefix[:d]), bracket)
    return 0.5 * (bracket[0] + bracket[1])


def _seed_cycle(thetas: tuple[tuple[int, ...], ...],
                degree: int) -> tuple[UnimodalMap, ...]:
    m = len(thetas)
    if m == 1 and thetas[0] == THETA_DOUBLING:
        base = _SEED_FAMILY.member(DOUBLING_SEED_C, degree=degree)
        return (base,)
    burn = m * max(1, math.ceil(2 / m))
    depth = burn + 3
    prefix = tuple(thetas[d % m] for d in range(depth))
    c = _seed_parameter(prefix)
    g = _SEED_FAMILY.member(c, degree=degree)
    for i in range(burn):
        g = renormalize_with(g, prefix[i], degree=degree).map
    out = [g]
    for i in range(1, m):
        # stepping from cycle position i-1 consumes that position's type
        out.append(renormalize_with(out[-1], thetas[i - 1],
                                    degree=degree).map)
    return tuple(out)


def _seed_map(thetas: tuple[tuple[int, ...], ...], degree: int) -> UnimodalMap:
    return _seed_cycle(thetas, degree)[0]


@dataclass(frozen=True)
class ConvergenceReport:
    distances: np.ndarray    # d_n = sup |R^n f - R^n g|, n = 0..n_max
    slope: float             # fitted slope of log d_n
    intercept: float
    r_squared: float


def convergence_experiment(f: UnimodalMap, g: UnimodalMap, n_max: int,
                           grid: int = 200) -> ConvergenceReport:
    """Track sup-distance of renormalization orbits of two maps.

    Both maps must make the same combinatorial choices level by level;
    the first disagreement raises CombinatoricsMismatch with the level.
    """
    ds = []
    cur_f, cur_g = f, g
    for n in range(n_max + 1):
        ds.append(_sup_distance(cur_f, cur_g, grid))
        if n == n_max:
            break
        step_f = detect(cur_f)
        step_g = detect(cur_g)
        if (step_f.p, step_f.perm) != (step_g.p, step_g.perm):
            raise CombinatoricsMismatch(
                f"types diverge at level {n}: {step_f.perm} vs {step_g.perm}",
                level=n)
        cur_f = renormalize(cur_f, step=step_f).map
        cur_g = renormalize(cur_g, step=step_g).map
    ds = np.asarray(ds)
    ns = np.arange(ds.size, dtype=float)
    logs = np.log(np.maximum(ds, 1e-300))
    slope, intercept = np.polyfit(ns, logs, 1)
    fitted = slope * ns + intercept
    ss_res = float(np.sum((logs - fitted) ** 2))
    ss_tot = float(np.sum((logs - np.mean(logs)) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return ConvergenceReport(distances=ds, slope=float(slope),
                             intercept=float(intercept), r_squared=r2)
