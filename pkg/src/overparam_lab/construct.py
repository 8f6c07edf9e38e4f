"""Constructive approximation tools.

* probabilists' Hermite polynomials,
* the interval partition: a small random set I(y) with a sign s(y, g) so that
  a Gaussian restricted to I(y) has signed conditional mean y,
* the indicator-to-function fit: a bounded h(alpha, b0) with
  E[1{alpha*x1 + beta*sqrt(1-x1^2) + b0 >= 0} h(alpha, b0)] ~= phi(x1),
* the two-layer existential weights W* built from such fits.

Why the fit works: for alpha, beta ~ N(0,1), E_beta[h_i(alpha*x + sqrt(1-x^2)*beta)]
= x^i h_i(alpha) and the integral of h_i times the normal density from t to
infinity is h_{i-1}(t) phi(t). Put u_i(b) = phi(b) h_{i-1}(-b). Then
E[1{...} h_i(alpha) u_i(b0)] = x^i E[u_i(b0)^2]. So a Hermite series in alpha
weighted by u_i(b0) reproduces any polynomial in x1 exactly.
"""
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, special

from .errors import ConstructionFailure, InvalidInput, InvalidParameter
from .numerics import make_rng

HERMITE_MAX_DEGREE = 80
BISECT_TOL = 1e-12


# ---------------------------------------------------------------- Hermite polynomials


@dataclass(frozen=True)
class HermiteBasis:
    """h_0..h_D with h_{i+1} = x h_i - i h_{i-1}. ``coeffs[i]`` are power-basis coefficients."""

    D: int

    def __post_init__(self):
        if self.D < 0:
            raise InvalidParameter("max degree must be >= 0")

    @property
    def coeffs(self):
        table = np.zeros((self.D + 1, self.D + 1))
        table[0, 0] = 1.0
        if self.D >= 1:
            table[1, 1] = 1.0
        for i in range(1, self.D):
            table[i + 1, 1:] = table[i, :-1]
            table[i + 1] -= i * table[i - 1]
        return table

    def all(self, x, upto=None):
        """Stack of h_0(x)..h_upto(x), shape (upto + 1,) + x.shape."""
        upto = self.D if upto is None else upto
        if upto > self.D:
            raise InvalidParameter(f"degree {upto} exceeds basis degree {self.D}")
        x = np.asarray(x, dtype=float)
        out = np.empty((upto + 1,) + x.shape)
        out[0] = 1.0
        if upto >= 1:
            out[1] = x
        for i in range(1, upto):
            out[i + 1] = x * out[i] - i * out[i - 1]
        return out

    def __call__(self, i, x):
        if not 0 <= i <= self.D:
            raise InvalidParameter(f"Hermite degree {i} outside [0, {self.D}]")
        return self.all(x, i)[i]


def hermite_eval(i, x, D=HERMITE_MAX_DEGREE):
    return HermiteBasis(D)(i, x)


# ---------------------------------------------------------------- interval partition


def _bisect(f, lo, hi, what):
    flo, fhi = f(lo), f(hi)
    if flo * fhi > 0:
        raise ConstructionFailure(f"{what}: root not bracketed", {"lo": lo, "hi": hi, "f_lo": flo, "f_hi": fhi})
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if (fm > 0) == (fhi > 0):
            hi, fhi = mid, fm
        else:
            lo, flo = mid, fm
        if hi - lo < BISECT_TOL:
            break
    else:
        raise ConstructionFailure(f"{what}: bisection did not converge", {"lo": lo, "hi": hi})
    return 0.5 * (lo + hi)


def _npdf(x):
    return math.exp(-0.5 * x * x) / math.sqrt(2 * math.pi)


def _ncdf(x):
    return float(special.ndtr(x))


def _nppf(p):
    return float(special.ndtri(p))


@dataclass
class IntervalPartition:
    """For y in [-1, 1], a set I(y) of Gaussian mass tau and a sign s(y, g).

    For y >= 0 there are two regimes, split at y0 = E[g | 0 <= g <= c] with
    c = Phi^{-1}(1/2 + tau/2):

    * y >= y0: I(y) = [L, U] u [-U, -L] with mass tau/2 on each side,
      s = +1 on [L, U] and -1 on the mirror, and L chosen so that the
      conditional mean on [L, U] is y.
    * y < y0: I(y) = [-c, c], s(g) = sign(g) for |g| <= d and -sign(g) for
      d < |g| <= c, with d chosen so that E[s g | I] = y.

    Negative y use I(y) = I(-y) and s(y, g) = -s(-y, g). The two regimes meet
    at y0 with L = 0 and d = c.
    """

    tau: float
    c: float = field(init=False)
    y0: float = field(init=False)

    def __post_init__(self):
        if not 0 < self.tau <= 0.01:
            raise InvalidParameter("tau must lie in (0, 1/100]")
        self.c = _nppf(0.5 + self.tau / 2)
        self.y0 = (_npdf(0.0) - _npdf(self.c)) / (self.tau / 2)

    def _upper(self, L):
        return _nppf(min(_ncdf(L) + self.tau / 2, 1 - 1e-300))

    def _cond_mean(self, L):
        U = self._upper(L)
        return (_npdf(L) - _npdf(U)) / (self.tau / 2)

    def pieces(self, y):
        """List of (lo, hi, sign) covering I(y)."""
        if not -1 <= y <= 1:
            raise InvalidInput("y must lie in [-1, 1]")
        flip = -1 if y < 0 else 1
        y = abs(y)
        if y >= self.y0:
            L = _bisect(lambda t: self._cond_mean(t) - y, 0.0, 2.0, "interval lower end")
            U = self._upper(L)
            out = [(-U, -L, -1), (L, U, 1)]
        else:
            c, tau = self.c, self.tau

            def gap(d):
                return 2 * ((_npdf(0.0) - _npdf(d)) - (_npdf(d) - _npdf(c))) - y * tau

            d = _bisect(gap, 0.0, c, "sign split point")
            out = [(-c, -d, 1), (-d, 0.0, -1), (0.0, d, 1), (d, c, -1)]
        return [(lo, hi, flip * s) for lo, hi, s in out]

    def intervals(self, y):
        """I(y) as at most two merged closed intervals."""
        segs = sorted((lo, hi) for lo, hi, _ in self.pieces(y))
        merged = [list(segs[0])]
        for lo, hi in segs[1:]:
            if lo <= merged[-1][1] + 1e-15:
                merged[-1][1] = max(merged[-1][1], hi)
            else:
                merged.append([lo, hi])
        return [tuple(iv) for iv in merged]

    def sign(self, y, g):
        """s(y, g); zero outside I(y)."""
        g = np.asarray(g, dtype=float)
        out = np.zeros(g.shape)
        for lo, hi, s in self.pieces(y):
            out = np.where((g >= lo) & (g <= hi) & (out == 0), s, out)
        return out

    def properties(self, y):
        """Quadrature values of the defining quantities at y."""
        ps = self.pieces(y)
        mass = sum(_ncdf(hi) - _ncdf(lo) for lo, hi, _ in ps)
        plus = sum(_ncdf(hi) - _ncdf(lo) for lo, hi, s in ps if s > 0)
        minus = sum(_ncdf(hi) - _ncdf(lo) for lo, hi, s in ps if s < 0)
        signed = sum(s * (_npdf(lo) - _npdf(hi)) for lo, hi, s in ps)
        vals = [s * v for lo, hi, s in ps for v in (lo, hi)]
        return {
            "y": y,
            "mass": mass,
            "p_plus": plus,
            "p_minus": minus,
            "cond_mean": signed / mass,
            "span": max(vals) - min(vals),
        }


def build_interval_partition(tau):
    return IntervalPartition(tau)


def symmetric_difference(a, b):
    """Lebesgue measure of the symmetric difference of two unions of intervals."""
    pts = sorted({p for iv in a + b for p in iv})

    def inside(ivs, t):
        return any(lo <= t <= hi for lo, hi in ivs)

    total = 0.0
    for lo, hi in zip(pts[:-1], pts[1:]):
        mid = 0.5 * (lo + hi)
        if inside(a, mid) != inside(b, mid):
            total += hi - lo
    return total


def check_interval_partition(part, grid=None):
    """Max deviations of the Balanced/Symmetric/Unbiased/Bounded properties plus a Lipschitz fit."""
    grid = np.linspace(-1, 1, 41) if grid is None else np.asarray(grid)
    rows = [part.properties(float(y)) for y in grid]
    tau = part.tau
    report = {
        "tau": tau,
        "grid": [float(y) for y in grid],
        "balanced": max(abs(r["mass"] - tau) for r in rows),
        "symmetric": max(abs(r["p_plus"] - r["p_minus"]) for r in rows),
        "unbiased": max(abs(r["cond_mean"] - r["y"]) for r in rows),
        "max_span": max(r["span"] for r in rows),
    }
    fine = np.linspace(-1, 1, 2001)
    ivs = [part.intervals(float(y)) for y in fine]
    ratios = [symmetric_difference(ivs[i], ivs[i + 1]) / (fine[1] - fine[0]) for i in range(len(fine) - 1)]
    report["lipschitz_K"] = float(max(ratios))
    h = 1e-7
    report["y0"] = part.y0
    report["jump_at_y0"] = symmetric_difference(part.intervals(part.y0 - h), part.intervals(part.y0 + h))
    return report


# ---------------------------------------------------------------- indicator-to-function fit


def _u_second_moments(D):
    """E_b[u_i(b)^2] for i = 1..D with u_i(b) = pdf(b) h_{i-1}(-b), b ~ N(0,1)."""
    t, w = np.polynomial.hermite.hermgauss(max(D + 5, 40))
    # pdf(b)^3 = exp(-3 b^2 / 2) / (2 pi)^{3/2};  b = t sqrt(2/3)
    b = t * math.sqrt(2.0 / 3.0)
    H = HermiteBasis(D).all(b, D - 1)
    scale = math.sqrt(2.0 / 3.0) / (2 * math.pi) ** 1.5
    return np.array([scale * np.sum(w * H[i - 1] ** 2) for i in range(1, D + 1)])


def _fit_degree(phi, eps, degree):
    """Raise ``degree`` until the Taylor tail on [-1, 1] is below eps/8."""
    c = np.asarray(phi.taylor_coeffs)
    D = min(degree, len(c) - 1)
    while D < len(c) - 1 and np.sum(np.abs(c[D + 1 :])) > eps / 8:
        D += 1
    return D


@dataclass
class FitFunction:
    """h(alpha, b0) = clip(2 beta_0 + sum_i theta_i hhat_i(alpha) u_i(b0), -C, C).

    ``poly`` holds the power-series coefficients beta_i the fit reproduces
    in x1; ``theta_i = beta_i / E[u_i^2]``; hhat_i is h_i truncated to
    |alpha| <= B_i.
    """

    phi_name: str
    eps: float
    C: float
    poly: np.ndarray
    theta: np.ndarray
    radii: np.ndarray
    second_moment: float
    calibration: dict

    @property
    def degree(self):
        return len(self.poly) - 1

    def raw(self, alpha, b0):
        alpha = np.asarray(alpha, dtype=float)
        b0 = np.asarray(b0, dtype=float)
        D = self.degree
        out = np.full(np.broadcast(alpha, b0).shape, 2.0 * self.poly[0])
        if D == 0:
            return out
        Ha = HermiteBasis(D).all(alpha)
        Hb = HermiteBasis(D).all(-b0, D - 1)
        pdf = np.exp(-0.5 * b0 * b0) / math.sqrt(2 * math.pi)
        for i in range(1, D + 1):
            if self.theta[i] == 0:
                continue
            ha = np.where(np.abs(alpha) <= self.radii[i], Ha[i], 0.0)
            out = out + self.theta[i] * ha * (pdf * Hb[i - 1])
        return out

    def __call__(self, alpha, b0):
        return np.clip(self.raw(alpha, b0), -self.C, self.C)

    def polynomial(self, x1):
        """The value the identity reproduces, sum_i beta_i x1^i (before clipping)."""
        return np.polynomial.polynomial.polyval(x1, self.poly)


def _clip_excess(fit, C, n=1201, A=12.0):
    """E[(|h_raw| - C)_+] over alpha, b0 ~ N(0,1) by a tensor trapezoid rule."""
    g = np.linspace(-A, A, n)
    wt = np.full(n, g[1] - g[0])
    wt[[0, -1]] *= 0.5
    wt *= np.exp(-0.5 * g * g) / math.sqrt(2 * math.pi)
    total = 0.0
    for s in range(0, n, 200):
        a = g[s : s + 200, None]
        v = np.maximum(np.abs(fit.raw(a, g[None, :])) - C, 0.0)
        total += float(wt[s : s + 200] @ v @ wt)
    return total


def _bound_for(fit, budget):
    """Smallest power-of-two-ish C whose clipping bias is under ``budget``."""
    C = max(1.0, 2 * abs(fit.poly[0]))
    while _clip_excess(fit, C) > budget:
        C *= 1.25
        if C > 1e12:
            raise ConstructionFailure("no finite bound keeps the clipping bias small", {"budget": budget})
    return C


def build_fit_function(phi, eps, C=None, degree=20, radius_consts=(100.0, 10.0), grid_size=401, ridge=True):
    """Bounded h with E[1{alpha x1 + beta sqrt(1 - x1^2) + b0 >= 0} h(alpha, b0)] ~= phi(x1).

    Parameters
    ----------
    phi : SmoothActivation
    eps : float
        Target accuracy in (0, 1).
    C : float, optional
        Bound on |h|. If omitted, the smallest value (on a 1.25x ladder)
        whose clipping bias stays below eps/4 is used.
    degree : int
        Starting fit degree; raised while the Taylor tail exceeds eps/8.
    radius_consts : (float, float)
        Truncation radius B_i = k1 sqrt(i) + k2 sqrt(log(1/eps)).
    ridge : bool
        Calibrate the coefficients by a ridge solve that trades polynomial
        accuracy (up to eps/2 on the grid) for a smaller E[h^2]. Otherwise
        the Taylor coefficients are used as is.

    Returns
    -------
    FitFunction
        Raises ConstructionFailure if the certified residual bound (grid
        residual plus clipping bias) exceeds 2 eps.
    """
    if not 0 < eps < 1:
        raise InvalidParameter("eps must lie in (0, 1)")
    if C is not None and C <= 0:
        raise InvalidParameter("C must be positive")
    D = _fit_degree(phi, eps, degree)
    taylor = np.asarray(phi.taylor_coeffs[: D + 1], dtype=float)
    Eu = np.concatenate([[1.0], _u_second_moments(D)]) if D else np.array([1.0])
    weights = np.array([4.0] + [math.factorial(i) / Eu[i] for i in range(1, D + 1)])

    xs = np.cos(np.linspace(0, math.pi, grid_size))
    target = phi(xs)
    V = np.vander(xs, D + 1, increasing=True)

    def solve(mu):
        A = V.T @ V + mu * np.diag(weights)
        return np.linalg.solve(A, V.T @ target)

    def grid_resid(beta):
        return float(np.max(np.abs(V @ beta - target)))

    poly, mu = taylor, 0.0
    if ridge and D > 0:
        lo, hi = -20.0, 4.0
        if grid_resid(solve(10 ** lo)) <= eps / 2:
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                if grid_resid(solve(10 ** mid)) <= eps / 2:
                    lo = mid
                else:
                    hi = mid
            mu = 10 ** lo
            poly = solve(mu)
    k1, k2 = radius_consts
    radii = np.array([np.inf] + [k1 * math.sqrt(i) + k2 * math.sqrt(math.log(1 / eps)) for i in range(1, D + 1)])
    theta = np.zeros(D + 1)
    theta[1:] = poly[1:] / Eu[1:]
    second = float(np.sum(poly ** 2 * weights))
    fit = FitFunction(phi.name, eps, np.inf, poly, theta, radii, second, {})
    resid = grid_resid(poly)
    # truncation at B_i >= 100 removes mass below exp(-5000): nothing in double precision
    tail = 0.0
    C = _bound_for(fit, eps / 4) if C is None else float(C)
    excess = _clip_excess(fit, C)
    fit.C = C
    fit.calibration = {
        "degree": D,
        "ridge_mu": mu,
        "grid_residual": resid,
        "clip_bias_bound": excess,
        "truncation_tail": tail,
        "certified_residual": resid + excess + tail,
        "second_moment_unclipped": second,
    }
    if resid + excess > 2 * eps:
        raise ConstructionFailure("fit residual exceeds 2 eps", fit.calibration)
    return fit


@dataclass
class FitReport:
    grid: list
    estimate: list
    stderr: list
    residual: list
    max_residual: float
    tolerance_ok: bool
    second_moment: float
    second_moment_bound: float
    max_abs_h: float
    C: float
    lipschitz_alpha: float
    samples: int
    seed: int

    def to_json(self, path=None):
        text = json.dumps(self.__dict__, indent=2, sort_keys=True)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text


def verify_fit_function(h, phi, x1_grid=None, samples=10 ** 6, seed=0, Cs=None, chunk=250_000):
    """Monte-Carlo check of the indicator identity on a grid of x1 values.

    The same (alpha, beta, b0) triples are reused across grid points. The
    report passes when every residual is at most eps + 3 std-err.
    """
    grid = np.linspace(-1, 1, 21) if x1_grid is None else np.asarray(x1_grid, dtype=float)
    if np.any(np.abs(grid) > 1):
        raise InvalidInput("grid must lie in [-1, 1]")
    rng = make_rng(seed, (7,))
    s1 = np.zeros(len(grid))
    s2 = np.zeros(len(grid))
    hsq, hmax, lip = 0.0, 0.0, 0.0
    done = 0
    while done < samples:
        n = min(chunk, samples - done)
        alpha, beta, b0 = rng.standard_normal((3, n))
        hv = h(alpha, b0)
        hsq += float(np.sum(hv * hv))
        hmax = max(hmax, float(np.max(np.abs(hv))))
        step = 1e-4
        lip = max(lip, float(np.max(np.abs(h(alpha + step, b0) - hv))) / step)
        for g, x in enumerate(grid):
            v = np.where(alpha * x + beta * math.sqrt(max(0.0, 1 - x * x)) + b0 >= 0, hv, 0.0)
            s1[g] += v.sum()
            s2[g] += (v * v).sum()
        done += n
    mean = s1 / samples
    var = np.maximum(s2 / samples - mean ** 2, 0.0)
    se = np.sqrt(var / samples)
    resid = np.abs(mean - phi(grid))
    ok = bool(np.all(resid <= h.eps + 3 * se))
    return FitReport(
        grid=grid.tolist(),
        estimate=mean.tolist(),
        stderr=se.tolist(),
        residual=resid.tolist(),
        max_residual=float(resid.max()),
        tolerance_ok=ok,
        second_moment=hsq / samples,
        second_moment_bound=float("nan") if Cs is None else float(Cs) ** 2,
        max_abs_h=hmax,
        C=h.C,
        lipschitz_alpha=lip,
        samples=int(samples),
        seed=int(seed),
    )


# ---------------------------------------------------------------- two-layer existential weights


def construct_two_layer_Wstar(target, net, fits, eps=None):
    """W* whose bias-free pseudo network at the init signs approximates ``target``.

    Row j is (1 / (eps_a^2 m)) sum_r a_{r,j} sum_i a*_{r,i}
    h_i(sqrt(m) <w0_j, w1_i>, sqrt(m) b_j) w2_i. Inputs must be unit vectors.
    Returns ``(Wstar, info)`` with the scaled row-norm bound in ``info``.
    """
    if net.profile != "theory":
        raise InvalidParameter("the construction needs the theory init profile")
    if len(fits) != target.p:
        raise InvalidInput(f"need one fit per target term ({target.p}), got {len(fits)}")
    if target.k != net.k or target.d != net.d:
        raise InvalidInput("target and net dimensions differ")
    m = net.m
    sm = math.sqrt(m)
    coef = net.a.T @ target.a  # (m, p): sum_r a_{r,j} a*_{r,i}
    Wstar = np.zeros((m, net.d))
    for i, fit in enumerate(fits):
        hv = fit(sm * (net.W0 @ target.w1[i]), sm * net.b)
        Wstar += np.outer(coef[:, i] * hv, target.w2[i])
    Wstar /= net.eps_a ** 2 * m
    row = float(np.max(np.linalg.norm(Wstar, axis=1)))
    info = {"max_row_norm": row, "scaled_row_norm": row * net.eps_a * m / (target.k * target.p),
            "eps": eps}
    return Wstar, info


def two_layer_construction_error(net, Wstar, target, X, chunk=100):
    """Mean |G(x; W*) - f*(x)| where G uses the init signs and no bias."""
    from .networks import pseudo_forward, sign_pattern

    errs = []
    for s in range(0, X.shape[0], chunk):
        xb = X[s : s + chunk]
        frozen = sign_pattern(net, xb, at="init")
        g = pseudo_forward(net, xb, frozen, bias_mode="none", weights=Wstar)
        errs.append(np.abs(g - target(xb)).sum(axis=1))
    return float(np.mean(np.concatenate(errs)))
