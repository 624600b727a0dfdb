"""Exact asymptotics of the per-degree data of a test configuration.

The dimension d_k and total weight w(k) of the degree-k slices agree with
polynomials in k once k is large enough.  This module finds those
polynomials by exact Newton interpolation over a verified window, then reads
off the scale-invariant quantities: the leading ratio F_0, the
Donaldson-Futaki invariant F_1 (the 1/k coefficient of w(k)/(k d_k)), the
squared norm coefficient of Tr A_k^2 at k^(n+2), the extremal slope limits
of lambda_min/k and the spectral-gap analogue, and the per-level Chow
weights obtained from the two-level weight ladder.

Everything is computed in rational arithmetic; a fit is accepted only if it
reproduces several further exact values beyond its interpolation nodes.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial
from typing import Callable, Sequence

from .spectra import GradedSlice, TestConfiguration, graded_slice

DEGREE_CAP = 64


@lru_cache(maxsize=None)
def _slice(config: TestConfiguration, k: int) -> GradedSlice:
    return graded_slice(config, k)


def newton_power_coefficients(
    xs: Sequence[Fraction], ys: Sequence[Fraction]
) -> tuple[Fraction, ...]:
    """Coefficients (ascending powers) of the interpolating polynomial."""
    m = len(xs)
    if m != len(ys) or m == 0:
        raise ValueError("need equally many nodes and values, at least one")
    divided = list(ys)
    for level in range(1, m):
        for i in range(m - 1, level - 1, -1):
            divided[i] = (divided[i] - divided[i - 1]) / (xs[i] - xs[i - level])
    # expand the Newton form sum_j divided[j] * prod_{i<j}(x - xs[i])
    coeffs = [Fraction(0)] * m
    basis = [Fraction(1)] + [Fraction(0)] * (m - 1)
    for j in range(m):
        for i in range(j + 1):
            coeffs[i] += divided[j] * basis[i]
        if j + 1 < m:
            new_basis = [Fraction(0)] * m
            for i in range(j + 1):
                new_basis[i + 1] += basis[i]
                new_basis[i] -= xs[j] * basis[i]
            basis = new_basis
    while len(coeffs) > 1 and coeffs[-1] == 0:
        coeffs.pop()
    return tuple(coeffs)


def eval_power(coeffs: Sequence[Fraction], x) -> Fraction:
    total = Fraction(0)
    for c in reversed(coeffs):
        total = total * x + c
    return total


@dataclass(frozen=True)
class PolynomialFit:
    coeffs: tuple[Fraction, ...]
    window: tuple[int, int]

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, x) -> Fraction:
        return eval_power(self.coeffs, x)

    def coefficient(self, power: int) -> Fraction:
        return self.coeffs[power] if power < len(self.coeffs) else Fraction(0)


def fit_eventually_polynomial(
    values: Callable[[int], Fraction],
    max_degree: int,
    k_start: int = 1,
    validation: int = 3,
    cap: int = DEGREE_CAP,
) -> PolynomialFit:
    """Smallest-start exact polynomial fit of an eventually polynomial map.

    Searches start points k0 >= k_start and degrees 0..max_degree; a
    candidate interpolation is accepted only if it also reproduces the next
    `validation` values exactly.  Raises on failure below the cap: the usual
    cause is an unsaturated ideal whose Hilbert data never stabilizes.
    """
    for k0 in range(k_start, cap + 1):
        for deg in range(max_degree + 1):
            hi = k0 + deg + validation
            if hi > cap:
                break
            nodes = list(range(k0, k0 + deg + 1))
            coeffs = newton_power_coefficients(
                [Fraction(x) for x in nodes], [Fraction(values(x)) for x in nodes]
            )
            if all(
                eval_power(coeffs, k) == values(k)
                for k in range(k0 + deg + 1, hi + 1)
            ):
                return PolynomialFit(coeffs, (k0, hi))
    raise ValueError(
        f"no stable polynomial window of degree <= {max_degree} found below "
        f"k = {cap}: unstable Hilbert data (is the ideal saturated?)"
    )


@dataclass(frozen=True)
class AsymptoticReport:
    """Interpolated Hilbert and weight data plus the derived invariants.

    hilbert_coeffs and weight_coeffs list polynomial coefficients in
    ascending powers of k.  F_0 is the leading ratio of w(k)/(k d_k), F_1
    its 1/k coefficient (the Donaldson-Futaki invariant), n2_sq the k^(n+2)
    coefficient of Tr A_k^2.  Lambda and Gamma are the exact limits of
    lambda_min/k and lambda_next/k when the extremal raw weights are
    eventually linear in k; otherwise the *_exact flag is False and only the
    float sample at the window edge is reported.
    """

    n: int
    hilbert_coeffs: tuple[Fraction, ...]
    weight_coeffs: tuple[Fraction, ...]
    tr_b_sq_coeffs: tuple[Fraction, ...]
    stability_window: tuple[int, int]
    F_0: Fraction
    F_1: Fraction
    n2_sq: Fraction
    Lambda: Fraction | None
    lambda_exact: bool
    lambda_empirical: float
    Gamma: Fraction | None
    gamma_exact: bool
    gamma_empirical: float | None
    trivial_action: bool

    @property
    def a_n(self) -> Fraction:
        return self.hilbert_coeffs[self.n]

    @property
    def degree_volume(self) -> Fraction:
        """Degree of (X, L): n! times the Hilbert leading coefficient."""
        return factorial(self.n) * self.a_n


def _extremal_fit(
    values: Callable[[int], Fraction | None],
    k_start: int,
    cap: int = DEGREE_CAP,
) -> PolynomialFit | None:
    """Degree-<=1 fit of an extremal weight sequence, None if not linear."""
    if any(values(k) is None for k in (k_start, k_start + 1)):
        return None
    try:
        return fit_eventually_polynomial(
            lambda k: Fraction(values(k)), 1, k_start=k_start, validation=4, cap=cap
        )
    except (ValueError, TypeError):
        return None


def fit_asymptotics(config: TestConfiguration, k_start: int = 1) -> AsymptoticReport:
    """Verified-window interpolation of d_k, w(k), Tr B_k^2 and the limits.

    The window search accepts the smallest start k0 >= k_start and dimension
    n such that degree-n interpolation of d_k on [k0, k0+n] and degree-(n+1)
    interpolation of w(k) on [k0, k0+n+1] reproduce the next n+3 exact
    values.  Failure below k = 64 raises (unstable Hilbert data).
    """
    if k_start < 1:
        raise ValueError("k_start must be >= 1")
    nvars = len(config.variables)

    def d(k: int) -> Fraction:
        return Fraction(_slice(config, k).dim)

    def w(k: int) -> Fraction:
        return Fraction(_slice(config, k).total_weight)

    found = None
    for k0 in range(k_start, DEGREE_CAP + 1):
        for n in range(nvars):
            hi = k0 + 2 * n + 4
            if hi > DEGREE_CAP:
                break
            d_nodes = list(range(k0, k0 + n + 1))
            d_coeffs = newton_power_coefficients(
                [Fraction(x) for x in d_nodes], [d(x) for x in d_nodes]
            )
            if len(d_coeffs) - 1 != n:
                continue  # true degree found at a smaller n already
            w_nodes = list(range(k0, k0 + n + 2))
            w_coeffs = newton_power_coefficients(
                [Fraction(x) for x in w_nodes], [w(x) for x in w_nodes]
            )
            extra = range(k0 + n + 1, hi + 1)
            if all(eval_power(d_coeffs, k) == d(k) for k in extra) and all(
                eval_power(w_coeffs, k) == w(k) for k in range(k0 + n + 2, hi + 1)
            ):
                found = (k0, n, d_coeffs, w_coeffs, hi)
                break
        if found:
            break
    if not found:
        raise ValueError(
            "no stable interpolation window below k = 64: "
            "unstable Hilbert data (is the ideal saturated?)"
        )
    k0, n, d_coeffs, w_coeffs, hi = found

    a_n = d_coeffs[n]
    a_n1 = d_coeffs[n - 1] if n >= 1 else Fraction(0)
    b_top = w_coeffs[n + 1] if len(w_coeffs) > n + 1 else Fraction(0)
    b_sub = w_coeffs[n] if len(w_coeffs) > n else Fraction(0)
    f0 = b_top / a_n
    f1 = (b_sub * a_n - b_top * a_n1) / a_n**2

    def tr_b_sq(k: int) -> Fraction:
        return Fraction(sum(b * b for b in _slice(config, k).b_spectrum))

    trb2 = fit_eventually_polynomial(tr_b_sq, n + 2, k_start=k0, validation=n + 3)
    n2_sq = trb2.coefficient(n + 2) - b_top**2 / a_n
    if n2_sq < 0:
        raise ValueError("negative leading coefficient for Tr A_k^2; inconsistent data")

    k_edge = hi

    def b_min(k: int) -> Fraction:
        return Fraction(_slice(config, k).b_spectrum[0])

    min_fit = _extremal_fit(b_min, k0)
    if min_fit is not None:
        lam = min_fit.coefficient(1) - f0
        lam_exact = True
    else:
        lam = None
        lam_exact = False
    lam_emp = float(_slice(config, k_edge).lambda_min / k_edge)

    def b_next(k: int) -> Fraction | None:
        sl = _slice(config, k)
        nxt = next((b for b in sl.b_spectrum if b != sl.b_spectrum[0]), None)
        return None if nxt is None else Fraction(nxt)

    if b_next(k_edge) is None:
        gam, gam_exact, gam_emp = None, True, None  # constant spectrum: no gap
    else:
        next_fit = _extremal_fit(b_next, k0)
        if next_fit is not None:
            gam = next_fit.coefficient(1) - f0
            gam_exact = True
        else:
            gam = None
            gam_exact = False
        nxt = _slice(config, k_edge).lambda_next
        gam_emp = None if nxt is None else float(nxt / k_edge)

    return AsymptoticReport(
        n=n,
        hilbert_coeffs=d_coeffs,
        weight_coeffs=w_coeffs,
        tr_b_sq_coeffs=trb2.coeffs,
        stability_window=(k0, hi),
        F_0=f0,
        F_1=f1,
        n2_sq=n2_sq,
        Lambda=lam,
        lambda_exact=lam_exact,
        lambda_empirical=lam_emp,
        Gamma=gam,
        gamma_exact=gam_exact,
        gamma_empirical=gam_emp,
        trivial_action=(n2_sq == 0),
    )


def futaki_f(
    config: TestConfiguration, k: int, report: AsymptoticReport | None = None
) -> Fraction:
    """Exact f(k) = w_k/(k d_k) - F_0; satisfies f(k) = F_1/k + O(1/k^2)."""
    if report is None:
        report = fit_asymptotics(config)
    sl = _slice(config, k)
    return Fraction(sl.total_weight, k * sl.dim) - report.F_0


@dataclass(frozen=True)
class ChowReport:
    """Chow weight of the level-r image cycle with its Futaki residual.

    tilde_w_coeffs interpolates p -> w(rp)*r*d_r - w(r)*(rp)*d_rp, an exact
    polynomial of degree <= n+1 in p on the verified window; mu is (n+1)!
    times its leading coefficient divided by r*d_r.  futaki_residual is
    -c_X_omega * mu / r^n - F_1, which tends to 0 as r grows.
    """

    r: int
    mu: Fraction
    tilde_w_coeffs: tuple[Fraction, ...]
    c_X_omega: Fraction
    futaki_residual: Fraction
    window: tuple[int, int]


def chow_weight_algebraic(
    config: TestConfiguration, r: int, report: AsymptoticReport | None = None
) -> ChowReport:
    """Exact Chow weight mu(Z_r, A_r) from the two-level weight ladder.

    The normalization c_X_omega = 1 / (a_n (n+1)!) makes the residual vanish
    in the large-r limit: the ladder's leading coefficient in p equals
    r^(n+1) (b_(n+1) r d_r - a_n w(r)), whose own leading behaviour is
    -a_n^2 F_1 r^n, so -c mu / r^n -> F_1 requires exactly this constant.
    """
    if r < 1:
        raise ValueError("level r must be >= 1")
    if report is None:
        report = fit_asymptotics(config)
    n = report.n
    k0 = report.stability_window[0]
    d_r = _slice(config, r).dim
    w_r = _slice(config, r).total_weight

    def ladder(p: int) -> Fraction:
        sl = _slice(config, r * p)
        return Fraction(sl.total_weight * r * d_r - w_r * (r * p) * sl.dim)

    p0 = max(1, -(-k0 // r))
    fit = fit_eventually_polynomial(
        ladder, n + 1, k_start=p0, validation=n + 3, cap=p0 + 3 * n + 12
    )
    leading = fit.coefficient(n + 1)
    mu = Fraction(factorial(n + 1)) * leading / (r * d_r)
    c = 1 / (report.a_n * factorial(n + 1))
    residual = -c * mu / Fraction(r) ** n - report.F_1
    return ChowReport(
        r=r,
        mu=mu,
        tilde_w_coeffs=fit.coeffs,
        c_X_omega=c,
        futaki_residual=residual,
        window=fit.window,
    )


@dataclass(frozen=True)
class ChowSweep:
    reports: tuple[ChowReport, ...]
    fitted_C: Fraction
    decay_ok: bool


def chow_sweep(
    config: TestConfiguration,
    r_values: Sequence[int],
    report: AsymptoticReport | None = None,
) -> ChowSweep:
    """Chow reports over levels with the fitted C of |residual| <= C/r.

    decay_ok records the property actually tested: |residual| is
    nonincreasing in magnitude over the sweep, or already zero everywhere.
    """
    if report is None:
        report = fit_asymptotics(config)
    reports = tuple(chow_weight_algebraic(config, r, report) for r in r_values)
    residuals = [abs(rep.futaki_residual) for rep in reports]
    fitted = max(
        (Fraction(rep.r) * abs(rep.futaki_residual) for rep in reports),
        default=Fraction(0),
    )
    decay_ok = all(residuals[i + 1] <= residuals[i] for i in range(len(residuals) - 1))
    return ChowSweep(reports=reports, fitted_C=fitted, decay_ok=decay_ok)


def operator_norm_check(
    config: TestConfiguration, k_max: int, report: AsymptoticReport | None = None
) -> dict:
    """Exact check that max |lambda|/k stays within the linear-growth budget."""
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    if report is None:
        report = fit_asymptotics(config)
    c_star = Fraction(0)
    for k in range(1, k_max + 1):
        sl = _slice(config, k)
        local = max(abs(sl.a_spectrum[0]), abs(sl.a_spectrum[-1])) / Fraction(k)
        c_star = max(c_star, local)
    budget = Fraction(max(abs(w) for w in config.weights)) + abs(report.F_0) + 1
    return {"C_star": c_star, "budget": budget, "pass": c_star <= budget}
