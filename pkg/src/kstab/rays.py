"""Bergman geodesic rays, envelopes, and energy diagnostics.

A test configuration plus a level k give a frame of degree-k sections,
orthonormalized over the cycle compatibly with the torus weights.  Flowing
the frame by exp(t A_k) produces the ray of potentials

    phi(t;k)(x) = (1/k) [ log sum_a exp(2 t lambda_a) |s_a(x)|^2  -  n log k ]

evaluated here on finite point grids.  The module builds those grids,
assembles the shift-and-sup envelope over a ladder of levels, and computes
the energy-slope diagnostics (Chow weight limit, Monge-Ampere mass budget,
two-level comparison bounds, sup/osc growth).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.special import polygamma

from .asymptotics import AsymptoticReport, chow_weight_algebraic, futaki_f
from .geometry import (
    Chart,
    GSResult,
    MCResult,
    energy_derivative,
    energy_derivative_at_t,
    equivariant_gram_schmidt,
    gram_matrix,
    moment_matrix,
    monomial_values,
)
from .spectra import TestConfiguration, graded_slice

PARAM_VALUES = (
    Fraction(-2),
    Fraction(-1),
    Fraction(-1, 2),
    Fraction(0),
    Fraction(1, 2),
    Fraction(1),
    Fraction(2),
)


# -- section frames ------------------------------------------------------------


@dataclass(frozen=True)
class SectionFrame:
    """Orthonormal degree-k section frame over the cycle, weight ordered.

    exponents lists the standard monomials of the configuration at level k
    in ascending weight order; matrix maps monomial coefficients to the
    orthonormal frame; lambdas is the traceless weight spectrum acting
    diagonally on that frame.
    """

    k: int
    exponents: np.ndarray
    b_weights: tuple[int, ...]
    lambdas: np.ndarray
    matrix: np.ndarray
    gs: GSResult
    gram: np.ndarray
    gram_mc: MCResult

    @property
    def lambda_min(self) -> float:
        return float(np.min(self.lambdas))

    @property
    def lambda_abs_max(self) -> float:
        return float(np.max(np.abs(self.lambdas)))


def section_frame(
    config: TestConfiguration,
    fiber: Sequence[Chart],
    k: int,
    n_samples: int,
    seed: int,
) -> SectionFrame:
    """Monte Carlo Gram matrix plus equivariant orthonormalization at level k."""
    sl = graded_slice(config, k)
    exponents = np.array(sl.monomials, dtype=int)
    gram, mc = gram_matrix(fiber, exponents, k, n_samples, (seed, k, 1))
    gs = equivariant_gram_schmidt(sl.b_spectrum, gram)
    lambdas = np.array([float(a) for a in sl.a_spectrum])
    return SectionFrame(
        k=k,
        exponents=exponents,
        b_weights=sl.b_spectrum,
        lambdas=lambdas,
        matrix=gs.matrix,
        gs=gs,
        gram=gram,
        gram_mc=mc,
    )


# -- point grids ---------------------------------------------------------------


@dataclass(frozen=True)
class PointGrid:
    """Deduplicated evaluation points on X with a neighbor structure.

    zhat rows are unit representatives; neighbors[i] always contains i and
    the points adjacent in the originating chart lattice (coordinate points
    are isolated), which drives the grid surrogate of the upper
    semicontinuous regularization.
    """

    labels: tuple[str, ...]
    zhat: np.ndarray
    neighbors: tuple[tuple[int, ...], ...]

    def __len__(self) -> int:
        return len(self.labels)


def _point_key(z: np.ndarray) -> tuple:
    zh = z / np.linalg.norm(z)
    for comp in zh:
        if abs(comp) > 1e-9:
            zh = zh * (comp.conjugate() / abs(comp))
            break
    return tuple((round(c.real, 12), round(c.imag, 12)) for c in zh)


def grid_points(
    config: TestConfiguration,
    fiber: Sequence[Chart],
    param_values: Sequence[Fraction] = PARAM_VALUES,
) -> PointGrid:
    """Chart lattice points plus the coordinate points lying on X.

    The lattice takes every chart parameter through param_values; the
    torus-fixed coordinate points [0:...:1:...:0] are appended when every
    generator vanishes there, since extremal ray slopes occur at fixed
    points that charts may miss.
    """
    labels: list[str] = []
    reps: list[np.ndarray] = []
    adjacency: list[set[int]] = []
    index_of: dict[tuple, int] = {}

    def add(label: str, z: np.ndarray) -> int | None:
        nrm = np.linalg.norm(z)
        if nrm == 0:
            return None
        key = _point_key(z)
        if key in index_of:
            return index_of[key]
        index_of[key] = len(labels)
        labels.append(label)
        reps.append(z / nrm)
        adjacency.append(set())
        return index_of[key]

    values = list(param_values)
    for ci, chart in enumerate(fiber):
        d = chart.dim
        shape = (len(values),) * d
        slots = np.full(shape, -1, dtype=int)
        for multi in np.ndindex(shape):
            point = tuple(values[j] for j in multi)
            z = np.array(
                [complex(c.evaluate_exact(point)) for c in chart.components]
            )
            assign = ";".join(
                f"{p}={v}" for p, v in zip(chart.params, point)
            )
            idx = add(f"{ci}:{assign}", z)
            slots[multi] = -1 if idx is None else idx
        for multi in np.ndindex(shape):
            here = int(slots[multi])
            if here < 0:
                continue
            for axis in range(d):
                for step in (-1, 1):
                    probe = list(multi)
                    probe[axis] += step
                    if 0 <= probe[axis] < len(values):
                        other = int(slots[tuple(probe)])
                        if other >= 0 and other != here:
                            adjacency[here].add(other)
                            adjacency[other].add(here)

    nv = len(config.variables)
    for j, name in enumerate(config.variables):
        unit = tuple(Fraction(1 if i == j else 0) for i in range(nv))
        if all(g.evaluate_exact(unit) == 0 for g in config.generators):
            z = np.zeros(nv, dtype=complex)
            z[j] = 1.0
            add(f"e:{name}", z)

    neighbors = tuple(
        tuple(sorted(adjacency[i] | {i})) for i in range(len(labels))
    )
    return PointGrid(labels=tuple(labels), zhat=np.array(reps), neighbors=neighbors)


# -- ray potentials ------------------------------------------------------------


def ray_log_terms(frame: SectionFrame, zhat: np.ndarray) -> np.ndarray:
    """2 log |s_a(x)| per point and frame section, -inf where a section vanishes."""
    W = monomial_values(frame.exponents, np.asarray(zhat, dtype=complex)) @ frame.matrix.T
    sq = np.abs(W) ** 2
    if np.any(np.all(sq == 0, axis=1)):
        raise ValueError("indeterminate point: every section vanishes there")
    with np.errstate(divide="ignore"):
        return np.log(sq)


def _phi_from_terms(
    log_terms: np.ndarray, lambdas: np.ndarray, k: int, n: int, t: float
) -> np.ndarray:
    shifted = log_terms + 2.0 * t * lambdas[None, :]
    lse = np.logaddexp.reduce(shifted, axis=1)
    return (lse - n * math.log(k)) / k


def ray_potential(frame: SectionFrame, t: float, zhat: np.ndarray, n: int) -> np.ndarray:
    """phi(t;k) at normalized ambient points (log-sum-exp, stable in t)."""
    if t > 0:
        raise ValueError("ray potentials are defined for t <= 0")
    return _phi_from_terms(ray_log_terms(frame, zhat), frame.lambdas, frame.k, n, t)


# -- the ray grid and envelope -------------------------------------------------


@dataclass(frozen=True)
class RayGrid:
    """Ray potentials on a (level, time, point) grid with the envelope.

    phi is the raw potential, shifted adds c_k - eps_k t, psi_scale records
    the section-frame rescaling k (phi(t;k) - phi(0;k)), envelope is the
    running grid max over levels followed by a neighbor local max (the grid
    surrogate of upper-semicontinuous regularization).  attaining holds the
    level index winning at each (t, x) before that local max.
    """

    n: int
    degree: float
    k_set: tuple[int, ...]
    t_grid: tuple[float, ...]
    labels: tuple[str, ...]
    points: PointGrid
    phi: np.ndarray
    phi_zero: np.ndarray
    psi_scale: np.ndarray
    c_k: tuple[float, ...]
    eps_k: tuple[float, ...]
    shifted: np.ndarray
    envelope: np.ndarray
    attaining: np.ndarray
    lambda_min_per_k: tuple[float, ...]
    lambda_abs_per_k: tuple[float, ...]
    strict_decrease: bool
    boundary_continuity: float

    @property
    def sup_slope(self) -> np.ndarray:
        """sup_x phi(t;k) / (2|t|) per (k, t)."""
        sup = np.max(self.phi, axis=2)
        return sup / (2.0 * np.abs(np.array(self.t_grid))[None, :])

    @property
    def osc(self) -> np.ndarray:
        """Grid oscillation sup - inf of phi(t;k) per (k, t)."""
        return np.max(self.phi, axis=2) - np.min(self.phi, axis=2)


def envelope(
    frames: Sequence[SectionFrame],
    t_grid: Sequence[float],
    points: PointGrid,
    n: int,
    degree: float,
) -> RayGrid:
    """Shift-and-sup envelope over an ascending ladder of at least 3 levels."""
    if len(frames) < 3:
        raise ValueError("need at least three levels for an envelope")
    return build_ray_grid(frames, t_grid, points, n, degree)


def build_ray_grid(
    frames: Sequence[SectionFrame],
    t_grid: Sequence[float],
    points: PointGrid,
    n: int,
    degree: float,
) -> RayGrid:
    """Ray potentials, shifts, and the running-sup envelope on a grid.

    Shifts use eps_k = k^(-1/2) and c_k = 2 C sum_{j>=k} j^(-2) with C
    calibrated from the measured boundary gaps e_j = max_x |phi(0;j) -
    phi(0;k_max)|; this makes phi(0;k) + c_k strictly decreasing in k
    whenever the gaps behave.  A failure of that monotonicity is recorded
    in strict_decrease, not raised.
    """
    frames = sorted(frames, key=lambda f: f.k)
    k_set = tuple(f.k for f in frames)
    if not k_set:
        raise ValueError("need at least one level")
    if any(k_set[i] >= k_set[i + 1] for i in range(len(k_set) - 1)):
        raise ValueError("levels must be distinct")
    t_values = tuple(float(t) for t in t_grid)
    if any(t >= 0 for t in t_values):
        raise ValueError("t grid must be strictly negative (boundary is t=0)")

    terms = [ray_log_terms(f, points.zhat) for f in frames]
    phi = np.array(
        [
            [_phi_from_terms(terms[i], f.lambdas, f.k, n, t) for t in t_values]
            for i, f in enumerate(frames)
        ]
    )
    phi_zero = np.array(
        [_phi_from_terms(terms[i], f.lambdas, f.k, n, 0.0) for i, f in enumerate(frames)]
    )
    psi = np.array(
        [f.k * (phi[i] - phi_zero[i][None, :]) for i, f in enumerate(frames)]
    )

    gaps = [float(np.max(np.abs(phi_zero[i] - phi_zero[-1]))) for i in range(len(frames))]
    big_c = max(k * k * e for k, e in zip(k_set, gaps))
    c_k = tuple(2.0 * big_c * float(polygamma(1, k)) for k in k_set)
    eps_k = tuple(1.0 / math.sqrt(k) for k in k_set)

    t_arr = np.array(t_values)
    shifted = np.array(
        [
            phi[i] + c_k[i] - eps_k[i] * t_arr[:, None]
            for i in range(len(frames))
        ]
    )
    raw_env = np.max(shifted, axis=0)
    attaining = np.array(k_set, dtype=int)[np.argmax(shifted, axis=0)]
    env = raw_env.copy()
    for p, nbrs in enumerate(points.neighbors):
        env[:, p] = np.max(raw_env[:, list(nbrs)], axis=1)

    shifted_zero = phi_zero + np.array(c_k)[:, None]
    strict = bool(
        np.all(shifted_zero[:-1] - shifted_zero[1:] > 0.0)
    )
    t_near = int(np.argmax(t_arr))
    boundary = float(np.max(np.abs(env[t_near] - phi_zero[-1])))

    return RayGrid(
        n=n,
        degree=float(degree),
        k_set=k_set,
        t_grid=t_values,
        labels=points.labels,
        points=points,
        phi=phi,
        phi_zero=phi_zero,
        psi_scale=psi,
        c_k=c_k,
        eps_k=eps_k,
        shifted=shifted,
        envelope=env,
        attaining=attaining,
        lambda_min_per_k=tuple(f.lambda_min for f in frames),
        lambda_abs_per_k=tuple(f.lambda_abs_max for f in frames),
        strict_decrease=strict,
        boundary_continuity=boundary,
    )


def geometric_t_grid(t_near: float = -0.1, t_far: float = -40.0, steps: int = 25) -> tuple[float, ...]:
    """Geometrically spaced negative times from t_near toward t_far."""
    if not (t_far < t_near < 0):
        raise ValueError("need t_far < t_near < 0")
    if steps < 2:
        raise ValueError("need at least two grid times")
    ratio = (t_far / t_near) ** (1.0 / (steps - 1))
    return tuple(t_near * ratio**i for i in range(steps))


# -- diagnostics on the grid ---------------------------------------------------


def sup_osc_report(grid: RayGrid) -> list[dict]:
    """Per (k, t) sup/inf/osc with the two-sided sup band.

    band_low is the asymptotic approach value 2|t||lambda^(k)|/k minus the
    density correction (n log k + log degree)/k; band_high adds the grid
    maximum of phi(0;k), which bounds the Bergman term from above.
    """
    out = []
    sup = np.max(grid.phi, axis=2)
    inf = np.min(grid.phi, axis=2)
    for i, k in enumerate(grid.k_set):
        lam = abs(grid.lambda_min_per_k[i])
        phi0_max = float(np.max(grid.phi_zero[i]))
        for j, t in enumerate(grid.t_grid):
            two_t = 2.0 * abs(t)
            out.append(
                {
                    "k": k,
                    "t": t,
                    "sup": float(sup[i, j]),
                    "inf": float(inf[i, j]),
                    "osc": float(sup[i, j] - inf[i, j]),
                    "sup_over_2t": float(sup[i, j] / two_t),
                    "band_low": lam / k
                    - (grid.n * math.log(k) + math.log(max(grid.degree, 1.0)))
                    / (two_t * k),
                    "band_high": lam / k + max(0.0, phi0_max) / two_t,
                }
            )
    return out


def slope_report(grid: RayGrid) -> dict:
    """Finite-difference |dphi/dt| against the 2 max|lambda|/k + eps_k bound."""
    order = np.argsort(grid.t_grid)
    t = np.array(grid.t_grid)[order]
    worst = -math.inf
    ok = True
    for i, k in enumerate(grid.k_set):
        bound = 2.0 * grid.lambda_abs_per_k[i] / k + 1.0 / math.sqrt(k)
        ph = grid.phi[i][order]
        slopes = np.abs(np.diff(ph, axis=0) / np.diff(t)[:, None])
        excess = float(np.max(slopes) - bound)
        worst = max(worst, excess)
        ok = ok and excess <= 0.0
    return {"max_excess": worst, "ok": ok}


def convexity_report(grid: RayGrid, tol: float = 1e-9) -> dict:
    """Divided-difference convexity of t -> phi(t;k) at each grid point."""
    order = np.argsort(grid.t_grid)
    t = np.array(grid.t_grid)[order]
    min_gap = math.inf
    for i in range(len(grid.k_set)):
        ph = grid.phi[i][order]
        slopes = np.diff(ph, axis=0) / np.diff(t)[:, None]
        if slopes.shape[0] >= 2:
            min_gap = min(min_gap, float(np.min(np.diff(slopes, axis=0))))
    return {"min_gap": min_gap, "ok": min_gap >= -tol}


# -- energy diagnostics --------------------------------------------------------


@dataclass(frozen=True)
class EnergyReport:
    """Monge-Ampere mass budget of the level-k ray from boundary slopes.

    mass = (edot_zero - edot_minus_inf) / ((n+1) k^(n+1)) with edot_zero the
    sampled energy slope at t=0 and edot_minus_inf = -mu(Z_k, A_k) exact;
    convexity of the energy makes the true mass nonnegative, so estimates
    below -5 stderr indicate a bug, not geometry.
    """

    k: int
    edot_zero: float
    edot_minus_inf: Fraction
    mass: float
    mass_times_k: float
    mass_stderr: float
    moment_mc: MCResult


def ma_mass(
    config: TestConfiguration,
    fiber: Sequence[Chart],
    frame: SectionFrame,
    report: AsymptoticReport,
    n_samples: int,
    seed: int,
) -> EnergyReport:
    """Mass budget at level k: sampled boundary slope plus exact Chow weight."""
    k = frame.k
    n = report.n
    M, mc = moment_matrix(
        fiber, frame.matrix, frame.exponents, n_samples, (seed, k, 5)
    )
    A = np.diag(frame.lambdas)
    edot_zero = energy_derivative(M, A, n)
    mu = chow_weight_algebraic(config, k, report).mu
    scale = (n + 1) * k ** (n + 1)
    mass = (edot_zero + float(mu)) / scale
    diag_err = np.real(np.diag(np.asarray(mc.stderr)))
    edot_err = 2.0 * (n + 1) * math.sqrt(float(np.sum(frame.lambdas**2 * diag_err**2)))
    return EnergyReport(
        k=k,
        edot_zero=edot_zero,
        edot_minus_inf=-mu,
        mass=mass,
        mass_times_k=mass * k,
        mass_stderr=edot_err / scale,
        moment_mc=mc,
    )


@dataclass(frozen=True)
class ChowNumericReport:
    """Flow-limit estimate of the Chow weight mu(Z_k, A_k).

    value = -Edot(t_probe); gap compares against the doubled probe time (a
    convergence proxy); convex_ok checks the slope is still descending from
    t_probe/2, the direction convexity forces.
    """

    k: int
    t_probe: float
    value: float
    stderr: float
    gap: float
    convex_ok: bool
    estimates: dict


def chow_weight_numeric(
    fiber: Sequence[Chart],
    frame: SectionFrame,
    t_probe: float,
    n: int,
    n_samples: int,
    seed: int,
) -> ChowNumericReport:
    """-Edot at a deep probe time along the level-k Bergman ray."""
    if t_probe > -10:
        raise ValueError("probe time must be at most -10 for a usable limit")
    estimates = {}
    for slot, (tag, t) in enumerate(
        (("probe", t_probe), ("double", 2 * t_probe), ("half", t_probe / 2))
    ):
        estimates[tag] = energy_derivative_at_t(
            fiber,
            frame.matrix,
            frame.exponents,
            frame.lambdas,
            t,
            n,
            n_samples,
            (seed, frame.k, 2, slot),
        )
    e_probe = estimates["probe"]
    e_half = estimates["half"]
    gap = abs(e_probe.value - estimates["double"].value)
    convex_ok = (-e_probe.value) >= (-e_half.value) - 3.0 * (
        e_probe.stderr + e_half.stderr
    )
    return ChowNumericReport(
        k=frame.k,
        t_probe=t_probe,
        value=-e_probe.value,
        stderr=e_probe.stderr,
        gap=gap,
        convex_ok=convex_ok,
        estimates=estimates,
    )


@dataclass(frozen=True)
class ComparisonReport:
    """Two-level ray comparison g(t,x) = [phi_l + 2t f(l)] - [phi_k + 2t f(k)].

    Boundedness of g is the content of the level-comparison lemma; ratio
    compares max|g| over deep times [-40,-20] against [-20,0) as a linear
    growth detector (bounded rays keep it near 1).
    """

    k: int
    l: int
    f_k: Fraction
    f_l: Fraction
    max_abs: float
    ratio: float
    bounded_ok: bool


def ray_comparison(
    config: TestConfiguration,
    frame_k: SectionFrame,
    frame_l: SectionFrame,
    t_grid: Sequence[float],
    points: PointGrid,
    report: AsymptoticReport,
) -> ComparisonReport:
    if frame_k.k >= frame_l.k:
        raise ValueError("pass the lower level first")
    n = report.n
    f_k = futaki_f(config, frame_k.k, report)
    f_l = futaki_f(config, frame_l.k, report)
    terms_k = ray_log_terms(frame_k, points.zhat)
    terms_l = ray_log_terms(frame_l, points.zhat)
    far = 0.0
    near = 0.0
    overall = 0.0
    for t in t_grid:
        t = float(t)
        g = (
            _phi_from_terms(terms_l, frame_l.lambdas, frame_l.k, n, t)
            + 2 * t * float(f_l)
        ) - (
            _phi_from_terms(terms_k, frame_k.lambdas, frame_k.k, n, t)
            + 2 * t * float(f_k)
        )
        peak = float(np.max(np.abs(g)))
        overall = max(overall, peak)
        if -40.0 <= t <= -20.0:
            far = max(far, peak)
        elif -20.0 < t <= 0.0:
            near = max(near, peak)
    if near == 0.0:
        ratio = 1.0 if far == 0.0 else math.inf
    else:
        ratio = far / near
    return ComparisonReport(
        k=frame_k.k,
        l=frame_l.k,
        f_k=f_k,
        f_l=f_l,
        max_abs=overall,
        ratio=ratio,
        bounded_ok=ratio <= 1.2,
    )
