"""Numeric Fubini-Study geometry on parametrized projective cycles.

A cycle component is a polynomial chart u -> [F_0(u):...:F_m(u)] with a
multiplicity.  The Fubini-Study form is normalized so a line in any P^N has
total mass 1 (the chart density carries 1/pi per parameter); with that
choice the mass of a curve equals its degree, moment-matrix traces equal
cycle degrees, and the Bergman density integrates to the section count.

Monte Carlo integration draws chart parameters from an explicit sampling
law (default: the Fubini-Study law itself, which keeps importance weights
bounded for polynomial charts; complex Gaussians are available but heavy
tailed here).  Estimates are deterministic functions of (seed, sample
count): fixed batch size, one generator substream per (chart, batch),
pairwise-tree reduction, and a quarter-vs-full consistency check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import solve_triangular

from .polynomials import Polynomial

BATCH_SIZE = 4096
HERMITIAN_TOL = 1e-12
PIVOT_FLOOR = 1e-10


@dataclass(frozen=True)
class Chart:
    """Polynomial parametrization of one cycle component.

    components map C^d -> C^(m+1) and must not vanish simultaneously away
    from a measure-zero set.  law selects the sampling distribution of the
    parameters ("fs" or "gaussian").
    """

    params: tuple[str, ...]
    components: tuple[Polynomial, ...]
    multiplicity: int = 1
    law: str = "fs"

    def __post_init__(self):
        if not self.params:
            raise ValueError("chart needs at least one parameter")
        if self.multiplicity < 1:
            raise ValueError("multiplicity must be a positive integer")
        if self.law not in ("fs", "gaussian"):
            raise ValueError(f"unknown sampling law {self.law!r}")
        if all(not c for c in self.components):
            raise ValueError("all chart components are zero")
        for c in self.components:
            if c.nvars != len(self.params):
                raise ValueError("component arity does not match chart parameters")
        derivs = tuple(
            tuple(c.differentiate(i) for c in self.components)
            for i in range(len(self.params))
        )
        object.__setattr__(self, "_derivs", derivs)

    @property
    def dim(self) -> int:
        return len(self.params)

    @property
    def ambient_count(self) -> int:
        return len(self.components)

    def values(self, u: np.ndarray) -> np.ndarray:
        """Component values at a (B, d) batch; returns (B, m+1)."""
        return np.stack([c.evaluate_batch(u) for c in self.components], axis=1)

    def jacobian(self, u: np.ndarray) -> np.ndarray:
        """Holomorphic derivatives at a (B, d) batch; returns (B, d, m+1)."""
        rows = []
        for i in range(self.dim):
            rows.append(np.stack([p.evaluate_batch(u) for p in self._derivs[i]], axis=1))
        return np.stack(rows, axis=1)


# -- Fubini-Study density -----------------------------------------------------


def fs_density_values(z: np.ndarray, dz: np.ndarray) -> np.ndarray:
    """Pullback FS volume density of a holomorphic map from its jet.

    z has shape (B, N), dz shape (B, d, N); the result is
    (1/pi^d) det(g) with g_ij = <dz_i,dz_j>/S - <dz_i,z><z,dz_j>/S^2 and
    S = |z|^2.  Indeterminate points (S = 0) raise.
    """
    S = np.einsum("ba,ba->b", z, z.conj()).real
    if np.any(S <= 0):
        raise ValueError("indeterminate point: all components vanish")
    inner = np.einsum("bia,bja->bij", dz, dz.conj())
    mixed = np.einsum("bia,ba->bi", dz, z.conj())
    g = inner / S[:, None, None] - np.einsum(
        "bi,bj->bij", mixed, mixed.conj()
    ) / (S**2)[:, None, None]
    d = dz.shape[1]
    if d == 1:
        det = g[:, 0, 0].real
    else:
        det = np.linalg.det(g).real
    return det / math.pi**d


def fs_volume_density(chart: Chart, u: np.ndarray) -> np.ndarray:
    """FS volume density of the chart at a (B, d) batch of parameters."""
    u = np.asarray(u, dtype=complex)
    if u.ndim == 1:
        u = u[:, None]
    return fs_density_values(chart.values(u), chart.jacobian(u))


# -- sampling laws ------------------------------------------------------------


def _draw_fs(rng: np.random.Generator, size: int, d: int) -> tuple[np.ndarray, np.ndarray]:
    v = rng.random((size, d))
    theta = rng.random((size, d))
    r = np.sqrt(v / (1.0 - v))
    u = r * np.exp(2j * math.pi * theta)
    pdf = np.prod(1.0 / (math.pi * (1.0 + r**2) ** 2), axis=1)
    return u, pdf


def _draw_gaussian(rng: np.random.Generator, size: int, d: int) -> tuple[np.ndarray, np.ndarray]:
    w = rng.standard_normal((size, 2 * d))
    u = (w[:, :d] + 1j * w[:, d:]) / math.sqrt(2.0)
    sq = np.sum(np.abs(u) ** 2, axis=1)
    pdf = np.exp(-sq) / math.pi**d
    return u, pdf


def _draw_batch(
    chart: Chart, rng: np.random.Generator, size: int, scales: np.ndarray | None
) -> tuple[np.ndarray, np.ndarray]:
    d = chart.dim
    if chart.law == "gaussian":
        return _draw_gaussian(rng, size, d)
    u, pdf = _draw_fs(rng, size, d)
    if scales is None or len(scales) == 1:
        return u, pdf
    idx = rng.integers(0, len(scales), size)
    u = scales[idx][:, None] * u
    # exact mixture pdf: mean over scale components of prod_i R^2/(pi (R^2+|u_i|^2)^2)
    r2 = (np.abs(u) ** 2)[None, :, :]
    s2 = (scales**2)[:, None, None]
    comp = np.prod(s2 / (math.pi * (s2 + r2) ** 2), axis=2)
    return u, np.mean(comp, axis=0)


def flow_scale_set(t: float, spread: float) -> np.ndarray | None:
    """Log-spaced importance scales covering a one-parameter flow at time t.

    Under z -> e^(t lambda) z the integrand mass migrates to chart radii up
    to exp(|t| * spread); single-scale sampling would miss it silently.
    """
    reach = abs(t) * spread
    if reach <= 1.0:
        return None
    count = int(min(48, max(4, math.ceil(reach) + 1)))
    return np.exp(np.linspace(0.0, reach + math.log(2.0), count))


# -- deterministic batched Monte Carlo ----------------------------------------


@dataclass(frozen=True)
class MCResult:
    """A seeded Monte Carlo estimate with its reproducibility contract.

    value/stderr are floats or arrays of the integrand shape.  consistency
    compares the first quarter of the batches against the full run; the
    ratio is max |difference| / (5 stderr) and must stay at most 1.
    """

    value: object
    stderr: object
    n_samples: int
    batch_size: int
    seed: tuple[int, ...]
    consistency_ok: bool
    consistency_ratio: float


def _tree_sum(arrays: list) -> object:
    work = list(arrays)
    while len(work) > 1:
        paired = []
        for i in range(0, len(work) - 1, 2):
            paired.append(work[i] + work[i + 1])
        if len(work) % 2:
            paired.append(work[-1])
        work = paired
    return work[0]


def _seed_tuple(seed) -> tuple[int, ...]:
    if isinstance(seed, (int, np.integer)):
        seed = (int(seed),)
    seed = tuple(int(s) for s in seed)
    if any(s < 0 for s in seed):
        raise ValueError("seed entries must be non-negative integers")
    return seed


def _batch_rng(seed: tuple[int, ...], chart_index: int, batch: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=seed + (chart_index,), spawn_key=(batch,))
    return np.random.default_rng(ss)


def mc_charts(
    charts: Sequence[Chart],
    batch_mean: Callable[[Chart, np.ndarray, np.ndarray], np.ndarray],
    n_samples: int,
    seed,
    scales: np.ndarray | None = None,
) -> MCResult:
    """Multiplicity-weighted sum of per-chart Monte Carlo means.

    batch_mean(chart, u, pdf) must return the mean over the batch of the
    per-sample contribution (importance weight included).  Each (chart,
    batch) pair gets its own generator substream; sample counts are rounded
    up to full batches with a minimum of two batches so the batch-scatter
    stderr is defined.
    """
    if n_samples < 1:
        raise ValueError("need at least one sample")
    seed = _seed_tuple(seed)
    n_batches = max(2, -(-n_samples // BATCH_SIZE))
    totals = []
    variances = []
    quarters = []
    n_quarter = max(1, n_batches // 4)
    for ci, chart in enumerate(charts):
        means = []
        for b in range(n_batches):
            rng = _batch_rng(seed, ci, b)
            u, pdf = _draw_batch(chart, rng, BATCH_SIZE, scales)
            m = np.asarray(batch_mean(chart, u, pdf))
            if not np.all(np.isfinite(np.atleast_1d(m).view(float))):
                raise ValueError(
                    f"non-finite integrand in chart {ci}, batch {b} (seed {seed})"
                )
            means.append(m)
        mean_c = _tree_sum(means) / n_batches
        var_c = _tree_sum([np.abs(m - mean_c) ** 2 for m in means]) / (
            (n_batches - 1) * n_batches
        )
        totals.append(chart.multiplicity * mean_c)
        variances.append(chart.multiplicity**2 * var_c)
        quarters.append(chart.multiplicity * (_tree_sum(means[:n_quarter]) / n_quarter))
    value = _tree_sum(totals)
    stderr = np.sqrt(_tree_sum(variances))
    quarter = _tree_sum(quarters)
    diff = np.abs(quarter - value)
    with np.errstate(invalid="ignore"):
        ratio = np.where(diff > 0, diff / (5.0 * stderr + 1e-300), 0.0)
    ratio = float(np.max(ratio))
    scalar = np.ndim(value) == 0
    return MCResult(
        value=float(np.real(value)) if scalar else value,
        stderr=float(stderr) if scalar else stderr,
        n_samples=n_batches * BATCH_SIZE,
        batch_size=BATCH_SIZE,
        seed=seed,
        consistency_ok=ratio <= 1.0,
        consistency_ratio=ratio,
    )


def _base_weight(chart: Chart, u: np.ndarray, pdf: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Importance weight of the chart's own FS measure, plus ambient points."""
    z = chart.values(u)
    dz = chart.jacobian(u)
    dens = fs_density_values(z, dz)
    return dens / pdf, z


def fs_mass(charts: Sequence[Chart], n_samples: int, seed) -> MCResult:
    """Total FS mass of the cycle (equals its degree for curves)."""

    def mean(chart, u, pdf):
        w, _ = _base_weight(chart, u, pdf)
        return np.mean(w)

    return mc_charts(charts, mean, n_samples, seed)


def mc_integrate(
    charts: Sequence[Chart],
    integrand: Callable[[np.ndarray], np.ndarray],
    n_samples: int,
    seed,
) -> MCResult:
    """FS integral of a function of the normalized ambient coordinates."""

    def mean(chart, u, pdf):
        w, z = _base_weight(chart, u, pdf)
        zhat = z / np.linalg.norm(z, axis=1, keepdims=True)
        return np.mean(w * np.asarray(integrand(zhat)))

    return mc_charts(charts, mean, n_samples, seed)


# -- monomial frames ----------------------------------------------------------


def monomial_values(exponents: np.ndarray, zhat: np.ndarray) -> np.ndarray:
    """Values of the degree-k monomial list at normalized points: (B, D)."""
    B, nv = zhat.shape
    out = np.ones((B, exponents.shape[0]), dtype=complex)
    for v in range(nv):
        top = int(exponents[:, v].max(initial=0))
        powers = np.ones((B, top + 1), dtype=complex)
        for e in range(1, top + 1):
            powers[:, e] = powers[:, e - 1] * zhat[:, v]
        out *= powers[:, exponents[:, v]]
    return out


def monomial_jet(exponents: np.ndarray, zhat: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Monomial values and per-variable derivatives at normalized points.

    Returns (values (B, D), derivs (B, nv, D)) with derivs[b, v, a] the
    partial of monomial a by ambient variable v at zhat[b].
    """
    B, nv = zhat.shape
    D = exponents.shape[0]
    values = np.ones((B, D), dtype=complex)
    per_var = []
    for v in range(nv):
        top = int(exponents[:, v].max(initial=0))
        powers = np.ones((B, top + 2), dtype=complex)
        for e in range(1, top + 2):
            powers[:, e] = powers[:, e - 1] * zhat[:, v]
        values *= powers[:, exponents[:, v]]
        per_var.append(powers)
    derivs = np.empty((B, nv, D), dtype=complex)
    for v in range(nv):
        exp_v = exponents[:, v]
        lowered = np.ones((B, D), dtype=complex)
        for w in range(nv):
            idx = exp_v - 1 if w == v else exponents[:, w]
            idx = np.where(idx < 0, 0, idx)
            lowered *= per_var[w][:, idx]
        derivs[:, v, :] = exp_v[None, :] * lowered
        derivs[:, v, exp_v == 0] = 0.0
    return values, derivs


def gram_matrix(
    charts: Sequence[Chart],
    exponents: np.ndarray,
    k: int,
    n_samples: int,
    seed,
) -> tuple[np.ndarray, MCResult]:
    """Section inner products <s_a, s_b> over the cycle, FS metric on O(k).

    The integrand m_a(z) conj(m_b(z)) / |z|^(2k) is evaluated on normalized
    points, so it is bounded and the estimate is Hermitian by construction.
    """
    exponents = np.asarray(exponents, dtype=int)

    def mean(chart, u, pdf):
        w, z = _base_weight(chart, u, pdf)
        zhat = z / np.linalg.norm(z, axis=1, keepdims=True)
        m = monomial_values(exponents, zhat)
        return np.einsum("b,ba,bc->ac", w, m, m.conj()) / len(w)

    result = mc_charts(charts, mean, n_samples, seed)
    H = hermitian_part(result.value)
    return H, result


def hermitian_part(matrix: np.ndarray, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Symmetrized matrix; rejects asymmetry beyond tol (relative)."""
    residual = np.max(np.abs(matrix - matrix.conj().T))
    scale = max(1.0, float(np.max(np.abs(matrix))))
    if residual > tol * scale:
        raise ValueError(f"matrix is not Hermitian: residual {residual:.3e}")
    return (matrix + matrix.conj().T) / 2.0


# -- equivariant orthonormalization -------------------------------------------


@dataclass(frozen=True)
class GSResult:
    """Weight-compatible orthonormalization M with M G M* = I.

    blocks lists (weight, size) in ascending weight order; matrix is
    lower triangular (hence block-lower-triangular for any grouping) with
    positive real diagonal, which pins the result uniquely per block up to
    the residual block-unitary freedom of the problem itself.
    """

    blocks: tuple[tuple[int, int], ...]
    matrix: np.ndarray


def equivariant_gram_schmidt(weights: Sequence, gram: np.ndarray) -> GSResult:
    """Triangular orthonormalization respecting an ascending weight grouping.

    gram must be positive definite Hermitian with rows/columns ordered by
    ascending weight.  The Cholesky factor L of G gives M = L^(-1), which is
    the unique lower-triangular change of basis with positive diagonal
    taking G to the identity.
    """
    weights = list(weights)
    G = np.asarray(gram, dtype=complex)
    if G.shape[0] != G.shape[1] or G.shape[0] != len(weights):
        raise ValueError("gram matrix shape does not match the weight list")
    if any(weights[i] > weights[i + 1] for i in range(len(weights) - 1)):
        raise ValueError("weights must be ascending (group vectors by weight first)")
    G = hermitian_part(G, tol=1e-9)
    try:
        L = np.linalg.cholesky(G)
    except np.linalg.LinAlgError as exc:
        raise ValueError("gram matrix is not positive definite") from exc
    pivots = np.real(np.diag(L)) ** 2
    if np.min(pivots) < PIVOT_FLOOR * float(np.max(np.real(np.diag(G)))):
        raise ValueError(
            "gram matrix is numerically singular: basis dependent on cycle"
        )
    M = solve_triangular(L, np.eye(len(weights), dtype=complex), lower=True)
    blocks = []
    i = 0
    while i < len(weights):
        j = i
        while j < len(weights) and weights[j] == weights[i]:
            j += 1
        blocks.append((weights[i], j - i))
        i = j
    return GSResult(blocks=tuple(blocks), matrix=M)


# -- embedded cycles (Bergman geometry) ---------------------------------------


def _embedded_jet(
    chart: Chart, u: np.ndarray, gs_matrix: np.ndarray, exponents: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Jet of the orthonormal-section embedding along the chart.

    Returns (W, dW, norm) where W = M m(zhat) (B, D) and dW (B, d, D) uses
    the exact relation dW_true = |F|^(k-1) * dW, W_true = |F|^k * W; the
    common |F| powers cancel in projective quantities, and the FS density of
    the true embedding equals fs_density_values(W, dW) / |F|^(2d).
    """
    z = chart.values(u)
    dz = chart.jacobian(u)
    nrm = np.linalg.norm(z, axis=1)
    if np.any(nrm == 0):
        raise ValueError("indeterminate point: all components vanish")
    zhat = z / nrm[:, None]
    m, dm = monomial_jet(exponents, zhat)
    W = m @ gs_matrix.T
    dW = np.einsum("biv,bvD->biD", dz, dm) @ gs_matrix.T
    return W, dW, nrm


def _flowed(
    W: np.ndarray, dW: np.ndarray, lambdas: np.ndarray | None, t: float
) -> tuple[np.ndarray, np.ndarray]:
    if lambdas is None or t == 0.0:
        return W, dW
    factors = np.exp(t * lambdas)
    return W * factors[None, :], dW * factors[None, None, :]


def _stabilized(W: np.ndarray, dW: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # common per-sample rescale: projectively immaterial, prevents overflow
    peak = np.max(np.abs(W), axis=1)
    if np.any(peak == 0):
        raise ValueError("embedded point vanished: sections do not span here")
    return W / peak[:, None], dW / peak[:, None, None]


def moment_matrix(
    charts: Sequence[Chart],
    gs_matrix: np.ndarray,
    exponents: np.ndarray,
    n_samples: int,
    seed,
    lambdas: np.ndarray | None = None,
    t: float = 0.0,
) -> tuple[np.ndarray, MCResult]:
    """Moment matrix int z_a conj(z_b)/|z|^2 over the embedded cycle image.

    The measure is the FS volume of the embedding by the orthonormal
    sections (optionally flowed by exp(t lambda)); the trace estimates the
    image degree.
    """
    exponents = np.asarray(exponents, dtype=int)
    scales = None
    if lambdas is not None and t != 0.0:
        scales = flow_scale_set(t, float(np.max(lambdas) - np.min(lambdas)))

    def mean(chart, u, pdf):
        W, dW, nrm = _embedded_jet(chart, u, gs_matrix, exponents)
        W, dW = _flowed(W, dW, lambdas, t)
        W, dW = _stabilized(W, dW)
        dens = fs_density_values(W, dW) / nrm ** (2 * chart.dim)
        V = W / np.linalg.norm(W, axis=1, keepdims=True)
        w = dens / pdf
        return np.einsum("b,ba,bc->ac", w, V, V.conj()) / len(w)

    result = mc_charts(charts, mean, n_samples, seed, scales=scales)
    return hermitian_part(result.value), result


def energy_derivative(moment: np.ndarray, generator: np.ndarray, n: int) -> float:
    """(n+1) Tr((B + B*) M): the energy slope at flow time zero.

    moment is a moment matrix of the n-dimensional cycle and generator the
    (diagonal, traceless) flow generator in the same section frame.
    """
    B = np.asarray(generator, dtype=complex)
    M = np.asarray(moment, dtype=complex)
    if B.shape != M.shape:
        raise ValueError("shape mismatch between generator and moment matrix")
    return float((n + 1) * np.trace((B + B.conj().T) @ M).real)


def energy_derivative_at_t(
    charts: Sequence[Chart],
    gs_matrix: np.ndarray,
    exponents: np.ndarray,
    lambdas: np.ndarray,
    t: float,
    n: int,
    n_samples: int,
    seed,
) -> MCResult:
    """Energy slope (n+1) int z*(B+B*)z/|z|^2 over the flowed embedded cycle.

    B is the diagonal traceless generator diag(lambdas).  Sampling uses a
    scale mixture sized to the flow so the migrating mass is captured.
    """
    exponents = np.asarray(exponents, dtype=int)
    lambdas = np.asarray(lambdas, dtype=float)
    scales = flow_scale_set(t, float(np.max(lambdas) - np.min(lambdas)))

    def mean(chart, u, pdf):
        W, dW, nrm = _embedded_jet(chart, u, gs_matrix, exponents)
        W, dW = _flowed(W, dW, lambdas, t)
        W, dW = _stabilized(W, dW)
        dens = fs_density_values(W, dW) / nrm ** (2 * chart.dim)
        V2 = np.abs(W) ** 2
        h = (V2 @ (2.0 * lambdas)) / np.sum(V2, axis=1)
        return np.mean((n + 1) * (dens / pdf) * h)

    return mc_charts(charts, mean, n_samples, seed, scales=scales)


def bergman_density(
    gs_matrix: np.ndarray, exponents: np.ndarray, zhat: np.ndarray
) -> np.ndarray:
    """Density of states sum |s_a(x)|^2 / |z|^(2k) at normalized points."""
    exponents = np.asarray(exponents, dtype=int)
    zhat = np.asarray(zhat, dtype=complex)
    W = monomial_values(exponents, zhat) @ gs_matrix.T
    return np.sum(np.abs(W) ** 2, axis=1)


def n2_integral(
    charts: Sequence[Chart],
    lambdas: Sequence[float],
    n_samples: int,
    seed,
) -> MCResult:
    """Centered second moment of the Hamiltonian over the central cycle.

    h(z) = sum lambda_a |z_a|^2 / |z|^2; the mean reference h-hat is taken
    over the multiplicity-weighted cycle so the result is invariant under
    lambda -> lambda + c.  Returns int (h - h_hat)^2 with its jackknife
    stderr.
    """
    lam = np.asarray(lambdas, dtype=float)
    seed_t = _seed_tuple(seed)
    n_batches = max(2, -(-n_samples // BATCH_SIZE))

    # accumulate per-batch triples (mass, int h, int h^2) per chart
    triples = np.zeros((len(charts), n_batches, 3))
    for ci, chart in enumerate(charts):
        if chart.ambient_count != len(lam):
            raise ValueError("diagonal length does not match ambient coordinates")
        for b in range(n_batches):
            rng = _batch_rng(seed_t, ci, b)
            u, pdf = _draw_batch(chart, rng, BATCH_SIZE, None)
            w, z = _base_weight(chart, u, pdf)
            sq = np.abs(z) ** 2
            h = (sq @ lam) / np.sum(sq, axis=1)
            row = np.array([np.mean(w), np.mean(w * h), np.mean(w * h * h)])
            if not np.all(np.isfinite(row)):
                raise ValueError(f"non-finite integrand in chart {ci}, batch {b}")
            triples[ci, b] = chart.multiplicity * row

    def statistic(mask: np.ndarray) -> float:
        total = triples[:, mask, :].mean(axis=1).sum(axis=0)
        mass, m1, m2 = total
        return m2 - m1 * m1 / mass

    full = statistic(np.ones(n_batches, dtype=bool))
    jack = []
    for b in range(n_batches):
        mask = np.ones(n_batches, dtype=bool)
        mask[b] = False
        jack.append(statistic(mask))
    jack = np.array(jack)
    stderr = math.sqrt(max(0.0, (n_batches - 1) / n_batches * np.sum((jack - np.mean(jack)) ** 2)))
    n_quarter = max(1, n_batches // 4)
    mask_q = np.zeros(n_batches, dtype=bool)
    mask_q[:n_quarter] = True
    quarter = statistic(mask_q)
    diff = abs(float(quarter) - float(full))
    ratio = diff / (5.0 * stderr + 1e-300) if diff > 0 else 0.0
    return MCResult(
        value=float(full),
        stderr=float(stderr),
        n_samples=n_batches * BATCH_SIZE,
        batch_size=BATCH_SIZE,
        seed=seed_t,
        consistency_ok=bool(ratio <= 1.0),
        consistency_ratio=float(ratio),
    )
