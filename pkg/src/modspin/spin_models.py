"""One-dimensional spin models and exact lattice distributions.

Four model families over configurations ``sigma : {1..n} -> {-1,+1}`` (or
nearest-neighbour walks on Z^d):

* ``CURIE_WEISS`` -- weights ``exp(alpha*M + beta*M^2/(2n))`` with
  ``M = sum sigma(i)``; ``beta = 0`` is an i.i.d. spin chain.
* ``ISING``       -- weights ``exp(alpha*M + beta * sum sigma(i)sigma(i+1))``
  (free boundary).
* ``MIXED``       -- weights ``exp(beta * sum sigma(i)sigma(i+1)
  + gamma*M^2/(2n))``: local Ising coupling plus a global quadratic term.
* ``WALK``        -- simple symmetric walk on Z^d, d in {1,2,3}; the lattice
  variable is the endpoint after n steps.

The closed transfer-matrix forms give the Ising partition function and
Laplace transform for any (complex) field; every distribution is also
available as an exact probability mass function computed in log-space, plus
a 2^n brute-force oracle and exact samplers.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field, replace
from typing import IO

import numpy as np
from scipy.special import gammaln

from .numerics import log_sum_exp

__all__ = [
    "ModelKind",
    "ModelSpec",
    "TransferData",
    "LatticePmf",
    "SpinConfiguration",
    "BranchError",
    "IsingModParams",
    "transfer_eigen",
    "partition_function",
    "ising_laplace",
    "ising_mod_params",
    "ising_alpha0_mod_params",
    "cw_magnetization_pmf",
    "ising_magnetization_pmf",
    "random_walk_pmf",
    "brute_force_pmf",
    "sample_configuration",
    "write_pmf_csv",
    "read_pmf_csv",
]

ISING_PMF_CAP = 20_000
BRUTE_FORCE_CAP = 20          # 2^n enumeration
WALK_CAPS = {1: 1_000_000, 2: 500, 3: 80}
CONDITIONAL_SAMPLE_CAP = 2_000


class ModelKind(enum.Enum):
    CURIE_WEISS = "curie_weiss"
    ISING = "ising"
    MIXED = "mixed"
    WALK = "walk"


@dataclass(frozen=True)
class ModelSpec:
    """A model family with its parameters.

    ``alpha`` is the external field, ``beta >= 0`` the coupling, ``gamma``
    the global quadratic coefficient of the mixed model (sub-critical for
    ``gamma < exp(-2 beta)``), ``dim`` the walk dimension.
    """

    kind: ModelKind
    n: int
    alpha: float = 0.0
    beta: float = 0.0
    gamma: float = 0.0
    dim: int = 1

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("n must be a positive integer")
        if self.beta < 0:
            raise ValueError("beta must be non-negative")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError("gamma must lie in [0, 1]")
        if self.dim not in (1, 2, 3):
            raise ValueError("dim must be 1, 2 or 3")
        if self.kind is not ModelKind.WALK and self.dim != 1:
            raise ValueError("dim > 1 only makes sense for walks")


@dataclass(frozen=True)
class TransferData:
    """Eigendata of the 2x2 transfer matrix and log-eigenvalue derivatives.

    ``m_bar``, ``sigma2`` and ``k3`` are the first three alpha-derivatives of
    ``log lambda_plus``: mean magnetization per spin, per-spin variance
    coefficient, and the cubic coefficient of the residue.
    """

    lambda_plus: float
    lambda_minus: float
    a_plus: float
    a_minus: float
    m_bar: float
    sigma2: float
    k3: float


@dataclass(frozen=True)
class SpinConfiguration:
    """A single configuration of n spins, entries in {-1, +1}."""

    spins: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.spins, dtype=np.int8)
        if arr.ndim != 1 or not np.all(np.abs(arr) == 1):
            raise ValueError("spins must be a 1-d array of +/-1")
        object.__setattr__(self, "spins", arr)

    @property
    def magnetization(self) -> int:
        return int(self.spins.sum(dtype=np.int64))


@dataclass(frozen=True)
class LatticePmf:
    """Exact pmf on an arithmetic lattice, stored as log-probabilities.

    dim 1: support ``offset + step*i`` for ``i in range(len(log_probs))``.
    dim 2/3: ``log_probs`` is a dense cube over the box with the same
    ``offset``/``step`` along every axis; unreachable (wrong-parity) sites
    carry ``-inf``.
    """

    offset: float
    step: float
    log_probs: np.ndarray
    dim: int = 1
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        if self.step <= 0:
            raise ValueError("step must be positive")
        arr = np.asarray(self.log_probs, dtype=float)
        if arr.ndim != self.dim:
            raise ValueError("log_probs must have one axis per dimension")
        object.__setattr__(self, "log_probs", arr)

    def axis_values(self) -> np.ndarray:
        return self.offset + self.step * np.arange(self.log_probs.shape[0])

    def values(self) -> np.ndarray:
        """Support points; shape (N,) for dim 1, (N, .., N, dim) otherwise."""
        v = self.axis_values()
        if self.dim == 1:
            return v
        mesh = np.meshgrid(*([v] * self.dim), indexing="ij")
        return np.stack(mesh, axis=-1)

    def squared_norms(self) -> np.ndarray:
        v = self.axis_values()
        if self.dim == 1:
            return v * v
        mesh = np.meshgrid(*([v] * self.dim), indexing="ij")
        return sum(m * m for m in mesh)

    def probs(self) -> np.ndarray:
        return np.exp(self.log_probs)

    def total_log_mass(self) -> float:
        return log_sum_exp(self.log_probs.ravel())

    def rescaled(self, scale: float) -> "LatticePmf":
        """Same weights on the lattice of ``value * scale``."""
        return replace(self, offset=self.offset * scale,
                       step=self.step * scale)


class BranchError(ValueError):
    """Complex transfer-matrix evaluation left the unambiguous branch region."""


def transfer_eigen(alpha: float, beta: float) -> TransferData:
    """Closed forms for the transfer-matrix eigendata at real (alpha, beta).

    ``lambda_pm = e^beta cosh(alpha) +/- s`` with
    ``s = sqrt(e^{2 beta} sinh^2(alpha) + e^{-2 beta})``.
    """
    if beta < 0:
        raise ValueError("beta must be non-negative")
    sh, ch = math.sinh(alpha), math.cosh(alpha)
    eb, emb = math.exp(beta), math.exp(-beta)
    s = math.sqrt(eb * eb * sh * sh + emb * emb)
    lam_p = eb * ch + s
    lam_m = eb * ch - s
    a_p = ch + (eb * sh * sh + emb) / s
    a_m = ch - (eb * sh * sh + emb) / s
    m_bar = eb * sh / s
    sigma2 = emb * ch / s ** 3
    k3 = -(2.0 * eb * sh ** 3 + (3.0 * eb - math.exp(-3.0 * beta)) * sh) / s ** 5
    return TransferData(lam_p, lam_m, a_p, a_m, m_bar, sigma2, k3)


def _log_partition_real(alpha: float, beta: float, n: int) -> float:
    td = transfer_eigen(alpha, beta)
    if n == 1:
        return math.log(2.0 * math.cosh(alpha))
    # a_minus, lambda_minus >= 0 on the real domain, so plain logs suffice.
    lead = math.log(td.a_plus) + (n - 1) * math.log(td.lambda_plus)
    if td.a_minus == 0.0 or td.lambda_minus == 0.0:
        return lead
    rest = (math.log(td.a_minus) + (n - 1) * math.log(td.lambda_minus)) - lead
    return lead + math.log1p(math.exp(rest))


def _log_partition_complex(alpha: complex, beta: float, n: int) -> complex:
    sh, ch = np.sinh(alpha), np.cosh(alpha)
    eb, emb = math.exp(beta), math.exp(-beta)
    s2 = eb * eb * sh * sh + emb * emb
    if s2.real <= 0.0:
        raise BranchError(
            "square-root argument has non-positive real part; the principal "
            "branch is ambiguous here")
    s = np.sqrt(s2)
    lam_p = eb * ch + s
    lam_m = eb * ch - s
    a_p = ch + (eb * sh * sh + emb) / s
    a_m = ch - (eb * sh * sh + emb) / s
    if lam_p.real <= 0.0:
        raise BranchError("leading eigenvalue left the principal-log region")
    if n == 1:
        return np.log(a_p + a_m)
    lead = np.log(a_p) + (n - 1) * np.log(lam_p)
    ratio = (a_m / a_p) * np.exp((n - 1) * (np.log(lam_m) - np.log(lam_p))) \
        if lam_m != 0 else 0.0
    return complex(lead + np.log(1.0 + ratio))


def partition_function(alpha: float, beta: float, n: int) -> float:
    """``log Z_n`` of the Ising chain, computed in log-space."""
    if n < 1:
        raise ValueError("n must be positive")
    return _log_partition_real(alpha, beta, n)


def ising_laplace(alpha: float, beta: float, n: int, z: complex) -> complex:
    """``log E[exp(z M_n)]`` under the Ising measure.

    For complex ``z`` the principal branches are used; a :class:`BranchError`
    is raised rather than silently picking a branch when the square-root
    argument leaves the safe region near the positive reals.
    """
    if n < 1:
        raise ValueError("n must be positive")
    zc = complex(z)
    if zc.imag != 0.0:
        return (_log_partition_complex(alpha + zc, beta, n)
                - _log_partition_real(alpha, beta, n))
    return complex(_log_partition_real(alpha + zc.real, beta, n)
                   - _log_partition_real(alpha, beta, n))


def ising_laplace_grid(alpha: float, beta: float, n: int,
                       z: np.ndarray) -> np.ndarray:
    """Vectorized ``log E[exp(z M_n)]`` for real ``z`` arrays."""
    z = np.asarray(z, dtype=float)
    a = alpha + z
    sh, ch = np.sinh(a), np.cosh(a)
    eb, emb = math.exp(beta), math.exp(-beta)
    s = np.sqrt(eb * eb * sh * sh + emb * emb)
    lam_p = eb * ch + s
    lam_m = eb * ch - s
    a_p = ch + (eb * sh * sh + emb) / s
    a_m = ch - (eb * sh * sh + emb) / s
    if n == 1:
        logz = np.log(a_p + a_m)
    else:
        with np.errstate(divide="ignore"):
            rest = np.where(
                (a_m > 0) & (lam_m > 0),
                np.log(np.where(a_m > 0, a_m, 1.0))
                + (n - 1) * np.log(np.where(lam_m > 0, lam_m, 1.0)),
                -np.inf)
            lead = np.log(a_p) + (n - 1) * np.log(lam_p)
        logz = lead + np.log1p(np.exp(rest - lead))
    return logz - _log_partition_real(alpha, beta, n)


@dataclass(frozen=True)
class IsingModParams:
    """Scale coefficient and cubic residue coefficient of the Ising chain.

    ``t_coeff`` multiplies ``n^(1/3)``; ``psi_cubic`` is the coefficient in
    ``psi(z) = exp(psi_cubic * z^3 / 6)``.  When ``psi_cubic == 0`` (zero
    field) the cubic regime degenerates and the quartic parameters of
    :func:`ising_alpha0_mod_params` apply instead.
    """

    t_coeff: float
    psi_cubic: float

    @property
    def quartic_regime(self) -> bool:
        return self.psi_cubic == 0.0


def ising_mod_params(alpha: float, beta: float) -> IsingModParams:
    td = transfer_eigen(alpha, beta)
    k3 = 0.0 if alpha == 0.0 else td.k3
    return IsingModParams(t_coeff=td.sigma2, psi_cubic=k3)


def ising_alpha0_mod_params(beta: float) -> tuple[float, float]:
    """Zero-field constants: ``t_n = n^(1/2) e^(2 beta)`` and the quartic
    coefficient ``(3 e^(6 beta) - e^(2 beta)) / 24``."""
    if beta < 0:
        raise ValueError("beta must be non-negative")
    return math.exp(2.0 * beta), (3.0 * math.exp(6.0 * beta)
                                  - math.exp(2.0 * beta)) / 24.0


def _normalized(offset: float, step: float, logw: np.ndarray,
                dim: int = 1, meta: dict | None = None) -> LatticePmf:
    log_z = log_sum_exp(logw.ravel())
    return LatticePmf(offset, step, logw - log_z, dim, meta or {})


def cw_magnetization_pmf(alpha: float, beta: float, n: int) -> LatticePmf:
    """Exact magnetization pmf of the Curie-Weiss chain on {-n..n} step 2.

    Weights ``binom(n, k) exp(alpha M + beta M^2 / (2n))`` with ``M = n-2k``,
    assembled entirely in log-space (log-binomials via log-Gamma).
    """
    if n < 1:
        raise ValueError("n must be positive")
    k = np.arange(n + 1)
    m = n - 2.0 * k
    # grouping the two k-dependent log-Gammas keeps the weights exactly
    # symmetric under k <-> n-k when alpha = 0
    log_binom = gammaln(n + 1) - (gammaln(k + 1) + gammaln(n - k + 1))
    logw = log_binom + (alpha * m + beta * m * m / (2.0 * n))
    meta = {"variant": "curie_weiss", "alpha": alpha, "beta": beta, "n": n}
    return _normalized(-float(n), 2.0, logw[::-1].copy(), 1, meta)


def _ising_forward(alpha: float, beta: float, n: int,
                   keep_steps: bool = False):
    """Log-space DP over (last spin, partial magnetization).

    At step ``t`` index ``j`` holds magnetization ``m = -t + 2 j``.  Returns
    the two final arrays, plus the per-step history when ``keep_steps``.
    """
    neg = -np.inf
    plus = np.array([neg, alpha])      # j indexes m = -t + 2j; sigma_1 = +1
    minus = np.array([-alpha, neg])    # sigma_1 = -1
    history = [(plus, minus)] if keep_steps else None
    for t in range(2, n + 1):
        npl = np.full(t + 1, neg)
        nmi = np.full(t + 1, neg)
        npl[1:] = alpha + np.logaddexp(plus + beta, minus - beta)
        nmi[:t] = -alpha + np.logaddexp(plus - beta, minus + beta)
        plus, minus = npl, nmi
        if keep_steps:
            history.append((plus, minus))
    return plus, minus, history


def ising_magnetization_pmf(alpha: float, beta: float, n: int,
                            cap: int = ISING_PMF_CAP) -> LatticePmf:
    """Exact magnetization pmf of the Ising chain via the transfer DP.

    O(n^2) work; capped because the quadratic dynamic program becomes the
    wrong tool past ~2e4 spins -- use :func:`ising_laplace` instead there.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if n > cap:
        raise ValueError(
            f"n={n} exceeds the exact-pmf cap {cap}; use the transfer-matrix "
            "Laplace transform (ising_laplace) for large chains")
    plus, minus, _ = _ising_forward(alpha, beta, n)
    logw = np.logaddexp(plus, minus)
    meta = {"variant": "ising", "alpha": alpha, "beta": beta, "n": n}
    return _normalized(-float(n), 2.0, logw, 1, meta)


def mixed_magnetization_pmf(beta: float, gamma: float, n: int,
                            cap: int = ISING_PMF_CAP) -> LatticePmf:
    """Exact magnetization pmf with weights
    ``exp(beta * sum sigma sigma' + gamma M^2/(2n))``."""
    base = ising_magnetization_pmf(0.0, beta, n, cap)
    m = base.axis_values()
    logw = base.log_probs + gamma * m * m / (2.0 * n)
    meta = {"variant": "mixed", "alpha": 0.0, "beta": beta,
            "gamma": gamma, "n": n}
    return _normalized(base.offset, base.step, logw, 1, meta)


def random_walk_pmf(dim: int, n: int) -> LatticePmf:
    """Exact endpoint distribution of the simple walk on Z^dim after n steps.

    dim 1 reduces to a (relabelled) binomial on step-2 support; dim 2 and 3
    run the n-fold convolution over the reachable box.  Sites with the wrong
    parity (sum of coordinates != n mod 2) carry ``-inf``.
    """
    if dim not in WALK_CAPS:
        raise ValueError("dim must be 1, 2 or 3")
    if n < 1:
        raise ValueError("n must be positive")
    if n > WALK_CAPS[dim]:
        raise ValueError(f"n={n} exceeds the d={dim} walk cap {WALK_CAPS[dim]}")
    meta = {"variant": "walk", "d": dim, "n": n}
    if dim == 1:
        k = np.arange(n + 1)
        logw = (gammaln(n + 1) - (gammaln(k + 1) + gammaln(n - k + 1))
                - n * math.log(2.0))
        return _normalized(-float(n), 2.0, logw, 1, meta)

    size = 2 * n + 1
    arr = np.zeros((size,) * dim)
    arr[(n,) * dim] = 1.0
    for t in range(1, n + 1):
        lo, hi = n - t, n + t + 1
        view = tuple(slice(lo, hi) for _ in range(dim))
        cur = arr[view]
        new = np.zeros_like(cur)
        for ax in range(dim):
            up = [slice(None)] * dim
            dn = [slice(None)] * dim
            up[ax] = slice(1, None)
            dn[ax] = slice(None, -1)
            new[tuple(up)] += cur[tuple(dn)]
            new[tuple(dn)] += cur[tuple(up)]
        arr[view] = new / (2.0 * dim)
    with np.errstate(divide="ignore"):
        logw = np.log(arr)
    return LatticePmf(-float(n), 1.0, logw, dim, meta)


def _spin_matrix(n: int) -> np.ndarray:
    """All 2^n configurations as a (2^n, n) array of +/-1 (int8)."""
    codes = np.arange(1 << n, dtype=np.int64)
    bits = (codes[:, None] >> np.arange(n)[None, :]) & 1
    return (2 * bits - 1).astype(np.int8)


def _config_log_weights(spec: ModelSpec, spins: np.ndarray) -> np.ndarray:
    m = spins.sum(axis=1, dtype=np.int64).astype(float)
    if spec.kind is ModelKind.CURIE_WEISS:
        return spec.alpha * m + spec.beta * m * m / (2.0 * spec.n)
    bonds = (spins[:, :-1].astype(np.int32)
             * spins[:, 1:].astype(np.int32)).sum(axis=1).astype(float)
    if spec.kind is ModelKind.ISING:
        return spec.alpha * m + spec.beta * bonds
    if spec.kind is ModelKind.MIXED:
        return spec.beta * bonds + spec.gamma * m * m / (2.0 * spec.n)
    raise ValueError(f"unsupported kind for spin enumeration: {spec.kind}")


def brute_force_pmf(spec: ModelSpec) -> LatticePmf:
    """Exhaustive-enumeration pmf; the verification oracle for small n."""
    n = spec.n
    if spec.kind is ModelKind.WALK:
        if n * math.log2(2 * spec.dim) > 21:
            raise ValueError("walk enumeration too large; reduce n")
        steps = np.arange(2 * spec.dim)
        grids = np.meshgrid(*([steps] * n), indexing="ij")
        digits = np.stack([g.ravel() for g in grids], axis=1)
        axis = digits // 2
        sign = 2 * (digits % 2) - 1
        size = 2 * n + 1
        counts = np.zeros((size,) * spec.dim, dtype=np.int64)
        ends = np.zeros((digits.shape[0], spec.dim), dtype=np.int64)
        for d in range(spec.dim):
            ends[:, d] = (sign * (axis == d)).sum(axis=1)
        np.add.at(counts, tuple((ends[:, d] + n) for d in range(spec.dim)), 1)
        with np.errstate(divide="ignore"):
            logw = np.log(counts.astype(float)) - n * math.log(2.0 * spec.dim)
        return LatticePmf(-float(n), 1.0, logw, spec.dim,
                          {"variant": "walk", "d": spec.dim, "n": n})

    if n > BRUTE_FORCE_CAP:
        raise ValueError(f"n={n} exceeds the 2^n enumeration cap "
                         f"{BRUTE_FORCE_CAP}")
    spins = _spin_matrix(n)
    logw = _config_log_weights(spec, spins)
    m = spins.sum(axis=1, dtype=np.int64)
    out = np.full(n + 1, -np.inf)
    idx = (m + n) // 2
    order = np.argsort(idx, kind="stable")
    bounds = np.searchsorted(idx[order], np.arange(n + 2))
    for j in range(n + 1):
        seg = logw[order[bounds[j]:bounds[j + 1]]]
        if seg.size:
            out[j] = log_sum_exp(seg)
    meta = {"variant": spec.kind.value, "alpha": spec.alpha,
            "beta": spec.beta, "gamma": spec.gamma, "n": n}
    return _normalized(-float(n), 2.0, out, 1, meta)


def _rng(seed: int) -> np.random.Generator:
    """Counter-based generator so one 64-bit seed is fully reproducible."""
    return np.random.Generator(np.random.Philox(seed))


def _sample_from_log_pmf(log_probs: np.ndarray,
                         rng: np.random.Generator) -> int:
    p = np.exp(log_probs - log_probs.max())
    p /= p.sum()
    return int(rng.choice(len(p), p=p))


def _sample_ising_alpha0(beta: float, n: int,
                         rng: np.random.Generator) -> np.ndarray:
    # First spin fair, then i.i.d. bond variables with P[+1] = e^b/(2 cosh b).
    first = 1 if rng.random() < 0.5 else -1
    p_align = math.exp(beta) / (2.0 * math.cosh(beta))
    bonds = np.where(rng.random(n - 1) < p_align, 1, -1).astype(np.int8)
    spins = np.empty(n, dtype=np.int8)
    spins[0] = first
    spins[1:] = first * np.cumprod(bonds)
    return spins


def _sample_ising_field(alpha: float, beta: float, n: int,
                        rng: np.random.Generator) -> np.ndarray:
    # Sequential conditionals from the transfer matrix: with R_t the
    # (normalized) vector T^(n-t) W, P[s_1] ~ V_s R_1(s) and
    # P[s' | s] ~ T[s, s'] R_{t+1}(s').
    t_mat = np.array([[math.exp(alpha + beta), math.exp(-alpha - beta)],
                      [math.exp(alpha - beta), math.exp(-alpha + beta)]])
    r = [None] * (n + 1)
    r[n] = np.array([1.0, 1.0])
    for t in range(n - 1, 0, -1):
        vec = t_mat @ r[t + 1]
        r[t] = vec / vec.max()
    v = np.array([math.exp(alpha), math.exp(-alpha)])
    spins = np.empty(n, dtype=np.int8)
    w = v * r[1]
    state = 0 if rng.random() < w[0] / w.sum() else 1
    spins[0] = 1 - 2 * state
    for t in range(1, n):
        w = t_mat[state] * r[t + 1]
        state = 0 if rng.random() < w[0] / w.sum() else 1
        spins[t] = 1 - 2 * state
    return spins


def _sample_conditioned_on_magnetization(beta: float, n: int, m_target: int,
                                         rng: np.random.Generator
                                         ) -> np.ndarray:
    """Backward sampling of a zero-field Ising path given its magnetization."""
    _, _, hist = _ising_forward(0.0, beta, n, keep_steps=True)
    j = (m_target + n) // 2
    plus, minus = hist[n - 1]
    lw = np.array([plus[j] if 0 <= j <= n else -np.inf,
                   minus[j] if 0 <= j <= n else -np.inf])
    state = _sample_from_log_pmf(lw, rng)     # 0 -> +1, 1 -> -1
    spins = np.empty(n, dtype=np.int8)
    spins[n - 1] = 1 - 2 * state
    for t in range(n - 1, 0, -1):
        s_next = float(spins[t])
        j = j - (1 if spins[t] == 1 else 0)   # magnetization index at step t
        plus, minus = hist[t - 1]
        lw = np.array([
            (plus[j] if 0 <= j < len(plus) else -np.inf) + beta * s_next,
            (minus[j] if 0 <= j < len(minus) else -np.inf) - beta * s_next,
        ])
        state = _sample_from_log_pmf(lw, rng)
        spins[t - 1] = 1 - 2 * state
    return spins


def sample_configuration(spec: ModelSpec, seed: int) -> SpinConfiguration:
    """One exact sample from a spin model; deterministic given the seed."""
    rng = _rng(seed)
    n = spec.n
    if spec.kind is ModelKind.CURIE_WEISS:
        if spec.beta == 0.0:
            p_up = math.exp(spec.alpha) / (2.0 * math.cosh(spec.alpha))
            spins = np.where(rng.random(n) < p_up, 1, -1).astype(np.int8)
            return SpinConfiguration(spins)
        pmf = cw_magnetization_pmf(spec.alpha, spec.beta, n)
        m = int(pmf.axis_values()[_sample_from_log_pmf(pmf.log_probs, rng)])
        spins = np.full(n, -1, dtype=np.int8)
        spins[rng.permutation(n)[: (n + m) // 2]] = 1
        return SpinConfiguration(spins)
    if spec.kind is ModelKind.ISING:
        if spec.alpha == 0.0:
            return SpinConfiguration(_sample_ising_alpha0(spec.beta, n, rng))
        return SpinConfiguration(
            _sample_ising_field(spec.alpha, spec.beta, n, rng))
    if spec.kind is ModelKind.MIXED:
        if n > CONDITIONAL_SAMPLE_CAP:
            raise ValueError(
                f"mixed-model sampling stores the full DP table; n <= "
                f"{CONDITIONAL_SAMPLE_CAP} required")
        pmf = mixed_magnetization_pmf(spec.beta, spec.gamma, n)
        m = int(pmf.axis_values()[_sample_from_log_pmf(pmf.log_probs, rng)])
        # conditionally on M the global term is constant, so the path law
        # given M is the Ising one
        return SpinConfiguration(
            _sample_conditioned_on_magnetization(spec.beta, n, m, rng))
    raise ValueError("sample_configuration covers spin models only")


# ---------------------------------------------------------------------------
# serialization: CSV body with a JSON header line


def write_pmf_csv(pmf: LatticePmf, dest: IO[str] | str) -> None:
    """CSV with columns (value..., log_prob) under a '# {json}' header line.

    Only finite-probability sites are written; the header records variant
    and parameters plus offset/step so the lattice reconstructs exactly.
    """
    header = dict(pmf.meta)
    header.update({"dim": pmf.dim, "offset": pmf.offset, "step": pmf.step,
                   "shape": list(pmf.log_probs.shape)})
    own = isinstance(dest, str)
    fh: IO[str] = open(dest, "w", encoding="utf-8") if own else dest
    try:
        fh.write("# " + json.dumps(header, sort_keys=True) + "\n")
        cols = [f"v{i+1}" for i in range(pmf.dim)] if pmf.dim > 1 else ["value"]
        fh.write(",".join(cols + ["log_prob"]) + "\n")
        if pmf.dim == 1:
            vals = pmf.axis_values()
            for v, lp in zip(vals, pmf.log_probs):
                if np.isfinite(lp):
                    fh.write(f"{v:.17g},{lp:.17g}\n")
        else:
            idx = np.argwhere(np.isfinite(pmf.log_probs))
            axis = pmf.axis_values()
            for ind in idx:
                coords = ",".join(f"{axis[i]:.17g}" for i in ind)
                fh.write(f"{coords},{pmf.log_probs[tuple(ind)]:.17g}\n")
    finally:
        if own:
            fh.close()


def read_pmf_csv(src: IO[str] | str) -> LatticePmf:
    own = isinstance(src, str)
    fh: IO[str] = open(src, "r", encoding="utf-8") if own else src
    try:
        first = fh.readline()
        if not first.startswith("# "):
            raise ValueError("missing JSON header line")
        header = json.loads(first[2:])
        fh.readline()                       # column names
        dim = int(header["dim"])
        offset, step = float(header["offset"]), float(header["step"])
        shape = tuple(header["shape"])
        logs = np.full(shape, -np.inf)
        for line in fh:
            parts = line.strip().split(",")
            if not parts or parts == [""]:
                continue
            *coords, lp = parts
            ind = tuple(int(round((float(c) - offset) / step))
                        for c in coords)
            logs[ind] = float(lp)
        meta = {k: v for k, v in header.items()
                if k not in ("dim", "offset", "step", "shape")}
        return LatticePmf(offset, step, logs, dim, meta)
    finally:
        if own:
            fh.close()
