"""Mod-Gaussian descriptors, residues, and exponential changes of measure.

A descriptor packages, for one model family, the scale sequence ``t_n``,
the finite-n residue ``psi_n(t) = E[exp(<t, X_n>)] exp(-t_n |t|^2 / 2)`` and
its locally-uniform limit ``psi``.  The scaled variables are

* independent spins, zero field:  ``X_n = M_n / n^(1/4)``, ``t_n = n^(1/2)``;
* independent spins, field alpha: ``X_n = (M_n - n tanh(alpha)) / n^(1/3)``,
  ``t_n = n^(1/3) / cosh^2(alpha)``;
* Ising chain, zero field:  ``X_n = M_n / n^(1/4)``,
  ``t_n = n^(1/2) e^(2 beta)``;
* Ising chain, field alpha: ``X_n = (M_n - n m_bar) / n^(1/3)``,
  ``t_n = n^(1/3) sigma^2``;
* simple walk on Z^d:       ``X_n = W_n / n^(1/4)``, ``t_n = n^(1/2) / d``.

The quadratic change of measure ``dQ = e^(gamma x^2 / (2 t_n)) dP / Z``
turns the independent-spin chain into the Curie-Weiss model; at the
critical weight gamma = 1 the rescaled tilted variable ``Y_n / t_n``
converges to the law ``psi(x) dx / int psi``, and for gamma < 1 the tilt
preserves mod-Gaussian convergence.

One deliberate correction relative to the source material, verified both
analytically and against exact pmfs: a gamma-tilt multiplies the Gaussian
variance by 1/(1-gamma), so the residue of the *rescaled* variable
``(1-gamma) X_n`` (not of ``X_n`` itself) converges with parameters
``(1-gamma) t_n`` and unchanged limit.  Likewise the critical tilted laws
converge on the scale ``Y_n / t_n`` -- for the d-dimensional walk that is
``d V_n / n^(3/4)``, and for the critical mixed chain
``M_n / (n^(3/4) e^(2 beta))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.special import erfc

from . import spin_models as sm
from .numerics import (QuadratureConfig, constants, integrate_line,
                       log_sum_exp, truncation_length)

__all__ = [
    "ModGaussDescriptor",
    "TiltedLaw",
    "NonIntegrableError",
    "descriptor",
    "walk_residue_dim",
    "residue_integral",
    "tilt",
    "scaled_pmf",
    "ellis_newman_density",
    "l1_mod_distance",
    "precise_deviation",
    "clt_check",
    "subcritical_descriptor",
    "walk_tilted_law",
    "walk_cell_tv",
    "iid_residue",
]


class NonIntegrableError(ValueError):
    """The limiting residue is not integrable, so no tilted limit law."""


@dataclass(frozen=True)
class ModGaussDescriptor:
    """A convergent triple (t_n rule, psi_n evaluator, limit psi).

    ``psi_n`` takes ``(n, t)`` with ``t`` an array (shape ``(..., dim)`` for
    multidimensional models); ``psi`` takes ``t`` alone.  ``band_c`` is the
    half-width of the convergence band (``inf`` for entire transforms).
    """

    t_n: Callable[[int], float]
    psi_n: Callable[[int, np.ndarray], np.ndarray]
    psi: Callable[[np.ndarray], np.ndarray]
    band_c: float
    dim: int
    family: sm.ModelSpec | None = None
    label: str = ""


@dataclass(frozen=True)
class TiltedLaw:
    """An exact pmf reweighted by exp(gamma |x|^2 / (2 t_n))."""

    base: sm.LatticePmf
    t_n: float
    gamma: float
    tilted: sm.LatticePmf
    log_normalizer: float


def _log_cosh(u: np.ndarray) -> np.ndarray:
    a = np.abs(u)
    return a + np.log1p(np.exp(-2.0 * a)) - math.log(2.0)


def _iid_quartic(n: int, t: np.ndarray) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    u = t / n ** 0.25
    return np.exp(n * _log_cosh(u) - math.sqrt(n) * t * t / 2.0)


def _psi_quartic(t: np.ndarray) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    return np.exp(-t ** 4 / 12.0)


def _make_iid_cubic(alpha: float):
    m = math.tanh(alpha)
    lp, lm = math.log1p(m), math.log1p(-m)
    t_coeff = 1.0 / math.cosh(alpha) ** 2
    k3 = -2.0 * math.sinh(alpha) / math.cosh(alpha) ** 3

    def psi_n(n: int, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        u = t / n ** (1.0 / 3.0)
        # log(cosh u + sinh u * tanh(alpha)) without overflow
        log_mgf = np.logaddexp(u + lp, -u + lm) - math.log(2.0)
        return np.exp(n * (log_mgf - u * m)
                      - n ** (1.0 / 3.0) * t_coeff * t * t / 2.0)

    def psi(t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return np.exp(k3 * t ** 3 / 6.0)

    return t_coeff, psi_n, psi


def _make_ising_quartic(beta: float):
    t_coeff, quartic = sm.ising_alpha0_mod_params(beta)

    def psi_n(n: int, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        log_lap = sm.ising_laplace_grid(0.0, beta, n, t / n ** 0.25)
        return np.exp(log_lap - math.sqrt(n) * t_coeff * t * t / 2.0)

    def psi(t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return np.exp(-quartic * t ** 4)

    return t_coeff, psi_n, psi


def _make_ising_cubic(alpha: float, beta: float):
    td = sm.transfer_eigen(alpha, beta)

    def psi_n(n: int, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        u = t / n ** (1.0 / 3.0)
        log_lap = sm.ising_laplace_grid(alpha, beta, n, u)
        return np.exp(log_lap - n ** (2.0 / 3.0) * t * td.m_bar
                      - n ** (1.0 / 3.0) * td.sigma2 * t * t / 2.0)

    def psi(t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return np.exp(td.k3 * t ** 3 / 6.0)

    return td.sigma2, psi_n, psi


def walk_residue_dim(dim: int):
    """Limit residue of the d-dimensional walk; raises for d >= 4 where the
    function fails to be integrable."""
    if dim >= 4:
        raise NonIntegrableError(
            f"the limiting residue of the d={dim} walk is not integrable; "
            "no tilted limit law exists for d >= 4")
    if dim < 1:
        raise ValueError("dim must be at least 1")

    def psi(t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if dim == 1:
            s2, s4 = t * t, t ** 4
        else:
            s2 = np.sum(t * t, axis=-1)
            s4 = np.sum(t ** 4, axis=-1)
        return np.exp(-(3.0 * s2 * s2 - dim * s4) / (24.0 * dim * dim))

    return psi


def _make_walk(dim: int):
    psi = walk_residue_dim(dim)

    def psi_n(n: int, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if dim == 1:
            return _iid_quartic(n, t)
        u = t / n ** 0.25
        # log((cosh u_1 + .. + cosh u_d) / d), overflow-safe
        stacked = np.concatenate([u, -u], axis=-1)
        log_sum_cosh = np.logaddexp.reduce(stacked, axis=-1) - math.log(2.0)
        norm2 = np.sum(t * t, axis=-1)
        return np.exp(n * (log_sum_cosh - math.log(dim))
                      - math.sqrt(n) * norm2 / (2.0 * dim))

    return psi_n, psi


def descriptor(spec: sm.ModelSpec) -> ModGaussDescriptor:
    """The model's (t_n, psi_n, psi) triple.

    The Curie-Weiss entry describes the independent-spin core (beta = 0);
    its beta > 0 laws are quadratic tilts of that core and are reached
    through :func:`tilt` or :func:`subcritical_descriptor`.  The mixed chain
    delegates to the subcritical tilt of the zero-field Ising descriptor.
    """
    family = replace(spec, n=1)
    if spec.kind is sm.ModelKind.CURIE_WEISS:
        if spec.beta != 0.0:
            raise ValueError(
                "the Curie-Weiss descriptor covers the independent-spin core "
                "(beta = 0); obtain beta > 0 laws by tilting it")
        if spec.alpha == 0.0:
            return ModGaussDescriptor(
                t_n=lambda n: math.sqrt(n), psi_n=_iid_quartic,
                psi=_psi_quartic, band_c=math.inf, dim=1, family=family,
                label="iid spins, zero field")
        t_coeff, psi_n, psi = _make_iid_cubic(spec.alpha)
        return ModGaussDescriptor(
            t_n=lambda n, c=t_coeff: n ** (1.0 / 3.0) * c, psi_n=psi_n,
            psi=psi, band_c=math.inf, dim=1, family=family,
            label=f"iid spins, field {spec.alpha}")
    if spec.kind is sm.ModelKind.ISING:
        if spec.alpha == 0.0:
            t_coeff, psi_n, psi = _make_ising_quartic(spec.beta)
            return ModGaussDescriptor(
                t_n=lambda n, c=t_coeff: math.sqrt(n) * c, psi_n=psi_n,
                psi=psi, band_c=math.inf, dim=1, family=family,
                label=f"ising chain, beta {spec.beta}")
        t_coeff, psi_n, psi = _make_ising_cubic(spec.alpha, spec.beta)
        return ModGaussDescriptor(
            t_n=lambda n, c=t_coeff: n ** (1.0 / 3.0) * c, psi_n=psi_n,
            psi=psi, band_c=math.inf, dim=1, family=family,
            label=f"ising chain, alpha {spec.alpha}, beta {spec.beta}")
    if spec.kind is sm.ModelKind.MIXED:
        rel = spec.gamma * math.exp(2.0 * spec.beta)
        if not 0.0 < rel < 1.0:
            raise ValueError(
                "mixed-chain descriptor requires a sub-critical global term "
                "(0 < gamma * e^(2 beta) < 1); the critical case is a limit "
                "law, not a mod-Gaussian family")
        base = descriptor(sm.ModelSpec(sm.ModelKind.ISING, 1, 0.0, spec.beta))
        return subcritical_descriptor(base, rel)
    if spec.kind is sm.ModelKind.WALK:
        psi_n, psi = _make_walk(spec.dim)
        return ModGaussDescriptor(
            t_n=lambda n, d=spec.dim: math.sqrt(n) / d, psi_n=psi_n, psi=psi,
            band_c=math.inf, dim=spec.dim, family=family,
            label=f"simple walk, d={spec.dim}")
    raise ValueError(f"unsupported model kind {spec.kind}")


# ---------------------------------------------------------------------------
# residue integrals


def _box_half_width(f1d: Callable[[np.ndarray], np.ndarray],
                    cfg: QuadratureConfig) -> float:
    return truncation_length(f1d, cfg)


def _tensor_integral(f, dim: int, half: float, panels: int = 48,
                     order: int = 8) -> float:
    nodes, weights = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(-half, half, panels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])[:, None]
    hw = 0.5 * (edges[1] - edges[0])
    x = (mid + hw * nodes[None, :]).ravel()
    w = np.tile(weights * hw, panels)
    if dim == 2:
        pts = np.stack(np.meshgrid(x, x, indexing="ij"), axis=-1)
        vals = f(pts)
        return float(np.einsum("i,j,ij->", w, w, vals))
    total = 0.0
    for i, xi in enumerate(x):          # chunk the first axis
        pts = np.stack(np.meshgrid(np.array([xi]), x, x, indexing="ij"),
                       axis=-1)
        vals = f(pts)[0]
        total += w[i] * float(np.einsum("j,k,jk->", w, w, vals))
    return total


@lru_cache(maxsize=64)
def _residue_integral_cached(desc: ModGaussDescriptor,
                             n: int | None) -> float:
    cfg = QuadratureConfig(abs_tol=1e-11)
    if desc.dim == 1:
        f = (lambda t: desc.psi(t)) if n is None \
            else (lambda t: desc.psi_n(n, t))
        return integrate_line(f, cfg)
    if desc.dim == 3 and n is None:
        # the walk residue is constant along the axes, so box quadrature
        # fails; closed form 3*sqrt(6)*Gamma(1/4)^3 via polar reduction
        return 3.0 * math.sqrt(6.0) * constants().gamma_quarter ** 3

    if n is None:
        def axis(t: np.ndarray) -> np.ndarray:
            pts = np.zeros(t.shape + (desc.dim,))
            pts[..., 0] = t
            return desc.psi(pts)
        def full(pts: np.ndarray) -> np.ndarray:
            return desc.psi(pts)
    else:
        def axis(t: np.ndarray) -> np.ndarray:
            pts = np.zeros(t.shape + (desc.dim,))
            pts[..., 0] = t
            return desc.psi_n(n, pts)
        def full(pts: np.ndarray) -> np.ndarray:
            return desc.psi_n(n, pts)
    half = _box_half_width(axis, cfg)
    return _tensor_integral(full, desc.dim, half)


def residue_integral(desc: ModGaussDescriptor, n: int | None) -> float:
    """``I_n = int psi_n`` over R^dim; ``n=None`` gives ``I_inf = int psi``."""
    return _residue_integral_cached(desc, None if n is None else int(n))


def ellis_newman_density(desc: ModGaussDescriptor, n: int | None,
                         x: np.ndarray) -> np.ndarray:
    """Density ``psi_n(x) / I_n`` of the Gaussian-convolved tilted variable
    (the limit law ``psi(x) / I_inf`` for ``n=None``)."""
    i_val = residue_integral(desc, n)
    vals = desc.psi(x) if n is None else desc.psi_n(n, x)
    return vals / i_val


def l1_mod_distance(desc: ModGaussDescriptor, n: int) -> float:
    """Whole-line L1 distance between psi_n and psi (dim 1)."""
    if desc.dim != 1:
        raise ValueError("l1_mod_distance is one-dimensional")
    cfg = QuadratureConfig(abs_tol=1e-11)
    return integrate_line(lambda t: np.abs(desc.psi_n(n, t) - desc.psi(t)),
                          cfg)


# ---------------------------------------------------------------------------
# exponential tilting


def tilt(pmf: sm.LatticePmf, t_n: float, gamma: float) -> TiltedLaw:
    """Reweight an exact lattice law by ``exp(gamma |x|^2 / (2 t_n))``.

    gamma = 1 is the critical weight (for the independent-spin chain it
    produces exactly the critical Curie-Weiss measure); gamma > 1 is
    rejected since normalizability is no longer guaranteed in general.
    """
    if not 0.0 <= gamma <= 1.0:
        raise ValueError("gamma must lie in [0, 1]; the change of measure "
                         "is not necessarily well-defined beyond 1")
    if t_n <= 0:
        raise ValueError("t_n must be positive")
    logw = pmf.log_probs + gamma * pmf.squared_norms() / (2.0 * t_n)
    log_z = log_sum_exp(logw.ravel())
    tilted = replace(pmf, log_probs=logw - log_z)
    return TiltedLaw(base=pmf, t_n=t_n, gamma=gamma, tilted=tilted,
                     log_normalizer=log_z)


@lru_cache(maxsize=16)
def _scaled_pmf_cached(family: sm.ModelSpec, n: int) -> sm.LatticePmf:
    kind = family.kind
    if kind is sm.ModelKind.CURIE_WEISS:
        base = sm.cw_magnetization_pmf(family.alpha, 0.0, n)
        if family.alpha == 0.0:
            return base.rescaled(n ** -0.25)
        shift = n * math.tanh(family.alpha)
        scale = n ** (-1.0 / 3.0)
        return replace(base, offset=(base.offset - shift) * scale,
                       step=base.step * scale)
    if kind is sm.ModelKind.ISING and family.alpha == 0.0:
        return sm.ising_magnetization_pmf(0.0, family.beta, n).rescaled(
            n ** -0.25)
    if kind is sm.ModelKind.WALK:
        return sm.random_walk_pmf(family.dim, n).rescaled(n ** -0.25)
    raise ValueError(f"no exact scaled pmf for {family}")


def scaled_pmf(desc: ModGaussDescriptor, n: int) -> sm.LatticePmf:
    """Exact pmf of the descriptor's scaled variable X_n."""
    if desc.family is None:
        raise ValueError("descriptor is not backed by an exact model")
    return _scaled_pmf_cached(desc.family, n)


# ---------------------------------------------------------------------------
# deviation and CLT diagnostics


def precise_deviation(desc: ModGaussDescriptor, n: int, x: float,
                      exact_tail: float) -> tuple[float, float]:
    """Predicted tail ``P[X_n >= x t_n] ~ e^(-t_n x^2/2) psi(x) /
    (sqrt(2 pi t_n) x)`` and the ratio exact/predicted."""
    if not 0.0 < x < desc.band_c:
        raise ValueError("x must lie in (0, band_c)")
    t_n = desc.t_n(n)
    predicted = (math.exp(-t_n * x * x / 2.0)
                 / (math.sqrt(2.0 * math.pi * t_n) * x)
                 * float(desc.psi(np.asarray(x))))
    return predicted, exact_tail / predicted


def clt_check(desc: ModGaussDescriptor, n: int, a: float,
              exact_tail: float) -> float:
    """Ratio of the exact tail of ``X_n / sqrt(t_n)`` at level a to the
    standard Gaussian tail."""
    gauss_tail = 0.5 * float(erfc(a / math.sqrt(2.0)))
    return exact_tail / gauss_tail


# ---------------------------------------------------------------------------
# sub-critical tilts


def subcritical_descriptor(desc: ModGaussDescriptor,
                           gamma: float) -> ModGaussDescriptor:
    """Descriptor of the gamma-tilted family, gamma in (0, 1).

    The tilt inflates the Gaussian variance by 1/(1-gamma), so the object
    that converges with parameters ``(1-gamma) t_n`` and the *same* limit
    psi is the rescaled variable ``(1-gamma) X_n`` under the tilted law;
    psi_n is evaluated from the exact tilted pmf's Laplace transform.
    """
    if not 0.0 < gamma < 1.0:
        raise ValueError("gamma must lie strictly between 0 and 1")
    if desc.family is None:
        raise ValueError("subcritical tilts need an exact-pmf-backed model")
    if desc.dim != 1:
        raise ValueError("subcritical descriptors are one-dimensional here")
    base_t_n = desc.t_n
    family = desc.family

    def t_n(n: int) -> float:
        return (1.0 - gamma) * base_t_n(n)

    def psi_n(n: int, t: np.ndarray) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        pmf = _scaled_pmf_cached(family, n)
        tn = base_t_n(n)
        law = tilt(pmf, tn, gamma).tilted
        x = law.axis_values()
        scaled_t = (1.0 - gamma) * t
        log_lap = np.array([log_sum_exp(law.log_probs + s * x)
                            for s in scaled_t])
        out = np.exp(log_lap - (1.0 - gamma) * tn * t * t / 2.0)
        return out if out.size > 1 else out[0]

    return ModGaussDescriptor(
        t_n=t_n, psi_n=psi_n, psi=desc.psi, band_c=desc.band_c, dim=1,
        family=None, label=f"{desc.label} [gamma-tilt {gamma}]")


# ---------------------------------------------------------------------------
# tilted walks


def walk_tilted_law(dim: int, n: int) -> sm.LatticePmf:
    """Exact endpoint law of the walk tilted by ``exp(d |W_n|^2 / (2 n))``.

    The rescaled variable ``d V_n / n^(3/4)`` converges to
    ``psi(x) dx / int psi``.
    """
    walk_residue_dim(dim)                  # d >= 4 rejection lives here
    base = sm.random_walk_pmf(dim, n)
    return tilt(base, n / dim, 1.0).tilted


def walk_cell_tv(dim: int, n: int) -> float:
    """Cell-averaged total-variation distance between the law of
    ``d V_n / n^(3/4)`` and the limit density psi / I_inf.

    The endpoint lattice is the parity sublattice of Z^dim (index two), so
    each support point owns a cell of volume ``2 h^dim`` at spacing
    ``h = d / n^(3/4)``.
    """
    law = walk_tilted_law(dim, n)
    desc = descriptor(sm.ModelSpec(sm.ModelKind.WALK, max(n, 1), dim=dim))
    i_inf = residue_integral(desc, None)
    scale = dim / n ** 0.75
    if dim == 1:
        # step-2 support already encodes the parity constraint
        pts = law.axis_values() * scale
        dens_cell = desc.psi(pts) / i_inf * (2.0 * scale)
        return 0.5 * float(np.abs(law.probs() - dens_cell).sum())
    coords = np.rint(law.axis_values()).astype(np.int64)
    cmesh = np.meshgrid(*([coords] * dim), indexing="ij")
    reachable = (sum(cmesh) - n) % 2 == 0
    pts = np.stack([m * scale for m in cmesh], axis=-1)
    dens_cell = desc.psi(pts) / i_inf * (2.0 * scale ** dim)
    return 0.5 * float(np.abs(law.probs() - dens_cell)[reachable].sum())


# ---------------------------------------------------------------------------
# generic i.i.d. residues from cumulant data


def iid_residue(cumulants: list[float], k: int) -> ModGaussDescriptor:
    """Descriptor for ``n^(-1/(k+1)) sum B_i`` when the first k cumulants of
    B_1 match the standard Gaussian's.

    Uses ``t_n = n^((k-1)/(k+1))`` and
    ``psi(t) = exp(c_(k+1) t^(k+1) / (k+1)!)`` with ``c_(k+1)`` the first
    non-Gaussian cumulant; psi_n evaluates the cumulant series truncated at
    the data provided.
    """
    if k < 2:
        raise ValueError("k must be at least 2")
    if len(cumulants) < k + 1:
        raise ValueError("need the first k+1 cumulants")
    kappa = [float(v) for v in cumulants]
    gauss = [0.0, 1.0] + [0.0] * (k - 2)
    for r, (have, want) in enumerate(zip(kappa, gauss), start=1):
        if abs(have - want) > 1e-12:
            raise ValueError(
                f"cumulant {r} must match the standard Gaussian value "
                f"{want}, got {have}")
    c_top = kappa[k]
    expo = (k - 1.0) / (k + 1.0)

    def t_n(n: int) -> float:
        return n ** expo

    def psi(t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return np.exp(c_top * t ** (k + 1) / math.factorial(k + 1))

    def psi_n(n: int, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        log_val = np.zeros_like(t)
        for r in range(3, len(kappa) + 1):
            log_val = log_val + (kappa[r - 1] * n ** (1.0 - r / (k + 1.0))
                                 * t ** r / math.factorial(r))
        return np.exp(log_val)

    return ModGaussDescriptor(t_n=t_n, psi_n=psi_n, psi=psi,
                              band_c=math.inf, dim=1, family=None,
                              label=f"iid residue, k={k}")
