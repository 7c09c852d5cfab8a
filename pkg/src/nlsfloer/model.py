"""Convolution-type nonlinearities on the circle and their gradients.

A model couples a smoothing kernel psi (real, even, nonnegative Fourier
coefficients) to a scalar density f(w, x, t) through

    F_t(u) = -1/2 * integral_0^{2pi} f(|(u * psi)(x)|^2, x, t) dx,

the time-dependent value functional whose L2 gradient is

    grad F_t(u) = -d1f(|u * psi|^2, x, t) * (u * psi) conv psi.

All quadratures run on the oversampled grid with N = 4(2k+1) points, which
integrates every polynomial density in the catalog exactly at bandwidth k,
so gradients are consistent with values to rounding.

The catalog is closed: constant, hartree, quadratic, potential, and a
time-modulated wrapper with factor (1 + cos 2pi t).  Every member reports
a certified bound for sup |f| over [0, L2(psi)^2] x S^1 x [0, 1]; the
sufficient smallness gate compares that bound against 1/8.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .spectral import (
    ROOT_2PI,
    TWO_PI,
    SpectralField,
    analyze_many,
    grid_nodes,
    inner_real,
    synthesize_many,
)


# ---------------------------------------------------------------------------
# kernels


@dataclass
class KernelSpec:
    """Even, real, nonnegative convolution kernel given by psi^(n).

    Coefficients are stored for n = -k_max..k_max like a SpectralField.
    """

    k_max: int
    psi_hat: np.ndarray
    decay_law: str = "custom"

    def __post_init__(self):
        self.psi_hat = np.asarray(self.psi_hat, dtype=float)
        if self.psi_hat.shape != (2 * self.k_max + 1,):
            raise ValueError("psi_hat must have length 2*k_max+1")
        if not np.all(np.isfinite(self.psi_hat)):
            raise ValueError("kernel coefficients must be finite")
        if np.any(self.psi_hat < 0):
            raise ValueError("kernel coefficients must be nonnegative")
        if not np.allclose(self.psi_hat, self.psi_hat[::-1], rtol=0, atol=0):
            raise ValueError("kernel coefficients must be even in n")

    def coeff_array(self, k: int) -> np.ndarray:
        """psi^(n) for n = -k..k, zero beyond the stored band."""
        out = np.zeros(2 * k + 1)
        m = min(k, self.k_max)
        out[k - m : k + m + 1] = self.psi_hat[self.k_max - m : self.k_max + m + 1]
        return out

    def as_field(self, k: int) -> SpectralField:
        return SpectralField(k, self.coeff_array(k).astype(np.complex128))

    def l2(self) -> float:
        return float(np.linalg.norm(self.psi_hat))

    def l2_tail(self, k: int) -> float:
        """L2 norm of psi - psi^k, the modes beyond |n| = k."""
        n = np.arange(-self.k_max, self.k_max + 1)
        return float(np.linalg.norm(self.psi_hat[np.abs(n) > k]))


def exponential_kernel(rate: float, k_max: int) -> KernelSpec:
    n = np.arange(-k_max, k_max + 1)
    return KernelSpec(k_max, np.exp(-rate * np.abs(n)), decay_law="exponential")


def band_limited_kernel(ell: int, k_max: Optional[int] = None) -> KernelSpec:
    if k_max is None:
        k_max = ell
    n = np.arange(-k_max, k_max + 1)
    return KernelSpec(k_max, (np.abs(n) <= ell).astype(float), decay_law="band_limited")


def truncate_kernel(kernel: KernelSpec, k: int) -> KernelSpec:
    """Drop the modes |n| > k.  Truncation only ever removes mass."""
    if k < 0:
        raise ValueError("truncation order must be nonnegative")
    return KernelSpec(k, kernel.coeff_array(k), decay_law=kernel.decay_law)


# ---------------------------------------------------------------------------
# nonlinearity catalog


class Nonlinearity:
    """Interface for the closed catalog of densities f(w, x, t).

    w is the smoothed intensity |u * psi|^2 >= 0; all members are
    1-periodic in t.
    """

    strength: float

    def f(self, w, x, t):
        raise NotImplementedError

    def d1f(self, w, x, t):
        """Partial derivative of f in its first argument."""
        raise NotImplementedError

    def sup_f_bound(self, w_max: float) -> float:
        """Certified bound for sup |f| over [0, w_max] x S^1 x [0, 1]."""
        raise NotImplementedError

    def with_strength(self, strength: float) -> "Nonlinearity":
        raise NotImplementedError

    def label(self) -> str:
        raise NotImplementedError


@dataclass
class Constant(Nonlinearity):
    c: float = 1.0

    @property
    def strength(self):
        return self.c

    def f(self, w, x, t):
        return np.broadcast_to(np.asarray(self.c, dtype=float), np.shape(w)).copy()

    def d1f(self, w, x, t):
        return np.zeros(np.shape(w))

    def sup_f_bound(self, w_max):
        return abs(self.c)

    def with_strength(self, strength):
        return Constant(strength)

    def label(self):
        return "constant"


@dataclass
class Hartree(Nonlinearity):
    """f = eps * w; the gradient is diagonal on Fourier modes."""

    eps: float

    @property
    def strength(self):
        return self.eps

    def f(self, w, x, t):
        return self.eps * np.asarray(w)

    def d1f(self, w, x, t):
        return np.full(np.shape(w), self.eps)

    def sup_f_bound(self, w_max):
        return abs(self.eps) * w_max

    def with_strength(self, strength):
        return Hartree(strength)

    def label(self):
        return "hartree"


@dataclass
class Quadratic(Nonlinearity):
    eps: float

    @property
    def strength(self):
        return self.eps

    def f(self, w, x, t):
        return self.eps * np.asarray(w) ** 2

    def d1f(self, w, x, t):
        return 2.0 * self.eps * np.asarray(w)

    def sup_f_bound(self, w_max):
        return abs(self.eps) * w_max**2

    def with_strength(self, strength):
        return Quadratic(strength)

    def label(self):
        return "quadratic"


@dataclass
class Potential(Nonlinearity):
    """f = eps * V(x) * w for a real band-limited multiplier V."""

    eps: float
    V: SpectralField
    _value_cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        rev = np.conj(self.V.coeffs[::-1])
        if not np.allclose(self.V.coeffs, rev, rtol=0, atol=1e-13):
            raise ValueError("potential multiplier must be real-valued")

    @property
    def strength(self):
        return self.eps

    def values_on(self, N: int) -> np.ndarray:
        if N not in self._value_cache:
            vals = synthesize_many(self.V.coeffs[np.newaxis, :], self.V.k, N)[0]
            self._value_cache[N] = vals.real.copy()
        return self._value_cache[N]

    def _values_at(self, x) -> np.ndarray:
        x = np.asarray(x)
        n = np.arange(-self.V.k, self.V.k + 1)
        vals = (self.V.coeffs * np.exp(1j * np.outer(x.ravel(), n))).sum(axis=-1)
        return (vals.real / ROOT_2PI).reshape(x.shape)

    def f(self, w, x, t):
        return self.eps * self._grid_values(w, x) * np.asarray(w)

    def d1f(self, w, x, t):
        return self.eps * np.broadcast_to(self._grid_values(w, x), np.shape(w)).copy()

    def _grid_values(self, w, x):
        x = np.asarray(x)
        # Fast path: x is the canonical N-point grid, dense in the solvers.
        if x.ndim == 1 and x.size >= 2 and x[0] == 0.0:
            N = x.size
            if abs(x[1] - TWO_PI / N) < 1e-15:
                return self.values_on(N)
        return self._values_at(x)

    def sup_f_bound(self, w_max):
        # sup|V| <= (2pi)^(-1/2) * sum |V^(n)|, exact for single-harmonic V.
        v_bound = float(np.sum(np.abs(self.V.coeffs))) / ROOT_2PI
        return abs(self.eps) * v_bound * w_max

    def with_strength(self, strength):
        return Potential(strength, self.V)

    def label(self):
        return "potential"


@dataclass
class TimeModulated(Nonlinearity):
    """Wrapper multiplying a base density by 1 + cos(2pi t)."""

    base: Nonlinearity

    @property
    def strength(self):
        return self.base.strength

    @staticmethod
    def factor(t):
        return 1.0 + np.cos(TWO_PI * np.asarray(t, dtype=float))

    def f(self, w, x, t):
        return self.factor(t) * self.base.f(w, x, t)

    def d1f(self, w, x, t):
        return self.factor(t) * self.base.d1f(w, x, t)

    def sup_f_bound(self, w_max):
        return 2.0 * self.base.sup_f_bound(w_max)

    def with_strength(self, strength):
        return TimeModulated(self.base.with_strength(strength))

    def label(self):
        return "time_modulated(" + self.base.label() + ")"


def cosine_field(k: int = 1) -> SpectralField:
    """The multiplier V(x) = cos x as a spectral field."""
    if k < 1:
        raise ValueError("need bandwidth >= 1 for cos x")
    c = np.zeros(2 * k + 1, dtype=np.complex128)
    c[k - 1] = c[k + 1] = ROOT_2PI / 2.0
    return SpectralField(k, c)


# ---------------------------------------------------------------------------
# model


@dataclass
class ModelSpec:
    """Kernel + nonlinearity evaluated at a fixed working bandwidth."""

    kernel: KernelSpec
    nonlinearity: Nonlinearity
    k: int

    def __post_init__(self):
        if self.k < 0:
            raise ValueError("bandwidth must be nonnegative")
        self._psi_band = self.kernel.coeff_array(self.k)
        self._N = 4 * (2 * self.k + 1)
        self._x = grid_nodes(self._N)

    @property
    def quad_points(self) -> int:
        return self._N

    @property
    def psi_band(self) -> np.ndarray:
        """Kernel coefficients restricted to the working band."""
        return self._psi_band

    def w_max(self) -> float:
        return self.kernel.l2() ** 2

    def sup_f_bound(self) -> float:
        return self.nonlinearity.sup_f_bound(self.w_max())

    def smallness_gate(self) -> bool:
        return self.sup_f_bound() < 0.125

    def with_strength(self, strength: float) -> "ModelSpec":
        return ModelSpec(self.kernel, self.nonlinearity.with_strength(strength), self.k)

    def with_kernel(self, kernel: KernelSpec) -> "ModelSpec":
        return ModelSpec(kernel, self.nonlinearity, self.k)

    def with_bandwidth(self, k: int) -> "ModelSpec":
        return ModelSpec(self.kernel, self.nonlinearity, k)


def _check_band(model: ModelSpec, u: SpectralField):
    if u.k > model.k:
        raise ValueError(
            f"field bandwidth {u.k} exceeds model bandwidth {model.k}"
        )


def eval_F_many(model: ModelSpec, coeffs: np.ndarray, t) -> np.ndarray:
    """Batched values of F_t; coeffs has shape (..., 2k+1)."""
    v = coeffs * model.psi_band
    vals = synthesize_many(v, model.k, model.quad_points)
    w = np.abs(vals) ** 2
    t_arr = np.asarray(t, dtype=float)
    fvals = model.nonlinearity.f(w, model._x, t_arr[..., np.newaxis])
    return -0.5 * (TWO_PI / model.quad_points) * np.sum(fvals, axis=-1)


def grad_F_many(model: ModelSpec, coeffs: np.ndarray, t) -> np.ndarray:
    """Batched L2 gradients of F_t; shapes mirror eval_F_many."""
    v = coeffs * model.psi_band
    vals = synthesize_many(v, model.k, model.quad_points)
    w = np.abs(vals) ** 2
    t_arr = np.asarray(t, dtype=float)
    d1 = model.nonlinearity.d1f(w, model._x, t_arr[..., np.newaxis])
    ghat = analyze_many(-d1 * vals, model.k)
    return ghat * model.psi_band


def eval_F(model: ModelSpec, u: SpectralField, t: float) -> float:
    _check_band(model, u)
    c = u.with_bandwidth(model.k).coeffs
    return float(eval_F_many(model, c[np.newaxis, :], np.array([t]))[0])


def grad_F(model: ModelSpec, u: SpectralField, t: float) -> SpectralField:
    _check_band(model, u)
    c = u.with_bandwidth(model.k).coeffs
    g = grad_F_many(model, c[np.newaxis, :], np.array([t]))[0]
    return SpectralField(model.k, g)


def free_phases(k: int, t: float) -> np.ndarray:
    """Diagonal of the free propagator: exp(-i n^2 t) for n = -k..k."""
    n = np.arange(-k, k + 1)
    return np.exp(-1j * (n.astype(float) ** 2) * t)


def eval_G(model: ModelSpec, u: SpectralField, t: float) -> float:
    """G_t = F_t composed with the free flow."""
    _check_band(model, u)
    c = u.with_bandwidth(model.k).coeffs * free_phases(model.k, t)
    return float(eval_F_many(model, c[np.newaxis, :], np.array([t]))[0])


def grad_G(model: ModelSpec, u: SpectralField, t: float) -> SpectralField:
    """Gradient of G_t, pulled back through the (unitary) free flow."""
    _check_band(model, u)
    ph = free_phases(model.k, t)
    c = u.with_bandwidth(model.k).coeffs * ph
    g = grad_F_many(model, c[np.newaxis, :], np.array([t]))[0]
    return SpectralField(model.k, g * np.conj(ph))


# ---------------------------------------------------------------------------
# Galerkin truncation gap


@dataclass
class GapReport:
    k: int
    R: float
    samples: int
    seed: int
    f_gap: float
    grad_gap: float
    conv_bound: float


def galerkin_gap(
    model: ModelSpec, k: int, R: float, samples: int = 32, seed: int = 0
) -> GapReport:
    """Sampled truncation gaps between the full kernel and psi^k.

    Draws fields with L2 norm <= R at the model bandwidth (half the draws
    sit exactly on the sphere of radius R, where the gap is largest) and
    reports the worst observed |F - F^k| and L2(grad F - grad F^k),
    together with the analytic smoothing bound R * L2(psi - psi^k).
    """
    if k < 0 or R <= 0:
        raise ValueError("need k >= 0 and R > 0")
    rng = np.random.default_rng(seed)
    trunc = model.with_kernel(truncate_kernel(model.kernel, k))
    dim = 2 * model.k + 1
    f_gap = 0.0
    grad_gap = 0.0
    for j in range(samples):
        z = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        z /= np.linalg.norm(z)
        r = R if j % 2 == 0 else R * rng.uniform() ** 0.5
        c = (r * z)[np.newaxis, :]
        t = np.array([rng.uniform()])
        df = eval_F_many(model, c, t) - eval_F_many(trunc, c, t)
        f_gap = max(f_gap, abs(df[0]))
        dg = grad_F_many(model, c, t) - grad_F_many(trunc, c, t)
        grad_gap = max(grad_gap, float(np.linalg.norm(dg)))
    return GapReport(
        k=k,
        R=R,
        samples=samples,
        seed=seed,
        f_gap=f_gap,
        grad_gap=grad_gap,
        conv_bound=R * model.kernel.l2_tail(k),
    )


# ---------------------------------------------------------------------------
# Hofer-type oscillation of the functional


@dataclass
class HoferConfig:
    t_nodes: int = 16
    starts: int = 8
    iters: int = 300
    grad_tol: float = 1e-10
    seed: int = 0


@dataclass
class HoferNode:
    t: float
    max_value: float
    min_value: float
    converged: bool


@dataclass
class HoferReport:
    estimate: float
    sufficient_gate: bool
    sup_f_bound: float
    nodes: list
    all_converged: bool

    def oscillations(self) -> np.ndarray:
        return np.array([nd.max_value - nd.min_value for nd in self.nodes])


def _extremize_on_sphere(model, t, sign, starts, iters, grad_tol, rng):
    """Maximize sign * F_t on the unit sphere by projected gradient ascent.

    Coordinate fields are screened first; for diagonal functionals they
    already sit at the extrema.  Returns (best value of sign*F, converged).
    """
    dim = 2 * model.k + 1
    basis = np.eye(dim, dtype=np.complex128)
    fb = sign * eval_F_many(model, basis, np.full(dim, t))
    order = np.argsort(fb)[::-1]
    cand = [basis[i] for i in order[: max(2, starts // 2)]]
    while len(cand) < starts:
        z = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        cand.append(z / np.linalg.norm(z))

    best = -np.inf
    best_converged = False
    t1 = np.array([t])
    for c in cand:
        u = c.copy()
        fval = sign * float(eval_F_many(model, u[np.newaxis], t1)[0])
        step = 0.5
        converged = False
        for _ in range(iters):
            g = sign * grad_F_many(model, u[np.newaxis], t1)[0]
            g_tan = g - np.vdot(u, g).real * u
            gn = float(np.linalg.norm(g_tan))
            if gn < grad_tol:
                converged = True
                break
            moved = False
            while step > 1e-15:
                cand_u = u + step * g_tan
                cand_u /= np.linalg.norm(cand_u)
                fc = sign * float(eval_F_many(model, cand_u[np.newaxis], t1)[0])
                if fc > fval + 1e-4 * step * gn * gn:
                    u, fval = cand_u, fc
                    step *= 1.5
                    moved = True
                    break
                step *= 0.5
            if not moved:
                converged = gn < 1e3 * grad_tol
                break
        if fval > best:
            best, best_converged = fval, converged
    return best, best_converged


def hofer_norm(
    model: ModelSpec, t_nodes: int = 16, cfg: Optional[HoferConfig] = None
) -> HoferReport:
    """Estimate the oscillation integral int_0^1 (max F_t - min F_t) dt.

    The max and min over the unit sphere are found by multi-start
    projected gradient ascent/descent; the t-integral uses the uniform
    (periodic trapezoid) rule.  The sampled estimate never exceeds the
    true oscillation, and non-converged nodes are flagged rather than
    dropped.
    """
    if cfg is None:
        cfg = HoferConfig(t_nodes=t_nodes)
    rng = np.random.default_rng(cfg.seed)
    nodes = []
    for j in range(t_nodes):
        t = j / t_nodes
        fmax, c1 = _extremize_on_sphere(
            model, t, +1.0, cfg.starts, cfg.iters, cfg.grad_tol, rng
        )
        fmin_neg, c2 = _extremize_on_sphere(
            model, t, -1.0, cfg.starts, cfg.iters, cfg.grad_tol, rng
        )
        nodes.append(
            HoferNode(t=t, max_value=fmax, min_value=-fmin_neg, converged=c1 and c2)
        )
    osc = np.array([nd.max_value - nd.min_value for nd in nodes])
    return HoferReport(
        estimate=float(np.mean(osc)),
        sufficient_gate=model.smallness_gate(),
        sup_f_bound=model.sup_f_bound(),
        nodes=nodes,
        all_converged=all(nd.converged for nd in nodes),
    )


def orthogonality_defect(model: ModelSpec, u: SpectralField, t: float) -> float:
    """Re<u, i grad F_t(u)>, zero in exact arithmetic for any real even kernel."""
    g = grad_F(model, u, t)
    return inner_real(u, SpectralField(g.k, 1j * g.coeffs))
