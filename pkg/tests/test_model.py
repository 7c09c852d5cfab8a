"""Nonlinearity catalog: values, gradients, truncation gaps, oscillation."""

import math

import numpy as np
import pytest

from nlsfloer.model import (
    Constant,
    Hartree,
    ModelSpec,
    Potential,
    Quadratic,
    TimeModulated,
    band_limited_kernel,
    cosine_field,
    eval_F,
    eval_G,
    exponential_kernel,
    galerkin_gap,
    grad_F,
    grad_G,
    hofer_norm,
    orthogonality_defect,
    truncate_kernel,
)
from nlsfloer.spectral import SpectralField, basis_point, inner_real, norm

RNG = np.random.default_rng


def random_unit(k, rng):
    c = rng.standard_normal(2 * k + 1) + 1j * rng.standard_normal(2 * k + 1)
    return SpectralField(k, c / np.linalg.norm(c))


def catalog(k=6):
    """One model per catalog member at working bandwidth k."""
    ker = exponential_kernel(1.0, k)
    return [
        ModelSpec(ker, Constant(0.1), k),
        ModelSpec(ker, Hartree(0.1), k),
        ModelSpec(ker, Quadratic(0.1), k),
        ModelSpec(ker, Potential(0.05, cosine_field()), k),
        ModelSpec(ker, TimeModulated(Quadratic(0.05)), k),
    ]


# ---------------------------------------------------------------------------
# kernels


def test_kernel_validation():
    with pytest.raises(ValueError):
        band_limited_kernel(2).__class__(2, np.array([1, 0, 1, 0, 0.5]))
    with pytest.raises(ValueError):
        band_limited_kernel(2).__class__(1, np.array([0.5, 1.0, -0.5]))


def test_exponential_tail_closed_form():
    ker = exponential_kernel(1.0, 40)
    k = 3
    # sum_{|n|>k} e^{-2|n|} = 2 e^{-2(k+1)} / (1 - e^{-2})
    expected = math.sqrt(2.0 * math.exp(-2.0 * (k + 1)) / (1.0 - math.exp(-2.0)))
    assert abs(ker.l2_tail(k) - expected) < 1e-12
    assert ker.l2_tail(40) == 0.0


def test_truncation_monotone():
    ker = exponential_kernel(0.7, 24)
    tails = [ker.l2_tail(k) for k in range(10)]
    assert all(b < a for a, b in zip(tails, tails[1:]))
    tk = truncate_kernel(ker, 4)
    assert tk.k_max == 4
    assert np.allclose(tk.psi_hat, ker.coeff_array(4))


def test_band_limited_kernel_truncation_is_lossless_beyond_support():
    ker = band_limited_kernel(2, k_max=8)
    assert ker.l2_tail(2) == 0.0
    assert ker.l2_tail(5) == 0.0


# ---------------------------------------------------------------------------
# values


def test_constant_density_value():
    # F_t(u) = -1/2 int c dx = -pi c, independent of u
    k = 5
    model = ModelSpec(exponential_kernel(1.0, k), Constant(0.1), k)
    u = random_unit(k, RNG(0))
    assert abs(eval_F(model, u, 0.3) + math.pi * 0.1) < 1e-13


def test_hartree_value_closed_form():
    # F(u) = -(eps/2) sum psi^(n)^2 |u^(n)|^2
    k = 4
    eps = 0.1
    model = ModelSpec(exponential_kernel(1.0, k), Hartree(eps), k)
    u = basis_point(0, k)
    assert abs(eval_F(model, u, 0.0) + 0.05) < 1e-14
    rng = RNG(1)
    v = random_unit(k, rng)
    psi2 = np.exp(-2.0 * np.abs(np.arange(-k, k + 1)))
    expected = -0.5 * eps * float(np.sum(psi2 * np.abs(v.coeffs) ** 2))
    assert abs(eval_F(model, v, 0.7) - expected) < 1e-14


def test_zero_field_zero_value_for_homogeneous_members():
    k = 4
    zero = SpectralField(k, np.zeros(2 * k + 1, dtype=complex))
    for model in catalog(k):
        if isinstance(model.nonlinearity, Constant):
            continue
        assert abs(eval_F(model, zero, 0.2)) < 1e-15


def test_time_periodicity():
    rng = RNG(2)
    for model in catalog():
        u = random_unit(model.k, rng)
        t = rng.uniform()
        assert abs(eval_F(model, u, t) - eval_F(model, u, t + 1.0)) < 1e-13


# ---------------------------------------------------------------------------
# gradients


def test_hartree_gradient_is_diagonal():
    k = 5
    eps = 0.1
    model = ModelSpec(exponential_kernel(1.0, k), Hartree(eps), k)
    u = random_unit(k, RNG(3))
    g = grad_F(model, u, 0.0)
    psi2 = np.exp(-2.0 * np.abs(np.arange(-k, k + 1)))
    assert np.max(np.abs(g.coeffs + eps * psi2 * u.coeffs)) < 1e-14


def test_constant_gradient_vanishes():
    k = 3
    model = ModelSpec(exponential_kernel(1.0, k), Constant(0.3), k)
    g = grad_F(model, random_unit(k, RNG(4)), 0.1)
    assert norm(g) < 1e-15


@pytest.mark.parametrize("member", range(5))
def test_gradient_matches_directional_difference(member):
    model = catalog()[member]
    k = model.k
    rng = RNG(40 + member)
    for _ in range(10):
        u = random_unit(k, rng)
        h = random_unit(k, rng)
        t = rng.uniform()
        g = grad_F(model, u, t)
        eta = 1e-6
        up = SpectralField(k, u.coeffs + eta * h.coeffs)
        dn = SpectralField(k, u.coeffs - eta * h.coeffs)
        fd = (eval_F(model, up, t) - eval_F(model, dn, t)) / (2 * eta)
        pairing = inner_real(g, h)
        scale = max(1.0, abs(fd))
        assert abs(fd - pairing) / scale < 1e-6


def test_rotated_gradient_matches_rotated_functional():
    model = catalog()[3]
    k = model.k
    rng = RNG(5)
    u = random_unit(k, rng)
    h = random_unit(k, rng)
    t = 0.37
    assert abs(eval_G(model, u, t) - eval_F(model, _free(u, t), t)) < 1e-14
    g = grad_G(model, u, t)
    eta = 1e-6
    up = SpectralField(k, u.coeffs + eta * h.coeffs)
    dn = SpectralField(k, u.coeffs - eta * h.coeffs)
    fd = (eval_G(model, up, t) - eval_G(model, dn, t)) / (2 * eta)
    assert abs(fd - inner_real(g, h)) < 1e-6


def _free(u, t):
    n = np.arange(-u.k, u.k + 1)
    return SpectralField(u.k, u.coeffs * np.exp(-1j * n.astype(float) ** 2 * t))


def test_gradient_pairs_to_zero_against_iu():
    rng = RNG(6)
    for model in catalog():
        u = random_unit(model.k, rng)
        assert abs(orthogonality_defect(model, u, rng.uniform())) < 1e-13


def test_gradient_respects_kernel_support():
    # outer convolution kills modes beyond the kernel band
    k = 6
    model = ModelSpec(band_limited_kernel(2, k_max=k), Quadratic(0.2), k)
    u = random_unit(k, RNG(7))
    g = grad_F(model, u, 0.0)
    n = np.arange(-k, k + 1)
    assert np.max(np.abs(g.coeffs[np.abs(n) > 2])) == 0.0


# ---------------------------------------------------------------------------
# truncation gap


def test_gap_zero_beyond_band_limited_support():
    k = 6
    model = ModelSpec(band_limited_kernel(2, k_max=k), Quadratic(0.2), k)
    rep = galerkin_gap(model, 2, R=1.0, samples=8, seed=0)
    assert rep.f_gap < 1e-14
    assert rep.grad_gap < 1e-14
    assert rep.conv_bound == 0.0


def test_gap_shrinks_with_truncation_order():
    k = 12
    model = ModelSpec(exponential_kernel(1.0, k), Quadratic(0.1), k)
    reps = [galerkin_gap(model, kk, R=1.0, samples=12, seed=3) for kk in (2, 4, 6)]
    grads = [r.grad_gap for r in reps]
    assert grads[0] > grads[1] > grads[2] > 0
    for r in reps:
        assert r.conv_bound == pytest.approx(
            1.0 * model.kernel.l2_tail(r.k), rel=1e-12
        )


def test_hartree_value_gap_against_diagonal_form():
    # for hartree the gap is diagonal: (eps/2) max tail of psi^2 weights
    k = 10
    eps = 0.1
    model = ModelSpec(exponential_kernel(1.0, k), Hartree(eps), k)
    kk = 3
    rep = galerkin_gap(model, kk, R=1.0, samples=16, seed=1)
    worst = 0.5 * eps * math.exp(-2.0 * (kk + 1))
    assert rep.f_gap <= worst + 1e-15
    assert rep.f_gap >= 0.1 * worst


# ---------------------------------------------------------------------------
# oscillation estimate


def test_hartree_oscillation_closed_form():
    # max/min of the diagonal quadratic form on the sphere
    k = 6
    eps = 0.1
    model = ModelSpec(exponential_kernel(1.0, k), Hartree(eps), k)
    rep = hofer_norm(model, t_nodes=2)
    expected = 0.5 * eps * (1.0 - math.exp(-2.0 * k))
    assert rep.all_converged
    assert abs(rep.estimate - expected) <= 0.01 * expected


def test_smallness_gate_thresholds():
    k = 4
    ker = exponential_kernel(1.0, k)
    w_max = ker.l2() ** 2
    just_below = ModelSpec(ker, Hartree(0.12 / w_max), k)
    assert abs(just_below.sup_f_bound() - 0.12) < 1e-12
    assert just_below.smallness_gate()
    just_above = ModelSpec(ker, Hartree(0.13 / w_max), k)
    assert not just_above.smallness_gate()


def test_sup_f_bounds_dominate_samples():
    rng = RNG(8)
    for model in catalog():
        bound = model.sup_f_bound()
        w_max = model.w_max()
        w = rng.uniform(0.0, w_max, size=200)
        x = rng.uniform(0.0, 2 * np.pi, size=200)
        t = rng.uniform(0.0, 1.0, size=200)
        vals = np.abs(model.nonlinearity.f(w, x, t))
        assert np.max(vals) <= bound + 1e-12


def test_potential_bound_is_sharp_for_cosine():
    pot = Potential(0.05, cosine_field())
    # sup |eps cos(x) w| over w <= w_max equals eps * w_max exactly
    assert pot.sup_f_bound(2.0) == pytest.approx(0.1, rel=1e-12)


def test_modulated_oscillation_doubles_bound():
    base = Quadratic(0.03)
    assert TimeModulated(base).sup_f_bound(1.5) == 2 * base.sup_f_bound(1.5)
