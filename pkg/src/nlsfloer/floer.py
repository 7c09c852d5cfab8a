"""Cylinder boundary-value machinery for connecting orbits.

The curve is stored in the transformed picture v(s,t) = free_flow_t(u(s,t)),
which is genuinely 1-periodic in t, so t-derivatives are spectral.  The
equation discretized at each interior node is

    residual = D_s v + i D_t v + grad H0(v) + phi_T(s) grad F_t(v),

projected onto the complex orthogonal complement of the node field.  The
projection removes the radial and global-phase directions, which is what
makes the residual a statement about the projective curve: the gauge-fixed
constant free orbit solves it exactly, and the reported norm, energy, and
distances are all phase-invariant.

Boundary rows at s = -S and s = +S carry prescribed orbits (Dirichlet data
standing in for the asymptotics on the line); the window always contains
the full support of the cutoff, so both ends sit in the free region.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.sparse.linalg import LinearOperator, lsmr

from .dynamics import ProjectivePoint, fs_distance
from .model import ModelSpec, grad_F_many
from .spectral import SpectralField

# ---------------------------------------------------------------------------
# cutoff family


def _smooth_step(y) -> np.ndarray:
    """C-infinity step: 0 for y <= 0, 1 for y >= 1, symmetric about 1/2."""
    y = np.asarray(y, dtype=np.float64)
    out = np.zeros_like(y)
    inside = (y > 0.0) & (y < 1.0)
    yi = y[inside]
    e0 = np.exp(-1.0 / yi)
    e1 = np.exp(-1.0 / (1.0 - yi))
    out[inside] = e0 / (e0 + e1)
    out[y >= 1.0] = 1.0
    return out


def _smooth_step_slope(y) -> np.ndarray:
    y = np.asarray(y, dtype=np.float64)
    out = np.zeros_like(y)
    inside = (y > 0.0) & (y < 1.0)
    yi = y[inside]
    e0 = np.exp(-1.0 / yi)
    e1 = np.exp(-1.0 / (1.0 - yi))
    out[inside] = (
        e0 * e1 * (yi**-2 + (1.0 - yi) ** -2) / (e0 + e1) ** 2
    )
    return out


@dataclass(frozen=True)
class CutoffProfile:
    """Switching profile: 0 off [-1, 2T+1], 1 on [0, 2T], ramps of width 1.

    The ramp is the symmetric exponential smoothstep, whose maximal slope
    is exactly 2 at the ramp midpoint, so the slope constraints hold with
    equality at one point.  T = 0 is identically zero.
    """

    T: float

    def phi(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=np.float64)
        if self.T == 0.0:
            return np.zeros_like(s)
        return _smooth_step(s + 1.0) * _smooth_step(2.0 * self.T + 1.0 - s)

    def slope(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=np.float64)
        if self.T == 0.0:
            return np.zeros_like(s)
        up = _smooth_step(s + 1.0)
        down = _smooth_step(2.0 * self.T + 1.0 - s)
        return (
            _smooth_step_slope(s + 1.0) * down
            - up * _smooth_step_slope(2.0 * self.T + 1.0 - s)
        )

    @property
    def support(self) -> tuple:
        return (-1.0, 2.0 * self.T + 1.0)


def build_cutoff(T: float) -> CutoffProfile:
    if T < 0:
        raise ValueError("T must be nonnegative")
    return CutoffProfile(float(T))


# ---------------------------------------------------------------------------
# grid and state


@dataclass(frozen=True)
class CylinderGrid:
    """Uniform discretization of [-S, S] x [0, 1) at spatial bandwidth k."""

    S: float
    N_s: int
    N_t: int
    k: int

    def __post_init__(self):
        if self.N_s < 16:
            raise ValueError("need N_s >= 16")
        if self.N_t < 8:
            raise ValueError("need N_t >= 8")
        if self.S <= 1.0:
            raise ValueError("window must contain the up-ramp [-1, 0]")
        if self.k < 0:
            raise ValueError("bandwidth must be nonnegative")

    @property
    def s_nodes(self) -> np.ndarray:
        return np.linspace(-self.S, self.S, self.N_s)

    @property
    def t_nodes(self) -> np.ndarray:
        return np.arange(self.N_t) / self.N_t

    @property
    def ds(self) -> float:
        return 2.0 * self.S / (self.N_s - 1)

    @property
    def dt(self) -> float:
        return 1.0 / self.N_t

    @property
    def dim(self) -> int:
        return 2 * self.k + 1


@dataclass
class FloerState:
    """Unit-norm node fields on the cylinder in the transformed picture.

    coeffs has shape (N_s, N_t, 2k+1); rows 0 and N_s-1 are the prescribed
    boundary orbits.
    """

    grid: CylinderGrid
    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=np.complex128)
        expected = (self.grid.N_s, self.grid.N_t, self.grid.dim)
        if self.coeffs.shape != expected:
            raise ValueError(f"coeffs must have shape {expected}")
        if not np.all(np.isfinite(self.coeffs)):
            raise ValueError("state coefficients must be finite")

    @property
    def boundary(self) -> tuple:
        return self.coeffs[0], self.coeffs[-1]

    def normalized(self) -> np.ndarray:
        """Coefficients with every node scaled to the unit sphere."""
        norms = np.linalg.norm(self.coeffs, axis=-1, keepdims=True)
        if np.any(norms == 0):
            raise ValueError("node field with zero norm")
        return self.coeffs / norms

    def node(self, i: int, j: int) -> SpectralField:
        return SpectralField(self.grid.k, self.coeffs[i, j].copy())

    def to_json(self) -> str:
        payload = {
            "grid": {
                "S": self.grid.S,
                "N_s": self.grid.N_s,
                "N_t": self.grid.N_t,
                "k": self.grid.k,
            },
            "coeffs": [
                [
                    [[float(z.real), float(z.imag)] for z in node]
                    for node in row
                ]
                for row in self.coeffs
            ],
        }
        return json.dumps(payload)

    @staticmethod
    def from_json(text: str) -> "FloerState":
        payload = json.loads(text)
        g = payload["grid"]
        grid = CylinderGrid(S=g["S"], N_s=g["N_s"], N_t=g["N_t"], k=g["k"])
        arr = np.array(payload["coeffs"], dtype=np.float64)
        return FloerState(grid, arr[..., 0] + 1j * arr[..., 1])


# ---------------------------------------------------------------------------
# boundary orbits and guesses


def boundary_orbit(
    model: ModelSpec, point: ProjectivePoint, N_t: int, side: str = "right"
) -> np.ndarray:
    """Transformed-picture orbit rows of a fixed point at the t nodes.

    Gauge aligned at the point's pivot mode n, the transformed free orbit
    carries mode m with phase rate n^2 - m^2.  Those rates are not
    2 pi-commensurate, so sampling them directly would leak across every
    discrete frequency bin and the spectral t-derivative of the rows
    would be garbage.  Each rate is therefore snapped to an integer
    frequency, which makes the rows exactly band-limited on the t grid
    while keeping the row at t = 0 equal to the point itself.

    The snapped bin is not the nearest one but the nearest on the side
    whose linearized response decays into the window: the defect left in
    bin (m, p) is (n^2 - m^2 - 2 pi p) times the mode content, and the
    strip linearization grows like exp((m^2 - n^2 + 2 pi p) s), so a
    right-end row needs m^2 - n^2 + 2 pi p >= 0 and a left-end row the
    reverse.  Any other choice dumps the defect on a mode that can only
    be absorbed by the sawtooth branch of the central difference, which
    concentrates in a single cell and keeps the energy from converging
    under s refinement.
    """
    if point.k != model.k:
        raise ValueError("point bandwidth must match the model")
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    k = model.k
    modes = np.arange(-k, k + 1)
    rates = (float(point.gauge_index**2) - modes.astype(np.float64) ** 2) / (
        2.0 * np.pi
    )
    p_star = np.ceil(rates) if side == "right" else np.floor(rates)
    t = np.arange(N_t, dtype=np.float64)[:, None] / N_t
    c = point.coeffs / np.linalg.norm(point.coeffs)
    return c[None, :] * np.exp(2j * np.pi * p_star[None, :] * t)


def build_initial_guess(
    grid: CylinderGrid,
    left: np.ndarray,
    right: np.ndarray,
    cutoff: CutoffProfile,
) -> FloerState:
    """Blend the boundary orbits across the cutoff transition region."""
    left = np.asarray(left, dtype=np.complex128)
    right = np.asarray(right, dtype=np.complex128)
    if left.shape != (grid.N_t, grid.dim) or right.shape != (grid.N_t, grid.dim):
        raise ValueError("boundary rows must have shape (N_t, 2k+1)")
    a, b = cutoff.support
    sigma = _smooth_step((grid.s_nodes - a) / (b - a))
    mix = (1.0 - sigma)[:, None, None] * left[None] + sigma[:, None, None] * right[None]
    norms = np.linalg.norm(mix, axis=-1, keepdims=True)
    if np.any(norms < 1e-8):
        raise ValueError("boundary orbits too far apart for a linear blend")
    mix /= norms
    mix[0] = left
    mix[-1] = right
    return FloerState(grid, mix)


# ---------------------------------------------------------------------------
# residual and energy


def _dt_spectral(C: np.ndarray) -> np.ndarray:
    """Spectral t-derivative along axis 1 of (..., N_t, dim) data."""
    N_t = C.shape[1]
    p = np.fft.fftfreq(N_t) * N_t
    sym = (2j * math.pi * p)[None, :, None]
    return np.fft.ifft(np.fft.fft(C, axis=1) * sym, axis=1)


def _project_out(R: np.ndarray, V: np.ndarray) -> np.ndarray:
    """Remove the complex line through each unit node field V from R."""
    overlap = np.sum(R * np.conj(V), axis=-1, keepdims=True)
    return R - overlap * V


def _tangent(delta: np.ndarray, V: np.ndarray) -> np.ndarray:
    """Remove the radial (normalization) direction at each node."""
    radial = np.sum(delta.real * V.real + delta.imag * V.imag, axis=-1, keepdims=True)
    return delta - radial * V


def _check_compatible(model: ModelSpec, state: FloerState):
    if model.k != state.grid.k:
        raise ValueError("model bandwidth must match the grid")


def _mode_squares(k: int) -> np.ndarray:
    n = np.arange(-k, k + 1)
    return (n.astype(np.float64)) ** 2


def _grad_rows(model: ModelSpec, C: np.ndarray, t_nodes: np.ndarray) -> np.ndarray:
    """grad F_t at every node of C, shape (rows, N_t, dim)."""
    rows, N_t, d = C.shape
    flat = C.reshape(rows * N_t, d)
    t_flat = np.tile(t_nodes, rows)
    return grad_F_many(model, flat, t_flat).reshape(rows, N_t, d)


@dataclass
class FloerResidual:
    field: np.ndarray
    norm: float


def floer_residual(
    model: ModelSpec, state: FloerState, cutoff: CutoffProfile
) -> FloerResidual:
    """Projected equation residual at the interior nodes."""
    _check_compatible(model, state)
    grid = state.grid
    C = state.normalized()
    phi = cutoff.phi(grid.s_nodes)
    Ds = (C[2:] - C[:-2]) / (2.0 * grid.ds)
    Dt = _dt_spectral(C)[1:-1]
    V = C[1:-1]
    lin = Ds + 1j * Dt - _mode_squares(grid.k)[None, None, :] * V
    G = _grad_rows(model, V, grid.t_nodes)
    R = _project_out(lin + phi[1:-1, None, None] * G, V)
    norm = math.sqrt(grid.ds * grid.dt * float(np.sum(np.abs(R) ** 2)))
    return FloerResidual(field=R, norm=norm)


def floer_residual_twisted(
    model: ModelSpec, state: FloerState, cutoff: CutoffProfile
) -> FloerResidual:
    """Same residual assembled in the untransformed twisted picture.

    The stored state is mapped node by node through the inverse free flow,
    differentiated with the twist-aware t-derivative, and driven by the
    rotated gradient grad G_t; the result is mapped back.  Per mode the
    free flow is a phase, so this must agree with floer_residual to
    rounding; it exercises the conjugation identities end to end.
    """
    _check_compatible(model, state)
    grid = state.grid
    C = state.normalized()
    phi = cutoff.phi(grid.s_nodes)
    n2 = _mode_squares(grid.k)
    phases = np.exp(-1j * n2[None, :] * grid.t_nodes[:, None])  # free flow
    U = C * np.conj(phases)[None]  # twisted picture nodes

    Ds = (U[2:] - U[:-2]) / (2.0 * grid.ds)
    W = U * phases[None]
    DtW = _dt_spectral(W)
    # twisted derivative: conjugate back and subtract the connection term
    DtU = DtW * np.conj(phases)[None] - (1j * (-n2))[None, None, :] * U
    UI = U[1:-1]
    # grad G_t via conjugation by the free flow
    G = _grad_rows(model, UI * phases[None], grid.t_nodes) * np.conj(phases)[None]
    lin = Ds + 1j * DtU[1:-1]
    R = _project_out(lin + phi[1:-1, None, None] * G, UI)
    back = R * phases[None]
    norm = math.sqrt(grid.ds * grid.dt * float(np.sum(np.abs(back) ** 2)))
    return FloerResidual(field=back, norm=norm)


def _energy_node_map(
    model: ModelSpec, state: FloerState, cutoff: CutoffProfile
) -> tuple:
    """Projected |D_s|^2 and t-equation density summed over modes, per node.

    Returns two (N_s, N_t) real arrays.  The end rows have no interior
    stencil, and a one-sided difference picks up the sawtooth branch of
    the scheme at amplitude 1/ds.  On a solved curve the two densities
    agree pointwise (D_s = -i times the t-part), so the t-equation
    density stands in for |D_s|^2 there.
    """
    grid = state.grid
    C = state.normalized()
    phi = cutoff.phi(grid.s_nodes)

    Ds = np.zeros_like(C)
    Ds[1:-1] = (C[2:] - C[:-2]) / (2.0 * grid.ds)
    Ds = _project_out(Ds, C)

    Dt = _dt_spectral(C)
    n2 = _mode_squares(grid.k)
    G = _grad_rows(model, C, grid.t_nodes)
    # X^{H0} v = -i n^2 v ; X^F = i grad F
    tpart = Dt + 1j * n2[None, None, :] * C - phi[:, None, None] * (1j * G)
    tpart = _project_out(tpart, C)

    ds_map = np.sum(np.abs(Ds) ** 2, axis=2)
    t_map = np.sum(np.abs(tpart) ** 2, axis=2)
    ds_map[0] = t_map[0]
    ds_map[-1] = t_map[-1]
    return ds_map, t_map


def _energy_densities(
    model: ModelSpec, state: FloerState, cutoff: CutoffProfile
) -> tuple:
    """Projected |D_s|^2 and t-equation density per s row."""
    ds_map, t_map = _energy_node_map(model, state, cutoff)
    ds_density = state.grid.dt * np.sum(ds_map, axis=1)
    t_density = state.grid.dt * np.sum(t_map, axis=1)
    return ds_density, t_density


def floer_energy(
    model: ModelSpec, state: FloerState, cutoff: CutoffProfile
) -> float:
    """Trapezoid-in-s, spectral-in-t quadrature of the curve energy."""
    _check_compatible(model, state)
    ds_density, t_density = _energy_densities(model, state, cutoff)
    w = np.ones(state.grid.N_s)
    w[0] = w[-1] = 0.5
    return float(0.5 * state.grid.ds * np.sum(w * (ds_density + t_density)))


# ---------------------------------------------------------------------------
# Gauss-Newton solver


@dataclass
class FloerResult:
    state: FloerState
    converged: bool
    iterations: int
    residual_norm: float
    energy: float
    history: list
    message: str


def _real_view(z: np.ndarray) -> np.ndarray:
    return z.reshape(-1).view(np.float64)


def _complex_view(r: np.ndarray, shape) -> np.ndarray:
    return r.view(np.complex128).reshape(shape)


def _fd_blocks(
    model: ModelSpec, V: np.ndarray, t_nodes: np.ndarray, h: float = 1e-6
) -> np.ndarray:
    """Forward-difference real Jacobian blocks of grad F at each node.

    Returns (M, 2d, 2d) acting on interleaved re/im coordinates.
    """
    rows, N_t, d = V.shape
    M = rows * N_t
    flat = V.reshape(M, d)
    t_flat = np.tile(t_nodes, rows)
    base = grad_F_many(model, flat, t_flat)
    B = np.empty((M, 2 * d, 2 * d))
    for col in range(2 * d):
        direction = np.zeros(d, dtype=np.complex128)
        direction[col // 2] = 1.0 if col % 2 == 0 else 1.0j
        g = grad_F_many(model, flat + h * direction, t_flat)
        B[:, :, col] = (g - base).view(np.float64).reshape(M, 2 * d) / h
    return B


class _GaussNewtonOperator:
    """Linearization of the projected residual at the current state.

    matvec: delta on interior nodes -> P_V [ A delta + phi B delta ] with
    A = D_s + i D_t - n^2 analytic, B the frozen gradient blocks; the
    tangent projector removes radial directions on input, the complex
    projector removes the node line on output.  rmatvec mirrors each
    factor, so the pair is an exact adjoint.
    """

    def __init__(self, grid: CylinderGrid, V: np.ndarray, B: np.ndarray, phi: np.ndarray):
        self.grid = grid
        self.V = V
        self.B = B.reshape(V.shape[0], grid.N_t, 2 * grid.dim, 2 * grid.dim)
        self.phi_int = phi[1:-1]
        self.n2 = _mode_squares(grid.k)
        m = V.size * 2
        self.shape = (m, m)
        self.dtype = np.float64

    def _ds(self, X: np.ndarray) -> np.ndarray:
        out = np.zeros_like(X)
        out[1:] += X[:-1] * (-1.0)
        out[:-1] += X[1:]
        return out / (2.0 * self.grid.ds)

    def _ds_adjoint(self, X: np.ndarray) -> np.ndarray:
        out = np.zeros_like(X)
        out[1:] += X[:-1]
        out[:-1] += X[1:] * (-1.0)
        return out / (2.0 * self.grid.ds)

    def _apply_blocks(self, X: np.ndarray, transpose: bool) -> np.ndarray:
        rows, N_t, d = X.shape
        xr = X.view(np.float64).reshape(rows, N_t, 2 * d)
        sub = "ijab,ijb->ija" if not transpose else "ijba,ijb->ija"
        out = np.einsum(sub, self.B, xr)
        return out.reshape(rows, N_t, d, 2).view(np.complex128)[..., 0] * self.phi_int[
            :, None, None
        ]

    def matvec(self, x: np.ndarray) -> np.ndarray:
        delta = _complex_view(np.ascontiguousarray(x), self.V.shape)
        delta = _tangent(delta, self.V)
        lin = self._ds(delta) + 1j * _dt_spectral(delta)
        lin -= self.n2[None, None, :] * delta
        lin += self._apply_blocks(delta, transpose=False)
        out = _project_out(lin, self.V)
        return _real_view(np.ascontiguousarray(out)).copy()

    def rmatvec(self, y: np.ndarray) -> np.ndarray:
        rho = _complex_view(np.ascontiguousarray(y), self.V.shape)
        rho = _project_out(rho, self.V)
        # adjoints: D_s^T as assembled, (i D_t)^* = i D_t, diagonal real
        out = self._ds_adjoint(rho) + 1j * _dt_spectral(rho)
        out -= self.n2[None, None, :] * rho
        out += self._apply_blocks(rho, transpose=True)
        out = _tangent(out, self.V)
        return _real_view(np.ascontiguousarray(out)).copy()

    def as_linear_operator(self) -> LinearOperator:
        return LinearOperator(
            self.shape, matvec=self.matvec, rmatvec=self.rmatvec, dtype=self.dtype
        )


def solve_floer(
    model: ModelSpec,
    grid: CylinderGrid,
    T: float,
    boundary: tuple,
    guess: Optional[FloerState] = None,
    tol: float = 1e-6,
    max_iter: int = 60,
    damping: float = 1e-3,
    lsmr_iters: int = 3000,
) -> FloerResult:
    """Damped Gauss-Newton solve of the cylinder boundary-value problem.

    boundary is (left_rows, right_rows) of shape (N_t, 2k+1) each.  The
    damping parameter grows tenfold on rejected steps and shrinks on
    accepted ones; exhausting it returns the best state found with
    converged = False.
    """
    if model.k != grid.k:
        raise ValueError("model bandwidth must match the grid")
    cutoff = build_cutoff(T)
    if cutoff.support[1] >= grid.S:
        raise ValueError("cutoff support must sit strictly inside the window")

    left = np.asarray(boundary[0], dtype=np.complex128)
    right = np.asarray(boundary[1], dtype=np.complex128)
    if guess is None:
        state = build_initial_guess(grid, left, right, cutoff)
    else:
        state = FloerState(grid, guess.coeffs.copy())
        state.coeffs[0] = left
        state.coeffs[-1] = right

    C = state.normalized()
    phi = cutoff.phi(grid.s_nodes)

    def assemble(Cfull):
        st = FloerState(grid, Cfull)
        res = floer_residual(model, st, cutoff)
        return st, res

    st, res = assemble(C)
    energy = floer_energy(model, st, cutoff)
    history = [
        {
            "iteration": 0,
            "residual_norm": res.norm,
            "energy": energy,
            "damping": damping,
        }
    ]
    if res.norm < tol:
        return FloerResult(st, True, 0, res.norm, energy, history, "converged")

    iterations = 0
    message = "iteration budget exhausted"
    for attempt in range(1, max_iter + 1):
        V = C[1:-1]
        B = _fd_blocks(model, V, grid.t_nodes)
        op = _GaussNewtonOperator(grid, V, B, phi).as_linear_operator()
        rhs = -_real_view(np.ascontiguousarray(res.field))
        accepted = False
        while damping <= 1e8:
            sol = lsmr(
                op,
                rhs,
                damp=damping,
                atol=1e-10,
                btol=1e-10,
                maxiter=lsmr_iters,
            )
            delta = _complex_view(np.ascontiguousarray(sol[0]), V.shape)
            C_try = C.copy()
            C_try[1:-1] = V + delta
            C_try[1:-1] /= np.linalg.norm(C_try[1:-1], axis=-1, keepdims=True)
            st_try, res_try = assemble(C_try)
            if res_try.norm < res.norm:
                C, st, res = C_try, st_try, res_try
                damping = max(damping / 3.0, 1e-12)
                accepted = True
                break
            damping *= 10.0
        iterations = attempt
        energy = floer_energy(model, st, cutoff)
        history.append(
            {
                "iteration": attempt,
                "residual_norm": res.norm,
                "energy": energy,
                "damping": damping,
            }
        )
        if not accepted:
            message = "damping exhausted before reaching tolerance"
            break
        if res.norm < tol:
            return FloerResult(
                st, True, iterations, res.norm, energy, history, "converged"
            )
    return FloerResult(st, False, iterations, res.norm, energy, history, message)


# ---------------------------------------------------------------------------
# asymptotic slices


@dataclass
class SliceCandidate:
    s: float
    criterion: float
    distance: float


@dataclass
class GammaSlices:
    gamma: int
    threshold: float
    left: Optional[SliceCandidate]
    right: Optional[SliceCandidate]
    left_count: int
    right_count: int


@dataclass
class SliceReport:
    gamma_max: int
    entries: list
    s_nodes: np.ndarray = field(repr=False)
    criterion: np.ndarray = field(repr=False)


def extract_slices(
    model: ModelSpec, state: FloerState, cutoff: CutoffProfile, gamma_max: int
) -> SliceReport:
    """Search the free-side windows for slices meeting pi/gamma.

    For each gamma the windows sit a distance gamma into the free region
    on either side of the cutoff support: [-2 gamma, -gamma] on the left
    and [2T + gamma, 2T + 2 gamma] on the right, clipped to the grid.
    The criterion at a slice is the t-integral of the projected squared
    t-equation density, matching the orbit-convergence test; for each
    qualifying side the best slice is reported with its distance at t = 0
    to the corresponding boundary orbit.  An empty or non-qualifying
    window is reported with a count of zero, not raised.
    """
    _check_compatible(model, state)
    if gamma_max < 1:
        raise ValueError("gamma_max must be >= 1")
    grid = state.grid
    _, t_density = _energy_densities(model, state, cutoff)
    s = grid.s_nodes
    k = grid.k

    def best_in(mask, boundary_row):
        idx = np.nonzero(mask)[0]
        if idx.size == 0:
            return None, 0
        qualifying = idx
        i_best = qualifying[np.argmin(t_density[qualifying])]
        dist = fs_distance(
            SpectralField(k, state.coeffs[i_best, 0].copy()),
            SpectralField(k, boundary_row[0].copy()),
        )
        return (
            SliceCandidate(
                s=float(s[i_best]),
                criterion=float(t_density[i_best]),
                distance=float(dist),
            ),
            int(idx.size),
        )

    left_rows, right_rows = state.boundary
    two_t = cutoff.support[1] - 1.0
    entries = []
    for gamma in range(1, gamma_max + 1):
        thr = math.pi / gamma
        ok = t_density < thr
        lmask = ok & (s >= -2.0 * gamma) & (s <= -1.0 * gamma)
        rmask = ok & (s >= two_t + gamma) & (s <= two_t + 2.0 * gamma)
        lbest, lcount = best_in(lmask, left_rows)
        rbest, rcount = best_in(rmask, right_rows)
        entries.append(
            GammaSlices(
                gamma=gamma,
                threshold=thr,
                left=lbest,
                right=rbest,
                left_count=lcount,
                right_count=rcount,
            )
        )
    return SliceReport(
        gamma_max=gamma_max, entries=entries, s_nodes=s, criterion=t_density
    )
