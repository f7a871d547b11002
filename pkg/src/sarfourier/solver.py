"""Regularized reconstruction and optimality diagnostics.

Solves ``min_f ||A f - b||^2 + lam ||T f||_1`` with an augmented Lagrangian

    L(f, g, sigma) = ||A f - b||^2 + lam ||g||_1 + beta/2 ||T f - g||^2
                     - Re(sigma^H (T f - g))

by alternating one gradient step in ``f``, an exact complex shrinkage in
``g`` and a multiplier update. Complex inner products are conjugate-linear
in the first argument (``vdot`` order). Gradients with respect to a complex
vector are ``2 dL/d(conj f)``, so the directional derivative of ``L`` along
``d`` is ``Re(vdot(grad, d))``.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.linalg import LinearOperator, cg

from . import _rng
from .forward import nudft_adjoint, nudft_forward

__all__ = [
    "LinearOperatorSpec",
    "SolverConfig",
    "SolverState",
    "SolverError",
    "difference_operator",
    "phase_diag",
    "tikhonov_solve",
    "shrink",
    "objective",
    "lagrangian",
    "lagrangian_gradient",
    "spectral_step",
    "admm_l1",
    "optimality_residuals",
    "subgradient_certificate",
    "partial_fourier_operator",
    "PartialFourierInstance",
    "partial_fourier_instance",
    "tv",
    "gradient_operator_2d",
    "fourier_series_problem",
    "nudft_operator",
]

STEP_MIN, STEP_MAX = 1e-12, 1e6
DEFAULT_BETA = 32.0


class SolverError(RuntimeError):
    """Numerical failure inside an iterative solver."""

    def __init__(self, message, iteration=None):
        super().__init__(message)
        self.iteration = iteration


def _debug() -> bool:
    return os.environ.get("SARFOURIER_DEBUG", "") not in ("", "0")


class LinearOperatorSpec:
    """A linear map ``C^in_dim -> C^out_dim`` with its adjoint.

    With ``check=True`` (or ``SARFOURIER_DEBUG`` set) the adjoint is probed
    at construction.
    """

    def __init__(self, apply, apply_adjoint, in_dim: int, out_dim: int,
                 name: str = "", check: bool = False):
        self._apply = apply
        self._apply_adjoint = apply_adjoint
        self.in_dim = int(in_dim)
        self.out_dim = int(out_dim)
        self.name = name
        if check or _debug():
            self.check_adjoint()

    def apply(self, x):
        x = np.asarray(x, dtype=complex)
        if x.shape != (self.in_dim,):
            raise ValueError(f"{self.name or 'operator'}: expected input of length "
                             f"{self.in_dim}, got shape {x.shape}")
        return self._apply(x)

    def apply_adjoint(self, y):
        y = np.asarray(y, dtype=complex)
        if y.shape != (self.out_dim,):
            raise ValueError(f"{self.name or 'operator'}: expected adjoint input of length "
                             f"{self.out_dim}, got shape {y.shape}")
        return self._apply_adjoint(y)

    @classmethod
    def from_matrix(cls, m, name: str = "", check: bool = False) -> "LinearOperatorSpec":
        m = np.asarray(m, dtype=complex)
        mh = m.conj().T
        return cls(lambda x: m @ x, lambda y: mh @ y, m.shape[1], m.shape[0], name, check)

    @classmethod
    def identity(cls, n: int) -> "LinearOperatorSpec":
        return cls(lambda x: x.copy(), lambda y: y.copy(), n, n, "identity")

    def compose(self, inner: "LinearOperatorSpec") -> "LinearOperatorSpec":
        """``self @ inner``."""
        if inner.out_dim != self.in_dim:
            raise ValueError(f"cannot compose: {inner.out_dim} != {self.in_dim}")
        return LinearOperatorSpec(
            lambda x: self.apply(inner.apply(x)),
            lambda y: inner.apply_adjoint(self.apply_adjoint(y)),
            inner.in_dim, self.out_dim, f"{self.name}*{inner.name}")

    def to_dense(self) -> np.ndarray:
        eye = np.eye(self.in_dim, dtype=complex)
        return np.stack([self.apply(e) for e in eye], axis=1)

    def check_adjoint(self, probes: int = 3, rtol: float = 1e-8, seed: int = 0) -> float:
        """Largest relative mismatch of ``<Ax, y>`` and ``<x, A^H y>`` over random probes."""
        rng = _rng.generator(seed, 99)
        worst = 0.0
        for _ in range(probes):
            x = rng.normal(size=self.in_dim) + 1j * rng.normal(size=self.in_dim)
            y = rng.normal(size=self.out_dim) + 1j * rng.normal(size=self.out_dim)
            ax = self.apply(x)
            ahy = self.apply_adjoint(y)
            lhs = np.vdot(y, ax)
            rhs = np.vdot(ahy, x)
            scale = np.linalg.norm(ax) * np.linalg.norm(y) + np.linalg.norm(x) * np.linalg.norm(ahy)
            worst = max(worst, abs(lhs - rhs) / max(scale, 1e-300))
        if worst > rtol:
            raise ValueError(f"{self.name or 'operator'}: adjoint mismatch {worst:.3g} > {rtol}")
        return worst

    def norm_estimate(self, iters: int = 100, seed: int = 0) -> float:
        """Operator 2-norm by power iteration on ``A^H A``."""
        x = _rng.generator(seed, 98).normal(size=self.in_dim).astype(complex)
        x /= np.linalg.norm(x)
        s = 0.0
        for _ in range(iters):
            y = self.apply_adjoint(self.apply(x))
            s_new = np.linalg.norm(y)
            if s_new == 0:
                return 0.0
            x = y / s_new
            if abs(s_new - s) <= 1e-10 * s_new:
                s = s_new
                break
            s = s_new
        return math.sqrt(s)


def _diff1(n, boundary):
    if boundary == "circulant":
        return LinearOperatorSpec(lambda f: np.roll(f, -1) - f,
                                  lambda y: np.roll(y, 1) - y, n, n, "D1c")

    def adj(y):
        out = np.zeros(n, dtype=complex)
        out[1:] += y
        out[:-1] -= y
        return out

    return LinearOperatorSpec(np.diff, adj, n, n - 1, "D1")


def difference_operator(n: int, order: int = 1, boundary: str = "truncated") -> LinearOperatorSpec:
    """Forward differences ``(D f)_j = f_{j+1} - f_j``, applied ``order`` times.

    ``truncated`` drops rows that would leave the vector (``n - order``
    outputs); ``circulant`` wraps around (``n`` outputs).
    """
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    if boundary not in ("circulant", "truncated"):
        raise ValueError("boundary must be 'circulant' or 'truncated'")
    if n < order + 1:
        raise ValueError(f"need n >= {order + 1}")
    op = _diff1(n, boundary)
    if order == 2:
        op = _diff1(op.out_dim, boundary).compose(op)
        op.name = "D2c" if boundary == "circulant" else "D2"
    return op


def phase_diag(f0) -> LinearOperatorSpec:
    """Diagonal operator ``exp(-i arg f0_j)``; zero entries get multiplier 1."""
    f0 = np.asarray(f0, dtype=complex).ravel()
    # angle(0) = 0, so zero entries get multiplier 1
    theta = np.exp(-1j * np.angle(f0))
    theta_c = np.conj(theta)
    return LinearOperatorSpec(lambda x: theta * x, lambda y: theta_c * y,
                              f0.size, f0.size, "phase")


def tikhonov_solve(a: LinearOperatorSpec, b, lam: float, d: LinearOperatorSpec | None = None,
                   cg_tol: float = 1e-10, cg_maxit: int | None = None, x0=None) -> np.ndarray:
    """Solve ``(A^H A + lam D^H D) f = A^H b`` by conjugate gradients.

    ``d`` defaults to the identity. Raises :class:`SolverError` if CG does
    not reach ``cg_tol`` (relative residual) within ``cg_maxit`` iterations.
    """
    if lam < 0:
        raise ValueError("lambda must be non-negative")
    n = a.in_dim
    if d is not None and d.in_dim != n:
        raise ValueError("A and D must act on the same space")
    b = np.asarray(b, dtype=complex)

    def normal(x):
        x = np.asarray(x, dtype=complex).ravel()
        out = a.apply_adjoint(a.apply(x))
        if lam:
            out = out + lam * (d.apply_adjoint(d.apply(x)) if d is not None else x)
        return out

    op = LinearOperator((n, n), matvec=normal, dtype=complex)
    rhs = a.apply_adjoint(b)
    maxit = cg_maxit if cg_maxit is not None else 10 * n
    x, info = cg(op, rhs, x0=x0, rtol=cg_tol, atol=0.0, maxiter=maxit)
    res = np.linalg.norm(normal(x) - rhs) / max(np.linalg.norm(rhs), 1e-300)
    if info != 0 or not np.all(np.isfinite(x)):
        raise SolverError(f"CG did not converge in {maxit} iterations "
                          f"(relative residual {res:.3g})", iteration=maxit)
    return x


def shrink(z, tau):
    """Complex soft threshold ``max(|z| - tau, 0) z / |z|`` (0 at ``z = 0``)."""
    if np.any(np.asarray(tau) < 0):
        raise ValueError("tau must be non-negative")
    z = np.asarray(z)
    mag = np.abs(z)
    scale = np.maximum(mag - tau, 0.0) / np.where(mag > 0, mag, 1.0)
    out = z * scale
    return out.item() if out.ndim == 0 else out


def _sign(z):
    mag = np.abs(z)
    return np.where(mag > 0, z / np.where(mag > 0, mag, 1.0), 0.0)


def objective(a: LinearOperatorSpec, t: LinearOperatorSpec, b, f, lam: float) -> float:
    """``||A f - b||^2 + lam ||T f||_1``."""
    r = a.apply(f) - b
    val = float(np.vdot(r, r).real)
    if lam:
        val += lam * float(np.sum(np.abs(t.apply(f))))
    return val


def lagrangian(a, t, b, f, g, sigma, lam, beta) -> float:
    """Augmented Lagrangian value (real part of the multiplier term)."""
    r = a.apply(f) - b
    c = t.apply(f) - g
    return float(np.vdot(r, r).real + lam * np.sum(np.abs(g))
                 + 0.5 * beta * np.vdot(c, c).real - np.vdot(sigma, c).real)


def lagrangian_gradient(a, t, b, f, g, sigma, beta) -> np.ndarray:
    """``2 A^H (A f - b) + beta T^H (T f - g) - T^H sigma``."""
    return (2.0 * a.apply_adjoint(a.apply(f) - b)
            + t.apply_adjoint(beta * (t.apply(f) - g) - sigma))


def spectral_step(f_prev, f_cur, grad_prev, grad_cur, fallback: float) -> float:
    """Barzilai-Borwein step ``<s, s> / Re<s, y>``, ``s = df``, ``y = dgrad``.

    Clamped to ``[1e-12, 1e6]``; ``fallback`` is returned when ``Re<s, y> <= 0``.
    """
    s = np.asarray(f_cur) - np.asarray(f_prev)
    y = np.asarray(grad_cur) - np.asarray(grad_prev)
    den = float(np.vdot(s, y).real)
    if not den > 0:
        return float(fallback)
    return float(min(max(np.vdot(s, s).real / den, STEP_MIN), STEP_MAX))


@dataclass
class SolverConfig:
    """ADMM parameters.

    ``step`` is ``"fixed"`` (length ``tau``, default ``1 / (2||A||^2 + beta ||T||^2)``)
    or ``"spectral"`` (Barzilai-Borwein, starting from and falling back to
    the fixed length). ``tol = 0`` runs exactly ``max_iters`` iterations.
    """

    lam: float
    beta: float = DEFAULT_BETA
    max_iters: int = 500
    tol: float = 0.0
    step: str = "fixed"
    tau: float | None = None
    inner_iters: int = 1

    def __post_init__(self):
        if not self.lam >= 0:
            raise ValueError("lam must be non-negative")
        if not self.beta > 0:
            raise ValueError("beta must be positive")
        if self.max_iters < 1 or self.inner_iters < 1:
            raise ValueError("max_iters and inner_iters must be >= 1")
        if self.tol < 0:
            raise ValueError("tol must be non-negative")
        if self.step not in ("fixed", "spectral"):
            raise ValueError("step must be 'fixed' or 'spectral'")
        if self.tau is not None and not self.tau > 0:
            raise ValueError("tau must be positive")


@dataclass
class SolverState:
    f: np.ndarray
    g: np.ndarray
    sigma: np.ndarray
    objective_history: list = field(default_factory=list)
    residual_history: list = field(default_factory=list)
    iterations: int = 0
    converged: bool = False


def admm_l1(a: LinearOperatorSpec, t: LinearOperatorSpec, b, config: SolverConfig,
            f_init=None, record_residuals: bool = False) -> SolverState:
    """Minimise ``||A f - b||^2 + lam ||T f||_1`` by linearised ADMM.

    Each iteration takes ``inner_iters`` gradient steps on ``f``, sets ``g``
    by shrinkage and updates the multiplier. ``objective_history[0]`` is the
    objective at ``f_init`` (default ``A^H b``); entry ``k`` follows
    iteration ``k``. With ``record_residuals`` the optimality residuals are
    logged the same way.
    """
    if a.in_dim != t.in_dim:
        raise ValueError("A and T must act on the same space")
    b = np.asarray(b, dtype=complex)
    if b.shape != (a.out_dim,):
        raise ValueError(f"b has shape {b.shape}, expected ({a.out_dim},)")
    lam, beta = config.lam, config.beta
    f = a.apply_adjoint(b) if f_init is None else np.array(f_init, dtype=complex)
    if f.shape != (a.in_dim,):
        raise ValueError("f_init has the wrong length")
    g = np.zeros(t.out_dim, dtype=complex)
    sigma = np.zeros(t.out_dim, dtype=complex)
    tau0 = config.tau
    if tau0 is None:
        tau0 = 1.0 / (2.0 * a.norm_estimate() ** 2 + beta * t.norm_estimate() ** 2)
    state = SolverState(f, g, sigma)
    state.objective_history.append(objective(a, t, b, f, lam))
    if record_residuals:
        state.residual_history.append(optimality_residuals(a, t, b, state, lam, beta))

    tau = tau0
    for it in range(1, config.max_iters + 1):
        f_old = f
        for _ in range(config.inner_iters):
            grad = lagrangian_gradient(a, t, b, f, g, sigma, beta)
            f_new = f - tau * grad
            if config.step == "spectral":
                # grad_f L is affine in f, so the gradient at f_new with the
                # same g, sigma is grad + H s exactly
                s = f_new - f
                hs = 2.0 * a.apply_adjoint(a.apply(s)) + beta * t.apply_adjoint(t.apply(s))
                tau = spectral_step(f, f_new, grad, grad + hs, tau0)
            f = f_new
        tf = t.apply(f)
        g = shrink(tf - sigma / beta, lam / beta)
        sigma = sigma - beta * (tf - g)
        if not (np.all(np.isfinite(f)) and np.all(np.isfinite(sigma))):
            raise SolverError(f"non-finite iterate at iteration {it}", iteration=it)
        state.f, state.g, state.sigma, state.iterations = f, g, sigma, it
        state.objective_history.append(objective(a, t, b, f, lam))
        if record_residuals:
            state.residual_history.append(optimality_residuals(a, t, b, state, lam, beta))
        if config.tol > 0:
            change = np.linalg.norm(f - f_old) / max(np.linalg.norm(f_old), 1e-300)
            if change < config.tol:
                state.converged = True
                break
    return state


def optimality_residuals(a, t, b, state: SolverState, lam: float, beta: float):
    """``(r_f, r_g, r_c)``: infinity norms of the first-order conditions of ``L``.

    ``r_f = |grad_f L|``; ``r_g`` is the distance of ``beta (g - T f) + sigma``
    from ``-lam sign*(g)``; ``r_c = |T f - g|``.
    """
    f, g, sigma = state.f, state.g, state.sigma
    tf = t.apply(f)
    r_f = np.max(np.abs(lagrangian_gradient(a, t, b, f, g, sigma, beta)), initial=0.0)
    v = beta * (g - tf) + sigma
    nz = np.abs(g) > 0
    rg = np.where(nz, np.abs(v + lam * _sign(g)), np.maximum(np.abs(v) - lam, 0.0))
    r_g = np.max(rg, initial=0.0)
    r_c = np.max(np.abs(tf - g), initial=0.0)
    return float(r_f), float(r_g), float(r_c)


def subgradient_certificate(a, t, b, f, lam: float, support_tol: float = 1e-3,
                            max_dim: int = 2048) -> float:
    """Infinity norm of the least-squares multiplier certifying an l1 minimiser.

    With ``S = {j : |(T f)_j| > support_tol}`` and ``R`` its complement this
    solves ``T_R^H x = mu A^H (A f - b) + T_S^H sign(T_S f)``, ``mu = 2 / lam``,
    in the least-squares sense. A value at most 1 (plus slack) certifies
    optimality.
    """
    if not lam > 0:
        raise ValueError("lambda must be positive")
    if t.in_dim > max_dim:
        raise ValueError(f"problem too large for a dense certificate (N={t.in_dim})")
    f = np.asarray(f, dtype=complex)
    tm = t.to_dense()
    tf = tm @ f
    s = np.abs(tf) > support_tol
    if s.all():
        raise ValueError("every row of T f is above support_tol; no certificate exists")
    y = (2.0 / lam) * a.apply_adjoint(a.apply(f) - b) + tm[s].conj().T @ _sign(tf[s])
    x, *_ = np.linalg.lstsq(tm[~s].conj().T, y, rcond=None)
    return float(np.max(np.abs(x)))


def tv(f, order: int = 1) -> float:
    """``sum |f_{j+1} - f_j|`` (or of second differences)."""
    return float(np.sum(np.abs(np.diff(np.asarray(f), n=order))))


def partial_fourier_operator(n: int, rows) -> LinearOperatorSpec:
    """Selected rows of the unitary DFT of length ``n``."""
    rows = np.asarray(rows, dtype=np.int64)

    def adj(y):
        z = np.zeros(n, dtype=complex)
        z[rows] = y
        return np.fft.ifft(z, norm="ortho")

    return LinearOperatorSpec(lambda x: np.fft.fft(x, norm="ortho")[rows], adj,
                              n, rows.size, "partial-dft")


@dataclass
class PartialFourierInstance:
    a: LinearOperatorSpec
    t: LinearOperatorSpec
    b: np.ndarray
    truth: np.ndarray
    lam: float


def partial_fourier_instance(n: int = 500, keep: float = 0.5, snr: float = 5.0,
                             lam: float = 0.5, order: int = 2, cycles: float = 2.0,
                             seed: int = 0) -> PartialFourierInstance:
    """Sine-curve test problem observed through a random half of the DFT rows.

    Noise is complex Gaussian scaled so that ``||A f|| / ||noise|| = snr``.
    """
    rng = _rng.generator(seed, 1)
    rows = np.sort(rng.choice(n, size=int(round(keep * n)), replace=False))
    a = partial_fourier_operator(n, rows)
    truth = np.sin(2 * np.pi * cycles * np.arange(n) / n).astype(complex)
    clean = a.apply(truth)
    noise = rng.normal(size=rows.size) + 1j * rng.normal(size=rows.size)
    noise *= np.linalg.norm(clean) / (snr * np.linalg.norm(noise))
    t = difference_operator(n, order, "truncated")
    return PartialFourierInstance(a, t, clean + noise, truth, lam)


def gradient_operator_2d(n: int, boundary: str = "truncated") -> LinearOperatorSpec:
    """First differences of a row-major ``n x n`` image along both axes, stacked.

    ``||G f||_1`` is the anisotropic total variation of the image.
    """
    d = difference_operator(n, 1, boundary)
    m = d.out_dim

    def fwd(x):
        img = x.reshape(n, n)
        rows = np.stack([d.apply(img[:, c]) for c in range(n)], axis=1)
        cols = np.stack([d.apply(img[r]) for r in range(n)])
        return np.concatenate([rows.ravel(), cols.ravel()])

    def adj(y):
        rows = y[:m * n].reshape(m, n)
        cols = y[m * n:].reshape(n, m)
        out = np.stack([d.apply_adjoint(rows[:, c]) for c in range(n)], axis=1)
        out += np.stack([d.apply_adjoint(cols[r]) for r in range(n)])
        return out.ravel()

    return LinearOperatorSpec(fwd, adj, n * n, 2 * m * n, "grad2d")


def fourier_series_problem(coeffs: dict, n: int, start: float = -0.5, length: float = 1.0):
    """Operator and data for recovering ``n`` samples from Fourier-series coefficients.

    ``coeffs`` maps ``k`` to ``c_k = (1/L) int f(x) exp(-2 pi i k x / L) dx``.
    Samples sit at ``x_j = start + j L / n``. The operator is scaled to unit
    norm, ``A_kj = exp(-2 pi i k x_j / L) / sqrt(n)``, so the matching data
    vector is ``sqrt(n) c``. Returns ``(A, b, ks, x)``.
    """
    ks = np.array(sorted(int(k) for k in coeffs))
    x = start + np.arange(n) * length / n
    m = np.exp(-2j * np.pi * np.outer(ks, x) / length) / math.sqrt(n)
    b = math.sqrt(n) * np.array([coeffs[int(k)] for k in ks], dtype=complex)
    return LinearOperatorSpec.from_matrix(m, "fourier-series"), b, ks, x


_TABLE_LIMIT = 1 << 22


def nudft_operator(k1, k2, n: int) -> LinearOperatorSpec:
    """Direct non-uniform DFT of a row-major ``n x n`` image at digital frequencies ``(k1, k2)``.

    The separable exponential tables are cached when they fit in
    ``_TABLE_LIMIT`` entries; otherwise every apply recomputes them.
    """
    k1 = np.asarray(k1, dtype=float).ravel()
    k2 = np.asarray(k2, dtype=float).ravel()
    if k1.size * n > _TABLE_LIMIT:
        return LinearOperatorSpec(
            lambda x: nudft_forward(x.reshape(n, n), k1, k2),
            lambda y: nudft_adjoint(y, k1, k2, n).ravel(),
            n * n, k1.size, "nudft")
    j = np.arange(-n // 2, n // 2)
    e1 = np.exp(-1j * np.outer(k1, j))
    e2 = np.exp(-1j * np.outer(k2, j))
    e1c, e2c = e1.conj(), e2.conj()

    def fwd(x):
        return np.einsum("sb,sb->s", e1 @ x.reshape(n, n), e2)

    def adj(y):
        return ((e1c * np.asarray(y)[:, None]).T @ e2c).ravel()

    return LinearOperatorSpec(fwd, adj, n * n, k1.size, "nudft")
