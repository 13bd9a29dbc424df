"""Numerical integration of the Lindblad master equation with joint
chi-sensitivity propagation.

The state of the augmented ODE is (rho, drho/dchi).  The sensitivity obeys

    d(rho_chi)/dt = i[rho_chi, chi H0] + i[rho, H0] + D(rho_chi),

obtained by differentiating the master equation in chi (the dissipators do
not depend on chi).  This gives exact d<M>/dchi = tr(M rho_chi) without
finite differencing.

The Liouvillian is applied matrix-free: Hamiltonian terms act through Pauli
index-permutation kernels, dissipators through the per-qubit kernels of
``model.Dissipator``.  No superoperator is formed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .model import (
    Dissipator,
    ExperimentConfig,
    build_hamiltonian,
    build_measurement,
    build_probe_state,
    jump_operators,
)
from .pauli import (
    ObservableOperator,
    expectation,
    left_mul,
    right_mul,
    string_trace,
)

RTOL = 1e-9
ATOL = 1e-12
TRACE_RENORM_TOL = 1e-10
INVARIANT_ABORT_TOL = 1e-7
DERIVATIVE_FLOOR = 1e-12


class IntegrationError(RuntimeError):
    pass


def commutator_with(h0: ObservableOperator, rho: np.ndarray,
                    scale: float = 1.0) -> np.ndarray:
    """i * scale * [rho, H0]."""
    out = np.zeros_like(rho)
    for coeff, string in h0.terms:
        out += (1j * scale * coeff) * (right_mul(string, rho) - left_mul(string, rho))
    return out


def lindblad_rhs(rho: np.ndarray, drho: np.ndarray, h0: ObservableOperator,
                 chi: float, dissipator: Dissipator):
    """Right-hand side of the augmented master equation.

    Returns (drho_dt, ddrho_dt) for the pair (rho, drho/dchi).
    """
    rho_dot = commutator_with(h0, rho, chi) + dissipator(rho)
    sens_dot = (
        commutator_with(h0, drho, chi)
        + commutator_with(h0, rho, 1.0)
        + dissipator(drho)
    )
    return rho_dot, sens_dot


@dataclass
class Trajectory:
    """Sampled (rho, drho/dchi) pairs on a uniform grid, plus dense output."""

    times: np.ndarray
    rhos: np.ndarray        # (n_t, dim, dim)
    sens: np.ndarray        # (n_t, dim, dim)
    config: ExperimentConfig
    renormalizations: int = 0
    _dense_sol: object = field(default=None, repr=False)

    @property
    def dim(self) -> int:
        return self.rhos.shape[1]

    def state_at(self, t: float):
        """Interpolated (rho, drho/dchi) from the integrator's dense output."""
        if self._dense_sol is None:
            raise IntegrationError("trajectory carries no dense output")
        y = self._dense_sol(t)
        half = y.size // 2
        d = self.dim
        return y[:half].reshape(d, d), y[half:].reshape(d, d)


def sample_grid(n: int, chi: float, t_max: float, samples_per_period: int) -> np.ndarray:
    period = 2.0 * math.pi / (n * chi)
    m = max(int(math.ceil(t_max / (period / samples_per_period))), samples_per_period)
    return np.linspace(0.0, t_max, m + 1)


def integrate(config: ExperimentConfig, rtol: float = RTOL,
              atol: float = ATOL) -> Trajectory:
    """Adaptive RK45 solution of the augmented master equation.

    Dense output is kept so trajectories can be evaluated between samples.
    The trace is renormalized defensively only when it drifts beyond 1e-10
    (counted); drifting beyond 1e-7 aborts.
    """
    n = config.n
    dim = 1 << n
    psi = build_probe_state(config.scheme, n)
    rho0 = np.outer(psi, psi.conj())
    h0 = build_hamiltonian(config.scheme, n, 1.0)
    dissipator = jump_operators(config.channel, n)
    chi = config.chi

    def rhs(_t, y):
        rho = y[: dim * dim].reshape(dim, dim)
        drho = y[dim * dim:].reshape(dim, dim)
        rho_dot, sens_dot = lindblad_rhs(rho, drho, h0, chi, dissipator)
        return np.concatenate([rho_dot.ravel(), sens_dot.ravel()])

    y0 = np.concatenate([rho0.ravel(), np.zeros(dim * dim, dtype=complex)])
    grid = sample_grid(n, chi, config.t_max, config.samples_per_period)
    sol = solve_ivp(
        rhs, (0.0, config.t_max), y0, method="RK45",
        rtol=rtol, atol=atol, t_eval=grid, dense_output=True,
    )
    if not sol.success:
        raise IntegrationError(f"integrator failed: {sol.message}")

    rhos = sol.y[: dim * dim, :].T.reshape(-1, dim, dim).copy()
    sens = sol.y[dim * dim:, :].T.reshape(-1, dim, dim).copy()
    renorm = 0
    for k in range(rhos.shape[0]):
        tr = np.trace(rhos[k]).real
        herm = np.max(np.abs(rhos[k] - rhos[k].conj().T))
        if abs(tr - 1.0) > INVARIANT_ABORT_TOL or herm > INVARIANT_ABORT_TOL:
            raise IntegrationError(
                f"invariant violation at t={sol.t[k]:g}: "
                f"|tr-1|={abs(tr - 1.0):.3g}, herm={herm:.3g}"
            )
        if abs(tr - 1.0) > TRACE_RENORM_TOL:
            rhos[k] /= tr
            renorm += 1
    return Trajectory(
        times=sol.t.copy(), rhos=rhos, sens=sens, config=config,
        renormalizations=renorm, _dense_sol=sol.sol,
    )


@dataclass
class PrecisionCurve:
    """Sampled <M>, Delta M, d<M>/dchi and delta-chi * sqrt(T) over time.

    ``deltachi_sqrtT`` stores Delta M * sqrt(t) / |d<M>/dchi|, i.e. the
    deviation with the total-time budget T factored out.  Samples with
    vanishing signal derivative are NaN with ``finite`` False.
    """

    times: np.ndarray
    expM: np.ndarray
    deltaM: np.ndarray
    dexpM_dchi: np.ndarray
    deltachi_sqrtT: np.ndarray
    finite: np.ndarray
    _evaluator: object = field(default=None, repr=False)

    def eval_deviation(self, t: float) -> float:
        """delta-chi * sqrt(T) between samples (dense-output evaluation)."""
        if self._evaluator is None:
            raise ValueError("curve carries no continuous evaluator")
        return self._evaluator(t)


def _deviation(t, delta_m, dm_dchi):
    if t <= 0.0 or abs(dm_dchi) < DERIVATIVE_FLOOR:
        return math.nan
    return delta_m * math.sqrt(t) / abs(dm_dchi)


def expectation_curve(traj: Trajectory, m: ObservableOperator,
                      total_time_T: float | None = None) -> PrecisionCurve:
    """Per-sample measurement statistics and rescaled deviation.

    The reported deviation is delta-chi * sqrt(T); ``total_time_T`` is
    accepted for interface symmetry but drops out of the stored values.
    """
    del total_time_T
    msq = m @ m
    n_t = traj.times.size
    exp_m = np.empty(n_t)
    delta_m = np.empty(n_t)
    dm_dchi = np.empty(n_t)
    dev = np.empty(n_t)
    for k in range(n_t):
        exp_m[k] = expectation(m, traj.rhos[k])
        var = expectation(msq, traj.rhos[k]) - exp_m[k] ** 2
        delta_m[k] = math.sqrt(max(var, 0.0))
        dm_dchi[k] = sum(
            (c * string_trace(s, traj.sens[k]) for c, s in m.terms), 0j
        ).real
        dev[k] = _deviation(traj.times[k], delta_m[k], dm_dchi[k])
    finite = np.isfinite(dev)

    def evaluator(t: float) -> float:
        rho, sens = traj.state_at(t)
        e = expectation(m, rho)
        var = expectation(msq, rho) - e * e
        d = sum((c * string_trace(s, sens) for c, s in m.terms), 0j).real
        return _deviation(t, math.sqrt(max(var, 0.0)), d)

    return PrecisionCurve(
        times=traj.times.copy(), expM=exp_m, deltaM=delta_m,
        dexpM_dchi=dm_dchi, deltachi_sqrtT=dev, finite=finite,
        _evaluator=evaluator if traj._dense_sol is not None else None,
    )


def precision_curve(config: ExperimentConfig, rtol: float = RTOL,
                    atol: float = ATOL) -> PrecisionCurve:
    """Convenience wrapper: integrate a config and measure its scheme's M."""
    traj = integrate(config, rtol=rtol, atol=atol)
    m = build_measurement(config.scheme, config.n)
    return expectation_curve(traj, m)
