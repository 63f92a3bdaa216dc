"""Propagation of state vectors under exp(-iHt).

Three interchangeable propagators: a dense eigendecomposition (the oracle,
capped in dimension), a Lanczos/Krylov stepper (production default), and a
truncated Taylor series (independent cross-check).  The Krylov and Taylor
steppers keep the local error per step below tolerance * dt, so a run to
time t accumulates at most tolerance * t.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CapacityError, NumericalError, ParameterError
from .hamiltonian import DENSE_CAP, SparseHamiltonian
from .states import StateVector, _finish

METHODS = ("dense_eig", "krylov", "taylor")

_TAYLOR_THETA = 4.0  # max ||H|| * dt per Taylor substep; keeps term growth mild
_MAX_KRYLOV_SPLITS = 4096


@dataclass(frozen=True)
class PropagatorConfig:
    """Stepper selection and accuracy knobs (times in 1/J)."""

    method: str = "krylov"
    dt: float = 0.05
    tolerance: float = 1e-10
    krylov_dim: int = 30
    max_taylor_terms: int = 200
    dense_cap: int = DENSE_CAP

    def __post_init__(self):
        if self.method not in METHODS:
            raise ParameterError(f"method must be one of {METHODS}, got {self.method!r}")
        if not self.dt > 0:
            raise ParameterError(f"dt={self.dt} must be positive")
        if not self.tolerance > 0:
            raise ParameterError(f"tolerance={self.tolerance} must be positive")
        if self.krylov_dim < 2:
            raise ParameterError(f"krylov_dim={self.krylov_dim} must be at least 2")
        if self.max_taylor_terms < 1:
            raise ParameterError("max_taylor_terms must be at least 1")


@dataclass(eq=False)
class Trajectory:
    """Sampled observables (and optionally states) along one evolution run."""

    times: np.ndarray
    columns: dict[str, np.ndarray]
    states: np.ndarray | None = None

    def column(self, name: str) -> np.ndarray:
        try:
            return self.columns[name]
        except KeyError:
            raise ParameterError(
                f"no observable column {name!r}; have {sorted(self.columns)}"
            ) from None


def _operator(H):
    """Uniform (matvec, dim, dense, inf_norm) view of sparse or dense input."""
    if isinstance(H, SparseHamiltonian):
        return H.matvec, H.dim, H.to_dense, lambda: H.inf_norm
    H = np.asarray(H, dtype=np.float64)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ParameterError(f"expected a square matrix, got shape {H.shape}")
    return (
        lambda x: H @ x,
        H.shape[0],
        lambda: H,
        lambda: float(np.abs(H).sum(axis=1).max()) if H.size else 0.0,
    )


class DensePropagator:
    """Exact evolution through a cached full eigendecomposition."""

    def __init__(self, H, cap: int = DENSE_CAP):
        _, dim, dense, _ = _operator(H)
        if dim > cap:
            raise CapacityError(f"dense propagator capped at dim {cap}, got {dim}")
        self.dim = dim
        self.evals, self.evecs = np.linalg.eigh(dense())

    def advance(self, amps: np.ndarray, dt: float) -> np.ndarray:
        coef = self.evecs.T @ amps
        return self.evecs @ (np.exp(-1j * dt * self.evals) * coef)


class KrylovPropagator:
    """Lanczos approximation of exp(-iHt) acting on a vector.

    One reorthogonalization pass keeps the Krylov basis orthonormal at machine
    precision, so norms are preserved over long runs.  Steps whose error
    estimate exceeds tolerance * dt are bisected.
    """

    def __init__(self, H, config: PropagatorConfig):
        self.matvec, self.dim, _, _ = _operator(H)
        self.m = min(config.krylov_dim, self.dim)
        self.tolerance = config.tolerance

    def _step(self, amps: np.ndarray, tau: float) -> tuple[np.ndarray, float]:
        nv = np.linalg.norm(amps)
        if nv == 0.0:
            return amps.copy(), 0.0
        m = self.m
        V = np.empty((m, self.dim), dtype=np.complex128)
        alpha = np.empty(m)
        beta = np.empty(m)
        V[0] = amps / nv
        k_eff = m
        for k in range(m):
            w = self.matvec(V[k])
            alpha[k] = np.vdot(V[k], w).real
            w -= alpha[k] * V[k]
            if k > 0:
                w -= beta[k - 1] * V[k - 1]
            w -= (V[: k + 1].conj() @ w) @ V[: k + 1]  # one reorthogonalization pass
            beta[k] = np.linalg.norm(w)
            if k + 1 == m:
                break
            if beta[k] < 1e-14 * max(1.0, abs(alpha[k])):
                k_eff = k + 1  # invariant subspace reached; result is exact
                break
            V[k + 1] = w / beta[k]
        k = k_eff
        T = np.diag(alpha[:k])
        if k > 1:
            T += np.diag(beta[: k - 1], 1) + np.diag(beta[: k - 1], -1)
        evals, evecs = np.linalg.eigh(T)
        y = evecs @ (np.exp(-1j * tau * evals) * evecs[0])
        err = abs(beta[k - 1] * y[k - 1]) * nv if k == self.m else 0.0
        return nv * (y @ V[:k]), err

    def advance(self, amps: np.ndarray, dt: float) -> np.ndarray:
        if dt == 0.0:
            return amps.copy()
        nsub = 1
        worst = math.inf
        while nsub <= _MAX_KRYLOV_SPLITS:
            tau = dt / nsub
            budget = self.tolerance * abs(tau)
            cur = amps
            ok = True
            for _ in range(nsub):
                cur, err = self._step(cur, tau)
                if err > budget:
                    worst = err
                    ok = False
                    break
            if ok:
                return cur
            nsub *= 2
        raise NumericalError(
            "krylov step failed to reach tolerance",
            residual=worst, step=dt, dimension=self.dim, krylov_dim=self.m,
        )


class TaylorPropagator:
    """Truncated Taylor series for exp(-iHt), with norm-based substepping."""

    def __init__(self, H, config: PropagatorConfig):
        self.matvec, self.dim, _, inf_norm = _operator(H)
        self.hnorm = inf_norm()
        self.tolerance = config.tolerance
        self.max_terms = config.max_taylor_terms

    def advance(self, amps: np.ndarray, dt: float) -> np.ndarray:
        if dt == 0.0:
            return amps.copy()
        nsub = max(1, math.ceil(self.hnorm * abs(dt) / _TAYLOR_THETA))
        tau = dt / nsub
        cur = np.array(amps, dtype=np.complex128)
        for _ in range(nsub):
            cur = self._substep(cur, tau)
        return cur

    def _substep(self, psi: np.ndarray, tau: float) -> np.ndarray:
        acc = psi.copy()
        term = psi
        # next-term norm bounds the truncation error; budget scales with the
        # substep so a full run accumulates at most tolerance * t
        budget = 0.25 * self.tolerance * abs(tau) * max(np.linalg.norm(psi), 1e-300)
        tn = math.inf
        for k in range(1, self.max_terms + 1):
            term = (-1j * tau / k) * self.matvec(term)
            acc += term
            tn = np.linalg.norm(term)
            if tn <= budget:
                return acc
        raise NumericalError(
            "taylor series did not converge",
            residual=tn, step=tau, dimension=self.dim, terms=self.max_terms,
        )


def make_propagator(H, config: PropagatorConfig):
    if config.method == "dense_eig":
        return DensePropagator(H, cap=config.dense_cap)
    if config.method == "krylov":
        return KrylovPropagator(H, config)
    return TaylorPropagator(H, config)


def evolve_dense(H, psi: StateVector, t: float, cap: int = DENSE_CAP) -> StateVector:
    """psi(t) through the full eigendecomposition of H (the oracle path)."""
    return _finish(psi.basis, DensePropagator(H, cap=cap).advance(psi.amplitudes, t))


def evolve_step(H, psi: StateVector, dt: float, config: PropagatorConfig) -> StateVector:
    """One propagation step of length dt with the configured method."""
    prop = make_propagator(H, config)
    return _finish(psi.basis, prop.advance(psi.amplitudes, dt))


def evolve_trajectory(
    H,
    psi0: StateVector,
    times,
    config: PropagatorConfig,
    observables: dict,
    store_states: bool = False,
) -> Trajectory:
    """Sample named observables along the evolution of psi0.

    times must increase strictly from 0; each interval is covered by equal
    sub-steps no longer than config.dt, landing exactly on the grid points
    (no interpolation of observables).
    """
    times = np.asarray(times, dtype=np.float64)
    if times.ndim != 1 or len(times) == 0:
        raise ParameterError("times must be a non-empty 1-d grid")
    if abs(times[0]) > 1e-12:
        raise ParameterError(f"time grid must start at 0, got {times[0]}")
    if len(times) > 1 and not np.all(np.diff(times) > 0):
        raise ParameterError("time grid must be strictly increasing")

    prop = make_propagator(H, config)
    dense = isinstance(prop, DensePropagator)
    columns = {name: np.empty(len(times)) for name in observables}
    states = [] if store_states else None

    cur = np.array(psi0.amplitudes, dtype=np.complex128)
    for k, t in enumerate(times):
        if k > 0:
            delta = times[k] - times[k - 1]
            if dense:
                cur = prop.advance(cur, delta)
            else:
                nsteps = max(1, math.ceil(delta / config.dt - 1e-9))
                tau = delta / nsteps
                for _ in range(nsteps):
                    cur = prop.advance(cur, tau)
        snapshot = StateVector(basis=psi0.basis, amplitudes=cur)
        for name, fn in observables.items():
            columns[name][k] = fn(snapshot)
        if store_states:
            states.append(cur.copy())

    return Trajectory(
        times=times,
        columns=columns,
        states=np.asarray(states) if store_states else None,
    )
