"""Measured quantities: site densities, region sums, time averages, trap times."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import ProductBasis
from .errors import ParameterError
from .hamiltonian import SparseHamiltonian, total_spin_squared
from .states import StateVector

KINDS = (
    "n_site", "n_site_spin", "n_after", "n_h2",
    "norm", "energy", "s_squared", "doublon_count",
)
SPINS = ("up", "down")


@dataclass(frozen=True)
class ObservableSpec:
    """One measurable column: its kind plus site/spin parameters where used."""

    kind: str
    site: int | None = None
    spin: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterError(f"unknown observable kind {self.kind!r}")
        if self.kind in ("n_site", "n_site_spin") and self.site is None:
            raise ParameterError(f"{self.kind} needs a site")
        if self.kind == "n_site_spin" and self.spin not in SPINS:
            raise ParameterError(f"n_site_spin needs spin in {SPINS}, got {self.spin!r}")
        if self.kind not in ("n_site", "n_site_spin") and (self.site or self.spin):
            raise ParameterError(f"{self.kind} takes no site/spin parameters")


def _probabilities(psi: StateVector) -> np.ndarray:
    basis = psi.basis
    p = np.abs(psi.amplitudes) ** 2
    return p.reshape(basis.up.dim, basis.down.dim)


def density_profile(psi: StateVector, spin: str | None = None) -> np.ndarray:
    """Per-site expected occupations, length L."""
    basis = psi.basis
    p = _probabilities(psi)
    n_up = p.sum(axis=1) @ basis.up.occupations
    n_down = p.sum(axis=0) @ basis.down.occupations
    if spin is None:
        return n_up + n_down
    if spin == "up":
        return n_up
    if spin == "down":
        return n_down
    raise ParameterError(f"spin must be in {SPINS} or None, got {spin!r}")


def site_density(psi: StateVector, site: int, spin: str | None = None) -> float:
    """<n_{site}> (total) or <n_{site,spin}>."""
    if not 1 <= site <= psi.basis.L:
        raise ParameterError(f"site {site} outside chain [1, {psi.basis.L}]")
    return float(density_profile(psi, spin)[site - 1])


def total_number(psi: StateVector) -> float:
    return float(density_profile(psi).sum())


def n_after(psi: StateVector) -> float:
    """Total density on the sites after the central barrier, L/2+2 .. L."""
    L = psi.basis.L
    if L % 2:
        raise ParameterError(f"n_after needs an even chain, got L={L}")
    return float(density_profile(psi)[L // 2 + 1:].sum())


def doublon_count(psi: StateVector) -> float:
    """Expected number of doubly occupied sites."""
    return float(_probabilities(psi).ravel() @ psi.basis.doublon_counts)


def norm(psi: StateVector) -> float:
    return psi.norm()


def energy(psi: StateVector, H: SparseHamiltonian) -> float:
    return H.expectation(psi.amplitudes)


def s_squared(psi: StateVector, s2: SparseHamiltonian) -> float:
    return s2.expectation(psi.amplitudes)


def observable_functions(
    specs: list[tuple[str, ObservableSpec]],
    basis: ProductBasis,
    H: SparseHamiltonian | None = None,
    jstar: int | None = None,
) -> dict:
    """Bind (column name, spec) pairs to callables over StateVector.

    H is required when an energy column is requested, jstar when an n_h2
    column is; the S^2 matrix is built once on demand.
    """
    s2 = None
    fns = {}
    for name, spec in specs:
        if spec.kind == "n_site":
            fns[name] = (lambda s: lambda psi: site_density(psi, s))(spec.site)
        elif spec.kind == "n_site_spin":
            fns[name] = (lambda s, sp: lambda psi: site_density(psi, s, sp))(spec.site, spec.spin)
        elif spec.kind == "n_after":
            fns[name] = n_after
        elif spec.kind == "n_h2":
            if jstar is None:
                raise ParameterError("n_h2 requires a barrier (jstar site unknown)")
            fns[name] = (lambda s: lambda psi: site_density(psi, s))(jstar)
        elif spec.kind == "norm":
            fns[name] = norm
        elif spec.kind == "energy":
            if H is None:
                raise ParameterError("energy observable requires the Hamiltonian")
            fns[name] = (lambda ham: lambda psi: energy(psi, ham))(H)
        elif spec.kind == "s_squared":
            if s2 is None:
                s2 = total_spin_squared(basis)
            fns[name] = (lambda op: lambda psi: s_squared(psi, op))(s2)
        elif spec.kind == "doublon_count":
            fns[name] = doublon_count
    return fns


def time_average(times, values, T: float) -> float:
    """Trapezoid-rule average of a sampled column over [0, T].

    The grid must cover [0, T]; samples beyond T are ignored.
    """
    times = np.asarray(times, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    if not T > 0:
        raise ParameterError(f"averaging window T={T} must be positive")
    keep = times <= T * (1 + 1e-12)
    tt, vv = times[keep], values[keep]
    if len(tt) < 2 or tt[-1] < T * (1 - 1e-9):
        raise ParameterError(f"trajectory covers [0, {times[-1] if len(times) else 0}], need [0, {T}]")
    return float(np.trapezoid(vv, tt) / (tt[-1] - tt[0]))


def trap_time(times, values, threshold: float = 0.01) -> float | None:
    """First sampled time where the column strictly exceeds threshold; None if never."""
    if not threshold > 0:
        raise ParameterError(f"threshold={threshold} must be positive")
    hits = np.flatnonzero(np.asarray(values) > threshold)
    if hits.size == 0:
        return None
    return float(np.asarray(times)[hits[0]])
