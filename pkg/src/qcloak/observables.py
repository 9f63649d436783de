"""Scattering observables: phase shifts, amplitudes, cross sections, DN data,
and sampled wave fields.

All systems here are free (sigma = a = 1, V = 0) outside some matching
radius below 3, so a single log-derivative per channel carries the whole
far-field content.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .errors import DomainError, GeometryError, NearEigenvalueError
from .media import LayeredMedium, RadialPotential
from .propagate import AcousticSystem, default_l_max
from .special import spherical_bessel
from .spectral import solve_channel

System = Union[AcousticSystem, LayeredMedium, RadialPotential]


@dataclass(frozen=True)
class PhaseShifts:
    """Partial-wave phase shifts delta_l, l = 0..L, at one energy."""

    E: float
    k: float
    delta: tuple

    @property
    def l_max(self) -> int:
        return len(self.delta) - 1

    def s_matrix(self) -> tuple:
        return tuple(cmath.exp(2j * d) for d in self.delta)


@dataclass(frozen=True)
class DNSpectrum:
    """Channel symbol of the boundary map: Neumann data per unit Dirichlet
    data on the outer sphere."""

    E: float
    lam: tuple

    @property
    def l_max(self) -> int:
        return len(self.lam) - 1

    def max_deviation_from_free(self) -> float:
        free = free_dn_spectrum(self.E, self.l_max)
        return max(abs(a - b) for a, b in zip(self.lam, free.lam))


def _support_radius(system: System) -> float:
    """Outer edge of the non-free region."""
    if isinstance(system, RadialPotential):
        shells = [(s.r_in, s.r_out, s.V != 0.0) for s in system.shells]
    else:
        med = system.medium if isinstance(system, AcousticSystem) else system
        shells = [(s.r_in, s.r_out, s.sigma != 1.0 or s.a != 1.0)
                  for s in med.shells]
        if isinstance(system, AcousticSystem) and system.core is not None:
            shells.append((0.0, system.core.breakpoints()[-1], True))
    edges = [hi for _, hi, nontrivial in shells if nontrivial]
    return max(edges) if edges else 0.0


def phase_shifts(system: System, E: float, l_max: Optional[int] = None,
                 r_match: float = 3.0) -> PhaseShifts:
    """delta_l from matching the propagated log-derivative to free waves at
    r_match: tan(delta) = (k j' - g j)/(k y' - g y) at x = k*r_match.

    Single-energy values use the principal branch; energy scans unwrap with
    `unwrap_phases`.
    """
    if E <= 0.0:
        raise DomainError(f"no propagating far field for E = {E} <= 0")
    if r_match < _support_radius(system) - 1e-12:
        raise GeometryError(
            f"matching radius {r_match} lies inside the scattering support")
    k = math.sqrt(E)
    if l_max is None:
        l_max = default_l_max(E)
    x = k * r_match
    deltas = []
    for l in range(l_max + 1):
        sol = solve_channel(system, l, E, want_norms=False)
        g = (sol.log_derivative_at(r_match) if r_match < sol.r_max
             else sol.log_derivative_end)
        s = spherical_bessel(l, x)
        num = k * s.jp - g * s.j
        den = k * s.yp - g * s.y
        if den == 0.0:
            deltas.append(math.copysign(math.pi / 2.0, num))
        else:
            deltas.append(math.atan(num / den))
    return PhaseShifts(E, k, tuple(deltas))


def unwrap_phases(deltas: np.ndarray) -> np.ndarray:
    """Make a phase-shift scan continuous in E (unwrap modulo pi)."""
    out = np.asarray(deltas, dtype=float).copy()
    for i in range(1, len(out)):
        while out[i] - out[i - 1] > math.pi / 2:
            out[i] -= math.pi
        while out[i] - out[i - 1] < -math.pi / 2:
            out[i] += math.pi
    return out


def legendre_values(l_max: int, mu) -> np.ndarray:
    """P_l(mu) for l = 0..l_max, vectorized over mu; shape (l_max+1, ...)."""
    mu = np.asarray(mu, dtype=float)
    out = np.empty((l_max + 1,) + mu.shape)
    out[0] = 1.0
    if l_max >= 1:
        out[1] = mu
    for l in range(1, l_max):
        out[l + 1] = ((2 * l + 1) * mu * out[l] - l * out[l - 1]) / (l + 1)
    return out


def amplitude(shifts: PhaseShifts, theta: float) -> complex:
    """f(theta) = (1/k) sum (2l+1) e^{i delta} sin(delta) P_l(cos theta)."""
    mu = math.cos(theta)
    pl = legendre_values(shifts.l_max, mu)
    acc = 0j
    for l, d in enumerate(shifts.delta):
        acc += (2 * l + 1) * cmath.exp(1j * d) * math.sin(d) * pl[l]
    return acc / shifts.k


def total_cross_section(shifts: PhaseShifts) -> float:
    """sigma_tot = (4 pi / k^2) sum (2l+1) sin^2(delta_l)."""
    acc = sum((2 * l + 1) * math.sin(d) ** 2
              for l, d in enumerate(shifts.delta))
    return 4.0 * math.pi / (shifts.k ** 2) * acc


def optical_theorem_defect(shifts: PhaseShifts) -> float:
    """Relative defect of sigma_tot = (4 pi / k) Im f(0)."""
    st = total_cross_section(shifts)
    via_f = 4.0 * math.pi / shifts.k * amplitude(shifts, 0.0).imag
    scale = max(abs(st), abs(via_f), 1e-300)
    return abs(st - via_f) / scale


def dn_spectrum(system: System, E: float, l_max: Optional[int] = None,
                u_threshold: float = 1e-10) -> DNSpectrum:
    """Channel values sigma(3) u'(3)/u(3) of the boundary map at energy E.

    Raises NearEigenvalueError naming the channel when the boundary value of
    the regular solution falls below threshold (E is numerically a Dirichlet
    eigenvalue of the full problem).
    """
    if l_max is None:
        l_max = default_l_max(E)
    lam = []
    for l in range(l_max + 1):
        sol = solve_channel(system, l, E, want_norms=False)
        if abs(sol.dirichlet_value) < u_threshold:
            raise NearEigenvalueError(
                f"E = {E} is numerically a Dirichlet eigenvalue in channel "
                f"l = {l}", l=l, E=E)
        lam.append(sol.log_derivative_end)
    return DNSpectrum(E, tuple(lam))


def free_dn_spectrum(E: float, l_max: int, radius: float = 3.0) -> DNSpectrum:
    """Analytic free-space channel values k j_l'(k R)/j_l(k R)."""
    k = math.sqrt(E)
    x = k * radius
    lam = []
    for l in range(l_max + 1):
        s = spherical_bessel(l, x)
        lam.append(k * s.jp / s.j)
    return DNSpectrum(E, tuple(lam))


def plane_wave_field(system: System, E: float, points,
                     l_max: Optional[int] = None) -> np.ndarray:
    """Total wave for a unit incident plane wave, sampled at points.

    `points` is an (n, 2) array of (r, cos_theta) with theta measured from
    the incidence direction.  The channel radial factors are the regular
    solutions normalized so the far field is e^{ikz} + outgoing; points on a
    shell boundary are evaluated from the inner side.
    """
    pts = np.asarray(points, dtype=float)
    r = pts[:, 0]
    mu = pts[:, 1]
    if np.any(r < 0) or np.any(np.abs(mu) > 1.0 + 1e-12):
        raise DomainError("points must have r >= 0 and |cos theta| <= 1")
    if l_max is None:
        l_max = default_l_max(E)
    shifts = phase_shifts(system, E, l_max=l_max)
    k = shifts.k

    inside = r <= 3.0
    r_in = r[inside]
    order = np.argsort(r_in)
    r_sorted = r_in[order]
    pl = legendre_values(l_max, mu)
    psi = np.zeros(len(r), dtype=complex)
    for l in range(l_max + 1):
        d = shifts.delta[l]
        radial = np.empty(len(r), dtype=complex)
        if r_in.size:
            sol = solve_channel(system, l, E, want_norms=False,
                                sample_r=r_sorted)
            u = np.empty_like(r_sorted)
            u[order] = sol.sample_u
            s3 = spherical_bessel(l, k * sol.r_max)
            r3 = cmath.exp(1j * d) * (math.cos(d) * s3.j
                                      - math.sin(d) * s3.y)
            radial[inside] = u * r3
        if not inside.all():
            # free-space continuation beyond the outer ball
            for idx in np.flatnonzero(~inside):
                s = spherical_bessel(l, k * r[idx])
                radial[idx] = cmath.exp(1j * d) * (math.cos(d) * s.j
                                                   - math.sin(d) * s.y)
        psi += (1j ** l) * (2 * l + 1) * radial * pl[l]
    return psi


def radial_mode(system: System, l: int, E_star: float,
                radii) -> np.ndarray:
    """Radial profile u(r) of the channel solution at an (almost) eigenvalue,
    normalized to unit maximum amplitude; used to plot trapped states.

    Radii beyond the outer ball get NaN (the mode is not defined there)."""
    rr = np.asarray(radii, dtype=float)
    inside = rr <= 3.0
    u = np.full_like(rr, np.nan)
    r_in = rr[inside]
    if r_in.size:
        order = np.argsort(r_in)
        sol = solve_channel(system, l, E_star, want_norms=False,
                            sample_r=r_in[order])
        u_in = np.empty_like(r_in)
        u_in[order] = sol.sample_u
        u[inside] = u_in
    peak = np.nanmax(np.abs(u))
    return u / peak if peak > 0 else u
