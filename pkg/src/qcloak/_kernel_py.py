"""Pure-Python propagation kernel.

Reference implementation of the per-channel shell marcher; `qcloak._kernel`
is the compiled twin with identical semantics, selected at import time by
`qcloak.propagate`.

The radial factor is propagated in Riccati form v = rho*u, where within one
shell  v'' + (k2 - l(l+1)/rho^2) v = 0.  The state (v, v') is renormalized to
unit length after every substep and the scale is tracked in log space, so
deeply evanescent stacks can never overflow.  Interfaces rescale v' by the
conductivity ratio (v continuous, sigma*u' continuous); plain potential
interfaces pass w = 1 and reduce to continuity of (v, v').

Substep representation: the local solution is expanded in the fundamental
pair of the shell (Riccati-Bessel, scaled modified Riccati-Bessel, or power
law near zero wavenumber) with coefficients solved from the entering state;
the same expansion supplies Gauss-Legendre quadrature of |v|^2 for the norm
accumulators and point samples for field maps.
"""

from __future__ import annotations

import math
from typing import NamedTuple, Optional, Sequence

from .special import _sph_ik_pair_scaled, _sph_jy_pair

# max |k| * (substep width); bounds both the e^(+-2) evanescent growth per
# substep and the quadrature phase per panel
_PHASE_CAP = 2.0
_POWER_RATIO_CAP = 1.25          # max b/a per power-law substep
_EPS_ORIGIN = 1e-6               # analytic power-law start radius
_NORM_CEIL = 1e250
_NORM_SHIFT = 100.0 * math.log(10.0)

_G8_NODES = (
    -0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
    -0.1834346424956498, 0.1834346424956498, 0.5255324099163290,
    0.7966664774136267, 0.9602898564975363,
)
_G8_WEIGHTS = (
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
    0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
    0.2223810344533745, 0.1012285362903763,
)


class KernelResult(NamedTuple):
    p3: float                 # v at the outer boundary, unit state
    q3: float                 # v' at the outer boundary, unit state
    gam_v: list               # v'/v on the inner side of each shell boundary
    i_core: float             # int_0^r_core v^2, units of the final state
    i_total: float            # int_0^R v^2, same units
    i_logoff: float           # add to log(i_*) to undo overflow rescales
    samples: Optional[list]   # v at sample_r, units of the final state
    overflow: bool


class _Local:
    """Fundamental-pair expansion of the solution on one substep."""

    __slots__ = ("kind", "l", "k", "a", "A", "B")

    def __init__(self, l: int, k2: float, a: float, va: float, dva: float,
                 power: bool):
        self.l = l
        self.a = a
        if power:
            self.kind = 0
            self.k = 0.0
            self.A = (a * dva + l * va) / (2 * l + 1)
            self.B = ((l + 1) * va - a * dva) / (2 * l + 1)
        elif k2 > 0.0:
            self.kind = 1
            k = math.sqrt(k2)
            self.k = k
            x = k * a
            jm, j, ym, y = _sph_jy_pair(l, x)
            F = x * j
            Fp = x * jm - l * j
            G = -x * y
            Gp = -(x * ym - l * y)
            # v = A*F + B*G with det = k*(F*Gp' - ...) = -k
            self.A = (dva * G - va * k * Gp) / k
            self.B = (va * k * Fp - F * dva) / k
        else:
            self.kind = -1
            kap = math.sqrt(-k2)
            self.k = kap
            x = kap * a
            im, i, km, kk = _sph_ik_pair_scaled(l, x)
            F = x * i            # e^-x (x i_l)
            Fp = x * im - l * i
            G = x * kk           # e^+x (x k_l)
            Gp = -x * km - l * kk
            det = kap * (F * Gp - Fp * G)   # = -kap*pi/2 analytically
            self.A = (va * kap * Gp - dva * G) / det
            self.B = (dva * F - va * kap * Fp) / det

    def eval(self, rho: float) -> tuple[float, float]:
        """(v, v') at rho within the substep."""
        l = self.l
        if self.kind == 0:
            t = rho / self.a
            tp = t ** (l + 1)
            tm = t ** (-l)
            v = self.A * tp + self.B * tm
            dv = ((l + 1) * self.A * tp / t - l * self.B * tm / t) / self.a
            return v, dv
        x = self.k * rho
        if self.kind == 1:
            jm, j, ym, y = _sph_jy_pair(l, x)
            F = x * j
            Fp = x * jm - l * j
            G = -x * y
            Gp = -(x * ym - l * y)
            return (self.A * F + self.B * G,
                    self.k * (self.A * Fp + self.B * Gp))
        im, i, km, kk = _sph_ik_pair_scaled(l, x)
        d = x - self.k * self.a
        ep = math.exp(d)
        em = math.exp(-d)
        F = x * i * ep
        Fp = (x * im - l * i) * ep
        G = x * kk * em
        Gp = (-x * km - l * kk) * em
        return (self.A * F + self.B * G,
                self.k * (self.A * Fp + self.B * Gp))

    def value(self, rho: float) -> float:
        return self.eval(rho)[0]


def _substeps(a: float, b: float, k2: float, power: bool) -> int:
    if power:
        return max(1, math.ceil(math.log(b / a) / math.log(_POWER_RATIO_CAP)))
    return max(1, math.ceil(math.sqrt(abs(k2)) * (b - a) / _PHASE_CAP))


def _use_power(k2: float, a: float, b: float) -> bool:
    return abs(k2) * b * (b - a) < 1e-14


def _panel(loc: _Local, lo: float, hi: float) -> float:
    """int_lo^hi v^2 by 8-point Gauss-Legendre."""
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    acc = 0.0
    for node, wt in zip(_G8_NODES, _G8_WEIGHTS):
        v = loc.value(mid + half * node)
        acc += wt * v * v
    return acc * half


def propagate(l: int, r: Sequence[float], k2: Sequence[float],
              w: Sequence[float], r_core: float = 1.0,
              want_norms: bool = True,
              sample_r: Optional[Sequence[float]] = None) -> KernelResult:
    """March the regular solution of channel l outward through the shells.

    r has N+1 boundaries starting at 0; k2 and w hold per-shell squared
    wavenumbers and derivative-continuity weights.  sample_r must be sorted
    ascending within (0, r[-1]].
    """
    n_shell = len(k2)
    r_eps = min(_EPS_ORIGIN, 0.5 * r[1])
    h = math.hypot(r_eps, l + 1.0)
    p, q = r_eps / h, (l + 1.0) / h
    lam = 0.0
    i_core = i_total = 0.0
    i_logoff = 0.0
    gam_v = []
    n_samp = len(sample_r) if sample_r is not None else 0
    samples = [0.0] * n_samp
    samp_lam = [0.0] * n_samp
    si = 0
    overflow = False

    for ish in range(n_shell):
        a = r[ish] if ish > 0 else r_eps
        b = r[ish + 1]
        if ish > 0 and w[ish] != w[ish - 1]:
            # v continuous; sigma*u' continuous with u = v/rho
            q = (w[ish - 1] / w[ish]) * (q - p / a) + p / a
            m = math.hypot(p, q)
            p /= m
            q /= m
            lam += math.log(m)
            if want_norms:
                f = 1.0 / (m * m)
                i_core *= f
                i_total *= f
        power = _use_power(k2[ish], a, b)
        nsub = _substeps(a, b, k2[ish], power)
        for isub in range(nsub):
            if power:
                sa = a * (b / a) ** (isub / nsub)
                sb = a * (b / a) ** ((isub + 1) / nsub)
            else:
                sa = a + (b - a) * isub / nsub
                sb = a + (b - a) * (isub + 1) / nsub
            loc = _Local(l, k2[ish], sa, p, q, power)
            if want_norms:
                add_core = 0.0
                add_total = 0.0
                if sa < r_core < sb:
                    add_core = _panel(loc, sa, r_core)
                    add_total = add_core + _panel(loc, r_core, sb)
                elif sb <= r_core:
                    add_core = add_total = _panel(loc, sa, sb)
                else:
                    add_total = _panel(loc, sa, sb)
                scale = math.exp(-i_logoff) if i_logoff else 1.0
                i_core += add_core * scale
                i_total += add_total * scale
            while si < n_samp and sample_r[si] <= sb + 1e-15:
                samples[si] = loc.value(max(sample_r[si], r_eps))
                samp_lam[si] = lam
                si += 1
            p, q = loc.eval(sb)
            m = math.hypot(p, q)
            p /= m
            q /= m
            dlam = math.log(m)
            lam += dlam
            if want_norms:
                f = math.exp(-2.0 * dlam)
                i_core *= f
                i_total *= f
                if i_total > _NORM_CEIL:
                    i_core *= math.exp(-_NORM_SHIFT)
                    i_total *= math.exp(-_NORM_SHIFT)
                    i_logoff += _NORM_SHIFT
                    overflow = True
        gam_v.append(q / p if p != 0.0 else math.copysign(math.inf, q))

    out = None
    if sample_r is not None:
        out = [val * math.exp(min(sl - lam, 700.0))
               for val, sl in zip(samples, samp_lam)]
    return KernelResult(p, q, gam_v, i_core, i_total, i_logoff, out, overflow)


def shell_transfer(l: int, a: float, b: float, k2: float) -> list:
    """2x2 matrix taking (v, v') from a to b across a uniform shell.

    Test surface: its determinant is the Wronskian ratio and must equal 1.
    """
    cols = []
    for va, dva in ((1.0, 0.0), (0.0, 1.0)):
        p, q = va, dva
        power = _use_power(k2, a, b)
        nsub = _substeps(a, b, k2, power)
        for isub in range(nsub):
            if power:
                sa = a * (b / a) ** (isub / nsub)
                sb = a * (b / a) ** ((isub + 1) / nsub)
            else:
                sa = a + (b - a) * isub / nsub
                sb = a + (b - a) * (isub + 1) / nsub
            p, q = _Local(l, k2, sa, p, q, power).eval(sb)
        cols.append((p, q))
    return [[cols[0][0], cols[1][0]], [cols[0][1], cols[1][1]]]
