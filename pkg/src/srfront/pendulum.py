"""Pendulum reduction of the angle dynamics and the flat-chart closed form.

Along any extremal the angle obeys  theta'' = -r sin(2 theta + rho)  with
r = (alpha^2 + beta^2)/2,  sin(rho) = alpha beta / r,
cos(rho) = (beta^2 - alpha^2) / (2 r),  where alpha = k p1 + l p2 and
beta = m p1 + n p2.  (This is the phase convention under which the identity
phi' = -A B holds; see the sign check in the tests.)  On the flat chart r and
rho are constants of motion, Theta = 2 theta + rho solves the simple pendulum
equation with frequency omega = sqrt(2 r), and theta has a closed form in
Jacobi elliptic functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .extremal import ExtremalState
from .metric import OrthonormalFrame

# Two ulps: the AGM stalls at a one-ulp gap, so a tighter cutoff never fires.
_AGM_EPS = 4e-16
_R_DEGENERATE = 1e-30
# Relative width of the separatrix band handled by the hyperbolic-function
# branch; inside it the elliptic modulus is too close to 1 to be trusted.
_SEPARATRIX_BAND = 1e-12


@dataclass(frozen=True)
class PendulumParams:
    """Amplitude, phase, frequency, and reduced angle of the pendulum form."""

    r: float
    rho: float
    omega: float
    Theta: float
    degenerate: bool = False  # r = 0: momenta vanish, phase undefined


def reduce(frame: OrthonormalFrame, s: ExtremalState) -> PendulumParams:
    """Pendulum parameters of the angle equation at the given state."""
    k, l, m, n = frame.values(s.x1, s.x2)
    al = k * s.p1 + l * s.p2
    be = m * s.p1 + n * s.p2
    r = 0.5 * (al * al + be * be)
    if r < _R_DEGENERATE:
        return PendulumParams(r=r, rho=0.0, omega=0.0, Theta=2.0 * s.theta, degenerate=True)
    rho = math.atan2(al * be, 0.5 * (be * be - al * al))
    return PendulumParams(
        r=r, rho=rho, omega=math.sqrt(2.0 * r), Theta=2.0 * s.theta + rho,
    )


def pendulum_energy(s: ExtremalState, params: PendulumParams) -> float:
    """theta_dot^2 / 2 - (r/2) cos(2 theta + rho); conserved on the flat chart.

    Values below r/2 are librations, above are rotations, r/2 itself is the
    separatrix.
    """
    return 0.5 * s.phi * s.phi - 0.5 * params.r * math.cos(2.0 * s.theta + params.rho)


# --- Jacobi elliptic functions by the arithmetic-geometric mean ---------


def _agm_tables(m: float):
    """Scale/cofactor tables of the AGM chain for parameter m in [0, 1)."""
    a, b = 1.0, math.sqrt(1.0 - m)
    aa = [a]
    cc = [math.sqrt(m)]
    while abs(cc[-1]) > _AGM_EPS * aa[-1] and len(aa) < 40:
        aa.append(0.5 * (a + b))
        cc.append(0.5 * (a - b))
        a, b = aa[-1], math.sqrt(a * b)
    return aa, cc


def complete_K(m: float) -> float:
    """Complete elliptic integral of the first kind, parameter convention."""
    if not 0.0 <= m < 1.0:
        raise ValueError(f"parameter m={m!r} outside [0, 1)")
    aa, _ = _agm_tables(m)
    return math.pi / (2.0 * aa[-1])


def incomplete_F(phi: float, m: float) -> float:
    """Incomplete elliptic integral of the first kind F(phi | m), any real phi."""
    if not 0.0 <= m <= 1.0:
        raise ValueError(f"parameter m={m!r} outside [0, 1]")
    if m == 0.0:
        return phi
    if m == 1.0:
        if abs(phi) >= math.pi / 2.0:
            raise ValueError("F(phi | 1) diverges at |phi| >= pi/2")
        return math.atanh(math.sin(phi))
    n = round(phi / math.pi)
    ph = phi - math.pi * n
    a, b = 1.0, math.sqrt(1.0 - m)
    twon = 1.0
    while a - b > _AGM_EPS * a:
        t = math.atan2(b * math.sin(ph), a * math.cos(ph))
        ph = ph + t + math.pi * round((ph - t) / math.pi)
        a, b = 0.5 * (a + b), math.sqrt(a * b)
        twon *= 2.0
    # K from the same chain: the quarter period is pi / (2 a_N).
    return ph / (twon * a) + (2.0 * n) * math.pi / (2.0 * a)


def jacobi(u: float, mmod: float):
    """(sn, cn, dn, am) at u for parameter mmod in [0, 1].

    Descending Landen recursion seeded by the AGM chain; the returned
    amplitude is continuous in u (unwrapped through full periods).
    """
    if not 0.0 <= mmod <= 1.0:
        raise ValueError(f"parameter m={mmod!r} outside [0, 1]")
    if mmod == 1.0:
        sech = 1.0 / math.cosh(u)
        return math.tanh(u), sech, sech, math.atan(math.sinh(u))
    aa, cc = _agm_tables(mmod)
    big_k = math.pi / (2.0 * aa[-1])
    n = math.floor(u / (2.0 * big_k) + 0.5)
    u0 = u - 2.0 * big_k * n
    top = len(aa) - 1
    phi = (2.0 ** top) * aa[top] * u0
    for i in range(top, 0, -1):
        sv = cc[i] / aa[i] * math.sin(phi)
        sv = max(-1.0, min(1.0, sv))
        phi = 0.5 * (phi + math.asin(sv))
    am = phi + math.pi * n
    sn = math.sin(am)
    cn = math.cos(am)
    dn = math.sqrt(1.0 - mmod * sn * sn)
    return sn, cn, dn, am


# --- Flat-chart closed form ----------------------------------------------


@dataclass(frozen=True)
class FlatPendulumSolution:
    """Exact flat-chart angle evolution; call it at any t for (theta, theta_dot)."""

    params: PendulumParams
    branch: str  # linear | equilibrium | libration | rotation | separatrix
    theta0: float
    phi0: float
    m: float = 0.0
    rate: float = 0.0    # time coefficient inside the elliptic argument
    u0: float = 0.0      # phase of the elliptic argument
    center: float = 0.0  # 2 pi k libration/separatrix center in Theta
    sign: float = 1.0

    def __call__(self, t: float) -> tuple[float, float]:
        rho = self.params.rho
        if self.branch == "linear":
            return self.theta0 + self.phi0 * t, self.phi0
        if self.branch == "equilibrium":
            return self.theta0, 0.0
        if self.branch == "libration":
            sn, cn, _, _ = jacobi(self.rate * t + self.u0, self.m)
            sm = math.sqrt(self.m)
            big_theta = self.center + 2.0 * math.asin(max(-1.0, min(1.0, sm * sn)))
            big_theta_dot = 2.0 * sm * self.rate * cn
        elif self.branch == "rotation":
            _, _, dn, am = jacobi(self.rate * t + self.u0, self.m)
            big_theta = 2.0 * self.sign * am
            big_theta_dot = 2.0 * self.sign * self.rate * dn
        else:  # separatrix
            arg = self.rate * t + self.u0
            big_theta = self.center + 2.0 * self.sign * math.atan(math.sinh(arg))
            big_theta_dot = 2.0 * self.sign * self.rate / math.cosh(arg)
        return (big_theta - rho) / 2.0, big_theta_dot / 2.0


def flat_pendulum_solution(s0: ExtremalState) -> FlatPendulumSolution:
    """Closed-form angle evolution for a flat-chart extremal from s0."""
    p1, p2 = s0.p1, s0.p2
    r = 0.5 * (p1 * p1 + p2 * p2)
    if r < _R_DEGENERATE:
        params = PendulumParams(r=r, rho=0.0, omega=0.0, Theta=2.0 * s0.theta,
                                degenerate=True)
        return FlatPendulumSolution(params=params, branch="linear",
                                    theta0=s0.theta, phi0=s0.phi)
    rho = math.atan2(p1 * p2, 0.5 * (p2 * p2 - p1 * p1))
    omega = math.sqrt(2.0 * r)
    params = PendulumParams(r=r, rho=rho, omega=omega, Theta=2.0 * s0.theta + rho)

    big_theta0 = 2.0 * s0.theta + rho
    big_theta_dot0 = 2.0 * s0.phi
    energy = 0.5 * big_theta_dot0 ** 2 - omega * omega * math.cos(big_theta0)
    w2 = omega * omega
    gap = energy - w2

    if abs(gap) < 4.0 * _SEPARATRIX_BAND * max(1.0, r):
        if abs(big_theta_dot0) <= 1e-12 * omega:
            # Unstable equilibrium: the angle is frozen at the hilltop.
            return FlatPendulumSolution(params=params, branch="equilibrium",
                                        theta0=s0.theta, phi0=0.0)
        k = round(big_theta0 / (2.0 * math.pi))
        center = 2.0 * math.pi * k
        sgn = 1.0 if big_theta_dot0 > 0.0 else -1.0
        half = sgn * (big_theta0 - center) / 2.0
        u0 = math.atanh(max(-1.0, min(1.0, math.sin(half))))
        return FlatPendulumSolution(params=params, branch="separatrix",
                                    theta0=s0.theta, phi0=s0.phi,
                                    rate=omega, u0=u0, center=center, sign=sgn)

    if gap < 0.0:  # libration
        m = (energy + w2) / (2.0 * w2)
        if m <= 1e-15:
            return FlatPendulumSolution(params=params, branch="equilibrium",
                                        theta0=s0.theta, phi0=0.0)
        k = round(big_theta0 / (2.0 * math.pi))
        center = 2.0 * math.pi * k
        sm = math.sqrt(m)
        s_val = math.sin((big_theta0 - center) / 2.0) / sm
        c_val = big_theta_dot0 / (2.0 * sm * omega)
        norm = math.hypot(s_val, c_val)
        u0 = incomplete_F(math.atan2(s_val / norm, c_val / norm), m)
        return FlatPendulumSolution(params=params, branch="libration",
                                    theta0=s0.theta, phi0=s0.phi,
                                    m=m, rate=omega, u0=u0, center=center)

    # rotation
    m = 2.0 * w2 / (energy + w2)
    rate = omega / math.sqrt(m)
    sgn = 1.0 if big_theta_dot0 > 0.0 else -1.0
    u0 = incomplete_F(sgn * big_theta0 / 2.0, m)
    return FlatPendulumSolution(params=params, branch="rotation",
                                theta0=s0.theta, phi0=s0.phi,
                                m=m, rate=rate, u0=u0, sign=sgn)


def closed_form_flat(s0: ExtremalState, t: float) -> tuple[float, float]:
    """(theta, theta_dot) at time t of the exact flat-chart angle evolution."""
    return flat_pendulum_solution(s0)(t)
