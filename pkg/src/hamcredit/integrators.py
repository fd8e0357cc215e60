"""Fixed-step integrators for separable Hamiltonians H(q, p) = T(p) + V(q).

Steppers:

* ``explicit_euler``: both updates from the old state. Not symplectic; the
  control case for energy drift.
* ``symplectic_euler``: kick p with the force at q, then drift q with the new
  p. ``flip_drift=True`` negates the drift (q' = q - dt dT/dp), which is
  kept only for study. It still maps area to area (both updates are shears)
  but integrates q' = -dT/dp, so it does not approximate the flow of H; on the
  oscillator the origin becomes a saddle and the energy grows exponentially.
* ``leapfrog``: Stormer-Verlet kick/drift/kick, second order, reversible.
* ``forest_ruth``: symmetric triple-jump of leapfrog substeps with weights
  (x, 1 - 2x, x), x = 1 / (2 - 2**(1/3)); fourth order.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .numerics import as_tensor

FR_X = 1.0 / (2.0 - 2.0 ** (1.0 / 3.0))
FOREST_RUTH_WEIGHTS = (FR_X, 1.0 - 2.0 * FR_X, FR_X)

Vec = np.ndarray


@dataclass(frozen=True)
class SeparableHamiltonian:
    dT_dp: Callable[[Vec], Vec]
    dV_dq: Callable[[Vec], Vec]
    energy: Callable[[Vec, Vec], float]
    dim: int = 1
    name: str = "system"
    check: bool = True

    def __post_init__(self):
        if self.check:
            self.check_consistency()

    def check_consistency(self, tol: float = 1e-6, h: float = 1e-5) -> None:
        """Compare the supplied derivatives with central differences of ``energy``."""
        q0 = 0.3 + 0.1 * np.arange(self.dim, dtype=np.float64)
        p0 = -0.2 + 0.15 * np.arange(self.dim, dtype=np.float64)
        for i in range(self.dim):
            e = np.zeros(self.dim)
            e[i] = h
            fd_q = (self.energy(q0 + e, p0) - self.energy(q0 - e, p0)) / (2 * h)
            fd_p = (self.energy(q0, p0 + e) - self.energy(q0, p0 - e)) / (2 * h)
            if abs(fd_q - self.dV_dq(q0)[i]) > tol or abs(fd_p - self.dT_dp(p0)[i]) > tol:
                raise ValueError(f"{self.name}: derivatives inconsistent with energy in coordinate {i}")


def harmonic_oscillator(mass: float = 1.0, k: float = 1.0) -> SeparableHamiltonian:
    return SeparableHamiltonian(
        dT_dp=lambda p: p / mass,
        dV_dq=lambda q: k * q,
        energy=lambda q, p: float(0.5 * np.dot(p, p) / mass + 0.5 * k * np.dot(q, q)),
        dim=1,
        name="harmonic_oscillator",
    )


def pendulum(g_over_l: float = 1.0) -> SeparableHamiltonian:
    """Planar pendulum, H = p^2/2 + (g/l)(1 - cos q)."""
    return SeparableHamiltonian(
        dT_dp=lambda p: p,
        dV_dq=lambda q: g_over_l * np.sin(q),
        energy=lambda q, p: float(0.5 * np.dot(p, p) + g_over_l * np.sum(1.0 - np.cos(q))),
        dim=1,
        name="pendulum",
    )


def free_particle(dim: int = 1, mass: float = 1.0) -> SeparableHamiltonian:
    return SeparableHamiltonian(
        dT_dp=lambda p: p / mass,
        dV_dq=lambda q: np.zeros_like(q),
        energy=lambda q, p: float(0.5 * np.dot(p, p) / mass),
        dim=dim,
        name="free_particle",
    )


SYSTEMS = {"oscillator": harmonic_oscillator, "pendulum": pendulum, "free": free_particle}


@dataclass(frozen=True)
class PhaseState:
    q: np.ndarray
    p: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        q = np.atleast_1d(as_tensor(self.q))
        p = np.atleast_1d(as_tensor(self.p))
        if q.shape != p.shape or q.ndim != 1:
            raise ValueError(f"q and p must be vectors of equal length, got {q.shape} and {p.shape}")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "p", p)


def _check_dt(dt: float) -> None:
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")


def explicit_euler_step(sys: SeparableHamiltonian, s: PhaseState, dt: float) -> PhaseState:
    _check_dt(dt)
    p = s.p - dt * sys.dV_dq(s.q)
    q = s.q + dt * sys.dT_dp(s.p)
    return PhaseState(q, p, s.t + dt)


def symplectic_euler_step(sys: SeparableHamiltonian, s: PhaseState, dt: float,
                          flip_drift: bool = False) -> PhaseState:
    _check_dt(dt)
    p = s.p - dt * sys.dV_dq(s.q)
    drift = dt * sys.dT_dp(p)
    q = s.q - drift if flip_drift else s.q + drift
    return PhaseState(q, p, s.t + dt)


def _leapfrog(sys, q, p, h):
    # h may be negative inside a Forest-Ruth composition
    p = p - 0.5 * h * sys.dV_dq(q)
    q = q + h * sys.dT_dp(p)
    p = p - 0.5 * h * sys.dV_dq(q)
    return q, p


def leapfrog_step(sys: SeparableHamiltonian, s: PhaseState, dt: float) -> PhaseState:
    _check_dt(dt)
    q, p = _leapfrog(sys, s.q, s.p, dt)
    return PhaseState(q, p, s.t + dt)


def forest_ruth_step(sys: SeparableHamiltonian, s: PhaseState, dt: float) -> PhaseState:
    _check_dt(dt)
    q, p = s.q, s.p
    for w in FOREST_RUTH_WEIGHTS:
        q, p = _leapfrog(sys, q, p, w * dt)
    return PhaseState(q, p, s.t + dt)


STEPPERS = {
    "explicit_euler": explicit_euler_step,
    "symplectic_euler": symplectic_euler_step,
    "leapfrog": leapfrog_step,
    "forest_ruth": forest_ruth_step,
}


@dataclass
class Trajectory:
    t: np.ndarray
    q: np.ndarray  # (n_states, dim)
    p: np.ndarray
    energy: np.ndarray
    dt: float
    kind: str = ""

    def __len__(self):
        return len(self.t)

    def state(self, i: int) -> PhaseState:
        return PhaseState(self.q[i], self.p[i], float(self.t[i]))

    @property
    def final(self) -> PhaseState:
        return self.state(-1)


def integrate(sys: SeparableHamiltonian, s0: PhaseState, dt: float, n_steps: int,
              kind: str = "leapfrog") -> Trajectory:
    if n_steps < 0:
        raise ValueError("n_steps must be >= 0")
    if kind not in STEPPERS:
        raise ValueError(f"unknown integrator {kind!r}; choose from {sorted(STEPPERS)}")
    stepper = STEPPERS[kind]
    d = s0.q.shape[0]
    qs = np.empty((n_steps + 1, d))
    ps = np.empty((n_steps + 1, d))
    ts = np.empty(n_steps + 1)
    es = np.empty(n_steps + 1)
    s = s0
    for i in range(n_steps + 1):
        if i:
            s = stepper(sys, s, dt)
        qs[i], ps[i], ts[i] = s.q, s.p, s.t
        es[i] = sys.energy(s.q, s.p)
    return Trajectory(ts, qs, ps, es, dt, kind)


def energy_drift(traj: Trajectory) -> tuple[float, float]:
    """(max |H(t) - H(0)|, least-squares slope of H against t)."""
    if len(traj) == 0:
        raise ValueError("empty trajectory")
    H = traj.energy
    max_dev = float(np.max(np.abs(H - H[0])))
    if len(traj) < 2:
        return max_dev, 0.0
    t = traj.t - traj.t.mean()
    slope = float(np.dot(t, H - H.mean()) / np.dot(t, t))
    return max_dev, slope


def step_jacobian(sys: SeparableHamiltonian, s: PhaseState, dt: float, kind: str,
                  h: float = 1e-6) -> np.ndarray:
    """Central-difference Jacobian of one step w.r.t. (q, p)."""
    stepper = STEPPERS[kind]
    d = s.q.shape[0]
    x0 = np.concatenate([s.q, s.p])
    J = np.empty((2 * d, 2 * d))
    for j in range(2 * d):
        e = np.zeros(2 * d)
        e[j] = h
        plus = stepper(sys, PhaseState((x0 + e)[:d], (x0 + e)[d:], s.t), dt)
        minus = stepper(sys, PhaseState((x0 - e)[:d], (x0 - e)[d:], s.t), dt)
        J[:, j] = (np.concatenate([plus.q, plus.p]) - np.concatenate([minus.q, minus.p])) / (2 * h)
    return J


def oscillator_exact(q0: float, p0: float, t: float) -> tuple[float, float]:
    """Closed-form flow of H = (p^2 + q^2) / 2."""
    c, s = np.cos(t), np.sin(t)
    return q0 * c + p0 * s, -q0 * s + p0 * c


def convergence_order(kind: str, n_steps=(64, 128, 256, 512), t_end: float = np.pi / 2) -> float:
    """Fitted global order on the unit oscillator from (1, 0) over ``t_end``.

    Slope of log(error) against log(dt) by least squares. The default horizon is
    a quarter period: over a whole period symplectic Euler's first-order error
    cancels (it is leapfrog up to an O(dt) change of variables) and it would
    look second order.
    """
    sys = harmonic_oscillator()
    q_ex, p_ex = oscillator_exact(1.0, 0.0, t_end)
    dts, errs = [], []
    for n in n_steps:
        dt = t_end / n
        s = PhaseState([1.0], [0.0])
        step_fn = STEPPERS[kind]
        for _ in range(n):
            s = step_fn(sys, s, dt)
        errs.append(float(np.hypot(s.q[0] - q_ex, s.p[0] - p_ex)))
        dts.append(dt)
    return float(np.polyfit(np.log(dts), np.log(errs), 1)[0])


def write_trajectory_csv(traj: Trajectory, path) -> None:
    d = traj.q.shape[1]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", *(f"q{i}" for i in range(d)), *(f"p{i}" for i in range(d)), "H"])
        for i in range(len(traj)):
            w.writerow([repr(float(traj.t[i])), *map(repr, map(float, traj.q[i])),
                        *map(repr, map(float, traj.p[i])), repr(float(traj.energy[i]))])
