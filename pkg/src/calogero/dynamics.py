"""Time evolution: projection-method flow, adaptive integration, branch tracking, scattering.

With the repulsive (imaginary) coupling ``L`` is Hermitian, the matrix
``X(0) + t L(0)`` is Hermitian for every real ``t`` and its eigenvalues are the
particle positions at time ``t``.  Particles never pass each other, so the
``r``-th smallest eigenvalue always belongs to the particle that started
``r``-th from the left.
"""
from __future__ import annotations

import csv
import dataclasses
import io
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import (BranchAmbiguity, CollisionDetected, CouplingUnsupported, Degenerate,
                     NoConvergence, StepUnderflow)
from .phase_core import Coupling, PhaseState, build_lax, hamiltonian
from .poisson import BracketReport
from .spectral import eigen, gap_threshold, min_gap, spectral_coords

EPS_DYN = 1e-6


def _require_repulsive(s: PhaseState):
    if s.coupling is not Coupling.IMAGINARY:
        raise CouplingUnsupported("dynamics is implemented for the imaginary (repulsive) coupling only")


def exact_flow(s: PhaseState, t: float) -> PhaseState:
    """State at time ``t`` from the spectrum of ``X(0) + t L(0)``.

    Momenta are the Rayleigh quotients ``psi^H L(0) psi`` of the same
    eigenvectors, i.e. the time derivatives of the eigenvalues.
    """
    _require_repulsive(s)
    if t == 0:
        return s
    pair = build_lax(s)
    M = pair.X + t * pair.L
    w, V = np.linalg.eigh(M)
    if s.n > 1 and min_gap(w) < gap_threshold(M):
        raise Degenerate(f"X + tL has colliding eigenvalues at t={t:g}")
    p = np.real(np.einsum("ji,jk,ki->i", V.conj(), pair.L, V))
    rank = np.argsort(s.x, kind="stable")
    x_new = np.empty(s.n)
    p_new = np.empty(s.n)
    x_new[rank] = w
    p_new[rank] = p
    return PhaseState(x_new, p_new, s.coupling, s.eps_pos)


def forces(x: np.ndarray, g: float) -> np.ndarray:
    """``dp_i/dt = 2 g sum_{j != i} (x_i - x_j)**-3``."""
    d = x[:, None] - x[None, :]
    np.fill_diagonal(d, np.inf)
    return 2.0 * g * np.sum(d ** -3.0, axis=1)


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    states: tuple
    energy_track: np.ndarray
    coord_tracks: tuple | None = None

    def __post_init__(self):
        if len(self.times) != len(self.states) or len(self.times) != len(self.energy_track):
            raise ValueError("times, states and energy_track differ in length")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")

    @property
    def n(self) -> int:
        return self.states[0].n

    @property
    def positions(self) -> np.ndarray:
        return np.array([s.x for s in self.states])

    @property
    def momenta(self) -> np.ndarray:
        return np.array([s.p for s in self.states])

    @property
    def energy_drift(self) -> float:
        return float(np.max(np.abs(self.energy_track - self.energy_track[0])))

    @property
    def lambda_drift(self) -> float:
        if self.coord_tracks is None:
            raise ValueError("coordinates not tracked yet")
        lam = np.array([c.lambdas for c in self.coord_tracks])
        return float(np.max(np.abs(lam - lam[0])))

    def write_csv(self, fh):
        n = self.n
        header = (["t"] + [f"x_{i}" for i in range(1, n + 1)] + [f"p_{i}" for i in range(1, n + 1)]
                  + [f"lambda_{i}" for i in range(1, n + 1)]
                  + [f"re_mu_{i}" for i in range(1, n + 1)] + [f"im_mu_{i}" for i in range(1, n + 1)]
                  + [f"re_mutilde_{i}" for i in range(1, n + 1)]
                  + [f"im_mutilde_{i}" for i in range(1, n + 1)] + ["energy"])
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        tracks = self.coord_tracks or [None] * len(self.times)
        for t, s, c, e in zip(self.times, self.states, tracks, self.energy_track):
            if c is None:
                spectral = [""] * (5 * n)
            else:
                spectral = ([repr(float(v)) for v in c.lambdas.real]
                            + [repr(float(v)) for v in c.mu.real] + [repr(float(v)) for v in c.mu.imag]
                            + [repr(float(v)) for v in c.mu_tilde.real]
                            + [repr(float(v)) for v in c.mu_tilde.imag])
            w.writerow([repr(float(t))] + [repr(float(v)) for v in s.x] + [repr(float(v)) for v in s.p]
                       + spectral + [repr(float(e))])

    def to_csv(self) -> str:
        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()


def sample_exact(s: PhaseState, times) -> Trajectory:
    times = np.asarray(times, dtype=float)
    states = tuple(exact_flow(s, t) for t in times)
    return Trajectory(times, states, np.array([hamiltonian(q) for q in states]))


def integrate(s: PhaseState, t_end: float, tol: float = 1e-10, t_out=None,
              eps_dyn: float = EPS_DYN) -> Trajectory:
    """Integrate Hamilton's equations with the Dormand-Prince 5(4) pair.

    Records every accepted step and the requested output times ``t_out``;
    integration is restarted at each output time so those samples are genuine
    steps rather than interpolated values.
    """
    _require_repulsive(s)
    if t_end <= 0:
        raise ValueError("t_end must be positive")
    n = s.n
    g = s.coupling.g

    def rhs(_, u):
        return np.concatenate([u[n:], forces(u[:n], g)])

    def collision(_, u):
        return np.min(np.diff(np.sort(u[:n]))) - eps_dyn if n > 1 else 1.0

    collision.terminal = True

    # solve_ivp bounds the RMS of the scaled local error; dividing by sqrt(2n)
    # turns that into a bound on every component.
    step_tol = tol / np.sqrt(2 * n)
    stops = {float(t_end)}
    if t_out is not None:
        stops |= {float(t) for t in np.atleast_1d(t_out) if 0 < t < t_end}
    stops = sorted(stops)
    times = [0.0]
    vecs = [s.as_vector()]
    t0 = 0.0
    for t1 in stops:
        sol = solve_ivp(rhs, (t0, t1), vecs[-1], method="RK45", rtol=step_tol, atol=step_tol,
                        events=collision)
        if sol.status == 1:
            raise CollisionDetected(f"particles within {eps_dyn:g} at t={sol.t_events[0][0]:.6g}")
        if sol.status != 0:
            raise StepUnderflow(sol.message)
        times.extend(sol.t[1:])
        vecs.extend(sol.y.T[1:])
        t0 = t1
    states = tuple(s.with_vector(v) for v in vecs)
    energy = np.array([hamiltonian(q) for q in states])
    return Trajectory(np.array(times), states, energy)


def track_coordinates(traj: Trajectory) -> Trajectory:
    """Spectral coordinates at each sample, with eigenvalue branches matched for continuity.

    The first sample uses the (Re, Im) order; each later sample is permuted
    greedily so that every branch moves to its nearest unclaimed eigenvalue.
    """
    tracks = []
    prev = None
    for state in traj.states:
        c = spectral_coords(build_lax(state))
        if prev is not None:
            perm = _match(prev.lambdas, c.lambdas)
            c = dataclasses.replace(c, lambdas=c.lambdas[perm], mu=c.mu[perm], mu_tilde=c.mu_tilde[perm])
            jump = float(np.max(np.abs(c.lambdas - prev.lambdas)))
            if jump >= c.min_gap / 2:
                raise BranchAmbiguity(f"eigenvalue moved {jump:.3g} between samples, gap {c.min_gap:.3g}")
        tracks.append(c)
        prev = c
    return dataclasses.replace(traj, coord_tracks=tuple(tracks))


def _match(prev: np.ndarray, cur: np.ndarray) -> np.ndarray:
    free = list(range(cur.size))
    perm = []
    for lam in prev:
        d = np.abs(cur[free] - lam)
        order = np.argsort(d)
        best = free[order[0]]
        if len(free) > 1:
            drift = d[order[0]]
            if d[order[1]] - drift < 2 * drift:
                raise BranchAmbiguity(f"cannot tell branches apart near {lam:.6g}")
        perm.append(best)
        free.remove(best)
    return np.array(perm, dtype=int)


@dataclass(frozen=True)
class ScatteringData:
    p_plus: np.ndarray
    p_minus: np.ndarray
    x_plus: np.ndarray
    x_minus: np.ndarray
    fit_residuals: float
    lambdas: np.ndarray = field(default=None)

    def to_dict(self) -> dict:
        return {
            "p_plus": [float(v) for v in self.p_plus],
            "p_minus": [float(v) for v in self.p_minus],
            "x_plus": [float(v) for v in self.x_plus],
            "x_minus": [float(v) for v in self.x_minus],
            "fit_residuals": float(self.fit_residuals),
        }


def _fit_branches(s: PhaseState, times: np.ndarray):
    """Least-squares ``x(t) = p t + x0 + a / t + b / t**2`` for each position-ordered branch."""
    X = np.array([np.sort(exact_flow(s, t).x) for t in times])
    basis = np.column_stack([times, np.ones_like(times), 1.0 / times, 1.0 / times ** 2])
    coef, *_ = np.linalg.lstsq(basis, X, rcond=None)
    resid = float(np.max(np.abs(basis @ coef - X)))
    return coef[0], coef[1], resid


def scattering(s: PhaseState, t_max: float = 1e3, samples: int = 64) -> ScatteringData:
    """Asymptotic momenta and intercepts on both time ends, per sorted position branch.

    The eigenvalues of ``X + tL`` expand in powers of ``1/t``; the ``1/t`` and
    ``1/t**2`` columns absorb the leading corrections, which would otherwise
    bias the slope by ``O(1/t_max**2)``.
    """
    _require_repulsive(s)
    L = build_lax(s).L
    lam = eigen(L, s.coupling).lambdas.real
    if s.n > 1 and min_gap(lam) < gap_threshold(L):
        raise Degenerate("asymptotic momenta are not distinct")
    ts = np.linspace(t_max / 2, t_max, samples)
    p_plus, x_plus, r_plus = _fit_branches(s, ts)
    p_minus, x_minus, r_minus = _fit_branches(s, -ts[::-1])
    return ScatteringData(p_plus, p_minus, x_plus, x_minus, max(r_plus, r_minus), lam)


def mu_tilde_fit(s: PhaseState, times) -> dict:
    """Straight-line fit of each mu~_k(t) along the exact flow.

    Returns complex slopes and intercepts and the worst fit residual.  Branches
    are labelled by the sorted eigenvalues, which the flow leaves fixed.
    """
    times = np.asarray(times, dtype=float)
    Y = np.array([spectral_coords(build_lax(exact_flow(s, t))).mu_tilde for t in times])
    basis = np.column_stack([times, np.ones_like(times)])
    coef, *_ = np.linalg.lstsq(basis, Y, rcond=None)
    resid = float(np.max(np.abs(basis @ coef - Y)))
    return {"slope": coef[0], "intercept": coef[1], "residual": resid,
            "lambdas": spectral_coords(build_lax(s)).lambdas}


def asymptotic_momenta_check(s: PhaseState, t_max: float = 1e3, tol: float = 1e-2,
                             settle: float = 1e-3) -> BracketReport:
    """Which of ``mu~_k - lambda_k t`` and ``mu~_k + lambda_k t`` settles, and to which intercept.

    For each branch and each time direction the real part of the settling
    combination is compared with ``+x`` and ``-x`` of the position branch
    carrying momentum ``lambda_k``; the better match is recorded as the sign
    pattern.  The rate is read off ``|Re mu~_k(t) - x_branch(t)|`` at ``t`` and
    ``2t``: an order close to 1 means ``O(1/t)``.
    """
    _require_repulsive(s)
    scat = scattering(s, t_max)
    lam = scat.lambdas
    n = s.n
    report = BracketReport("asymptotics", tol)
    patterns = {}
    orders = []
    for direction, p_asym, x_asym in ((+1, scat.p_plus, scat.x_plus), (-1, scat.p_minus, scat.x_minus)):
        t_far, t_mid = direction * t_max, direction * t_max / 2
        c_far = spectral_coords(build_lax(exact_flow(s, t_far)))
        c_mid = spectral_coords(build_lax(exact_flow(s, t_mid)))
        x_far = np.sort(exact_flow(s, t_far).x)
        x_mid = np.sort(exact_flow(s, t_mid).x)
        side = "+" if direction > 0 else "-"
        for k in range(n):
            branch = int(np.argmin(np.abs(p_asym - lam[k])))
            chosen = None
            for label, sgn in (("mu~ - lambda t", -1), ("mu~ + lambda t", +1)):
                far = (c_far.mu_tilde[k] + sgn * lam[k] * t_far).real
                mid = (c_mid.mu_tilde[k] + sgn * lam[k] * t_mid).real
                if abs(far - mid) < settle:
                    chosen = (label, far)
                    break
            if chosen is None:
                raise NoConvergence(f"no combination settles for branch {k} as t -> {side}inf")
            label, limit = chosen
            x0 = x_asym[branch]
            sign = "+x" if abs(limit - x0) <= abs(limit + x0) else "-x"
            target = x0 if sign == "+x" else -x0
            report.add(k, f"x{side}_{branch + 1}", limit, target, relation=f"{label} -> {sign}{side}")
            patterns[f"{k}{side}"] = f"{label} -> {sign}"
            e_far = abs(c_far.mu_tilde[k].real - x_far[branch])
            e_mid = abs(c_mid.mu_tilde[k].real - x_mid[branch])
            if e_far > 1e-12 and e_mid > 1e-12:
                orders.append(float(np.log2(e_mid / e_far)))
    report.notes["sign_pattern"] = patterns
    report.notes["rate_orders"] = orders
    report.notes["rate_order_min"] = min(orders) if orders else None
    report.notes["imag_parts"] = [float(v) for v in spectral_coords(build_lax(s)).mu_tilde.imag]
    if orders and min(orders) < 0.8:
        report.fail(f"convergence slower than O(1/t): order {min(orders):.2f}")
    return report
