"""Finite-sample error constants and stability certificates.

Everything here evaluates closed-form constants.  The chain starts from
a quadratic stability certificate: a positive definite P with

    A_q^T P A_q < (gamma^2 / nQ^2) P     for every mode q,

which forces the averaged dynamics to be mean-square stable and gives
geometric decay of the Markov parameters at rate gamma / nQ.  On top of
the certificate sit the deviation constants for the Markov estimator
(K_M, K_gamma, K_theta, K_0, K_{-1}) and the realization sensitivity
constant K_2, combining into the high-probability bound

    P[ EstErr < K_2 * K(delta, N) ] > 1 - delta

valid once N > 2(2n + 1) and K(delta, N) <= sigma_n(H_ab) / (2 |W| sqrt(n)).
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .core import LssModel, SignalSpec, SwitchingDistribution, p_word
from .hokalman import Selection, required_words

GAMMA_FLOOR = 1e-12
GAMMA_INFLATION = 1e-9


class CertificateError(RuntimeError):
    """No stability certificate could be produced or validated.

    Search failure is not a proof of instability; the message carries
    the mean-square spectral radius as a diagnostic.
    """


@dataclass
class StabilityCertificate:
    """A validated quadratic stability certificate.

    ``margin`` is the smallest eigenvalue of (gamma^2/nQ^2) P - A_q^T P A_q
    over all modes; a positive margin makes every claim downstream of the
    certificate sound.  ``schur_radius`` records the spectral radius of
    sum_q p_q A_q (x) A_q as the mean-square stability diagnostic.
    """

    P: np.ndarray
    gamma: float
    margin: float
    schur_radius: float

    def __post_init__(self):
        self.P = np.asarray(self.P, dtype=float)
        if not 0.0 < self.gamma < 1.0:
            raise ValueError("certificate gamma must lie in (0, 1)")


def gamma_from_P(model: LssModel, P: np.ndarray) -> tuple[float, float]:
    """Smallest contraction rate a given P certifies, with its margin.

    With P = L L^T the tight rate is
    gamma = nQ * max_q sqrt(lambda_max(L^{-1} A_q^T P A_q L^{-T})).
    Since the inequality is strict only above the tight rate, the
    returned gamma is inflated by a relative 1e-9 (and floored at 1e-12
    for nilpotent degenerate cases) and the margin is evaluated there,
    so margin > 0 always accompanies a usable certificate.

    Raises
    ------
    ValueError
        If P is not symmetric positive definite.
    CertificateError
        If the tight rate is >= 1, i.e. P certifies nothing.
    """
    P = np.asarray(P, dtype=float)
    if P.shape != (model.n, model.n):
        raise ValueError(f"P must be {model.n}x{model.n}")
    if np.linalg.norm(P - P.T) > 1e-10 * max(1.0, np.linalg.norm(P)):
        raise ValueError("P must be symmetric")
    try:
        np.linalg.cholesky(P)
    except np.linalg.LinAlgError:
        raise ValueError("P must be positive definite") from None

    lam = 0.0
    for Aq in model.A:
        S = Aq.T @ P @ Aq
        lam = max(lam, float(scipy.linalg.eigh(S, P, eigvals_only=True)[-1]))
    gamma = model.nQ * math.sqrt(max(lam, 0.0))
    if gamma >= 1.0:
        raise CertificateError(
            f"P certifies gamma = {gamma:.6f} >= 1, not a stability certificate"
        )
    gamma = max(gamma * (1.0 + GAMMA_INFLATION), GAMMA_FLOOR)
    if gamma >= 1.0:
        raise CertificateError("certified gamma is not below 1 after inflation")

    rho = gamma**2 / model.nQ**2
    margin = math.inf
    for Aq in model.A:
        gap = rho * P - Aq.T @ P @ Aq
        margin = min(margin, float(np.linalg.eigvalsh(gap)[0]))
    return gamma, margin


def schur_radius(model: LssModel, dist: SwitchingDistribution) -> float:
    """Spectral radius of sum_q p_q A_q (x) A_q.

    Below one, second moments of the switched state contract on average;
    quadratic stability implies this, so it doubles as a cheap necessary
    check and a diagnostic when certificate search fails.
    """
    if dist.nQ != model.nQ:
        raise ValueError("distribution does not match model mode count")
    M = sum(
        dist.p[c] * np.kron(model.A[c], model.A[c]) for c in range(model.nQ)
    )
    return float(np.abs(np.linalg.eigvals(M)).max())


def _fixed_point_P(model: LssModel, gamma_target: float, max_iter: int = 10_000,
                   rtol: float = 1e-10) -> np.ndarray | None:
    """Averaged-Lyapunov fixed point P = I + (nQ/gamma)^2 mean_q A_q^T P A_q.

    Cheap and dependency-free; exact for a single mode, but for several
    modes it certifies only the mode average, so callers must validate
    the result with :func:`gamma_from_P` before trusting it.
    """
    n, nQ = model.n, model.nQ
    scale = nQ**2 / gamma_target**2
    P = np.eye(n)
    for _ in range(max_iter):
        Pn = np.eye(n) + scale * sum(Aq.T @ P @ Aq for Aq in model.A) / nQ
        if not np.all(np.isfinite(Pn)) or np.linalg.norm(Pn) > 1e100:
            return None
        if np.linalg.norm(Pn - P) <= rtol * np.linalg.norm(Pn):
            return Pn
        P = Pn
    return None


def _lmi_P(model: LssModel, gamma_target: float) -> np.ndarray | None:
    """Margin-maximizing semidefinite feasibility search for P.

    Solves max t subject to I <= P <= 1e9 I and
    (gamma_s/nQ)^2 P - A_q^T P A_q >= t I at a slightly shrunk rate
    gamma_s, walking the shrink down if the interior problem is
    infeasible.  Maximizing the slack keeps the numerical solution well
    inside the feasible set, which is what lets the exact validation in
    :func:`gamma_from_P` succeed despite solver tolerances.
    """
    try:
        import cvxpy as cp
    except ImportError:
        return None

    n = model.n
    solver = "CLARABEL" if "CLARABEL" in cp.installed_solvers() else None
    for shrink in (1e-2, 1e-3, 1e-4):
        rho = (gamma_target * (1.0 - shrink) / model.nQ) ** 2
        P = cp.Variable((n, n), symmetric=True)
        t = cp.Variable()
        constraints = [P >> np.eye(n), P << 1e9 * np.eye(n), t >= 0]
        for Aq in model.A:
            constraints.append(rho * P - Aq.T @ P @ Aq >> t * np.eye(n))
        problem = cp.Problem(cp.Maximize(t), constraints)
        try:
            # Accuracy warnings are moot here: every candidate is
            # re-validated exactly before acceptance.
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                problem.solve(solver=solver)
        except cp.error.SolverError:
            continue
        if problem.status not in ("optimal", "optimal_inaccurate") or P.value is None:
            continue
        Pv = 0.5 * (np.asarray(P.value) + np.asarray(P.value).T)
        if np.linalg.eigvalsh(Pv)[0] <= 0.0:
            continue
        return Pv
    return None


def find_P(
    model: LssModel,
    dist: SwitchingDistribution,
    gamma_target: float,
) -> StabilityCertificate:
    """Search for a quadratic stability certificate at a target rate.

    Strategy: run the averaged fixed point first, then a semidefinite
    feasibility search; whatever candidate emerges is only accepted if
    :func:`gamma_from_P` independently certifies a rate at or below the
    target, so an accepted certificate is sound regardless of which
    search produced it.

    Raises
    ------
    CertificateError
        When no candidate validates.  This is inconclusive, not a proof
        of instability; the message reports the mean-square spectral
        radius, which at >= 1 rules out any certificate.
    """
    if not 0.0 < gamma_target < 1.0:
        raise ValueError("gamma_target must lie in (0, 1)")

    def validated(P: np.ndarray | None) -> StabilityCertificate | None:
        if P is None:
            return None
        try:
            gamma, margin = gamma_from_P(model, P)
        except (ValueError, CertificateError):
            return None
        if gamma > gamma_target or margin <= 0.0:
            return None
        return StabilityCertificate(
            P=P, gamma=gamma, margin=margin, schur_radius=schur_radius(model, dist)
        )

    cert = validated(_fixed_point_P(model, gamma_target))
    if cert is None:
        cert = validated(_lmi_P(model, gamma_target))
    if cert is not None:
        return cert

    rad = schur_radius(model, dist)
    raise CertificateError(
        f"no quadratic stability certificate found for gamma = {gamma_target} "
        f"(inconclusive; mean-square spectral radius = {rad:.6f}"
        + (", which already rules one out)" if rad >= 1.0 else ")")
    )


def min_gamma_certificate(
    model: LssModel,
    dist: SwitchingDistribution,
    lo: float = 1e-4,
    hi: float = 0.9999,
    tol: float = 1e-3,
) -> StabilityCertificate:
    """Bisect for (approximately) the smallest certifiable rate."""
    try:
        cert = find_P(model, dist, hi)
    except CertificateError:
        raise CertificateError(
            f"model not certifiable even at gamma = {hi} "
            f"(schur_radius = {schur_radius(model, dist):.6f})"
        ) from None
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        try:
            cert = find_P(model, dist, mid)
            hi = cert.gamma
        except CertificateError:
            lo = mid
    return cert


def compute_KM(model: LssModel, cert: StabilityCertificate) -> float:
    """Markov parameter magnitude constant.

    K_M = max(||C|| * max_q ||[B_q I 0]|| * (nQ/gamma) * sqrt(cond(P)),
              ||[D, 1]||)
    where the augmented input matrix [B_q | I_n | 0] feeds input, state
    noise and (vacuously) output noise channels, and cond(P) is the
    eigenvalue ratio of the certificate matrix.  Together with the
    certificate it guarantees ||M'_w|| < K_M (gamma/nQ)^{|w|} for the
    augmented Markov parameters of every word.
    """
    n = model.n
    evals = np.linalg.eigvalsh(cert.P)
    cond = evals[-1] / evals[0]
    b_norm = max(
        float(np.linalg.norm(np.hstack([Bq, np.eye(n), np.zeros((n, 1))]), 2))
        for Bq in model.B
    )
    first = (
        float(np.linalg.norm(model.C))
        * b_norm
        * (model.nQ / cert.gamma)
        * math.sqrt(cond)
    )
    second = math.sqrt(float(model.D @ model.D) + 1.0)
    return max(first, second)


@dataclass
class BoundCertificate:
    """Every constant of the finite-sample bound, plus validity flags."""

    m_prime: int
    n_star: int
    K_u: float
    K_u_prime: float
    K_M: float
    K_y: float
    K_gamma: float
    K_theta: float
    K_0: float
    K_minus1: float
    W_size: int
    min_pw: float
    min_pw_floor: float
    sigma_n_H: float
    delta: float
    N: int
    K_tilde: float
    K_deltaN: float
    K_2: float
    bound_EstErr: float
    N_min_basic: int
    N_min_hankel: int
    valid_basic: bool
    valid_hankel: bool
    stability: StabilityCertificate

    @property
    def valid(self) -> bool:
        return self.valid_basic and self.valid_hankel

    def to_dict(self) -> dict:
        d = {
            k: getattr(self, k)
            for k in (
                "m_prime n_star K_u K_u_prime K_M K_y K_gamma K_theta K_0 "
                "K_minus1 W_size min_pw min_pw_floor sigma_n_H delta N "
                "K_tilde K_deltaN K_2 bound_EstErr N_min_basic N_min_hankel "
                "valid_basic valid_hankel"
            ).split()
        }
        d["stability"] = {
            "P": self.stability.P.tolist(),
            "gamma": self.stability.gamma,
            "margin": self.stability.margin,
            "schur_radius": self.stability.schur_radius,
        }
        return d


def _static_constants(
    model: LssModel,
    dist: SwitchingDistribution,
    signal: SignalSpec,
    sel: Selection,
    sigma_n_H: float,
    cert: StabilityCertificate,
) -> dict:
    """The N- and delta-independent part of the constant chain."""
    n, m, nQ = model.n, model.m, model.nQ
    gamma = cert.gamma
    m_prime = m + n + 1
    K_u = signal.K_u
    K_u_prime = max(K_u, K_u**2)
    K_M = float(compute_KM(model, cert))
    K_y = math.sqrt(m_prime) * K_M * K_u / (1.0 - gamma)
    K_gamma = (
        gamma + (2 * n + 1) * (n + 2) * (1.0 - gamma) ** 2 + (1.0 - gamma) ** 3
    ) / (1.0 - gamma) ** 3
    K_theta = 2.0 * (m_prime * K_u + nQ) * math.sqrt(m_prime) * K_u_prime * K_M * K_gamma
    K_0 = math.sqrt(m_prime) * K_u_prime * K_M / (1.0 - gamma) + K_theta

    W = sorted(required_words(sel, nQ) - {()}, key=lambda w: (len(w), w))
    min_pw = float(min(p_word(dist, w) for w in W))
    min_pw_floor = float(np.min(dist.p)) ** (2 * n + 1)
    sigma_inv = np.linalg.inv(signal.sigma_u(m))
    K_minus1 = float(np.linalg.norm(sigma_inv)) / min_pw

    n_star = max(n, m)
    K_2 = math.sqrt(len(W)) * max(
        1.0,
        (2.0 * sigma_n_H + n_star * K_minus1 * K_y * K_u * 4.0 * math.sqrt(2.0))
        / sigma_n_H**2,
    )
    return {
        "m_prime": m_prime,
        "n_star": n_star,
        "K_u": K_u,
        "K_u_prime": K_u_prime,
        "K_M": K_M,
        "K_y": K_y,
        "K_gamma": K_gamma,
        "K_theta": K_theta,
        "K_0": K_0,
        "K_minus1": K_minus1,
        "W_size": len(W),
        "min_pw": min_pw,
        "min_pw_floor": min_pw_floor,
        "K_2": K_2,
        "sigma_n_H": float(sigma_n_H),
    }


def _hankel_threshold(n: int, W_size: int, sigma_n_H: float) -> float:
    return sigma_n_H / (2.0 * W_size * math.sqrt(n))


def compute_certificate(
    model: LssModel,
    dist: SwitchingDistribution,
    signal: SignalSpec,
    sel: Selection,
    sigma_n_H: float,
    delta: float,
    N: int,
    stability: StabilityCertificate | None = None,
    gamma_target: float | None = None,
) -> BoundCertificate:
    """Assemble the full bound certificate for one (delta, N).

    A stability certificate can be passed in (the usual case when
    sweeping N); otherwise one is searched for, at ``gamma_target`` if
    given and at the smallest certifiable rate if not.
    """
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    if N < 1:
        raise ValueError("N must be positive")
    if sigma_n_H <= 0.0:
        raise ValueError("sigma_n_H must be positive")
    if stability is None:
        if gamma_target is not None:
            stability = find_P(model, dist, gamma_target)
        else:
            stability = min_gamma_certificate(model, dist)

    c = _static_constants(model, dist, signal, sel, sigma_n_H, stability)
    n, m = model.n, model.m
    log_term = math.log(2.0 * m * c["W_size"] / delta)
    K_tilde = c["K_0"] * math.sqrt(8.0 * log_term / N)
    K_deltaN = math.sqrt(m) * c["K_minus1"] * K_tilde

    thr = _hankel_threshold(n, c["W_size"], sigma_n_H)
    N_min_basic = 2 * (2 * n + 1) + 1
    c_over = math.sqrt(m) * c["K_minus1"] * c["K_0"] * math.sqrt(8.0 * log_term)
    N_min_hankel = _ceil_threshold(c_over, thr)

    return BoundCertificate(
        delta=delta,
        N=N,
        K_tilde=K_tilde,
        K_deltaN=K_deltaN,
        bound_EstErr=c["K_2"] * K_deltaN,
        N_min_basic=N_min_basic,
        N_min_hankel=N_min_hankel,
        valid_basic=N > 2 * (2 * n + 1),
        valid_hankel=K_deltaN <= thr,
        stability=stability,
        **c,
    )


def _ceil_threshold(c_over: float, thr: float) -> int:
    """Smallest integer N with c_over / sqrt(N) <= thr."""
    z = (c_over / thr) ** 2
    N = max(1, math.ceil(z))
    # Float ceil can land one off near the boundary; nudge exactly when
    # the magnitudes still allow integer arithmetic to mean anything.
    if z < 2**52:
        while c_over / math.sqrt(N) > thr:
            N += 1
        while N > 1 and c_over / math.sqrt(N - 1) <= thr:
            N -= 1
    return N


def min_valid_N(
    model: LssModel,
    dist: SwitchingDistribution,
    signal: SignalSpec,
    sel: Selection,
    sigma_n_H: float,
    delta: float,
    stability: StabilityCertificate | None = None,
    gamma_target: float | None = None,
) -> int:
    """Smallest N at which the bound's validity conditions both hold."""
    if stability is None:
        if gamma_target is not None:
            stability = find_P(model, dist, gamma_target)
        else:
            stability = min_gamma_certificate(model, dist)
    c = _static_constants(model, dist, signal, sel, sigma_n_H, stability)
    log_term = math.log(2.0 * model.m * c["W_size"] / delta)
    c_over = math.sqrt(model.m) * c["K_minus1"] * c["K_0"] * math.sqrt(8.0 * log_term)
    thr = _hankel_threshold(model.n, c["W_size"], sigma_n_H)
    return max(2 * (2 * model.n + 1) + 1, _ceil_threshold(c_over, thr))


def save_bound_certificate(path: str, bc: BoundCertificate) -> None:
    with open(path, "w") as fh:
        json.dump(bc.to_dict(), fh, indent=2)
        fh.write("\n")


def save_stability_certificate(path: str, cert: StabilityCertificate) -> None:
    doc = {
        "P": cert.P.tolist(),
        "gamma": cert.gamma,
        "margin": cert.margin,
        "schur_radius": cert.schur_radius,
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def load_P_matrix(path: str) -> np.ndarray:
    """Read a user-supplied P, accepting either a bare matrix or a
    previously saved certificate file."""
    with open(path) as fh:
        doc = json.load(fh)
    if isinstance(doc, dict):
        doc = doc["P"]
    return np.asarray(doc, dtype=float)
