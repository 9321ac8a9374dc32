"""Scalar subproblem solvers for the probability updates.

Two entrywise problems arise inside the ADMM iteration, both over the
margin-clamped interval [eps, 1-eps]:

  likelihood prox (graphon modes)
      min_t  -(s log t + (1-s) log(1-t)) + (c/2) (t - d)^2
    solved by proximal gradient descent with Armijo backtracking. For
    s in [0, 1] the objective is convex, so the stationary point reached is
    the global minimizer. (The fixed step 1/(c + 1/eps^2) suggested by the
    worst-case curvature bound is uselessly small away from the boundary;
    backtracking recovers fast steps while remaining safe inside the O(eps)
    boundary layer.)

  shared-probability entropy prox
      min_t  -K (t log t + (1-t) log(1-t)) + (c/2) (t - d)^2
    a difference of convex functions: the quadratic minus the convex negative
    entropy. DCA linearizes the concave part at the current iterate and solves
    the remaining quadratic in closed form:

        t+ = clip(d + (K/c) log(t / (1-t)), eps, 1-eps).

    The objective is a double well for small c, so DCA runs from three starts
    (clip(d), eps, 1-eps) and keeps the best final objective. Exact ties break
    toward the candidate nearer d, then toward the smaller value, which sends
    d = 0.5 to the eps side.

Both solvers are vectorized over entries.
"""

from __future__ import annotations

import numpy as np


def gamma_logit(t: np.ndarray) -> np.ndarray:
    """gamma(t)_i = log(t_i) - log(1 - t_i), the logit of t."""
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0.0) or np.any(t >= 1.0):
        raise ValueError("logit requires t strictly inside (0, 1)")
    return np.log(t) - np.log1p(-t)


def bernoulli_nll(s: np.ndarray, t: np.ndarray) -> float:
    """Gamma(s, t) = -sum_i [s_i log t_i + (1 - s_i) log(1 - t_i)]."""
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    if s.shape != t.shape:
        raise ValueError(f"shape mismatch: s {s.shape} vs t {t.shape}")
    if np.any(t <= 0.0) or np.any(t >= 1.0):
        raise ValueError("likelihood requires t strictly inside (0, 1)")
    return float(-np.sum(s * np.log(t) + (1.0 - s) * np.log1p(-t)))


def bernoulli_nll_grad_t(s: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Entrywise d Gamma / d t = -s/t + (1-s)/(1-t)."""
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    return -s / t + (1.0 - s) / (1.0 - t)


def bernoulli_nll_grad_s(t: np.ndarray) -> np.ndarray:
    """Entrywise d Gamma / d s = -logit(t) (independent of s)."""
    return -gamma_logit(t)


# ---------------------------------------------------------------------------
# Proximal gradient for the likelihood prox
# ---------------------------------------------------------------------------

def _prox_objective(s, t, c, d):
    return -(s * np.log(t) + (1.0 - s) * np.log1p(-t)) + 0.5 * c * (t - d) ** 2


def likelihood_prox(s, c: float, d, eps: float, start=None,
                    max_steps: int = 200, tol: float = 1e-8) -> np.ndarray:
    """Entrywise minimizer of -(s log t + (1-s) log(1-t)) + (c/2)(t-d)^2.

    All of s, d (and the optional warm start) broadcast to a common shape;
    the minimization runs independently per entry over [eps, 1-eps].
    """
    if c <= 0:
        raise ValueError(f"quadratic weight c must be positive, got {c}")
    if not (0.0 < eps < 0.5):
        raise ValueError(f"margin eps must lie in (0, 0.5), got {eps}")
    s = np.asarray(s, dtype=float)
    d = np.asarray(d, dtype=float)
    shape = np.broadcast(s, d).shape
    s = np.broadcast_to(s, shape).copy()
    d = np.broadcast_to(d, shape).copy()
    lo, hi = eps, 1.0 - eps

    if start is None:
        t = np.clip(d, lo, hi)
    else:
        t = np.clip(np.broadcast_to(np.asarray(start, dtype=float), shape), lo, hi).copy()

    tau_max = 1.0 / (c + 4.0)          # curvature away from the boundary
    tau_min = 1.0 / (c + 1.0 / eps ** 2)  # worst-case bound; Armijo always holds here
    tau = np.full(shape, tau_max)

    for _ in range(max_steps):
        g = -s / t + (1.0 - s) / (1.0 - t) + c * (t - d)
        f0 = _prox_objective(s, t, c, d)
        cand = np.clip(t - tau * g, lo, hi)
        # sufficient-decrease test of proximal gradient; halve steps that fail
        for _bt in range(60):
            diff = cand - t
            slack = 1e-12 * (1.0 + np.abs(f0))
            ok = _prox_objective(s, cand, c, d) <= f0 + g * diff + diff ** 2 / (2.0 * tau) + slack
            ok |= tau <= tau_min
            if ok.all():
                break
            tau = np.where(ok, tau, np.maximum(tau * 0.5, tau_min))
            cand = np.where(ok, cand, np.clip(t - tau * g, lo, hi))
        move = np.abs(cand - t)
        t = cand
        tau = np.minimum(tau * 2.0, tau_max)
        if move.max() < tol:
            break
    return t


def scalar_likelihood_prox(s_i: float, c: float, d: float, eps: float,
                           max_steps: int = 200, tol: float = 1e-8) -> float:
    """Scalar entry of the likelihood prox for s_i in [0, 1].

    The relaxed Bernoulli objective is convex exactly on that domain, so the
    proximal gradient iteration lands on the global minimizer.
    """
    if not (0.0 <= s_i <= 1.0):
        raise ValueError(f"s_i must lie in [0, 1], got {s_i}")
    out = likelihood_prox(np.array([s_i]), c, np.array([d]), eps,
                          max_steps=max_steps, tol=tol)
    return float(out[0])


# ---------------------------------------------------------------------------
# DCA for the shared-probability entropy prox
# ---------------------------------------------------------------------------

def _entropy_objective(t, K, c, d):
    return -K * (t * np.log(t) + (1.0 - t) * np.log1p(-t)) + 0.5 * c * (t - d) ** 2


def shared_probability_prox(K: int, c: float, d, eps: float,
                            max_steps: int = 200, tol: float = 1e-10) -> np.ndarray:
    """Entrywise minimizer of -K(t log t + (1-t)log(1-t)) + (c/2)(t-d)^2.

    Runs the DCA fixed-point iteration from three starts per entry and keeps
    the best objective; see the module docstring for the tie-break rule.
    """
    if K < 1:
        raise ValueError(f"need K >= 1 graphs, got {K}")
    if c <= 0:
        raise ValueError(f"quadratic weight c must be positive, got {c}")
    if not (0.0 < eps < 0.5):
        raise ValueError(f"margin eps must lie in (0, 0.5), got {eps}")
    d = np.atleast_1d(np.asarray(d, dtype=float))
    lo, hi = eps, 1.0 - eps

    starts = np.stack([np.clip(d, lo, hi),
                       np.full_like(d, lo),
                       np.full_like(d, hi)])
    t = starts.copy()
    for _ in range(max_steps):
        t_new = np.clip(d + (K / c) * (np.log(t) - np.log1p(-t)), lo, hi)
        if np.abs(t_new - t).max() < tol:
            t = t_new
            break
        t = t_new

    obj = _entropy_objective(t, K, c, d)
    best = obj.min(axis=0)
    # candidates within a hair of the best objective; break ties toward the
    # value nearer d, then toward the smaller value (so d = 0.5 goes to eps).
    # Distances are compared with a tolerance so that rounding in |t - d|
    # cannot overrule the second rule on an exact tie.
    tied = obj <= best + 1e-9 * (1.0 + np.abs(best))
    dist = np.where(tied, np.abs(t - d), np.inf)
    near = dist <= dist.min(axis=0) + 1e-9
    return np.where(near, t, np.inf).min(axis=0)
