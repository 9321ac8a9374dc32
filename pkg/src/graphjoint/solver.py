"""Nonconvex ADMM for joint graph inference under a shared generative model.

Estimates K unweighted graphs from per-graph sample covariances of stationary
signals by minimizing, over stacked edge vectors s, Bernoulli probabilities t,
and a discretized generator w,

    (alpha/2) ||M s||^2                      stationarity of each covariance
  + Gamma(s, t)                              Bernoulli log-likelihood coupling
  + theta1 1's + (theta2/2) s'Q s            optional sparsity / similarity
  + (lambda1/2) ||t - Psi s||^2              t matches blockwise densities
  + (lambda2/2) ||t - Sigma w||^2            t matches the sampled generator
  + (beta/2) ||Phi w||^2                     generator smoothness

with s split against a binary copy p and w against a box copy v through
scaled-dual augmented terms. Three modes:

  shared-prob      one probability matrix shared by all graphs; no w. The
                   t subproblem is the entropy prox solved by DCA and the
                   likelihood coupling runs through the edgewise mean R.
  shared-graphon   per-graph probabilities tied to a shared generator w
                   through fixed grid assignments.
  robust           as shared-graphon, but the assignments are re-estimated
                   each iteration by a greedy sweep around their given
                   (noisy) anchors.

The augmented Lagrangian is evaluated exactly as written above (plus the dual
terms); with the coupling and dual weights set large enough, e.g. via
``descent_hyperparams``, its trajectory is nonincreasing, which is the
standard stationarity diagnostic for this family of splitting schemes.

The binary projection min-max normalizes each graph's segment before rounding:
normalization removes the arbitrary scale of the relaxed iterate, and because
it maps the largest entry to 1 it keeps the trivial empty graph out of reach
of the rounding step.  The box projection for w is the plain entrywise clamp.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, fields

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .graphons import DEFAULT_EPS, build_block_averager, default_block_size
from .operators import OperatorBundle, assemble_bundle, graphon_unvec, tri_unvec
from .prox import bernoulli_nll, gamma_logit, likelihood_prox, shared_probability_prox

logger = logging.getLogger(__name__)

MODE_BASE = "base"
MODE_SHARED_PROB = "shared-prob"
MODE_SHARED_GRAPHON = "shared-graphon"
MODE_ROBUST = "robust"
MODES = (MODE_SHARED_PROB, MODE_SHARED_GRAPHON, MODE_ROBUST)

_MODE_ALIASES = {
    "shared-prob": MODE_SHARED_PROB,
    "sharedprobabilitymatrix": MODE_SHARED_PROB,
    "shared-probability": MODE_SHARED_PROB,
    "shared-graphon": MODE_SHARED_GRAPHON,
    "sharedgraphon": MODE_SHARED_GRAPHON,
    "robust": MODE_ROBUST,
    "robustsharedgraphon": MODE_ROBUST,
    "robust-shared-graphon": MODE_ROBUST,
}

STATUS_CONVERGED = "converged"
STATUS_MAX_ITERATIONS = "max_iterations"


def canonical_mode(mode: str) -> str:
    key = mode.strip().lower().replace("_", "-")
    try:
        return _MODE_ALIASES[key]
    except KeyError:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}") from None


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HyperParams:
    """Objective weights and the probability box margin.

    alpha, beta and the optional sparsity/pairwise weights may be zero; the
    coupling weights lambda1/lambda2 and dual weights rho1/rho2 must be
    positive. eta is the robust-mode search radius in grid cells around each
    anchor assignment.

    The defaults are calibrated so that on desk-scale synthetic problems the
    stationarity term holds its own against the likelihood coupling: alpha on
    the order of rho1 keeps the adjacency update data-responsive instead of
    freezing at the initialization, and lambda1 well above 4K keeps the shared
    probability update a contraction (graded probabilities rather than a
    collapse to the box corners). eps = 0.05 bounds the log-odds feedback at
    about +/-3 per edge.
    """

    alpha: float = 10.0
    beta: float = 1.0
    lambda1: float = 20.0
    lambda2: float = 1.0
    rho1: float = 10.0
    rho2: float = 10.0
    sparsity: float = 0.0
    pairwise: float = 0.0
    eps: float = 0.05
    eta: int = 1

    def __post_init__(self):
        for name in ("alpha", "beta", "sparsity", "pairwise"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative, got {getattr(self, name)}")
        for name in ("lambda1", "lambda2", "rho1", "rho2"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if not (0.0 < self.eps < 0.5):
            raise ValueError(f"eps must lie in (0, 0.5), got {self.eps}")
        if self.eta < 0:
            raise ValueError(f"eta must be nonnegative, got {self.eta}")


@dataclass(frozen=True)
class SolverConfig:
    """Iteration budgets, tolerances, and deterministic-run controls."""

    max_iterations: int = 300
    eps_abs: float = 1e-5
    eps_rel: float = 1e-4
    pg_max_steps: int = 200
    pg_tol: float = 1e-8
    dca_max_steps: int = 200
    dca_tol: float = 1e-10
    init_max_steps: int = 500
    init_tol: float = 1e-7
    seed: int = 0
    as_printed: bool = False
    record_diagnostics: bool = True

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if self.eps_abs <= 0 or self.eps_rel <= 0:
            raise ValueError("tolerances must be positive")


@dataclass
class AdmmState:
    """All primal/dual iterates. w, v, u2 and z are None in shared-prob mode;
    z is None unless the mode re-estimates assignments; t is None only in the
    uncoupled base estimator."""

    s: np.ndarray
    p: np.ndarray
    t: np.ndarray | None
    u1: np.ndarray
    w: np.ndarray | None = None
    v: np.ndarray | None = None
    u2: np.ndarray | None = None
    z: list[np.ndarray] | None = None
    iteration: int = 0


@dataclass
class IterationDiagnostics:
    iteration: int
    lagrangian: float
    primal_residual: float
    dual_residual: float
    eps_primal: float
    eps_dual: float
    stationarity: float
    likelihood: float
    coupling_hist: float
    coupling_graphon: float
    smoothness: float
    t_min: float
    t_max: float
    z_moves: int

    @classmethod
    def fieldnames(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def as_row(self) -> list:
        return [getattr(self, name) for name in self.fieldnames()]


@dataclass
class ConvergenceCheck:
    converged: bool
    primal_residual: float
    dual_residual: float
    eps_primal: float
    eps_dual: float


@dataclass
class SolveResult:
    mode: str
    status: str
    iterations: int
    state: AdmmState
    graphs: list[np.ndarray]
    probabilities: list[np.ndarray] | None
    graphon: np.ndarray | None
    z: list[np.ndarray] | None
    diagnostics: list[IterationDiagnostics] = field(repr=False, default_factory=list)

    @property
    def converged(self) -> bool:
        return self.status == STATUS_CONVERGED


# ---------------------------------------------------------------------------
# Projections
# ---------------------------------------------------------------------------

_DEGENERATE_RANGE = 1e-12


def _minmax(x: np.ndarray) -> np.ndarray | None:
    spread = x.max() - x.min()
    if spread <= _DEGENERATE_RANGE:
        return None
    return (x - x.min()) / spread


def update_binary_aux(x: np.ndarray, segments: list[slice] | None = None) -> np.ndarray:
    """Binary projection: min-max normalize, then round with ties going to 1.

    When the input has no spread the normalization is skipped and entries are
    rounded (and clipped) as they stand. `segments` applies the projection
    independently per graph segment.
    """
    x = np.asarray(x, dtype=float)
    if segments is not None:
        out = np.empty_like(x)
        for seg in segments:
            out[seg] = update_binary_aux(x[seg])
        return out
    scaled = _minmax(x)
    if scaled is None:
        return np.clip(np.floor(x + 0.5), 0.0, 1.0)
    return (scaled >= 0.5).astype(float)


def update_box_aux(x: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the box: clamp entrywise to [0, 1].

    Unlike the binary projection this one is not normalized first: the box
    has no rounding cliff for a small-range argument to fall off, and the
    exact projection is what keeps the Lagrangian monotone at large dual
    weights.
    """
    return np.clip(np.asarray(x, dtype=float), 0.0, 1.0)


# ---------------------------------------------------------------------------
# Linear systems
# ---------------------------------------------------------------------------

def _pairwise_quad(bundle: OperatorBundle) -> sp.csr_matrix:
    """Q = (K I - 1 1') kron I_L so that s'Qs = sum_{k<l} ||s_k - s_l||^2.

    Only defined when all graphs share one size.
    """
    if len(set(bundle.sizes)) != 1:
        raise ValueError("pairwise similarity requires equally sized graphs")
    K = bundle.K
    L = bundle.seg_lengths[0]
    core = K * sp.identity(K, format="csr") - sp.csr_matrix(np.ones((K, K)))
    return sp.kron(core, sp.identity(L, format="csr"), format="csr")


def adjacency_system(params: HyperParams, bundle: OperatorBundle,
                     shared: bool) -> sp.csc_matrix:
    """Coefficient matrix of the s update (strictly positive definite)."""
    n = bundle.total_length
    A = params.rho1 * sp.identity(n, format="csr")
    if params.alpha > 0:
        A = A + params.alpha * (bundle.M.T @ bundle.M)
    if params.pairwise > 0:
        A = A + params.pairwise * _pairwise_quad(bundle)
    if not shared and bundle.Psi.shape[0] > 0:
        A = A + params.lambda1 * (bundle.Psi.T @ bundle.Psi)
    return A.tocsc()


def graphon_system(params: HyperParams, bundle: OperatorBundle,
                   sigma: sp.spmatrix, as_printed: bool = False) -> sp.csc_matrix:
    """Coefficient matrix of the w update.

    The gradient-consistent system weights the smoothness operator by beta and
    the selector by lambda2. `as_printed` swaps those two weights on the left
    hand side (the right hand side keeps lambda2 Sigma' t, the only version
    with compatible shapes), reproducing the update exactly as the source
    equation types it.
    """
    J = bundle.J
    A = params.rho2 * sp.identity(J, format="csr")
    if as_printed:
        A = A + params.lambda2 * (bundle.Phi.T @ bundle.Phi)
        A = A + params.beta * (sigma.T @ sigma)
    else:
        if params.beta > 0:
            A = A + params.beta * (bundle.Phi.T @ bundle.Phi)
        A = A + params.lambda2 * (sigma.T @ sigma)
    return A.tocsc()


def _refined_solve(lu, A: sp.spmatrix, rhs: np.ndarray) -> np.ndarray:
    """splu solve followed by one step of iterative refinement when needed."""
    x = lu.solve(rhs)
    resid = rhs - A @ x
    scale = max(1.0, float(np.linalg.norm(rhs)))
    if np.linalg.norm(resid) > 1e-12 * scale:
        x = x + lu.solve(resid)
    return x


class EigenAdjacencyFactor:
    """Exact solver for (alpha M'M + rho1 I) s = b without pairwise coupling.

    The uncoupled system is block diagonal over graphs, and each block
    diagonalizes in its covariance's eigenbasis C = V diag(lam) V': on full
    symmetric matrices

        alpha [M'M S] + rho1 S  =  V [ (2 alpha D + rho1) o (V'SV) ] V',
        D_ab = (lam_a - lam_b)^2,

    so the inverse costs two N x N products instead of a sparse LU whose
    fill-in grows out of memory around N = 100. Adjacencies are hollow, so
    the right-hand side receives a diagonal shift, solved from a small SPD
    system assembled once, that zeroes the solution's diagonal.

    Exposes .solve(b) like scipy's factor objects. Results agree with the
    sparse route to machine precision (see the solver oracle tests).
    """

    def __init__(self, covariances: list[np.ndarray], params: HyperParams,
                 bundle: OperatorBundle):
        if params.pairwise > 0:
            raise ValueError("eigenbasis factorization requires pairwise = 0")
        if len(covariances) != bundle.K:
            raise ValueError("need one covariance per bundle segment")
        self._bundle = bundle
        self._blocks = []
        for C in covariances:
            C = np.asarray(C, dtype=float)
            lam, V = np.linalg.eigh(0.5 * (C + C.T))
            W = 2.0 * params.alpha * (lam[:, None] - lam[None, :]) ** 2 + params.rho1
            n = lam.size
            # T[i, j] = diag_i of the inverse applied to e_j e_j': the SPD map
            # from a diagonal shift to the solution's diagonal.
            T = np.empty((n, n))
            for j in range(n):
                inner = np.outer(V[j], V[j]) / W
                T[:, j] = np.einsum("ia,ab,ib->i", V, inner, V)
            self._blocks.append((V, W, sla.cho_factor(T)))

    def solve(self, b: np.ndarray) -> np.ndarray:
        out = np.empty_like(b, dtype=float)
        off = self._bundle.offsets
        for k, (V, W, T_fac) in enumerate(self._blocks):
            tm = self._bundle.tri_maps[k]
            B = np.zeros((tm.n, tm.n))
            seg = b[off[k]:off[k + 1]]
            B[tm.i, tm.j] = seg
            B[tm.j, tm.i] = seg
            Y = V.T @ B @ V
            X0 = V @ (Y / W) @ V.T
            mu = sla.cho_solve(T_fac, -np.diagonal(X0))
            X = V @ ((Y + V.T @ (mu[:, None] * V)) / W) @ V.T
            out[off[k]:off[k + 1]] = X[tm.i, tm.j]
        return out


def _spectral_norm_sq(A: sp.spmatrix, iters: int = 200, tol: float = 1e-12) -> float:
    """Largest squared singular value by power iteration on A'A.

    Deterministic (all-ones start); adequate for conditioning estimates.
    """
    n = A.shape[1]
    if n == 0 or A.nnz == 0:
        return 0.0
    x = np.ones(n) / np.sqrt(n)
    prev = 0.0
    for _ in range(iters):
        y = A.T @ (A @ x)
        norm = np.linalg.norm(y)
        if norm == 0.0:
            return 0.0
        x = y / norm
        if abs(norm - prev) <= tol * max(norm, 1.0):
            prev = norm
            break
        prev = norm
    return float(prev)


def descent_hyperparams(bundle: OperatorBundle) -> float:
    """Coupling/dual weight large enough for the monotone-descent diagnostic:
    1e3 times the largest squared spectral norm among the data operators
    (floored at 1)."""
    vals = [1.0, _spectral_norm_sq(bundle.M)]
    if bundle.Psi.shape[0] > 0:
        vals.append(_spectral_norm_sq(bundle.Psi))
    if bundle.Phi.shape[0] > 0:
        vals.append(_spectral_norm_sq(bundle.Phi))
    if bundle.sigma is not None:
        # Sigma has one unit entry per row, so Sigma'Sigma is diagonal with
        # the selection counts: the spectral norm is exactly the max count.
        counts = np.asarray(bundle.sigma.sum(axis=0)).ravel()
        vals.append(float(counts.max()) if counts.size else 0.0)
    return 1e3 * max(vals)


# ---------------------------------------------------------------------------
# Updates
# ---------------------------------------------------------------------------

def update_adjacency(state: AdmmState, params: HyperParams, bundle: OperatorBundle,
                     factor=None, system: sp.spmatrix | None = None) -> np.ndarray:
    """Minimize the Lagrangian in s: one strictly convex quadratic solve."""
    shared = state.w is None
    if system is None:
        system = adjacency_system(params, bundle, shared)
    if factor is None:
        factor = spla.splu(system)
    gam = gamma_logit(state.t)
    if shared:
        gam = np.tile(gam, bundle.K)
    rhs = gam + params.rho1 * (state.p - state.u1)
    if not shared and bundle.Psi.shape[0] > 0:
        rhs = rhs + params.lambda1 * (bundle.Psi.T @ state.t)
    if params.sparsity > 0:
        rhs = rhs - params.sparsity
    return _refined_solve(factor, system, rhs)


def update_probability(state: AdmmState, params: HyperParams, bundle: OperatorBundle,
                       sigma: sp.spmatrix | None = None,
                       max_steps: int = 200, tol: float = 1e-8) -> np.ndarray:
    """Likelihood prox tying t to both couplings (graphon modes)."""
    if sigma is None:
        sigma = bundle.sigma if state.z is None else bundle.selector(state.z)
    c = params.lambda1 + params.lambda2
    d = (params.lambda1 * (bundle.Psi @ state.s) + params.lambda2 * (sigma @ state.w)) / c
    return likelihood_prox(state.s, c, d, params.eps, start=state.t,
                           max_steps=max_steps, tol=tol)


def update_probability_shared(state: AdmmState, params: HyperParams,
                              bundle: OperatorBundle,
                              max_steps: int = 200, tol: float = 1e-10) -> np.ndarray:
    """Entropy prox of the shared probability vector (DCA with multistart)."""
    d = bundle.R @ state.s
    return shared_probability_prox(bundle.K, params.lambda1, d, params.eps,
                                   max_steps=max_steps, tol=tol)


def update_graphon(state: AdmmState, params: HyperParams, bundle: OperatorBundle,
                   sigma: sp.spmatrix | None = None, factor=None,
                   system: sp.spmatrix | None = None,
                   as_printed: bool = False) -> np.ndarray:
    """Minimize the Lagrangian in w: one strictly convex quadratic solve."""
    if sigma is None:
        sigma = bundle.sigma if state.z is None else bundle.selector(state.z)
    if system is None:
        system = graphon_system(params, bundle, sigma, as_printed)
    if factor is None:
        factor = spla.splu(system)
    rhs = params.rho2 * (state.v - state.u2) + params.lambda2 * (sigma.T @ state.t)
    return _refined_solve(factor, system, rhs)


def update_duals(state: AdmmState) -> tuple[np.ndarray, np.ndarray | None]:
    """Scaled dual ascent: u1 += s - p and, when present, u2 += w - v."""
    u1 = state.u1 + (state.s - state.p)
    u2 = None
    if state.w is not None:
        u2 = state.u2 + (state.w - state.v)
    return u1, u2


def update_grid_indices(state: AdmmState, params: HyperParams, bundle: OperatorBundle,
                        anchors: list[np.ndarray],
                        rng: np.random.Generator) -> tuple[list[np.ndarray], int]:
    """Greedy per-node re-estimation of grid assignments (robust mode).

    Visits every (graph, node) entry once in a random order and moves it by at
    most `eta` cells from its current value, staying within `eta` cells of its
    anchor, to whichever candidate minimizes ||t - Sigma(z) w||^2 with all
    other entries held fixed. Each move is a coordinate-wise exact
    minimization over a set containing the current value, so the objective
    never increases. Ties go to the smallest candidate value.
    """
    W = graphon_unvec(state.w, bundle.G)
    z = [np.array(zk, dtype=int, copy=True) for zk in state.z]
    segs = bundle.segments(state.t)
    lookups = [m.pair_lookup() for m in bundle.tri_maps]

    entries = [(k, i) for k, n in enumerate(bundle.sizes) for i in range(n)]
    moves = 0
    for idx in rng.permutation(len(entries)):
        k, i = entries[idx]
        n = bundle.sizes[k]
        if n < 2:
            continue
        others = np.concatenate([np.arange(i), np.arange(i + 1, n)])
        rows = lookups[k][i, others]
        t_rows = segs[k][rows]
        zo = z[k][others] - 1

        lo = max(1, anchors[k][i] - params.eta, z[k][i] - params.eta)
        hi = min(bundle.G, anchors[k][i] + params.eta, z[k][i] + params.eta)
        cands = np.arange(lo, hi + 1)
        scores = ((t_rows[None, :] - W[cands - 1][:, zo]) ** 2).sum(axis=1)
        best = int(cands[np.argmin(scores)])
        if best != z[k][i]:
            z[k][i] = best
            moves += 1
    return z, moves


# ---------------------------------------------------------------------------
# Lagrangian and convergence
# ---------------------------------------------------------------------------

def _surrogate_terms(s: np.ndarray, params: HyperParams, bundle: OperatorBundle) -> float:
    val = 0.0
    if params.sparsity > 0:
        val += params.sparsity * float(s.sum())
    if params.pairwise > 0:
        segs = np.stack(bundle.segments(s))
        quad = bundle.K * float((s * s).sum()) - float((segs.sum(axis=0) ** 2).sum())
        val += 0.5 * params.pairwise * quad
    return val


def evaluate_lagrangian(state: AdmmState, params: HyperParams,
                        bundle: OperatorBundle) -> float:
    """Exact augmented Lagrangian at the current iterate.

    Shared-prob states (w is None) use the edgewise-mean coupling
    (lambda1/2)||t - R s||^2; graphon states use both linear couplings plus
    the smoothness and box-splitting terms. Raises if t has escaped the
    [eps, 1-eps] box.
    """
    eps = params.eps
    if state.t.min() < eps - 1e-12 or state.t.max() > 1.0 - eps + 1e-12:
        raise ValueError("t outside the [eps, 1-eps] box")

    val = 0.5 * params.alpha * float(np.sum((bundle.M @ state.s) ** 2))
    val += _surrogate_terms(state.s, params, bundle)
    gap1 = state.s - state.p
    val += params.rho1 * float(state.u1 @ gap1) + 0.5 * params.rho1 * float(gap1 @ gap1)

    if state.w is None:
        val += bernoulli_nll(state.s, np.tile(state.t, bundle.K))
        r = state.t - bundle.R @ state.s
        val += 0.5 * params.lambda1 * float(r @ r)
        return val

    val += bernoulli_nll(state.s, state.t)
    r1 = state.t - bundle.Psi @ state.s
    val += 0.5 * params.lambda1 * float(r1 @ r1)
    sigma = bundle.sigma if state.z is None else bundle.selector(state.z)
    r2 = state.t - sigma @ state.w
    val += 0.5 * params.lambda2 * float(r2 @ r2)
    val += 0.5 * params.beta * float(np.sum((bundle.Phi @ state.w) ** 2))
    gap2 = state.w - state.v
    val += params.rho2 * float(state.u2 @ gap2) + 0.5 * params.rho2 * float(gap2 @ gap2)
    return val


def check_convergence(state: AdmmState, prev_p: np.ndarray,
                      prev_v: np.ndarray | None, params: HyperParams,
                      config: SolverConfig) -> ConvergenceCheck:
    """Standard ADMM stopping test on stacked primal and dual residuals."""
    shared = state.w is None
    dim = state.s.size + (0 if shared else state.w.size)
    root = np.sqrt(dim)

    gap1 = state.s - state.p
    dual1 = params.rho1 * (prev_p - state.p)
    if shared:
        primal = float(np.linalg.norm(gap1))
        dual = float(np.linalg.norm(dual1))
        ax = float(np.linalg.norm(state.s))
        bx = float(np.linalg.norm(state.p))
        unorm = params.rho1 * float(np.linalg.norm(state.u1))
    else:
        gap2 = state.w - state.v
        dual2 = params.rho2 * (prev_v - state.v)
        primal = float(np.sqrt(gap1 @ gap1 + gap2 @ gap2))
        dual = float(np.sqrt(dual1 @ dual1 + dual2 @ dual2))
        ax = float(np.sqrt(state.s @ state.s + state.w @ state.w))
        bx = float(np.sqrt(state.p @ state.p + state.v @ state.v))
        unorm = float(np.sqrt(params.rho1 ** 2 * (state.u1 @ state.u1)
                              + params.rho2 ** 2 * (state.u2 @ state.u2)))

    eps_primal = root * config.eps_abs + config.eps_rel * max(ax, bx)
    eps_dual = root * config.eps_abs + config.eps_rel * unorm
    return ConvergenceCheck(primal <= eps_primal and dual <= eps_dual,
                            primal, dual, eps_primal, eps_dual)


# ---------------------------------------------------------------------------
# Relaxed baseline and initialization
# ---------------------------------------------------------------------------

def relaxed_baseline(covariances: list[np.ndarray], params: HyperParams,
                     max_steps: int = 500, tol: float = 1e-7, *,
                     bundle: OperatorBundle | None = None) -> np.ndarray:
    """Box-relaxed stationarity estimate with no cross-graph coupling.

    Projected gradient descent on
        (alpha/2)||M x||^2 + theta1 1'x   over [0, 1]^{L_K}
    from the maximum-uncertainty start x = 1/2. The pairwise-similarity term
    is a coupling, so it is deliberately absent here; with theta1 > 0 the
    sparsity pull drives the box relaxation toward the empty vertex, which is
    the honest (if degenerate) relaxed solution. Deterministic.
    """
    if bundle is None:
        bundle = assemble_bundle(covariances)
    n = bundle.total_length
    x = np.full(n, 0.5)

    lip = params.alpha * _spectral_norm_sq(bundle.M)
    if lip <= 0:
        # pure linear objective over the box: the solution is a vertex
        return np.full(n, 0.0 if params.sparsity > 0 else 0.5)
    step = 1.0 / lip
    for _ in range(max_steps):
        g = params.alpha * (bundle.M.T @ (bundle.M @ x))
        if params.sparsity > 0:
            g = g + params.sparsity
        x_new = np.clip(x - step * g, 0.0, 1.0)
        move = float(np.abs(x_new - x).max())
        x = x_new
        if move < tol:
            break
    return x


def _segment_slices(bundle: OperatorBundle) -> list[slice]:
    off = bundle.offsets
    return [slice(off[k], off[k + 1]) for k in range(bundle.K)]


def baseline_graphs(covariances: list[np.ndarray], params: HyperParams,
                    max_steps: int = 500, tol: float = 1e-7,
                    bundle: OperatorBundle | None = None) -> list[np.ndarray]:
    """Binary estimates from the relaxed baseline via per-graph projection."""
    if bundle is None:
        bundle = assemble_bundle(covariances)
    x = relaxed_baseline(covariances, params, max_steps, tol, bundle=bundle)
    p = update_binary_aux(x, _segment_slices(bundle))
    return bundle.unvec_segments(p)


def solve_base(covariances: list[np.ndarray],
               params: HyperParams | None = None,
               config: SolverConfig | None = None, *,
               bundle: OperatorBundle | None = None) -> SolveResult:
    """Binary-constrained inference with no probability or generator coupling.

    Solves  min (alpha/2)||Ms||^2 + theta1 1's + (theta2/2) s'Qs  over binary
    adjacencies with the same s/p splitting the coupled modes use, minus the
    t/w machinery: the un-augmented reference the coupled modes are compared
    against. Starts from the relaxed per-graph estimate and lets the
    splitting iterations re-solve the quadratic against the current rounding.
    Deterministic: no randomness anywhere in the loop.
    """
    params = params or HyperParams()
    config = config or SolverConfig()
    if not covariances:
        raise ValueError("need at least one covariance matrix")
    if bundle is None:
        bundle = assemble_bundle(covariances)

    segs = _segment_slices(bundle)
    x = relaxed_baseline([], params, config.init_max_steps, config.init_tol,
                         bundle=bundle)
    s = update_binary_aux(x, segs)
    p = s.copy()
    u1 = np.zeros_like(s)

    if params.pairwise > 0:
        system = adjacency_system(params, bundle, shared=True)
        factor = spla.splu(system)
        def solve_s(rhs):
            return _refined_solve(factor, system, rhs)
    else:
        solve_s = EigenAdjacencyFactor(covariances, params, bundle).solve
    root = np.sqrt(s.size)

    status = STATUS_MAX_ITERATIONS
    iteration = 0
    for iteration in range(1, config.max_iterations + 1):
        prev_p = p
        rhs = params.rho1 * (p - u1)
        if params.sparsity > 0:
            rhs = rhs - params.sparsity
        s = solve_s(rhs)
        p = update_binary_aux(s + u1, segs)
        u1 = u1 + s - p

        primal = float(np.linalg.norm(s - p))
        dual = params.rho1 * float(np.linalg.norm(prev_p - p))
        eps_primal = root * config.eps_abs + config.eps_rel * max(
            float(np.linalg.norm(s)), float(np.linalg.norm(p)))
        eps_dual = (root * config.eps_abs
                    + config.eps_rel * params.rho1 * float(np.linalg.norm(u1)))
        if primal <= eps_primal and dual <= eps_dual:
            status = STATUS_CONVERGED
            break

    if status == STATUS_MAX_ITERATIONS:
        logger.warning("base ADMM stopped at the iteration cap (%d) without "
                       "meeting the tolerances", config.max_iterations)

    state = AdmmState(s=s, p=p, t=None, u1=u1, iteration=iteration)
    return SolveResult(mode=MODE_BASE, status=status, iterations=iteration,
                       state=state, graphs=bundle.unvec_segments(p),
                       probabilities=None, graphon=None, z=None)


def _initial_state(mode: str, params: HyperParams, config: SolverConfig,
                   bundle: OperatorBundle,
                   assignments: list[np.ndarray] | None) -> AdmmState:
    """Warm start: relaxed baseline as s, its projection as p, t read off s.

    s keeps the graded [0, 1] values so the first probability update sees
    edgewise confidence rather than roundings; p is the binary projection.
    """
    s0 = relaxed_baseline([], params, config.init_max_steps, config.init_tol,
                          bundle=bundle)
    p0 = update_binary_aux(s0, _segment_slices(bundle))
    u1 = np.zeros_like(s0)
    eps = params.eps

    if mode == MODE_SHARED_PROB:
        t0 = np.clip(bundle.R @ s0, eps, 1.0 - eps)
        return AdmmState(s=s0, p=p0, t=t0, u1=u1)

    t0 = np.clip(bundle.Psi @ s0, eps, 1.0 - eps)
    w0 = np.full(bundle.J, 0.5)
    v0 = w0.copy()
    u2 = np.zeros(bundle.J)
    z0 = None
    if mode == MODE_ROBUST:
        z0 = [np.array(zk, dtype=int, copy=True) for zk in assignments]
    return AdmmState(s=s0, p=p0, t=t0, u1=u1, w=w0, v=v0, u2=u2, z=z0)


# ---------------------------------------------------------------------------
# Driver
# ---------------------------------------------------------------------------

def _default_averagers(sizes: list[int]) -> list[np.ndarray]:
    return [build_block_averager(n, default_block_size(n)) for n in sizes]


def solve(mode: str, covariances: list[np.ndarray],
          params: HyperParams | None = None,
          config: SolverConfig | None = None, *,
          averagers: list[np.ndarray] | None = None,
          assignments: list[np.ndarray] | None = None,
          G: int | None = None,
          bundle: OperatorBundle | None = None) -> SolveResult:
    """Run the ADMM in the given mode and return estimates plus diagnostics.

    covariances: per-graph sample covariances (symmetric, one per graph).
    averagers:   blockwise density operators; defaults are built from each
                 graph's largest small divisor (graphon modes).
    assignments: 1-based grid assignments per graph; required in the graphon
                 modes. In robust mode they act as the noisy anchors.
    """
    mode = canonical_mode(mode)
    params = params or HyperParams()
    config = config or SolverConfig()
    if not covariances:
        raise ValueError("need at least one covariance matrix")

    sizes = [np.asarray(C).shape[0] for C in covariances]
    if mode == MODE_SHARED_PROB:
        if len(set(sizes)) != 1:
            raise ValueError("shared-prob mode requires equally sized graphs")
        if bundle is None:
            bundle = assemble_bundle(covariances)
    else:
        if assignments is None:
            raise ValueError(f"{mode} mode requires grid assignments")
        if len(assignments) != len(covariances):
            raise ValueError("need one assignment vector per graph")
        if bundle is None:
            if averagers is None:
                averagers = _default_averagers(sizes)
            bundle = assemble_bundle(covariances, averagers, assignments, G)
    anchors = None
    if assignments is not None:
        anchors = [np.array(zk, dtype=int, copy=True) for zk in assignments]

    rng = np.random.default_rng(config.seed)
    segs = _segment_slices(bundle)
    state = _initial_state(mode, params, config, bundle, anchors)

    shared = mode == MODE_SHARED_PROB
    s_system = adjacency_system(params, bundle, shared)
    s_factor = spla.splu(s_system)
    sigma = None
    w_system = None
    w_factor = None
    if not shared:
        sigma = bundle.sigma if state.z is None else bundle.selector(state.z)
        w_system = graphon_system(params, bundle, sigma, config.as_printed)
        w_factor = spla.splu(w_system)

    diagnostics: list[IterationDiagnostics] = []
    status = STATUS_MAX_ITERATIONS
    iteration = 0

    for iteration in range(1, config.max_iterations + 1):
        prev_p = state.p
        prev_v = None if shared else state.v

        state.s = update_adjacency(state, params, bundle,
                                   factor=s_factor, system=s_system)
        state.p = update_binary_aux(state.s + state.u1, segs)
        z_moves = 0
        if shared:
            state.t = update_probability_shared(state, params, bundle,
                                                config.dca_max_steps, config.dca_tol)
        else:
            state.t = update_probability(state, params, bundle, sigma=sigma,
                                         max_steps=config.pg_max_steps,
                                         tol=config.pg_tol)
            state.w = update_graphon(state, params, bundle, sigma=sigma,
                                     factor=w_factor, system=w_system,
                                     as_printed=config.as_printed)
            state.v = update_box_aux(state.w + state.u2)
            if mode == MODE_ROBUST and params.eta > 0:
                new_z, z_moves = update_grid_indices(state, params, bundle,
                                                     anchors, rng)
                if z_moves:
                    state.z = new_z
                    sigma = bundle.selector(state.z)
                    w_system = graphon_system(params, bundle, sigma,
                                              config.as_printed)
                    w_factor = spla.splu(w_system)

        state.u1, u2 = update_duals(state)
        if u2 is not None:
            state.u2 = u2
        state.iteration = iteration

        check = check_convergence(state, prev_p, prev_v, params, config)
        if config.record_diagnostics:
            diagnostics.append(_diagnose(state, params, bundle, sigma,
                                         check, z_moves))
        if check.converged:
            status = STATUS_CONVERGED
            break

    if status == STATUS_MAX_ITERATIONS:
        logger.warning("ADMM stopped at the iteration cap (%d) without meeting "
                       "the tolerances", config.max_iterations)

    graphs = bundle.unvec_segments(state.p)
    if shared:
        probabilities = [tri_unvec(state.t, bundle.sizes[0])]
        graphon = None
    else:
        probabilities = bundle.unvec_segments(state.t)
        graphon = graphon_unvec(np.clip(state.w, 0.0, 1.0), bundle.G)
    z_out = [zk.copy() for zk in state.z] if state.z is not None else None

    return SolveResult(mode=mode, status=status, iterations=iteration,
                       state=state, graphs=graphs, probabilities=probabilities,
                       graphon=graphon, z=z_out, diagnostics=diagnostics)


def _diagnose(state: AdmmState, params: HyperParams, bundle: OperatorBundle,
              sigma: sp.spmatrix | None, check: ConvergenceCheck,
              z_moves: int) -> IterationDiagnostics:
    stationarity = float(np.sum((bundle.M @ state.s) ** 2))
    if state.w is None:
        nll = bernoulli_nll(state.s, np.tile(state.t, bundle.K))
        hist = float(np.linalg.norm(state.t - bundle.R @ state.s))
        graphon_gap = float("nan")
        smooth = float("nan")
    else:
        nll = bernoulli_nll(state.s, state.t)
        hist = float(np.linalg.norm(state.t - bundle.Psi @ state.s))
        graphon_gap = float(np.linalg.norm(state.t - sigma @ state.w))
        smooth = float(np.sum((bundle.Phi @ state.w) ** 2))
    return IterationDiagnostics(
        iteration=state.iteration,
        lagrangian=evaluate_lagrangian(state, params, bundle),
        primal_residual=check.primal_residual,
        dual_residual=check.dual_residual,
        eps_primal=check.eps_primal,
        eps_dual=check.eps_dual,
        stationarity=stationarity,
        likelihood=nll,
        coupling_hist=hist,
        coupling_graphon=graphon_gap,
        smoothness=smooth,
        t_min=float(state.t.min()),
        t_max=float(state.t.max()),
        z_moves=z_moves,
    )
