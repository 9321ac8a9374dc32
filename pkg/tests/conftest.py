"""Shared test helpers: independent dense reimplementations of the layouts
and quadratic forms the package realizes sparsely.

Everything here is deliberately naive (explicit loops, dense Kronecker
products) so the package and its oracle never share code paths.
"""

import numpy as np


def lower_pairs(n: int) -> list[tuple[int, int]]:
    """Column-major strictly-lower index pairs (i, j) with i > j."""
    return [(i, j) for j in range(n) for i in range(j + 1, n)]


def tri_from_pairs(v: np.ndarray, n: int) -> np.ndarray:
    """Symmetric hollow matrix from a column-major lower-triangle vector."""
    S = np.zeros((n, n))
    for value, (i, j) in zip(v, lower_pairs(n)):
        S[i, j] = value
        S[j, i] = value
    return S


def pairs_from_tri(S: np.ndarray) -> np.ndarray:
    n = S.shape[0]
    return np.array([S[i, j] for i, j in lower_pairs(n)])


def graphon_from_vec(w: np.ndarray, G: int) -> np.ndarray:
    """Symmetric matrix from the [diagonal; column-major lower] layout."""
    W = np.zeros((G, G))
    for g in range(G):
        W[g, g] = w[g]
    for value, (i, j) in zip(w[G:], lower_pairs(G)):
        W[i, j] = value
        W[j, i] = value
    return W


def vec_from_graphon(W: np.ndarray) -> np.ndarray:
    G = W.shape[0]
    return np.concatenate([np.diagonal(W),
                           [W[i, j] for i, j in lower_pairs(G)]])


def pair_embedding(n: int) -> np.ndarray:
    """Dense n^2 x L matrix P with vec_F(S) = P s for symmetric hollow S
    (vec_F is the column-major flattening)."""
    pairs = lower_pairs(n)
    P = np.zeros((n * n, len(pairs)))
    for col, (i, j) in enumerate(pairs):
        P[j * n + i, col] = 1.0
        P[i * n + j, col] = 1.0
    return P


def dense_commutator_gram(C: np.ndarray) -> np.ndarray:
    """L x L matrix equal to M'M for one graph, built from the Kronecker
    form of the commutator: vec_F(SC - CS) = (C kron I - I kron C) vec_F(S).

    Any operator whose squared norm reproduces ||SC - CS||_F^2 for every s
    has exactly this Gram matrix (equal quadratic forms have equal symmetric
    matrices).
    """
    n = C.shape[0]
    I = np.eye(n)
    K = np.kron(C.T, I) - np.kron(I, C)
    P = pair_embedding(n)
    return P.T @ K.T @ K @ P


def commutator_frobenius_sq(graphs: list[np.ndarray],
                            covariances: list[np.ndarray]) -> float:
    return sum(float(np.linalg.norm(S @ C - C @ S, "fro") ** 2)
               for S, C in zip(graphs, covariances))


def histogram_image(F: np.ndarray, S: np.ndarray) -> np.ndarray:
    """Lower-triangle entries of F S F in column-major pair order."""
    T = F @ S @ F
    return np.array([T[i, j] for i, j in lower_pairs(S.shape[0])])


def selector_image(W: np.ndarray, assignments: list[np.ndarray]) -> np.ndarray:
    """Concatenated W[z_i, z_j] lookups (1-based assignments) per pair."""
    out = []
    for z in assignments:
        z = np.asarray(z, dtype=int)
        for i, j in lower_pairs(z.size):
            out.append(W[z[i] - 1, z[j] - 1])
    return np.array(out)


def difference_matrices(G: int) -> tuple[np.ndarray, np.ndarray]:
    """First/second difference matrices: D1 is G x (G-1) with -1 on the
    diagonal and +1 below; D2 is G x (G-2) with the (1, -2, 1) stencil."""
    D1 = np.zeros((G, G - 1))
    for j in range(G - 1):
        D1[j, j] = -1.0
        D1[j + 1, j] = 1.0
    D2 = np.zeros((G, G - 2))
    for j in range(G - 2):
        D2[j, j] = 1.0
        D2[j + 1, j] = -2.0
        D2[j + 2, j] = 1.0
    return D1, D2


def tps_energy(W: np.ndarray) -> float:
    """Thin-plate-spline energy ||D2'W||_F^2 + ||D1'W D1||_F^2 + ||W D2||_F^2."""
    G = W.shape[0]
    D1, D2 = difference_matrices(G)
    return (float(np.linalg.norm(D2.T @ W, "fro") ** 2)
            + float(np.linalg.norm(D1.T @ W @ D1, "fro") ** 2)
            + float(np.linalg.norm(W @ D2, "fro") ** 2))


def random_hollow_graph(rng: np.random.Generator, n: int,
                        p: float = 0.5) -> np.ndarray:
    """Random symmetric hollow binary matrix with at least one edge."""
    while True:
        S = (rng.random((n, n)) < p).astype(float)
        S = np.triu(S, 1)
        S = S + S.T
        if S.sum() > 0:
            return S


def random_covariance(rng: np.random.Generator, n: int) -> np.ndarray:
    """Random symmetric positive-definite matrix."""
    A = rng.standard_normal((n, n))
    C = A @ A.T / n + 0.1 * np.eye(n)
    return 0.5 * (C + C.T)


def random_symmetric(rng: np.random.Generator, n: int) -> np.ndarray:
    A = rng.standard_normal((n, n))
    return 0.5 * (A + A.T)
