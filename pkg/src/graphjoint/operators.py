"""Lower-triangle vectorization and the sparse linear operators of the solver.

Every adjacency matrix S is symmetric and hollow, so it is represented by the
vector of its strictly-lower-triangle entries in column-major order:

    N = 3  ->  s = (S_21, S_31, S_32)

A discretized graphon W (G x G, symmetric, diagonal meaningful) is represented
as w = [diag(W); lower(W)], again with the lower triangle column-major.

On top of these layouts the module assembles, as scipy.sparse matrices:

    M      stationarity map        ||M s||^2   = sum_k ||S C - C S||_F^2
    Psi    histogram map           (Psi s)_k   = tri_vec(F S^(k) F)
    Sigma  graphon selector        (Sigma w)_m = W[z_i, z_j] for pair (i,j)
    Phi    thin-plate smoother     ||Phi w||^2 = ||D2'W||_F^2 + ||D1'W D1||_F^2
                                                 + ||W D2||_F^2
    R      segment mean            (R s)_i     = mean_k s_i^(k)

plus the first/second difference matrices D1 (G x G-1) and D2 (G x G-2).
Tests hold independent dense oracles for each identity; nothing here is shared
with them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp


# ---------------------------------------------------------------------------
# Index layouts
# ---------------------------------------------------------------------------

def tri_pair_count(n: int) -> int:
    """Number of strictly-lower-triangle entries of an n x n matrix."""
    return n * (n - 1) // 2


def tri_pairs(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Row/column index arrays (i > j) of the lower triangle, column-major.

    Transposing the row-major upper-triangle enumeration yields exactly the
    column-major lower-triangle order, so this leans on np.triu_indices.
    """
    r, c = np.triu_indices(n, 1)
    return c.copy(), r.copy()


@dataclass(frozen=True)
class TriIndexMap:
    """Bijection between lower-triangle pairs of an n x n matrix and 0-based
    vector positions, in column-major order."""

    n: int
    i: np.ndarray = field(repr=False)  # row index of each pair, i > j
    j: np.ndarray = field(repr=False)  # column index of each pair

    @classmethod
    def for_size(cls, n: int) -> "TriIndexMap":
        if n < 1:
            raise ValueError(f"matrix size must be >= 1, got {n}")
        i, j = tri_pairs(n)
        return cls(n=n, i=i, j=j)

    def __len__(self) -> int:
        return tri_pair_count(self.n)

    @property
    def pos_lower(self) -> np.ndarray:
        """Position of S[i, j] inside the column-major vec of S."""
        return self.j * self.n + self.i

    @property
    def pos_upper(self) -> np.ndarray:
        """Position of the mirror entry S[j, i] inside vec(S)."""
        return self.i * self.n + self.j

    def pair_lookup(self) -> np.ndarray:
        """n x n integer matrix holding the pair position at [i, j] and
        [j, i] (diagonal = -1)."""
        table = np.full((self.n, self.n), -1, dtype=np.int64)
        m = np.arange(len(self))
        table[self.i, self.j] = m
        table[self.j, self.i] = m
        return table


def _check_symmetric(A: np.ndarray, what: str) -> np.ndarray:
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"{what} must be square, got shape {A.shape}")
    if not np.array_equal(A, A.T):
        raise ValueError(f"{what} must be symmetric")
    return A


def tri_vec(S: np.ndarray) -> np.ndarray:
    """Column-major lower-triangle entries of a symmetric hollow matrix."""
    S = _check_symmetric(S, "adjacency matrix")
    if np.any(np.diagonal(S) != 0):
        raise ValueError("adjacency matrix must have a zero diagonal")
    i, j = tri_pairs(S.shape[0])
    return S[i, j].astype(float, copy=True)


def tri_unvec(v: np.ndarray, n: int) -> np.ndarray:
    """Inverse of tri_vec: rebuild the symmetric hollow n x n matrix."""
    v = np.asarray(v, dtype=float)
    if v.shape != (tri_pair_count(n),):
        raise ValueError(
            f"expected vector of length {tri_pair_count(n)} for n={n}, got {v.shape}")
    S = np.zeros((n, n))
    i, j = tri_pairs(n)
    S[i, j] = v
    S[j, i] = v
    return S


def graphon_vec(W: np.ndarray) -> np.ndarray:
    """[diagonal; column-major lower triangle] vector of a symmetric matrix."""
    W = _check_symmetric(W, "graphon matrix")
    i, j = tri_pairs(W.shape[0])
    return np.concatenate([np.diagonal(W).astype(float), W[i, j]])


def graphon_unvec(w: np.ndarray, G: int) -> np.ndarray:
    """Inverse of graphon_vec."""
    w = np.asarray(w, dtype=float)
    J = G * (G + 1) // 2
    if w.shape != (J,):
        raise ValueError(f"expected vector of length {J} for G={G}, got {w.shape}")
    W = np.zeros((G, G))
    np.fill_diagonal(W, w[:G])
    i, j = tri_pairs(G)
    W[i, j] = w[G:]
    W[j, i] = w[G:]
    return W


# ---------------------------------------------------------------------------
# Sparse operator assembly
# ---------------------------------------------------------------------------

def _pair_embedding(n: int) -> sp.csr_matrix:
    """Sparse n^2 x L map with vec(S) = E @ tri_vec(S) (column-major vec)."""
    tri = TriIndexMap.for_size(n)
    L = len(tri)
    m = np.arange(L)
    rows = np.concatenate([tri.pos_lower, tri.pos_upper])
    cols = np.concatenate([m, m])
    data = np.ones(2 * L)
    return sp.csr_matrix((data, (rows, cols)), shape=(n * n, L))


def build_commutator_op(covariances: list[np.ndarray]) -> sp.csr_matrix:
    """Stacked map M with ||M s||^2 = sum_k ||S C - C S||_F^2.

    Per graph the block is (C (+) -C) restricted to lower-triangle coordinates,
    realized as (kron(C, I) - kron(I, C)) @ E with E the pair embedding.
    """
    blocks = []
    for C in covariances:
        C = _check_symmetric(np.asarray(C, dtype=float), "covariance")
        n = C.shape[0]
        eye = sp.identity(n, format="csr")
        commut = sp.kron(sp.csr_matrix(C), eye) - sp.kron(eye, sp.csr_matrix(C))
        blocks.append((commut @ _pair_embedding(n)).tocsr())
    return sp.block_diag(blocks, format="csr")


def build_histogram_op(averagers: list[np.ndarray]) -> sp.csr_matrix:
    """Stacked map Psi with segment k of Psi s equal to tri_vec(F S F)."""
    blocks = []
    for F in averagers:
        F = _check_symmetric(np.asarray(F, dtype=float), "block averager")
        n = F.shape[0]
        tri = TriIndexMap.for_size(n)
        kr = sp.kron(sp.csr_matrix(F), sp.csr_matrix(F)).tocsr()
        blocks.append((kr[tri.pos_lower, :] @ _pair_embedding(n)).tocsr())
    return sp.block_diag(blocks, format="csr")


def build_graphon_selector(assignments: list[np.ndarray], G: int) -> sp.csr_matrix:
    """Selector Sigma with (Sigma w)_m = W[z_i, z_j] for pair m = (i, j).

    `assignments` holds one 1-based grid-index vector per graph; w follows the
    [diagonal; lower-triangle] layout of graphon_vec.
    """
    grid = TriIndexMap.for_size(G)
    lookup = grid.pair_lookup()  # (a, b) -> lower-triangle position, a != b
    blocks = []
    for z in assignments:
        z = np.asarray(z)
        if z.ndim != 1:
            raise ValueError("each assignment must be a vector of grid indices")
        if np.any(z < 1) or np.any(z > G):
            raise ValueError(f"grid indices must lie in 1..{G}")
        a = z.astype(np.int64) - 1
        tri = TriIndexMap.for_size(z.size)
        zi, zj = a[tri.i], a[tri.j]
        cols = np.where(zi == zj, zi, G + lookup[zi, zj])
        rows = np.arange(len(tri))
        data = np.ones(len(tri))
        blocks.append(sp.csr_matrix((data, (rows, cols)),
                                    shape=(len(tri), G * (G + 1) // 2)))
    return sp.vstack(blocks, format="csr") if blocks else sp.csr_matrix((0, G * (G + 1) // 2))


def build_difference_matrices(G: int) -> tuple[np.ndarray, np.ndarray]:
    """First/second difference matrices D1 (G x G-1) and D2 (G x G-2).

    Column j of D1 is -1 at row j and +1 at row j+1; column j of D2 is
    (+1, -2, +1) at rows (j, j+1, j+2).
    """
    if G < 3:
        raise ValueError(f"grid size must be >= 3 for difference matrices, got {G}")
    D1 = np.zeros((G, G - 1))
    idx = np.arange(G - 1)
    D1[idx, idx] = -1.0
    D1[idx + 1, idx] = 1.0
    D2 = np.zeros((G, G - 2))
    idx = np.arange(G - 2)
    D2[idx, idx] = 1.0
    D2[idx + 1, idx] = -2.0
    D2[idx + 2, idx] = 1.0
    return D1, D2


def _graphon_embedding(G: int) -> sp.csr_matrix:
    """Sparse G^2 x J map with vec(W) = E_w @ graphon_vec(W)."""
    tri = TriIndexMap.for_size(G)
    L = len(tri)
    diag_rows = np.arange(G) * G + np.arange(G)
    rows = np.concatenate([diag_rows, tri.pos_lower, tri.pos_upper])
    cols = np.concatenate([np.arange(G), G + np.arange(L), G + np.arange(L)])
    data = np.ones(G + 2 * L)
    return sp.csr_matrix((data, (rows, cols)), shape=(G * G, G * (G + 1) // 2))


def build_tps_op(G: int) -> sp.csr_matrix:
    """Thin-plate smoothing map Phi acting on graphon vectors.

    Stacks the vectorized forms of D2'W, D1'W D1 and W D2, so that
    ||Phi w||^2 equals the discrete thin-plate energy of W.
    """
    D1, D2 = build_difference_matrices(G)
    E = _graphon_embedding(G)
    eye = sp.identity(G, format="csr")
    d1t = sp.csr_matrix(D1.T)
    d2t = sp.csr_matrix(D2.T)
    blocks = [
        sp.kron(eye, d2t) @ E,   # vec(D2' W)
        sp.kron(d1t, d1t) @ E,   # vec(D1' W D1)
        sp.kron(d2t, eye) @ E,   # vec(W D2)
    ]
    return sp.vstack(blocks, format="csr")


def build_mean_op(K: int, L: int) -> sp.csr_matrix:
    """Segment-mean map R = (1/K) [I_L ... I_L] for K equal-size graphs."""
    if K < 1:
        raise ValueError(f"need at least one graph, got K={K}")
    eye = sp.identity(L, format="csr")
    return sp.hstack([eye * (1.0 / K)] * K, format="csr")


# ---------------------------------------------------------------------------
# Bundle
# ---------------------------------------------------------------------------

@dataclass
class OperatorBundle:
    """All solver operators for one problem instance, assembled once.

    Immutable after construction except that robust solves rebuild `sigma`
    via `selector()` when grid indices move.
    """

    sizes: list[int]
    G: int
    M: sp.csr_matrix
    Psi: sp.csr_matrix
    Phi: sp.csr_matrix
    R: sp.csr_matrix | None
    sigma: sp.csr_matrix | None
    tri_maps: list[TriIndexMap] = field(repr=False, default_factory=list)

    @property
    def K(self) -> int:
        return len(self.sizes)

    @property
    def seg_lengths(self) -> list[int]:
        return [tri_pair_count(n) for n in self.sizes]

    @property
    def total_length(self) -> int:
        return sum(self.seg_lengths)

    @property
    def J(self) -> int:
        return self.G * (self.G + 1) // 2

    @property
    def offsets(self) -> list[int]:
        out = [0]
        for L in self.seg_lengths:
            out.append(out[-1] + L)
        return out

    def segments(self, s: np.ndarray) -> list[np.ndarray]:
        """Split a stacked tri vector into its per-graph segments."""
        off = self.offsets
        if s.shape != (off[-1],):
            raise ValueError(f"expected stacked vector of length {off[-1]}, got {s.shape}")
        return [s[off[k]:off[k + 1]] for k in range(self.K)]

    def unvec_segments(self, s: np.ndarray) -> list[np.ndarray]:
        """Rebuild the K symmetric hollow matrices from a stacked vector."""
        return [tri_unvec(seg, n) for seg, n in zip(self.segments(s), self.sizes)]

    def selector(self, assignments: list[np.ndarray]) -> sp.csr_matrix:
        """(Re)build Sigma for the given 1-based grid assignments."""
        return build_graphon_selector(assignments, self.G)


def assemble_bundle(covariances: list[np.ndarray],
                    averagers: list[np.ndarray] | None = None,
                    assignments: list[np.ndarray] | None = None,
                    G: int | None = None) -> OperatorBundle:
    """Build the operator bundle for a list of per-graph covariances.

    `averagers`/`assignments`/`G` may be omitted for the shared-probability
    mode, which only needs M and R. R is only defined when all graphs share
    one size.
    """
    sizes = [np.asarray(C).shape[0] for C in covariances]
    M = build_commutator_op(covariances)
    tri_maps = [TriIndexMap.for_size(n) for n in sizes]

    if G is None:
        G = sum(sizes)

    if averagers is not None:
        if len(averagers) != len(covariances):
            raise ValueError("need one block averager per covariance")
        Psi = build_histogram_op(averagers)
    else:
        Psi = sp.csr_matrix((0, sum(tri_pair_count(n) for n in sizes)))

    sigma = build_graphon_selector(assignments, G) if assignments is not None else None
    Phi = build_tps_op(G) if G >= 3 else sp.csr_matrix((0, G * (G + 1) // 2))

    R = None
    if len(set(sizes)) == 1:
        R = build_mean_op(len(sizes), tri_pair_count(sizes[0]))

    return OperatorBundle(sizes=sizes, G=G, M=M, Psi=Psi, Phi=Phi, R=R,
                          sigma=sigma, tri_maps=tri_maps)
