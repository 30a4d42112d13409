"""Symmetric-group combinatorics for the replica formalism.

Permutations of [0, m) are held in one-line ("word") notation as tuples:
``p[i]`` is the image of ``i``.  The canonical index of a permutation is the
lexicographic rank of its word, so index 0 is always the identity.  All
m!-indexed vectors and matrices elsewhere in the package follow this order.

The replica degree of freedom is an element of S_m with m = 2(n+k) copies of
the state: replicas [0, n+k) form group 1 and [n+k, m) form group 2.
Dense m! x m! matrices are capped at m <= 6; enumeration at m <= 8, where
matrix-free kernels (see ``class_kernel_matvec``) take over.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ShapeMismatchError, SizeLimitError

Perm = tuple[int, ...]

MAX_ENUM_M = 8
MAX_DENSE_M = 6


def _check_enum_m(m: int) -> None:
    if not 1 <= m <= MAX_ENUM_M:
        raise SizeLimitError(f"replica count m={m} outside enumerable range [1, {MAX_ENUM_M}]")


def _check_dense_m(m: int) -> None:
    _check_enum_m(m)
    if m > MAX_DENSE_M:
        raise SizeLimitError(f"dense m! x m! matrices capped at m={MAX_DENSE_M}, got m={m}")


@lru_cache(maxsize=None)
def enumerate_group(m: int) -> tuple[Perm, ...]:
    """All m! permutations in lexicographic order of one-line notation."""
    _check_enum_m(m)
    return tuple(itertools.permutations(range(m)))


@lru_cache(maxsize=None)
def group_index(m: int) -> dict[Perm, int]:
    """Map from permutation word to its canonical (lexicographic) index."""
    return {p: i for i, p in enumerate(enumerate_group(m))}


def identity(m: int) -> Perm:
    return tuple(range(m))


def compose(a: Perm, b: Perm) -> Perm:
    """Composition a after b: (a.b)[i] = a[b[i]]."""
    if len(a) != len(b):
        raise ShapeMismatchError(f"compose: mismatched sizes {len(a)} vs {len(b)}")
    return tuple(a[b[i]] for i in range(len(a)))


def inverse(a: Perm) -> Perm:
    inv = [0] * len(a)
    for i, v in enumerate(a):
        inv[v] = i
    return tuple(inv)


def cycle_count(a: Perm) -> int:
    """Number of cycles (fixed points included)."""
    seen = [False] * len(a)
    count = 0
    for start in range(len(a)):
        if seen[start]:
            continue
        count += 1
        j = start
        while not seen[j]:
            seen[j] = True
            j = a[j]
    return count


def transposition_distance(a: Perm, b: Perm) -> int:
    """Cayley-graph distance under all transpositions: m - cycles(a.b^{-1})."""
    if len(a) != len(b):
        raise ShapeMismatchError(f"distance: mismatched sizes {len(a)} vs {len(b)}")
    return len(a) - cycle_count(compose(a, inverse(b)))


def cycle_type(a: Perm) -> tuple[int, ...]:
    """Sorted (descending) cycle lengths; labels the conjugacy class."""
    seen = [False] * len(a)
    lens = []
    for start in range(len(a)):
        if seen[start]:
            continue
        n, j = 0, start
        while not seen[j]:
            seen[j] = True
            j = a[j]
            n += 1
        lens.append(n)
    return tuple(sorted(lens, reverse=True))


@dataclass(frozen=True)
class ReplicaShape:
    """Replica bookkeeping: n auxiliary copies, k-th moment, m = 2(n+k) total.

    Replicas are laid out as four contiguous bundles [n | k | k | n]; the
    first n+k indices form group 1 and the rest group 2.
    """

    n: int
    k: int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"moment order k must be >= 1, got {self.k}")
        if self.n < 0:
            raise ValueError(f"auxiliary replica count n must be >= 0, got {self.n}")

    @property
    def m(self) -> int:
        return 2 * (self.n + self.k)

    @property
    def half(self) -> int:
        return self.n + self.k


def overlap_permutation(shape: ReplicaShape) -> Perm:
    """The boundary permutation encoding the 2k-fold overlap contraction on A.

    Acts as the identity on the first and last n replicas and exchanges the
    two middle k-blocks pairwise (replica n+j <-> replica n+k+j).  It is an
    involution made of k disjoint transpositions, hence at distance k from
    the identity.
    """
    n, k = shape.n, shape.k
    word = list(range(shape.m))
    for j in range(k):
        word[n + j], word[n + k + j] = word[n + k + j], word[n + j]
    return tuple(word)


def is_factorized(a: Perm) -> bool:
    """True iff a preserves the two replica groups (element of S_{m/2} x S_{m/2})."""
    m = len(a)
    if m % 2 != 0:
        raise ShapeMismatchError(f"factorized split needs even m, got {m}")
    half = m // 2
    return all(a[i] < half for i in range(half))


def ground_states(shape: ReplicaShape) -> tuple[Perm, ...]:
    """Factorized permutations at minimal distance k from the overlap permutation.

    These are the k! degenerate minima of the onsite A-weight restricted to
    the factorized set; the count is checked here as a structural invariant.
    """
    sig_a = overlap_permutation(shape)
    k = shape.k
    return tuple(
        p
        for p in enumerate_group(shape.m)
        if is_factorized(p) and transposition_distance(p, sig_a) == k
    )


@lru_cache(maxsize=None)
def perm_array(m: int) -> np.ndarray:
    """(m!, m) int8 array of all permutation words in canonical order."""
    arr = np.array(enumerate_group(m), dtype=np.int8)
    arr.flags.writeable = False
    return arr


@lru_cache(maxsize=None)
def inverse_array(m: int) -> np.ndarray:
    """(m!, m) array of the inverse of each permutation, canonical order."""
    p = perm_array(m)
    inv = np.empty_like(p)
    rows = np.arange(p.shape[0])[:, None]
    inv[rows, p] = np.arange(m, dtype=np.int8)[None, :]
    inv.flags.writeable = False
    return inv


def rank_words(words: np.ndarray) -> np.ndarray:
    """Vectorized lexicographic rank (Lehmer code) of permutation words.

    words: (N, m) integer array, each row a permutation of [0, m).
    """
    n, m = words.shape
    ranks = np.zeros(n, dtype=np.int64)
    fact = 1
    weights = [1] * m
    for i in range(m - 2, -1, -1):
        fact *= m - 1 - i
        weights[i] = fact
    for i in range(m - 1):
        smaller_right = np.sum(words[:, i + 1 :] < words[:, i : i + 1], axis=1)
        ranks += smaller_right * weights[i]
    return ranks


@lru_cache(maxsize=None)
def distance_to_identity(m: int) -> np.ndarray:
    """Vector over the group: d(sigma, id) = m - cycles(sigma)."""
    _check_enum_m(m)
    out = np.array([m - cycle_count(p) for p in enumerate_group(m)], dtype=np.int8)
    out.flags.writeable = False
    return out


def distances_from(m: int, sigma: Perm) -> np.ndarray:
    """Vector of d(sigma_j, sigma) over all group elements j (works up to m=8)."""
    if len(sigma) != m:
        raise ShapeMismatchError(f"distances_from: sigma has size {len(sigma)}, expected {m}")
    # d(p, sigma) = m - cycles(p . sigma^{-1}) and (p . sigma^{-1})[x] = p[sigma^{-1}[x]]
    words = perm_array(m)[:, np.array(inverse(sigma))]
    return distance_to_identity(m)[rank_words(words)]


@lru_cache(maxsize=None)
def factorized_mask(m: int) -> np.ndarray:
    """Boolean vector marking the ((m/2)!)^2 factorized permutations."""
    if m % 2 != 0:
        raise ShapeMismatchError(f"factorized split needs even m, got {m}")
    half = m // 2
    p = perm_array(m)
    mask = np.all(p[:, :half] < half, axis=1)
    mask.flags.writeable = False
    return mask


@lru_cache(maxsize=None)
def relative_index_matrix(m: int) -> np.ndarray:
    """Dense (m!, m!) table R[i, j] = index of sigma_i . sigma_j^{-1} (m <= 6)."""
    _check_dense_m(m)
    p = perm_array(m)
    pinv = inverse_array(m)
    fac = p.shape[0]
    out = np.empty((fac, fac), dtype=np.int32)
    for i in range(fac):
        # (sigma_i . sigma_j^{-1})[x] = sigma_i[sigma_j^{-1}[x]]
        words = np.asarray(p[i])[pinv]
        out[i] = rank_words(words)
    out.flags.writeable = False
    return out


@lru_cache(maxsize=None)
def distance_matrix(m: int) -> np.ndarray:
    """Dense (m!, m!) transposition-distance table (m <= 6)."""
    d = distance_to_identity(m)[relative_index_matrix(m)]
    d.flags.writeable = False
    return d


def adjacency_matrix(m: int, alpha: int) -> np.ndarray:
    """0/1 matrix marking permutation pairs at distance exactly alpha."""
    _check_dense_m(m)
    if not 0 <= alpha <= m - 1:
        raise ValueError(f"distance alpha={alpha} outside [0, {m - 1}]")
    return (distance_matrix(m) == alpha).astype(np.float64)


# ---------------------------------------------------------------------------
# Conjugacy classes and matrix-free class-kernel matvecs.
#
# Every bond matrix in the replica chain has entries depending only on the
# conjugacy class of sigma_i . sigma_j^{-1} (Gram matrices only through the
# cycle count, Weingarten matrices through the full cycle type).  At m = 8 the
# dense (8!)^2 storage is out of reach, so such kernels are applied through a
# depth-first walk of the Cayley graph that streams one left-translation
# index table at a time.
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def conjugacy_classes(m: int):
    """(class_of, sizes, types) with deterministic class ids.

    class_of: int8 vector mapping element index -> class id;
    sizes: class sizes; types: tuple of cycle types, sorted, one per class.
    """
    _check_enum_m(m)
    types = sorted({cycle_type(p) for p in enumerate_group(m)})
    type_id = {t: i for i, t in enumerate(types)}
    class_of = np.array([type_id[cycle_type(p)] for p in enumerate_group(m)], dtype=np.int8)
    sizes = np.bincount(class_of, minlength=len(types)).astype(np.int64)
    class_of.flags.writeable = False
    sizes.flags.writeable = False
    return class_of, sizes, tuple(types)


@lru_cache(maxsize=None)
def class_distance(m: int) -> np.ndarray:
    """Transposition distance to the identity for each conjugacy class."""
    class_of, sizes, types = conjugacy_classes(m)
    return np.array([m - len(t) for t in types], dtype=np.int8)


@lru_cache(maxsize=None)
def transposition_tables(m: int) -> np.ndarray:
    """Left-translation index tables for all transpositions tau.

    tables[t, j] = index of tau_t . sigma_j; shape (m(m-1)/2, m!).
    Left-composing with a transposition (ab) swaps the values a and b in the
    one-line word.
    """
    _check_enum_m(m)
    p = perm_array(m)
    taus = list(itertools.combinations(range(m), 2))
    out = np.empty((len(taus), p.shape[0]), dtype=np.int32)
    for t, (a, b) in enumerate(taus):
        words = p.copy()
        sel_a = words == a
        sel_b = words == b
        words[sel_a] = b
        words[sel_b] = a
        out[t] = rank_words(words)
    out.flags.writeable = False
    return out


def class_kernel_matvec(m: int, kernel_by_class: np.ndarray, x: np.ndarray) -> np.ndarray:
    """y[i] = sum_j f(class(sigma_i . sigma_j^{-1})) x[j], never materializing f as a matrix.

    Walks the Cayley graph once (each group element visited exactly once via
    a distance-increasing depth-first walk), carrying the left-translation
    table of the current element; the live stack stays O(generators x
    diameter) tables.  Cost: about two m!-gathers per group element.
    """
    _check_enum_m(m)
    class_of, _, _ = conjugacy_classes(m)
    dist = distance_to_identity(m)
    tables = transposition_tables(m)
    fac = perm_array(m).shape[0]
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (fac,):
        raise ShapeMismatchError(f"matvec: vector length {x.shape} != ({fac},)")
    kernel_by_class = np.asarray(kernel_by_class, dtype=np.float64)
    # x pre-gathered through each generator: x_tau[t][i] = x[tau_t . sigma_i],
    # so a node's contribution needs only its parent's table
    x_tau = x[tables]
    f_of = kernel_by_class[class_of]
    y = f_of[0] * x
    visited = np.zeros(fac, dtype=bool)
    visited[0] = True
    max_depth = m - 1
    stack = [(np.arange(fac, dtype=np.int32), 0)]
    while stack:
        table, depth = stack.pop()
        head = table[0]
        child_heads = tables[:, head]
        grow = np.nonzero(~visited[child_heads] & (dist[child_heads] == depth + 1))[0]
        if grow.size == 0:
            continue
        visited[child_heads[grow]] = True
        for t in grow:
            contrib = f_of[child_heads[t]]
            if contrib != 0.0:
                y += contrib * x_tau[t][table]
            if depth + 1 < max_depth:
                stack.append((tables[t][table], depth + 1))
    return y


@lru_cache(maxsize=None)
def class_representatives(m: int) -> tuple[int, ...]:
    """Index of the first group element in each conjugacy class."""
    class_of, _, types = conjugacy_classes(m)
    reps = []
    for c in range(len(types)):
        reps.append(int(np.argmax(class_of == c)))
    return tuple(reps)


def class_convolution_matrix(m: int, kernel_by_class: np.ndarray) -> np.ndarray:
    """Matrix of convolution-by-f restricted to class functions.

    C[c', c] = sum over b in class c of f(rep_{c'} . b^{-1}); acting on class
    value vectors h it returns the values of the convolution f*h.  This is
    the compressed (n_classes x n_classes) form of the full m! x m! class
    kernel, exact because class functions form a commutative subalgebra.
    """
    class_of, _, types = conjugacy_classes(m)
    ncls = len(types)
    pinv = inverse_array(m)
    group = enumerate_group(m)
    out = np.empty((ncls, ncls), dtype=np.float64)
    kernel_by_class = np.asarray(kernel_by_class, dtype=np.float64)
    for ci, rep_idx in enumerate(class_representatives(m)):
        rep = np.array(group[rep_idx], dtype=np.int8)
        words = rep[pinv]  # (rep . b^{-1})[x] = rep[b^{-1}[x]]
        vals = kernel_by_class[class_of[rank_words(words)]]
        out[ci] = np.bincount(class_of, weights=vals, minlength=ncls)
    return out
