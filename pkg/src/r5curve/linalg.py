"""Small dense linear algebra in R^5: quadruple product, 4x4 solves, Gram-Schmidt."""

import math

import numpy as np

from .errors import RankDeficient, SingularSystem

# column subsets for the cofactor expansion along the basis row
_MINOR_COLUMNS = np.array([[c for c in range(5) if c != k] for k in range(5)])
_SIGNS = np.array([1.0, -1.0, 1.0, -1.0, 1.0])


def quad_product(x, y, z, w):
    """R^5 analogue of the cross product.

    Formal 5x5 determinant with the basis vectors in the first row and
    ``x, y, z, w`` in rows two to five, expanded along the first row.  The
    result is orthogonal to all four arguments, multilinear and alternating.
    """
    m = np.array([x, y, z, w], dtype=float)
    return _SIGNS * np.linalg.det(m[:, _MINOR_COLUMNS].transpose(1, 0, 2))


def norm(v):
    return math.sqrt(v @ v)


def solve4(A, b):
    """Solve a 4x4 system by Gaussian elimination with partial pivoting.

    Raises SingularSystem when a pivot falls below 1e-12 times the largest
    initial entry magnitude.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    n = len(b)
    if A.shape != (n, n):
        raise ValueError("solve4 expects a square matrix and a matching vector")
    # plain floats: numpy scalar access dominates at this size
    M = [row + [rhs] for row, rhs in zip(A.tolist(), b.tolist())]
    scale = max(abs(v) for row in A.tolist() for v in row)
    if scale == 0.0:
        raise SingularSystem("zero matrix")
    threshold = 1e-12 * scale
    for col in range(n):
        p = max(range(col, n), key=lambda r: abs(M[r][col]))
        if abs(M[p][col]) <= threshold:
            raise SingularSystem(f"pivot {abs(M[p][col]):.3e} below threshold at column {col + 1}")
        M[col], M[p] = M[p], M[col]
        pivot_row = M[col]
        piv = pivot_row[col]
        for r in range(col + 1, n):
            row = M[r]
            f = row[col] / piv
            if f != 0.0:
                for c in range(col, n + 1):
                    row[c] -= f * pivot_row[c]
    x = [0.0] * n
    for r in range(n - 1, -1, -1):
        row = M[r]
        acc = row[n]
        for c in range(r + 1, n):
            acc -= row[c] * x[c]
        x[r] = acc / row[r]
    return np.array(x)


def gram_matrix(vectors):
    V = np.asarray(vectors, dtype=float)
    G = V @ V.T
    return 0.5 * (G + G.T)


def gram_schmidt(vectors, tol=1e-10, basis=()):
    """Classical Gram-Schmidt with one re-orthogonalization pass.

    ``basis`` holds already orthonormal vectors that every input is made
    orthogonal to; they are not part of the output.  Raises RankDeficient
    (1-based position in ``vectors``) when a residual norm drops below
    ``tol`` relative to the input norm.
    """
    done = [np.asarray(b, dtype=float) for b in basis]
    out = []
    for pos, v in enumerate(vectors, start=1):
        v = np.asarray(v, dtype=float)
        r = v.copy()
        for _ in range(2):
            coeffs = [np.dot(r, q) for q in done]
            for c, q in zip(coeffs, done):
                r = r - c * q
        rn = norm(r)
        if rn < tol * max(1.0, norm(v)):
            raise RankDeficient(f"residual norm {rn:.3e} at position {pos}", pos)
        q = r / rn
        done.append(q)
        out.append(q)
    return out
