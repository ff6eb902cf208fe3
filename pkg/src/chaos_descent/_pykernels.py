"""Numpy implementations of the array kernels.

These are the reference semantics for the compiled backend: same function
names, same shapes, same conventions. Family codes: 0 = trigonometric,
1 = legendre.
"""

import numpy as np

_SQRT2 = np.sqrt(2.0)


def basis_matrix(family, theta, m):
    """Evaluate basis functions 0..m at each point of `theta`.

    Returns an (n, m+1) array with entry [j, i] = B_i(theta_j).
    """
    theta = np.ascontiguousarray(theta, dtype=np.float64)
    n = theta.shape[0]
    out = np.empty((n, m + 1))
    out[:, 0] = 1.0
    if family == 0:
        for k in range(1, (m + 1) // 2 + 1):
            i = 2 * k - 1
            out[:, i] = _SQRT2 * np.sin(k * theta)
            if i + 1 <= m:
                out[:, i + 1] = _SQRT2 * np.cos(k * theta)
    else:
        if m >= 1:
            out[:, 1] = np.sqrt(3.0) * theta
        pkm1 = np.ones(n)
        pk = theta.copy()
        for k in range(1, m):
            pkp1 = ((2 * k + 1) * theta * pk - k * pkm1) / (k + 1)
            out[:, k + 1] = np.sqrt(2.0 * (k + 1) + 1.0) * pkp1
            pkm1, pk = pk, pkp1
    return out


def synthesize_values(family, theta, coeffs):
    """Evaluate sum_i coeffs[i, c] * B_i(theta_j) for every point and column.

    `coeffs` is (m+1, q); the result is (n, q).
    """
    coeffs = np.ascontiguousarray(coeffs, dtype=np.float64)
    return basis_matrix(family, theta, coeffs.shape[0] - 1) @ coeffs


def accumulate_projection(family, theta, values, weights, m):
    """Weighted projection sum_j weights[j] * values[j, c] * B_i(theta_j).

    `values` is (n, q), `weights` is (n,); the result is (m+1, q).
    """
    values = np.ascontiguousarray(values, dtype=np.float64)
    weights = np.ascontiguousarray(weights, dtype=np.float64)
    return basis_matrix(family, theta, m).T @ (values * weights[:, None])
