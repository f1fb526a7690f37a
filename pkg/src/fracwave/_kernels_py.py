"""Pure numpy versions of the compiled kernels in ``_kernels.pyx``."""

import numpy as np


def ml_table_eval(x, x_lo, x_hi, series_coef, asym_coef, y0, h, cheb, alpha, beta, has_residue):
    out = np.empty_like(x)
    lo = x <= x_lo
    hi = x >= x_hi
    mid = ~(lo | hi)

    if lo.any():
        xs = x[lo]  # coefficients already carry (-1)^k
        acc = np.zeros_like(xs)
        for c in series_coef[::-1]:
            acc = acc * xs + c
        out[lo] = acc

    if hi.any():
        inv = 1.0 / x[hi]
        acc = np.zeros_like(inv)
        for c in asym_coef[::-1]:
            acc = (acc + c) * inv
        out[hi] = acc

    if mid.any():
        y = np.log(x[mid])
        npan = cheb.shape[0]
        i = np.clip(((y - y0) / h).astype(np.intp), 0, npan - 1)
        t = 2.0 * (y - y0 - i * h) / h - 1.0
        coef = cheb[i]
        b1 = np.zeros_like(t)
        b2 = np.zeros_like(t)
        for k in range(coef.shape[1] - 1, 0, -1):
            b1, b2 = 2.0 * t * b1 - b2 + coef[:, k], b1
        out[mid] = t * b1 - b2 + coef[:, 0]

    if has_residue:
        sel = ~lo
        s = x[sel] ** (1.0 / alpha)
        phase = (1.0 - beta) * np.pi / alpha + s * np.sin(np.pi / alpha)
        out[sel] += (2.0 / alpha * s ** (1.0 - beta)
                     * np.exp(s * np.cos(np.pi / alpha)) * np.cos(phase))
    return out


def history_accumulate(weights, index, history, out):
    """out[m] += sum_j weights[j, index[m]] * history[j, m] for j < len(weights)."""
    for j in range(weights.shape[0]):
        out += weights[j, index] * history[j]
    return out
