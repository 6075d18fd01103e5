# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the pure-Python kernels in ``semuq._accel.pure``.

Keep the arithmetic in lockstep with ``pure.py``: same operations, same
order, so the two backends agree to machine precision.
"""

from libc.math cimport exp, fabs, log, sqrt

import numpy as np

cimport numpy as cnp

cnp.import_array()

cdef double PI = 3.141592653589793


cdef inline double _objective(double p_hat, double p, double anchor_weight) noexcept:
    cdef double value = -log(p_hat * p_hat + (1.0 - p_hat) * (1.0 - p_hat))
    if anchor_weight != 0.0:
        value -= anchor_weight * (
            p_hat * log(p_hat / p) + (1.0 - p_hat) * log((1.0 - p_hat) / (1.0 - p))
        )
    return value


cdef inline double _gradient(double p_hat, double p, double anchor_weight) noexcept:
    cdef double grad = -(4.0 * p_hat - 2.0) / (p_hat * p_hat + (1.0 - p_hat) * (1.0 - p_hat))
    if anchor_weight != 0.0:
        grad -= anchor_weight * log((p_hat * (1.0 - p)) / (p * (1.0 - p_hat)))
    return grad


def calibrate_scalar(double p, double uq, double lam, double step0,
                     int max_iters, double stop_delta, double lo, double hi):
    """Projected gradient ascent on the calibration objective.

    Returns (p_hat, iterations, converged); see the pure twin for the
    algorithm contract.
    """
    cdef double p_hat = min(max(p, lo), hi)
    cdef double anchor_weight = lam / uq
    cdef double obj = _objective(p_hat, p, anchor_weight)
    cdef double grad, step, cand, cand_obj, moved
    cdef int iterations = 0
    cdef int halvings
    cdef bint converged = False
    cdef bint accepted
    while iterations < max_iters:
        iterations += 1
        grad = _gradient(p_hat, p, anchor_weight)
        step = step0
        accepted = False
        cand = p_hat
        cand_obj = obj
        for halvings in range(21):
            cand = min(max(p_hat + step * grad, lo), hi)
            cand_obj = _objective(cand, p, anchor_weight)
            if cand_obj > obj:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            converged = True
            break
        moved = fabs(cand - p_hat)
        p_hat = cand
        obj = cand_obj
        if moved < stop_delta:
            converged = True
            break
    return p_hat, iterations, converged


def kme_grid(const double[::1] samples, const double[::1] points, double sigma, bint weighted):
    """Kernel sum over samples at every grid point, averaged over R."""
    cdef Py_ssize_t n_samples = samples.shape[0]
    cdef Py_ssize_t n_points = points.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.zeros(n_points, dtype=np.float64)
    cdef double[::1] out_view = out
    cdef double norm = 1.0 / sqrt(2.0 * PI * sigma * sigma)
    cdef double inv_two_sigma_sq = 1.0 / (2.0 * sigma * sigma)
    cdef double diff, term, weight
    cdef Py_ssize_t r, j
    for r in range(n_samples):
        weight = samples[r] if weighted else 1.0
        for j in range(n_points):
            diff = points[j] - samples[r]
            term = norm * exp(-(diff * diff) * inv_two_sigma_sq)
            out_view[j] += term * weight
    for j in range(n_points):
        out_view[j] /= n_samples
    return out
