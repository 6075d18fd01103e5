"""Pure-Python kernels: the reference implementations.

The compiled extension in ``_kernels.pyx`` mirrors these routines operation
for operation; the backend selector in ``__init__`` picks whichever is
available.  Keep the two in lockstep; the test suite pins their agreement.
"""

from __future__ import annotations

import math

import numpy as np


def _objective(p_hat: float, p: float, anchor_weight: float) -> float:
    # binary collision-entropy term minus the weighted KL anchor, natural log
    value = -math.log(p_hat * p_hat + (1.0 - p_hat) * (1.0 - p_hat))
    if anchor_weight != 0.0:
        value -= anchor_weight * (
            p_hat * math.log(p_hat / p) + (1.0 - p_hat) * math.log((1.0 - p_hat) / (1.0 - p))
        )
    return value


def _gradient(p_hat: float, p: float, anchor_weight: float) -> float:
    grad = -(4.0 * p_hat - 2.0) / (p_hat * p_hat + (1.0 - p_hat) * (1.0 - p_hat))
    if anchor_weight != 0.0:
        grad -= anchor_weight * math.log((p_hat * (1.0 - p)) / (p * (1.0 - p_hat)))
    return grad


def calibrate_scalar(
    p: float,
    uq: float,
    lam: float,
    step0: float,
    max_iters: int,
    stop_delta: float,
    lo: float,
    hi: float,
    trace: list | None = None,
):
    """Projected gradient ascent on the calibration objective.

    Returns (p_hat, iterations, converged).  The step halves on objective
    decrease (20 halvings max per iterate); accepted iterates are strictly
    ascending, so the objective sequence is nondecreasing by construction.
    ``trace``, when a list, collects the objective value at the start and
    after each accepted step.
    """
    p_hat = min(max(p, lo), hi)
    anchor_weight = lam / uq
    obj = _objective(p_hat, p, anchor_weight)
    if trace is not None:
        trace.append(obj)
    converged = False
    iterations = 0
    while iterations < max_iters:
        iterations += 1
        grad = _gradient(p_hat, p, anchor_weight)
        step = step0
        accepted = False
        cand = p_hat
        cand_obj = obj
        for _ in range(21):
            cand = min(max(p_hat + step * grad, lo), hi)
            cand_obj = _objective(cand, p, anchor_weight)
            if cand_obj > obj:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            # no ascent direction at the finest step: local maximum reached
            converged = True
            break
        moved = abs(cand - p_hat)
        p_hat = cand
        obj = cand_obj
        if trace is not None:
            trace.append(obj)
        if moved < stop_delta:
            converged = True
            break
    return p_hat, iterations, converged


def kme_grid(samples: np.ndarray, points: np.ndarray, sigma: float, weighted: bool) -> np.ndarray:
    """Kernel sum over samples at every grid point, averaged over R."""
    norm = 1.0 / math.sqrt(2.0 * math.pi * sigma * sigma)
    diff = points[np.newaxis, :] - samples[:, np.newaxis]
    kernels = norm * np.exp(-(diff**2) / (2.0 * sigma * sigma))
    if weighted:
        kernels = kernels * samples[:, np.newaxis]
    return kernels.sum(axis=0) / samples.size
