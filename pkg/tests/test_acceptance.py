"""End-to-end acceptance checks, one per shipped guarantee.

Each test prints a single verdict line; run with ``pytest
tests/test_acceptance.py -v -s`` to see them alongside the outcomes.
Checks cover the worked-example goldens, correlation-matrix structure,
null-space and eigenvector agreement, first-order error scaling, the
perturbation overlap bound, calibration optimality, exact metric
equivalences, sweep behavior on a synthetic corpus, and latency budgets.
"""

import math
import time

import numpy as np
import pytest
import scipy.linalg

from semuq.clustering import clustering_from_records
from semuq.entropy import CalibrationConfig, calibrate_bundle, calibrate_probability
from semuq.kme import dyadic_grid, empirical_kme, l2_normalize
from semuq.metrics import aurac, auroc, rejection_accuracy_curve, sweep_lambda
from semuq.pipeline import RunConfig, perturbation_direction
from semuq.qtn import (
    QcmMatrix,
    assemble_hamiltonian,
    eigendecompose,
    first_order_corrections,
    null_space_weights,
    nullspace_perturbation_bound_check,
    operator_basis,
    quantum_correlation_matrix,
    uncertainty_features,
    uq_score,
)
from semuq.synthetic import make_demo_corpus
from semuq.worked_example import check_goldens, compute_worked_example

from conftest import make_bundle, random_kme_state


def _verdict(n: int, ok: bool, detail: str) -> None:
    print(f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, f"criterion {n} failed: {detail}"


def test_criterion_1_worked_example_goldens():
    t0 = time.perf_counter()
    checks = check_goldens(compute_worked_example())
    elapsed = time.perf_counter() - t0
    failed = [c.name for c in checks if not c.ok]
    worst = max(abs(c.got - c.want) for c in checks)
    ok = not failed and elapsed < 1.0
    _verdict(
        1, ok,
        f"{len(checks)} goldens, worst gap {worst:.2e}, {elapsed * 1e3:.1f}ms"
        + (f", failed: {failed}" if failed else ""),
    )


def test_criterion_2_correlation_matrix_structure():
    t0 = time.perf_counter()
    rng = np.random.default_rng(20260821)
    worst_asym = 0.0
    worst_imag = 0.0
    min_eigenvalue = math.inf
    worst_variance_gap = 0.0
    n_states = 0
    for spins, count in ((2, 67), (4, 67), (8, 66)):
        basis = operator_basis(spins, 1)
        for _ in range(count):
            psi = random_kme_state(rng, spins)
            qcm = quantum_correlation_matrix(basis, psi)

            worst_asym = max(
                worst_asym, float(np.max(np.abs(qcm.entries - qcm.entries.T)))
            )
            # second moments recomputed in complex arithmetic: after
            # symmetrization nothing imaginary may survive
            applied = basis.apply_all(psi.astype(complex))
            gram = applied.conj() @ applied.T
            worst_imag = max(
                worst_imag, float(np.max(np.abs((0.5 * (gram + gram.T)).imag)))
            )
            min_eigenvalue = min(
                min_eigenvalue, float(np.linalg.eigvalsh(qcm.entries)[0])
            )

            null = null_space_weights(qcm)
            h_psi = assemble_hamiltonian(basis, null.weights) @ psi.astype(complex)
            mean = float((psi.conj() @ h_psi).real)
            variance = float((h_psi.conj() @ h_psi).real) - mean * mean
            worst_variance_gap = max(
                worst_variance_gap, abs(null.residual - variance)
            )
            n_states += 1
    elapsed = time.perf_counter() - t0
    ok = (
        n_states == 200
        and worst_asym <= 1e-10
        and worst_imag < 1e-12
        and min_eigenvalue >= -1e-8
        and worst_variance_gap <= 1e-8
        and elapsed < 120.0
    )
    _verdict(
        2, ok,
        f"{n_states} states, asym {worst_asym:.1e}, imag {worst_imag:.1e}, "
        f"min eig {min_eigenvalue:.1e}, residual vs variance {worst_variance_gap:.1e}, "
        f"{elapsed:.1f}s",
    )


def test_criterion_3_nullspace_matches_eigensolver():
    rng = np.random.default_rng(7)
    n_exact = 0
    worst_overlap = 1.0
    worst_residual_gap = 0.0
    for spins in (2, 4):
        basis = operator_basis(spins, 1)
        for _ in range(25):
            psi = random_kme_state(rng, spins)
            qcm = quantum_correlation_matrix(basis, psi)
            null = null_space_weights(qcm)
            independent = float(scipy.linalg.eigvalsh(qcm.entries)[0])
            worst_residual_gap = max(
                worst_residual_gap, abs(null.residual - independent)
            )
            if null.residual <= 1e-8:
                n_exact += 1
                hamiltonian = assemble_hamiltonian(basis, null.weights)
                spectrum = eigendecompose(hamiltonian, psi)
                worst_overlap = min(worst_overlap, spectrum.kme_overlap)
    ok = n_exact > 0 and worst_overlap >= 0.999 and worst_residual_gap <= 1e-10
    _verdict(
        3, ok,
        f"{n_exact}/50 tight null spaces, min overlap {worst_overlap:.6f}, "
        f"residual vs eigensolver {worst_residual_gap:.1e}",
    )


def test_criterion_4_first_order_error_scaling():
    rng = np.random.default_rng(11)
    basis = operator_basis(3, 1)
    dim = basis.dim
    eps_hi, eps_lo = 1e-2, 1e-3

    n_instances = 0
    n_modes = 0
    n_scaling = 0
    worst_orthogonality = 0.0
    attempts = 0
    while n_instances < 50 and attempts < 1000:
        attempts += 1
        weights = rng.standard_normal(basis.size)
        weights /= np.linalg.norm(weights)
        hamiltonian = assemble_hamiltonian(basis, weights)
        energies = np.linalg.eigvalsh(hamiltonian)
        spread = float(energies[-1] - energies[0])
        if float(np.min(np.diff(energies))) < 0.02 * spread:
            continue  # too close to degenerate for a clean quadratic fit

        psi = rng.standard_normal(dim)
        psi /= np.linalg.norm(psi)
        spectrum = eigendecompose(hamiltonian, psi)
        direction = rng.standard_normal(basis.size)
        direction /= np.linalg.norm(direction)
        delta_h = assemble_hamiltonian(basis, direction)

        errors = {}
        skip = False
        for eps in (eps_hi, eps_lo):
            corrections = first_order_corrections(spectrum, basis, eps * direction)
            if corrections.dropped_terms:
                skip = True
                break
            _, exact_vectors = np.linalg.eigh(hamiltonian + eps * delta_h)
            per_mode = []
            for m in range(dim):
                base = spectrum.eigenvectors[:, m]
                predicted = base + corrections.modes[:, m]
                exact = exact_vectors[:, m]
                phase = complex(np.vdot(exact, base))
                exact = exact * (phase / abs(phase))
                per_mode.append(float(np.linalg.norm(exact - predicted)))
                worst_orthogonality = max(
                    worst_orthogonality,
                    abs(complex(np.vdot(base, corrections.modes[:, m]))),
                )
            errors[eps] = per_mode
        if skip:
            continue

        for hi, lo in zip(errors[eps_hi], errors[eps_lo]):
            n_modes += 1
            if hi / max(lo, 1e-300) >= 50.0:
                n_scaling += 1
        n_instances += 1

    fraction = n_scaling / n_modes if n_modes else 0.0
    ok = (
        n_instances == 50
        and fraction >= 0.9
        and worst_orthogonality <= 1e-10
    )
    _verdict(
        4, ok,
        f"{n_instances} instances, {n_scaling}/{n_modes} modes scaled >= 50x "
        f"({fraction:.1%}), orthogonality {worst_orthogonality:.1e}",
    )


def test_criterion_5_perturbation_overlap_bound():
    rng = np.random.default_rng(23)
    n_cases = 0
    n_held = 0
    min_slack = math.inf
    attempts = 0
    while n_cases < 100 and attempts < 500:
        attempts += 1
        factor = rng.standard_normal((20, 15))
        entries = factor.T @ factor / 20.0
        eigenvalues = np.linalg.eigvalsh(entries)
        guard = 1e-8 * float(np.max(np.abs(eigenvalues)))
        if float(eigenvalues[1] - eigenvalues[0]) < 10.0 * guard:
            continue
        delta = rng.standard_normal((15, 15))
        delta = 0.5 * (delta + delta.T) * 1e-3
        result = nullspace_perturbation_bound_check(QcmMatrix(entries=entries), delta)
        n_cases += 1
        n_held += bool(result.holds)
        min_slack = min(min_slack, result.lhs - result.rhs)
    ok = n_cases == 100 and n_held == 100
    _verdict(
        5, ok,
        f"{n_held}/{n_cases} bounds held, tightest slack {min_slack:.2e}",
    )


def test_criterion_6_calibration_matches_grid_search():
    domain = np.arange(1e-6, 1.0 - 1e-6, 1e-5)
    domain = np.append(domain, 1.0 - 1e-6)

    def objective(p_hat, p, uq, lam):
        entropy = -np.log(p_hat**2 + (1.0 - p_hat) ** 2)
        kl = p_hat * np.log(p_hat / p) + (1.0 - p_hat) * np.log(
            (1.0 - p_hat) / (1.0 - p)
        )
        return entropy - (lam / uq) * kl

    worst_gap = 0.0
    for p in (0.1, 0.17765, 0.8):
        for uq in (0.1, 1.0, 10.0):
            for lam in (0.1, 1.0, 10.0):
                found = calibrate_probability(p, uq, CalibrationConfig(lambda_=lam))
                exhaustive = float(domain[np.argmax(objective(domain, p, uq, lam))])
                worst_gap = max(worst_gap, abs(found - exhaustive))

    pinned = calibrate_probability(0.3, 1.0, CalibrationConfig(lambda_=math.inf))
    flattened = calibrate_probability(0.3, 1.0, CalibrationConfig(lambda_=0.0))
    trace: list = []
    calibrate_probability(0.17765, 1.0, CalibrationConfig(lambda_=1.0), trace=trace)
    ascending = all(b >= a for a, b in zip(trace, trace[1:]))

    ok = (
        worst_gap <= 1e-3
        and abs(pinned - 0.3) <= 1e-6
        and abs(flattened - 0.5) <= 1e-6
        and ascending
    )
    _verdict(
        6, ok,
        f"27 grid searches, worst gap {worst_gap:.2e}, anchor {pinned:.7f}, "
        f"flat {flattened:.7f}, objective ascending: {ascending}",
    )


def test_criterion_7_metric_equivalences():
    rng = np.random.default_rng(41)

    def pair_count(scores, labels):
        pos = [s for s, c in zip(scores, labels) if c]
        neg = [s for s, c in zip(scores, labels) if not c]
        total = 0.0
        for sp in pos:
            for sn in neg:
                total += 1.0 if sp < sn else (0.5 if sp == sn else 0.0)
        return total / (len(pos) * len(neg))

    n_exact = 0
    for _ in range(1000):
        scores = (rng.integers(0, 12, 50) / 11.0).tolist()
        labels = (rng.uniform(size=50) < 0.5)
        while labels.all() or not labels.any():
            labels = rng.uniform(size=50) < 0.5
        labels = labels.tolist()
        n_exact += auroc(scores, labels) == pair_count(scores, labels)

    def sort_slice(scores, labels, fractions):
        order = sorted(range(len(scores)), key=lambda i: (scores[i], i))
        out = []
        for f in fractions:
            k = math.ceil(f * len(scores) - 1e-9)
            kept = order[:k]
            out.append((f, sum(1.0 for i in kept if labels[i]) / k))
        return out

    n_rac_exact = 0
    for _ in range(200):
        scores = (rng.integers(0, 8, 40) / 8.0).tolist()
        labels = (rng.uniform(size=40) < 0.5).tolist()
        curve = rejection_accuracy_curve(scores, labels)
        n_rac_exact += curve == sort_slice(scores, labels, [f for f, _ in curve])

    hand_gap = abs(aurac([(1.0, 0.5), (0.8, 1.0)]) - 0.75)

    null_scores = rng.standard_normal(10_000).tolist()
    null_labels = (rng.uniform(size=10_000) < 0.5).tolist()
    null_value = auroc(null_scores, null_labels)

    ok = (
        n_exact == 1000
        and n_rac_exact == 200
        and hand_gap <= 1e-12
        and abs(null_value - 0.5) <= 0.02
    )
    _verdict(
        7, ok,
        f"{n_exact}/1000 rank identities exact, {n_rac_exact}/200 curves exact, "
        f"hand trapezoid gap {hand_gap:.1e}, null {null_value:.4f}",
    )


def test_criterion_8_sweep_beats_uncalibrated_baseline():
    config = RunConfig(spins=4, seed=7, perturbation="seeded-random")
    bundles, config, planted = make_demo_corpus(n_questions=40, seed=7, config=config)
    result = sweep_lambda(
        bundles,
        [p.clustering for p in planted.prepared],
        [p.uq_scores for p in planted.prepared],
        [0.01, 0.1, 1.0, 10.0, 100.0, math.inf],
    )
    infinite_point = dict(result.curve)[math.inf]
    ok = (
        result.best_auroc >= result.baseline_auroc
        and abs(infinite_point - result.baseline_auroc) <= 1e-6
    )
    _verdict(
        8, ok,
        f"best {result.best_auroc:.5f} at lambda {result.best_lambda:g} vs "
        f"baseline {result.baseline_auroc:.5f}; "
        f"infinite-weight gap {abs(infinite_point - result.baseline_auroc):.1e}",
    )


def test_criterion_9_latency_budgets():
    config = RunConfig(spins=8, seed=1, perturbation="seeded-random")
    raws = [0.0004, 0.0047, 0.0023, 0.0005, 0.0089, 0.0006, 0.0007, 0.0033, 0.0002, 0.0009]
    bundle = make_bundle(raws, cluster_ids=[0, 1, 1, 2, 1, 3, 4, 1, 5, 1], qid="q-timed")
    clustering = clustering_from_records(bundle)
    norm = bundle.normalized_probabilities()

    t0 = time.perf_counter()
    grid = dyadic_grid(config.spins)
    wavefunction = l2_normalize(empirical_kme(norm, grid, config.sigma))
    basis = operator_basis(config.spins, config.locality)
    qcm = quantum_correlation_matrix(basis, wavefunction.values)
    null = null_space_weights(qcm, config.null_tol)
    hamiltonian = assemble_hamiltonian(basis, null.weights)
    spectrum = eigendecompose(hamiltonian, wavefunction.values)
    delta_w = perturbation_direction(config, null.weights, bundle.question_id)
    corrections = first_order_corrections(spectrum, basis, delta_w, config.tau)
    features = uncertainty_features(
        spectrum, corrections.modes, config.sigma, grid, config.eps_floor, delta_w
    )
    construction = time.perf_counter() - t0

    t1 = time.perf_counter()
    uq_scores = [
        uq_score(features, spectrum, x, config.m_adj, config.eps_floor) for x in norm
    ]
    calibrate_bundle(
        bundle, clustering, uq_scores, CalibrationConfig(lambda_=config.lambda_)
    )
    scoring = time.perf_counter() - t1

    ok = construction < 60.0 and scoring <= 0.1
    _verdict(
        9, ok,
        f"construction {construction:.2f}s (budget 60s), "
        f"scoring {scoring * 1e3:.1f}ms (budget 100ms) at dimension {basis.dim}",
    )
