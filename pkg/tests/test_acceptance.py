"""Acceptance suite: desk-scale versions of the headline claims.

Each test prints one `[acceptance] criterion-N ...: PASS/FAIL` line; run with
`pytest tests/test_acceptance.py -s` to see them. Budgets are chosen so the
whole module stays within a few minutes.
"""

import math
import time

import numpy as np
import pytest

from sysidlab import bounds, estimators, experiments, fisher, heatbench, lti, matkit
from sysidlab.seeding import generator

ACCEPT_SEED = 20240


def _verdict(name, ok, detail=""):
    print(f"[acceptance] {name}: {'PASS' if ok else 'FAIL'} {detail}".rstrip())
    assert ok, f"{name} failed: {detail}"


def _noiseless(model):
    return lti.StateSpaceModel(model.A, model.B, model.C, diagonal_flag=model.diagonal_flag)


def test_criterion_1_bound_validity_sweeps():
    t0 = time.time()
    n_values = list(range(2, 13))
    trials = 200
    violations = 0
    rows_seen = 0
    for which, direction in (("hankel-sv", "upper"), ("cond-O", "lower"),
                             ("fim-min-eig", "upper")):
        cfg = experiments.SweepConfig(n_values=n_values, trials_per_n=trials,
                                      seed=ACCEPT_SEED, which=which)
        rows = experiments.sweep(cfg)
        rows_seen += len(rows)
        for row in rows:
            if direction == "upper":
                violations += row["measured"] > row["bound"] * (1 + 1e-9)
            else:
                violations += row["measured"] < row["bound"] * (1 - 1e-9)
    # cond(Q) floor, same sampling protocol
    for n in n_values:
        _, lb_Q = bounds.cond_lower_bounds(n, 1, 1, n, n)
        for trial in range(trials):
            model = experiments.sample_system(n, 1, 1, generator(ACCEPT_SEED, 3, n, trial))
            oc = lti.build_obsv_ctrb(model, n, n)
            violations += oc.cond_Q < lb_Q * (1 - 1e-9)
            rows_seen += 1
    elapsed = time.time() - t0
    _verdict("criterion-1 bound-validity sweeps", violations == 0 and elapsed < 300,
             f"({rows_seen} checks, {violations} violations, {elapsed:.1f}s)")


def test_criterion_2_fim_oracle_equivalence():
    t0 = time.time()
    worst = 0.0
    for trial in range(50):
        rng = generator(ACCEPT_SEED, 10, trial)
        n = int(rng.integers(1, 5))
        p = int(rng.integers(1, 3))
        m = int(rng.integers(1, 3))
        K = int(rng.integers(max(2, math.ceil(n / (p * m)) + 1), 9))
        N = int(rng.integers(1, 4))
        model = experiments.sample_system(n, p, m, rng)
        inputs = []
        for _ in range(N):
            u = rng.standard_normal((K, p))
            inputs.append(u / np.sqrt(np.sum(u ** 2)))
        rep = fisher.fim(model, inputs)
        oracle = fisher.fim_oracle(model, inputs)
        denom = max(np.linalg.norm(oracle), 1e-12)
        worst = max(worst, np.linalg.norm(rep.I - oracle) / denom)
    elapsed = time.time() - t0
    _verdict("criterion-2 fim oracle equivalence", worst <= 1e-5 and elapsed < 30,
             f"(worst relative error {worst:.2e}, {elapsed:.1f}s)")


def test_criterion_3_noiseless_exactness():
    worst_hk = 0.0
    accepted = 0
    attempt = 0
    instances = []
    while accepted < 50 and attempt < 5000:
        attempt += 1
        rng = generator(ACCEPT_SEED, 20, attempt)
        n = int(rng.integers(1, 5))
        model = _noiseless(experiments.sample_system(n, 1, 1, rng))
        K1 = K2 = n + 1
        mk = lti.markov_sequence(model, K1 + K2 - 1)
        hank = lti.build_hankel(mk, K1, K2)
        if matkit.singular_values(hank.H_minus)[n - 1] < 1e-6:
            continue
        est = estimators.ho_kalman(mk, n, K1, K2)
        d = lti.hausdorff(matkit.spectrum(est.A_hat), np.diag(model.A))
        worst_hk = max(worst_hk, d)
        instances.append((model, n))
        accepted += 1
    assert accepted == 50

    worst_mo = 0.0
    for idx, (model, n) in enumerate(instances):
        u = lti.gen_inputs("gaussian-unit", 1, 60, seed=idx)
        ds = lti.Dataset([lti.simulate(model, u, noise_seed=0)])
        est = estimators.moesp(ds, n, n + 2, 40)
        worst_mo = max(worst_mo, lti.hausdorff(matkit.spectrum(est.A_hat), np.diag(model.A)))

    _verdict("criterion-3 noiseless exactness",
             worst_hk <= 1e-7 and worst_mo <= 1e-5,
             f"(ho-kalman worst {worst_hk:.2e} <= 1e-7, moesp worst {worst_mo:.2e} <= 1e-5)")


def test_criterion_4_perturbation_bound_validation():
    checked = 0
    satisfied = 0
    attempt = 0
    while checked < 100 and attempt < 5000:
        attempt += 1
        rng = generator(ACCEPT_SEED, 30, attempt)
        n = int(rng.integers(1, 4))
        model = _noiseless(experiments.sample_system(n, 1, 1, rng))
        K1 = K2 = n + 2
        mk = lti.markov_sequence(model, K1 + K2 - 1)
        hank = lti.build_hankel(mk, K1, K2)
        sigma_n = matkit.singular_values(hank.H_minus)[n - 1]
        if sigma_n < 1e-9:
            continue
        E = rng.standard_normal(mk.blocks.shape)
        E *= rng.uniform(0.02, 0.2) * sigma_n / np.linalg.norm(E)
        est = estimators.ho_kalman(lti.MarkovSequence(mk.blocks + E), n, K1, K2)
        L_hat = est.obsv_factor @ est.ctrb_factor
        rep = estimators.hokalman_perturbation_check(hank, hank.H_minus, L_hat, est, model)
        if not rep.precondition_ok:
            continue
        checked += 1
        satisfied += all(chk.satisfied for chk in rep.checks)
    _verdict("criterion-4 realization perturbation bounds",
             checked == 100 and satisfied == 100,
             f"({satisfied}/{checked} instances satisfied all bounds)")


def test_criterion_5_input_energy_bound_on_S():
    violations = 0
    for trial in range(100):
        rng = generator(ACCEPT_SEED, 40, trial)
        p = int(rng.integers(1, 4))
        m = int(rng.integers(1, 4))
        K = int(rng.integers(1, 10))
        u = rng.standard_normal((K, p))
        u /= np.sqrt(np.sum(u ** 2))
        S = fisher.build_S(u, m)
        lam_max = float(np.linalg.eigvalsh(S.T @ S)[-1])
        violations += lam_max > p * m * K ** 2 * (1 + 1e-12)
    _verdict("criterion-5 energy bound on S", violations == 0,
             f"(100 inputs, {violations} violations)")


def test_criterion_6_appendix_decay_oracles():
    krylov_viol = 0
    for trial in range(50):
        rng = generator(ACCEPT_SEED, 50, trial)
        n = int(rng.integers(2, 9))
        p = int(rng.integers(1, min(n, 4) + 1))
        mb = int(rng.integers(1, 5))
        W = rng.standard_normal((n, p))
        D = np.diag(rng.uniform(-1.0, 1.0, n))
        X = np.hstack([np.linalg.matrix_power(D, j) @ W for j in range(mb)])
        s = matkit.singular_values(X)
        krylov_viol += s[-1] > bounds.krylov_sv_bound(n, mb, p, s[0]) * (1 + 1e-9)

    hankel_viol = 0
    for trial in range(50):
        rng = generator(ACCEPT_SEED, 51, trial)
        n = int(rng.integers(3, 9))
        nodes = rng.uniform(-1.0, 1.0, n + 3)
        wts = rng.uniform(0.1, 1.0, n + 3)
        H = np.array([[np.sum(wts * nodes ** (i + j)) for j in range(n)] for i in range(n)])
        hankel_viol += sum(not r.satisfied for r in bounds.hankel_decay_check(H))
    _verdict("criterion-6 appendix decay oracles",
             krylov_viol == 0 and hankel_viol == 0,
             f"(krylov violations {krylov_viol}, hankel-decay violations {hankel_viol})")


def test_criterion_7_heat_benchmark():
    t0 = time.time()
    cfg = heatbench.HeatConfig()
    model = heatbench.build_heat_model(cfg)
    ref = lti.minimal_realization(model)
    poles = matkit.spectrum(ref.A)
    all_real = np.max(np.abs(poles.imag)) <= 1e-10

    medians = {}
    metas = []
    for algo in heatbench.HEAT_ALGORITHMS:
        dists = []
        for seed in range(5):
            rows, _, meta = heatbench.run_heat_experiment(cfg, [1000], [18], [algo], seed=seed)
            dists.append(rows[0]["hausdorff"])
            metas.append(meta)
        medians[algo] = float(np.median(dists))

    cfg0 = heatbench.HeatConfig(process_scale=0.0, meas_scale=0.0)
    rows0, _, _ = heatbench.run_heat_experiment(cfg0, [100], [18],
                                                list(heatbench.HEAT_ALGORITHMS), seed=0)
    control = max(r["hausdorff"] for r in rows0)

    # nominal targets are 3 states / 0.85 radius; achieved values must be in
    # the metadata and the realization must actually be minimal
    meta = metas[0]
    recorded = "minimal_states" in meta and "spectral_radius" in meta
    minimal = lti.minimal_realization(ref).n == ref.n
    radius_note = f"radius {meta['spectral_radius']:.3f} (0.85 nominal)"

    elapsed = time.time() - t0
    ok = (all_real and recorded and minimal and control <= 1e-5
          and all(v >= 0.1 for v in medians.values()) and elapsed < 600)
    _verdict("criterion-7 heat benchmark", ok,
             f"(poles real: {all_real}; medians {medians}; noiseless {control:.2e}; "
             f"{meta['minimal_states']} states, {radius_note}; {elapsed:.1f}s)")


def test_criterion_8_crb_consistency_scalar():
    t0 = time.time()
    lam_true, K, N, reps = 0.5, 8, 200, 500
    model = lti.StateSpaceModel([[lam_true]], [[1.0]], [[1.0]], meas_cov=[[1.0]],
                                diagonal_flag=True)
    inputs = []
    for ell in range(N):
        u = generator(ACCEPT_SEED, 60, ell).standard_normal((K, 1))
        inputs.append(u / np.sqrt(np.sum(u ** 2)))
    info = fisher.fim(model, inputs).I[0, 0]
    crb = 1.0 / info

    U = np.stack([u[:, 0] for u in inputs])  # (N, K)

    def mean_response(lam):
        h = lam ** np.arange(K)
        mu = np.empty((N, K))
        for k in range(K):
            mu[:, k] = U[:, :k + 1] @ h[:k + 1][::-1]
        return mu

    grid = np.linspace(-1.0, 1.0, 2001)
    G = np.stack([mean_response(lam).reshape(-1) for lam in grid])
    sq_norms = np.sum(G * G, axis=1)
    mu_true = mean_response(lam_true).reshape(-1)

    estimates = np.empty(reps)
    for r in range(reps):
        y = mu_true + generator(ACCEPT_SEED, 61, r).standard_normal(N * K)
        score = 2.0 * (G @ y) - sq_norms  # log-likelihood up to constants
        estimates[r] = grid[int(np.argmax(score))]
    var = float(np.var(estimates, ddof=1))
    elapsed = time.time() - t0
    _verdict("criterion-8 CRB consistency (scalar ML)",
             var >= 0.8 * crb and elapsed < 120,
             f"(empirical var {var:.3e} vs CRB {crb:.3e}, ratio {var / crb:.3f}, {elapsed:.1f}s)")


def test_criterion_9_sample_complexity_inversion():
    mismatches = 0
    points = 0
    for trial in range(10):
        rng = generator(ACCEPT_SEED, 70, trial)
        n = int(rng.integers(4, 18))
        db = float(rng.uniform(0.2, 1.5))
        eps = float(10.0 ** rng.uniform(-10, -2))

        got_n = fisher.sample_complexity(n, 1, 1, db, eps, "many-short")
        K = math.ceil(n) + 1
        scan_n = 1
        while fisher.crb_floor(n, 1, 1, scan_n, K, db) > eps:
            scan_n += 1
        mismatches += got_n != scan_n
        points += 1

        got_k = fisher.sample_complexity(n, 1, 1, db, eps, "one-long")
        scan_k = math.ceil(n) + 1
        while fisher.crb_floor(n, 1, 1, 1, scan_k, db) > eps:
            scan_k += 1
        mismatches += got_k != scan_k
        points += 1
    _verdict("criterion-9 sample-complexity inversion", mismatches == 0,
             f"({points} grid points, {mismatches} mismatches)")
