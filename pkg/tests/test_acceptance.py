"""End-to-end acceptance checks.

Each test prints one [criterion N] PASS/FAIL line (run with -s to see them)
and then asserts. These are the slow, statistically sized runs; the whole
file takes on the order of ten minutes on one core. Nothing here is mocked
or shrunk: sample counts and tolerances are the contractual ones.
"""
import json
import math
import subprocess

import numpy as np
import scipy.linalg

from helpers import random_habitat, strip_vertex
from patchsize.dynamics import DynamicsSpec, classify_survival, integrate
from patchsize.graphs import Graph, Habitat, gen_gnp, is_connected
from patchsize.montecarlo import (
    run_expectation_check,
    run_fig2_experiment,
    run_ratio_experiment,
    run_threshold_experiment,
)
from patchsize.spectral import (
    dirichlet_system,
    min_eigenvalue,
    min_eigenvalue_oracle,
)


def report(num, ok, detail):
    print(f"\n[criterion {num}] {'PASS' if ok else 'FAIL'} {detail}",
          flush=True)
    assert ok, f"criterion {num}: {detail}"


def _cli(*argv):
    r = subprocess.run(["patchsize", *argv], capture_output=True, text=True,
                       timeout=300)
    assert r.returncode == 0, r.stderr
    return json.loads(r.stdout)


def test_criterion_01_published_critical_sizes():
    a = _cli("critical-size", "--rho", "1.0", "--s", "10", "--delta", "0.01",
             "--eps", "0.1")
    b = _cli("critical-size", "--rho", "1.0", "--s", "10", "--delta", "0.01",
             "--eps", "0.03")
    ok = a["n_min"] == 1988 and b["n_min"] == 20581
    report(1, ok, f"n_min(eps=0.1)={a['n_min']} n_min(eps=0.03)={b['n_min']}")


def test_criterion_02_solver_matches_oracle():
    worst = 0.0
    checked = 0
    # every graph on 5 vertices, every admissible sink count
    for mask in range(1 << 10):
        g = Graph(5, np.flatnonzero([(mask >> b) & 1 for b in range(10)]))
        for s in range(1, 5):
            sysd = dirichlet_system(Habitat(g, s))
            xi = min_eigenvalue(sysd).value
            ref = min_eigenvalue_oracle(sysd).value
            worst = max(worst, abs(xi - ref))
            checked += 1
    # random graphs on 6..12 vertices, both solver routes
    rng = np.random.default_rng(20)
    for _ in range(1000):
        n = int(rng.integers(6, 13))
        g = gen_gnp(n, float(rng.random()), int(rng.integers(2 ** 63)))
        sysd = dirichlet_system(Habitat(g, int(rng.integers(1, n))))
        ref = min_eigenvalue_oracle(sysd).value
        for method in ("dense", "lanczos"):
            xi = min_eigenvalue(sysd, method=method).value
            worst = max(worst, abs(xi - ref))
            checked += 1
    ok = worst <= 1e-8
    report(2, ok, f"{checked} solves, worst |xi - oracle| = {worst:.3e}")


def test_criterion_03_sandwich_and_sharpness():
    rng = np.random.default_rng(30)
    violations = 0
    for _ in range(10_000):
        sysd = dirichlet_system(random_habitat(rng, n_lo=2, n_hi=300,
                                               p_pow=2.0))
        xi = min_eigenvalue(sysd).value
        if not (sysd.zeta - 1e-8 <= xi <= sysd.theta + 1e-8):
            violations += 1

    # sharpness A: the minimizing interior vertex is isolated inside the
    # interior, so xi lands exactly on zeta
    worst_a = 0.0
    for _ in range(60):
        s = int(rng.integers(1, 6))
        d = int(rng.integers(2, 30))
        n = s + d
        zmin = int(rng.integers(1, s + 1))
        edges = [(k, s) for k in range(zmin)]  # vertex s gets z = zmin
        for v in range(s + 1, n):
            picks = rng.choice(s, size=int(rng.integers(zmin, s + 1)),
                               replace=False)
            edges.extend((int(k), v) for k in picks)
            for w in range(s + 1, v):
                if rng.random() < 0.4:
                    edges.append((w, v))
        sysd = dirichlet_system(Habitat(Graph.from_edges(n, edges), s))
        assert sysd.zeta == zmin
        worst_a = max(worst_a, abs(min_eigenvalue(sysd).value - zmin))

    # sharpness B: constant sink-degree z = s closes the sandwich entirely
    worst_b = 0.0
    for _ in range(60):
        s = int(rng.integers(1, 6))
        d = int(rng.integers(2, 30))
        n = s + d
        edges = [(k, v) for k in range(s) for v in range(s, n)]
        for v in range(s, n):
            for w in range(s, v):
                if rng.random() < 0.5:
                    edges.append((w, v))
        sysd = dirichlet_system(Habitat(Graph.from_edges(n, edges), s))
        assert sysd.zeta == sysd.theta == s
        worst_b = max(worst_b, abs(min_eigenvalue(sysd).value - s))

    ok = violations == 0 and worst_a <= 1e-8 and worst_b <= 1e-8
    report(3, ok, f"10000 habitats, {violations} sandwich violations; "
                  f"sharpness gaps {worst_a:.2e} (isolated min) "
                  f"{worst_b:.2e} (constant z)")


def test_criterion_04_positivity_iff_sinks_reachable():
    rng = np.random.default_rng(40)
    conn_ok = conn_n = 0
    while conn_n < 1000:
        n = int(rng.integers(20, 121))
        p = min(1.0, 3.0 * math.log(n) / n * float(rng.uniform(1.0, 2.0)))
        g = gen_gnp(n, p, int(rng.integers(2 ** 63)))
        if not is_connected(g):
            continue
        sysd = dirichlet_system(Habitat(g, int(rng.integers(1, n // 2))))
        conn_n += 1
        if min_eigenvalue(sysd).value > 1e-8:
            conn_ok += 1

    iso_ok = 0
    for _ in range(1000):
        h = random_habitat(rng, n_lo=3, n_hi=120)
        v = int(rng.integers(h.s, h.graph.n))  # interior vertex, cut loose
        sysd = dirichlet_system(Habitat(strip_vertex(h.graph, v), h.s))
        if min_eigenvalue(sysd).value <= 1e-8:
            iso_ok += 1

    ok = conn_ok == 1000 and iso_ok == 1000
    report(4, ok, f"connected: {conn_ok}/1000 with xi > 1e-8; "
                  f"isolated-vertex: {iso_ok}/1000 with xi <= 1e-8")


def test_criterion_05_connectivity_regime_flip():
    stats = run_threshold_experiment([2000], s=10, samples=1000, seed=0,
                                     c_grid=(0.5, 2.0))
    below, above = stats[0].positive_frac, stats[1].positive_frac
    ok = below <= 0.2 and above >= 0.9
    report(5, ok, f"positive fraction at c=0.5: {below:.3f} (need <= 0.2), "
                  f"at c=2: {above:.3f} (need >= 0.9)")


def test_criterion_06_ratio_concentration():
    samples = 1000
    stats = run_ratio_experiment(s=50, p_grid=(0.4,),
                                 n_grid=(200, 500, 1000, 2000),
                                 samples=samples, seed=0)
    viol = sum(st.violations for st in stats)
    means = [st.mean_ratio for st in stats]
    ses = [st.std_ratio / math.sqrt(samples) for st in stats]
    monotone = all(
        means[k + 1] >= means[k] - 2.0 * math.hypot(ses[k], ses[k + 1])
        for k in range(len(means) - 1))
    snp = 50 * (2000 - 50) * 0.4
    final_ok = means[-1] <= 1.0 + 3.0 / math.sqrt(snp)
    theta_ok = all(
        abs(st.mean_theta_ratio - 1.0)
        <= 4.0 / math.sqrt(50 * (st.n - 50) * 0.4)
        for st in stats)
    ok = viol == 0 and monotone and final_ok and theta_ok
    report(6, ok,
           f"violations={viol}; mean ratios {[round(m, 4) for m in means]} "
           f"monotone(2SE)={monotone}; final {means[-1]:.4f} <= "
           f"{1 + 3 / math.sqrt(snp):.4f}: {final_ok}; theta ratio in band "
           f"at every n: {theta_ok}")


def test_criterion_07_critical_size_delivers_healthy():
    stats = run_fig2_experiment(delta=0.01, rho=1.0, s_list=(10,),
                                eps_list=(0.1,), samples=1000, seed=0)
    st = stats[0]
    ok = (st.n == 1988 and st.p_or_m == 179552 and st.healthy_frac >= 0.99
          and st.violations == 0)
    report(7, ok, f"n={st.n} m={int(st.p_or_m)} healthy_frac="
                  f"{st.healthy_frac:.4f} (need >= 0.99) "
                  f"violations={st.violations}")


def test_criterion_08_mean_bounded_by_sp():
    rep = run_expectation_check(500, 0.3, 20, samples=1000, seed=0)
    report(8, rep.holds,
           f"mean xi = {rep.mean_xi:.4f}, 3*SE = {3 * rep.stderr:.4f}, "
           f"s*p = {rep.sp:.1f}, mean - 3SE <= s*p: {rep.holds}")


def test_criterion_09_dynamics_agree_with_spectrum():
    rng = np.random.default_rng(90)
    agree = growth_ok = done = 0
    worst_growth_err = 0.0
    while done < 200:
        h = random_habitat(rng, n_lo=5, n_hi=50)
        sysd = dirichlet_system(h)
        dense = sysd.dense()
        evals = scipy.linalg.eigh(dense, eigvals_only=True,
                                  subset_by_index=[0, min(1, sysd.dim - 1)])
        xi = max(0.0, float(evals[0]))
        gap2 = float(evals[-1] - evals[0]) if sysd.dim > 1 else math.inf
        margin = 0.05 * max(1.0, xi)
        delta = float(rng.uniform(max(0.3, 1.2 * margin),
                                  max(0.3, 1.2 * margin) + 0.9))
        if rng.random() < 0.5 and xi - delta > 0.05:
            rho = xi - delta
        else:
            rho = xi + delta
        verdict = classify_survival(sysd, rho)
        if verdict == ("healthy" if xi <= rho else "deadly"):
            agree += 1
        # growth-rate check on the linear flow, horizon long enough for the
        # slowest transient to wash out
        t_max = max(40.0, 50.0 / delta, min(400.0, 16.0 / max(gap2, 0.04)))
        r = integrate(sysd, DynamicsSpec(mode="linear", rho=rho,
                                         t_max=t_max))
        err = abs(r.growth_rate - (rho - xi))
        worst_growth_err = max(worst_growth_err, err)
        if err <= max(0.05 * delta, 0.01):
            growth_ok += 1
        done += 1
    ok = agree == 200 and growth_ok == 200
    report(9, ok, f"classification agreement {agree}/200; growth rate in "
                  f"tolerance {growth_ok}/200 (worst err "
                  f"{worst_growth_err:.4f})")


def test_criterion_10_threads_do_not_change_output(tmp_path):
    common = ["mc-threshold", "--n-list", "300", "--s", "5", "--c-grid",
              "0.5,1.5", "--samples", "40", "--seed", "3"]
    f1, f2 = tmp_path / "a.csv", tmp_path / "b.csv"
    _cli(*common, "--threads", "1", "--out", str(f1))
    _cli(*common, "--threads", "3", "--out", str(f2))
    same = f1.read_bytes() == f2.read_bytes()
    report(10, same, f"CSV bytes identical across --threads 1 vs 3: {same}")
