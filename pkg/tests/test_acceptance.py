"""Acceptance suite: one printed PASS/FAIL line per criterion, at the stated tolerances.

The lines are echoed in the pytest terminal summary under "acceptance criteria".
"""
import os
import time

import numpy as np
import pytest

from oracles import (anova_f as anova_oracle, gini_score, gini_split, mann_whitney_auc,
                     stat18 as stat18_oracle, svm_dual_projected_gradient,
                     temporal3 as temporal3_oracle, welch_t as welch_oracle)
from dddkit.dataset_io import load_dataset, named_profile, synth_dataset
from dddkit.features import statistical36, temporal15
from dddkit.labeling import AWAKE, DROWSY, UNLABELED, label_by_eeg
from dddkit.models import SVM, RandomForest, auc_score
from dddkit.models.forest import build_tree
from dddkit.models.svm import kernel_matrix
from dddkit.multiwavelet import (band_energies, packet_decompose, packet_reconstruct,
                                 postfilter, prefilter)
from dddkit.pipeline import (METHODS, build_examples, compare, preset, report_json,
                             run_experiment, split_examples)
from dddkit.selection import anova_f, welch_t
from dddkit.signal_core import Window, WindowSpec, round_half_down, window_matrix

pytestmark = pytest.mark.acceptance


def test_mmdap_headline_ranking(criterion):
    """Non-gating: needs the real dataset, pointed to by DDDKIT_MMDAP."""
    path = os.environ.get("DDDKIT_MMDAP")
    if not path or not os.path.exists(path):
        criterion("MMDAP headline ranking (non-gating)", True,
                  "dataset not available; set DDDKIT_MMDAP to run", status="SKIP")
        pytest.skip("MMDAP dataset not available")
    rep = compare([preset(m, "c2") for m in METHODS], load_dataset(path))
    aucs = {r["method"]: r["AUC"] or 0.0 for r in rep["table"]}
    best = max(aucs, key=aucs.get)
    criterion("MMDAP headline ranking (non-gating)", best == "rf", f"AUCs {aucs}")


def test_windowing_count(criterion):
    rng = np.random.default_rng(0)
    t0 = time.perf_counter()
    bad = 0
    for _ in range(200):
        rate = float(rng.choice([10.0, 25.0, 60.0, 500.0]))
        length = float(rng.uniform(0.1, 20.0))
        overlap = float(rng.uniform(0.0, 0.95))
        spec = WindowSpec(length, overlap, rate)
        N = int(rng.integers(0, 20000))
        W = int(round(length * rate))
        S = round_half_down(W * (1 - overlap))
        want = (N - W) // S + 1 if N >= W else 0
        if spec.count(N) != want or window_matrix(np.zeros(N), spec).shape[0] != want:
            bad += 1
    dt = time.perf_counter() - t0
    ok = bad == 0 and dt < 1.0
    criterion("windowing count formula", ok, f"{200 - bad}/200 exact, {dt:.3f} s (< 1 s)")
    assert ok


def test_eeg_label_proportions(criterion):
    rng = np.random.default_rng(1)
    r = rng.permutation(10000) / 1000.0 + rng.uniform(0, 1e-4, 10000)
    lab = label_by_eeg(r)
    counts = [int(np.sum(lab == v)) for v in (AWAKE, DROWSY, UNLABELED)]
    within = all(abs(c - w) <= 1 for c, w in zip(counts, (6000, 2220, 1780)))
    invariant = np.array_equal(label_by_eeg(np.exp(r)), lab)
    ok = within and invariant
    criterion("EEG labeling proportions", ok,
              f"awake/drowsy/unlabeled = {counts} (want 6000/2220/1780 +-1), "
              f"exp-invariant={invariant}")
    assert ok


def test_ghm_reconstruction_and_energy(criterion):
    rng = np.random.default_rng(2)
    worst_rec, worst_energy, leaves_ok = 0.0, 0.0, True
    for _ in range(100):
        n = int(rng.integers(16, 4097))
        x = rng.standard_normal(n)
        stream = prefilter(x)
        tree = packet_decompose(stream)
        leaves_ok &= len(tree) == 8
        used = tree.length  # vectors actually transformed (multiple of 8)
        back = postfilter(packet_reconstruct(tree))
        worst_rec = max(worst_rec, float(np.max(np.abs(back - x[:2 * used]))))
        e_in = float(np.sum(stream[:used] ** 2))
        worst_energy = max(worst_energy, abs(band_energies(tree).sum() - e_in) / e_in)
    ok = worst_rec <= 1e-10 and worst_energy <= 1e-9 and leaves_ok
    criterion("GHM reconstruction / energy", ok,
              f"max reconstruction error {worst_rec:.2e} (<= 1e-10), max relative energy error "
              f"{worst_energy:.2e} (<= 1e-9), 8 leaves={leaves_ok}")
    assert ok


def test_feature_oracles(criterion):
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(30, 240))
        w = Window(0, 0.0, n / 60.0, 60.0, {"theta": rng.standard_normal(n).cumsum(),
                                            "theta_dot": rng.standard_normal(n) * 3})
        got = statistical36(w).values
        want = np.array(stat18_oracle(w["theta"], 60.0) + stat18_oracle(w["theta_dot"], 60.0))
        worst = max(worst, float(np.max(np.abs(got - want) / np.maximum(1.0, np.abs(want)))))
        m = int(rng.integers(5, 60))
        chans = {c: rng.standard_normal(m) * rng.uniform(0.1, 4) for c in
                 ("theta_dot", "v_x", "a_x", "a_y", "delta")}
        got = temporal15(Window(0, 0.0, m / 10.0, 10.0, chans)).values
        want = np.array([v for c in chans.values() for v in temporal3_oracle(c)])
        worst = max(worst, float(np.max(np.abs(got - want) / np.maximum(1.0, np.abs(want)))))
    ok = worst <= 1e-9
    criterion("feature oracles (36 statistical + 15 temporal)", ok,
              f"max error {worst:.2e} over 100 windows (<= 1e-9)")
    assert ok


def test_statistics_oracles(criterion):
    rng = np.random.default_rng(4)
    worst_stat = 0.0
    for _ in range(50):
        n0, n1 = (int(v) for v in rng.integers(3, 50, 2))
        X = rng.standard_normal((n0 + n1, 5)) * rng.uniform(0.2, 3, 5)
        X[n0:] += rng.uniform(-1, 1, 5)
        y = np.r_[np.zeros(n0, int), np.ones(n1, int)]
        F = anova_f(X, y)
        t, _, p = welch_t(X[:n0], X[n0:])
        for j in range(5):
            tt, _, pp = welch_oracle(X[:n0, j], X[n0:, j])
            ff = anova_oracle(X[:, j], y)
            worst_stat = max(worst_stat, abs(F[j] - ff) / max(1.0, ff),
                             abs(t[j] - tt) / max(1.0, abs(tt)), abs(p[j] - pp))
    worst_auc = 0.0
    for _ in range(1000):
        n = int(rng.integers(2, 80))
        y = rng.integers(0, 2, n)
        y[:2] = [0, 1]
        s = np.round(rng.standard_normal(n), int(rng.integers(0, 3)))
        worst_auc = max(worst_auc, abs(auc_score(y, s) - mann_whitney_auc(y, s)))
    ok = worst_stat <= 1e-8 and worst_auc <= 1e-12
    criterion("statistics oracles", ok,
              f"F/t/p max error {worst_stat:.2e} (<= 1e-8), AUC vs Mann-Whitney "
              f"{worst_auc:.2e} over 1000 sets (<= 1e-12)")
    assert ok


def test_svm_dual(criterion):
    rng = np.random.default_rng(5)
    worst_feas, worst_gap = 0.0, 0.0
    for _ in range(20):
        y = np.r_[np.zeros(15, int), np.ones(15, int)]
        X = rng.standard_normal((30, 2)) + rng.uniform(0.3, 3) * y[:, None]
        C = float(rng.choice([0.5, 1.0, 5.0]))
        m = SVM(C=C).fit(X, y)
        worst_feas = max(worst_feas, abs(float(m.alpha_ @ m.y_)),
                         float(max(0.0, -m.alpha_.min(), m.alpha_.max() - C)))
        Z = (X - m.mean_) / m.scale_
        _, best = svm_dual_projected_gradient(kernel_matrix(Z, Z, "rbf", m.gamma_), m.y_, C)
        worst_gap = max(worst_gap, abs(m.dual_objective_ - best))
    two = SVM(C=1e6, kernel="linear").fit(np.array([[-1.0], [1.0]]), np.array([0, 1]))
    boundary = float(two.decision_function(np.array([[0.0]]))[0])
    ok = worst_feas <= 1e-8 and worst_gap <= 1e-3 and abs(boundary) <= 1e-9
    criterion("SVM dual", ok,
              f"feasibility {worst_feas:.1e} (<= 1e-8), objective gap {worst_gap:.1e} "
              f"(<= 1e-3) on 20 problems, 2-point boundary score at 0 = {boundary:.1e}")
    assert ok


def test_rf_split_oracle(criterion):
    rng = np.random.default_rng(6)
    agree = 0
    for _ in range(50):
        X = rng.standard_normal((20, 3))
        y = rng.integers(0, 2, 20)
        y[:2] = [0, 1]
        tree = build_tree(X, y, rng, max_depth=1, features_per_split=3)
        col, thr, best = gini_split(X, y)
        got = (int(tree.feature[0]), float(tree.threshold[0]))
        agree += got == (col, thr) and gini_score(X, y, *got) == best
    X = rng.standard_normal((300, 5))
    y = rng.integers(0, 2, 300)
    acc = float(np.mean(RandomForest(n_trees=10, bootstrap=False).fit(X, y).predict(X) == y))
    ok = agree == 50 and acc == 1.0
    criterion("RF split oracle / memorisation", ok,
              f"{agree}/50 depth-1 trees match the exhaustive Gini split, training accuracy "
              f"{100 * acc:.1f}% without bootstrap")
    assert ok


def _nearest_neighbour_accuracy(examples, split):
    tr, te = examples.subset(split["train"]), examples.subset(split["test"])
    mu, sd = tr.X.mean(axis=0), tr.X.std(axis=0)
    sd[sd == 0] = 1.0
    A, B = (tr.X - mu) / sd, (te.X - mu) / sd
    d = (B * B).sum(1)[:, None] + (A * A).sum(1)[None, :] - 2 * B @ A.T
    return 100.0 * float(np.mean(tr.y[np.argmin(d, axis=1)] == te.y))


def test_end_to_end_rf(criterion, separable_sessions):
    cfg = preset("rf", "c2")
    t0 = time.perf_counter()
    rep = run_experiment(cfg, separable_sessions)
    dt = time.perf_counter() - t0
    again = run_experiment(cfg, separable_sessions)
    same = report_json(rep) == report_json(again)
    acc, auc = rep["metrics"]["accuracy"], rep["metrics"]["auc"]
    ex, _ = build_examples(separable_sessions, cfg)
    nn = _nearest_neighbour_accuracy(ex, split_examples(ex, cfg.split, cfg.seed)[0])
    ok = acc >= 95.0 and auc >= 0.97 and dt < 60.0 and same
    criterion("end-to-end RF C2 (separable profile)", ok,
              f"test accuracy {acc:.1f}% (>= 95), AUC {auc:.4f} (>= 0.97), {dt:.1f} s (< 60), "
              f"deterministic={same}; nearest-neighbour check {nn:.1f}%")
    assert ok


@pytest.mark.slow
def test_leakage_reproduction(criterion):
    diffs, reads = [], []
    for seed in range(10):
        sessions = synth_dataset(named_profile("noisy", duration=600.0), 2, seed=seed)
        c1, c2 = preset("svma", "c1"), preset("svma", "c2")
        c1.seed = c2.seed = seed
        c1.leakage_ack = True
        cache = {}
        r1, r2 = run_experiment(c1, sessions, cache), run_experiment(c2, sessions, cache)
        diffs.append(r1["metrics"]["accuracy"] - r2["metrics"]["accuracy"])
        reads.append(r2["test_reads_before_evaluation"])
    med = float(np.median(diffs))
    ok = med > 0 and not any(reads)
    criterion("leakage reproduction (svma C1 vs C2, noisy profile)", ok,
              f"median accuracy gap {med:+.2f} points over 10 seeds (> 0), "
              f"{sum(d > 0 for d in diffs)}/10 positive, C2 pre-evaluation test reads {sum(reads)}")
    assert ok


def test_compare_determinism(criterion, separable_sessions):
    def run():
        cfgs = [preset(m, "c2") for m in METHODS]
        cfgs[3].model = {"kind": "rf", "config": {"n_trees": 50}}
        cfgs[0].selection = {**cfgs[0].selection, "budget": 60}
        return report_json(compare(cfgs, separable_sessions[:2]))
    a, b = run(), run()
    ok = a == b and "timestamps" not in a
    criterion("compare determinism", ok,
              f"byte-identical report JSON: {a == b} ({len(a.encode())} bytes)")
    assert ok
