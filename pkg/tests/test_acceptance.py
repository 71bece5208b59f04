"""Acceptance gate: one PASS/FAIL line per criterion, each at its stated tolerance and time budget."""
import csv
import time

import numpy as np
import pytest

import oracles
from texturekit.augment import AugmentSpec
from texturekit.cli import main
from texturekit.evaluate import (FeatureCache, cluster_configs, confusion, cross_validate, make_folds,
                                 metrics_from_confusion, roc_auc)
from texturekit.evaluate.cv import MetricSummary
from texturekit.explain import explain_table, shap_bruteforce, top_share, treeshap_matrix
from texturekit.features import FeatureConfig, FeatureTable, compute_glcm, feature_names, first_order, fit_config
from texturekit.features.glcm import haralick_single
from texturekit.features.lbp import local_variance, riu2_histogram
from texturekit.learners import RFParams, train_forest
from texturekit.select import sbfs
from texturekit.synth import SyntheticSpec, synth_dataset

BEST_RF = RFParams(n_trees=100, max_depth=0, min_samples_leaf=2, min_samples_split=1)


@pytest.fixture
def verdict(capsys):
    def report(n, title, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {n} ({title}): {detail}")
        assert ok, detail
    return report


@pytest.fixture(scope="module")
def e2e():
    """40 synthetic patients, 39 augmentations per training sample, 5-fold CV with the best RF config."""
    seed = 0
    t0 = time.perf_counter()
    d = synth_dataset(SyntheticSpec(n_patients=40, samples_per_patient=2, class_effect="mixed", seed=seed))
    config = FeatureConfig()
    aug = AugmentSpec(per_sample_count=39)
    cache = FeatureCache(d, "none", config, aug, seed)
    summary = cross_validate(d, "none", BEST_RF, k=5, seed=seed, augment=aug, config=config, cache=cache)
    cv_seconds = time.perf_counter() - t0

    raws, ys = [], []
    for i, s in enumerate(d):
        raws.append(cache.original(i))
        ys.append(s.label)
        for _, r in cache.children(i):
            raws.append(r)
            ys.append(s.label)
    fc = fit_config(raws, config)
    X = np.array([r.assemble(fc) for r in raws])
    X = np.where(np.isfinite(X), X, 0.0)
    model = train_forest(X, np.array(ys), BEST_RF, seed=seed, feature_names=feature_names(fc))
    originals = np.array([cache.original(i).assemble(fc) for i in range(len(d))])
    originals = np.where(np.isfinite(originals), originals, 0.0)
    return dict(dataset=d, summary=summary, cv_seconds=cv_seconds, model=model, X=X, originals=originals)


def test_criterion_1_feature_oracles(verdict):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    err = dict(first_order=0.0, glcm=0.0, haralick=0.0, lbp=0.0, var=0.0, f14_dense=0.0)
    n_patches = 50
    for _ in range(n_patches):
        g = rng.random((16, 16))
        err["first_order"] = max(err["first_order"],
                                 np.abs(np.subtract(first_order(g), oracles.first_order(g))).max())
        for direction in (0, 45, 90, 135):
            P = compute_glcm(g, 32, 1, direction)
            err["glcm"] = max(err["glcm"], np.abs(P - oracles.glcm(g, 32, 1, direction)).max())
            h = haralick_single(P)[:13]
            err["haralick"] = max(err["haralick"], np.abs(h - np.array(oracles.haralick_1_13(P))).max())
        for points, radius in ((8, 1.0), (16, 2.0)):
            err["lbp"] = max(err["lbp"], np.abs(riu2_histogram(g, points, radius)
                                                - oracles.lbp_riu2_hist(g, points, radius)).max())
        err["var"] = max(err["var"], np.abs(local_variance(g) - np.array(oracles.local_variances(g))).max())
    flagged = 0
    for _ in range(n_patches):
        P = rng.random((32, 32))
        P = P + P.T
        P /= P.sum()
        f14 = haralick_single(P)[13]
        if np.isnan(f14):
            flagged += 1
        else:
            err["f14_dense"] = max(err["f14_dense"], abs(f14 - oracles.haralick_14(P)))
    elapsed = time.perf_counter() - t0
    ok = (err["first_order"] <= 1e-12 and max(err["glcm"], err["haralick"], err["lbp"], err["var"]) <= 1e-9
          and err["f14_dense"] <= 1e-6 and elapsed < 30)
    detail = ", ".join(f"{k} max err {v:.1e}" for k, v in err.items())
    verdict(1, "feature oracles", ok, f"{n_patches} patches; {detail}; f14 flagged {flagged}; {elapsed:.1f}s")


def test_criterion_2_shap_exactness(verdict, e2e):
    t0 = time.perf_counter()
    rng = np.random.default_rng(77)
    worst = 0.0
    n_forests = 50
    for k in range(n_forests):
        n_feat = int(rng.integers(2, 11))
        n_trees = int(rng.integers(1, 21))
        depth = int(rng.integers(1, 5))
        X = rng.normal(size=(60, n_feat))
        y = (X @ rng.normal(size=n_feat) + rng.normal(scale=0.5, size=60) > 0).astype(int)
        m = train_forest(X, y, RFParams(n_trees=n_trees, max_depth=depth, min_samples_leaf=1), seed=k)
        Xq = rng.normal(size=(2, n_feat))
        phi = treeshap_matrix(m, Xq)
        for x, p in zip(Xq, phi):
            worst = max(worst, np.abs(p - shap_bruteforce(m, x)).max())
    X100 = np.vstack([e2e["originals"], e2e["X"][1:40:2]])[:100]
    rep = explain_table(e2e["model"], X100)
    local = rep.local_accuracy_error()
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-8 and local <= 1e-9 and X100.shape == (100, 159) and elapsed < 120
    verdict(2, "SHAP exactness", ok, f"{n_forests} forests max |treeshap - bruteforce| {worst:.1e}; "
                                     f"local accuracy {local:.1e} on 100x159; {elapsed:.1f}s")


def test_criterion_3_metric_correctness(verdict):
    rng = np.random.default_rng(5)
    worst, conf_ok = 0.0, True
    for _ in range(1000):
        n = int(rng.integers(2, 60))
        y = rng.integers(0, 2, n)
        y[0], y[1] = 0, 1
        s = rng.random(n) if rng.random() < 0.5 else rng.integers(0, 5, n) / 4.0
        worst = max(worst, abs(roc_auc(s, y) - oracles.auc_pairwise(s, y)))
        tp, fp, fn, tn = confusion(s, y)
        conf_ok &= (tp, fp, fn, tn) == oracles.confusion_loop(s, y)
        acc, f1, sens, spec = metrics_from_confusion(tp, fp, fn, tn)
        conf_ok &= acc == (tp + tn) / n
        conf_ok &= f1 == (2 * tp / (2 * tp + fp + fn) if 2 * tp + fp + fn else 0.0)
        conf_ok &= sens == (tp / (tp + fn) if tp + fn else 0.0)
        conf_ok &= spec == (tn / (tn + fp) if tn + fp else 0.0)
    verdict(3, "metric correctness", worst <= 1e-12 and conf_ok,
            f"1000 draws, max |auc - pairwise| {worst:.1e}, confusion arithmetic exact: {conf_ok}")


def test_criterion_4_end_to_end(verdict, e2e):
    s = e2e["summary"]
    ok = (s.auc[0] >= 0.90 and s.sensitivity[0] >= 0.75 and s.specificity[0] >= 0.75
          and e2e["cv_seconds"] < 300 and not s.skipped_auc_folds)
    verdict(4, "end-to-end synthetic run", ok,
            f"AUC {s.auc[0]:.3f}+-{s.auc[1]:.3f}, sensitivity {s.sensitivity[0]:.3f}, "
            f"specificity {s.specificity[0]:.3f}; {e2e['cv_seconds']:.1f}s")


def test_criterion_5_attribution_sparsity(verdict, e2e):
    rep = explain_table(e2e["model"], e2e["originals"])
    share = top_share(rep, 15)
    verdict(5, "attribution sparsity", share >= 0.70,
            f"top 15 of {rep.phi.shape[1]} features carry {share:.3f} of mean |phi|")


def _sbfs_table(seed=0, n=80, shift=1.5):
    rng = np.random.default_rng(seed)
    pats = [f"P{i // 2:03d}" for i in range(n)]
    y = np.repeat(rng.permutation(np.arange(n // 2) % 2), 2)
    informative = rng.normal(size=(n, 20)) + shift * y[:, None]
    noise = rng.normal(size=(n, 20))
    names = ([f"inf{i:02d}" for i in range(20)] + [f"dup{i:02d}" for i in range(20)]
             + [f"noise{i:02d}" for i in range(20)])
    V = np.hstack([informative, informative.copy(), noise])
    return FeatureTable(tuple(f"S{i}" for i in range(n)), tuple(pats), y, V, tuple(names))


def test_criterion_6_sbfs(verdict):
    t = _sbfs_table()
    t0 = time.perf_counter()
    tr = sbfs(t, RFParams(n_trees=3, features_per_split="all", min_samples_leaf=1), make_folds(t, 5, seed=0))
    elapsed = time.perf_counter() - t0
    final = set(tr.final_subset)
    pairs = sum(f"inf{i:02d}" in final and f"dup{i:02d}" in final for i in range(20))
    ok = tr.final_criterion >= tr.full_criterion and pairs == 0 and len(final) <= 30 and elapsed < 180
    verdict(6, "SBFS", ok, f"criterion {tr.final_criterion:.4f} vs full {tr.full_criterion:.4f}, "
                           f"{len(final)} of 60 kept, {pairs} duplicate pairs, {len(tr.evaluations)} "
                           f"evaluations; {elapsed:.1f}s")


def test_criterion_7_config_clustering(verdict):
    aris = []
    for seed in range(10):
        rng = np.random.default_rng(seed)
        base = rng.uniform(0.3, 0.5, size=5)
        centres = np.array([base, base + 0.2, base + 0.4])
        truth = np.repeat(np.arange(3), 12)
        ss = []
        for i, c in enumerate(truth):
            m = centres[c] + rng.normal(scale=0.01, size=5)
            ss.append(MetricSummary(f"c{i:02d}", *((float(v), 0.0) for v in m)))
        cl = cluster_configs(ss, 3, seed=seed)
        aris.append(oracles.adjusted_rand_index(cl.labels, truth))
    verdict(7, "config clustering", min(aris) >= 0.9, f"min ARI over 10 seeds {min(aris):.3f}")


ARTIFACTS = ("features.csv", "metrics.csv", "folds.csv", "models/model.json", "shap/shap_values.csv",
             "shap/summary.csv")


def _pipeline(data, out, threads):
    common = ["--out", str(out), "--seed", "9", "--threads", str(threads)]
    manifest = str(data / "manifest.csv")
    steps = [["extract", "--dataset", manifest, "--augment", "--augment-count", "3"],
             ["cv", "--dataset", manifest, "--augment-count", "3", "--trees", "20"],
             ["train", "--trees", "20"],
             ["explain"]]
    return [main([*s, *common]) for s in steps]


def test_criterion_8_determinism(verdict, tmp_path):
    data = tmp_path / "data"
    assert main(["synth", "--data-dir", str(data), "--patients", "8", "--seed", "9",
                 "--out", str(tmp_path / "synth")]) == 0
    codes1 = _pipeline(data, tmp_path / "t1", 1)
    codes8 = _pipeline(data, tmp_path / "t8", 8)
    same = {a: (tmp_path / "t1" / a).read_bytes() == (tmp_path / "t8" / a).read_bytes() for a in ARTIFACTS}
    ok = codes1 == codes8 == [0, 0, 0, 0] and all(same.values())
    verdict(8, "determinism", ok, f"threads 1 vs 8 byte-identical: "
                                  + ", ".join(f"{a}={v}" for a, v in same.items()))


def test_criterion_9_leakage_guard(verdict, e2e, tmp_path):
    d = e2e["dataset"]
    patient_of = {s.sample_id: s.patient_id for s in d}
    violations, augmented_seen = 0, 0
    for f in e2e["summary"].folds:
        test_patients = {patient_of[i] for i in f.test_ids}
        for sid in f.train_ids:
            parent = sid.split("~", 1)[0]
            augmented_seen += "~" in sid
            violations += patient_of[parent] in test_patients
        violations += any("~" in i for i in f.test_ids)
    # the same check over the lineage file written by the CLI
    data = tmp_path / "data"
    main(["synth", "--data-dir", str(data), "--patients", "6", "--samples-per-patient", "3",
          "--out", str(tmp_path / "s")])
    code = main(["cv", "--dataset", str(data / "manifest.csv"), "--augment-count", "2", "--trees", "5",
                 "--out", str(tmp_path / "r"), "--threads", "1"])
    with open(tmp_path / "r" / "folds.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    by_id = {s.sample_id: s.patient_id for s in synth_dataset(SyntheticSpec(n_patients=6, samples_per_patient=3))}
    for fold in {r["fold"] for r in rows}:
        test_p = {by_id[r["parent_id"]] for r in rows if r["fold"] == fold and r["role"] == "test"}
        for r in rows:
            if r["fold"] == fold and r["role"] == "train":
                violations += by_id[r["parent_id"]] in test_p
    ok = code == 0 and violations == 0 and augmented_seen > 0
    verdict(9, "leakage guard", ok, f"{violations} violations over {augmented_seen} augmented training rows "
                                    f"and {len(rows)} lineage records")
