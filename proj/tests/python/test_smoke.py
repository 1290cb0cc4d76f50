import math
import warnings

import numpy as np
import pytest

import semshift as ss


def random_space(label, n=40, d=5, seed=0, freq=True):
    rng = np.random.default_rng(seed)
    words = [f"t{i}" for i in range(n)]
    return ss.EmbeddingSpace(label, words, rng.normal(size=(n, d)), list(range(n, 0, -1)) if freq else None)


def test_space_roundtrip(tmp_path):
    s = random_space("a")
    assert len(s) == 40 and s.dim == 5 and "t3" in s
    ss.save_embeddings(s, tmp_path / "a.vec")
    back = ss.load_embeddings(tmp_path / "a.vec")
    assert back.label == "a"
    assert back.words == s.words
    np.testing.assert_allclose(back.vectors, s.vectors, atol=1e-6)


def test_bad_input_raises(tmp_path):
    (tmp_path / "bad.vec").write_text("2 3\nx 1 2\n")
    with pytest.raises(ss.FormatError):
        ss.load_embeddings(tmp_path / "bad.vec")
    with pytest.raises(ss.IoError):
        ss.load_embeddings(tmp_path / "missing.vec")


def test_rotation_recovered_and_stability_one():
    a = random_space("a")
    q, _ = np.linalg.qr(np.random.default_rng(9).normal(size=(5, 5)))
    b = ss.EmbeddingSpace("b", a.words, a.vectors @ q, a.frequencies)
    m = ss.fit_rotation(a, b, anchors=30)
    np.testing.assert_allclose(m.rotation, q, atol=1e-9)
    table = ss.stability_table(a, b, anchors=30)
    assert len(table) == 40
    assert all(abs(r.stab - 1.0) < 1e-9 for r in table)


def test_union_scope_sentinel():
    a = random_space("a")
    b = ss.EmbeddingSpace("b", a.words[:35], a.vectors[:35], a.frequencies[:35])
    table = ss.stability_table(a, b, anchors=30, scope="union")
    missing = [r for r in table if r.missing]
    assert len(missing) == 5
    assert all(r.stab == ss.MISSING_STABILITY for r in missing)


def test_spearman_matches_formula():
    x = [3.0, 1.0, 4.0, 1.5, 5.0, 9.0, 2.0]
    y = [2.0, 7.0, 1.0, 8.0, 2.5, 0.5, 3.0]
    rx = np.argsort(np.argsort(x)) + 1
    ry = np.argsort(np.argsort(y)) + 1
    n = len(x)
    expected = 1 - 6 * np.sum((rx - ry) ** 2) / (n * (n * n - 1))
    assert math.isclose(ss.spearman(x, y), expected, rel_tol=1e-12)
    with pytest.raises(ss.InvalidArgument):
        ss.spearman([1.0, 2.0], [1.0, 2.0])


def test_kmeans_and_pca():
    rng = np.random.default_rng(1)
    centers = np.eye(4)[:3] * 5
    data = np.vstack([c + rng.normal(scale=0.1, size=(15, 4)) for c in centers])
    sweep = ss.sweep_k(data, 2, 6, restarts=3)
    assert sweep.best_k == 3
    assert len(set(sweep.best.assignments)) == 3
    pca = ss.pca_2d(data)
    assert pca.points.shape == (45, 2)
    cov = np.cov(data, rowvar=False)
    top = np.sort(np.linalg.eigvalsh(cov))[::-1][:2]
    np.testing.assert_allclose(pca.explained_variance, top, rtol=1e-9)


def test_preprocess_and_train():
    assert ss.preprocess_document("Stay HOME #StayHome http://x.co @bob", min_tokens=1) == ["stay", "home", "#stayhome"]
    assert ss.preprocess_document("one two", min_tokens=3) is None
    docs = [["aa", "bb", "cc", "dd"]] * 50
    cfg = ss.TrainConfig()
    cfg.dim, cfg.min_count, cfg.epochs, cfg.seed = 6, 1, 2, 5
    s1 = ss.train(docs, cfg, label="p")
    s2 = ss.train(docs, cfg, label="p")
    assert s1.words == s2.words
    np.testing.assert_array_equal(s1.vectors, s2.vectors)
    cfg.lr_start = 2 * ss.MAX_LEARNING_RATE
    with pytest.raises(ss.InvalidArgument):
        ss.train(docs, cfg)


def test_warnings_are_python_warnings():
    a = random_space("a", n=10)
    b = random_space("b", n=10, seed=1)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        ss.fit_rotation(a, b, anchors=50)
    assert any(issubclass(w.category, RuntimeWarning) for w in caught)
