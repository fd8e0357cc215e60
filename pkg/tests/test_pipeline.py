import numpy as np
import pytest

from conftest import fast_config, random_dataset
from hamcredit.experiment.training import run_training
from hamcredit.metrics import roc_auc
from hamcredit.mlp import predict_proba
from hamcredit.numerics import RngStream
from hamcredit.pipeline import (
    DataError,
    Dataset,
    DriftGenConfig,
    SmoteConfig,
    audit_hook,
    load_csv,
    smote_oversample,
    smote_samples,
    synthesize_credit_data,
    temporal_split,
    time_based_folds,
    write_csv,
)
from hamcredit.pipeline.smote import n_synthetic, nearest_neighbors
from hamcredit.pipeline.synthetic import coefficients


def _write(path, text):
    path.write_text(text)
    return path


# ------------------------------------------------------------------- dataset


def test_dataset_invariants():
    with pytest.raises(DataError):
        Dataset(np.zeros((2, 1)), [0, 2], [0, 0], ("a",))
    with pytest.raises(DataError):
        Dataset(np.zeros((2, 1)), [0, 1], [0], ("a",))
    with pytest.raises(DataError):
        Dataset(np.zeros((2, 1)), [0, 1], [0.5, 1], ("a",))
    with pytest.raises(DataError):
        Dataset(np.zeros((2, 1)), [0, 1], [0, 1], ("a", "b"))


def test_load_small_file(tmp_path):
    p = _write(tmp_path / "d.csv", "a,b,default_flag,orig_period\n1,2,0,3\n4,5,1,3\n6,7.5,0,4\n")
    ds = load_csv(p)
    assert len(ds) == 3
    assert ds.feature_names == ("a", "b")
    np.testing.assert_array_equal(ds.features[2], [6.0, 7.5])
    np.testing.assert_array_equal(ds.labels, [0, 1, 0])
    np.testing.assert_array_equal(ds.time_index, [3, 3, 4])
    assert load_csv(p, ["b"]).feature_names == ("b",)


@pytest.mark.parametrize(
    "text, fragment",
    [
        ("a,default_flag,orig_period\n1,2,0\n", "label must be 0 or 1"),
        ("a,orig_period\n1,0\n", "missing column 'default_flag'"),
        ("", "empty file"),
        ("a,default_flag,orig_period\n", "no data rows"),
        ("a,default_flag,orig_period\n1,0,0\nx,1,0\n", ":3:a: not a number"),
        ("a,default_flag,orig_period\n,0,0\n", "not a number"),
        ("a,default_flag,orig_period\n1,0\n", "expected 3 cells"),
        ("a,default_flag,orig_period\n1,0,1.5\n", "period must be an integer"),
        ("a,default_flag,orig_period\nnan,0,1\n", "non-finite"),
    ],
)
def test_load_errors(tmp_path, text, fragment):
    p = _write(tmp_path / "bad.csv", text)
    with pytest.raises(DataError, match=fragment.replace("(", r"\(")):
        load_csv(p)


def test_csv_round_trip(tmp_path, np_rng):
    ds = random_dataset(np_rng, n=25)
    ds = ds.with_features(ds.features * 10.0 ** np_rng.uniform(-8, 8, size=ds.features.shape))
    write_csv(ds, tmp_path / "a.csv")
    back = load_csv(tmp_path / "a.csv")
    np.testing.assert_allclose(back.features, ds.features, rtol=1e-12, atol=0)
    assert back.is_identical(ds)
    write_csv(back, tmp_path / "b.csv")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


# -------------------------------------------------------------------- splits


def _periods(times):
    n = len(times)
    return Dataset(np.arange(n, dtype=float)[:, None], np.zeros(n), times, ("x",))


def test_temporal_split_definition():
    ds = _periods(np.arange(1, 11))
    sp = temporal_split(ds, 5, 8)
    train, val, oot = sp.apply(ds)
    assert train.time_index.tolist() == [1, 2, 3, 4]
    assert val.time_index.tolist() == [5, 6, 7]
    assert oot.time_index.tolist() == [8, 9, 10]


def test_temporal_split_errors():
    with pytest.raises(ValueError, match="train, oot"):
        temporal_split(_periods(np.full(6, 3)), 3, 5)
    with pytest.raises(ValueError):
        temporal_split(_periods(np.arange(10)), 5, 5)


def test_temporal_split_order_independent(np_rng):
    times = np_rng.integers(0, 12, size=60)
    ds = _periods(times)
    perm = np_rng.permutation(60)
    a = temporal_split(ds, 4, 9)
    b = temporal_split(ds.subset(perm), 4, 9)
    for ia, ib in ((a.train, b.train), (a.validation, b.validation), (a.oot, b.oot)):
        assert set(ds.row_id[ia]) == set(ds.subset(perm).row_id[ib])


def test_folds_examples():
    ds = _periods(np.arange(8))
    pairs = time_based_folds(ds, 4)
    assert len(pairs) == 3
    tr, va = pairs[0]
    assert tr.tolist() == [0, 1] and va.tolist() == [2, 3]
    assert [len(v) for _, v in pairs] == [2, 2, 2]
    assert pairs[2][0].tolist() == list(range(6))


def test_folds_remainder_goes_to_early_folds():
    pairs = time_based_folds(_periods(np.arange(10)), 4)
    assert [len(pairs[0][0])] + [len(v) for _, v in pairs] == [3, 3, 2, 2]


def test_folds_errors():
    with pytest.raises(ValueError):
        time_based_folds(_periods(np.arange(8)), 1)
    with pytest.raises(ValueError):
        time_based_folds(_periods(np.arange(3)), 4)


@pytest.mark.parametrize("k", range(2, 9))
def test_folds_monotone(k, np_rng):
    ds = _periods(np_rng.integers(0, 20, size=97))
    pairs = time_based_folds(ds, k)
    assert len(pairs) == k - 1
    for tr, va in pairs:
        assert ds.time_index[tr].max() <= ds.time_index[va].min()
        assert not set(tr) & set(va)


# --------------------------------------------------------------------- SMOTE


def test_smote_config_validation():
    with pytest.raises(ValueError):
        SmoteConfig(k_neighbors=0)
    with pytest.raises(ValueError):
        SmoteConfig(target_ratio=1.5)


def test_nearest_neighbors_ties_by_index():
    x = np.array([[0.0], [1.0], [-1.0], [2.0]])
    np.testing.assert_array_equal(nearest_neighbors(x, 2), [[1, 2], [0, 3], [0, 1], [1, 0]])


def test_identical_minority_rows():
    x = np.vstack([np.tile([1.5, -2.0], (3, 1)), np.arange(12.0).reshape(6, 2)])
    ds = Dataset(x, [1, 1, 1, 0, 0, 0, 0, 0, 0], np.zeros(9), ("a", "b"))
    synth, _, _ = smote_samples(ds, SmoteConfig(k_neighbors=2))
    assert len(synth) == 3
    assert np.all(synth.features == [1.5, -2.0])


class _ZeroUniform(RngStream):
    def random(self, size=None):
        return np.zeros(size)


def test_zero_gap_reproduces_donor(np_rng):
    ds = random_dataset(np_rng, n=50, rate=0.2)
    synth, donor, _ = smote_samples(ds, SmoteConfig(k_neighbors=1), _ZeroUniform(7))
    assert len(synth) > 0
    assert np.array_equal(synth.features, ds.features[donor])


def test_two_minority_points_segment():
    x = np.array([[0.0, 1.0], [2.0, -3.0]] + [[float(i), float(-i)] for i in range(8)])
    y = [1, 1] + [0] * 8
    ds = Dataset(x, y, np.arange(10), ("a", "b"))
    synth, donor, partner = smote_samples(ds, SmoteConfig(k_neighbors=1, target_ratio=1.0))
    assert len(synth) == 6
    lo = np.minimum(x[0], x[1]) - 1e-12
    hi = np.maximum(x[0], x[1]) + 1e-12
    assert np.all((synth.features >= lo) & (synth.features <= hi))
    # collinear with the two endpoints
    d = synth.features - x[0]
    cross = d[:, 0] * (x[1] - x[0])[1] - d[:, 1] * (x[1] - x[0])[0]
    np.testing.assert_allclose(cross, 0.0, atol=1e-12)
    assert set(donor) | set(partner) == {0, 1}
    np.testing.assert_array_equal(synth.labels, 1)
    np.testing.assert_array_equal(synth.time_index, ds.time_index[donor])


def test_segment_containment_random(np_rng):
    ds = random_dataset(np_rng, n=300, d=4, rate=0.15)
    synth, donor, partner = smote_samples(ds, SmoteConfig(k_neighbors=3), RngStream(5))
    a, b = ds.features[donor], ds.features[partner]
    assert np.all(synth.features >= np.minimum(a, b) - 1e-12)
    assert np.all(synth.features <= np.maximum(a, b) + 1e-12)


@pytest.mark.parametrize("ratio", [1.0, 0.5, 0.33])
def test_post_smote_ratio(np_rng, ratio):
    ds = random_dataset(np_rng, n=400, rate=0.1)
    out = smote_oversample(ds, SmoteConfig(target_ratio=ratio), RngStream(3))
    n_min = int(out.labels.sum())
    n_maj = len(out) - n_min
    assert abs(n_min - ratio * n_maj) <= 1
    assert out.subset(np.arange(len(ds))).is_identical(ds)
    assert np.all(out.row_id[len(ds):] == -1)


def test_no_oversampling_when_already_balanced():
    assert n_synthetic(10, 8, 1.0) == 0


def test_smote_errors(np_rng):
    one = Dataset(np.zeros((5, 1)), [1, 0, 0, 0, 0], np.zeros(5), ("a",))
    with pytest.raises(ValueError, match="at least 2"):
        smote_oversample(one, SmoteConfig(k_neighbors=1))
    three = Dataset(np_rng.normal(size=(6, 1)), [1, 1, 1, 0, 0, 0], np.zeros(6), ("a",))
    with pytest.raises(ValueError, match="k_neighbors"):
        smote_oversample(three, SmoteConfig(k_neighbors=3))


def test_smote_deterministic(np_rng):
    ds = random_dataset(np_rng, n=120)
    a = smote_oversample(ds, SmoteConfig(), RngStream(9))
    b = smote_oversample(ds, SmoteConfig(), RngStream(9))
    assert a.is_identical(b)


def test_leakage_guard():
    ds = synthesize_credit_data(DriftGenConfig(n_rows=2000, n_features=3, seed=4))
    sp = temporal_split(ds, 6, 8)
    train, val, oot = sp.apply(ds)
    val_copy, oot_copy = val.subset(np.arange(len(val))), oot.subset(np.arange(len(oot)))
    seen = []
    with audit_hook(lambda stage, d: seen.append((stage, set(d.row_id)))):
        smote_oversample(train, SmoteConfig(), RngStream(1))
    assert val.is_identical(val_copy) and oot.is_identical(oot_copy)
    assert seen and seen[0][0] == "smote"
    assert not seen[0][1] & (set(val.row_id) | set(oot.row_id))


# ----------------------------------------------------------------- generator


def test_generator_deterministic():
    cfg = DriftGenConfig(n_rows=500, n_features=3, seed=11)
    assert synthesize_credit_data(cfg).is_identical(synthesize_credit_data(cfg))
    other = synthesize_credit_data(DriftGenConfig(n_rows=500, n_features=3, seed=12))
    assert not other.is_identical(synthesize_credit_data(cfg))


def test_generator_config_validation():
    for bad in ({"horizon_months": 24}, {"base_default_rate": 1.0}, {"drift_magnitude": -1.0},
                {"n_features": 1}):
        with pytest.raises(ValueError):
            DriftGenConfig(**bad)


def test_generator_rates():
    ds = synthesize_credit_data(DriftGenConfig(n_rows=20000, base_default_rate=0.5, seed=2))
    assert 0.48 <= ds.default_rate() <= 0.52
    ds = synthesize_credit_data(DriftGenConfig(n_rows=20000, base_default_rate=0.1, seed=2))
    assert abs(ds.default_rate() - 0.1) <= 0.02
    for t in range(10):
        assert abs(ds.labels[ds.time_index == t].mean() - 0.1) <= 0.02


def test_generator_drift_geometry():
    still = DriftGenConfig(drift_magnitude=0.0)
    np.testing.assert_array_equal(coefficients(still, 0), coefficients(still, 9))
    short, long_ = DriftGenConfig(horizon_months=12), DriftGenConfig(horizon_months=60)

    def angle(cfg):
        a, b = coefficients(cfg, 0), coefficients(cfg, 9)
        return np.arccos(np.dot(a, b) / np.linalg.norm(a) / np.linalg.norm(b))

    assert angle(short) < angle(long_)
    assert angle(short) == pytest.approx(0.05 * 9, rel=1e-9)


def test_generator_without_drift_is_stationary():
    gen = DriftGenConfig(n_rows=30000, n_features=4, base_default_rate=0.2, drift_magnitude=0.0, seed=5)
    ds = synthesize_credit_data(gen)
    early = ds.subset(np.flatnonzero(ds.time_index < 4))
    mid = ds.subset(np.flatnonzero((ds.time_index >= 4) & (ds.time_index < 6)))
    late = ds.subset(np.flatnonzero(ds.time_index >= 7))
    cfg = fast_config(**{"model.hidden_dims": [], "training.max_epochs": 10, "smote.enabled": False})
    result = run_training(cfg, early, mid, RngStream(0))
    auc_mid = roc_auc(predict_proba(result.params, mid.features), mid.labels)
    auc_late = roc_auc(predict_proba(result.params, late.features), late.labels)
    assert abs(auc_mid - auc_late) <= 0.02
