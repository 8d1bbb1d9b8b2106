import numpy as np
import pytest
from hypothesis import given, strategies as st

from evdenoise import NOISE, REAL, EventStream, NoiseSpec, add_ba_noise, add_hot_pixel_noise, add_noise
from evdenoise.noise import noise_count


def clean(n=1000, seed=0):
    rng = np.random.default_rng(seed)
    return EventStream.from_arrays(rng.integers(0, 64, n), rng.integers(0, 48, n),
                                   np.sort(rng.random(n)) * 2.0 + 0.5, width=64, height=48)


def test_zero_ratio_only_forces_labels():
    s = clean(50)
    out = add_ba_noise(s, 0.0, seed=1)
    assert np.array_equal(out.t, s.t) and np.array_equal(out.x, s.x)
    assert (out.label == REAL).all()


def test_ba_exact_count_and_ranges():
    s = clean()
    out = add_ba_noise(s, 0.10, seed=3)
    noise = out.label == NOISE
    assert noise.sum() == 100 and (out.label == REAL).sum() == 1000
    assert out.t[noise].min() >= s.t_min and out.t[noise].max() <= s.t_max
    assert out.x.max() < 64 and out.y.max() < 48
    assert np.all(np.diff(out.t) >= 0)


def test_ba_is_deterministic():
    s = clean()
    assert add_ba_noise(s, 0.1, seed=9) == add_ba_noise(s, 0.1, seed=9)
    assert add_ba_noise(s, 0.1, seed=9) != add_ba_noise(s, 0.1, seed=10)


def test_ba_rejects_empty_stream():
    empty = EventStream.from_arrays([], [], [], width=4, height=4)
    with pytest.raises(ValueError):
        add_ba_noise(empty, 0.1, seed=0)
    assert len(add_ba_noise(empty, 0.0, seed=0)) == 0


def test_hot_pixels_four_pixels_five_each():
    s = clean()
    out = add_hot_pixel_noise(s, 0.02, 4, seed=5)
    noise = out.label == NOISE
    assert noise.sum() == 20
    pix = {}
    for x, y, t in zip(out.x[noise], out.y[noise], out.t[noise]):
        pix.setdefault((x, y), []).append(t)
    assert len(pix) == 4
    assert sorted(len(v) for v in pix.values()) == [5, 5, 5, 5]
    for ts in pix.values():
        assert np.all(np.diff(ts) > 0)


def test_single_hot_pixel():
    out = add_hot_pixel_noise(clean(), 0.005, 1, seed=2)
    noise = out.label == NOISE
    assert len(set(zip(out.x[noise].tolist(), out.y[noise].tolist()))) == 1


def test_hot_pixel_gaps_within_jitter_band():
    s = clean()
    out = add_hot_pixel_noise(s, 0.06, 3, seed=11)
    noise = out.label == NOISE
    for px in set(zip(out.x[noise].tolist(), out.y[noise].tolist())):
        sel = noise & (out.x == px[0]) & (out.y == px[1])
        ts = out.t[sel]
        nominal = (s.t_max - s.t_min) / ts.shape[0]
        gaps = np.diff(ts) / nominal
        assert gaps.min() >= 0.8 - 1e-12 and gaps.max() <= 1.2 + 1e-12
        assert ts.min() >= s.t_min and ts.max() <= s.t_max


def test_hot_pixel_budget_errors():
    with pytest.raises(ValueError):
        add_hot_pixel_noise(clean(), 0.002, 3, seed=0)  # 2 events, 3 pixels
    with pytest.raises(ValueError):
        add_hot_pixel_noise(clean(), 0.02, 0, seed=0)


def test_twelve_percent_total():
    for ba, hot in [(0.06, 0.06), (0.08, 0.04), (0.10, 0.02)]:
        out = add_noise(clean(), NoiseSpec(ba, hot, 4, seed=1))
        assert len(out) == 1120
        assert (out.label == NOISE).sum() == 120


def test_noise_count_rounds_half_up():
    assert noise_count(0.5, 1) == 1
    assert noise_count(0.25, 2) == 1
    assert noise_count(0.1, 1000) == 100
    assert noise_count(0.0, 1000) == 0


def test_chained_injection_keeps_noise_and_clean_count():
    s = clean(200)
    once = add_ba_noise(s, 0.1, seed=1)
    twice = add_hot_pixel_noise(once, 0.1, 2, seed=2)
    assert (twice.label == REAL).sum() == 200
    assert (twice.label == NOISE).sum() == 40


@given(st.integers(1, 300), st.floats(0, 0.5), st.floats(0, 0.5), st.integers(0, 2**32))
def test_injection_preserves_originals(n, ba, hot, seed):
    s = clean(n, seed=seed % 97)
    n_hot = noise_count(hot, n)
    out = add_noise(s, NoiseSpec(ba, hot, max(1, min(2, n_hot)) if n_hot else 1, seed))
    real = out.label == REAL
    assert real.sum() == n
    # originals survive untouched (same multiset of (t, x, y))
    orig = sorted(zip(s.t.tolist(), s.x.tolist(), s.y.tolist()))
    kept = sorted(zip(out.t[real].tolist(), out.x[real].tolist(), out.y[real].tolist()))
    assert orig == kept
    assert (~real).sum() == noise_count(ba, n) + n_hot
