import hashlib

import numpy as np
import pytest

from marsense import (
    ImageFormatError,
    UnsupportedDepthError,
    ball_image,
    downsample_decimate,
    load_image,
    mse,
    psnr,
    quality_report,
    quantize,
    save_image,
    shepp_logan,
    ssim,
)

PHANTOM64_SHA256 = "047d9fa91f39edab41c87441b77c1ae5a9bf3ca4fdfb96e8d26eb5d1eb912a85"


# ---------------------------------------------------------------- file I/O


def test_load_pgm_minimal(tmp_path):
    raw = b"P5\n2 2\n255\n" + bytes([0, 85, 170, 255])
    p = tmp_path / "t.pgm"
    p.write_bytes(raw)
    img = load_image(p)
    assert img.shape == (2, 2)
    assert img.tolist() == [[0.0, 85.0], [170.0, 255.0]]


def test_load_pgm_with_comments(tmp_path):
    raw = b"P5\n# made by hand\n2 1\n# another\n255\n" + bytes([7, 9])
    p = tmp_path / "t.pgm"
    p.write_bytes(raw)
    assert load_image(p).tolist() == [[7.0, 9.0]]


def test_load_pgm_truncated(tmp_path):
    p = tmp_path / "t.pgm"
    p.write_bytes(b"P5\n4 4\n255\n" + bytes(3))
    with pytest.raises(ImageFormatError):
        load_image(p)


def test_load_pgm_wrong_maxval(tmp_path):
    p = tmp_path / "t.pgm"
    p.write_bytes(b"P5\n1 1\n65535\n\x00\x00")
    with pytest.raises(UnsupportedDepthError):
        load_image(p)


def test_load_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_image(tmp_path / "nope.pgm")


def test_save_writes_exact_pgm_bytes(tmp_path):
    img = np.array([[0.0, 85.0], [170.0, 255.0]])
    p = tmp_path / "t.pgm"
    save_image(img, p)
    assert p.read_bytes() == b"P5\n2 2\n255\n" + bytes([0, 85, 170, 255])


def test_save_load_round_trip_256(tmp_path):
    rng = np.random.default_rng(0)
    img = rng.uniform(0, 255, size=(256, 256))
    p = tmp_path / "t.pgm"
    save_image(img, p)
    back = load_image(p)
    assert back.shape == (256, 256)
    assert np.array_equal(back, quantize(img).astype(np.float64))
    # second pass is the identity: rounding already happened
    save_image(back, p)
    assert np.array_equal(load_image(p), back)


def test_save_rounds_and_clamps(tmp_path):
    img = np.array([[127.6, -3.0], [300.0, 12.4]])
    p = tmp_path / "t.pgm"
    save_image(img, p)
    assert load_image(p).tolist() == [[128.0, 0.0], [255.0, 12.0]]


def test_png_round_trip(tmp_path):
    img = np.arange(64, dtype=np.float64).reshape(8, 8) * 4
    p = tmp_path / "t.png"
    save_image(img, p)
    assert np.array_equal(load_image(p), img)


def test_png_rejects_16bit(tmp_path):
    from PIL import Image

    p = tmp_path / "deep.png"
    Image.fromarray(np.zeros((4, 4), dtype=np.uint16)).save(p)
    with pytest.raises(UnsupportedDepthError):
        load_image(p)


def test_png_rejects_rgb(tmp_path):
    from PIL import Image

    p = tmp_path / "rgb.png"
    Image.fromarray(np.zeros((4, 4, 3), dtype=np.uint8), mode="RGB").save(p)
    with pytest.raises(ImageFormatError):
        load_image(p)


# ----------------------------------------------------------------- metrics


def test_psnr_identical_capped():
    img = np.full((8, 8), 42.0)
    assert psnr(img, img) == 100.0
    assert mse(img, img) == 0.0


def test_psnr_maximal_error():
    a = np.zeros((4, 4))
    b = np.full((4, 4), 255.0)
    assert mse(a, b) == 255.0**2
    assert psnr(a, b) == pytest.approx(0.0, abs=1e-12)


def test_psnr_constant_16_offset():
    a = np.zeros((8, 8))
    b = np.full((8, 8), 16.0)
    assert mse(a, b) == 256.0
    assert psnr(a, b) == pytest.approx(10 * np.log10(65025 / 256), rel=1e-12)


def test_psnr_symmetric_and_monotone():
    rng = np.random.default_rng(1)
    a = rng.uniform(0, 255, (8, 8))
    b = a.copy()
    b[0, 0] += 5
    assert psnr(a, b) == psnr(b, a)
    c = a.copy()
    c[0, 0] += 9
    assert psnr(a, c) < psnr(a, b)


def test_psnr_shape_mismatch():
    with pytest.raises(ValueError):
        psnr(np.zeros((4, 4)), np.zeros((4, 5)))


def test_ssim_identity_and_symmetry(phantom64):
    assert ssim(phantom64, phantom64) == pytest.approx(1.0, abs=1e-12)
    other = np.clip(phantom64 + 10, 0, 255)
    assert ssim(phantom64, other) == pytest.approx(ssim(other, phantom64), abs=1e-12)


def test_ssim_frozen_constant_pair():
    a = np.zeros((64, 64))
    b = np.full((64, 64), 255.0)
    assert ssim(a, b) == pytest.approx(9.999000099992488e-05, rel=1e-9)


def test_ssim_frozen_inversion(phantom64):
    assert ssim(phantom64, 255.0 - phantom64) == pytest.approx(-0.2455645642131385, rel=1e-9)
    assert ssim(phantom64, 255.0 - phantom64) < 0


def test_ssim_matches_reference_implementation(phantom64):
    skimage = pytest.importorskip("skimage.metrics")
    rng = np.random.default_rng(3)
    noisy = np.clip(phantom64 + rng.normal(0, 12, phantom64.shape), 0, 255)
    ref = skimage.structural_similarity(
        phantom64, noisy, data_range=255, gaussian_weights=True, sigma=1.5,
        use_sample_covariance=False,
    )
    assert ssim(phantom64, noisy) == pytest.approx(ref, abs=1e-10)


def test_ssim_window_size_check():
    tiny = np.zeros((8, 8))
    with pytest.raises(ValueError):
        ssim(tiny, tiny)


def test_quality_report_consistent(phantom64):
    noisy = np.clip(phantom64 + 3.0, 0, 255)
    rep = quality_report(phantom64, noisy)
    assert rep.mse == pytest.approx(mse(phantom64, noisy))
    assert rep.psnr_db == pytest.approx(psnr(phantom64, noisy))
    assert rep.ssim == pytest.approx(ssim(phantom64, noisy))
    assert -1.0 <= rep.ssim <= 1.0


# ------------------------------------------------------------- decimation


def test_decimate_identity():
    img = np.arange(16.0).reshape(4, 4)
    assert np.array_equal(downsample_decimate(img, 1), img)


def test_decimate_ramp():
    img = np.arange(16.0).reshape(4, 4)
    assert downsample_decimate(img, 2).tolist() == [[0.0, 2.0], [8.0, 10.0]]


def test_decimate_dims_and_subset(phantom256):
    low = downsample_decimate(phantom256, 4)
    assert low.shape == (64, 64)
    assert np.array_equal(low, phantom256[::4, ::4])


def test_decimate_ceil_dims():
    img = np.zeros((5, 7))
    assert downsample_decimate(img, 4).shape == (2, 2)


def test_decimate_bad_factor():
    with pytest.raises(ValueError):
        downsample_decimate(np.zeros((4, 4)), 0)


# ---------------------------------------------------------------- phantoms


def test_phantom_range(phantom64, phantom256):
    for ph in (phantom64, phantom256):
        assert ph.min() == 0.0
        assert ph.max() == 255.0


def test_phantom_mirror_symmetry(phantom256):
    close = np.abs(phantom256 - phantom256[:, ::-1]) <= 1.0
    assert close.mean() >= 0.99


def test_phantom_deterministic_checksum(phantom64):
    digest = hashlib.sha256(quantize(phantom64).tobytes()).hexdigest()
    assert digest == PHANTOM64_SHA256
    assert np.array_equal(shepp_logan(64), phantom64)


def test_phantom_too_small():
    with pytest.raises(ValueError):
        shepp_logan(8)


def test_ball_properties():
    ball = ball_image(64)
    assert ball.shape == (64, 64)
    assert ball[32, 32] == 255.0
    assert ball[0, 0] == 0.0
    assert np.array_equal(ball, ball.T)
    assert np.array_equal(ball, ball_image(64))


def test_ball_too_small():
    with pytest.raises(ValueError):
        ball_image(4)
