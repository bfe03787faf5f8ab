import numpy as np
import pytest

from marsense import shepp_logan


@pytest.fixture(scope="session")
def phantom64():
    return shepp_logan(64)


@pytest.fixture(scope="session")
def phantom256():
    return shepp_logan(256)


def textured_scene(n: int, seed: int = 11) -> np.ndarray:
    """Deterministic natural-image stand-in: smooth shading, a few sharp
    structures, and broadband texture everywhere. Unlike the phantom it has
    no large exactly-flat regions, so sample placement matters everywhere.
    """
    rng = np.random.default_rng(seed)
    ys, xs = np.mgrid[0:n, 0:n].astype(np.float64) / n

    base = 90.0 + 70.0 * xs + 40.0 * np.sin(2.2 * np.pi * ys)
    base += 45.0 * ((xs - 0.62) ** 2 + (ys - 0.3) ** 2 < 0.05)
    base -= 55.0 * ((np.abs(xs - 0.25) < 0.1) & (ys > 0.55))

    # broadband texture: white noise smoothed at two scales
    noise = rng.normal(size=(n, n))
    kernel = np.outer(*(2 * [np.exp(-0.5 * (np.arange(-4, 5) / 1.6) ** 2)]))
    kernel /= kernel.sum()
    from scipy.signal import convolve2d

    fine = convolve2d(noise, kernel, mode="same", boundary="symm")
    coarse = convolve2d(fine, kernel, mode="same", boundary="symm")
    img = base + 55.0 * fine + 60.0 * coarse
    img -= img.min()
    img *= 255.0 / img.max()
    return img


@pytest.fixture(scope="session")
def scene128():
    return textured_scene(128)
