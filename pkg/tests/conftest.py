import numpy as np
import pytest

from cathtrack.config import default_calibration
from cathtrack.simulator import CatheterGeometry
from cathtrack.vision import PipelineConfig


@pytest.fixture(scope="session")
def calib():
    return default_calibration()


@pytest.fixture(scope="session")
def geom():
    return CatheterGeometry()


@pytest.fixture(scope="session")
def pipe_cfg():
    return PipelineConfig(fusion_refine_iters=15)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)


def resample_3d(points: np.ndarray, k: int) -> np.ndarray:
    """Ground truth at matched normalized arclength (shared test oracle)."""
    seg = np.linalg.norm(np.diff(points, axis=0), axis=1)
    cum = np.concatenate([[0.0], np.cumsum(np.maximum(seg, 1e-12))])
    cum /= cum[-1]
    u = np.linspace(0.0, 1.0, k)
    return np.column_stack([np.interp(u, cum, points[:, i]) for i in range(3)])
