"""Per-view 2D tracking pipeline.

rectify -> smooth/contrast -> adaptive threshold -> clean -> skeletonize ->
trace tip-to-entry -> downsample -> millimeter mapping.

Images are grayscale numpy arrays of shape (height, width), dtype uint8.
Binary masks are boolean arrays of the same shape. Pixel coordinates are
(u, v) = (column, row).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
from scipy import ndimage

from .errors import CalibrationError, ParameterError, TrackingLostError

if TYPE_CHECKING:  # pragma: no cover
    from .synth import CameraModel

RAW_PX = "raw_px"
RECT_PX = "rect_px"
MM = "mm"

# 8-neighborhood in (dv, du) order; fixed order keeps tracing deterministic
_NEIGHBORS = ((-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1))


@dataclass(frozen=True)
class Path2D:
    """Ordered 2D polyline, tip first; ``space`` tags the coordinate frame."""

    points: np.ndarray  # (N, 2) float64, columns (u, v) px or (a, b) mm
    space: str = RECT_PX

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64).reshape(-1, 2)
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def empty(self) -> bool:
        return len(self.points) == 0


EMPTY_PATH = Path2D(points=np.zeros((0, 2)), space=RECT_PX)


@dataclass(frozen=True)
class PipelineConfig:
    """Tunable knobs of the per-view pipeline and the fusion stage."""

    gauss_sigma: float = 1.2
    stretch_lo_pct: float = 1.0
    stretch_hi_pct: float = 99.0
    stretch_min_range: float = 32.0
    threshold_window: int = 31
    threshold_offset: float = 10.0
    polarity: str = "dark"          # dark catheter on bright background
    close_radius: int = 2
    min_area: int = 50
    inlet_radius_px: float = 40.0
    roi_accelerate: bool = True
    k_points: int = 12
    consistency_gate_mm: float = 5.0
    fusion_refine_iters: int = 3
    background: float = 230.0


# ---------------------------------------------------------------------------
# Rectification
# ---------------------------------------------------------------------------

def fit_homography(pixel_pts: np.ndarray, world_pts: np.ndarray) -> np.ndarray:
    """Fit the 3x3 projective map sending ``pixel_pts`` onto ``world_pts``.

    Uses the direct linear transform; with exactly four correspondences the
    fit interpolates them exactly. Raises CalibrationError when any three
    points of either set are collinear.
    """
    src = np.asarray(pixel_pts, dtype=np.float64).reshape(-1, 2)
    dst = np.asarray(world_pts, dtype=np.float64).reshape(-1, 2)
    if len(src) < 4 or len(src) != len(dst):
        raise CalibrationError(f"need >= 4 point pairs, got {len(src)} / {len(dst)}")
    for name, pts in (("pixel", src), ("world", dst)):
        _check_no_collinear_triple(pts, name)

    n = len(src)
    a = np.zeros((2 * n, 9))
    for i, ((x, y), (u, v)) in enumerate(zip(src, dst)):
        a[2 * i] = [x, y, 1, 0, 0, 0, -u * x, -u * y, -u]
        a[2 * i + 1] = [0, 0, 0, x, y, 1, -v * x, -v * y, -v]
    _, _, vh = np.linalg.svd(a)
    h = vh[-1].reshape(3, 3)
    if abs(h[2, 2]) > 1e-12:
        h = h / h[2, 2]
    if abs(np.linalg.det(h)) < 1e-12:
        raise CalibrationError("fitted homography is singular")
    return h


def _check_no_collinear_triple(pts: np.ndarray, name: str) -> None:
    scale = max(np.ptp(pts[:, 0]), np.ptp(pts[:, 1]), 1.0)
    n = len(pts)
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                u = pts[j] - pts[i]
                v = pts[k] - pts[i]
                area = u[0] * v[1] - u[1] * v[0]
                if abs(area) < 1e-9 * scale * scale:
                    raise CalibrationError(
                        f"{name} points {i},{j},{k} are collinear"
                    )


def apply_homography(h: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """Map (N, 2) points through a 3x3 homography."""
    pts = np.asarray(pts, dtype=np.float64).reshape(-1, 2)
    ones = np.ones((len(pts), 1))
    q = np.hstack([pts, ones]) @ h.T
    return q[:, :2] / q[:, 2:3]


def rectify(img: np.ndarray, camera: "CameraModel", background: float = 230.0) -> np.ndarray:
    """Warp a raw frame into the rectified metric ROI frame.

    Bilinear inverse mapping through the camera homography; pixels sampling
    outside the source take ``background``.
    """
    idx, weights, invalid = _rect_maps(camera, img.shape)
    flat = img.ravel()
    out = weights[0] * flat.take(idx)
    out += weights[1] * flat.take(idx + 1)
    out += weights[2] * flat.take(idx + img.shape[1])
    out += weights[3] * flat.take(idx + img.shape[1] + 1)
    out[invalid] = background
    return np.clip(np.rint(out), 0, 255).astype(np.uint8)


def _rect_maps(camera: "CameraModel", src_shape: tuple[int, int]):
    """Flat sample indices + bilinear weights for the warp, cached per camera."""
    cached = getattr(camera, "_rect_maps_cache", None)
    if cached is not None and cached[0] == src_shape:
        return cached[1]
    try:
        h_inv = np.linalg.inv(camera.homography)
    except np.linalg.LinAlgError as exc:
        raise CalibrationError("homography is not invertible") from exc
    h, w = src_shape
    rw, rh = camera.rect_size
    u, v = np.meshgrid(np.arange(rw, dtype=np.float64), np.arange(rh, dtype=np.float64))
    denom = h_inv[2, 0] * u + h_inv[2, 1] * v + h_inv[2, 2]
    src_x = (h_inv[0, 0] * u + h_inv[0, 1] * v + h_inv[0, 2]) / denom
    src_y = (h_inv[1, 0] * u + h_inv[1, 1] * v + h_inv[1, 2]) / denom
    invalid = ~((src_x >= 0) & (src_x <= w - 1) & (src_y >= 0) & (src_y <= h - 1))
    x0 = np.clip(np.floor(src_x).astype(np.int64), 0, w - 2)
    y0 = np.clip(np.floor(src_y).astype(np.int64), 0, h - 2)
    fx = (src_x - x0).astype(np.float32)
    fy = (src_y - y0).astype(np.float32)
    idx = y0 * w + x0
    weights = ((1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy, fx * fy)
    entry = (idx, weights, invalid)
    object.__setattr__(camera, "_rect_maps_cache", (src_shape, entry))
    return entry


# ---------------------------------------------------------------------------
# Preprocessing
# ---------------------------------------------------------------------------

def gaussian_blur(img: np.ndarray, sigma: float) -> np.ndarray:
    """Separable Gaussian blur with a sampled kernel of radius ceil(3*sigma)."""
    if sigma < 0:
        raise ParameterError(f"sigma must be >= 0, got {sigma}")
    if sigma == 0:
        return img.copy()
    radius = max(1, int(np.ceil(3.0 * sigma)))
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    kernel = np.exp(-0.5 * (x / sigma) ** 2)
    kernel /= kernel.sum()
    out = ndimage.convolve1d(img.astype(np.float32), kernel, axis=0, mode="nearest")
    out = ndimage.convolve1d(out, kernel, axis=1, mode="nearest")
    return np.clip(np.rint(out), 0, 255).astype(np.uint8)


def estimate_noise(img: np.ndarray, stride: int = 2) -> float:
    """Sensor noise standard deviation via the Laplacian residual method.

    The residual is evaluated on a strided grid; noise is stationary, so
    the subsample changes nothing but the cost.
    """
    f = img[::stride, ::stride].astype(np.float32)
    lap = (4.0 * f[1:-1, 1:-1]
           + f[:-2, :-2] + f[:-2, 2:] + f[2:, :-2] + f[2:, 2:]
           - 2.0 * (f[:-2, 1:-1] + f[2:, 1:-1] + f[1:-1, :-2] + f[1:-1, 2:]))
    if lap.size == 0:
        return 0.0
    return float(np.sqrt(np.pi / 2.0) * np.abs(lap).mean() / 6.0)


def _percentiles_u8(img: np.ndarray, lo_pct: float, hi_pct: float) -> tuple[float, float]:
    """Percentiles of a uint8 image from its histogram.

    Matches numpy's linear-interpolation percentile on the sorted samples,
    at O(n) instead of a sort.
    """
    cum = np.cumsum(np.bincount(img.ravel(), minlength=256))
    n = int(cum[-1])

    def sample(k: int) -> int:
        return int(np.searchsorted(cum, k, side="right"))

    out = []
    for pct in (lo_pct, hi_pct):
        rank = pct / 100.0 * (n - 1)
        k = int(np.floor(rank))
        frac = rank - k
        s0 = sample(k)
        s1 = sample(min(k + 1, n - 1)) if frac > 0 else s0
        out.append(s0 + frac * (s1 - s0))
    return out[0], out[1]


def stretch_contrast(img: np.ndarray, lo_pct: float = 1.0, hi_pct: float = 99.0,
                     min_range: float = 32.0, max_noise: float = 3.0,
                     noise_level: float | None = None) -> np.ndarray:
    """Linear percentile stretch toward the full 0..255 range, clamped.

    Two guards keep the stretch from manufacturing foreground out of sensor
    noise: an image whose percentile range is below ``min_range`` is
    returned unchanged (a tiny catheter leaves both percentiles inside the
    background noise), and the gain is capped so the stretched noise level
    stays at most ``max_noise`` intensity levels. ``noise_level`` is the
    noise standard deviation of ``img``; when None it is estimated from the
    image itself.
    """
    lo, hi = _percentiles_u8(img, lo_pct, hi_pct)
    if hi - lo < min_range:
        return img.copy()
    gain = 255.0 / (hi - lo)
    sigma = estimate_noise(img) if noise_level is None else noise_level
    if sigma > 1e-6:
        gain = min(gain, max_noise / sigma)
    if gain <= 1.0:
        return img.copy()
    out = (img.astype(np.float32) - lo) * gain
    return np.clip(np.rint(out), 0, 255).astype(np.uint8)


def preprocess(img: np.ndarray, gauss_sigma: float = 1.2,
               lo_pct: float = 1.0, hi_pct: float = 99.0,
               min_range: float = 32.0, max_noise: float = 3.0) -> np.ndarray:
    """Gaussian smoothing followed by the guarded percentile contrast stretch.

    The noise level fed to the stretch guard is measured on the raw input
    (where it is white) and attenuated by the blur kernel's L2 norm, since
    estimating it after the blur would see correlated noise.
    """
    sigma_raw = estimate_noise(img)
    blurred = gaussian_blur(img, gauss_sigma)
    if gauss_sigma > 0:
        radius = max(1, int(np.ceil(3.0 * gauss_sigma)))
        x = np.arange(-radius, radius + 1, dtype=np.float64)
        k1 = np.exp(-0.5 * (x / gauss_sigma) ** 2)
        k1 /= k1.sum()
        atten = float(np.sqrt(np.sum(np.outer(k1, k1) ** 2)))
    else:
        atten = 1.0
    return stretch_contrast(blurred, lo_pct, hi_pct, min_range, max_noise,
                            noise_level=sigma_raw * atten)


# ---------------------------------------------------------------------------
# Segmentation
# ---------------------------------------------------------------------------

def adaptive_threshold(img: np.ndarray, window: int = 31, offset: float = 10.0,
                       polarity: str = "dark") -> np.ndarray:
    """Threshold each pixel against the mean of its local window.

    Windows are clipped at the borders; the mean uses the actual pixel count.
    Computed from an integral image, so runtime does not grow with window
    size. ``dark`` polarity marks pixels below mean - offset, ``bright``
    marks pixels above mean + offset.
    """
    h, w = img.shape
    if window % 2 == 0 or window < 3:
        raise ParameterError(f"window must be odd and >= 3, got {window}")
    if window > w or window > h:
        raise ParameterError(f"window {window} exceeds image size {w}x{h}")
    if polarity not in ("dark", "bright"):
        raise ParameterError(f"polarity must be 'dark' or 'bright', got {polarity!r}")

    r = window // 2
    dtype = np.int32 if h * w * 255 < 2 ** 31 else np.int64
    integral = np.zeros((h + 1, w + 1), dtype=dtype)
    np.cumsum(np.cumsum(img, axis=0, dtype=dtype), axis=1, out=integral[1:, 1:])

    # edge-padding the integral turns the border-clamped lookups into pure
    # slices: ext[i, j] == integral[clip(i - r, 0, h), clip(j - r, 0, w)]
    ext = np.pad(integral, r, mode="edge")
    total = (ext[2 * r + 1:, 2 * r + 1:] - ext[:h, 2 * r + 1:]
             - ext[2 * r + 1:, :w] + ext[:h, :w])

    ys = np.arange(h)
    xs = np.arange(w)
    rows = np.minimum(ys + r, h - 1) - np.maximum(ys - r, 0) + 1
    cols = np.minimum(xs + r, w - 1) - np.maximum(xs - r, 0) + 1
    count = rows[:, None] * cols[None, :]
    mean = total / count
    if polarity == "dark":
        return img < mean - offset
    return img > mean + offset


def clean(mask: np.ndarray, close_radius: int = 2, min_area: int = 50) -> np.ndarray:
    """Close small gaps, drop speckle, keep the largest 8-connected component.

    Morphology runs on the foreground bounding box (padded so closing
    cannot erode content at the crop edge), which keeps the cost
    proportional to the catheter, not the frame.
    """
    ys, xs = np.nonzero(mask)
    if len(ys) == 0:
        return mask.copy()
    pad = close_radius + 1
    y0, y1 = max(ys.min() - pad, 0), min(ys.max() + pad + 1, mask.shape[0])
    x0, x1 = max(xs.min() - pad, 0), min(xs.max() + pad + 1, mask.shape[1])
    box = mask[y0:y1, x0:x1]
    if close_radius > 0:
        disc = _disc(close_radius)
        padded = np.pad(box, close_radius)
        padded = ndimage.binary_closing(padded, structure=disc)
        box = padded[close_radius:-close_radius, close_radius:-close_radius]
    labels, n = ndimage.label(box, structure=np.ones((3, 3), dtype=np.int8))
    if n == 0:
        return np.zeros_like(mask)
    sizes = np.bincount(labels.ravel())
    sizes[0] = 0
    sizes[sizes < min_area] = 0
    best = int(np.argmax(sizes))
    if sizes[best] == 0:
        return np.zeros_like(mask)
    out = np.zeros_like(mask)
    out[y0:y1, x0:x1] = labels == best
    return out


def _disc(radius: int) -> np.ndarray:
    yy, xx = np.mgrid[-radius:radius + 1, -radius:radius + 1]
    return (yy * yy + xx * xx) <= radius * radius


# ---------------------------------------------------------------------------
# Skeletonization (Zhang-Suen thinning)
# ---------------------------------------------------------------------------

def skeletonize(mask: np.ndarray) -> np.ndarray:
    """Thin a binary mask to a 1-pixel-wide 8-connected skeleton.

    Zhang-Suen iterative thinning: alternating sub-passes delete boundary
    pixels whose removal preserves connectivity, until stable. The result is
    a subset of the mask and the operation is idempotent.
    """
    if not mask.any():
        return mask.copy()
    ys, xs = np.nonzero(mask)
    y0, y1 = ys.min(), ys.max() + 1
    x0, x1 = xs.min(), xs.max() + 1
    pad = np.zeros((y1 - y0 + 2, x1 - x0 + 2), dtype=np.uint8)
    pad[1:-1, 1:-1] = mask[y0:y1, x0:x1]
    while True:
        changed = _zs_pass(pad, first=True)
        changed |= _zs_pass(pad, first=False)
        if not changed:
            break
    out = np.zeros_like(mask)
    out[y0:y1, x0:x1] = pad[1:-1, 1:-1].astype(bool)
    return out


def _zs_pass(pad: np.ndarray, first: bool) -> bool:
    img = pad[1:-1, 1:-1]
    p2 = pad[:-2, 1:-1]; p3 = pad[:-2, 2:]; p4 = pad[1:-1, 2:]; p5 = pad[2:, 2:]
    p6 = pad[2:, 1:-1]; p7 = pad[2:, :-2]; p8 = pad[1:-1, :-2]; p9 = pad[:-2, :-2]
    ring = (p2, p3, p4, p5, p6, p7, p8, p9)
    b = p2.astype(np.uint8)
    for q in ring[1:]:
        b = b + q
    a = np.zeros(img.shape, dtype=np.uint8)
    for i in range(8):
        a += (ring[i] < ring[(i + 1) % 8])  # 0 -> 1 transition
    if first:
        cond = ((p2 & p4 & p6) == 0) & ((p4 & p6 & p8) == 0)
    else:
        cond = ((p2 & p4 & p8) == 0) & ((p2 & p6 & p8) == 0)
    deletable = (img == 1) & (b >= 2) & (b <= 6) & (a == 1) & cond
    if not deletable.any():
        return False
    img[deletable] = 0
    return True


# ---------------------------------------------------------------------------
# Tip-to-entry tracing
# ---------------------------------------------------------------------------

def trace_path(skeleton: np.ndarray, inlet_px, inlet_radius: float | None = None) -> Path2D:
    """Order skeleton pixels from the catheter tip to its entry point.

    The entry is the skeleton pixel nearest ``inlet_px``; the tip is the
    pixel at maximal breadth-first depth from the entry (geodesic farthest
    point). The returned path is the BFS shortest 8-connected path from tip
    to entry, which excludes side branches. An empty skeleton yields an
    empty path; a skeleton farther than ``inlet_radius`` from the inlet
    raises TrackingLostError.
    """
    ys, xs = np.nonzero(skeleton)
    if len(ys) == 0:
        return EMPTY_PATH
    iu, iv = float(inlet_px[0]), float(inlet_px[1])
    d2 = (xs - iu) ** 2 + (ys - iv) ** 2
    j = int(np.argmin(d2))
    if inlet_radius is not None and d2[j] > inlet_radius * inlet_radius:
        raise TrackingLostError(
            f"skeleton is {np.sqrt(d2[j]):.1f} px from the inlet "
            f"(limit {inlet_radius:.1f} px)"
        )
    h, w = skeleton.shape
    # pad one background column so flat neighbor offsets cannot wrap rows
    grid = np.zeros((h + 2, w + 2), dtype=bool)
    grid[1:-1, 1:-1] = skeleton
    gw = w + 2
    flat = grid.ravel()
    entry = (int(ys[j]) + 1) * gw + int(xs[j]) + 1

    offsets = (-gw - 1, -gw, -gw + 1, -1, 1, gw - 1, gw, gw + 1)
    depth = np.full(flat.shape, -1, dtype=np.int32)
    parent = np.full(flat.shape, -1, dtype=np.int32)
    depth[entry] = 0
    queue = deque([entry])
    push = queue.append
    pop = queue.popleft
    while queue:
        cur = pop()
        d = depth[cur] + 1
        for off in offsets:
            nb = cur + off
            if flat[nb] and depth[nb] < 0:
                depth[nb] = d
                parent[nb] = cur
                push(nb)

    tip = int(np.argmax(depth))
    pts = []
    cur = tip
    while cur >= 0:
        cy, cx = divmod(cur, gw)
        pts.append((cx - 1, cy - 1))
        cur = parent[cur]
    return Path2D(points=np.asarray(pts, dtype=np.float64), space=RECT_PX)


# ---------------------------------------------------------------------------
# Downsampling and metric mapping
# ---------------------------------------------------------------------------

def refine_tip(path: Path2D, mask: np.ndarray, window: int = 28,
               slack_px: float = 0.5) -> Path2D:
    """Compensate thinning end-erosion at the tip using the mask.

    Thinning can pull the skeleton end well back from the end of a thick
    tube (worst on diagonal strokes). Within a window around the traced
    tip, the farthest pixel of the tip's own mask component along the tip
    tangent marks the tube's cap boundary; stepping back from it by the
    local half-width (from the distance transform) lands on the true
    centerline endpoint, which is prepended to the path.
    """
    if len(path) < 7:
        return path
    pts = path.points
    tip = pts[0]
    tangent = tip - pts[6]
    norm = np.linalg.norm(tangent)
    if norm < 1e-9:
        return path
    tangent = tangent / norm

    h, w = mask.shape
    tu, tv = int(round(tip[0])), int(round(tip[1]))
    u0, u1 = max(tu - window, 0), min(tu + window + 1, w)
    v0, v1 = max(tv - window, 0), min(tv + window + 1, h)
    win = mask[v0:v1, u0:u1]
    if not win[tv - v0, tu - u0]:
        return path
    labels, _ = ndimage.label(win, structure=np.ones((3, 3), dtype=np.int8))
    comp = labels == labels[tv - v0, tu - u0]
    ys, xs = np.nonzero(comp)
    proj = (xs + u0 - tip[0]) * tangent[0] + (ys + v0 - tip[1]) * tangent[1]
    far = int(np.argmax(proj))
    if proj[far] <= 1.0:
        return path
    m_star = np.array([xs[far] + u0, ys[far] + v0], dtype=np.float64)
    direction = m_star - tip
    dist = np.linalg.norm(direction)
    direction /= dist

    # local halo half-width: max distance-transform value along the chord
    dt = ndimage.distance_transform_edt(win)
    ts = np.linspace(0.0, 1.0, 9)
    chord = tip + np.outer(ts, m_star - tip)
    cu = np.clip(np.rint(chord[:, 0]).astype(int) - u0, 0, win.shape[1] - 1)
    cv = np.clip(np.rint(chord[:, 1]).astype(int) - v0, 0, win.shape[0] - 1)
    radius = float(dt[cv, cu].max())

    advance = dist - radius + slack_px
    if advance <= 1.0:
        return path
    new_tip = tip + direction * advance
    return Path2D(points=np.vstack([new_tip, pts]), space=path.space)


def downsample(path: Path2D, k: int) -> Path2D:
    """Resample to ``k`` points: exact endpoints, uniform arclength interior."""
    if k < 2:
        raise ParameterError(f"k must be >= 2, got {k}")
    if len(path) < 2:
        raise ParameterError("path must have at least 2 points")
    pts = path.points
    seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    targets = np.linspace(0.0, cum[-1], k)
    out = np.column_stack([np.interp(targets, cum, pts[:, 0]),
                           np.interp(targets, cum, pts[:, 1])])
    out[0] = pts[0]
    out[-1] = pts[-1]
    return Path2D(points=out, space=path.space)


def px_to_mm(path: Path2D, camera: "CameraModel") -> Path2D:
    """Map rectified pixels to plane millimeters with the inlet at the origin."""
    if path.empty:
        return Path2D(points=np.zeros((0, 2)), space=MM)
    inlet = np.asarray(camera.inlet_px, dtype=np.float64)
    return Path2D(points=(path.points - inlet) * camera.mm_per_px, space=MM)


def mm_to_px(path: Path2D, camera: "CameraModel") -> Path2D:
    """Inverse of :func:`px_to_mm`."""
    inlet = np.asarray(camera.inlet_px, dtype=np.float64)
    return Path2D(points=path.points / camera.mm_per_px + inlet, space=RECT_PX)


# ---------------------------------------------------------------------------
# Per-view composition
# ---------------------------------------------------------------------------

_ROI_STRIDE = 4
_ROI_MARGIN_PX = 40


def detect_roi(raw: np.ndarray, camera: "CameraModel",
               cfg: "PipelineConfig") -> tuple[int, int, int, int] | None:
    """Coarse rectified-space bounding box of the catheter, or None.

    A stride-4 box-blurred thumbnail of the raw frame is adaptively
    thresholded with a softened offset; connected blobs above a scaled area
    floor vote a raw-space bounding box, which is mapped through the
    homography and padded by enough margin to cover every later kernel
    support. Purely an accelerator: the box always contains the catheter
    and the inlet, so running the pipeline inside it matches the
    full-frame result away from empty background.
    """
    coarse = raw[::_ROI_STRIDE, ::_ROI_STRIDE]
    ch, cw = coarse.shape
    if ch < 16 or cw < 16:
        rw, rh = camera.rect_size
        return (0, 0, rw, rh)
    padded = np.pad(coarse, 1, mode="edge").astype(np.int16)
    rows = padded[:-2] + padded[1:-1] + padded[2:]
    small = ((rows[:, :-2] + rows[:, 1:-1] + rows[:, 2:]) // 9).astype(np.uint8)
    thr = adaptive_threshold(small, window=9,
                             offset=max(cfg.threshold_offset * 0.6, 4.0),
                             polarity=cfg.polarity)
    labels, n = ndimage.label(thr, structure=np.ones((3, 3), dtype=np.int8))
    if n == 0:
        return None
    sizes = np.bincount(labels.ravel())
    sizes[0] = 0
    floor = max(cfg.min_area // (_ROI_STRIDE * _ROI_STRIDE), 3)
    keep = np.flatnonzero(sizes >= floor)
    if len(keep) == 0:
        return None
    ys, xs = np.nonzero(np.isin(labels, keep))
    slack = 2 * _ROI_STRIDE
    raw_x0 = xs.min() * _ROI_STRIDE - slack
    raw_x1 = xs.max() * _ROI_STRIDE + slack
    raw_y0 = ys.min() * _ROI_STRIDE - slack
    raw_y1 = ys.max() * _ROI_STRIDE + slack
    corners = np.array([[raw_x0, raw_y0], [raw_x1, raw_y0],
                        [raw_x1, raw_y1], [raw_x0, raw_y1]], dtype=np.float64)
    rect = apply_homography(camera.homography, corners)
    iu, iv = camera.inlet_px
    rw, rh = camera.rect_size
    x0 = int(max(min(rect[:, 0].min(), iu) - _ROI_MARGIN_PX, 0))
    x1 = int(min(max(rect[:, 0].max(), iu) + _ROI_MARGIN_PX, rw))
    y0 = int(max(min(rect[:, 1].min(), iv) - _ROI_MARGIN_PX, 0))
    y1 = int(min(max(rect[:, 1].max(), iv) + _ROI_MARGIN_PX, rh))
    if x1 - x0 < 2 or y1 - y0 < 2:
        return None
    return (x0, y0, x1, y1)


def _rectify_box(raw: np.ndarray, camera: "CameraModel", box, background: float) -> np.ndarray:
    """Rectify only the given (x0, y0, x1, y1) rectified-space window."""
    x0, y0, x1, y1 = box
    idx, weights, invalid = _rect_maps(camera, raw.shape)
    sl = (slice(y0, y1), slice(x0, x1))
    flat = raw.ravel()
    sub = idx[sl]
    out = weights[0][sl] * flat.take(sub)
    out += weights[1][sl] * flat.take(sub + 1)
    out += weights[2][sl] * flat.take(sub + raw.shape[1])
    out += weights[3][sl] * flat.take(sub + raw.shape[1] + 1)
    out[invalid[sl]] = background
    return np.clip(np.rint(out), 0, 255).astype(np.uint8)


def track_view(raw: np.ndarray, camera: "CameraModel",
               cfg: PipelineConfig | None = None) -> Path2D:
    """Run the full per-view pipeline on one raw frame.

    Returns the traced centerline in plane millimeters (tip first), or an
    empty MM path when no catheter is visible. With ``roi_accelerate`` the
    dense stages run only inside a detected bounding box; otherwise the
    whole frame is processed.
    """
    cfg = cfg or PipelineConfig()
    offset_px = np.zeros(2)
    if cfg.roi_accelerate:
        box = detect_roi(raw, camera, cfg)
        if box is None:
            return Path2D(points=np.zeros((0, 2)), space=MM)
        img = _rectify_box(raw, camera, box, cfg.background)
        offset_px = np.array([box[0], box[1]], dtype=np.float64)
    else:
        img = rectify(raw, camera, background=cfg.background)
    img = preprocess(img, cfg.gauss_sigma, cfg.stretch_lo_pct, cfg.stretch_hi_pct,
                     cfg.stretch_min_range)
    mask = adaptive_threshold(img, cfg.threshold_window, cfg.threshold_offset,
                              cfg.polarity)
    mask = clean(mask, cfg.close_radius, cfg.min_area)
    skel = skeletonize(mask)
    inlet_local = (camera.inlet_px[0] - offset_px[0], camera.inlet_px[1] - offset_px[1])
    path = trace_path(skel, inlet_local, inlet_radius=cfg.inlet_radius_px)
    if path.empty:
        return Path2D(points=np.zeros((0, 2)), space=MM)
    path = refine_tip(path, mask)
    return px_to_mm(Path2D(points=path.points + offset_px, space=RECT_PX), camera)
