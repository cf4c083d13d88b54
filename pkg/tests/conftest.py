import numpy as np
import pytest
from scipy.ndimage import gaussian_filter

from fmvc.video_io import Frame, FramePlane, VideoSequence, chroma_dims


@pytest.fixture
def rng():
    return np.random.default_rng(0xF0EA)


def frame_from_luma(y: np.ndarray, chroma_value: int = 128) -> Frame:
    h, w = y.shape
    cw, ch = chroma_dims(w, h)
    return Frame(
        FramePlane.from_array(y),
        FramePlane.filled(cw, ch, chroma_value),
        FramePlane.filled(cw, ch, chroma_value),
    )


def frame_from_planes(y: np.ndarray, cb: np.ndarray, cr: np.ndarray) -> Frame:
    return Frame(
        FramePlane.from_array(y),
        FramePlane.from_array(cb),
        FramePlane.from_array(cr),
    )


def shift_with_replication(plane: np.ndarray, step: int, axis: int) -> np.ndarray:
    """Translate content by `step` pixels along an axis, replicating the
    trailing edge, so frame t equals frame t-1 sampled at displaced, clamped
    coordinates."""
    out = np.empty_like(plane)
    n = plane.shape[axis]
    src = np.clip(np.arange(n) - step, 0, n - 1)
    if axis == 1:
        out[:] = plane[:, src]
    else:
        out[:] = plane[src, :]
    return out


def pan_clip(
    width: int,
    height: int,
    n_frames: int,
    step: int,
    axis: int = 1,
    seed: int = 7,
    chroma_noise: bool = False,
    smooth: float = 0.0,
) -> VideoSequence:
    """Textured clip panning `step` px/frame, cut from a wider master image
    (a camera pan): frame t equals frame t-1 sampled `step` pixels away
    everywhere except the entering edge, where fresh scene content appears.
    A nonzero `smooth` sigma swaps the iid noise for spatially correlated
    texture (needed when the pan exceeds the displacement range, where
    partial alignment only helps on correlated content)."""
    rng = np.random.default_rng(seed)
    travel = abs(step) * (n_frames - 1)
    mshape = (height, width + travel) if axis == 1 else (height + travel, width)
    if smooth:
        master = gaussian_filter(rng.normal(0.0, 1.0, mshape), sigma=smooth)
        master = np.clip(128 + 90 * master / (np.abs(master).max() + 1e-9), 0, 255).astype(np.uint8)
    else:
        master = rng.integers(0, 256, mshape, dtype=np.uint8)
    cw, ch = chroma_dims(width, height)
    c_step = int(step / 2)
    c_travel = abs(c_step) * (n_frames - 1)
    if chroma_noise:
        cshape = (ch, cw + c_travel) if axis == 1 else (ch + c_travel, cw)
        cb_master = rng.integers(64, 192, cshape, dtype=np.uint8)
        cr_master = rng.integers(64, 192, cshape, dtype=np.uint8)
    else:
        cb_master = cr_master = None

    def window(arr, off, w, h):
        return arr[off:off + h, :w] if axis == 0 else arr[:h, off:off + w]

    frames = []
    for t in range(n_frames):
        # content moves toward positive s: the window slides backwards
        off = travel - abs(step) * t if step > 0 else abs(step) * t
        c_off = c_travel - abs(c_step) * t if step > 0 else abs(c_step) * t
        y = window(master, off, width, height)
        if cb_master is None:
            cb = np.full((ch, cw), 128, dtype=np.uint8)
            cr = np.full((ch, cw), 128, dtype=np.uint8)
        else:
            cb = window(cb_master, c_off, cw, ch)
            cr = window(cr_master, c_off, cw, ch)
        frames.append(frame_from_planes(y.copy(), cb.copy(), cr.copy()))
    return VideoSequence(tuple(frames), 25, 1)


def random_clip(width: int, height: int, n_frames: int, seed: int = 3) -> VideoSequence:
    rng = np.random.default_rng(seed)
    frames = []
    for _ in range(n_frames):
        cw, ch = chroma_dims(width, height)
        frames.append(
            frame_from_planes(
                rng.integers(0, 256, (height, width), dtype=np.uint8),
                rng.integers(0, 256, (ch, cw), dtype=np.uint8),
                rng.integers(0, 256, (ch, cw), dtype=np.uint8),
            )
        )
    return VideoSequence(tuple(frames), 30, 1)


def natural_clip(width: int = 352, height: int = 288, n_frames: int = 6, seed: int = 11) -> VideoSequence:
    """Grain-over-gradients content translating 2 px/frame, sampled from a
    larger master image so no synthetic border content enters the frame.
    The fine texture is normalized by its local energy envelope, keeping
    per-block statistics stationary so bit allocation is map-driven."""
    rng = np.random.default_rng(seed)
    margin = 2 * n_frames + 8
    mh, mw = height + margin, width + margin
    smooth = gaussian_filter(rng.normal(0.0, 1.0, (mh, mw)), sigma=12.0)
    smooth = smooth / (np.abs(smooth).max() + 1e-9) * 10
    texture = gaussian_filter(rng.normal(0.0, 1.0, (mh, mw)), sigma=1.2)
    envelope = np.sqrt(gaussian_filter(texture * texture, 16.0)) + 1e-9
    texture = texture / envelope * 55
    grain = rng.uniform(-25.0, 25.0, (mh, mw))
    master = np.clip(128 + smooth + texture + grain, 0, 255).astype(np.uint8)
    chroma_master = gaussian_filter(
        rng.normal(0.0, 1.0, ((mh + 1) // 2, (mw + 1) // 2)), sigma=6.0
    )
    chroma_master = np.clip(128 + 40 * chroma_master / (np.abs(chroma_master).max() + 1e-9), 0, 255).astype(
        np.uint8
    )
    frames = []
    cw, ch = chroma_dims(width, height)
    for t in range(n_frames):
        off = 2 * t
        y = master[4 : 4 + height, 4 + off : 4 + off + width]
        c_off = off // 2
        cb = chroma_master[2 : 2 + ch, 2 + c_off : 2 + c_off + cw]
        cr = 255 - cb
        frames.append(frame_from_planes(y.copy(), cb.copy(), cr.copy()))
    return VideoSequence(tuple(frames), 30, 1)
