"""Seeded synthetic scenes for exercising the pipeline end to end.

Every scene plants axis-aligned rectangles and discs, some salient (central,
covered by the saliency map) and some not (corners and edges, invisible to
saliency but weakly activated in the attention map). That is exactly the
regime the mining and masking stages exist for, and it makes their claimed
effects checkable against known ground truth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError
from . import formats
from .grunit import FeatureGrid
from .maps import AttentionStack, ImageRecord

RECT = "rect"
DISC = "disc"


@dataclass(frozen=True)
class SceneObject:
    class_id: int
    shape: str  # RECT: (y0, x0, y1, x1) half-open; DISC: (cy, cx, radius)
    geometry: tuple
    salient: bool

    def bbox(self) -> tuple[int, int, int, int]:
        if self.shape == RECT:
            return self.geometry
        cy, cx, radius = self.geometry
        return (cy - radius, cx - radius, cy + radius + 1, cx + radius + 1)


@dataclass
class SceneSpec:
    height: int
    width: int
    class_count: int
    objects: list[SceneObject]
    seed: int
    cam_peak: float = 0.85
    cam_offsite: float = 0.45
    noise_amplitude: float = 0.05
    enlarge: int = 5  # max-filter window simulating the high-recall map

    def __post_init__(self):
        if not self.objects:
            raise ParameterError("scene has no objects")
        if not any(obj.salient for obj in self.objects):
            raise ParameterError("scene needs at least one salient object")
        if not 0.0 < self.cam_peak <= 1.0:
            raise ParameterError(f"cam_peak must lie in (0, 1], got {self.cam_peak}")
        if not 0.0 <= self.cam_offsite < self.cam_peak:
            raise ParameterError("cam_offsite must be below cam_peak")
        for obj in self.objects:
            if not 1 <= obj.class_id <= self.class_count:
                raise ParameterError(
                    f"class id {obj.class_id} outside 1..{self.class_count}"
                )
            if obj.shape not in (RECT, DISC):
                raise ParameterError(f"unknown shape {obj.shape!r}")
            y0, x0, y1, x1 = obj.bbox()
            if y0 < 0 or x0 < 0 or y1 > self.height or x1 > self.width or y0 >= y1 or x0 >= x1:
                raise ParameterError(f"object {obj} outside {self.height}x{self.width}")


@dataclass
class SceneSample:
    gt: np.ndarray
    saliency: np.ndarray
    cam: AttentionStack
    oacam: AttentionStack
    prediction: np.ndarray
    record: ImageRecord


def _rasterize(obj: SceneObject, height: int, width: int) -> np.ndarray:
    mask = np.zeros((height, width), dtype=bool)
    if obj.shape == RECT:
        y0, x0, y1, x1 = obj.geometry
        mask[y0:y1, x0:x1] = True
    else:
        cy, cx, radius = obj.geometry
        yy, xx = np.ogrid[:height, :width]
        mask = (yy - cy) ** 2 + (xx - cx) ** 2 <= radius**2
    return mask


def _box_blur3(img: np.ndarray) -> np.ndarray:
    padded = np.pad(img, 1)
    out = np.zeros_like(img)
    for dy in (0, 1, 2):
        for dx in (0, 1, 2):
            out += padded[dy : dy + img.shape[0], dx : dx + img.shape[1]]
    return out / 9.0


def _max_filter(plane: np.ndarray, size: int) -> np.ndarray:
    """Grey dilation by a centered odd square window (clipped at borders)."""
    half = size // 2
    h, w = plane.shape
    out = plane.copy()
    for dy in range(-half, half + 1):
        ys = slice(max(0, dy), min(h, h + dy))
        yd = slice(max(0, -dy), min(h, h - dy))
        for dx in range(-half, half + 1):
            xs = slice(max(0, dx), min(w, w + dx))
            xd = slice(max(0, -dx), min(w, w - dx))
            np.maximum(out[yd, xd], plane[ys, xs], out=out[yd, xd])
    return out


def generate(spec: SceneSpec, image_id: str = "scene") -> SceneSample:
    """Render one scene; fully deterministic for a fixed spec."""
    h, w, c = spec.height, spec.width, spec.class_count
    rng = np.random.default_rng(spec.seed)

    gt = np.zeros((h, w), dtype=np.uint8)
    prediction = np.zeros((h, w), dtype=np.uint8)
    salient_union = np.zeros((h, w), dtype=bool)
    cam = np.zeros((c, h, w), dtype=np.float64)
    for obj in spec.objects:
        mask = _rasterize(obj, h, w)
        gt[mask] = obj.class_id
        level = spec.cam_peak if obj.salient else spec.cam_offsite
        cam[obj.class_id - 1][mask] = level
        if obj.salient:
            prediction[mask] = obj.class_id
            salient_union |= mask

    saliency = _box_blur3(salient_union.astype(np.float64)).astype(np.float32)
    cam += rng.uniform(-spec.noise_amplitude, spec.noise_amplitude, size=cam.shape)
    cam = np.clip(cam, 0.0, 1.0).astype(np.float32)
    oacam = np.stack([_max_filter(plane, spec.enlarge) for plane in cam])

    present = tuple(sorted({obj.class_id for obj in spec.objects}))
    return SceneSample(
        gt=gt,
        saliency=saliency,
        cam=AttentionStack(cam),
        oacam=AttentionStack(oacam),
        prediction=prediction,
        record=ImageRecord(image_id=image_id, present_classes=present),
    )


def _boxes_overlap(a, b, gap: int) -> bool:
    ay0, ax0, ay1, ax1 = a
    by0, bx0, by1, bx1 = b
    return not (ay1 + gap <= by0 or by1 + gap <= ay0 or ax1 + gap <= bx0 or bx1 + gap <= ax0)


def random_scene(
    rng: np.random.Generator,
    *,
    height: int,
    width: int,
    class_count: int,
    complex_image: bool,
    cam_peak: float = 0.85,
    cam_offsite: float = 0.45,
    noise_amplitude: float = 0.05,
) -> SceneSpec:
    """Draw a scene layout: salient objects sit centrally, non-salient ones in
    corners, all pairwise disjoint with a safety gap."""
    n_salient = int(rng.integers(1, 3)) if complex_image else 1
    n_nonsalient = int(rng.integers(1, 3)) if complex_image else 0
    n_objects = n_salient + n_nonsalient
    if n_objects > class_count:
        raise ParameterError(
            f"need {n_objects} distinct classes, corpus has {class_count}"
        )
    classes = rng.choice(np.arange(1, class_count + 1), size=n_objects, replace=False)

    objects: list[SceneObject] = []
    boxes: list[tuple[int, int, int, int]] = []
    gap = 4

    # non-salient objects first, each in its own corner
    corners = rng.permutation(4)[:n_nonsalient]
    for i in range(n_nonsalient):
        radius = int(rng.integers(4, 7))
        offset_y = int(rng.integers(radius, radius + 4))
        offset_x = int(rng.integers(radius, radius + 4))
        cy = offset_y if corners[i] in (0, 1) else height - 1 - offset_y
        cx = offset_x if corners[i] in (0, 2) else width - 1 - offset_x
        shape = DISC if rng.random() < 0.5 else RECT
        if shape == DISC:
            obj = SceneObject(int(classes[i]), DISC, (cy, cx, radius), salient=False)
        else:
            obj = SceneObject(
                int(classes[i]),
                RECT,
                (cy - radius, cx - radius, cy + radius + 1, cx + radius + 1),
                salient=False,
            )
        objects.append(obj)
        boxes.append(obj.bbox())

    # salient objects centrally, rejection-sampled against what is placed;
    # extra salient objects that will not fit are dropped (>= 1 always lands)
    for i in range(n_salient):
        placed = False
        for _ in range(200):
            radius = int(rng.integers(4, 8))
            cy = int(rng.integers(height // 4, height * 3 // 4 + 1))
            cx = int(rng.integers(width // 4, width * 3 // 4 + 1))
            shape = DISC if rng.random() < 0.5 else RECT
            if shape == DISC:
                obj = SceneObject(
                    int(classes[n_nonsalient + i]), DISC, (cy, cx, radius), salient=True
                )
            else:
                obj = SceneObject(
                    int(classes[n_nonsalient + i]),
                    RECT,
                    (cy - radius, cx - radius, cy + radius + 1, cx + radius + 1),
                    salient=True,
                )
            box = obj.bbox()
            if not any(_boxes_overlap(box, other, gap) for other in boxes):
                objects.append(obj)
                boxes.append(box)
                placed = True
                break
        if not placed and i == 0:
            raise ParameterError("could not place a salient object without overlap")

    return SceneSpec(
        height=height,
        width=width,
        class_count=class_count,
        objects=objects,
        seed=int(rng.integers(0, 2**63)),
        cam_peak=cam_peak,
        cam_offsite=cam_offsite,
        noise_amplitude=noise_amplitude,
    )


def make_corpus(
    out_dir,
    count: int,
    mix: float,
    seed: int,
    *,
    height: int = 64,
    width: int = 64,
    class_count: int = 6,
    cam_peak: float = 0.85,
    cam_offsite: float = 0.45,
    noise_amplitude: float = 0.05,
) -> list[ImageRecord]:
    """Write a corpus of ``count`` scenes, ``floor(count * mix)`` of them
    complex, to ``out_dir``; returns the manifest records.

    Each image's randomness derives from (seed, index), so images could be
    generated in any order.
    """
    from pathlib import Path

    if count < 1:
        raise ParameterError(f"count must be >= 1, got {count}")
    if not 0.0 <= mix <= 1.0:
        raise ParameterError(f"mix must lie in [0, 1], got {mix}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    n_complex = math.floor(count * mix)

    records = []
    for index in range(count):
        rng = np.random.default_rng((seed, index))
        spec = random_scene(
            rng,
            height=height,
            width=width,
            class_count=class_count,
            complex_image=index < n_complex,
            cam_peak=cam_peak,
            cam_offsite=cam_offsite,
            noise_amplitude=noise_amplitude,
        )
        image_id = f"img{index:04d}"
        sample = generate(spec, image_id=image_id)
        formats.write_label_map(out_dir / f"{image_id}.gt.pgm", sample.gt)
        formats.write_saliency(out_dir / f"{image_id}.sal.pgm", sample.saliency)
        sample.cam.save(out_dir / f"{image_id}.cam.fmap")
        sample.oacam.save(out_dir / f"{image_id}.oacam.fmap")
        formats.write_label_map(out_dir / f"{image_id}.pred.pgm", sample.prediction)
        records.append(sample.record)

    formats.write_manifest(out_dir / "corpus.manifest", records)
    return records


def make_feature_dataset(
    count: int,
    seed: int,
    *,
    grid: tuple[int, int] = (4, 4),
    feat_dim: int = 8,
    class_count: int = 2,
    noise: float = 0.1,
):
    """Linearly separable multi-label toy set for the classifier head.

    Each class owns a block of grid locations and a random unit feature
    direction; present classes add their direction over their block.
    Returns a list of (FeatureGrid, class tuple).
    """
    rng = np.random.default_rng(seed)
    h, w = grid
    loc_count = h * w
    directions = rng.standard_normal((class_count, feat_dim))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    block = loc_count // class_count

    samples = []
    for _ in range(count):
        present = [c for c in range(1, class_count + 1) if rng.random() < 0.5]
        if not present:
            present = [int(rng.integers(1, class_count + 1))]
        x = noise * rng.standard_normal((loc_count, feat_dim))
        for c in present:
            lo = (c - 1) * block
            hi = loc_count if c == class_count else c * block
            x[lo:hi] += directions[c - 1]
        samples.append((FeatureGrid(x, height=h, width=w), tuple(sorted(present))))
    return samples
