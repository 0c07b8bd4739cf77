"""Synthetic viseme tracks with controllable articulatory transitions.

A track holds each target shape until the next one approaches, then crosses
over with a raised-cosine blend, which mimics the gradual, inertia-limited
way real mouth shapes flow into each other. The generator knows exactly
which frames are transitions, so the annotation can serve as ground truth
for segment-conditioned evaluation.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

import numpy as np

from .coarticulation import WindowSpec, coarticulation_weights
from .errors import ConstraintError
from .mesh import MeshSequence

__all__ = [
    "SynthSpec",
    "SegmentAnnotation",
    "CorpusRecord",
    "gen_viseme_track",
    "inject_jitter",
    "make_corpus",
    "spec_hash",
    "demo_spec",
]

TRANSITION_LABEL = "transition"


@dataclass(frozen=True)
class SynthSpec:
    """Parameters of one synthetic track.

    viseme_targets: (time_seconds, shape_id) anchors, strictly increasing in
    time; the track spans time 0 through the last anchor. shape_bank maps
    shape ids to (V, 3) vertex arrays. blend_halfwidth is the half-duration
    of each crossfade in seconds (clamped to half the gap between anchors).
    """

    num_vertices: int
    fps: float
    viseme_targets: tuple[tuple[float, str], ...]
    shape_bank: Mapping[str, np.ndarray]
    blend_halfwidth: float = 0.1
    jitter_amplitude: float = 0.0
    seed: int = 0
    label: str | None = None


@dataclass(frozen=True)
class SegmentAnnotation:
    """Per-frame labels ("transition" or the active shape id) and a flag for
    frames whose generator-known motion energy exceeds the track median."""

    labels: tuple[str, ...]
    high_motion: np.ndarray

    def transition_mask(self) -> np.ndarray:
        return np.array([lab == TRANSITION_LABEL for lab in self.labels])


def _validate_spec(spec: SynthSpec) -> None:
    if spec.num_vertices < 1:
        raise ConstraintError("num_vertices must be >= 1")
    if spec.fps <= 0:
        raise ConstraintError(f"fps must be positive, got {spec.fps}")
    if spec.blend_halfwidth < 0:
        raise ConstraintError("blend_halfwidth must be >= 0")
    if spec.jitter_amplitude < 0:
        raise ConstraintError("jitter_amplitude must be >= 0")
    if not spec.viseme_targets:
        raise ConstraintError("need at least one viseme target")
    times = [t for t, _ in spec.viseme_targets]
    if any(b <= a for a, b in zip(times, times[1:])):
        raise ConstraintError(f"target times must be strictly increasing, got {times}")
    if times[0] < 0:
        raise ConstraintError("target times must be nonnegative")
    for _, shape_id in spec.viseme_targets:
        if shape_id not in spec.shape_bank:
            raise ConstraintError(f"shape id {shape_id!r} not found in shape bank")
    for name, shape in spec.shape_bank.items():
        arr = np.asarray(shape, dtype=np.float64)
        if arr.shape != (spec.num_vertices, 3):
            raise ConstraintError(
                f"shape {name!r} has shape {arr.shape}, expected ({spec.num_vertices}, 3)"
            )
        if not np.all(np.isfinite(arr)):
            raise ConstraintError(f"shape {name!r} contains non-finite coordinates")


def _blend_factor(u: float, lo: float, hi: float) -> float:
    # Raised-cosine ramp from 0 at lo to 1 at hi; 1/2 at the midpoint.
    if hi <= lo:
        return 0.0 if u < 0.5 * (lo + hi) else 1.0
    if u <= lo:
        return 0.0
    if u >= hi:
        return 1.0
    return 0.5 * (1.0 - np.cos(np.pi * (u - lo) / (hi - lo)))


def gen_viseme_track(spec: SynthSpec) -> tuple[MeshSequence, SegmentAnnotation]:
    """Render a spec into a mesh sequence plus its segment annotation.

    Every clean frame is a convex combination of the two temporally nearest
    bank shapes; jitter (if any) is layered on afterwards via inject_jitter
    with the spec's seed, so the same spec always produces identical bytes.
    """
    _validate_spec(spec)
    times = [t for t, _ in spec.viseme_targets]
    shapes = [
        np.asarray(spec.shape_bank[sid], dtype=np.float64)
        for _, sid in spec.viseme_targets
    ]
    ids = [sid for _, sid in spec.viseme_targets]

    num_frames = int(round(times[-1] * spec.fps)) + 1
    frames = np.empty((num_frames, spec.num_vertices, 3))
    labels: list[str] = []
    for f in range(num_frames):
        u = f / spec.fps
        if u <= times[0]:
            frames[f] = shapes[0]
            labels.append(ids[0])
            continue
        if u >= times[-1]:
            frames[f] = shapes[-1]
            labels.append(ids[-1])
            continue
        seg = int(np.searchsorted(times, u, side="right")) - 1
        mid = 0.5 * (times[seg] + times[seg + 1])
        half = min(spec.blend_halfwidth, 0.5 * (times[seg + 1] - times[seg]))
        alpha = _blend_factor(u, mid - half, mid + half)
        frames[f] = (1.0 - alpha) * shapes[seg] + alpha * shapes[seg + 1]
        if 0.0 < alpha < 1.0:
            labels.append(TRANSITION_LABEL)
        else:
            labels.append(ids[seg] if alpha == 0.0 else ids[seg + 1])

    clean = MeshSequence(frames, spec.fps, spec.label)

    if num_frames >= 2:
        energy = coarticulation_weights(clean, WindowSpec()).raw_energy
    else:
        energy = np.zeros(num_frames)
    high_motion = energy > np.median(energy)
    annotation = SegmentAnnotation(tuple(labels), high_motion)

    track = clean
    if spec.jitter_amplitude > 0:
        track = inject_jitter(clean, spec.jitter_amplitude, spec.seed)
    return track, annotation


def inject_jitter(seq: MeshSequence, amplitude: float, seed: int) -> MeshSequence:
    """Perturb every coordinate with uniform noise in [-amplitude, amplitude].

    The noise comes from numpy's PCG64 stream seeded with `seed`, so repeat
    calls are bitwise identical; the generator id is recorded in the label.
    Amplitude 0 returns the input unchanged.
    """
    if amplitude < 0:
        raise ConstraintError("jitter amplitude must be >= 0")
    if amplitude == 0:
        return seq
    rng = np.random.default_rng(seed)
    frames = np.asarray(seq.frames, dtype=np.float64)
    noise = rng.uniform(-amplitude, amplitude, size=frames.shape)
    tag = f"jitter(uniform,pcg64,amp={amplitude:g},seed={seed})"
    label = f"{seq.label}+{tag}" if seq.label else tag
    return MeshSequence(frames + noise, seq.fps, label)


# -- corpus generation ---------------------------------------------------------


@dataclass(frozen=True)
class CorpusRecord:
    sequence_path: str
    annotation_path: str
    seed: int
    spec_sha256: str


def spec_hash(spec: SynthSpec) -> str:
    """SHA-256 of the spec's canonical text rendering (see io.format_synth_spec)."""
    from .io import format_synth_spec

    return hashlib.sha256(format_synth_spec(spec).encode("utf-8")).hexdigest()


def make_corpus(specs: list[SynthSpec], out_dir) -> list[CorpusRecord]:
    """Generate every spec into `out_dir` and write a manifest.

    Emits trackNNN.msq + trackNNN.ann.csv per spec and manifest.txt with one
    tab-separated record per sequence: sequence path, annotation path, seed,
    spec hash. Regenerating from the same specs reproduces identical bytes.
    """
    from .io import write_annotation, write_msq

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    records: list[CorpusRecord] = []
    for i, spec in enumerate(specs):
        seq, annotation = gen_viseme_track(spec)
        seq_name = f"track{i:03d}.msq"
        ann_name = f"track{i:03d}.ann.csv"
        write_msq(seq, out / seq_name)
        write_annotation(annotation, out / ann_name)
        records.append(CorpusRecord(seq_name, ann_name, spec.seed, spec_hash(spec)))

    lines = ["# sequence\tannotation\tseed\tspec_sha256"]
    lines += [
        f"{r.sequence_path}\t{r.annotation_path}\t{r.seed}\t{r.spec_sha256}"
        for r in records
    ]
    (out / "manifest.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    return records


# -- a ready-made corpus recipe -------------------------------------------------


def demo_spec(
    seed: int,
    num_vertices: int = 60,
    num_frames: int = 120,
    fps: float = 30.0,
    num_lip_vertices: int = 20,
    lip_scale: float = 0.8,
    face_scale: float = 0.05,
    blend_halfwidth: float = 0.1,
    jitter_amplitude: float = 0.01,
    num_targets: int = 8,
) -> SynthSpec:
    """A track with strong viseme transitions, for demos and experiments.

    Vertices [0, num_lip_vertices) act as the "lip" region: the bank shapes
    differ mostly there, so transitions show up as concentrated lip motion.
    Targets are evenly spaced so the track has exactly `num_frames` frames.
    """
    rng = np.random.default_rng(seed)
    base = rng.normal(0.0, 0.5, size=(num_vertices, 3))
    bank: dict[str, np.ndarray] = {"rest": base}
    num_shapes = 4
    for k in range(num_shapes):
        shape = base.copy()
        shape[:num_lip_vertices] += rng.normal(0.0, lip_scale, size=(num_lip_vertices, 3))
        shape[num_lip_vertices:] += rng.normal(
            0.0, face_scale, size=(num_vertices - num_lip_vertices, 3)
        )
        bank[f"vis{k}"] = shape

    duration = (num_frames - 1) / fps
    anchor_times = np.linspace(0.0, duration, num_targets)
    names = list(bank)
    targets = []
    prev = None
    for t in anchor_times:
        choices = [n for n in names if n != prev]
        name = choices[int(rng.integers(len(choices)))]
        targets.append((float(t), name))
        prev = name

    return SynthSpec(
        num_vertices=num_vertices,
        fps=fps,
        viseme_targets=tuple(targets),
        shape_bank=bank,
        blend_halfwidth=blend_halfwidth,
        jitter_amplitude=jitter_amplitude,
        seed=seed,
        label=f"demo-{seed}",
    )
