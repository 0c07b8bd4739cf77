"""Core mesh-sequence data types and geometric utilities.

A mesh sequence is a (T, V, 3) float64 array of vertex positions plus a frame
rate. Everything downstream (weights, losses, metrics) consumes this layout.
All functions here are pure: inputs are never mutated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConstraintError

__all__ = [
    "MeshSequence",
    "DeformationSequence",
    "FaceTemplate",
    "VertexRegionMask",
    "ValidationResult",
    "validate_sequence",
    "apply_deformation",
    "translate_sequence",
    "frame_difference_norms",
]


@dataclass(frozen=True)
class MeshSequence:
    """Time-ordered stack of per-frame vertex positions.

    frames: array of shape (T, V, 3), model units.
    fps: frames per second, > 0.
    label: optional text identifier carried through transformations.
    """

    frames: np.ndarray
    fps: float
    label: str | None = None

    @property
    def num_frames(self) -> int:
        return len(self.frames)

    @property
    def num_vertices(self) -> int:
        return np.shape(self.frames[0])[0]


@dataclass(frozen=True)
class DeformationSequence:
    """Per-frame, per-vertex displacement vectors; same layout as MeshSequence."""

    frames: np.ndarray
    fps: float
    label: str | None = None

    @property
    def num_frames(self) -> int:
        return len(self.frames)

    @property
    def num_vertices(self) -> int:
        return np.shape(self.frames[0])[0]


@dataclass(frozen=True)
class FaceTemplate:
    """A static face: (V, 3) vertex positions."""

    vertices: np.ndarray

    @property
    def num_vertices(self) -> int:
        return np.shape(self.vertices)[0]


@dataclass(frozen=True)
class VertexRegionMask:
    """Strictly increasing vertex indices naming a region (e.g. the lips)."""

    indices: np.ndarray
    region_name: str = ""

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        if idx.ndim != 1 or idx.size == 0:
            raise ConstraintError("region mask must be a nonempty 1-d index list")
        if np.any(idx < 0):
            raise ConstraintError("region mask indices must be nonnegative")
        if np.any(np.diff(idx) <= 0):
            raise ConstraintError("region mask indices must be strictly increasing")
        object.__setattr__(self, "indices", idx)

    def validate_for(self, num_vertices: int) -> None:
        """Raise if any index falls outside [0, num_vertices)."""
        top = int(self.indices[-1])
        if top >= num_vertices:
            raise ConstraintError(
                f"region mask '{self.region_name}' index {top} out of range "
                f"for {num_vertices} vertices"
            )

    @classmethod
    def full(cls, num_vertices: int, region_name: str = "all") -> "VertexRegionMask":
        return cls(np.arange(num_vertices), region_name)


@dataclass(frozen=True)
class ValidationResult:
    ok: bool
    error: str | None = None

    def __bool__(self) -> bool:
        return self.ok


def validate_sequence(seq: MeshSequence) -> ValidationResult:
    """Check every MeshSequence invariant without raising.

    Returns the first violated invariant with a diagnostic that names the
    offending frame (and vertex, for non-finite coordinates). Accepts ragged
    per-frame data so broken inputs can be diagnosed rather than crash.
    """
    fps = seq.fps
    if not np.isfinite(fps) or fps <= 0:
        return ValidationResult(False, f"fps must be positive, got {fps}")

    frames = seq.frames
    try:
        num_frames = len(frames)
    except TypeError:
        return ValidationResult(False, "frames is not a sequence of frames")
    if num_frames < 1:
        return ValidationResult(False, "sequence must have at least one frame (T >= 1)")

    first_shape = np.shape(frames[0])
    if len(first_shape) != 2 or first_shape[1] != 3:
        return ValidationResult(
            False, f"frame 0 must have shape (V, 3), got {first_shape}"
        )
    num_vertices = first_shape[0]
    if num_vertices < 1:
        return ValidationResult(False, "frames must have at least one vertex (V >= 1)")

    for t in range(num_frames):
        shape = np.shape(frames[t])
        if shape != first_shape:
            return ValidationResult(
                False,
                f"vertex count mismatch: frame {t} has shape {shape}, "
                f"frame 0 has shape {first_shape}",
            )
        frame = np.asarray(frames[t], dtype=np.float64)
        bad = ~np.isfinite(frame)
        if bad.any():
            v, c = np.argwhere(bad)[0]
            return ValidationResult(
                False,
                f"non-finite coordinate at frame {t}, vertex {v} (component {c})",
            )
    return ValidationResult(True)


def as_frames(frames) -> np.ndarray:
    """Coerce to a (T, V, 3) float64 array, raising on ragged or misshaped input."""
    try:
        arr = np.asarray(frames, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ConstraintError(f"frames are not a regular (T, V, 3) array: {exc}") from exc
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ConstraintError(f"frames must have shape (T, V, 3), got {arr.shape}")
    return arr


def require_same_shape(gt: MeshSequence, pred: MeshSequence) -> tuple[np.ndarray, np.ndarray]:
    """Return both frame arrays, raising if their (T, V, 3) shapes differ."""
    a = as_frames(gt.frames)
    b = as_frames(pred.frames)
    if a.shape != b.shape:
        raise ConstraintError(f"shape mismatch: gt {a.shape} vs pred {b.shape}")
    return a, b


def apply_deformation(template: FaceTemplate, deformation: DeformationSequence) -> MeshSequence:
    """Add per-frame displacement fields to a static template.

    Output frame t, vertex i is template[i] + deformation[t][i]; the frame
    rate is copied from the deformation sequence.
    """
    base = np.asarray(template.vertices, dtype=np.float64)
    disp = as_frames(deformation.frames)
    if base.shape[0] != disp.shape[1]:
        raise ConstraintError(
            f"vertex count mismatch: template has {base.shape[0]} vertices, "
            f"deformation has {disp.shape[1]}"
        )
    return MeshSequence(base[None, :, :] + disp, deformation.fps, deformation.label)


def translate_sequence(seq: MeshSequence, offset) -> MeshSequence:
    """Shift every vertex of every frame by a constant 3-vector."""
    off = np.asarray(offset, dtype=np.float64)
    if off.shape != (3,) or not np.all(np.isfinite(off)):
        raise ConstraintError(f"offset must be a finite 3-vector, got {offset!r}")
    return MeshSequence(as_frames(seq.frames) + off, seq.fps, seq.label)


def frame_difference_norms(seq: MeshSequence) -> np.ndarray:
    """Squared frame-to-frame displacement, summed over all vertices and coords.

    Entry j is sum_i sum_c (frames[j+1, i, c] - frames[j, i, c])**2, so the
    output has length T - 1. Requires T >= 2.
    """
    frames = as_frames(seq.frames)
    if len(frames) < 2:
        raise ConstraintError(
            f"need at least 2 frames to form differences, got {len(frames)}"
        )
    deltas = frames[1:] - frames[:-1]
    return np.sum(deltas * deltas, axis=(1, 2))
