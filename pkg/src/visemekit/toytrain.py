"""An under-capacity linear model for demonstrating loss-weighting effects.

The model predicts each frame as a fixed expansion over K smooth temporal
basis functions (uniform cubic B-spline bumps) with K < T, so it cannot fit
every frame and the training loss decides where the residual error lands.
Training the same model with the plain reconstruction loss versus the
coarticulation-weighted loss makes the weighting's effect measurable:
the weighted run should allocate less error to transition frames.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import metrics
from .coarticulation import (
    CoarticulationWeights,
    LossKind,
    WindowSpec,
    coarticulation_weights,
    grad_loss_pc,
    grad_loss_rec,
    grad_loss_vel,
    loss_pc,
    loss_rec,
    loss_vel,
)
from .errors import ConstraintError, DivergenceError
from .mesh import MeshSequence, VertexRegionMask, as_frames
from .synth import SegmentAnnotation

__all__ = [
    "ToyModel",
    "TrainConfig",
    "TrainReport",
    "AblationRow",
    "AblationResult",
    "temporal_basis",
    "predict",
    "fit",
    "objective_and_gradient",
    "ablate_window",
]


def _cubic_bspline(x: np.ndarray) -> np.ndarray:
    """The standard cubic B-spline bump: support [-2, 2], C2 smooth, peak 2/3."""
    ax = np.abs(x)
    out = np.zeros_like(ax)
    near = ax < 1.0
    mid = (ax >= 1.0) & (ax < 2.0)
    out[near] = 2.0 / 3.0 - ax[near] ** 2 + 0.5 * ax[near] ** 3
    out[mid] = (2.0 - ax[mid]) ** 3 / 6.0
    return out


def temporal_basis(num_frames: int, num_basis: int) -> np.ndarray:
    """Basis matrix (T, K): K bump functions evenly spread over the frames.

    Bump k is the cubic B-spline kernel centered at c_k = linspace over the
    frame range, scaled by the center spacing. With num_basis == num_frames
    the matrix is banded and diagonally dominant (an identity-like basis).
    """
    if num_basis < 1:
        raise ConstraintError("need at least one basis function")
    if num_frames < 1:
        raise ConstraintError("need at least one frame")
    t = np.arange(num_frames, dtype=np.float64)
    if num_basis == 1:
        centers = np.array([0.5 * (num_frames - 1)])
        spacing = max((num_frames - 1) / 4.0, 1.0)
    else:
        centers = np.linspace(0.0, num_frames - 1.0, num_basis)
        spacing = max((num_frames - 1.0) / (num_basis - 1.0), 1e-9)
    return _cubic_bspline((t[:, None] - centers[None, :]) / spacing)


@dataclass
class ToyModel:
    """Trainable coefficients (K, V, 3) over the fixed temporal basis."""

    coef: np.ndarray
    fps: float = 30.0

    @property
    def num_basis(self) -> int:
        return len(self.coef)


@dataclass(frozen=True)
class TrainConfig:
    loss_choice: LossKind = LossKind.PC
    vel_coefficient: float = 0.0
    sigma: int = 2
    learning_rate: float = 1e-2
    steps: int = 2000
    seed: int = 0
    num_basis: int | None = None  # K; defaults to max(T // 4, 1)

    def __post_init__(self):
        if self.loss_choice not in (LossKind.REC, LossKind.PC):
            raise ConstraintError("loss_choice must be REC or PC")
        if self.vel_coefficient < 0:
            raise ConstraintError("vel_coefficient must be >= 0")
        if self.learning_rate <= 0:
            raise ConstraintError("learning_rate must be positive")
        if self.steps < 0:
            raise ConstraintError("steps must be >= 0")
        if self.sigma < 0:
            raise ConstraintError("sigma must be >= 0")


@dataclass(frozen=True)
class TrainReport:
    """Everything observable about one training run."""

    loss_curve: np.ndarray  # objective at the start of each step, length = steps
    final_rec: float
    final_vel: float
    final_pc: float
    metrics: metrics.MetricReport
    lve_transition: float | None = None
    lve_hold: float | None = None


def predict(model: ToyModel, num_frames: int) -> MeshSequence:
    """Evaluate the basis expansion at frames 0..num_frames-1."""
    basis = temporal_basis(num_frames, model.num_basis)
    return MeshSequence(np.tensordot(basis, model.coef, axes=(1, 0)), model.fps)


def objective_and_gradient(
    gt: MeshSequence,
    coef: np.ndarray,
    cfg: TrainConfig,
    basis: np.ndarray | None = None,
    weights: CoarticulationWeights | None = None,
) -> tuple[float, np.ndarray]:
    """Training objective at `coef` and its gradient w.r.t. `coef`.

    The objective is the chosen frame loss plus vel_coefficient times the
    velocity loss; the gradient chains the per-vertex loss gradients through
    the linear basis expansion.
    """
    frames = as_frames(gt.frames)
    coef = np.asarray(coef, dtype=np.float64)
    if basis is None:
        basis = temporal_basis(len(frames), len(coef))
    pred = MeshSequence(np.tensordot(basis, coef, axes=(1, 0)), gt.fps)

    if cfg.loss_choice is LossKind.PC:
        if weights is None:
            weights = coarticulation_weights(gt, WindowSpec(cfg.sigma))
        total = loss_pc(gt, pred, weights).total
        grad_frames = grad_loss_pc(gt, pred, weights)
    else:
        total = loss_rec(gt, pred).total
        grad_frames = grad_loss_rec(gt, pred)

    if cfg.vel_coefficient > 0:
        total += cfg.vel_coefficient * loss_vel(gt, pred).total
        grad_frames = grad_frames + cfg.vel_coefficient * grad_loss_vel(gt, pred)

    return total, np.tensordot(basis, grad_frames, axes=(0, 0))


def fit(
    gt: MeshSequence,
    cfg: TrainConfig,
    annotation: SegmentAnnotation | None = None,
    lips: VertexRegionMask | None = None,
) -> tuple[ToyModel, TrainReport]:
    """Fit the toy model to `gt` by plain gradient descent.

    Deterministic given cfg.seed, which only drives the small uniform noise
    used to initialize the coefficients. Coarticulation weights for the PC
    loss are computed once from `gt` before the loop. Raises DivergenceError
    if the objective goes non-finite. When `annotation` is given the report
    also carries lip error split by transition vs hold frames.
    """
    frames = as_frames(gt.frames)
    num_frames, num_vertices = frames.shape[0], frames.shape[1]
    if num_frames < 2:
        raise ConstraintError("fitting needs at least 2 frames")
    num_basis = cfg.num_basis if cfg.num_basis is not None else max(num_frames // 4, 1)
    if not 1 <= num_basis < num_frames:
        raise ConstraintError(
            f"capacity bottleneck requires 1 <= K < T, got K={num_basis}, T={num_frames}"
        )

    basis = temporal_basis(num_frames, num_basis)
    weights = None
    if cfg.loss_choice is LossKind.PC:
        weights = coarticulation_weights(gt, WindowSpec(cfg.sigma))

    rng = np.random.default_rng(cfg.seed)
    coef = rng.uniform(-0.01, 0.01, size=(num_basis, num_vertices, 3))

    curve = np.empty(cfg.steps)
    for step in range(cfg.steps):
        total, grad = objective_and_gradient(gt, coef, cfg, basis, weights)
        if not np.isfinite(total):
            raise DivergenceError(step)
        curve[step] = total
        coef -= cfg.learning_rate * grad

    model = ToyModel(coef, gt.fps)
    pred = predict(model, num_frames)

    lips_mask = lips if lips is not None else VertexRegionMask.full(num_vertices)
    report_metrics = metrics.evaluate(gt, pred, lips_mask)

    lve_transition = lve_hold = None
    if annotation is not None:
        tmask = annotation.transition_mask()
        if len(tmask) != num_frames:
            raise ConstraintError(
                f"annotation covers {len(tmask)} frames, sequence has {num_frames}"
            )
        per_frame = report_metrics.per_frame_lve
        if tmask.any():
            lve_transition = float(per_frame[tmask].mean())
        if (~tmask).any():
            lve_hold = float(per_frame[~tmask].mean())

    report = TrainReport(
        loss_curve=curve,
        final_rec=loss_rec(gt, pred).total,
        final_vel=loss_vel(gt, pred).total,
        final_pc=loss_pc(gt, pred, weights).total,
        metrics=report_metrics,
        lve_transition=lve_transition,
        lve_hold=lve_hold,
    )
    return model, report


# -- window-size ablation -------------------------------------------------------


@dataclass(frozen=True)
class AblationRow:
    sigma: int | None  # None marks the unweighted (REC) baseline row
    fve: float
    lve: float
    lve_transition: float | None = None
    lve_hold: float | None = None


@dataclass(frozen=True)
class AblationResult:
    """Weighted rows in the order the sigmas were given, baseline row last."""

    rows: tuple[AblationRow, ...]
    best_sigma: int | None

    @property
    def baseline(self) -> AblationRow:
        return self.rows[-1]

    @property
    def weighted_rows(self) -> tuple[AblationRow, ...]:
        return self.rows[:-1]


def ablate_window(
    gt: MeshSequence,
    cfg: TrainConfig,
    sigmas: list[int],
    annotation: SegmentAnnotation | None = None,
    lips: VertexRegionMask | None = None,
) -> AblationResult:
    """Fit once per window radius (weighted loss) plus one unweighted baseline.

    Every run reuses the same seed and hyperparameters so the rows differ
    only in the loss. best_sigma is the radius of the lowest-LVE weighted
    row (None when `sigmas` is empty).
    """

    def run(run_cfg: TrainConfig, sigma: int | None) -> AblationRow:
        _, report = fit(gt, run_cfg, annotation, lips)
        return AblationRow(
            sigma=sigma,
            fve=report.metrics.fve,
            lve=report.metrics.lve,
            lve_transition=report.lve_transition,
            lve_hold=report.lve_hold,
        )

    rows = [
        run(replace(cfg, loss_choice=LossKind.PC, sigma=int(s)), int(s)) for s in sigmas
    ]
    rows.append(run(replace(cfg, loss_choice=LossKind.REC), None))

    best_sigma = None
    if sigmas:
        best_sigma = min(rows[:-1], key=lambda r: r.lve).sigma
    return AblationResult(tuple(rows), best_sigma)
