"""Coarticulation-aware losses and lip metrics for vertex animation.

The package turns a ground-truth vertex sequence into per-frame attention:
windowed motion energy, softmax-normalized, weighting the reconstruction
error so frames with fast lip motion (viseme transitions) count more.
Alongside the losses it ships the evaluation metrics (FVE, LVE, LDTW,
Lip-max), a synthetic viseme-track generator, and a deliberately
under-capacity toy model for demonstrating what the weighting buys.
"""

from .coarticulation import (
    BoundaryPolicy,
    CoarticulationWeights,
    LossKind,
    LossReport,
    WindowSpec,
    coarticulation_weights,
    finite_difference_gradient,
    grad_loss_pc,
    grad_loss_rec,
    grad_loss_vel,
    loss_pc,
    loss_rec,
    loss_vel,
    motion_energy,
    relative_gradient_error,
    strict_frame_range,
)
from .errors import ConstraintError, DivergenceError, FormatError, VisemekitError
from .io import (
    format_csv_report,
    format_synth_spec,
    format_train_config,
    import_obj_sequence,
    parse_synth_spec,
    parse_train_config,
    read_annotation,
    read_mask,
    read_msq,
    write_annotation,
    write_csv_report,
    write_loss_curve,
    write_msq,
)
from .mesh import (
    DeformationSequence,
    FaceTemplate,
    MeshSequence,
    ValidationResult,
    VertexRegionMask,
    apply_deformation,
    frame_difference_norms,
    translate_sequence,
    validate_sequence,
)
from .metrics import DtwResult, MetricReport, dtw, evaluate, fve, ldtw, lip_max, lve
from .synth import (
    CorpusRecord,
    SegmentAnnotation,
    SynthSpec,
    demo_spec,
    gen_viseme_track,
    inject_jitter,
    make_corpus,
    spec_hash,
)
from .toytrain import (
    AblationResult,
    AblationRow,
    ToyModel,
    TrainConfig,
    TrainReport,
    ablate_window,
    fit,
    objective_and_gradient,
    predict,
    temporal_basis,
)

__version__ = "0.1.0"

__all__ = [
    "BoundaryPolicy",
    "CoarticulationWeights",
    "LossKind",
    "LossReport",
    "WindowSpec",
    "coarticulation_weights",
    "finite_difference_gradient",
    "grad_loss_pc",
    "grad_loss_rec",
    "grad_loss_vel",
    "loss_pc",
    "loss_rec",
    "loss_vel",
    "motion_energy",
    "relative_gradient_error",
    "strict_frame_range",
    "ConstraintError",
    "DivergenceError",
    "FormatError",
    "VisemekitError",
    "format_csv_report",
    "format_synth_spec",
    "format_train_config",
    "import_obj_sequence",
    "parse_synth_spec",
    "parse_train_config",
    "read_annotation",
    "read_mask",
    "read_msq",
    "write_annotation",
    "write_csv_report",
    "write_loss_curve",
    "write_msq",
    "DeformationSequence",
    "FaceTemplate",
    "MeshSequence",
    "ValidationResult",
    "VertexRegionMask",
    "apply_deformation",
    "frame_difference_norms",
    "translate_sequence",
    "validate_sequence",
    "DtwResult",
    "MetricReport",
    "dtw",
    "evaluate",
    "fve",
    "ldtw",
    "lip_max",
    "lve",
    "CorpusRecord",
    "SegmentAnnotation",
    "SynthSpec",
    "demo_spec",
    "gen_viseme_track",
    "inject_jitter",
    "make_corpus",
    "spec_hash",
    "AblationResult",
    "AblationRow",
    "ToyModel",
    "TrainConfig",
    "TrainReport",
    "ablate_window",
    "fit",
    "objective_and_gradient",
    "predict",
    "temporal_basis",
    "__version__",
]
