"""Posture classification from wearable UWB inter-node ranges.

Five body-worn ultra-wideband nodes measure their pairwise distances; those
10 ranges are the feature vector for nine-way posture classification (KNN,
SVM, MLP, all implemented from scratch), evaluated subject-wise and replayed
into simulated robot velocity commands.
"""

__version__ = "0.1.0"

from .classifiers import (
    GridSearchSpec,
    KnnClassifier,
    MlpClassifier,
    MlpConfig,
    Scaler,
    SvmClassifier,
    load_model,
    save_model,
    select_k_elbow,
    svm_grid_search,
)
from .commander import (
    FrameQueue,
    RobotKind,
    RobotState,
    SmootherConfig,
    SpeedConfig,
    StreamFrame,
    VelocityCommand,
    integrate_step,
    map_posture,
    read_stream,
    replay,
    smooth,
    write_session_log,
)
from .dataset import (
    Dataset,
    PostureClass,
    SkeletonParams,
    SubjectRecord,
    generate_synthetic,
    load_csv,
    loocv_split,
    save_csv,
    to_arrays,
)
from .evaluation import (
    AblationPolicy,
    ClassMetrics,
    ConfusionMatrix,
    EvaluationReport,
    ModelSpec,
    class_metrics,
    confusion,
    latency_profile,
    mean_balanced_accuracy,
    node_ablation,
    noise_sweep,
    overall_accuracy,
    run_loocv,
)
from .ranging import (
    NodeId,
    NodePair,
    NoiseScenario,
    NoiseSpec,
    RangeSample,
    RangingErrorModel,
    build_features,
    canonical_pairs,
    inject_noise,
    simulate_range,
)
