"""Class-incremental classification from per-class one-class SVMs.

Each class gets its own one-class SVM whose kernel width is chosen so the
support vectors hug the class boundary; regions claimed by zero or several
classes are settled by 1vs1 SVMs trained on the stored support vectors, so
registering a new class never retrains existing models.
"""

from .cil import (
    BatchSvm,
    CilConfig,
    CilModel,
    PredictionDetail,
    add_class,
    batch_svm_classify,
    batch_svm_predict,
    knn_predict,
    load,
    new_model,
    ocsvm_nn_predict,
    predict,
    predict_detail,
    save,
    train_batch_svm,
)
from .dataset import (
    LabeledDataset,
    Scaler,
    SplitSpec,
    fit_standardize,
    load_csv,
    load_uci,
    make_toy,
    make_waveform,
    stratified_split,
)
from .geometry import BoundaryPartition, WidthSelection, beps_partition, mies_score, select_width
from .kernels import GramMatrix, KernelWidth, candidate_widths, gaussian, gram
from .ocsvm import (
    OcsvmModel,
    decision_value,
    normalized_distance,
    predict_one,
    sv_fraction,
    train_ocsvm,
)
from .pairwise import CvConfig, PairwiseClassifier, predict_pair, train_pair
from .smo import DualSolution, SolverConfig, solve_binary_dual, solve_ocsvm_dual

__version__ = "0.1.0"
