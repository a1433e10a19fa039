"""Approximate kernel SVM training on a precomputed low-rank kernel factor."""
from .dataio import Dataset, LabelMap, SparseVector, build_label_map, load_libsvm, parse_libsvm
from .factor import LowRankFactor, build_factor
from .kernel import KernelParams, gaussian, kernel_block
from .model import export_model, import_model, load_model, predict_file, save_model
from .modelsel import cross_validate, grid_search, kfold_split
from .multiclass import OvoModel, SolverOptions, ovo_predict, ovo_train

__version__ = "0.1.0"

__all__ = [
    "Dataset", "LabelMap", "SparseVector", "build_label_map", "load_libsvm", "parse_libsvm",
    "LowRankFactor", "build_factor", "KernelParams", "gaussian", "kernel_block",
    "export_model", "import_model", "load_model", "predict_file", "save_model",
    "cross_validate", "grid_search", "kfold_split", "OvoModel", "SolverOptions", "ovo_predict", "ovo_train",
]
