from .naive_bayes import NBModel, nb_predict, nb_train
from .random_forest import RFModel, rf_predict, rf_train
from .svm import SVMModel, svm_objective, svm_predict, svm_train
from .serialize import load_model, save_model

__all__ = [
    "NBModel", "nb_train", "nb_predict",
    "SVMModel", "svm_train", "svm_predict", "svm_objective",
    "RFModel", "rf_train", "rf_predict",
    "save_model", "load_model",
]
