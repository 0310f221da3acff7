"""From-scratch lightweight classifiers and evaluation metrics."""
from .base import Classifier, load_model, model_from_dict
from .forest import RandomForest, fit_rf
from .logit import LogisticRegression, fit_logit
from .metrics import EvalMetrics, auc_score, evaluate, metrics_from_scores, roc_curve, trapezoid_auc
from .svm import SVM, fit_svm
from .tuning import tune

MODEL_CLASSES = {"rf": RandomForest, "svm": SVM, "logit": LogisticRegression}


def make_model(kind, config=None):
    return MODEL_CLASSES[kind](**(config or {}))


__all__ = ["Classifier", "EvalMetrics", "LogisticRegression", "MODEL_CLASSES", "RandomForest",
           "SVM", "auc_score", "evaluate", "fit_logit", "fit_rf", "fit_svm", "load_model",
           "make_model", "metrics_from_scores", "model_from_dict", "roc_curve", "trapezoid_auc",
           "tune"]
