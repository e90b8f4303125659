from .crf import LinearChainCRF, crf_score, train_crf, viterbi
from .logreg import LogisticRegressionGD, LogRegModel, logistic_objective, predict_proba, train_logreg
from .predictions import SentencePrediction, read_predictions, write_predictions
from .threshold import TAU_GRID, DecisionRule, apply_threshold, select_tau
from .token_features import TOKEN_FEATURE_GROUPS, sentence_token_features, token_features

__all__ = [
    "TAU_GRID", "TOKEN_FEATURE_GROUPS", "DecisionRule", "LinearChainCRF", "LogRegModel",
    "LogisticRegressionGD", "SentencePrediction", "apply_threshold", "crf_score",
    "logistic_objective", "predict_proba", "read_predictions", "select_tau",
    "sentence_token_features", "token_features", "train_crf", "train_logreg", "viterbi",
    "write_predictions",
]
