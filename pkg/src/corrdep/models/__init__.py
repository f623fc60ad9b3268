from .lstm import LSTMModel, init_lstm, lstm_forward, lstm_train, predict_proba
from .rmsprop import rmsprop_step
from .svm import LinearSVMModel, svm_predict, svm_train
from .voting import majority_vote, split_subsequences

__all__ = [
    "LSTMModel",
    "LinearSVMModel",
    "init_lstm",
    "lstm_forward",
    "lstm_train",
    "majority_vote",
    "predict_proba",
    "rmsprop_step",
    "split_subsequences",
    "svm_predict",
    "svm_train",
]
