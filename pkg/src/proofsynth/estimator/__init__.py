"""Neural estimator of inference-rule likelihoods, its training and baselines."""

from .checkpoint import FORMAT_VERSION, FormatVersionMismatchError, load, save
from .encoding import Forest, Vocabulary, canonical_query, enc, tree_arrays
from .estimators import (NeuralEstimator, UniformEstimator, classify,
                         variable_probability)
from .model import (EXTRACT_KEYS, Batch, ModelConfig, ParameterStore, PathBatch,
                    aggregate, ast_conv, backward, cross_entropy, extract,
                    forward, init, loss_and_grads, parameter_shapes, softmax)
from .training import (EncodedQuery, EpochRecord, Hyper, NonFiniteLossError,
                       QueryEncoder, accuracy, adam_update, deterministic_threads,
                       grad_check, make_batch, mean_loss, predict_proba, train,
                       train_step, vocabulary_from)


def uniform_estimator() -> UniformEstimator:
    return UniformEstimator()
