from __future__ import annotations

import numpy as np

from ..errors import EmptyVote, LengthMismatch, SequenceTooShort

SUBSEQ_LEN = 128


def split_subsequences(values, length: int = SUBSEQ_LEN) -> list[np.ndarray]:
    """Consecutive non-overlapping blocks of ``length`` frames; the remainder is dropped."""
    values = np.asarray(values)
    n = len(values) // length
    if n == 0:
        raise SequenceTooShort(f"{len(values)} frames < subsequence length {length}")
    return [values[k * length:(k + 1) * length] for k in range(n)]


def majority_vote(labels, scores) -> int:
    """Most frequent label (1 = depressed).

    Ties go to depressed when the mean positive-class probability is >= 0.5.
    """
    labels = np.asarray(labels, dtype=int)
    scores = np.asarray(scores, dtype=np.float64)
    if len(labels) == 0:
        raise EmptyVote("no votes")
    if len(labels) != len(scores):
        raise LengthMismatch("labels and scores differ in length")
    n_pos = int(labels.sum())
    n_neg = len(labels) - n_pos
    if n_pos != n_neg:
        return int(n_pos > n_neg)
    return int(scores.mean() >= 0.5)
