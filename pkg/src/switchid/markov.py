"""True and empirical Markov parameters.

For a word w = (w_1, ..., w_k) the Markov parameter is the row

    M_w = C A_{w_k} ... A_{w_2} B_{w_1},     M_epsilon = D,

so the first letter selects the input matrix and the remaining letters,
applied oldest first, select the state transitions.  These rows are what
a single trajectory can reveal about the system: the empirical estimator
correlates y(t) against the input u(t - k) on the event that the mode
sequence q(t - k), ..., q(t - 1) spelled out w, then rescales by the
input covariance and the word probability.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .core import (
    LssModel,
    SwitchingDistribution,
    Word,
    a_word,
    p_word,
    str_to_word,
    word_to_str,
)
from .simulate import SampleSet


@dataclass
class MarkovMap:
    """A finite word -> row-vector table of Markov parameters.

    ``source`` is "true" for parameters computed from model matrices and
    "empirical" for estimates from data; ``meta`` carries estimation
    context (sample size, seed, input covariance) when empirical.
    """

    entries: dict[Word, np.ndarray]
    source: str = "true"
    meta: dict = field(default_factory=dict)

    def __getitem__(self, w: Word) -> np.ndarray:
        return self.entries[w]

    def __contains__(self, w: Word) -> bool:
        return w in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def words(self) -> list[Word]:
        return sorted(self.entries, key=lambda w: (len(w), w))


def true_markov(model: LssModel, w: Word) -> np.ndarray:
    """Markov parameter of the model for one word, as an (m,) row."""
    if len(w) == 0:
        return model.D.copy()
    model.check_word(w)
    head, tail = w[0], w[1:]
    return model.C @ a_word(model, tail) @ model.B[head - 1]


def true_markov_map(model: LssModel, words) -> MarkovMap:
    """Tabulate :func:`true_markov` over an iterable of words."""
    return MarkovMap(
        entries={tuple(w): true_markov(model, tuple(w)) for w in words},
        source="true",
    )


def indicator_chi(q_traj: np.ndarray, w: Word, t: int) -> int:
    """1 if the k modes ending at time t spell w, else 0; 1 for epsilon.

    Concretely, for k = len(w) the indicator checks
    q(t - k + 1) = w_1, ..., q(t) = w_k and requires t - k + 1 >= 0.
    """
    k = len(w)
    if k == 0:
        return 1
    if t - k + 1 < 0 or t >= len(q_traj):
        raise IndexError(f"indicator window [{t - k + 1}, {t}] outside trajectory")
    for j in range(k):
        if q_traj[t - k + 1 + j] != w[j]:
            return 0
    return 1


def z_lagged(u_traj: np.ndarray, q_traj: np.ndarray, w: Word, t: int) -> np.ndarray:
    """Lagged regressor u(t - k) gated by the mode indicator at t - 1.

    For the empty word this is just u(t); for k = len(w) >= 1 it is
    u(t - k) when the modes q(t - k), ..., q(t - 1) spell w and the zero
    vector otherwise.
    """
    u_traj = np.asarray(u_traj, dtype=float)
    if u_traj.ndim == 1:
        u_traj = u_traj.reshape(-1, 1)
    k = len(w)
    if k == 0:
        return u_traj[t].copy()
    if t < k:
        raise IndexError(f"need t >= |w| = {k}, got t = {t}")
    chi = indicator_chi(q_traj, w, t - 1)
    return u_traj[t - k] * float(chi)


def _estimate_word(
    y: np.ndarray,
    u: np.ndarray,
    mode_masks: list[np.ndarray],
    N: int,
    w: Word,
    sigma_u: np.ndarray,
    dist: SwitchingDistribution,
) -> np.ndarray:
    """Shared kernel for the empirical estimator.

    Computes (1 / (N - k)) sum_{t=k+1}^N y(t) z_w(t)^T Sigma_u^{-1} / p_w
    with all time indexing done through shifted slices; ``mode_masks[c]``
    is the boolean array (q == c + 1), shared across words so the batch
    and single-word paths produce bit-identical values.
    """
    k = len(w)
    if N <= k:
        raise ValueError(f"trajectory too short for |w| = {k}: N = {N}")
    L = N - k
    # Terms t = k+1..N: output y(t), input u(t-k), and the indicator that
    # q(t-k+i) = w[i] for i = 0..k-1, i.e. slice i+1 .. L+i of the modes.
    weights = y[k + 1 : N + 1].copy()
    for i, c in enumerate(w):
        weights *= mode_masks[c - 1][i + 1 : L + i + 1]
    s = weights @ u[1 : L + 1]
    row = np.linalg.solve(sigma_u, s)
    return row / (L * p_word(dist, w))


def empirical_markov(
    sample: SampleSet,
    w: Word,
    sigma_u: np.ndarray,
    dist: SwitchingDistribution,
) -> np.ndarray:
    """Estimate one Markov parameter from a single trajectory."""
    w = tuple(w)
    masks = [np.asarray(sample.q == c + 1, dtype=float) for c in range(dist.nQ)]
    return _estimate_word(sample.y, sample.u, masks, sample.N, w, np.asarray(sigma_u, dtype=float), dist)


def empirical_markov_batch(
    sample: SampleSet,
    words,
    sigma_u: np.ndarray,
    dist: SwitchingDistribution,
) -> MarkovMap:
    """Estimate a whole word set in one pass over the trajectory.

    The mode indicator arrays are computed once and shared; each word's
    value is identical to what :func:`empirical_markov` returns for it.
    """
    sigma_u = np.asarray(sigma_u, dtype=float)
    masks = [np.asarray(sample.q == c + 1, dtype=float) for c in range(dist.nQ)]
    entries = {}
    for w in sorted(set(tuple(x) for x in words), key=lambda w: (len(w), w)):
        entries[w] = _estimate_word(sample.y, sample.u, masks, sample.N, w, sigma_u, dist)
    return MarkovMap(
        entries=entries,
        source="empirical",
        meta={"N": sample.N, "seed": sample.seed, "Sigma_u": sigma_u.tolist()},
    )


# ---------------------------------------------------------------------------
# JSON form: {"entries": {"2.2.1": [0.27], "": [0.0]}, "source": ..., "meta": ...}


def save_markov_map(path: str, mmap: MarkovMap) -> None:
    doc = {
        "entries": {word_to_str(w): mmap.entries[w].tolist() for w in mmap.words()},
        "source": mmap.source,
        "meta": mmap.meta,
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def load_markov_map(path: str) -> MarkovMap:
    with open(path) as fh:
        doc = json.load(fh)
    entries = {
        str_to_word(key): np.asarray(val, dtype=float).reshape(-1)
        for key, val in doc["entries"].items()
    }
    return MarkovMap(entries=entries, source=doc.get("source", "true"), meta=doc.get("meta", {}))
