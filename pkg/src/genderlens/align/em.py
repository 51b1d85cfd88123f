"""Reparameterized IBM Model 2: diagonal distortion prior, NULL mass, EM.

The translation table is stored sparsely over the co-occurrence support
(CSR over source ids, NULL included as source id 0). The distortion weight
of source position i (1-based, n source words) for target position j is
proportional to exp(-lambda * |i/n - j/m|), renormalized over non-NULL
positions and scaled by (1 - p0); the NULL position carries p0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ValidationError
from ._backend import BACKEND, em_pass

__all__ = [
    "NULL_TOKEN",
    "ParallelCorpus",
    "AlignerModel",
    "AlignmentLink",
    "ViterbiAlignment",
    "diagonal_prior",
    "train",
    "viterbi_align",
    "project_entity",
]

NULL_TOKEN = "<NULL>"

_EPSILON = 1e-12  # add-epsilon in the M-step; guards zero rows, not smoothing


class ParallelCorpus:
    """Tokenized sentence pairs with dense vocabularies (source NULL at id 0)."""

    def __init__(self, pairs: list[tuple[list[str], list[str]]]):
        if not pairs:
            raise ValidationError("parallel corpus is empty")
        self.src_vocab: dict[str, int] = {NULL_TOKEN: 0}
        self.tgt_vocab: dict[str, int] = {}
        self.pairs: list[tuple[np.ndarray, np.ndarray]] = []
        for idx, (src, tgt) in enumerate(pairs):
            if not src or not tgt:
                raise ValidationError(f"sentence pair {idx} has an empty side")
            src_ids = np.array(
                [self.src_vocab.setdefault(w, len(self.src_vocab)) for w in src],
                dtype=np.int32,
            )
            tgt_ids = np.array(
                [self.tgt_vocab.setdefault(w, len(self.tgt_vocab)) for w in tgt],
                dtype=np.int32,
            )
            self.pairs.append((src_ids, tgt_ids))

    def __len__(self) -> int:
        return len(self.pairs)


@dataclass(frozen=True)
class AlignmentLink:
    source_index: int  # 0-based source word position (NULL never linked)
    target_index: int


@dataclass(frozen=True)
class ViterbiAlignment:
    """Links plus per-position diagnostics for OOV fallbacks."""

    links: list[AlignmentLink]
    oov_source_positions: tuple[int, ...] = ()
    distortion_only_targets: tuple[int, ...] = ()


class AlignerModel:
    """Trained translation table over the co-occurrence support."""

    def __init__(self, src_vocab, tgt_vocab, row_ptr, col_tgt, theta, lam, p0,
                 iterations, log_likelihoods):
        self.src_vocab = src_vocab
        self.tgt_vocab = tgt_vocab
        self._row_ptr = row_ptr          # (S + 1,) int64, CSR over source ids
        self._col_tgt = col_tgt          # (K,) int32, sorted target ids per row
        self.theta = theta               # (K,) float64
        self.lam = lam
        self.p0 = p0
        self.iterations = iterations
        self.log_likelihoods = log_likelihoods

    def row_slice(self, src_id: int) -> slice:
        return slice(self._row_ptr[src_id], self._row_ptr[src_id + 1])

    def row_sums(self) -> np.ndarray:
        return np.add.reduceat(self.theta, self._row_ptr[:-1])

    def translation_prob(self, src_id: int, tgt_id: int) -> float:
        """theta[s][t]; 0.0 outside the support."""
        row = self.row_slice(src_id)
        cols = self._col_tgt[row]
        pos = np.searchsorted(cols, tgt_id)
        if pos < len(cols) and cols[pos] == tgt_id:
            return float(self.theta[row.start + pos])
        return 0.0

    def _theta_column(self, src_ids: np.ndarray, tgt_id: int) -> np.ndarray:
        """theta[s][t] for NULL plus each source position; zeros off-support."""
        out = np.zeros(len(src_ids) + 1, dtype=np.float64)
        for pos, src_id in enumerate([0, *src_ids.tolist()]):
            if src_id < 0:
                continue
            out[pos] = self.translation_prob(src_id, tgt_id)
        return out


def diagonal_prior(n: int, m: int, lam: float, p0: float) -> np.ndarray:
    """(n + 1) x m alignment prior; row 0 is NULL with constant mass p0."""
    i = np.arange(1, n + 1, dtype=np.float64)[:, None] / n
    j = np.arange(1, m + 1, dtype=np.float64)[None, :] / m
    w = np.exp(-lam * np.abs(i - j))
    w *= (1.0 - p0) / w.sum(axis=0, keepdims=True)
    return np.vstack([np.full((1, m), p0), w])


def _build_support(corpus: ParallelCorpus):
    """CSR co-occurrence support: every (source id incl. NULL, target id) type."""
    per_row: list[set[int]] = [set() for _ in range(len(corpus.src_vocab))]
    for src_ids, tgt_ids in corpus.pairs:
        tgt_set = set(tgt_ids.tolist())
        per_row[0].update(tgt_set)
        for s in src_ids.tolist():
            per_row[s].update(tgt_set)
    row_ptr = np.zeros(len(per_row) + 1, dtype=np.int64)
    for s, row in enumerate(per_row):
        row_ptr[s + 1] = row_ptr[s] + len(row)
    col_tgt = np.empty(row_ptr[-1], dtype=np.int32)
    for s, row in enumerate(per_row):
        col_tgt[row_ptr[s]:row_ptr[s + 1]] = sorted(row)
    return row_ptr, col_tgt


def _build_layout(corpus: ParallelCorpus, row_ptr, col_tgt, lam, p0):
    """Flatten per-pair index/prior blocks for the kernel."""
    blocks_k, blocks_d, offsets, rows, cols = [], [], [], [], []
    off = 0
    for src_ids, tgt_ids in corpus.pairs:
        n, m = len(src_ids), len(tgt_ids)
        kmat = np.empty((n + 1, m), dtype=np.int32)
        for pos, src_id in enumerate([0, *src_ids.tolist()]):
            lo, hi = row_ptr[src_id], row_ptr[src_id + 1]
            kmat[pos] = lo + np.searchsorted(col_tgt[lo:hi], tgt_ids)
        blocks_k.append(kmat.ravel())
        blocks_d.append(diagonal_prior(n, m, lam, p0).ravel())
        offsets.append(off)
        rows.append(n + 1)
        cols.append(m)
        off += (n + 1) * m
    return (
        np.concatenate(blocks_k),
        np.concatenate(blocks_d),
        np.array(offsets, dtype=np.int64),
        np.array(rows, dtype=np.int32),
        np.array(cols, dtype=np.int32),
    )


def train(
    corpus: ParallelCorpus,
    iterations: int = 5,
    lam: float = 4.0,
    p0: float = 0.08,
) -> AlignerModel:
    """EM-train the model; per-iteration log-likelihood is recorded.

    lam=0 is accepted as the uniform-distortion limit. Initialization is
    uniform over each source word's co-occurrence support, which keeps the
    table row-stochastic from the start.
    """
    if iterations < 1:
        raise ValidationError("iterations must be >= 1")
    if lam < 0:
        raise ValidationError("tension lambda must be non-negative")
    if not 0 < p0 < 1:
        raise ValidationError("null probability p0 must lie in (0, 1)")

    row_ptr, col_tgt = _build_support(corpus)
    kflat, dflat, offsets, rows, cols = _build_layout(
        corpus, row_ptr, col_tgt, lam, p0
    )

    row_lengths = np.diff(row_ptr)
    row_of_k = np.repeat(np.arange(len(row_lengths)), row_lengths)
    theta = (1.0 / row_lengths)[row_of_k]

    log_likelihoods = []
    for _ in range(iterations):
        counts = np.zeros_like(theta)
        ll = em_pass(theta, kflat, dflat, offsets, rows, cols, counts)
        log_likelihoods.append(float(ll))
        counts += _EPSILON
        row_sums = np.bincount(row_of_k, weights=counts, minlength=len(row_lengths))
        theta = counts / row_sums[row_of_k]

    return AlignerModel(
        corpus.src_vocab, corpus.tgt_vocab, row_ptr, col_tgt, theta,
        lam, p0, iterations, log_likelihoods,
    )


def viterbi_align(
    model: AlignerModel,
    source: list[str],
    target: list[str],
) -> ViterbiAlignment:
    """Hard-align one pair: per target position, the argmax source position.

    NULL winners emit no link; ties break toward the smaller source index.
    Positions where every translation probability is zero (OOV on either
    side, or outside the trained support) fall back to distortion-only
    scoring and are reported in the diagnostics, never raised.
    """
    if not source or not target:
        raise ValidationError("viterbi_align requires non-empty sentences")
    src_ids = np.array([model.src_vocab.get(w, -1) for w in source], dtype=np.int64)
    tgt_ids = [model.tgt_vocab.get(w, -1) for w in target]
    n, m = len(source), len(target)
    prior = diagonal_prior(n, m, model.lam, model.p0)

    links = []
    distortion_only = []
    for j, tgt_id in enumerate(tgt_ids):
        if tgt_id >= 0:
            scores = model._theta_column(src_ids, tgt_id) * prior[:, j]
        else:
            scores = np.zeros(n + 1)
        if scores.max() <= 0.0:
            scores = prior[:, j]
            distortion_only.append(j)
        best = int(np.argmax(scores))  # first max: NULL, then ascending source
        if best > 0:
            links.append(AlignmentLink(source_index=best - 1, target_index=j))
    return ViterbiAlignment(
        links=links,
        oov_source_positions=tuple(
            int(i) for i in np.flatnonzero(src_ids < 0)
        ),
        distortion_only_targets=tuple(distortion_only),
    )


def project_entity(links: list[AlignmentLink], entity_index: int) -> set[int]:
    """Target indices linked to one source position; empty set = miss."""
    return {l.target_index for l in links if l.source_index == entity_index}


def backend() -> str:
    """Name of the active EM kernel ("cython" or "python")."""
    return BACKEND
