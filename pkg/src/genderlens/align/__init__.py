"""Word alignment: IBM Model 2 with diagonal prior, trained by EM.

The expectation step runs on a compiled Cython kernel when the extension is
built, with a numpy fallback selected at import (see _backend.BACKEND).
"""

from ._backend import BACKEND
from .em import (
    NULL_TOKEN,
    AlignerModel,
    AlignmentLink,
    ParallelCorpus,
    ViterbiAlignment,
    diagonal_prior,
    project_entity,
    train,
    viterbi_align,
)
from .textio import (
    format_pharaoh,
    load_bitext,
    load_parallel_files,
    read_pharaoh,
    tokenize_for_alignment,
    write_pharaoh,
)

__all__ = [
    "BACKEND",
    "NULL_TOKEN",
    "AlignerModel",
    "AlignmentLink",
    "ParallelCorpus",
    "ViterbiAlignment",
    "diagonal_prior",
    "project_entity",
    "train",
    "viterbi_align",
    "format_pharaoh",
    "load_bitext",
    "load_parallel_files",
    "read_pharaoh",
    "tokenize_for_alignment",
    "write_pharaoh",
]
