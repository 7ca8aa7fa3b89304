"""Layered entropy: a piecewise-linear companion to Shannon entropy, with codes and bounds built on it."""

from .channels import (
    JointPmf,
    compression_pmf,
    cond_diff_entropy,
    cond_layered,
    cond_shannon,
    conditional_compression,
    layer_channel,
    mutual_information,
    region_sample,
)
from .codes import Codebook, conditional_encoding_report, enumerative_code, huffman, keyframe_stream_demo
from .pmf import (
    InvalidPmfError,
    Pmf,
    SortedPmf,
    bound_h_from_lambda,
    entropy_report,
    layered_entropy,
    min_entropy,
    one_to_one_optimal_length,
    renyi_entropy,
    renyi_layered_entropy,
    shannon_entropy,
    sort_pmf,
)
from .rng import SplitMix64
from .sfrl import bound_chain, crossing_point, sfrl_bound

__version__ = "0.1.0"
