"""Word-adjacency networks of texts and their average shortest path length."""

__version__ = "0.1.0"

from .corpus import Language, Manifest, TextDocument, load_document, load_manifest
from .errors import WordAdjError
from .growthcurve import (CheckpointSchedule, GrowthCurve, Mode, ShiftSchedule,
                          curve_for_text, default_checkpoints, group_average)
from .metrics import (aspl, degree_histogram, fit_degree_exponent, heaps_curve, heaps_fit,
                      zipf_fit)
from .model import FitParams, asymptote, fit, l_chain, l_fit, l_rand, sigmoid
from .netbuild import AdjacencyNetwork, full_network, grow, snapshot_at_nodes
from .synth import SynthConfig, generate, synth_curve
from .tokenizer import PunctuationInventory, TokenStream, strip_punctuation, tokenize

__all__ = [
    "AdjacencyNetwork", "CheckpointSchedule", "FitParams", "GrowthCurve", "Language",
    "Manifest", "Mode", "PunctuationInventory", "ShiftSchedule", "SynthConfig",
    "TextDocument", "TokenStream", "WordAdjError", "aspl", "asymptote", "curve_for_text",
    "default_checkpoints", "degree_histogram", "fit", "fit_degree_exponent", "full_network",
    "generate", "grow", "group_average", "heaps_curve", "heaps_fit", "l_chain", "l_fit",
    "l_rand", "load_document", "load_manifest", "sigmoid", "snapshot_at_nodes",
    "strip_punctuation", "synth_curve", "tokenize", "zipf_fit",
]
