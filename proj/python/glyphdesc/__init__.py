"""Window descriptors, spatial pyramids and classifiers for handwritten glyphs."""

from ._core import (
    GlyphError,
    confusion,
    describe,
    descriptor_dimension,
    descriptor_names,
    estimate_homography,
    evaluate,
    format_percent,
    harris,
    process_form,
    run_experiment,
    split,
    synth_glyphs,
)

__all__ = [
    "GlyphError",
    "confusion",
    "describe",
    "descriptor_dimension",
    "descriptor_names",
    "estimate_homography",
    "evaluate",
    "format_percent",
    "harris",
    "process_form",
    "run_experiment",
    "split",
    "synth_glyphs",
]
