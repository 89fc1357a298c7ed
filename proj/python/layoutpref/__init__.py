"""Aesthetic-aware layout generation toolkit."""

from ._layoutpref import (
    DEFAULT_BINS,
    BBox,
    Canvas,
    Element,
    ElementKind,
    Layout,
    LayoutprefError,
    Policy,
    Sample,
    bin,
    build_prompt,
    dataset_stats,
    detokenize,
    filter_indices,
    heuristic_compare,
    iou,
    judge_prompt,
    load_dataset,
    load_policy,
    make_synthetic,
    mean_iou,
    parse_decision,
    quality,
    render_png,
    run_cli,
    save_dataset,
    tokenize,
    unbin,
)

__all__ = [name for name in dir() if not name.startswith("_")]
