"""studioscope: recording-studio features and corpus analysis for stereo music.

Extracts four studio-meter features (tempo, phase-space occupancy, channel
correlation, crest factor) from stereo tracks, aggregates them per track,
and analyzes labeled corpora with a two-way MANOVA, a self-organizing map
and a random forest classifier.  The ``studioscope`` CLI chains the stages
and exports machine-readable reports plus an interactive map bundle.
"""

from .corpus import (
    FEATURE_NAMES,
    FeatureVector,
    NormalizedCorpus,
    TrackRecord,
    feature_correlations,
    ingest_feature_table,
    normalize,
    save_corpus,
)
from .features import (
    ExtractionConfig,
    FrameFeatures,
    StereoSignal,
    channel_correlation,
    crest_factor,
    decode_audio,
    estimate_bpm,
    extract_corpus,
    phase_space,
    track_features,
)
from .forest import EvalReport, Forest, ForestConfig, cross_validate, predict, style_report, train_forest
from .som import Placement, SomConfig, SomGrid, bmu, component_planes, group_distances, group_location_variance, place_tracks, train_som, u_matrix
from .stats import AnovaResult, BoxplotSummary, ManovaResult, anova_posthoc, boxplot_summary, manova_two_way

__version__ = "0.1.0"
