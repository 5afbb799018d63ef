"""videval: multi-aspect quality evaluation for generated videos.

Frame preprocessing, feature-based metrics, score discretization,
agreement/correlation statistics, scorer adapters, benchmark runners,
best-of-K selection, and leaderboard generation.  Neural scorers and
feature encoders stay behind provider hooks.
"""

__version__ = "0.1.0"

from videval.model import (  # noqa: F401
    ASPECTS,
    AspectScores,
    Direction,
    Frame,
    FrameSequence,
    MetricValue,
    PreferencePair,
    RatingLabel,
    Verdict,
    VideoRecord,
)
