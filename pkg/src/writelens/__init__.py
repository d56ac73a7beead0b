"""writelens: behavior-sequence analytics for collaborative writing.

Clusters per-author event sequences with two methods (joint
pattern-synopsis clustering and hierarchical clustering over edit
distances), surfaces their consensus and disagreements, mines maximal
sequential patterns, profiles event transitions, generates cluster
summaries, and serves it all over HTTP for the interactive studio.
"""

from .consensus import (
    ConsensusCluster,
    ConsensusResult,
    consensus_partition,
    default_k,
    match_clusters,
)
from .distance import DistanceMatrix, distance_matrix, levenshtein, normalized_distance
from .hicluster import Dendrogram, Partition, agglomerate, cut
from .ingest import (
    ActivityCell,
    AuthorId,
    BehaviorSequence,
    Collection,
    Event,
    EventType,
    Role,
    SequenceStats,
    StageKind,
    activity_table,
    assemble_collections,
    parse_event_log,
    sequence_stats,
    serialize_event_log,
)
from .insight import (
    ARC_HIDDEN_SOURCE,
    ComparisonLayout,
    Recommendation,
    ScatterPoint,
    TransitionEntry,
    TransitionProfile,
    comparison_layout,
    recommend,
    scatter_coords,
    transition_profile,
)
from .patterns import Pattern, mine_maximal, representative
from .session import (
    Cluster,
    Edit,
    SessionState,
    add_cluster,
    apply_summary,
    delete_cluster,
    edit_text,
    init_session,
    load_session,
    move_author,
    replay,
    save_session,
    set_k,
    undo,
)
from .summarize import (
    GenerationBackend,
    HttpTextBackend,
    StaticBackend,
    Summary,
    build_prompt,
    summarize_cluster,
)
from .synopsis import SynopsisCluster, SynopsisResult, max_pattern_count, synopsize

__version__ = "0.1.0"
