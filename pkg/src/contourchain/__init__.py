"""Binary closed chains of contours with pluggable competition rules."""
from .chain import (
    ChainState,
    ClusterStats,
    Competition,
    LeftPriority,
    LongCluster,
    OddEven,
    RightPriority,
    Rule,
    Side,
    TableRule,
    cluster_stats,
    find_competitions,
    is_free_movement,
    long_cluster_direction,
    make_state,
    move_mask,
    resolve,
    rule_from_name,
    step_deterministic,
)

__version__ = "0.1.0"
