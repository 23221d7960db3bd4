"""Context-aware misconfiguration review for router configurations.

Parse Junos-style or JSON configs into a tree, mine related lines for a
target line, and let a chat model ask for exactly the context it needs
before judging the line.
"""

from .classify import (
    Classification,
    ClassificationTable,
    ValueClass,
    build_classification_table,
    build_pooled_table,
    classify,
)
from .mining import (
    ContextBundle,
    ContextType,
    NrOrder,
    assemble_bundle,
    mine_intra_router,
    mine_neighbors,
    mine_neighbors_of_referenceable,
    mine_referenceable,
    mine_similar,
)
from .prompting import (
    DetectionFocus,
    DetectionOptions,
    DetectionSession,
    ProtocolError,
    TextExcerpt,
    TokenBudget,
    Verdict,
    advance,
    run_detection,
    scan,
    start_session,
)
from .providers import ChatMessage, HttpProvider, ProviderConfig, ProviderKind, ScriptedProvider, make_provider
from .tree import (
    ConfigNode,
    ConfigParseError,
    ConfigPath,
    ConfigTree,
    PathSelector,
    parse_file,
    parse_json_tree,
    parse_juniper,
    render_set_line,
    resolve_selector,
    serialize,
)

__version__ = "0.1.0"
