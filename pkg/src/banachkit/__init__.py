"""Desk-scale workbench for block sequences in concrete Banach sequence spaces.

Exact norms (l_p, c_0, l_p sums of finite dimensional pieces, an interleaved
direct sum, the James space), block/NCCB sequence machinery, empirical
goodness and spreading-model detection, asymptotic-game constants, and
finite Ramsey/Hindman/Milliken-Taylor monochromatic searches driving an
NCCB stabilization procedure.
"""

from .spaces import (
    C0,
    Interleave,
    James,
    Lp,
    LpSum,
    SegmentIndex,
    SparseVector,
    SpaceSpec,
    make_example_space,
    norm,
    segment_of,
    space_from_doc,
    type_p_witness,
)
from .combinatorics import (
    Blocking,
    Coloring,
    FiniteSet,
    SearchCertificate,
    coarsenings,
    diagonal,
    finite_unions,
    hindman_search,
    is_blocking,
    is_coarser,
    milliken_taylor_search,
    ramsey_search,
)
from .blockseq import (
    BlockArray,
    BlockSequence,
    BlockTree,
    block_sums,
    branch,
    combine,
    interleave_array,
    merge_blocking,
    nccb_from_blocking,
    nccb_of_sequence,
    subsequence_tree,
    tree_from_array,
)
from .analysis import (
    EquivalenceReport,
    GoodnessReport,
    KrivineReport,
    LpReference,
    ScalarNet,
    SequenceReference,
    SpreadingEstimate,
    StabilizationResult,
    brunel_sucheston_extract,
    equivalence_constant,
    verify_example_space,
    goodness_test,
    krivine_p_estimate,
    nccb_stabilize,
    norm_quantization_coloring,
    spreading_model_estimate,
)
from .games import (
    AsymptoticReport,
    AsymptoticVerdict,
    BranchExtraction,
    GameTranscript,
    ProtocolViolationError,
    Strategy,
    asymptotic_lp_verdict,
    good_branch_extract,
    play,
    stabilized_constant,
    strategy_from_name,
    subspace_constant,
    subspace_tail,
    vector_nccb,
    vector_net,
    vector_unit,
)

__version__ = "0.1.0"
