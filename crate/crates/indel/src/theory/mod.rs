pub mod align;
pub mod enumerate;
pub mod natures;
pub mod typical;

pub use align::{align, alignment_of, unresolved_fraction, AlignmentNode, AmbiguityRate, AlignmentTree, GlobalAlignment, SplitKind};
pub use enumerate::{construction_counts, enumerate_post_edit_set, post_edit_set_size, ConstructionCounts};
pub use natures::{estimate_natures_secret, posterior, NaturesSecret};
pub use typical::{
    extended_run_edit_counts, is_typical, recombine, typicalize, typicalized_posess, ComplementEntry, RunEditCounts,
    TypicalizedPattern,
};
