pub mod bounds;
pub mod coder;
pub mod container;
pub mod dp;
pub mod edit;
pub mod error;
pub mod seq;
pub mod sim;
pub mod theory;

pub use dp::{edit_distance, edit_distance_banded, edit_distance_full, DpMode, DpResult};
pub use edit::{
    apply_edit_pattern, canonicalize_arbitrary, replay_arbitrary, ArbitraryEdit, ArbitraryOp, CanonicalEdits, EditOp,
    EditPattern, Insertion, OpKind,
};
pub use error::{Error, Result};
pub use seq::{run_decompose, Alphabet, Run, RunDecomposition, Sequence, Symbol};
pub use bounds::{achievable_upper, apes_lower_bound, binary_entropy, c_constant, rpes_lower_bound, Model, RateBound};
pub use coder::{decode_contents, decode_ops, empirical_op_entropy, encode_contents, encode_ops, BitStream, OpStats};
pub use container::{decode, encode, encode_with, measure_rate, Header, RateReport, Transmission};
pub use sim::{
    gen_apes, gen_ltrrid, gen_pair, gen_pre_ess, make_construction, ApesParams, ApesPolicy, Construction, CorpusMeta,
    CorpusModel, RpesParams,
};
