pub mod flatten;
pub mod format;
pub mod jet;
pub mod verify;

pub use flatten::{
    flatten, flattening_report, flattening_report_with, FlatteningOptions, FlatteningReport,
    SplitRank, DEFAULT_FLATTENING_CAP, HARD_FLATTENING_LIMIT,
};
pub use format::{embed, Format, MultiDegree, PSTensor, ProductPoint};
pub use jet::{FactorJet, JetScheme, MultiJet, Series};
pub use verify::{
    verify_decomposition, verify_numeric, AnyDecomposition, Decomposition, Mode, Term,
    VerificationRecord, DEFAULT_VERIFY_TOL,
};
