//! Rank search: state machine, user submissions, aggregation, and moments.

pub mod mirror;
pub mod moments;
pub mod search;
pub mod submission;

pub use mirror::{kth_smallest, median_oracle, run_mirror, MirrorOutcome};
pub use moments::{
    init_range_from_moments, make_power_submission, moments_protocol, MomentsReport,
    PowerSubmission,
};
pub use search::{HalfInt, SearchState, Step, Target};
pub use submission::{compute_enc_q, SignSubmission};
