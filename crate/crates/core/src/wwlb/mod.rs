//! Sequential Weiss–Weinstein bound: Bhattacharyya and Chernoff kernels, the log-term
//! summations, closed-form and exact information entries, and the scalar recursion.

mod divergence;
mod recursion;
mod terms;
mod testpoint;

pub use divergence::{bhattacharyya, chernoff_exponent, xi_matrix};
pub use recursion::{
    advance, all_pairs, g_entries, j0, recursion_step, v_score, wwlb_bound, VScore, WwlbAccumulator, WwlbMode,
    WwlbProblem,
};
pub use terms::{g_entries_exact, g_entries_paper, j0_exact, j0_paper, log_term, GEntries, LogTermKind, StageTerms};
pub use testpoint::{enumerate_test_points, permutations, Negation, TestPoint, TestPointKind, TestPointSet};
