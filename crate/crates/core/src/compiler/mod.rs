//! Constructive compilation of CPwL targets into ReLU networks, with the
//! width, depth and parameter budgets each construction guarantees.

mod composition;
mod fourier;
mod self_similar;
mod spline;
mod takagi;

pub use composition::{
    compile_composition, compile_sum_of_compositions, composed_target, representative,
};
pub use fourier::{
    compile_fourier_sum, fourier_atom, fourier_depth_bound, fourier_target, FourierTerm,
};
pub use self_similar::{
    compile_self_similar, self_similar_target, SELF_SIMILAR_C1, SELF_SIMILAR_C2,
};
pub use spline::{compile_shallow, compile_spline, partition_indices, spline_budget, spline_depth};
pub use takagi::takagi_network;

use std::fmt;

use crate::network::{param_count, Network};

/// Size of a compiled network next to the bound its construction promises.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompileReport {
    pub width: usize,
    pub depth: usize,
    pub params: usize,
    pub budget_bound: usize,
    pub target_breakpoints: usize,
    /// Whether the hypotheses under which `budget_bound` is guaranteed hold.
    pub hypotheses_hold: bool,
    pub note: Option<String>,
}

impl CompileReport {
    pub(crate) fn new(
        net: &impl Network,
        budget_bound: usize,
        target_breakpoints: usize,
        hypotheses_hold: bool,
    ) -> Self {
        CompileReport {
            width: net.width(),
            depth: net.depth(),
            params: param_count(net.width(), net.depth()),
            budget_bound,
            target_breakpoints,
            hypotheses_hold,
            note: None,
        }
    }

    /// `params ≤ budget_bound`, or the hypotheses do not hold.
    pub fn within_budget(&self) -> bool {
        !self.hypotheses_hold || self.params <= self.budget_bound
    }
}

impl fmt::Display for CompileReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "width={}", self.width)?;
        writeln!(f, "depth={}", self.depth)?;
        writeln!(f, "params={}", self.params)?;
        writeln!(f, "bound={}", self.budget_bound)?;
        writeln!(f, "breakpoints={}", self.target_breakpoints)?;
        write!(f, "hypotheses={}", self.hypotheses_hold)?;
        if let Some(note) = &self.note {
            write!(f, "\nnote={note}")?;
        }
        Ok(())
    }
}
