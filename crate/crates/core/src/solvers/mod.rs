//! Outer inertial proximal scheme and the nested primal-dual prox solver.

mod ipiano;
mod primal_dual;
mod trace;

pub use ipiano::{ipiano_fuse, FusionResult, IPianoConfig, IPianoState, InitChoice};
pub use primal_dual::{
    huber_prox_objective, prox_huber_conjugate, prox_huber_tv, prox_huber_tv_channel, prox_s, PdConfig,
    PdOutcome, PdReport, StepSchedule, GRAD_NORM_SQ_BOUND,
};
pub use trace::{format_sig12, relative_change, EnergyTrace, TraceRow, TRACE_HEADER};
