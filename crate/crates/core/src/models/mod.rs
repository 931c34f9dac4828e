//! Ranking models and their samplers.

pub mod epl;
pub mod mallows;
pub mod thurstone;

pub use epl::{
    draw_uniform_epl, draw_uniform_epl_with, epl_draw, epl_exact_marginal_table,
    epl_exact_stage_marginals, epl_log_pmf, epl_pmf, epl_sample, epl_sample_with,
    pl_sequence_log_prob, pl_sequence_prob, EplParams,
};
pub use mallows::{mallows_draw, mallows_partition, mallows_pmf, mallows_sample, mallows_sample_with, MallowsParams};
pub use thurstone::{thurstone_draw, thurstone_sample, thurstone_sample_with, ThurstoneParams};
