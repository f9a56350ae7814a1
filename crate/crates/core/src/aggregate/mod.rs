//! Batched simulation of N independent sampler runs.

mod aj;
mod automaton;
mod encodings;
mod ms;

pub use aj::{aggregate_aj, aggregate_aj_oracle, AggregateStats};
pub use automaton::{automaton_batch, automaton_run, level_cap, Automaton, BatchOutput, LEVEL_CAP_DEFAULT};
pub use encodings::{encode_aj_automaton, encode_hypergraph_automaton, AjAutomaton, AjFrame, AjPhase, HyperAutomaton, HyperFrame, HyperPhase, HyperState};
pub use ms::aggregate_ms_abstract;

/// Per-spin counts summing to the batch size.
pub type FrequencyVector = Vec<u64>;
