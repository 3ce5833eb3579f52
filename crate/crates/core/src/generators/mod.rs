//! Element-outputting generators.

mod echo;
mod separation;
pub mod wp;

pub use echo::{echo_uniform_step, ClosureGenerator, EchoUniform, UniformBase};
pub use separation::{composite_g_step, gb_step, CompositeGenerator};
pub use wp::{
    is_tm_critical, update_sure_set, witness_set, WpGenerator, WpMode, WpRoundInfo, WpSnapshot,
    DEFAULT_QUERY_BUDGET,
};

use crate::domain::Element;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GeneratorError {
    #[error("round {round}: no consistent hypothesis and no sure example to fall back on")]
    EmptySureSet { round: usize },
    #[error("round {round}: membership-query budget {budget} exhausted")]
    QueryBudgetExceeded { round: usize, budget: u64 },
    #[error("{0}")]
    Precondition(String),
}

/// A stateful generator: sees one example per round and answers with one
/// element.
pub trait Generator {
    fn name(&self) -> String;

    fn step(&mut self, example: &Element) -> Result<Element, GeneratorError>;

    /// Membership queries spent in the most recent round.
    fn last_queries(&self) -> u64 {
        0
    }

    /// Internal state dump for tracing, when the generator supports it.
    fn snapshot(&self) -> Option<WpSnapshot> {
        None
    }
}

impl<G: Generator + ?Sized> Generator for Box<G> {
    fn name(&self) -> String {
        (**self).name()
    }
    fn step(&mut self, example: &Element) -> Result<Element, GeneratorError> {
        (**self).step(example)
    }
    fn last_queries(&self) -> u64 {
        (**self).last_queries()
    }
    fn snapshot(&self) -> Option<WpSnapshot> {
        (**self).snapshot()
    }
}
