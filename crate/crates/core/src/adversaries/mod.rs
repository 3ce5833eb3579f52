//! Example-stream strategies.

mod diagonal;
mod fair;
mod nonuniform;
mod proper_killer;
mod replay;
mod separation;

pub use diagonal::{DiagonalBuilder, DiagonalResolution, Row};
pub use fair::FairEnumerator;
pub use nonuniform::NonuniformKiller;
pub use proper_killer::{KillerBranch, ProperReplayKiller};
pub use replay::{ReplayChoice, ReplayInjector, Schedule};
pub use separation::{PhaseRecord, SeparationKiller, SeparationStage, DEFAULT_PHASE_CAP};

use serde::{Deserialize, Serialize};

use crate::domain::{Element, Hypothesis};
use crate::proper::{ClassView, ProperOutput, QueryOracle};

/// What the adversary sees before choosing the next example.
#[derive(Clone, Copy, Debug)]
pub struct AdversaryContext<'a> {
    pub examples: &'a [Element],
    pub outputs: &'a [Element],
}

impl AdversaryContext<'_> {
    /// The round about to be played.
    pub fn round(&self) -> usize {
        self.examples.len() + 1
    }
}

/// Why an adversary stopped before the horizon.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum HaltReason {
    /// A phase ran for its full cap without the generator producing the
    /// output that ends it.
    PhaseCap { phase: usize, rounds: usize },
    /// The configured number of phases completed.
    Completed { phases: usize },
    /// The generator exhausted its per-round query budget.
    NonHaltingRound { round: usize, budget: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Move {
    Reveal(Element),
    Halt(HaltReason),
}

/// How far the stream is owed to have enumerated the target.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Frontier {
    /// Every target element with canonical index at most this value.
    Canonical(u64),
    /// Exactly these elements, each of which must belong to the target.
    Owed(Vec<Element>),
}

/// A target fixed after the run.
#[derive(Clone, Debug)]
pub struct Resolution {
    pub target: Hypothesis,
    /// Outputs that the construction certifies as mistakes for `target`,
    /// as `(round, output)`.
    pub certified: Vec<(usize, Element)>,
}

pub trait Adversary {
    fn name(&self) -> String;

    fn next(&mut self, ctx: &AdversaryContext) -> Move;

    /// The generator's output for the round just played.
    fn observe(&mut self, _output: &Element) {}

    fn frontier(&self, target: &Hypothesis) -> Frontier;

    /// Post-run target for adaptive constructions.
    fn resolve(&self) -> Option<Resolution> {
        None
    }
}

impl<A: Adversary + ?Sized> Adversary for Box<A> {
    fn name(&self) -> String {
        (**self).name()
    }
    fn next(&mut self, ctx: &AdversaryContext) -> Move {
        (**self).next(ctx)
    }
    fn observe(&mut self, output: &Element) {
        (**self).observe(output)
    }
    fn frontier(&self, target: &Hypothesis) -> Frontier {
        (**self).frontier(target)
    }
    fn resolve(&self) -> Option<Resolution> {
        (**self).resolve()
    }
}

/// Context for proper games.
#[derive(Clone, Copy, Debug)]
pub struct ProperContext<'a> {
    pub examples: &'a [Element],
    pub outputs: &'a [ProperOutput],
}

/// Adversary in a proper game. It also answers the generator's membership
/// queries and exposes the class for scoring.
pub trait ProperAdversary: QueryOracle {
    fn name(&self) -> String;
    fn next(&mut self, ctx: &ProperContext) -> Move;
    fn observe(&mut self, output: ProperOutput);
    fn view(&self) -> &dyn ClassView;
    fn frontier(&self, target: usize) -> Frontier;
    /// Targets the construction designates after the run, with certified
    /// mistakes `(round, instance)` where one applies.
    fn resolve(&self, outputs: &[ProperOutput]) -> Vec<(usize, Vec<(usize, Element)>)>;
}
