use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Adversary, AdversaryContext, Frontier, Move, Resolution};
use crate::domain::{Element, Hypothesis};

/// When the injector replays instead of advancing the base stream.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Schedule {
    Never,
    AtRounds { rounds: BTreeSet<usize> },
    /// Each round independently with probability `p`.
    Rate { p: f64 },
}

/// Which earlier output gets replayed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReplayChoice {
    MostRecent,
    UniformPrior,
}

/// Wraps a base adversary and replays earlier generator outputs on
/// scheduled rounds. The base only advances on rounds it plays.
pub struct ReplayInjector<A> {
    base: A,
    schedule: Schedule,
    choice: ReplayChoice,
    rng: ChaCha8Rng,
    injected: Vec<usize>,
}

impl<A: Adversary> ReplayInjector<A> {
    pub fn new(base: A, schedule: Schedule, choice: ReplayChoice, seed: u64) -> Self {
        ReplayInjector { base, schedule, choice, rng: ChaCha8Rng::seed_from_u64(seed), injected: Vec::new() }
    }

    /// Rounds on which a replay was played.
    pub fn injected_rounds(&self) -> &[usize] {
        &self.injected
    }

    pub fn base(&self) -> &A {
        &self.base
    }
}

impl<A: Adversary> Adversary for ReplayInjector<A> {
    fn name(&self) -> String {
        format!("replay({})", self.base.name())
    }

    fn next(&mut self, ctx: &AdversaryContext) -> Move {
        let t = ctx.round();
        let fires = match &self.schedule {
            Schedule::Never => false,
            Schedule::AtRounds { rounds } => rounds.contains(&t),
            // one draw per round keeps the schedule independent of the outputs
            Schedule::Rate { p } => self.rng.gen_bool(p.clamp(0.0, 1.0)),
        };
        if fires && !ctx.outputs.is_empty() {
            let o = match self.choice {
                ReplayChoice::MostRecent => *ctx.outputs.last().expect("nonempty"),
                ReplayChoice::UniformPrior => ctx.outputs[self.rng.gen_range(0..ctx.outputs.len())],
            };
            self.injected.push(t);
            return Move::Reveal(o);
        }
        self.base.next(ctx)
    }

    fn observe(&mut self, output: &Element) {
        self.base.observe(output)
    }

    fn frontier(&self, target: &Hypothesis) -> Frontier {
        self.base.frontier(target)
    }

    fn resolve(&self) -> Option<Resolution> {
        self.base.resolve()
    }
}
