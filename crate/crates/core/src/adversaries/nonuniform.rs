use super::{Adversary, AdversaryContext, Frontier, Move};
use crate::domain::{Element, Hypothesis};

/// Reveals `1, ..., d`, then replays the most recent output forever.
pub struct NonuniformKiller {
    d: usize,
}

impl NonuniformKiller {
    pub fn new(d: usize) -> Self {
        assert!(d >= 1, "d must be positive");
        NonuniformKiller { d }
    }

    pub fn d(&self) -> usize {
        self.d
    }
}

impl Adversary for NonuniformKiller {
    fn name(&self) -> String {
        format!("nonuniform-killer({})", self.d)
    }

    fn next(&mut self, ctx: &AdversaryContext) -> Move {
        let t = ctx.round();
        if t <= self.d {
            Move::Reveal(Element::Int(t as i64))
        } else {
            Move::Reveal(*ctx.outputs.last().expect("an output exists after round 1"))
        }
    }

    fn frontier(&self, _target: &Hypothesis) -> Frontier {
        Frontier::Owed((1..=self.d as i64).map(Element::Int).collect())
    }
}
