use super::{Adversary, AdversaryContext, Frontier, Move};
use crate::domain::{Element, Hypothesis};

/// Reveals the target's support in canonical order.
pub struct FairEnumerator {
    target: Hypothesis,
    next_index: u64,
    last: u64,
}

impl FairEnumerator {
    pub fn new(target: Hypothesis) -> Self {
        FairEnumerator { target, next_index: 1, last: 0 }
    }

    pub fn step(&mut self) -> Element {
        let e = self.target.spec().next_member_from(self.next_index);
        self.last = e.index();
        self.next_index = self.last + 1;
        e
    }
}

impl Adversary for FairEnumerator {
    fn name(&self) -> String {
        format!("fair({})", self.target.name())
    }

    fn next(&mut self, _ctx: &AdversaryContext) -> Move {
        Move::Reveal(self.step())
    }

    fn frontier(&self, _target: &Hypothesis) -> Frontier {
        Frontier::Canonical(self.last)
    }
}
