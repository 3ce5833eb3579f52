use serde::{Deserialize, Serialize};

use super::{Frontier, Move, ProperAdversary, ProperContext};
use crate::classes::HypothesisClass;
use crate::domain::Element;
use crate::proper::{ClassOracle, ClassView, ProperOutput, QueryOracle};

/// Which side the killer commits to after the first output.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KillerBranch {
    /// The first output held `-1` and `-2`: replay-reachable negatives are
    /// shown, then all positives. Targets are the plus pair.
    Negatives,
    /// Mirror image: `1, 2`, then all negatives. Targets are the minus pair.
    Positives,
}

/// Shows `0`, then picks a side from the first output so that both members
/// of the opposite pair stay legal targets while the first output keeps
/// covering the shown points of the other side.
pub struct ProperReplayKiller {
    class: HypothesisClass,
    oracle: ClassOracle,
    minus: (usize, usize),
    plus: (usize, usize),
    branch: Option<KillerBranch>,
    last: u64,
}

impl ProperReplayKiller {
    /// `minus` and `plus` are the class indices of `(h_1^-, h_2^-)` and
    /// `(h_1^+, h_2^+)`.
    pub fn new(class: HypothesisClass, minus: (usize, usize), plus: (usize, usize)) -> Self {
        ProperReplayKiller {
            oracle: ClassOracle::new(class.clone()),
            class,
            minus,
            plus,
            branch: None,
            last: 0,
        }
    }

    pub fn branch(&self) -> Option<KillerBranch> {
        self.branch
    }

    /// The two targets the construction leaves open.
    pub fn dual_targets(&self) -> Option<(usize, usize)> {
        self.branch.map(|b| match b {
            KillerBranch::Negatives => self.plus,
            KillerBranch::Positives => self.minus,
        })
    }

    fn example(&self, t: usize) -> Element {
        let sign = match self.branch {
            Some(KillerBranch::Positives) => 1,
            _ => -1,
        };
        match t {
            1 => Element::Int(0),
            2 | 3 => Element::Int(sign * (t as i64 - 1)),
            _ => Element::Int(-sign * (t as i64 - 3)),
        }
    }
}

impl QueryOracle for ProperReplayKiller {
    fn answer(&mut self, i: usize, e: &Element) -> bool {
        self.oracle.answer(i, e)
    }
    fn class_len(&self) -> Option<usize> {
        self.class.len()
    }
}

impl ProperAdversary for ProperReplayKiller {
    fn name(&self) -> String {
        "proper-replay-killer".into()
    }

    fn next(&mut self, ctx: &ProperContext) -> Move {
        let e = self.example(ctx.examples.len() + 1);
        self.last = e.index();
        Move::Reveal(e)
    }

    fn observe(&mut self, output: ProperOutput) {
        if self.branch.is_none() {
            let h = self.oracle.hypothesis(output.0).clone();
            self.branch = Some(if h.contains(&Element::Int(-1)) && h.contains(&Element::Int(-2)) {
                KillerBranch::Negatives
            } else {
                KillerBranch::Positives
            });
        }
    }

    fn view(&self) -> &dyn ClassView {
        &self.class
    }

    fn frontier(&self, _target: usize) -> Frontier {
        Frontier::Canonical(self.last)
    }

    fn resolve(&self, _outputs: &[ProperOutput]) -> Vec<(usize, Vec<(usize, Element)>)> {
        match self.dual_targets() {
            Some((a, b)) => vec![(a, Vec::new()), (b, Vec::new())],
            None => Vec::new(),
        }
    }
}
