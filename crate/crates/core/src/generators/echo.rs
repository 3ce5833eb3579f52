use std::collections::HashSet;

use super::{Generator, GeneratorError};
use crate::classes::HypothesisClass;
use crate::domain::{Element, Hypothesis};

/// A generator that is a function of the full example history.
pub trait UniformBase {
    fn name(&self) -> String;
    fn generate(&mut self, history: &[Element]) -> Element;
}

/// One round of the echo wrapper: repeat the first example until `d_star`
/// distinct examples have been seen, then defer to `base`.
pub fn echo_uniform_step(d_star: usize, history: &[Element], base: &mut dyn UniformBase) -> Element {
    assert!(!history.is_empty(), "history must be nonempty");
    let distinct: HashSet<&Element> = history.iter().collect();
    if distinct.len() < d_star {
        history[0]
    } else {
        base.generate(history)
    }
}

/// Echo wrapper around a uniform base generator.
pub struct EchoUniform<B> {
    d_star: usize,
    base: B,
    history: Vec<Element>,
    distinct: HashSet<Element>,
}

impl<B: UniformBase> EchoUniform<B> {
    pub fn new(d_star: usize, base: B) -> Self {
        EchoUniform { d_star, base, history: Vec::new(), distinct: HashSet::new() }
    }

    pub fn d_star(&self) -> usize {
        self.d_star
    }
}

impl<B: UniformBase> Generator for EchoUniform<B> {
    fn name(&self) -> String {
        format!("echo[d={}]({})", self.d_star, self.base.name())
    }

    fn step(&mut self, example: &Element) -> Result<Element, GeneratorError> {
        self.history.push(*example);
        self.distinct.insert(*example);
        if self.distinct.len() < self.d_star {
            Ok(self.history[0])
        } else {
            Ok(self.base.generate(&self.history))
        }
    }
}

/// Outputs the canonical-least unseen element of the intersection of all
/// hypotheses consistent with the history.
pub struct ClosureGenerator {
    class: HypothesisClass,
    members: Vec<Hypothesis>,
    consistent: Vec<bool>,
    seen: HashSet<Element>,
    processed: usize,
    cursor: u64,
    scan_cap: u64,
}

impl ClosureGenerator {
    pub fn new(class: HypothesisClass) -> Self {
        assert!(class.has_closure(), "class has no finite closure head");
        ClosureGenerator {
            class,
            members: Vec::new(),
            consistent: Vec::new(),
            seen: HashSet::new(),
            processed: 0,
            cursor: 1,
            scan_cap: 1 << 20,
        }
    }

    fn absorb(&mut self, history: &[Element]) {
        if history.len() < self.processed {
            *self = ClosureGenerator::new(self.class.clone());
        }
        let mut changed = false;
        for e in &history[self.processed..] {
            self.seen.insert(*e);
            for (i, h) in self.members.iter().enumerate() {
                if self.consistent[i] && !h.contains(e) {
                    self.consistent[i] = false;
                    changed = true;
                }
            }
        }
        self.processed = history.len();
        let k = self.class.closure_candidates(history);
        while self.members.len() < k {
            let h = self.class.get(self.members.len() + 1).expect("index within class");
            let ok = history.iter().all(|e| h.contains(e));
            changed |= ok;
            self.members.push(h);
            self.consistent.push(ok);
        }
        if changed {
            self.cursor = 1;
        }
    }
}

impl UniformBase for ClosureGenerator {
    fn name(&self) -> String {
        "closure".into()
    }

    fn generate(&mut self, history: &[Element]) -> Element {
        self.absorb(history);
        let live: Vec<&Hypothesis> = self
            .members
            .iter()
            .zip(&self.consistent)
            .filter(|(_, &c)| c)
            .map(|(h, _)| h)
            .collect();
        let mut idx = self.cursor;
        let stop = idx + self.scan_cap;
        while idx < stop {
            let e = Element::from_index(idx);
            if !self.seen.contains(&e) && live.iter().all(|h| h.contains(&e)) {
                self.cursor = idx;
                return e;
            }
            idx += 1;
        }
        history[0]
    }
}
