//! Proper generators (they answer with a hypothesis index) and the
//! query-logging oracle harness they run behind.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::classes::HypothesisClass;
use crate::domain::{Element, Hypothesis};

pub use crate::generators::DEFAULT_QUERY_BUDGET;

/// Index of the hypothesis a proper generator outputs. Always at least 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ProperOutput(pub usize);

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryRecord {
    pub hypothesis: usize,
    pub instance: Element,
    pub answer: bool,
}

/// Membership queries of one round, in the order they were asked.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryLog {
    pub records: Vec<QueryRecord>,
}

impl QueryLog {
    pub fn len(&self) -> usize {
        self.records.len()
    }
    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProperError {
    #[error("membership-query budget {budget} exhausted")]
    BudgetExceeded { budget: u64 },
    #[error("generator returned index 0")]
    ZeroIndex,
}

/// Answers `x ∈ supp(h_i)?`.
pub trait QueryOracle {
    fn answer(&mut self, i: usize, e: &Element) -> bool;

    /// Number of hypotheses, when finite.
    fn class_len(&self) -> Option<usize> {
        None
    }
}

/// Membership oracle backed by a symbolic class.
pub struct ClassOracle {
    class: HypothesisClass,
    cache: HashMap<usize, Hypothesis>,
}

impl ClassOracle {
    pub fn new(class: HypothesisClass) -> Self {
        ClassOracle { class, cache: HashMap::new() }
    }

    pub fn hypothesis(&mut self, i: usize) -> &Hypothesis {
        let class = &self.class;
        self.cache
            .entry(i)
            .or_insert_with(|| class.get(i).expect("index within class"))
    }
}

impl QueryOracle for ClassOracle {
    fn answer(&mut self, i: usize, e: &Element) -> bool {
        self.hypothesis(i).contains(e)
    }
    fn class_len(&self) -> Option<usize> {
        self.class.len()
    }
}

/// Read-only view used for scoring proper games.
pub trait ClassView {
    fn member(&self, i: usize, e: &Element) -> bool;
    fn subset(&self, i: usize, j: usize) -> bool;
}

impl ClassView for HypothesisClass {
    fn member(&self, i: usize, e: &Element) -> bool {
        self.get(i).is_some_and(|h| h.contains(e))
    }
    fn subset(&self, i: usize, j: usize) -> bool {
        match (self.get(i), self.get(j)) {
            (Some(a), Some(b)) => a.is_subset_of(&b),
            _ => false,
        }
    }
}

/// Routes queries to an oracle, logs them, and enforces a per-round cap.
pub struct Budgeted<'a> {
    inner: &'a mut dyn QueryOracle,
    log: QueryLog,
    budget: u64,
}

impl<'a> Budgeted<'a> {
    pub fn new(inner: &'a mut dyn QueryOracle, budget: u64) -> Self {
        Budgeted { inner, log: QueryLog::default(), budget }
    }

    pub fn query(&mut self, i: usize, e: &Element) -> Result<bool, ProperError> {
        if self.log.len() as u64 >= self.budget {
            return Err(ProperError::BudgetExceeded { budget: self.budget });
        }
        let answer = self.inner.answer(i, e);
        self.log.records.push(QueryRecord { hypothesis: i, instance: *e, answer });
        Ok(answer)
    }

    pub fn class_len(&self) -> Option<usize> {
        self.inner.class_len()
    }

    pub fn into_log(self) -> QueryLog {
        self.log
    }
}

pub trait ProperGenerator {
    fn name(&self) -> String;
    fn step(&mut self, example: &Element, oracle: &mut Budgeted) -> Result<ProperOutput, ProperError>;
}

/// One round: show `x` to the generator with every query logged.
pub fn run_proper_round<G: ProperGenerator + ?Sized>(
    generator: &mut G,
    oracle: &mut dyn QueryOracle,
    x: &Element,
    budget: u64,
) -> Result<(ProperOutput, QueryLog), ProperError> {
    let mut b = Budgeted::new(oracle, budget);
    let out = generator.step(x, &mut b)?;
    if out.0 == 0 {
        return Err(ProperError::ZeroIndex);
    }
    Ok((out, b.into_log()))
}

/// Which examples a proper generator treats as certainly in the target.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SureRule {
    /// Every example.
    AllExamples,
    /// Only examples outside the support of every earlier output.
    ExcludeReplayable,
}

fn consistent(
    oracle: &mut Budgeted,
    i: usize,
    sure: &[Element],
) -> Result<bool, ProperError> {
    for e in sure {
        if !oracle.query(i, e)? {
            return Ok(false);
        }
    }
    Ok(true)
}

fn horizon(oracle: &Budgeted, t: usize) -> usize {
    oracle.class_len().map_or(t, |n| n.min(t))
}

/// Least index `i <= t` consistent with `sure`, else 1.
pub fn greedy_mq_proper_step(
    oracle: &mut Budgeted,
    sure: &[Element],
    t: usize,
) -> Result<ProperOutput, ProperError> {
    for i in 1..=horizon(oracle, t) {
        if consistent(oracle, i, sure)? {
            return Ok(ProperOutput(i));
        }
    }
    Ok(ProperOutput(1))
}

/// Largest consistent `n <= t` whose support sits inside every smaller
/// consistent hypothesis; 1 when nothing is consistent.
pub fn critical_proper_step(
    class: &HypothesisClass,
    oracle: &mut Budgeted,
    sure: &[Element],
    t: usize,
) -> Result<ProperOutput, ProperError> {
    let mut cons = Vec::new();
    for i in 1..=horizon(oracle, t) {
        if consistent(oracle, i, sure)? {
            cons.push(i);
        }
    }
    for (p, &n) in cons.iter().enumerate().rev() {
        if cons[..p].iter().all(|&i| class.subset(n, i)) {
            return Ok(ProperOutput(n));
        }
    }
    Ok(ProperOutput(1))
}

#[derive(Default)]
struct SureTracker {
    t: usize,
    sure: Vec<Element>,
    seen: BTreeSet<Element>,
    outputs: BTreeSet<usize>,
}

impl SureTracker {
    fn absorb(
        &mut self,
        rule: SureRule,
        x: &Element,
        oracle: &mut Budgeted,
    ) -> Result<(), ProperError> {
        self.t += 1;
        if self.seen.contains(x) {
            return Ok(());
        }
        let is_sure = match rule {
            SureRule::AllExamples => true,
            SureRule::ExcludeReplayable => {
                let mut replayable = false;
                for &i in &self.outputs {
                    if oracle.query(i, x)? {
                        replayable = true;
                        break;
                    }
                }
                !replayable
            }
        };
        if is_sure {
            self.seen.insert(*x);
            self.sure.push(*x);
        }
        Ok(())
    }
}

/// Greedy membership-query-only proper generator.
pub struct GreedyProper {
    rule: SureRule,
    state: SureTracker,
}

impl GreedyProper {
    pub fn new(rule: SureRule) -> Self {
        GreedyProper { rule, state: SureTracker::default() }
    }

    pub fn sure_examples(&self) -> &[Element] {
        &self.state.sure
    }
}

impl ProperGenerator for GreedyProper {
    fn name(&self) -> String {
        "greedy-proper".into()
    }

    fn step(&mut self, x: &Element, oracle: &mut Budgeted) -> Result<ProperOutput, ProperError> {
        self.state.absorb(self.rule, x, oracle)?;
        let out = greedy_mq_proper_step(oracle, &self.state.sure, self.state.t)?;
        self.state.outputs.insert(out.0);
        Ok(out)
    }
}

/// Proper generator using membership and subset queries.
pub struct CriticalProper {
    class: HypothesisClass,
    rule: SureRule,
    state: SureTracker,
}

impl CriticalProper {
    pub fn new(class: HypothesisClass, rule: SureRule) -> Self {
        CriticalProper { class, rule, state: SureTracker::default() }
    }
}

impl ProperGenerator for CriticalProper {
    fn name(&self) -> String {
        "critical-proper".into()
    }

    fn step(&mut self, x: &Element, oracle: &mut Budgeted) -> Result<ProperOutput, ProperError> {
        self.state.absorb(self.rule, x, oracle)?;
        let out = critical_proper_step(&self.class, oracle, &self.state.sure, self.state.t)?;
        self.state.outputs.insert(out.0);
        Ok(out)
    }
}
