//! Witness protection: a generator for countable classes that stays correct
//! when the adversary replays its earlier outputs.
//!
//! The free functions are direct transcriptions of the definitions and are
//! meant as reference oracles. [`WpGenerator`] keeps the same quantities
//! incrementally: per-hypothesis membership rows over the prefix `[1..m]`,
//! one witness per ordered pair, and a multiset of live witnesses.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{Generator, GeneratorError};
use crate::bits::{first_andnot, Bits};
use crate::classes::HypothesisClass;
use crate::domain::{Element, Hypothesis};

pub const DEFAULT_QUERY_BUDGET: u64 = 1_000_000;

/// `S ∪ {x}` when `x` was never output, otherwise `S`.
pub fn update_sure_set(
    s: &BTreeSet<Element>,
    o: &BTreeSet<Element>,
    x: &Element,
) -> BTreeSet<Element> {
    let mut next = s.clone();
    if !o.contains(x) {
        next.insert(*x);
    }
    next
}

fn prefix(h: &Hypothesis, m: u64) -> BTreeSet<Element> {
    (1..=m).map(Element::from_index).filter(|e| h.contains(e)).collect()
}

/// For every pair `j < i` in `v`, the least element of
/// `supp(h_i)[m] \ (supp(h_j)[m] ∪ o)`, or `None` when that set is empty.
pub fn witness_set(
    v: &[usize],
    m: u64,
    o: &BTreeSet<Element>,
    class: &HypothesisClass,
) -> BTreeMap<(usize, usize), Option<Element>> {
    let rows: BTreeMap<usize, BTreeSet<Element>> = v
        .iter()
        .map(|&i| (i, prefix(&class.get(i).expect("index in class"), m)))
        .collect();
    let mut out = BTreeMap::new();
    for &i in v {
        for &j in v {
            if j < i {
                let w = rows[&i]
                    .iter()
                    .find(|e| !rows[&j].contains(e) && !o.contains(e))
                    .copied();
                out.insert((i, j), w);
            }
        }
    }
    out
}

/// Whether `h_n` is consistent with `s` and, on the prefix `[1..m]`, covered
/// by every earlier consistent hypothesis up to the outputs `o`.
pub fn is_tm_critical(
    n: usize,
    t: usize,
    m: u64,
    s: &BTreeSet<Element>,
    o: &BTreeSet<Element>,
    class: &HypothesisClass,
) -> Result<bool, GeneratorError> {
    if n == 0 || n > t {
        return Err(GeneratorError::Precondition(format!("need 1 <= n <= t, got n={n}, t={t}")));
    }
    let hn = class
        .get(n)
        .ok_or_else(|| GeneratorError::Precondition(format!("index {n} outside class")))?;
    if !s.iter().all(|e| hn.contains(e)) {
        return Ok(false);
    }
    let pn = prefix(&hn, m);
    for i in 1..n {
        let hi = class.get(i).expect("smaller index in class");
        if !s.iter().all(|e| hi.contains(e)) {
            continue;
        }
        if pn.iter().any(|e| !hi.contains(e) && !o.contains(e)) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Which exclusions the generator applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum WpMode {
    /// Replayed examples are not sure; outputs and witnesses are protected.
    WitnessProtection,
    /// Every example is sure and only examples are excluded from outputs.
    /// The replay-unaware limit generator.
    Baseline,
}

/// Summary of the last completed round.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WpRoundInfo {
    pub t: usize,
    pub example: Element,
    pub sure: bool,
    pub critical: Option<usize>,
    pub m: u64,
    pub consistent: usize,
    pub output: Element,
    pub queries: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessEntry {
    pub i: usize,
    pub j: usize,
    pub w: Option<Element>,
}

/// Full state dump after a round.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WpSnapshot {
    pub round: WpRoundInfo,
    pub sure_set: Vec<Element>,
    pub consistent: Vec<usize>,
    pub witnesses: Vec<WitnessEntry>,
}

struct Member {
    hyp: Hypothesis,
    row: Bits,
    // canonical index of the witness against each smaller index, 0 for none
    wit: Vec<u32>,
    // live smaller indices with no witness yet
    bot: Bits,
    blockers: u32,
}

pub struct WpGenerator {
    class: HypothesisClass,
    mode: WpMode,
    budget: u64,
    t: usize,
    m: u64,
    members: Vec<Option<Member>>,
    alive: Vec<usize>,
    sure: Bits,
    sure_list: Vec<Element>,
    outs: Bits,
    out_list: Vec<Element>,
    wcount: Vec<u32>,
    wmask: Bits,
    queries: u64,
    info: Option<WpRoundInfo>,
}

impl WpGenerator {
    pub fn new(class: HypothesisClass) -> Self {
        Self::with_mode(class, WpMode::WitnessProtection)
    }

    pub fn baseline(class: HypothesisClass) -> Self {
        Self::with_mode(class, WpMode::Baseline)
    }

    pub fn with_mode(class: HypothesisClass, mode: WpMode) -> Self {
        WpGenerator {
            class,
            mode,
            budget: DEFAULT_QUERY_BUDGET,
            t: 0,
            m: 0,
            members: vec![None],
            alive: Vec::new(),
            sure: Bits::new(),
            sure_list: Vec::new(),
            outs: Bits::new(),
            out_list: Vec::new(),
            wcount: Vec::new(),
            wmask: Bits::new(),
            queries: 0,
            info: None,
        }
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    pub fn mode(&self) -> WpMode {
        self.mode
    }

    pub fn round(&self) -> usize {
        self.t
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn last_round(&self) -> Option<&WpRoundInfo> {
        self.info.as_ref()
    }

    /// Sure examples in canonical order.
    pub fn sure_set(&self) -> BTreeSet<Element> {
        self.sure_list.iter().copied().collect()
    }

    pub fn outputs(&self) -> &[Element] {
        &self.out_list
    }

    pub fn output_set(&self) -> BTreeSet<Element> {
        self.out_list.iter().copied().collect()
    }

    /// Indices currently consistent with the sure set.
    pub fn consistent(&self) -> &[usize] {
        &self.alive
    }

    pub fn is_sure(&self, e: &Element) -> bool {
        self.sure.get(e.index() as usize)
    }

    pub fn is_witness(&self, e: &Element) -> bool {
        self.wmask.get(e.index() as usize)
    }

    /// Current witness set as elements.
    pub fn witness_elements(&self) -> BTreeSet<Element> {
        self.wmask.iter().map(|k| Element::from_index(k as u64)).collect()
    }

    /// `h_i` is consistent and has no witness against any smaller consistent
    /// index at the current prefix.
    pub fn is_critical(&self, i: usize) -> bool {
        self.member(i).is_some_and(|mb| mb.blockers == 0)
    }

    /// Largest critical index.
    pub fn critical_index(&self) -> Option<usize> {
        self.alive.iter().rev().copied().find(|&i| self.is_critical(i))
    }

    /// Witness for the pair `j < i` as currently tabulated.
    pub fn witness(&self, i: usize, j: usize) -> Option<Element> {
        let mb = self.member(i)?;
        match mb.wit.get(j).copied() {
            Some(w) if w != 0 => Some(Element::from_index(w as u64)),
            _ => None,
        }
    }

    fn member(&self, i: usize) -> Option<&Member> {
        self.members.get(i).and_then(|m| m.as_ref())
    }

    fn protects(&self) -> bool {
        self.mode == WpMode::WitnessProtection
    }

    fn charge(&mut self, n: u64) -> Result<(), GeneratorError> {
        self.queries += n;
        if self.queries > self.budget {
            return Err(GeneratorError::QueryBudgetExceeded { round: self.t, budget: self.budget });
        }
        Ok(())
    }

    fn inc(&mut self, k: u32) {
        let k = k as usize;
        if self.wcount.len() <= k {
            self.wcount.resize(k + 1, 0);
        }
        self.wcount[k] += 1;
        self.wmask.set(k);
    }

    fn dec(&mut self, k: u32) {
        let k = k as usize;
        self.wcount[k] -= 1;
        if self.wcount[k] == 0 {
            self.wmask.clear(k);
        }
    }

    fn evict(&mut self, i: usize) {
        let gone = self.members[i].take().expect("evicting a live member");
        let pos = self.alive.binary_search(&i).expect("live index");
        self.alive.remove(pos);
        for idx in 0..pos {
            let j = self.alive[idx];
            let w = gone.wit[j];
            if w != 0 {
                self.dec(w);
            }
        }
        let above: Vec<usize> = self.alive[pos..].to_vec();
        for k in above {
            let mb = self.members[k].as_mut().expect("live");
            let w = mb.wit[i];
            if w != 0 {
                mb.wit[i] = 0;
                mb.blockers -= 1;
                self.dec(w);
            } else {
                mb.bot.clear(i);
            }
        }
    }

    fn admit(&mut self, i: usize, hyp: Hypothesis) -> Result<(), GeneratorError> {
        let mut row = Bits::new();
        for k in 1..=self.m {
            if hyp.contains(&Element::from_index(k)) {
                row.set(k as usize);
            }
        }
        self.charge(self.m)?;
        let nwords = (self.m as usize) / 64 + 1;
        let mut d: Vec<u64> = (0..nwords).map(|wi| row.word(wi)).collect();
        if self.protects() {
            for (wi, x) in d.iter_mut().enumerate() {
                *x &= !self.outs.word(wi);
            }
        }
        let mut wit = vec![0u32; i];
        let mut bot = Bits::new();
        let mut blockers = 0;
        let mut found = Vec::new();
        for &j in &self.alive {
            let rj = &self.members[j].as_ref().expect("live").row;
            match first_andnot(&d, rj.words()) {
                Some(w) => {
                    wit[j] = w as u32;
                    blockers += 1;
                    found.push(w as u32);
                }
                None => bot.set(j),
            }
        }
        for w in found {
            self.inc(w);
        }
        if self.members.len() <= i {
            self.members.resize_with(i + 1, || None);
        }
        self.members[i] = Some(Member { hyp, row, wit, bot, blockers });
        self.alive.push(i);
        Ok(())
    }

    /// Grow every live row by one element and resolve pairs it separates.
    fn extend_one(&mut self) -> Result<(), GeneratorError> {
        let k = self.m + 1;
        assert!(k < u32::MAX as u64, "prefix length overflow");
        let e = Element::from_index(k);
        let ku = k as usize;
        let mut col = Bits::new();
        let mut cnt = 0usize;
        for &i in &self.alive {
            let mb = self.members[i].as_mut().expect("live");
            if mb.hyp.contains(&e) {
                mb.row.set(ku);
                col.set(i);
                cnt += 1;
            }
        }
        self.m = k;
        self.charge(self.alive.len() as u64)?;
        if cnt == 0 || cnt == self.alive.len() || (self.protects() && self.outs.get(ku)) {
            return Ok(());
        }
        let outside: Vec<usize> = self.alive.iter().copied().filter(|&j| !col.get(j)).collect();
        let mut added = 0u32;
        for idx in 0..self.alive.len() {
            let i = self.alive[idx];
            if !col.get(i) {
                continue;
            }
            let mb = self.members[i].as_mut().expect("live");
            // every smaller live index already has a witness
            if mb.blockers as usize == idx {
                continue;
            }
            let words = mb.bot.words().len();
            if outside.len() <= 4 * words {
                for &j in &outside {
                    if j >= i {
                        break;
                    }
                    if mb.bot.get(j) {
                        mb.wit[j] = k as u32;
                        mb.bot.clear(j);
                        mb.blockers += 1;
                        added += 1;
                    }
                }
                continue;
            }
            for wi in 0..words {
                let x = mb.bot.word(wi) & !col.word(wi);
                if x == 0 {
                    continue;
                }
                let mut y = x;
                while y != 0 {
                    let j = wi * 64 + y.trailing_zeros() as usize;
                    y &= y - 1;
                    mb.wit[j] = k as u32;
                    mb.bot.clear(j);
                    mb.blockers += 1;
                    added += 1;
                }
            }
        }
        if added > 0 {
            if self.wcount.len() <= ku {
                self.wcount.resize(ku + 1, 0);
            }
            self.wcount[ku] += added;
            self.wmask.set(ku);
        }
        Ok(())
    }

    fn first_output(&self, n: usize) -> Option<usize> {
        let row = &self.members[n].as_ref().expect("live").row;
        let nwords = (self.m as usize) / 64 + 1;
        for wi in 0..nwords {
            let mut x = row.word(wi) & !self.sure.word(wi);
            if self.protects() {
                x &= !self.outs.word(wi) & !self.wmask.word(wi);
            }
            if x != 0 {
                return Some(wi * 64 + x.trailing_zeros() as usize);
            }
        }
        None
    }

    fn play(&mut self, x: &Element) -> Result<(Element, bool, Option<usize>), GeneratorError> {
        let k = x.index() as usize;
        let sure_now = !self.protects() || !self.outs.get(k);
        if sure_now && !self.sure.get(k) {
            self.sure.set(k);
            self.sure_list.push(*x);
            let live = self.alive.clone();
            for i in live {
                let inside = if (k as u64) <= self.m {
                    self.member(i).expect("live").row.get(k)
                } else {
                    self.charge(1)?;
                    self.member(i).expect("live").hyp.contains(x)
                };
                if !inside {
                    self.evict(i);
                }
            }
        }
        if let Some(h) = self.class.get(self.t) {
            let mut ok = true;
            let mut asked = 0;
            for e in &self.sure_list {
                asked += 1;
                if !h.contains(e) {
                    ok = false;
                    break;
                }
            }
            self.charge(asked)?;
            if ok {
                self.admit(self.t, h)?;
            }
        }
        if self.alive.is_empty() {
            let k = self.sure.iter().next().ok_or(GeneratorError::EmptySureSet { round: self.t })?;
            return Ok((Element::from_index(k as u64), sure_now, None));
        }
        while self.m < x.index() {
            self.extend_one()?;
        }
        loop {
            self.extend_one()?;
            let n = self.critical_index().expect("the least live index is always critical");
            if let Some(k) = self.first_output(n) {
                return Ok((Element::from_index(k as u64), sure_now, Some(n)));
            }
        }
    }

    pub fn snapshot_now(&self) -> Option<WpSnapshot> {
        let round = self.info.clone()?;
        let mut witnesses = Vec::new();
        for (p, &i) in self.alive.iter().enumerate() {
            for &j in &self.alive[..p] {
                witnesses.push(WitnessEntry { i, j, w: self.witness(i, j) });
            }
        }
        let mut sure_set = self.sure_list.clone();
        sure_set.sort();
        Some(WpSnapshot { round, sure_set, consistent: self.alive.clone(), witnesses })
    }
}

impl Generator for WpGenerator {
    fn name(&self) -> String {
        match self.mode {
            WpMode::WitnessProtection => "wp".into(),
            WpMode::Baseline => "baseline".into(),
        }
    }

    fn step(&mut self, example: &Element) -> Result<Element, GeneratorError> {
        example.validate().map_err(|e| GeneratorError::Precondition(e.to_string()))?;
        self.t += 1;
        self.queries = 0;
        let (o, sure, critical) = self.play(example)?;
        self.outs.set(o.index() as usize);
        self.out_list.push(o);
        self.info = Some(WpRoundInfo {
            t: self.t,
            example: *example,
            sure,
            critical,
            m: self.m,
            consistent: self.alive.len(),
            output: o,
            queries: self.queries,
        });
        Ok(o)
    }

    fn last_queries(&self) -> u64 {
        self.queries
    }

    fn snapshot(&self) -> Option<WpSnapshot> {
        self.snapshot_now()
    }
}
