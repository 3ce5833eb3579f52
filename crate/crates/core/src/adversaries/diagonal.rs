use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{Frontier, Move, ProperAdversary, ProperContext};
use crate::domain::Element;
use crate::proper::{ClassView, ProperOutput, QueryOracle};

/// Membership pattern of one instance across all hypotheses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "index", rename_all = "kebab-case")]
pub enum Row {
    AllOnes,
    /// In `h_i` only.
    OneHot(usize),
    /// In every hypothesis except `h_i`.
    OneCold(usize),
}

impl Row {
    #[inline]
    pub fn bit(&self, i: usize) -> bool {
        match *self {
            Row::AllOnes => true,
            Row::OneHot(h) => i == h,
            Row::OneCold(c) => i != c,
        }
    }
}

/// Post-run target and the instances certifying each mistake.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagonalResolution {
    pub target: usize,
    /// `(round, instance)` with the instance in the output's support but
    /// outside the target's.
    pub certificates: Vec<(usize, u64)>,
}

/// Builds a hard class against a membership-query-only proper generator while
/// playing it. Instance `j` is the integer `j`.
#[derive(Clone, Debug)]
pub struct DiagonalBuilder {
    rows: Vec<Row>,
    queue: BTreeSet<u64>,
    trap: (usize, u64),
    i_ctr: usize,
    j_ctr: u64,
    k: u64,
    round: usize,
    /// round at which each instance was put in the queue (0 = at start)
    enqueued_at: BTreeMap<u64, usize>,
    revealed: Vec<u64>,
    /// `(round, d_t, i_t)`
    diagonals: Vec<(usize, u64, usize)>,
    /// trap pair after each round
    trap_history: Vec<(usize, u64)>,
    counter_history: Vec<(usize, u64)>,
    pending_j: Option<u64>,
    stabilization: f64,
}

impl Default for DiagonalBuilder {
    fn default() -> Self {
        Self::new()
    }
}

impl DiagonalBuilder {
    pub fn new() -> Self {
        let mut enqueued_at = BTreeMap::new();
        enqueued_at.insert(1, 0);
        DiagonalBuilder {
            rows: vec![Row::AllOnes, Row::OneCold(2)],
            queue: BTreeSet::from([1]),
            trap: (2, 2),
            i_ctr: 2,
            j_ctr: 2,
            k: 1,
            round: 0,
            enqueued_at,
            revealed: Vec::new(),
            diagonals: Vec::new(),
            trap_history: Vec::new(),
            counter_history: vec![(2, 2)],
            pending_j: None,
            stabilization: 0.25,
        }
    }

    pub fn trap(&self) -> (usize, u64) {
        self.trap
    }

    pub fn counters(&self) -> (usize, u64) {
        (self.i_ctr, self.j_ctr)
    }

    pub fn queue(&self) -> &BTreeSet<u64> {
        &self.queue
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn revealed(&self) -> &[u64] {
        &self.revealed
    }

    pub fn diagonals(&self) -> &[(usize, u64, usize)] {
        &self.diagonals
    }

    /// `F(i, j)`; instances outside the built segment read as 0.
    pub fn f(&self, i: usize, j: u64) -> bool {
        j >= 1 && (j as usize) <= self.rows.len() && self.rows[j as usize - 1].bit(i)
    }

    fn push_row(&mut self, row: Row, enqueue: bool) -> u64 {
        self.rows.push(row);
        let j = self.rows.len() as u64;
        if enqueue {
            self.queue.insert(j);
            self.enqueued_at.insert(j, self.round);
        }
        j
    }

    /// Start of a round: reveal `min Q`.
    pub fn begin_round(&mut self) -> u64 {
        self.round += 1;
        self.k = 1;
        let x = *self.queue.iter().next().expect("queue never runs dry");
        self.queue.remove(&x);
        self.revealed.push(x);
        x
    }

    /// Answer `F(i, j)` during the query phase, growing the segment first.
    pub fn answer_query(&mut self, i: usize, j: u64) -> bool {
        let m = j.max(self.k);
        if m > self.j_ctr {
            while (self.rows.len() as u64) < m {
                self.push_row(Row::AllOnes, true);
            }
            self.j_ctr = m;
        }
        self.i_ctr = self.i_ctr.max(i);
        self.k += 1;
        self.f(i, j)
    }

    /// End of a round with the generator's output `i_t`.
    pub fn end_round(&mut self, out: ProperOutput) {
        let it = out.0;
        self.i_ctr = self.i_ctr.max(it);
        if it != 1 {
            let jp = self.trap.1;
            self.queue.insert(jp);
            self.enqueued_at.insert(jp, self.round);
            let d = self.push_row(Row::OneHot(it), false);
            debug_assert_eq!(d, self.j_ctr + 1);
            self.diagonals.push((self.round, d, it));
            let trap_i = self.i_ctr + 1;
            let e = self.push_row(Row::OneCold(trap_i), false);
            self.trap = (trap_i, e);
            self.i_ctr = trap_i;
            self.j_ctr = e;
        }
        let c = self.push_row(Row::AllOnes, true);
        self.j_ctr = c;
        self.trap_history.push(self.trap);
        self.counter_history.push((self.i_ctr, self.j_ctr));
    }

    /// Structural invariants of the builder; the error names the first
    /// violation.
    pub fn check_invariants(&self) -> Result<(), String> {
        if self.rows.len() as u64 != self.j_ctr {
            return Err(format!("segment has {} rows but J = {}", self.rows.len(), self.j_ctr));
        }
        let (ti, tj) = self.trap;
        if self.rows.get(tj as usize - 1) != Some(&Row::OneCold(ti)) {
            return Err(format!("trap ({ti},{tj}) is not a one-cold row"));
        }
        for &(round, d, it) in &self.diagonals {
            if self.rows[d as usize - 1] != Row::OneHot(it) {
                return Err(format!("diagonal {d} of round {round} is not one-hot at {it}"));
            }
        }
        for w in self.counter_history.windows(2) {
            if w[1].0 < w[0].0 || w[1].1 < w[0].1 {
                return Err(format!("counters decreased: {:?} -> {:?}", w[0], w[1]));
            }
        }
        for (j, row) in self.rows.iter().enumerate() {
            let j = j as u64 + 1;
            let in_queue_or_shown = self.enqueued_at.contains_key(&j);
            match row {
                Row::AllOnes if !in_queue_or_shown => {
                    return Err(format!("all-ones row {j} was never enqueued"))
                }
                Row::OneHot(_) if in_queue_or_shown => {
                    return Err(format!("diagonal row {j} was enqueued"))
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Every instance still pending at the horizon was enqueued late enough
    /// that a queue served one element per round could not have reached it:
    /// for an instance enqueued at round `s`, `s + q > T`.
    pub fn pending_are_recent(&self) -> bool {
        let horizon = self.round;
        self.queue.iter().all(|&q| {
            let s = self.enqueued_at.get(&q).copied().unwrap_or(0);
            s as u64 + q > horizon as u64
        })
    }

    /// Largest `v` such that every target member `1..=v` that will ever be
    /// shown has been shown.
    pub fn frontier_value(&self) -> u64 {
        let pending = self.queue.iter().next().copied();
        let trap = self.trap.1;
        pending.map_or(trap, |p| p.min(trap)) - 1
    }

    pub fn set_stabilization(&mut self, fraction: f64) {
        self.stabilization = fraction;
    }

    /// The post-run target: `h_1` if the output left index 1 inside the
    /// final window, otherwise the index of the final trap.
    pub fn resolve_target(&self, outputs: &[ProperOutput]) -> DiagonalResolution {
        let n = outputs.len();
        let window = ((n as f64) * self.stabilization).ceil() as usize;
        let tail_moves = outputs[n - window.min(n)..].iter().any(|o| o.0 != 1);
        let diag: BTreeMap<usize, u64> = self.diagonals.iter().map(|&(r, d, _)| (r, d)).collect();
        if tail_moves {
            let certificates = diag.into_iter().collect();
            DiagonalResolution { target: 1, certificates }
        } else {
            let (ibar, jbar) = self.trap;
            let certificates = outputs
                .iter()
                .enumerate()
                .map(|(k, o)| {
                    let r = k + 1;
                    if o.0 == 1 {
                        (r, jbar)
                    } else {
                        (r, diag[&r])
                    }
                })
                .collect();
            DiagonalResolution { target: ibar, certificates }
        }
    }
}

impl QueryOracle for DiagonalBuilder {
    fn answer(&mut self, i: usize, e: &Element) -> bool {
        match *e {
            Element::Int(v) if v >= 1 => self.answer_query(i, v as u64),
            _ => {
                self.i_ctr = self.i_ctr.max(i);
                let m = self.k;
                if m > self.j_ctr {
                    while (self.rows.len() as u64) < m {
                        self.push_row(Row::AllOnes, true);
                    }
                    self.j_ctr = m;
                }
                self.k += 1;
                false
            }
        }
    }
}

impl ClassView for DiagonalBuilder {
    fn member(&self, i: usize, e: &Element) -> bool {
        match *e {
            Element::Int(v) if v >= 1 => self.f(i, v as u64),
            _ => false,
        }
    }

    /// Decided on the built segment. Every later row is all-ones, one-hot at
    /// a generator output, or one-cold at a fresh trap index, so the segment
    /// answer stands for the indices the game touches.
    fn subset(&self, i: usize, j: usize) -> bool {
        self.rows.iter().all(|r| !r.bit(i) || r.bit(j))
    }
}

impl ProperAdversary for DiagonalBuilder {
    fn name(&self) -> String {
        "diagonal-builder".into()
    }

    fn next(&mut self, _ctx: &ProperContext) -> Move {
        let x = self.begin_round();
        self.pending_j = Some(x);
        Move::Reveal(Element::Int(x as i64))
    }

    fn observe(&mut self, output: ProperOutput) {
        self.end_round(output);
    }

    fn view(&self) -> &dyn ClassView {
        self
    }

    fn frontier(&self, _target: usize) -> Frontier {
        Frontier::Canonical(4 * self.frontier_value())
    }

    fn resolve(&self, outputs: &[ProperOutput]) -> Vec<(usize, Vec<(usize, Element)>)> {
        let r = self.resolve_target(outputs);
        let certs = r
            .certificates
            .iter()
            .map(|&(t, j)| (t, Element::Int(j as i64)))
            .collect();
        vec![(r.target, certs)]
    }
}
