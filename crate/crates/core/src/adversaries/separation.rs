use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use super::{Adversary, AdversaryContext, Frontier, HaltReason, Move, Resolution};
use crate::classes::{make_separation_hypothesis, marker_hypothesis, SeparationKind};
use crate::domain::{Element, Hypothesis};

pub const DEFAULT_PHASE_CAP: usize = 2000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "stage", rename_all = "kebab-case")]
pub enum SeparationStage {
    /// Revealing `*^1, *^2, ...` until a fresh marker is output.
    Markers,
    /// Filling in markers up to `*^z`.
    Extend { next: u64 },
    /// Phase `n`: head `z - n`, then the tail beyond `J_{n-1}`.
    Phase { n: usize, head_shown: bool, next_tail: i64, rounds: usize },
    Capped { phase: usize },
    Done,
}

/// One completed or running phase.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseRecord {
    pub phase: usize,
    pub start_round: usize,
    /// Round whose output closed the phase.
    pub end_round: Option<usize>,
    /// `J_n`, the fresh output that closed the phase.
    pub j: Option<i64>,
    /// Tail values revealed, as an inclusive range.
    pub tail: Option<(i64, i64)>,
}

/// The two-step construction against limit generators on the padded
/// separation class: first force a long marker, then run phases that each
/// extract a fresh large output and never reveal it.
pub struct SeparationKiller {
    stage: SeparationStage,
    cap: usize,
    max_phases: Option<usize>,
    t: usize,
    marker_rounds: usize,
    z: Option<u64>,
    tau: Option<usize>,
    js: Vec<i64>,
    phases: Vec<PhaseRecord>,
    seen: HashSet<Element>,
    ints: BTreeSet<i64>,
}

impl SeparationKiller {
    pub fn new(cap: usize, max_phases: Option<usize>) -> Self {
        assert!(cap >= 1, "phase cap must be positive");
        SeparationKiller {
            stage: SeparationStage::Markers,
            cap,
            max_phases,
            t: 0,
            marker_rounds: 0,
            z: None,
            tau: None,
            js: Vec::new(),
            phases: Vec::new(),
            seen: HashSet::new(),
            ints: BTreeSet::new(),
        }
    }

    pub fn stage(&self) -> &SeparationStage {
        &self.stage
    }

    pub fn z(&self) -> Option<u64> {
        self.z
    }

    /// Round at which the fresh marker was output.
    pub fn tau(&self) -> Option<usize> {
        self.tau
    }

    /// `J_0, J_1, ...`.
    pub fn js(&self) -> &[i64] {
        &self.js
    }

    pub fn phases(&self) -> &[PhaseRecord] {
        &self.phases
    }

    fn reveal(&mut self, e: Element) -> Move {
        self.seen.insert(e);
        if let Element::Int(v) = e {
            self.ints.insert(v);
        }
        Move::Reveal(e)
    }

    fn halt(&self) -> Move {
        match self.stage {
            SeparationStage::Capped { phase } => Move::Halt(HaltReason::PhaseCap {
                phase,
                rounds: if phase == 0 { self.marker_rounds } else { self.cap },
            }),
            _ => Move::Halt(HaltReason::Completed { phases: self.phases.len() }),
        }
    }

    fn start_phase(&mut self, n: usize, next_tail: i64) {
        self.phases.push(PhaseRecord {
            phase: n,
            start_round: self.t + 1,
            end_round: None,
            j: None,
            tail: None,
        });
        self.stage = SeparationStage::Phase { n, head_shown: false, next_tail, rounds: 0 };
    }

    fn owed(&self) -> Vec<Element> {
        let markers = match (&self.stage, self.z) {
            (SeparationStage::Capped { phase: 0 }, _) | (SeparationStage::Markers, _) => {
                self.marker_rounds as u64
            }
            (SeparationStage::Capped { .. }, Some(z)) => z - 1,
            (SeparationStage::Extend { next }, Some(_)) => next - 1,
            (_, Some(z)) => z,
            (_, None) => 0,
        };
        let mut out: Vec<Element> = (1..=markers).map(Element::Marker).collect();
        if let Some(z) = self.z {
            for p in &self.phases {
                let head = z as i64 - p.phase as i64;
                if self.ints.contains(&head) {
                    out.push(Element::Int(head));
                }
                if let Some((a, b)) = p.tail {
                    out.extend((a..=b).map(Element::Int));
                }
            }
        }
        out
    }
}

impl Adversary for SeparationKiller {
    fn name(&self) -> String {
        format!("separation-killer(cap={})", self.cap)
    }

    fn next(&mut self, _ctx: &AdversaryContext) -> Move {
        match self.stage.clone() {
            SeparationStage::Markers => {
                if self.marker_rounds >= self.cap {
                    self.stage = SeparationStage::Capped { phase: 0 };
                    return self.halt();
                }
                self.t += 1;
                self.marker_rounds += 1;
                self.reveal(Element::Marker(self.t as u64))
            }
            SeparationStage::Extend { next } => {
                self.t += 1;
                let z = self.z.expect("z fixed before extending");
                let mv = self.reveal(Element::Marker(next));
                if next == z {
                    self.js.push(z as i64);
                    self.start_phase(1, z as i64 + 1);
                } else {
                    self.stage = SeparationStage::Extend { next: next + 1 };
                }
                mv
            }
            SeparationStage::Phase { n, head_shown, next_tail, rounds } => {
                if rounds >= self.cap {
                    self.stage = SeparationStage::Capped { phase: n };
                    return self.halt();
                }
                self.t += 1;
                let z = self.z.expect("z fixed in phases") as i64;
                if !head_shown {
                    self.stage = SeparationStage::Phase { n, head_shown: true, next_tail, rounds: rounds + 1 };
                    self.reveal(Element::Int(z - n as i64))
                } else {
                    let rec = self.phases.last_mut().expect("phase open");
                    rec.tail = Some(rec.tail.map_or((next_tail, next_tail), |(a, _)| (a, next_tail)));
                    self.stage = SeparationStage::Phase { n, head_shown, next_tail: next_tail + 1, rounds: rounds + 1 };
                    self.reveal(Element::Int(next_tail))
                }
            }
            SeparationStage::Capped { .. } | SeparationStage::Done => self.halt(),
        }
    }

    fn observe(&mut self, output: &Element) {
        match self.stage {
            SeparationStage::Markers => {
                if let Element::Marker(k) = *output {
                    if k > self.t as u64 {
                        self.z = Some(k);
                        self.tau = Some(self.t);
                        self.stage = SeparationStage::Extend { next: self.t as u64 + 1 };
                    }
                }
            }
            SeparationStage::Phase { n, .. } => {
                let floor = self.js[n - 1];
                if let Element::Int(v) = *output {
                    if v > floor && !self.seen.contains(output) {
                        self.js.push(v);
                        let rec = self.phases.last_mut().expect("phase open");
                        rec.end_round = Some(self.t);
                        rec.j = Some(v);
                        if self.max_phases.is_some_and(|k| n >= k) {
                            self.stage = SeparationStage::Done;
                        } else {
                            self.start_phase(n + 1, v + 1);
                        }
                    }
                }
            }
            _ => {}
        }
    }

    fn frontier(&self, _target: &Hypothesis) -> Frontier {
        Frontier::Owed(self.owed())
    }

    fn resolve(&self) -> Option<Resolution> {
        let certified: Vec<(usize, Element)> = self
            .phases
            .iter()
            .filter_map(|p| Some((p.end_round?, Element::Int(p.j?))))
            .collect();
        match (&self.stage, self.z) {
            (SeparationStage::Capped { phase: 0 }, _) => {
                Some(Resolution { target: marker_hypothesis(), certified: Vec::new() })
            }
            (SeparationStage::Capped { phase }, Some(z)) => {
                // the phase's own target: everything revealed before it, its
                // head, the ray beyond J_{n-1}, and markers below z
                let floor = self.js[phase - 1];
                let a: BTreeSet<i64> = self.ints.iter().copied().filter(|&v| v <= floor).collect();
                let target = make_separation_hypothesis(z - 1, SeparationKind::Cutoff, &a, Some(floor))
                    .expect("J_{n-1} >= z > z - 1");
                Some(Resolution { target, certified })
            }
            (_, Some(z)) => {
                let a: BTreeSet<i64> = self.ints.iter().copied().filter(|&v| v > z as i64).collect();
                let target = make_separation_hypothesis(z, SeparationKind::Below, &a, None)
                    .expect("z is never revealed");
                Some(Resolution { target, certified })
            }
            (_, None) => None,
        }
    }
}
