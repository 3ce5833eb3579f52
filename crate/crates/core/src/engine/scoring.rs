use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use super::transcript::{LegalityTag, Transcript};
use crate::adversaries::{Frontier, HaltReason};
use crate::domain::{Element, Hypothesis};
use crate::proper::ClassView;

pub const DEFAULT_QUIET_TAIL: f64 = 0.25;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Notion {
    /// No mistake from the first round with `d_star` distinct examples.
    Uniform { d_star: usize },
    /// Same rule with a target-dependent count.
    NonUniform { d_star: usize },
    /// No mistake in the quiet tail.
    Limit,
    /// Limit rule with proper outputs.
    ProperLimit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    SuccessAtHorizon,
    ForcedFailure,
    PhaseCap,
    NonHaltingRound,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub target: String,
    pub legal_for_target: bool,
    pub mistake_times: Vec<usize>,
    pub last_mistake: Option<usize>,
    pub notion: Notion,
    pub classification: Classification,
    /// First round with the required number of distinct examples.
    pub trigger_round: Option<usize>,
    pub horizon: usize,
    pub rounds_played: usize,
    pub quiet_tail: f64,
}

impl Verdict {
    pub fn success(&self) -> bool {
        self.legal_for_target && self.classification == Classification::SuccessAtHorizon
    }

    /// Mistakes strictly inside the final quiet-tail window.
    pub fn tail_mistakes(&self) -> usize {
        let start = tail_start(self.rounds_played, self.quiet_tail);
        self.mistake_times.iter().filter(|&&t| t >= start).count()
    }
}

/// First round of the final `fraction` of `n` rounds.
pub fn tail_start(n: usize, fraction: f64) -> usize {
    let w = ((n as f64) * fraction).ceil() as usize;
    n + 1 - w.min(n)
}

/// `Support` if `x` is in the target, `Replay` if it was output earlier,
/// otherwise `Illegal`.
pub fn validate_step(target: &Hypothesis, prior_outputs: &HashSet<Element>, x: &Element) -> LegalityTag {
    if target.contains(x) {
        LegalityTag::Support
    } else if prior_outputs.contains(x) {
        LegalityTag::Replay
    } else {
        LegalityTag::Illegal
    }
}

/// Tags of every round of an element-output game against `target`.
pub fn validate_stream(tr: &Transcript, target: &Hypothesis) -> Vec<LegalityTag> {
    let mut outs = HashSet::new();
    let mut tags = Vec::with_capacity(tr.rounds.len());
    for r in &tr.rounds {
        tags.push(validate_step(target, &outs, &r.example));
        if let Some(o) = r.output.element() {
            outs.insert(o);
        }
    }
    tags
}

/// Tags of every round of a proper game: replays are examples inside the
/// support of an earlier output.
pub fn validate_proper_stream(tr: &Transcript, view: &dyn ClassView, target: usize) -> Vec<LegalityTag> {
    let mut outs: BTreeSet<usize> = BTreeSet::new();
    let mut tags = Vec::with_capacity(tr.rounds.len());
    for r in &tr.rounds {
        let tag = if view.member(target, &r.example) {
            LegalityTag::Support
        } else if outs.iter().any(|&i| view.member(i, &r.example)) {
            LegalityTag::Replay
        } else {
            LegalityTag::Illegal
        };
        tags.push(tag);
        if let Some(p) = r.output.hypothesis() {
            outs.insert(p.0);
        }
    }
    tags
}

fn classify(
    tr: &Transcript,
    notion: Notion,
    mistakes: &[usize],
    quiet_tail: f64,
) -> (Classification, Option<usize>) {
    let n = tr.rounds.len();
    let trigger = match notion {
        Notion::Uniform { d_star } | Notion::NonUniform { d_star } => {
            let mut seen = HashSet::new();
            tr.rounds.iter().find_map(|r| {
                seen.insert(r.example);
                (seen.len() >= d_star).then_some(r.t)
            })
        }
        _ => None,
    };
    match tr.halt {
        Some(HaltReason::PhaseCap { .. }) => return (Classification::PhaseCap, trigger),
        Some(HaltReason::NonHaltingRound { .. }) => return (Classification::NonHaltingRound, trigger),
        _ => {}
    }
    let failed = match notion {
        Notion::Uniform { .. } | Notion::NonUniform { .. } => {
            trigger.is_some_and(|s| mistakes.iter().any(|&t| t >= s))
        }
        Notion::Limit | Notion::ProperLimit => {
            let start = tail_start(n, quiet_tail);
            n == 0 || mistakes.iter().any(|&t| t >= start)
        }
    };
    let c = if failed { Classification::ForcedFailure } else { Classification::SuccessAtHorizon };
    (c, trigger)
}

/// Whether the round-`t` output is a mistake: not a fresh member of the
/// target.
pub fn improper_mistakes(tr: &Transcript, target: &Hypothesis) -> Vec<usize> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for r in &tr.rounds {
        seen.insert(r.example);
        if let Some(o) = r.output.element() {
            if !target.contains(&o) || seen.contains(&o) {
                out.push(r.t);
            }
        }
    }
    out
}

pub fn score_transcript(tr: &Transcript, target: &Hypothesis, notion: Notion) -> Verdict {
    score_transcript_with(tr, target, notion, DEFAULT_QUIET_TAIL)
}

pub fn score_transcript_with(tr: &Transcript, target: &Hypothesis, notion: Notion, quiet_tail: f64) -> Verdict {
    let legal = validate_stream(tr, target).iter().all(|&t| t != LegalityTag::Illegal);
    let mistakes = improper_mistakes(tr, target);
    let (classification, trigger_round) = classify(tr, notion, &mistakes, quiet_tail);
    Verdict {
        target: target.name().to_string(),
        legal_for_target: legal,
        last_mistake: mistakes.last().copied(),
        mistake_times: mistakes,
        notion,
        classification,
        trigger_round,
        horizon: tr.meta.horizon,
        rounds_played: tr.rounds.len(),
        quiet_tail,
    }
}

pub fn score_proper(tr: &Transcript, view: &dyn ClassView, target: usize, notion: Notion) -> Verdict {
    let legal = validate_proper_stream(tr, view, target)
        .iter()
        .all(|&t| t != LegalityTag::Illegal);
    let mistakes: Vec<usize> = tr
        .rounds
        .iter()
        .filter(|r| r.output.hypothesis().is_some_and(|p| !view.subset(p.0, target)))
        .map(|r| r.t)
        .collect();
    let (classification, trigger_round) = classify(tr, notion, &mistakes, DEFAULT_QUIET_TAIL);
    Verdict {
        target: format!("#{target}"),
        legal_for_target: legal,
        last_mistake: mistakes.last().copied(),
        mistake_times: mistakes,
        notion,
        classification,
        trigger_round,
        horizon: tr.meta.horizon,
        rounds_played: tr.rounds.len(),
        quiet_tail: DEFAULT_QUIET_TAIL,
    }
}

/// Finite-horizon surrogate for "every target element is eventually shown".
pub fn check_enumeration_with_replay(tr: &Transcript, target: &Hypothesis, frontier: &Frontier) -> bool {
    let shown: HashSet<Element> = tr.rounds.iter().map(|r| r.example).collect();
    match frontier {
        Frontier::Canonical(f) => (1..=*f)
            .map(Element::from_index)
            .filter(|e| target.contains(e))
            .all(|e| shown.contains(&e)),
        Frontier::Owed(list) => list.iter().all(|e| target.contains(e) && shown.contains(e)),
    }
}

/// Proper-game version of [`check_enumeration_with_replay`].
pub fn check_proper_enumeration(tr: &Transcript, view: &dyn ClassView, target: usize, frontier: &Frontier) -> bool {
    let shown: HashSet<Element> = tr.rounds.iter().map(|r| r.example).collect();
    match frontier {
        Frontier::Canonical(f) => (1..=*f)
            .map(Element::from_index)
            .filter(|e| view.member(target, e))
            .all(|e| shown.contains(&e)),
        Frontier::Owed(list) => list.iter().all(|e| view.member(target, e) && shown.contains(e)),
    }
}
