use std::collections::{BTreeSet, HashSet};

use super::scoring::{validate_proper_stream, validate_step, validate_stream};
use super::transcript::{LegalityTag, Output, RoundRecord, RunMeta, TargetRecord, Transcript};
use crate::adversaries::{
    Adversary, AdversaryContext, HaltReason, Move, ProperAdversary, ProperContext, Resolution,
};
use crate::domain::{Element, Hypothesis};
use crate::generators::{Generator, GeneratorError};
use crate::proper::{run_proper_round, ProperError, ProperGenerator, ProperOutput};

/// How the target of a game is chosen.
#[derive(Clone, Debug)]
pub enum TargetSelection {
    Fixed(Hypothesis),
    /// Fixed by the adversary after the run.
    PostHoc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProperTarget {
    Fixed(usize),
    PostHoc,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EngineError {
    #[error("protocol violation in round {round}: example {example} is neither in the target nor a replay")]
    ProtocolViolation { round: usize, example: Element },
    #[error("adversary bug: round {round} example {example} is illegal for resolved target {target}")]
    AdversaryBug { round: usize, example: Element, target: String },
    #[error("generator failed: {0}")]
    Generator(#[from] GeneratorError),
    #[error("proper generator failed: {0}")]
    Proper(ProperError),
    #[error("horizon must be at least 1")]
    ZeroHorizon,
}

/// A finished element-output game.
#[derive(Debug, Clone)]
pub struct GameRun {
    pub transcript: Transcript,
    /// Fixed or resolved target; `None` when a post-hoc adversary could not
    /// resolve one.
    pub target: Option<Hypothesis>,
    pub resolution: Option<Resolution>,
}

pub fn run_game<G, A>(
    generator: &mut G,
    adversary: &mut A,
    target: &TargetSelection,
    meta: RunMeta,
) -> Result<GameRun, EngineError>
where
    G: Generator + ?Sized,
    A: Adversary + ?Sized,
{
    run_game_observed(generator, adversary, target, meta, |_, _| {})
}

/// [`run_game`] with a callback after every round.
pub fn run_game_observed<G, A, F>(
    generator: &mut G,
    adversary: &mut A,
    target: &TargetSelection,
    meta: RunMeta,
    mut observer: F,
) -> Result<GameRun, EngineError>
where
    G: Generator + ?Sized,
    A: Adversary + ?Sized,
    F: FnMut(&RoundRecord, &G),
{
    if meta.horizon == 0 {
        return Err(EngineError::ZeroHorizon);
    }
    let horizon = meta.horizon;
    let mut tr = Transcript::new(meta);
    let mut examples = Vec::with_capacity(horizon);
    let mut outputs = Vec::with_capacity(horizon);
    let mut out_set: HashSet<Element> = HashSet::new();
    for t in 1..=horizon {
        let ctx = AdversaryContext { examples: &examples, outputs: &outputs };
        let x = match adversary.next(&ctx) {
            Move::Reveal(x) => x,
            Move::Halt(h) => {
                tr.halt = Some(h);
                break;
            }
        };
        let tag = match target {
            TargetSelection::Fixed(h) => {
                let tag = validate_step(h, &out_set, &x);
                if tag == LegalityTag::Illegal {
                    return Err(EngineError::ProtocolViolation { round: t, example: x });
                }
                tag
            }
            TargetSelection::PostHoc => LegalityTag::Provisional,
        };
        let o = match generator.step(&x) {
            Ok(o) => o,
            Err(GeneratorError::QueryBudgetExceeded { round, budget }) => {
                tr.halt = Some(HaltReason::NonHaltingRound { round, budget });
                break;
            }
            Err(e) => return Err(e.into()),
        };
        let rec = RoundRecord {
            t,
            example: x,
            tag,
            sure: !out_set.contains(&x),
            output: Output::Element(o),
            queries: generator.last_queries(),
        };
        examples.push(x);
        outputs.push(o);
        out_set.insert(o);
        adversary.observe(&o);
        observer(&rec, generator);
        tr.rounds.push(rec);
    }
    let (target, resolution) = match target {
        TargetSelection::Fixed(h) => {
            tr.target = TargetRecord::Fixed { name: h.name().to_string() };
            (Some(h.clone()), None)
        }
        TargetSelection::PostHoc => match adversary.resolve() {
            Some(res) => {
                let tags = validate_stream(&tr, &res.target);
                if let Some(bad) = tags.iter().position(|&g| g == LegalityTag::Illegal) {
                    return Err(EngineError::AdversaryBug {
                        round: bad + 1,
                        example: tr.rounds[bad].example,
                        target: res.target.name().to_string(),
                    });
                }
                for (r, g) in tr.rounds.iter_mut().zip(tags) {
                    r.tag = g;
                }
                tr.target = TargetRecord::Resolved { name: res.target.name().to_string() };
                (Some(res.target.clone()), Some(res))
            }
            None => (None, None),
        },
    };
    Ok(GameRun { transcript: tr, target, resolution })
}

/// A finished proper game.
#[derive(Debug, Clone)]
pub struct ProperRun {
    pub transcript: Transcript,
    /// Designated targets with certified mistakes `(round, instance)`, and
    /// whether the stream is legal for each.
    pub targets: Vec<ProperTargetReport>,
}

#[derive(Debug, Clone)]
pub struct ProperTargetReport {
    pub index: usize,
    pub legal: bool,
    pub certificates: Vec<(usize, Element)>,
}

pub fn run_proper_game<G, A>(
    generator: &mut G,
    adversary: &mut A,
    target: ProperTarget,
    meta: RunMeta,
    budget: u64,
) -> Result<ProperRun, EngineError>
where
    G: ProperGenerator + ?Sized,
    A: ProperAdversary,
{
    run_proper_game_observed(generator, adversary, target, meta, budget, |_, _| {})
}

pub fn run_proper_game_observed<G, A, F>(
    generator: &mut G,
    adversary: &mut A,
    target: ProperTarget,
    meta: RunMeta,
    budget: u64,
    mut observer: F,
) -> Result<ProperRun, EngineError>
where
    G: ProperGenerator + ?Sized,
    A: ProperAdversary,
    F: FnMut(&RoundRecord, &A),
{
    if meta.horizon == 0 {
        return Err(EngineError::ZeroHorizon);
    }
    let horizon = meta.horizon;
    let mut tr = Transcript::new(meta);
    let mut examples = Vec::with_capacity(horizon);
    let mut outputs: Vec<ProperOutput> = Vec::with_capacity(horizon);
    let mut distinct: BTreeSet<usize> = BTreeSet::new();
    for t in 1..=horizon {
        let ctx = ProperContext { examples: &examples, outputs: &outputs };
        let x = match adversary.next(&ctx) {
            Move::Reveal(x) => x,
            Move::Halt(h) => {
                tr.halt = Some(h);
                break;
            }
        };
        let replayable = distinct.iter().any(|&i| adversary.view().member(i, &x));
        let tag = match target {
            ProperTarget::Fixed(h) => {
                if adversary.view().member(h, &x) {
                    LegalityTag::Support
                } else if replayable {
                    LegalityTag::Replay
                } else {
                    return Err(EngineError::ProtocolViolation { round: t, example: x });
                }
            }
            ProperTarget::PostHoc => LegalityTag::Provisional,
        };
        let (out, log) = match run_proper_round(generator, adversary, &x, budget) {
            Ok(r) => r,
            Err(ProperError::BudgetExceeded { budget }) => {
                tr.halt = Some(HaltReason::NonHaltingRound { round: t, budget });
                break;
            }
            Err(e) => return Err(EngineError::Proper(e)),
        };
        adversary.observe(out);
        let rec = RoundRecord {
            t,
            example: x,
            tag,
            sure: !replayable,
            output: Output::Hypothesis(out),
            queries: log.len() as u64,
        };
        examples.push(x);
        outputs.push(out);
        distinct.insert(out.0);
        observer(&rec, adversary);
        tr.rounds.push(rec);
    }
    let targets: Vec<ProperTargetReport> = match target {
        ProperTarget::Fixed(h) => {
            tr.target = TargetRecord::ResolvedIndex { index: h };
            vec![ProperTargetReport { index: h, legal: true, certificates: Vec::new() }]
        }
        ProperTarget::PostHoc => {
            let resolved = adversary.resolve(&outputs);
            let reports: Vec<ProperTargetReport> = resolved
                .into_iter()
                .map(|(index, certificates)| {
                    let legal = validate_proper_stream(&tr, adversary.view(), index)
                        .iter()
                        .all(|&g| g != LegalityTag::Illegal);
                    ProperTargetReport { index, legal, certificates }
                })
                .collect();
            if let Some(first) = reports.iter().find(|r| r.legal) {
                let tags = validate_proper_stream(&tr, adversary.view(), first.index);
                for (r, g) in tr.rounds.iter_mut().zip(tags) {
                    r.tag = g;
                }
                tr.target = TargetRecord::ResolvedIndex { index: first.index };
            } else if let Some(r) = reports.first() {
                let tags = validate_proper_stream(&tr, adversary.view(), r.index);
                let bad = tags.iter().position(|&g| g == LegalityTag::Illegal).unwrap_or(0);
                return Err(EngineError::AdversaryBug {
                    round: bad + 1,
                    example: tr.rounds[bad].example,
                    target: format!("#{}", r.index),
                });
            }
            reports
        }
    };
    Ok(ProperRun { transcript: tr, targets })
}
