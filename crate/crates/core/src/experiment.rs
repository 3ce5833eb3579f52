//! Run manifests, the verdict grid, and WP trace export.

use std::collections::BTreeSet;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::adversaries::{
    Adversary, DiagonalBuilder, FairEnumerator, HaltReason, NonuniformKiller, ProperAdversary,
    ProperReplayKiller, ReplayChoice, ReplayInjector, Schedule, SeparationKiller, DEFAULT_PHASE_CAP,
};
use crate::classes::{make_separation_hypothesis, ClassSpec, HypothesisClass, SeparationKind};
use crate::domain::{Element, Hypothesis};
use crate::engine::{
    check_enumeration_with_replay, check_proper_enumeration, run_game, run_game_observed,
    run_proper_game, score_proper, score_transcript, Classification, EngineError, Notion,
    ProperTarget, RunMeta, TargetSelection, Transcript, Verdict, SCHEMA,
};
use crate::generators::{
    ClosureGenerator, CompositeGenerator, EchoUniform, Generator, WpGenerator, WpMode,
    DEFAULT_QUERY_BUDGET,
};
use crate::proper::{CriticalProper, GreedyProper, ProperGenerator, SureRule};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "kebab-case")]
pub enum GeneratorSpec {
    /// Witness-protecting critical generator.
    Wp,
    /// Same generator with every example trusted.
    Baseline,
    /// Echo wrapper over the closure generator of the class.
    Echo,
    /// The two-level generator for the padded separation family.
    Composite,
    GreedyProper {
        #[serde(default = "default_rule")]
        rule: SureRule,
    },
    CriticalProper {
        #[serde(default = "default_rule")]
        rule: SureRule,
    },
}

fn default_rule() -> SureRule {
    SureRule::AllExamples
}

impl GeneratorSpec {
    pub fn is_proper(&self) -> bool {
        matches!(self, GeneratorSpec::GreedyProper { .. } | GeneratorSpec::CriticalProper { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "kebab-case")]
pub enum AdversarySpec {
    Fair,
    NonuniformKiller {
        d: usize,
    },
    SeparationKiller {
        #[serde(default = "default_cap")]
        cap: usize,
        #[serde(default)]
        max_phases: Option<usize>,
    },
    Diagonal {
        #[serde(default = "default_stabilization")]
        stabilization: f64,
    },
    ProperKiller,
}

fn default_cap() -> usize {
    DEFAULT_PHASE_CAP
}

fn default_stabilization() -> f64 {
    0.25
}

impl AdversarySpec {
    pub fn is_proper(&self) -> bool {
        matches!(self, AdversarySpec::Diagonal { .. } | AdversarySpec::ProperKiller)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum TargetSpec {
    /// The class member with this 1-based index.
    Member { index: usize },
    /// A member of the padded separation family.
    Separation {
        b: u64,
        kind: SeparationKind,
        #[serde(default)]
        a: Vec<i64>,
        #[serde(default)]
        j: Option<i64>,
    },
    /// Fixed by the adversary after the run.
    PostHoc,
}

/// Everything that determines one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub generator: GeneratorSpec,
    pub adversary: AdversarySpec,
    #[serde(default)]
    pub class: Option<ClassSpec>,
    pub target: TargetSpec,
    /// Further fixed targets to score the same stream against.
    #[serde(default)]
    pub extra_targets: Vec<TargetSpec>,
    pub horizon: usize,
    #[serde(default)]
    pub seed: u64,
    /// Per-round replay probability for element games.
    #[serde(default)]
    pub inject_rate: f64,
    #[serde(default = "default_choice")]
    pub replay_choice: ReplayChoice,
    #[serde(default)]
    pub notion: Option<Notion>,
    #[serde(default)]
    pub query_budget: Option<u64>,
    /// Output directory; not part of the manifest hash.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
}

fn default_choice() -> ReplayChoice {
    ReplayChoice::MostRecent
}

impl RunManifest {
    pub fn new(generator: GeneratorSpec, adversary: AdversarySpec, target: TargetSpec, horizon: usize) -> Self {
        RunManifest {
            generator,
            adversary,
            class: None,
            target,
            extra_targets: Vec::new(),
            horizon,
            seed: 0,
            inject_rate: 0.0,
            replay_choice: ReplayChoice::MostRecent,
            notion: None,
            query_budget: None,
            out: None,
        }
    }

    pub fn with_class(mut self, class: ClassSpec) -> Self {
        self.class = Some(class);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_inject_rate(mut self, p: f64) -> Self {
        self.inject_rate = p;
        self
    }

    pub fn with_notion(mut self, notion: Notion) -> Self {
        self.notion = Some(notion);
        self
    }

    pub fn with_extra_target(mut self, t: TargetSpec) -> Self {
        self.extra_targets.push(t);
        self
    }

    /// Hex SHA-256 of the manifest JSON without the output path.
    pub fn hash(&self) -> String {
        let mut m = self.clone();
        m.out = None;
        let bytes = serde_json::to_vec(&m).expect("manifest serializes");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Parse a manifest, naming the offending top-level field on error.
    pub fn from_json(text: &str) -> Result<Self, ManifestError> {
        let v: serde_json::Value =
            serde_json::from_str(text).map_err(|e| ManifestError::new("manifest", e.to_string()))?;
        let obj = v.as_object().ok_or_else(|| ManifestError::new("manifest", "expected an object"))?;
        for field in ["generator", "adversary", "class", "target", "extra_targets", "horizon", "seed", "inject_rate", "replay_choice", "notion", "query_budget", "out"] {
            if let Some(x) = obj.get(field) {
                check_field(field, x)?;
            }
        }
        if let Some(k) = obj.keys().find(|k| !KNOWN_FIELDS.contains(&k.as_str())) {
            return Err(ManifestError::new(k, "unknown field"));
        }
        serde_json::from_value(v).map_err(|e| ManifestError::new("manifest", e.to_string()))
    }

    pub fn validate(&self) -> Result<(), ManifestError> {
        if self.horizon == 0 {
            return Err(ManifestError::new("horizon", "must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.inject_rate) {
            return Err(ManifestError::new("inject_rate", "must lie in [0, 1]"));
        }
        if self.generator.is_proper() != self.adversary.is_proper() {
            return Err(ManifestError::new(
                "adversary",
                "proper generators need a proper adversary and element generators an element adversary",
            ));
        }
        if self.generator.is_proper() && self.inject_rate > 0.0 {
            return Err(ManifestError::new("inject_rate", "replay injection applies to element games only"));
        }
        let needs_class = matches!(
            self.generator,
            GeneratorSpec::Wp | GeneratorSpec::Baseline | GeneratorSpec::Echo | GeneratorSpec::CriticalProper { .. }
        ) || matches!(self.adversary, AdversarySpec::ProperKiller)
            || matches!(self.target, TargetSpec::Member { .. });
        if needs_class && self.class.is_none() {
            return Err(ManifestError::new("class", "required for this generator, adversary or target"));
        }
        if let GeneratorSpec::Echo = self.generator {
            let d = self.class.as_ref().and_then(ClassSpec::uniform_sample_complexity);
            if d.is_none() {
                return Err(ManifestError::new("class", "echo needs a class with a known uniform sample complexity"));
            }
        }
        match (&self.adversary, &self.target) {
            (AdversarySpec::Fair, TargetSpec::PostHoc) => {
                return Err(ManifestError::new("target", "the fair enumerator needs a fixed target"))
            }
            (AdversarySpec::SeparationKiller { .. } | AdversarySpec::Diagonal { .. }, t)
                if *t != TargetSpec::PostHoc =>
            {
                return Err(ManifestError::new("target", "this adversary fixes its target after the run"))
            }
            (AdversarySpec::ProperKiller, _) => {
                if self.class.as_ref().and_then(ClassSpec::signed_pairs).is_none() {
                    return Err(ManifestError::new("class", "the proper killer needs a class with signed pairs"));
                }
            }
            (AdversarySpec::NonuniformKiller { d }, _) if *d == 0 => {
                return Err(ManifestError::new("adversary", "d must be positive"))
            }
            _ => {}
        }
        if self.generator.is_proper() {
            if let TargetSpec::Separation { .. } = self.target {
                return Err(ManifestError::new("target", "proper games take member or post-hoc targets"));
            }
        }
        Ok(())
    }

    /// The scoring notion, explicit or implied by the generator.
    pub fn effective_notion(&self) -> Notion {
        if let Some(n) = self.notion {
            return n;
        }
        match self.generator {
            GeneratorSpec::GreedyProper { .. } | GeneratorSpec::CriticalProper { .. } => Notion::ProperLimit,
            GeneratorSpec::Echo => Notion::Uniform {
                d_star: self.class.as_ref().and_then(ClassSpec::uniform_sample_complexity).unwrap_or(1),
            },
            _ => Notion::Limit,
        }
    }
}

const KNOWN_FIELDS: [&str; 12] = [
    "generator", "adversary", "class", "target", "extra_targets", "horizon", "seed", "inject_rate",
    "replay_choice", "notion", "query_budget", "out",
];

fn check_field(field: &str, v: &serde_json::Value) -> Result<(), ManifestError> {
    let r = match field {
        "generator" => from_value::<GeneratorSpec>(v),
        "adversary" => from_value::<AdversarySpec>(v),
        "class" => from_value::<Option<ClassSpec>>(v),
        "target" => from_value::<TargetSpec>(v),
        "extra_targets" => from_value::<Vec<TargetSpec>>(v),
        "horizon" => from_value::<usize>(v),
        "seed" => from_value::<u64>(v),
        "inject_rate" => from_value::<f64>(v),
        "replay_choice" => from_value::<ReplayChoice>(v),
        "notion" => from_value::<Option<Notion>>(v),
        "query_budget" => from_value::<Option<u64>>(v),
        _ => from_value::<Option<String>>(v),
    };
    r.map_err(|e| ManifestError::new(field, e))
}

fn from_value<T: DeserializeOwned>(v: &serde_json::Value) -> Result<(), String> {
    serde_json::from_value::<T>(v.clone()).map(|_| ()).map_err(|e| e.to_string())
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid `{field}`: {message}")]
pub struct ManifestError {
    pub field: String,
    pub message: String,
}

impl ManifestError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        ManifestError { field: field.into(), message: message.into() }
    }
}

/// Parse a compact flag value `id` or `id:key=value,key=value` into a tagged
/// spec. Values are read as JSON when they parse, else as strings.
pub fn parse_flag<T: DeserializeOwned>(field: &str, tag: &str, text: &str) -> Result<T, ManifestError> {
    let (id, rest) = match text.split_once(':') {
        Some((a, b)) => (a, Some(b)),
        None => (text, None),
    };
    let mut obj = serde_json::Map::new();
    obj.insert(tag.to_string(), serde_json::Value::String(id.trim().to_string()));
    if let Some(rest) = rest {
        for part in split_top_level(rest) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| ManifestError::new(field, format!("expected key=value, got `{part}`")))?;
            let val = serde_json::from_str(v.trim()).unwrap_or_else(|_| serde_json::Value::String(v.trim().into()));
            obj.insert(k.trim().to_string(), val);
        }
    }
    serde_json::from_value(serde_json::Value::Object(obj)).map_err(|e| ManifestError::new(field, e.to_string()))
}

fn split_top_level(s: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '[' | '{' => depth += 1,
            ']' | '}' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    if start < s.len() {
        parts.push(&s[start..]);
    }
    parts.into_iter().filter(|p| !p.trim().is_empty()).collect()
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Manifest(#[from] ManifestError),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// Verdict against one target with its enumeration check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetVerdict {
    pub verdict: Verdict,
    pub enumeration_ok: bool,
    /// Mistakes the adversary's construction certifies, `(round, instance)`.
    pub certified: Vec<(usize, Element)>,
}

impl TargetVerdict {
    /// A legal stream on which the generator failed.
    pub fn certifies_failure(&self) -> bool {
        self.verdict.legal_for_target
            && matches!(self.verdict.classification, Classification::ForcedFailure | Classification::PhaseCap)
    }
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub manifest_hash: String,
    pub transcript: Transcript,
    pub verdicts: Vec<TargetVerdict>,
}

impl RunReport {
    pub fn halt(&self) -> Option<&HaltReason> {
        self.transcript.halt.as_ref()
    }

    /// Every verdict succeeded and at least one target was scored.
    pub fn all_success(&self) -> bool {
        !self.verdicts.is_empty() && self.verdicts.iter().all(|v| v.verdict.success())
    }

    pub fn any_failure(&self) -> bool {
        self.verdicts.iter().any(TargetVerdict::certifies_failure)
    }

    pub fn verdict_json(&self) -> String {
        let v = serde_json::json!({
            "schema": SCHEMA,
            "manifest_hash": self.manifest_hash,
            "meta": self.transcript.meta,
            "halt": self.transcript.halt,
            "target": self.transcript.target,
            "verdicts": self.verdicts,
        });
        let mut s = serde_json::to_string_pretty(&v).expect("verdict serializes");
        s.push('\n');
        s
    }

    pub fn transcript_jsonl(&self) -> String {
        self.transcript.to_jsonl(&self.manifest_hash)
    }
}

fn class_of(m: &RunManifest) -> Option<HypothesisClass> {
    m.class.as_ref().map(ClassSpec::build)
}

fn resolve_target(m: &RunManifest, t: &TargetSpec) -> Result<Option<Hypothesis>, ManifestError> {
    match t {
        TargetSpec::PostHoc => Ok(None),
        TargetSpec::Member { index } => {
            let class = class_of(m).ok_or_else(|| ManifestError::new("class", "missing"))?;
            class
                .get(*index)
                .map(Some)
                .ok_or_else(|| ManifestError::new("target", format!("no member with index {index}")))
        }
        TargetSpec::Separation { b, kind, a, j } => {
            let a: BTreeSet<i64> = a.iter().copied().collect();
            make_separation_hypothesis(*b, *kind, &a, *j)
                .map(Some)
                .map_err(|e| ManifestError::new("target", e.to_string()))
        }
    }
}

fn build_generator(m: &RunManifest) -> Box<dyn Generator> {
    let budget = m.query_budget.unwrap_or(DEFAULT_QUERY_BUDGET);
    match m.generator {
        GeneratorSpec::Wp => Box::new(WpGenerator::with_mode(class_of(m).expect("validated"), WpMode::WitnessProtection).with_budget(budget)),
        GeneratorSpec::Baseline => Box::new(WpGenerator::with_mode(class_of(m).expect("validated"), WpMode::Baseline).with_budget(budget)),
        GeneratorSpec::Echo => {
            let spec = m.class.as_ref().expect("validated");
            let d = spec.uniform_sample_complexity().expect("validated");
            Box::new(EchoUniform::new(d, ClosureGenerator::new(spec.build())))
        }
        GeneratorSpec::Composite => Box::new(CompositeGenerator::new()),
        GeneratorSpec::GreedyProper { .. } | GeneratorSpec::CriticalProper { .. } => {
            unreachable!("proper generators run in proper games")
        }
    }
}

fn build_adversary(m: &RunManifest, target: Option<&Hypothesis>) -> Box<dyn Adversary> {
    let base: Box<dyn Adversary> = match m.adversary {
        AdversarySpec::Fair => Box::new(FairEnumerator::new(target.expect("validated").clone())),
        AdversarySpec::NonuniformKiller { d } => Box::new(NonuniformKiller::new(d)),
        AdversarySpec::SeparationKiller { cap, max_phases } => Box::new(SeparationKiller::new(cap, max_phases)),
        AdversarySpec::Diagonal { .. } | AdversarySpec::ProperKiller => unreachable!("proper adversaries"),
    };
    if m.inject_rate > 0.0 {
        Box::new(ReplayInjector::new(base, Schedule::Rate { p: m.inject_rate }, m.replay_choice, m.seed))
    } else {
        base
    }
}

fn meta_for(m: &RunManifest, generator: String, adversary: String) -> RunMeta {
    RunMeta {
        generator,
        adversary,
        class: m.class.as_ref().map(ClassSpec::label).unwrap_or_else(|| "separation".into()),
        seed: m.seed,
        horizon: m.horizon,
    }
}

/// Execute a manifest end to end.
pub fn run_manifest(m: &RunManifest) -> Result<RunReport, RunError> {
    m.validate()?;
    if m.generator.is_proper() {
        return run_proper_manifest(m);
    }
    let target = resolve_target(m, &m.target)?;
    let mut extras = Vec::new();
    for t in &m.extra_targets {
        if let Some(h) = resolve_target(m, t)? {
            extras.push(h);
        }
    }
    let mut generator = build_generator(m);
    let mut adversary = build_adversary(m, target.as_ref());
    let meta = meta_for(m, generator.name(), adversary.name());
    let selection = match &target {
        Some(h) => TargetSelection::Fixed(h.clone()),
        None => TargetSelection::PostHoc,
    };
    let run = run_game(&mut generator, &mut adversary, &selection, meta)?;
    let notion = m.effective_notion();
    let mut verdicts = Vec::new();
    let certified = run.resolution.as_ref().map(|r| r.certified.clone()).unwrap_or_default();
    if let Some(h) = &run.target {
        verdicts.push(TargetVerdict {
            verdict: score_transcript(&run.transcript, h, notion),
            enumeration_ok: check_enumeration_with_replay(&run.transcript, h, &adversary.frontier(h)),
            certified,
        });
    }
    for h in &extras {
        verdicts.push(TargetVerdict {
            verdict: score_transcript(&run.transcript, h, notion),
            enumeration_ok: check_enumeration_with_replay(&run.transcript, h, &adversary.frontier(h)),
            certified: Vec::new(),
        });
    }
    Ok(RunReport { manifest_hash: m.hash(), transcript: run.transcript, verdicts })
}

fn proper_generator(m: &RunManifest) -> Box<dyn ProperGenerator> {
    match m.generator {
        GeneratorSpec::GreedyProper { rule } => Box::new(GreedyProper::new(rule)),
        GeneratorSpec::CriticalProper { rule } => Box::new(CriticalProper::new(class_of(m).expect("validated"), rule)),
        _ => unreachable!("element generators run in element games"),
    }
}

fn run_proper_manifest(m: &RunManifest) -> Result<RunReport, RunError> {
    let mut generator = proper_generator(m);
    let target = match m.target {
        TargetSpec::Member { index } => ProperTarget::Fixed(index),
        _ => ProperTarget::PostHoc,
    };
    let budget = m.query_budget.unwrap_or(DEFAULT_QUERY_BUDGET);
    match m.adversary {
        AdversarySpec::Diagonal { stabilization } => {
            let mut adv = DiagonalBuilder::new();
            adv.set_stabilization(stabilization);
            proper_report(m, &mut generator, &mut adv, target, budget)
        }
        AdversarySpec::ProperKiller => {
            let spec = m.class.as_ref().expect("validated");
            let (minus, plus) = spec.signed_pairs().expect("validated");
            let mut adv = ProperReplayKiller::new(spec.build(), minus, plus);
            proper_report(m, &mut generator, &mut adv, target, budget)
        }
        _ => unreachable!("validated"),
    }
}

fn proper_report<A: ProperAdversary>(
    m: &RunManifest,
    generator: &mut Box<dyn ProperGenerator>,
    adversary: &mut A,
    target: ProperTarget,
    budget: u64,
) -> Result<RunReport, RunError> {
    let meta = meta_for(m, generator.name(), ProperAdversary::name(adversary));
    let run = run_proper_game(generator.as_mut(), adversary, target, meta, budget)?;
    let notion = m.effective_notion();
    let verdicts = run
        .targets
        .iter()
        .map(|r| TargetVerdict {
            verdict: score_proper(&run.transcript, adversary.view(), r.index, notion),
            enumeration_ok: check_proper_enumeration(&run.transcript, adversary.view(), r.index, &adversary.frontier(r.index)),
            certified: r.certificates.clone(),
        })
        .collect();
    Ok(RunReport { manifest_hash: m.hash(), transcript: run.transcript, verdicts })
}

/// One traced WP round.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TraceLine {
    pub manifest_hash: String,
    pub t: usize,
    pub example: Element,
    pub sure: bool,
    pub sure_size: usize,
    pub consistent: Vec<usize>,
    pub critical: Option<usize>,
    pub m: u64,
    pub witnesses: usize,
    pub output: Element,
    pub queries: u64,
}

/// Run a WP or baseline manifest and dump the generator state each round.
pub fn trace_manifest(m: &RunManifest) -> Result<(RunReport, Vec<TraceLine>), RunError> {
    m.validate()?;
    if !matches!(m.generator, GeneratorSpec::Wp | GeneratorSpec::Baseline) {
        return Err(ManifestError::new("generator", "only wp and baseline can be traced").into());
    }
    let target = resolve_target(m, &m.target)?;
    let mut generator = build_generator(m);
    let mut adversary = build_adversary(m, target.as_ref());
    let meta = meta_for(m, generator.name(), adversary.name());
    let selection = match &target {
        Some(h) => TargetSelection::Fixed(h.clone()),
        None => TargetSelection::PostHoc,
    };
    let hash = m.hash();
    let mut lines = Vec::new();
    let run = run_game_observed(&mut generator, &mut adversary, &selection, meta, |_, g| {
        if let Some(s) = g.snapshot() {
            lines.push(TraceLine {
                manifest_hash: hash.clone(),
                t: s.round.t,
                example: s.round.example,
                sure: s.round.sure,
                sure_size: s.sure_set.len(),
                consistent: s.consistent,
                critical: s.round.critical,
                m: s.round.m,
                witnesses: s.witnesses.iter().filter(|w| w.w.is_some()).count(),
                output: s.round.output,
                queries: s.round.queries,
            });
        }
    })?;
    let notion = m.effective_notion();
    let verdicts = run
        .target
        .iter()
        .map(|h| TargetVerdict {
            verdict: score_transcript(&run.transcript, h, notion),
            enumeration_ok: check_enumeration_with_replay(&run.transcript, h, &adversary.frontier(h)),
            certified: Vec::new(),
        })
        .collect();
    Ok((RunReport { manifest_hash: hash, transcript: run.transcript, verdicts }, lines))
}

// ---------------------------------------------------------------------------
// verdict grid

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NotionRow {
    Uniform,
    NonUniform,
    Limit,
    ProperLimit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Finite,
    Countable,
    General,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CellVerdict {
    Success,
    Failure,
    Mixed,
}

impl CellVerdict {
    fn as_str(self) -> &'static str {
        match self {
            CellVerdict::Success => "success",
            CellVerdict::Failure => "failure",
            CellVerdict::Mixed => "mixed",
        }
    }
}

/// Designated runs behind one cell.
#[derive(Clone, Debug)]
pub struct CellPlan {
    pub notion: NotionRow,
    pub family: Family,
    pub expected: CellVerdict,
    pub via: String,
    pub manifests: Vec<RunManifest>,
    /// Cell whose observed verdict this one takes when it has no runs.
    pub inherits: Option<(NotionRow, Family)>,
}

#[derive(Clone, Debug)]
pub struct CellResult {
    pub plan: CellPlan,
    pub observed: CellVerdict,
    pub runs: usize,
    pub hashes: Vec<String>,
}

impl CellResult {
    pub fn matches(&self) -> bool {
        self.observed == self.plan.expected
    }
}

#[derive(Clone, Debug)]
pub struct Grid {
    pub cells: Vec<CellResult>,
}

/// Options for the grid; the defaults are the desk-scale settings.
#[derive(Clone, Debug)]
pub struct GridOptions {
    pub seeds: u64,
    pub horizon: usize,
}

impl Default for GridOptions {
    fn default() -> Self {
        GridOptions { seeds: 5, horizon: 600 }
    }
}

fn fair_runs(
    generator: GeneratorSpec,
    class: ClassSpec,
    members: &[usize],
    seeds: u64,
    horizon: usize,
    notion: Option<Notion>,
) -> Vec<RunManifest> {
    let mut v = Vec::new();
    for &i in members {
        for s in 0..seeds {
            let mut m = RunManifest::new(generator.clone(), AdversarySpec::Fair, TargetSpec::Member { index: i }, horizon)
                .with_class(class.clone())
                .with_seed(s)
                .with_inject_rate([0.0, 0.25, 0.5][(s % 3) as usize]);
            m.notion = notion;
            v.push(m);
        }
    }
    v
}

/// The designated (generator, adversary) pairs for every cell.
pub fn grid_plan(opts: &GridOptions) -> Vec<CellPlan> {
    use CellVerdict::{Failure, Success};
    use Family::{Countable, Finite, General};
    use NotionRow::*;
    let h = opts.horizon;
    let s = opts.seeds;
    let cell = |notion, family, expected, via: &str, manifests, inherits| CellPlan {
        notion,
        family,
        expected,
        via: via.to_string(),
        manifests,
        inherits,
    };
    let nonuniform_killer = |g: GeneratorSpec, d: usize| {
        RunManifest::new(g, AdversarySpec::NonuniformKiller { d }, TargetSpec::Member { index: 1 }, h)
            .with_class(ClassSpec::NonuniformHard)
            .with_extra_target(TargetSpec::Member { index: d + 1 })
            .with_notion(Notion::NonUniform { d_star: d })
    };
    let proper_killer = |g: GeneratorSpec, class: ClassSpec| {
        RunManifest::new(g, AdversarySpec::ProperKiller, TargetSpec::PostHoc, h).with_class(class)
    };
    let proper_gens = [
        GeneratorSpec::GreedyProper { rule: SureRule::AllExamples },
        GeneratorSpec::CriticalProper { rule: SureRule::ExcludeReplayable },
    ];
    vec![
        cell(Uniform, Finite, Success, "echo/fair+replay", fair_runs(GeneratorSpec::Echo, ClassSpec::UniformPair, &[1, 2], s, h, None), None),
        cell(Uniform, Countable, Success, "echo/fair+replay", fair_runs(GeneratorSpec::Echo, ClassSpec::TwoSided, &[1, 2, 5, 8], s, h, None), None),
        cell(Uniform, General, Success, "inherited", Vec::new(), Some((Uniform, Countable))),
        cell(
            NonUniform,
            Finite,
            Success,
            "echo/fair+replay",
            fair_runs(GeneratorSpec::Echo, ClassSpec::MarkerAnchor, &[1, 2, 3], s, h, Some(Notion::NonUniform { d_star: 3 })),
            None,
        ),
        cell(
            NonUniform,
            Countable,
            Failure,
            "nonuniform-killer",
            [3, 5, 10]
                .into_iter()
                .flat_map(|d| [GeneratorSpec::Wp, GeneratorSpec::Baseline, GeneratorSpec::Composite].map(|g| nonuniform_killer(g, d)))
                .collect(),
            None,
        ),
        cell(NonUniform, General, Failure, "inherited", Vec::new(), Some((NonUniform, Countable))),
        cell(Limit, Finite, Success, "wp/fair+replay", fair_runs(GeneratorSpec::Wp, ClassSpec::MarkerAnchor, &[1, 2, 3], s, h, None), None),
        cell(
            Limit,
            Countable,
            Success,
            "wp/fair+replay",
            [
                fair_runs(GeneratorSpec::Wp, ClassSpec::NonuniformHard, &[1, 6], s, h, None),
                fair_runs(GeneratorSpec::Wp, ClassSpec::Generic { seed: 1 }, &[3], s, h, None),
            ]
            .concat(),
            None,
        ),
        cell(
            Limit,
            General,
            Failure,
            "separation-killer",
            vec![RunManifest::new(
                GeneratorSpec::Composite,
                AdversarySpec::SeparationKiller { cap: DEFAULT_PHASE_CAP, max_phases: Some(5) },
                TargetSpec::PostHoc,
                20_000,
            )],
            None,
        ),
        cell(
            ProperLimit,
            Finite,
            Failure,
            "proper-killer",
            proper_gens.iter().map(|g| proper_killer(g.clone(), ClassSpec::ProperReplay)).collect(),
            None,
        ),
        cell(
            ProperLimit,
            Countable,
            Failure,
            "proper-killer",
            proper_gens.iter().map(|g| proper_killer(g.clone(), ClassSpec::TwoSided)).collect(),
            None,
        ),
        cell(ProperLimit, General, Failure, "inherited", Vec::new(), Some((ProperLimit, Countable))),
    ]
}

fn observe_cell(plan: &CellPlan, reports: &[RunReport]) -> CellVerdict {
    if reports.is_empty() {
        return CellVerdict::Mixed;
    }
    if reports.iter().all(RunReport::all_success) {
        CellVerdict::Success
    } else if reports.iter().all(RunReport::any_failure) {
        CellVerdict::Failure
    } else {
        let _ = plan;
        CellVerdict::Mixed
    }
}

/// Run every designated pair and derive each cell from the engine verdicts.
pub fn run_grid(opts: &GridOptions) -> Result<Grid, RunError> {
    let plans = grid_plan(opts);
    let results: Vec<Result<(CellVerdict, Vec<String>), RunError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = plans
            .iter()
            .map(|p| {
                scope.spawn(move || {
                    let mut reports = Vec::new();
                    for m in &p.manifests {
                        reports.push(run_manifest(m)?);
                    }
                    let hashes = reports.iter().map(|r| r.manifest_hash.clone()).collect();
                    Ok((observe_cell(p, &reports), hashes))
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("grid worker panicked")).collect()
    });
    let mut cells = Vec::new();
    for (plan, r) in plans.iter().zip(results) {
        let (observed, hashes) = r?;
        cells.push(CellResult { plan: plan.clone(), observed, runs: plan.manifests.len(), hashes });
    }
    let snapshot: Vec<(NotionRow, Family, CellVerdict)> =
        cells.iter().map(|c| (c.plan.notion, c.plan.family, c.observed)).collect();
    for c in cells.iter_mut() {
        if let Some((n, f)) = c.plan.inherits {
            if let Some(&(_, _, v)) = snapshot.iter().find(|&&(a, b, _)| a == n && b == f) {
                c.observed = v;
            }
        }
    }
    Ok(Grid { cells })
}

fn label<T: Serialize>(x: &T) -> String {
    serde_json::to_value(x).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()
}

impl Grid {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("notion,family,expected,observed,match,via,inherited_from,runs,manifest_hashes\n");
        for c in &self.cells {
            let inherited = c
                .plan
                .inherits
                .map(|(n, f)| format!("{}/{}", label(&n), label(&f)))
                .unwrap_or_default();
            s.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                label(&c.plan.notion),
                label(&c.plan.family),
                c.plan.expected.as_str(),
                c.observed.as_str(),
                c.matches(),
                c.plan.via,
                inherited,
                c.runs,
                c.hashes.join(";"),
            ));
        }
        s
    }

    /// One line per manifest behind the grid.
    pub fn manifests_jsonl(&self) -> String {
        let mut s = String::new();
        for c in &self.cells {
            for m in &c.plan.manifests {
                let v = serde_json::json!({
                    "notion": c.plan.notion,
                    "family": c.plan.family,
                    "manifest_hash": m.hash(),
                    "manifest": m,
                });
                s.push_str(&v.to_string());
                s.push('\n');
            }
        }
        s
    }

    pub fn all_match(&self) -> bool {
        self.cells.iter().all(CellResult::matches)
    }
}
