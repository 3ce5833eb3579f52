use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::adversaries::HaltReason;
use crate::domain::Element;
use crate::proper::ProperOutput;

pub const SCHEMA: &str = "replaylab/v1";

/// Legality of one example with respect to a target.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LegalityTag {
    Support,
    Replay,
    Illegal,
    /// Not yet checked; the target is fixed after the run.
    Provisional,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Output {
    Element(Element),
    Hypothesis(ProperOutput),
}

impl Output {
    pub fn element(&self) -> Option<Element> {
        match self {
            Output::Element(e) => Some(*e),
            Output::Hypothesis(_) => None,
        }
    }

    pub fn hypothesis(&self) -> Option<ProperOutput> {
        match self {
            Output::Hypothesis(p) => Some(*p),
            Output::Element(_) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub t: usize,
    pub example: Element,
    pub tag: LegalityTag,
    pub sure: bool,
    pub output: Output,
    pub queries: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunMeta {
    pub generator: String,
    pub adversary: String,
    pub class: String,
    pub seed: u64,
    pub horizon: usize,
}

/// How the target of a run was fixed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum TargetRecord {
    Fixed { name: String },
    Resolved { name: String },
    ResolvedIndex { index: usize },
    Unresolved,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub schema: String,
    pub meta: RunMeta,
    pub rounds: Vec<RoundRecord>,
    pub halt: Option<HaltReason>,
    pub target: TargetRecord,
}

impl Transcript {
    pub fn new(meta: RunMeta) -> Self {
        Transcript {
            schema: SCHEMA.into(),
            meta,
            rounds: Vec::new(),
            halt: None,
            target: TargetRecord::Unresolved,
        }
    }

    pub fn examples(&self) -> Vec<Element> {
        self.rounds.iter().map(|r| r.example).collect()
    }

    pub fn element_outputs(&self) -> Vec<Element> {
        self.rounds.iter().filter_map(|r| r.output.element()).collect()
    }

    pub fn proper_outputs(&self) -> Vec<ProperOutput> {
        self.rounds.iter().filter_map(|r| r.output.hypothesis()).collect()
    }

    /// Recompute the sure flags of an element-output game: an example is
    /// sure iff it was not output in an earlier round.
    pub fn recompute_sure(&self) -> Vec<bool> {
        let mut outs = HashSet::new();
        let mut v = Vec::with_capacity(self.rounds.len());
        for r in &self.rounds {
            v.push(!outs.contains(&r.example));
            if let Some(o) = r.output.element() {
                outs.insert(o);
            }
        }
        v
    }

    /// One JSON object per round, each carrying `manifest_hash`.
    pub fn to_jsonl(&self, manifest_hash: &str) -> String {
        let mut s = String::new();
        for r in &self.rounds {
            let line = serde_json::json!({
                "schema": self.schema,
                "manifest_hash": manifest_hash,
                "t": r.t,
                "example": r.example,
                "tag": r.tag,
                "sure": r.sure,
                "output": r.output,
                "queries": r.queries,
            });
            s.push_str(&line.to_string());
            s.push('\n');
        }
        s
    }
}
