//! Hypothesis classes used by the games, plus serializable class descriptors.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{
    intersection_is_infinite, DomainError, Element, Hypothesis, Ray, SupportSpec,
};

type Ctor = Arc<dyn Fn(usize) -> Hypothesis + Send + Sync>;

/// Number of leading members a closure computation must look at for a given
/// history (used for countable classes whose closure is determined by a
/// finite head).
pub type ClosureBound = fn(&[Element]) -> usize;

#[derive(Clone)]
enum Kind {
    Finite(Vec<Hypothesis>),
    Countable(Ctor),
}

/// An ordered hypothesis class. Indices start at 1.
#[derive(Clone)]
pub struct HypothesisClass {
    kind: Kind,
    description: String,
    closure_bound: Option<ClosureBound>,
}

impl fmt::Debug for HypothesisClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HypothesisClass")
            .field("description", &self.description)
            .field("len", &self.len())
            .finish()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ClassError {
    #[error("duplicate hypothesis name {0:?}")]
    DuplicateName(String),
    #[error("class must have at least one member")]
    Empty,
}

impl HypothesisClass {
    pub fn finite(
        description: impl Into<String>,
        members: Vec<Hypothesis>,
    ) -> Result<Self, ClassError> {
        if members.is_empty() {
            return Err(ClassError::Empty);
        }
        let mut seen = BTreeSet::new();
        for h in &members {
            if !seen.insert(h.name().to_string()) {
                return Err(ClassError::DuplicateName(h.name().to_string()));
            }
        }
        Ok(HypothesisClass {
            kind: Kind::Finite(members),
            description: description.into(),
            closure_bound: None,
        })
    }

    pub fn countable(
        description: impl Into<String>,
        ctor: impl Fn(usize) -> Hypothesis + Send + Sync + 'static,
    ) -> Self {
        HypothesisClass {
            kind: Kind::Countable(Arc::new(ctor)),
            description: description.into(),
            closure_bound: None,
        }
    }

    pub fn with_closure_bound(mut self, bound: ClosureBound) -> Self {
        self.closure_bound = Some(bound);
        self
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    /// `None` for countably infinite classes.
    pub fn len(&self) -> Option<usize> {
        match &self.kind {
            Kind::Finite(v) => Some(v.len()),
            Kind::Countable(_) => None,
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.kind, Kind::Finite(_))
    }

    /// Member at 1-based index `i`.
    pub fn get(&self, i: usize) -> Option<Hypothesis> {
        if i == 0 {
            return None;
        }
        match &self.kind {
            Kind::Finite(v) => v.get(i - 1).cloned(),
            Kind::Countable(c) => Some(c(i)),
        }
    }

    /// Indices a closure computation must consider for `history`.
    pub fn closure_candidates(&self, history: &[Element]) -> usize {
        match (&self.kind, self.closure_bound) {
            (Kind::Finite(v), _) => v.len(),
            (Kind::Countable(_), Some(f)) => f(history),
            (Kind::Countable(_), None) => 0,
        }
    }

    pub fn has_closure(&self) -> bool {
        self.is_finite() || self.closure_bound.is_some()
    }

    /// Members (among the closure candidates) consistent with every example.
    pub fn version_space(&self, examples: &[Element]) -> Vec<(usize, Hypothesis)> {
        let k = self.closure_candidates(examples);
        (1..=k)
            .filter_map(|i| self.get(i).map(|h| (i, h)))
            .filter(|(_, h)| examples.iter().all(|e| h.contains(e)))
            .collect()
    }

    /// First index whose support equals `h`'s support.
    pub fn first_index_of(&self, h: &Hypothesis, search: usize) -> Option<usize> {
        let bound = self.len().unwrap_or(search).min(search);
        (1..=bound).find(|&i| {
            self.get(i)
                .is_some_and(|g| g.spec().same_support(h.spec()))
        })
    }
}

/// Serializable descriptor of a shipped class.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "kebab-case")]
pub enum ClassSpec {
    /// `h_inf` then `h_1, h_2, ...` with `supp(h_n) = {1..n} ∪ Z<0`.
    NonuniformHard,
    /// `h_1^-, h_2^-, h_1^+, h_2^+`.
    ProperReplay,
    /// `{x>0} ∪ {-1}` and `{x<0} ∪ {1}`.
    UniformPair,
    /// all markers, markers plus 0, and `Z>=0 ∪ {*^1}`.
    MarkerAnchor,
    /// `h_n^-` at `2n-1` and `h_n^+` at `2n` for every `n >= 1`.
    TwoSided,
    /// Seeded random countable family.
    Generic { seed: u64 },
    /// The two-member class `{all markers, whole domain}`.
    MarkersOrAll,
}

impl ClassSpec {
    pub fn build(&self) -> HypothesisClass {
        match *self {
            ClassSpec::NonuniformHard => make_nonuniform_hard_class(),
            ClassSpec::ProperReplay => make_proper_replay_class(),
            ClassSpec::UniformPair => make_uniform_pair_class(),
            ClassSpec::MarkerAnchor => make_marker_anchor_class(),
            ClassSpec::TwoSided => make_two_sided_class(),
            ClassSpec::Generic { seed } => make_generic_countable(seed),
            ClassSpec::MarkersOrAll => make_markers_or_all_class(),
        }
    }

    /// Hand-verified uniform sample complexity, when the class has one.
    /// Certified in tests by [`certify_uniform_sample_complexity`].
    pub fn uniform_sample_complexity(&self) -> Option<usize> {
        match self {
            ClassSpec::UniformPair | ClassSpec::MarkerAnchor => Some(3),
            ClassSpec::ProperReplay | ClassSpec::TwoSided => Some(4),
            ClassSpec::MarkersOrAll => Some(1),
            _ => None,
        }
    }

    /// Indices of the `(h_1^-, h_2^-)` and `(h_1^+, h_2^+)` pairs.
    pub fn signed_pairs(&self) -> Option<((usize, usize), (usize, usize))> {
        match self {
            ClassSpec::ProperReplay => Some(((1, 2), (3, 4))),
            ClassSpec::TwoSided => Some(((1, 3), (2, 4))),
            _ => None,
        }
    }

    pub fn label(&self) -> String {
        match self {
            ClassSpec::Generic { seed } => format!("generic-{seed}"),
            other => serde_json::to_value(other)
                .ok()
                .and_then(|v| v.get("id").and_then(|s| s.as_str()).map(String::from))
                .unwrap_or_default(),
        }
    }
}

fn spec(b: crate::domain::SupportBuilder) -> SupportSpec {
    b.build().expect("shipped hypotheses are infinite by construction")
}

/// `supp(h_n) = {1..n} ∪ Z<0`.
pub fn nonuniform_member(n: usize) -> Hypothesis {
    Hypothesis::new(
        format!("h_{n}"),
        spec(SupportSpec::builder().ray(Ray::negative()).include_range(1, n as i64)),
    )
}

/// `supp(h_inf) = {1, 2, ...}`.
pub fn nonuniform_infinite() -> Hypothesis {
    Hypothesis::new("h_inf", spec(SupportSpec::builder().ray(Ray::positive())))
}

pub fn make_nonuniform_hard_class() -> HypothesisClass {
    HypothesisClass::countable("h_inf, h_1, h_2, ... with supp(h_n) = {1..n} u {x<0}", |i| {
        if i == 1 {
            nonuniform_infinite()
        } else {
            nonuniform_member(i - 1)
        }
    })
}

/// `Z<=0 ∪ {i}`.
pub fn minus_member(i: usize) -> Hypothesis {
    Hypothesis::new(
        format!("h_{i}^-"),
        spec(SupportSpec::builder().ray(Ray::nonpositive()).include(Element::Int(i as i64))),
    )
}

/// `Z>=0 ∪ {-i}`.
pub fn plus_member(i: usize) -> Hypothesis {
    Hypothesis::new(
        format!("h_{i}^+"),
        spec(SupportSpec::builder().ray(Ray::nonnegative()).include(Element::Int(-(i as i64)))),
    )
}

pub fn make_proper_replay_class() -> HypothesisClass {
    HypothesisClass::finite(
        "h_1^-, h_2^-, h_1^+, h_2^+",
        vec![minus_member(1), minus_member(2), plus_member(1), plus_member(2)],
    )
    .expect("distinct names")
}

fn two_sided_bound(history: &[Element]) -> usize {
    let m = history
        .iter()
        .filter_map(|e| e.as_int())
        .map(|v| v.unsigned_abs() as usize)
        .max()
        .unwrap_or(0);
    2 * (m + 2)
}

pub fn make_two_sided_class() -> HypothesisClass {
    HypothesisClass::countable("h_n^- = {x<=0} u {n} at 2n-1, h_n^+ = {x>=0} u {-n} at 2n", |i| {
        let n = i.div_ceil(2);
        if i % 2 == 1 {
            minus_member(n)
        } else {
            plus_member(n)
        }
    })
    .with_closure_bound(two_sided_bound)
}

pub fn make_uniform_pair_class() -> HypothesisClass {
    let a = Hypothesis::new(
        "pos+{-1}",
        spec(SupportSpec::builder().ray(Ray::positive()).include(Element::Int(-1))),
    );
    let b = Hypothesis::new(
        "neg+{1}",
        spec(SupportSpec::builder().ray(Ray::negative()).include(Element::Int(1))),
    );
    HypothesisClass::finite("{x>0} u {-1}, {x<0} u {1}", vec![a, b]).expect("distinct names")
}

pub fn make_marker_anchor_class() -> HypothesisClass {
    let m = marker_hypothesis();
    let m0 = Hypothesis::new(
        "markers+{0}",
        spec(SupportSpec::builder().all_markers().include(Element::Int(0))),
    );
    let z = Hypothesis::new(
        "nonneg+{*^1}",
        spec(SupportSpec::builder().ray(Ray::nonnegative()).marker_prefix(1)),
    );
    HypothesisClass::finite("markers, markers u {0}, {x>=0} u {*^1}", vec![m, m0, z])
        .expect("distinct names")
}

pub fn whole_domain() -> Hypothesis {
    Hypothesis::new(
        "all",
        spec(
            SupportSpec::builder()
                .ray(Ray::nonnegative())
                .ray(Ray::negative())
                .all_markers(),
        ),
    )
}

pub fn make_markers_or_all_class() -> HypothesisClass {
    HypothesisClass::finite("markers, everything", vec![marker_hypothesis(), whole_domain()])
        .expect("distinct names")
}

/// `supp = {*^n : n >= 1}`.
pub fn marker_hypothesis() -> Hypothesis {
    Hypothesis::new("markers", spec(SupportSpec::builder().all_markers()))
}

/// Which of the two padded families a separation hypothesis belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeparationKind {
    /// `{b} ∪ A ∪ {x > j}` with `j > b`.
    Cutoff,
    /// `{x < b} ∪ A` with `b ∉ A`.
    Below,
}

/// A member of the padded family with parameter `b`: the integer part of the
/// given kind together with the markers `*^1..*^b`.
pub fn make_separation_hypothesis(
    b: u64,
    kind: SeparationKind,
    a: &BTreeSet<i64>,
    j: Option<i64>,
) -> Result<Hypothesis, DomainError> {
    let bi = b as i64;
    let fmt_a = a.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",");
    let (name, builder) = match (kind, j) {
        (SeparationKind::Cutoff, Some(j)) => {
            if j <= bi {
                return Err(DomainError::Separation(format!("need j > b, got j={j}, b={b}")));
            }
            let builder = SupportSpec::builder()
                .include(Element::Int(bi))
                .include_all(a.iter().map(|&v| Element::Int(v)))
                .ray(Ray::Above(j));
            (format!("cut[b={b};A={{{fmt_a}}};j={j}]"), builder)
        }
        (SeparationKind::Below, None) => {
            if a.contains(&bi) {
                return Err(DomainError::Separation(format!("A must not contain b={b}")));
            }
            let builder = SupportSpec::builder()
                .ray(Ray::Below(bi))
                .include_all(a.iter().map(|&v| Element::Int(v)));
            (format!("below[b={b};A={{{fmt_a}}}]"), builder)
        }
        (SeparationKind::Cutoff, None) => {
            return Err(DomainError::Separation("cutoff kind needs j".into()))
        }
        (SeparationKind::Below, Some(_)) => {
            return Err(DomainError::Separation("below kind takes no j".into()))
        }
    };
    Ok(Hypothesis::new(name, builder.marker_prefix(b).build()?))
}

/// Largest marker level in `h`, i.e. the parameter `b` of a separation
/// hypothesis.
pub fn marker_parameter(h: &Hypothesis) -> Option<u64> {
    h.spec().max_marker()
}

/// Parameters of member `i` of the seeded generic family.
///
/// The rule: a ChaCha8 stream keyed by `(seed, i)` draws a size in
/// `0..=min(i, 8)`, then that many points from `-40..=46` (values above 40
/// become markers `*^(v-40)`), then a threshold in `-15..=15` and a direction.
pub fn generic_member(seed: u64, i: usize) -> Hypothesis {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i as u64);
    let size = rng.gen_range(0..=i.min(8));
    let mut b = SupportSpec::builder();
    for _ in 0..size {
        let v: i64 = rng.gen_range(-40..=46);
        b = if v > 40 {
            b.include(Element::Marker((v - 40) as u64))
        } else {
            b.include(Element::Int(v))
        };
    }
    let thr: i64 = rng.gen_range(-15..=15);
    let ray = if rng.gen_bool(0.5) { Ray::Above(thr) } else { Ray::Below(thr) };
    Hypothesis::new(format!("g{seed}_{i}"), spec(b.ray(ray)))
}

pub fn make_generic_countable(seed: u64) -> HypothesisClass {
    HypothesisClass::countable(format!("generic seed {seed}"), move |i| generic_member(seed, i))
}

/// Elements used to certify sample complexities: integers in `-w..=w` and
/// markers `*^1..*^k`.
pub fn certification_window(w: i64, k: u64) -> Vec<Element> {
    let mut v: Vec<Element> = (-w..=w).map(Element::Int).collect();
    v.extend((1..=k).map(Element::Marker));
    v.sort();
    v
}

/// Brute-force check that every `d`-subset of `window` with a nonempty
/// version space has an infinite closure intersection.
pub fn closure_pins_infinite(class: &HypothesisClass, d: usize, window: &[Element]) -> bool {
    let mut ok = true;
    for_each_subset(window, d, &mut |subset| {
        let vs = class.version_space(subset);
        if vs.is_empty() {
            return true;
        }
        let specs: Vec<&SupportSpec> = vs.iter().map(|(_, h)| h.spec()).collect();
        if !intersection_is_infinite(&specs) {
            ok = false;
            return false;
        }
        true
    });
    ok
}

/// `d` is the exact uniform sample complexity on `window`: every `d`-subset
/// pins an infinite closure and some `(d-1)`-subset does not.
pub fn certify_uniform_sample_complexity(
    class: &HypothesisClass,
    d: usize,
    window: &[Element],
) -> bool {
    closure_pins_infinite(class, d, window) && (d <= 1 || !closure_pins_infinite(class, d - 1, window))
}

fn for_each_subset(items: &[Element], k: usize, f: &mut dyn FnMut(&[Element]) -> bool) {
    fn rec(
        items: &[Element],
        k: usize,
        start: usize,
        cur: &mut Vec<Element>,
        f: &mut dyn FnMut(&[Element]) -> bool,
    ) -> bool {
        if cur.len() == k {
            return f(cur);
        }
        for i in start..items.len() {
            if items.len() - i < k - cur.len() {
                break;
            }
            cur.push(items[i]);
            let go = rec(items, k, i + 1, cur, f);
            cur.pop();
            if !go {
                return false;
            }
        }
        true
    }
    rec(items, k, 0, &mut Vec::with_capacity(k), f);
}
