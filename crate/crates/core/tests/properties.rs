use std::collections::{BTreeSet, HashSet};

use proptest::prelude::*;
use replaylab_core::classes::{generic_member, ClassSpec};
use replaylab_core::domain::{Element, Ray, SupportSpec};
use replaylab_core::engine::{tail_start, validate_stream, LegalityTag};
use replaylab_core::experiment::{run_manifest, AdversarySpec, GeneratorSpec, RunManifest, TargetSpec};
use replaylab_core::generators::{composite_g_step, gb_step};

/// Canonical slot written out case by case.
fn slot(e: &Element) -> u64 {
    match *e {
        Element::Marker(n) => 2 * n - 1,
        Element::Int(0) => 2,
        Element::Int(k) if k > 0 => 4 * k as u64,
        Element::Int(k) => 4 * k.unsigned_abs() + 2,
    }
}

fn element() -> impl Strategy<Value = Element> {
    prop_oneof![
        (-(1i64 << 40)..(1i64 << 40)).prop_map(Element::Int),
        (1u64..(1 << 40)).prop_map(Element::Marker),
    ]
}

fn small_element() -> impl Strategy<Value = Element> {
    prop_oneof![3 => (-30i64..=30).prop_map(Element::Int), 1 => (1u64..=12).prop_map(Element::Marker)]
}

#[derive(Clone, Debug)]
struct Model {
    include: BTreeSet<Element>,
    exclude: BTreeSet<Element>,
    above: Option<i64>,
    below: Option<i64>,
    prefix: u64,
    all: bool,
}

impl Model {
    fn member(&self, e: &Element) -> bool {
        if self.exclude.contains(e) {
            return false;
        }
        if self.include.contains(e) {
            return true;
        }
        match *e {
            Element::Int(v) => self.above.is_some_and(|j| v > j) || self.below.is_some_and(|b| v < b),
            Element::Marker(k) => self.all || k <= self.prefix,
        }
    }

    fn build(&self) -> SupportSpec {
        let mut b = SupportSpec::builder().marker_prefix(self.prefix);
        for e in &self.include {
            b = b.include(*e);
        }
        for e in &self.exclude {
            b = b.exclude(*e);
        }
        if let Some(j) = self.above {
            b = b.ray(Ray::Above(j));
        }
        if let Some(c) = self.below {
            b = b.ray(Ray::Below(c));
        }
        if self.all {
            b = b.all_markers();
        }
        b.build().expect("model is infinite")
    }
}

fn model() -> impl Strategy<Value = Model> {
    (
        prop::collection::btree_set(small_element(), 0..6),
        prop::collection::btree_set(small_element(), 0..6),
        prop::option::of(-20i64..=20),
        prop::option::of(-20i64..=20),
        0u64..=10,
        any::<bool>(),
    )
        .prop_filter("needs an infinite part", |(_, _, a, b, _, all)| a.is_some() || b.is_some() || *all)
        .prop_map(|(include, exclude, above, below, prefix, all)| {
            let exclude = exclude.difference(&include).copied().collect();
            Model { include, exclude, above, below, prefix, all }
        })
}

/// Every difference between two models lies in this window.
fn window() -> impl Iterator<Item = Element> {
    (-80i64..=80).map(Element::Int).chain((1u64..=15).map(Element::Marker))
}

proptest! {
    #[test]
    fn canonical_index_is_a_bijection(e in element(), idx in 1u64..(1 << 41)) {
        prop_assert_eq!(e.index(), slot(&e));
        prop_assert_eq!(Element::from_index(e.index()), e);
        prop_assert_eq!(Element::from_index(idx).index(), idx);
    }

    #[test]
    fn element_order_follows_the_index(a in element(), b in element()) {
        prop_assert_eq!(a.cmp(&b), slot(&a).cmp(&slot(&b)));
    }

    #[test]
    fn element_text_round_trips(e in element()) {
        let s = e.to_string();
        prop_assert_eq!(s.parse::<Element>().unwrap(), e);
    }

    #[test]
    fn support_membership_matches_model(m in model()) {
        let spec = m.build();
        for e in window() {
            prop_assert_eq!(spec.contains(&e), m.member(&e), "{}", e);
        }
    }

    #[test]
    fn subset_is_decided_exactly(a in model(), b in model()) {
        let (sa, sb) = (a.build(), b.build());
        let brute = window().all(|e| !a.member(&e) || b.member(&e));
        prop_assert_eq!(sa.is_subset_of(&sb), brute);
        prop_assert!(sa.is_subset_of(&sa));
    }

    #[test]
    fn support_iter_is_sorted_membership(m in model()) {
        let spec = m.build();
        let listed: Vec<Element> = spec.iter().take(40).collect();
        let want: Vec<Element> = (1u64..).map(Element::from_index).filter(|e| m.member(e)).take(40).collect();
        prop_assert_eq!(listed, want);
    }

    #[test]
    fn gb_step_is_fresh(b in -10i64..10, history in prop::collection::vec(-15i64..15, 1..20), outputs in prop::collection::vec(-40i64..40, 0..20)) {
        let o = gb_step(b, &history, &outputs);
        prop_assert!(!history.contains(&o) && !outputs.contains(&o));
        if history.contains(&b) {
            prop_assert!(o > history.len() as i64);
        } else {
            prop_assert!(o < b);
        }
    }

    #[test]
    fn composite_never_repeats_history(history in prop::collection::vec(small_element(), 1..20), outputs in prop::collection::vec(small_element(), 0..20)) {
        let o = composite_g_step(&history, &outputs);
        prop_assert!(!history.contains(&o));
        prop_assert!(!outputs.iter().filter(|e| e.as_int().is_some()).any(|e| *e == o));
    }

    #[test]
    fn quiet_tail_has_the_right_length(n in 1usize..5000, f in 0.01f64..1.0) {
        let s = tail_start(n, f);
        prop_assert!(s >= 1 && s <= n);
        prop_assert_eq!(n + 1 - s, ((n as f64) * f).ceil() as usize);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn replayed_runs_are_legal_and_deterministic(
        class_seed in 0u64..500,
        target in 1usize..8,
        seed in any::<u64>(),
        rate in 0.0f64..0.9,
        baseline in any::<bool>(),
    ) {
        let generator = if baseline { GeneratorSpec::Baseline } else { GeneratorSpec::Wp };
        let m = RunManifest::new(generator, AdversarySpec::Fair, TargetSpec::Member { index: target }, 60)
            .with_class(ClassSpec::Generic { seed: class_seed })
            .with_seed(seed)
            .with_inject_rate(rate);
        let a = run_manifest(&m).unwrap();
        let b = run_manifest(&m).unwrap();
        prop_assert_eq!(a.transcript_jsonl(), b.transcript_jsonl());
        prop_assert_eq!(a.verdict_json(), b.verdict_json());

        let tr = &a.transcript;
        let h = generic_member(class_seed, target);
        let mut outs = HashSet::new();
        let recomputed = tr.recompute_sure();
        for (r, tag) in tr.rounds.iter().zip(validate_stream(tr, &h)) {
            prop_assert_eq!(r.sure, !outs.contains(&r.example));
            prop_assert_eq!(recomputed[r.t - 1], r.sure);
            prop_assert_ne!(tag, LegalityTag::Illegal);
            prop_assert_eq!(tag == LegalityTag::Support, h.contains(&r.example));
            outs.insert(r.output.element().unwrap());
        }
    }
}
