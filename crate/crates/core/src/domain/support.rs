use std::collections::BTreeSet;
use std::fmt;

use super::{DomainError, Element, ElementSet};

/// An infinite integer ray.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Ray {
    /// `{x : x > j}`
    Above(i64),
    /// `{x : x < b}`
    Below(i64),
}

impl Ray {
    pub fn nonnegative() -> Ray {
        Ray::Above(-1)
    }
    pub fn nonpositive() -> Ray {
        Ray::Below(1)
    }
    pub fn positive() -> Ray {
        Ray::Above(0)
    }
    pub fn negative() -> Ray {
        Ray::Below(0)
    }

    #[inline]
    pub fn contains(&self, v: i64) -> bool {
        match *self {
            Ray::Above(j) => v > j,
            Ray::Below(b) => v < b,
        }
    }
}

/// Symbolic description of an infinite subset of the domain.
///
/// The set is `(finite_in ∪ base) \ finite_out`, where `base` is the union of
/// the integer rays, the markers `*^1..*^B`, and all markers when flagged.
/// Construction normalizes the finite parts so that `finite_in` is disjoint
/// from `base` and `finite_out ⊆ base`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SupportSpec {
    finite_in: ElementSet,
    finite_out: ElementSet,
    above: Option<i64>,
    below: Option<i64>,
    marker_prefix: u64,
    all_markers: bool,
}

#[derive(Clone, Debug, Default)]
pub struct SupportBuilder {
    include: ElementSet,
    exclude: ElementSet,
    rays: Vec<Ray>,
    marker_prefix: u64,
    all_markers: bool,
}

impl SupportBuilder {
    pub fn include(mut self, e: Element) -> Self {
        self.include.insert(e);
        self
    }

    pub fn include_all(mut self, es: impl IntoIterator<Item = Element>) -> Self {
        for e in es {
            self.include.insert(e);
        }
        self
    }

    pub fn include_range(mut self, lo: i64, hi: i64) -> Self {
        self.include.insert_range(lo, hi);
        self
    }

    pub fn exclude(mut self, e: Element) -> Self {
        self.exclude.insert(e);
        self
    }

    pub fn ray(mut self, r: Ray) -> Self {
        self.rays.push(r);
        self
    }

    pub fn marker_prefix(mut self, b: u64) -> Self {
        self.marker_prefix = self.marker_prefix.max(b);
        self
    }

    pub fn all_markers(mut self) -> Self {
        self.all_markers = true;
        self
    }

    pub fn build(self) -> Result<SupportSpec, DomainError> {
        if self.rays.is_empty() && !self.all_markers {
            return Err(DomainError::FiniteSupport);
        }
        for e in self.include.iter().chain(self.exclude.iter()) {
            e.validate()?;
        }
        if let Some(e) = self.include.iter().find(|e| self.exclude.contains(e)) {
            return Err(DomainError::IncludedAndExcluded(e));
        }
        let mut above = None;
        let mut below = None;
        for r in &self.rays {
            match *r {
                Ray::Above(j) => above = Some(above.map_or(j, |a: i64| a.min(j))),
                Ray::Below(b) => below = Some(below.map_or(b, |c: i64| c.max(b))),
            }
        }
        let mut spec = SupportSpec {
            finite_in: ElementSet::new(),
            finite_out: ElementSet::new(),
            above,
            below,
            marker_prefix: if self.all_markers { 0 } else { self.marker_prefix },
            all_markers: self.all_markers,
        };
        let mut fin = self.include;
        fin.retain(|e| !spec.base_contains(e));
        let mut fout = self.exclude;
        fout.retain(|e| spec.base_contains(e));
        spec.finite_in = fin;
        spec.finite_out = fout;
        Ok(spec)
    }
}

impl SupportSpec {
    pub fn builder() -> SupportBuilder {
        SupportBuilder::default()
    }

    /// Membership ignoring the finite corrections.
    #[inline]
    fn base_contains(&self, e: &Element) -> bool {
        match *e {
            Element::Int(v) => {
                self.above.is_some_and(|j| v > j) || self.below.is_some_and(|b| v < b)
            }
            Element::Marker(k) => self.all_markers || k <= self.marker_prefix,
        }
    }

    #[inline]
    pub fn contains(&self, e: &Element) -> bool {
        if !self.finite_in.is_empty() && self.finite_in.contains(e) {
            return true;
        }
        if !self.finite_out.is_empty() && self.finite_out.contains(e) {
            return false;
        }
        self.base_contains(e)
    }

    pub fn finite_in(&self) -> &ElementSet {
        &self.finite_in
    }

    pub fn finite_out(&self) -> &ElementSet {
        &self.finite_out
    }

    pub fn rays(&self) -> Vec<Ray> {
        self.above
            .map(Ray::Above)
            .into_iter()
            .chain(self.below.map(Ray::Below))
            .collect()
    }

    pub fn above(&self) -> Option<i64> {
        self.above
    }

    pub fn below(&self) -> Option<i64> {
        self.below
    }

    pub fn marker_prefix(&self) -> u64 {
        self.marker_prefix
    }

    pub fn has_all_markers(&self) -> bool {
        self.all_markers
    }

    /// Largest marker level in the support, or `None` when there is no marker
    /// or infinitely many.
    pub fn max_marker(&self) -> Option<u64> {
        if self.all_markers {
            return None;
        }
        let mut best = None;
        for k in (1..=self.marker_prefix).rev() {
            if !self.finite_out.contains(&Element::Marker(k)) {
                best = Some(k);
                break;
            }
        }
        match (best, self.finite_in.max_marker()) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        }
    }

    /// Integer window outside of which the integer part of every listed spec
    /// is determined by its rays alone, plus the same bound for markers.
    fn window(specs: &[&SupportSpec]) -> (i64, i64, u64) {
        let mut lo = 0i64;
        let mut hi = 0i64;
        let mut mk = 0u64;
        for s in specs {
            for v in [s.above, s.below].into_iter().flatten() {
                lo = lo.min(v);
                hi = hi.max(v);
            }
            for set in [&s.finite_in, &s.finite_out] {
                if let Some(v) = set.min_int() {
                    lo = lo.min(v);
                }
                if let Some(v) = set.max_int() {
                    hi = hi.max(v);
                }
                if let Some(k) = set.max_marker() {
                    mk = mk.max(k);
                }
            }
            mk = mk.max(s.marker_prefix);
        }
        (lo - 1, hi + 1, mk + 1)
    }

    /// `supp(self) ⊆ supp(other)`, decided from the tails and a bounded window.
    pub fn is_subset_of(&self, other: &SupportSpec) -> bool {
        if self.above.is_some() && other.above.is_none() {
            return false;
        }
        if self.below.is_some() && other.below.is_none() {
            return false;
        }
        if self.all_markers && !other.all_markers {
            return false;
        }
        let (lo, hi, mk) = Self::window(&[self, other]);
        let ints = (lo..=hi).map(Element::Int);
        let markers = (1..=mk).map(Element::Marker);
        ints.chain(markers)
            .all(|e| !self.contains(&e) || other.contains(&e))
    }

    pub fn same_support(&self, other: &SupportSpec) -> bool {
        self.is_subset_of(other) && other.is_subset_of(self)
    }

    /// First support element with canonical index at least `from`.
    pub fn next_member_from(&self, from: u64) -> Element {
        let mut idx = from.max(1);
        loop {
            let e = Element::from_index(idx);
            if self.contains(&e) {
                return e;
            }
            idx += 1;
        }
    }

    /// Elements of the support in canonical order.
    pub fn iter(&self) -> SupportIter<'_> {
        SupportIter { spec: self, next: 1 }
    }
}

/// Whether the intersection of the given supports is infinite.
///
/// Every spec is a finite modification of rays and marker families, so the
/// intersection is infinite exactly when all specs share an upward ray, a
/// downward ray, or the full marker family.
pub fn intersection_is_infinite(specs: &[&SupportSpec]) -> bool {
    specs.iter().all(|s| s.above.is_some())
        || specs.iter().all(|s| s.below.is_some())
        || specs.iter().all(|s| s.all_markers)
}

/// Cursor over a support in canonical order.
pub struct SupportIter<'a> {
    spec: &'a SupportSpec,
    next: u64,
}

impl Iterator for SupportIter<'_> {
    type Item = Element;

    fn next(&mut self) -> Option<Element> {
        let e = self.spec.next_member_from(self.next);
        self.next = e.index() + 1;
        Some(e)
    }
}

impl fmt::Display for SupportSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        if !self.finite_in.is_empty() {
            let items: Vec<String> =
                self.finite_in.to_sorted_vec().iter().map(|e| e.to_string()).collect();
            parts.push(format!("{{{}}}", items.join(",")));
        }
        if let Some(j) = self.above {
            parts.push(format!("{{x>{j}}}"));
        }
        if let Some(b) = self.below {
            parts.push(format!("{{x<{b}}}"));
        }
        if self.all_markers {
            parts.push("{*^n}".into());
        } else if self.marker_prefix > 0 {
            parts.push(format!("{{*^1..*^{}}}", self.marker_prefix));
        }
        write!(f, "{}", parts.join(" u "))?;
        if !self.finite_out.is_empty() {
            let items: Vec<String> =
                self.finite_out.to_sorted_vec().iter().map(|e| e.to_string()).collect();
            write!(f, " \\ {{{}}}", items.join(","))?;
        }
        Ok(())
    }
}

/// A named hypothesis with a symbolic support.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Hypothesis {
    name: String,
    spec: SupportSpec,
}

impl Hypothesis {
    pub fn new(name: impl Into<String>, spec: SupportSpec) -> Self {
        Hypothesis { name: name.into(), spec }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn spec(&self) -> &SupportSpec {
        &self.spec
    }

    #[inline]
    pub fn contains(&self, e: &Element) -> bool {
        self.spec.contains(e)
    }

    /// `supp(h)[m]`: support elements with canonical index at most `m`.
    pub fn support_prefix(&self, m: u64) -> Result<BTreeSet<Element>, DomainError> {
        if m == 0 {
            return Err(DomainError::ZeroIndex);
        }
        Ok((1..=m)
            .map(Element::from_index)
            .filter(|e| self.contains(e))
            .collect())
    }

    /// First `k` support elements in canonical order.
    pub fn enumerate_support(&self, k: usize) -> Result<Vec<Element>, DomainError> {
        if k == 0 {
            return Err(DomainError::ZeroCount);
        }
        Ok(self.spec.iter().take(k).collect())
    }

    pub fn is_subset_of(&self, other: &Hypothesis) -> bool {
        self.spec.is_subset_of(&other.spec)
    }
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.name, self.spec)
    }
}

pub fn contains(h: &Hypothesis, e: &Element) -> bool {
    h.contains(e)
}

pub fn subset_query(a: &Hypothesis, b: &Hypothesis) -> bool {
    a.is_subset_of(b)
}
