use std::collections::BTreeSet;

use super::Element;

/// Finite set of elements. Integers are stored as sorted, disjoint, non-adjacent
/// inclusive ranges so that sets like `{1, ..., n}` cost O(1) space.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct ElementSet {
    ranges: Vec<(i64, i64)>,
    markers: BTreeSet<u64>,
}

impl ElementSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_range(lo: i64, hi: i64) -> Self {
        let mut s = Self::new();
        s.insert_range(lo, hi);
        s
    }

    pub fn is_empty(&self) -> bool {
        self.ranges.is_empty() && self.markers.is_empty()
    }

    pub fn len(&self) -> u64 {
        let ints: u64 = self.ranges.iter().map(|&(a, b)| (b - a) as u64 + 1).sum();
        ints + self.markers.len() as u64
    }

    #[inline]
    pub fn contains(&self, e: &Element) -> bool {
        match *e {
            Element::Marker(k) => self.markers.contains(&k),
            Element::Int(v) => self.contains_int(v),
        }
    }

    #[inline]
    fn contains_int(&self, v: i64) -> bool {
        // first range whose upper end is >= v
        let pos = self.ranges.partition_point(|&(_, hi)| hi < v);
        pos < self.ranges.len() && self.ranges[pos].0 <= v
    }

    pub fn insert(&mut self, e: Element) {
        match e {
            Element::Marker(k) => {
                self.markers.insert(k);
            }
            Element::Int(v) => self.insert_range(v, v),
        }
    }

    pub fn insert_range(&mut self, lo: i64, hi: i64) {
        if lo > hi {
            return;
        }
        let (mut lo, mut hi) = (lo, hi);
        let mut out = Vec::with_capacity(self.ranges.len() + 1);
        let mut placed = false;
        for &(a, b) in &self.ranges {
            if b.saturating_add(1) < lo {
                out.push((a, b));
            } else if hi.saturating_add(1) < a {
                if !placed {
                    out.push((lo, hi));
                    placed = true;
                }
                out.push((a, b));
            } else {
                lo = lo.min(a);
                hi = hi.max(b);
            }
        }
        if !placed {
            out.push((lo, hi));
        }
        self.ranges = out;
    }

    pub fn remove(&mut self, e: &Element) -> bool {
        match *e {
            Element::Marker(k) => self.markers.remove(&k),
            Element::Int(v) => {
                let pos = self.ranges.partition_point(|&(_, hi)| hi < v);
                if pos >= self.ranges.len() || self.ranges[pos].0 > v {
                    return false;
                }
                let (a, b) = self.ranges[pos];
                let mut repl = Vec::new();
                if a < v {
                    repl.push((a, v - 1));
                }
                if v < b {
                    repl.push((v + 1, b));
                }
                self.ranges.splice(pos..=pos, repl);
                true
            }
        }
    }

    pub fn int_ranges(&self) -> &[(i64, i64)] {
        &self.ranges
    }

    pub fn marker_levels(&self) -> impl Iterator<Item = u64> + '_ {
        self.markers.iter().copied()
    }

    pub fn min_int(&self) -> Option<i64> {
        self.ranges.first().map(|r| r.0)
    }

    pub fn max_int(&self) -> Option<i64> {
        self.ranges.last().map(|r| r.1)
    }

    pub fn max_marker(&self) -> Option<u64> {
        self.markers.iter().next_back().copied()
    }

    /// All elements, unordered. Callers sort when order matters.
    pub fn iter(&self) -> impl Iterator<Item = Element> + '_ {
        self.ranges
            .iter()
            .flat_map(|&(a, b)| (a..=b).map(Element::Int))
            .chain(self.markers.iter().map(|&k| Element::Marker(k)))
    }

    /// Elements in canonical order.
    pub fn to_sorted_vec(&self) -> Vec<Element> {
        let mut v: Vec<Element> = self.iter().collect();
        v.sort();
        v
    }

    pub fn retain(&mut self, mut keep: impl FnMut(&Element) -> bool) {
        let all: Vec<Element> = self.iter().collect();
        let mut next = ElementSet::new();
        for e in all {
            if keep(&e) {
                next.insert(e);
            }
        }
        *self = next;
    }
}

impl FromIterator<Element> for ElementSet {
    fn from_iter<I: IntoIterator<Item = Element>>(iter: I) -> Self {
        let mut s = ElementSet::new();
        for e in iter {
            s.insert(e);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_merge_and_split() {
        let mut s = ElementSet::new();
        s.insert(Element::Int(3));
        s.insert(Element::Int(1));
        s.insert(Element::Int(2));
        assert_eq!(s.int_ranges(), &[(1, 3)]);
        s.insert_range(7, 9);
        assert_eq!(s.int_ranges(), &[(1, 3), (7, 9)]);
        assert!(s.remove(&Element::Int(8)));
        assert_eq!(s.int_ranges(), &[(1, 3), (7, 7), (9, 9)]);
        assert!(!s.remove(&Element::Int(5)));
        s.insert_range(4, 6);
        assert_eq!(s.int_ranges(), &[(1, 7), (9, 9)]);
        assert_eq!(s.len(), 8);
    }

    #[test]
    fn membership() {
        let mut s = ElementSet::from_range(-2, 2);
        s.insert(Element::Marker(4));
        assert!(s.contains(&Element::Int(0)));
        assert!(!s.contains(&Element::Int(3)));
        assert!(s.contains(&Element::Marker(4)));
        assert!(!s.contains(&Element::Marker(1)));
    }
}
