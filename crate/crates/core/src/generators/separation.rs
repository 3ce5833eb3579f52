use super::{Generator, GeneratorError};
use crate::domain::Element;

/// `G^b` on an integer history: if `b` has been seen, step past everything
/// seen or said so far (and past `t`); otherwise step below it all.
pub fn gb_step(b: i64, history: &[i64], outputs: &[i64]) -> i64 {
    assert!(!history.is_empty(), "G^b needs a nonempty integer history");
    let all = history.iter().chain(outputs);
    if history.contains(&b) {
        let t = history.len() as i64;
        all.copied().fold(t, i64::max) + 1
    } else {
        all.copied().fold(b, i64::min) - 1
    }
}

/// One round of the composite generator over the mixed domain.
///
/// `outputs` are the composite's own earlier outputs; the integer ones are
/// passed on to `G^b`, whose round count is the length of the integer
/// sub-history.
pub fn composite_g_step(history: &[Element], outputs: &[Element]) -> Element {
    assert!(!history.is_empty(), "history must be nonempty");
    let m = history.iter().filter_map(|e| e.marker_level()).max().unwrap_or(0);
    let ints: Vec<i64> = history.iter().filter_map(|e| e.as_int()).collect();
    if ints.is_empty() {
        return Element::Marker(m + 1);
    }
    let outs: Vec<i64> = outputs.iter().filter_map(|e| e.as_int()).collect();
    Element::Int(gb_step(m as i64, &ints, &outs))
}

/// Stateful wrapper around [`composite_g_step`].
#[derive(Default)]
pub struct CompositeGenerator {
    max_marker: u64,
    ints: Vec<i64>,
    int_outputs: Vec<i64>,
    seen_ints: std::collections::HashSet<i64>,
    lo: i64,
    hi: i64,
}

impl CompositeGenerator {
    pub fn new() -> Self {
        Self::default()
    }
}

impl Generator for CompositeGenerator {
    fn name(&self) -> String {
        "composite".into()
    }

    fn step(&mut self, example: &Element) -> Result<Element, GeneratorError> {
        match *example {
            Element::Marker(k) => self.max_marker = self.max_marker.max(k),
            Element::Int(v) => {
                if self.ints.is_empty() {
                    self.lo = v;
                    self.hi = v;
                }
                self.ints.push(v);
                self.seen_ints.insert(v);
                self.lo = self.lo.min(v);
                self.hi = self.hi.max(v);
            }
        }
        if self.ints.is_empty() {
            return Ok(Element::Marker(self.max_marker + 1));
        }
        // incremental form of gb_step: track running min and max
        let b = self.max_marker as i64;
        let out = if self.seen_ints.contains(&b) {
            self.hi.max(self.ints.len() as i64) + 1
        } else {
            self.lo.min(b) - 1
        };
        self.int_outputs.push(out);
        self.lo = self.lo.min(out);
        self.hi = self.hi.max(out);
        Ok(Element::Int(out))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stateful_matches_formula() {
        let stream = [
            Element::Marker(2),
            Element::Int(7),
            Element::Int(-3),
            Element::Marker(5),
            Element::Int(5),
            Element::Int(40),
            Element::Int(2),
        ];
        let mut g = CompositeGenerator::new();
        let mut outs = Vec::new();
        for (t, x) in stream.iter().enumerate() {
            let want = composite_g_step(&stream[..=t], &outs);
            let got = g.step(x).unwrap();
            assert_eq!(got, want, "round {}", t + 1);
            outs.push(got);
        }
    }
}
