//! Growable bitset keyed by small integers.

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Bits {
    words: Vec<u64>,
}

impl Bits {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        let w = i / 64;
        w < self.words.len() && (self.words[w] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize) {
        let w = i / 64;
        if w >= self.words.len() {
            self.words.resize(w + 1, 0);
        }
        self.words[w] |= 1 << (i % 64);
    }

    #[inline]
    pub fn clear(&mut self, i: usize) {
        let w = i / 64;
        if w < self.words.len() {
            self.words[w] &= !(1 << (i % 64));
        }
    }

    #[inline]
    pub fn word(&self, w: usize) -> u64 {
        self.words.get(w).copied().unwrap_or(0)
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + b)
            })
        })
    }
}

/// Position of the first bit set in `a & !b`; `b` reads as zero past its end.
pub fn first_andnot(a: &[u64], b: &[u64]) -> Option<usize> {
    const CHUNK: usize = 8;
    let shared = a.len().min(b.len());
    let mut start = 0;
    while start + CHUNK <= shared {
        let (ac, bc) = (&a[start..start + CHUNK], &b[start..start + CHUNK]);
        let any = ac.iter().zip(bc).fold(0u64, |acc, (x, y)| acc | (x & !y));
        if any != 0 {
            break;
        }
        start += CHUNK;
    }
    for (wi, &aw) in a.iter().enumerate().skip(start) {
        let x = aw & !b.get(wi).copied().unwrap_or(0);
        if x != 0 {
            return Some(wi * 64 + x.trailing_zeros() as usize);
        }
    }
    None
}
