//! Fixed-width bit sets over cell indices.

use std::fmt;

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct CellSet {
    words: Vec<u64>,
}

#[inline]
pub fn words_for(bits: usize) -> usize {
    bits.div_ceil(64).max(1)
}

impl CellSet {
    pub fn new(bits: usize) -> Self {
        Self {
            words: vec![0; words_for(bits)],
        }
    }

    pub fn from_words(words: Vec<u64>) -> Self {
        Self { words }
    }

    pub fn from_indices(bits: usize, idx: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Self::new(bits);
        for i in idx {
            s.insert(i);
        }
        s
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn insert(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    #[inline]
    pub fn remove(&mut self, i: usize) {
        self.words[i / 64] &= !(1 << (i % 64));
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// True when every bit of `mask` is set in `self`.
    #[inline]
    pub fn contains_all(&self, mask: &[u64]) -> bool {
        mask.iter().zip(&self.words).all(|(m, w)| m & !w == 0)
    }

    pub fn is_disjoint(&self, other: &CellSet) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & b == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let t = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + t)
            })
        })
    }

    /// The complement within `0..bits`.
    pub fn complement(&self, bits: usize) -> CellSet {
        let mut words: Vec<u64> = self.words.iter().map(|w| !w).collect();
        trim(&mut words, bits);
        CellSet { words }
    }

    /// Lowercase hex, most significant digit first, `ceil(bits / 4)` digits.
    pub fn to_hex(&self, bits: usize) -> String {
        let digits = bits.div_ceil(4).max(1);
        (0..digits)
            .rev()
            .map(|d| {
                let nib = (self.words[d * 4 / 64] >> (d * 4 % 64)) & 0xf;
                char::from_digit(nib as u32, 16).unwrap()
            })
            .collect()
    }

    pub fn from_hex(s: &str, bits: usize) -> Option<CellSet> {
        let mut out = CellSet::new(bits);
        let digits = bits.div_ceil(4).max(1);
        if s.len() != digits || s.chars().any(|c| c.is_ascii_uppercase()) {
            return None;
        }
        for (pos, ch) in s.chars().rev().enumerate() {
            let nib = ch.to_digit(16)? as u64;
            out.words[pos * 4 / 64] |= nib << (pos * 4 % 64);
        }
        let before = out.clone();
        trim(&mut out.words, bits);
        (before == out).then_some(out)
    }
}

fn trim(words: &mut [u64], bits: usize) {
    let full = bits / 64;
    let rem = bits % 64;
    for (i, w) in words.iter_mut().enumerate() {
        if i > full || (i == full && rem == 0) {
            *w = 0;
        } else if i == full {
            *w &= (1u64 << rem) - 1;
        }
    }
}

impl fmt::Debug for CellSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// Many masks of the same width stored back to back.
#[derive(Clone, Debug, Default)]
pub struct MaskTable {
    words: usize,
    data: Vec<u64>,
}

impl MaskTable {
    pub fn new(bits: usize) -> Self {
        Self {
            words: words_for(bits),
            data: Vec::new(),
        }
    }

    pub fn push(&mut self, mask: &CellSet) {
        debug_assert_eq!(mask.words().len(), self.words);
        self.data.extend_from_slice(mask.words());
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.words
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn words_per_mask(&self) -> usize {
        self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> &[u64] {
        &self.data[i * self.words..(i + 1) * self.words]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[u64]> + '_ {
        self.data.chunks_exact(self.words)
    }

    /// Index of the first mask contained in `set`.
    pub fn first_inside(&self, set: &CellSet) -> Option<usize> {
        self.iter().position(|m| set.contains_all(m))
    }

    pub fn any_inside(&self, set: &CellSet) -> bool {
        self.first_inside(set).is_some()
    }

    /// For single-word tables, the masks as plain integers.
    pub fn as_u64(&self) -> Option<&[u64]> {
        (self.words == 1).then_some(&self.data)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hex_round_trip_and_trim() {
        let s = CellSet::from_indices(10, [0, 3, 9]);
        let h = s.to_hex(10);
        assert_eq!(h, "209");
        assert_eq!(CellSet::from_hex(&h, 10), Some(s.clone()));
        // bit 10 is outside the board
        assert_eq!(CellSet::from_hex("609", 10), None);
        assert_eq!(CellSet::from_hex("2A9", 10), None);
        let c = s.complement(10);
        assert_eq!(c.len(), 7);
        assert!(c.is_disjoint(&s));
    }

    #[test]
    fn wide_sets() {
        let s = CellSet::from_indices(146, [0, 64, 145]);
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![0, 64, 145]);
        let h = s.to_hex(146);
        assert_eq!(h.len(), 37);
        assert_eq!(CellSet::from_hex(&h, 146), Some(s.clone()));
        let mut t = MaskTable::new(146);
        t.push(&CellSet::from_indices(146, [64]));
        t.push(&CellSet::from_indices(146, [1]));
        assert_eq!(t.first_inside(&s), Some(0));
        assert_eq!(s.complement(146).len(), 143);
    }
}
