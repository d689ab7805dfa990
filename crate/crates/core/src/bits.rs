//! Fixed-width bit set over `u64` words.
//!
//! Rows, columns, and vertex subsets are all bit sets; the inner loops of
//! the library are word-wise AND/XOR/popcount. Bits past `len` are kept
//! zero so equality and hashing work on the word vector directly.

const BW: usize = 64;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitSet {
    len: usize,
    words: Vec<u64>,
}

impl BitSet {
    pub fn new(len: usize) -> Self {
        BitSet {
            len,
            words: vec![0; len.div_ceil(BW)],
        }
    }

    pub fn full(len: usize) -> Self {
        let mut s = BitSet {
            len,
            words: vec![!0u64; len.div_ceil(BW)],
        };
        s.trim();
        s
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(len: usize, iter: I) -> Self {
        let mut s = BitSet::new(len);
        for i in iter {
            s.insert(i);
        }
        s
    }

    fn trim(&mut self) {
        if !self.len.is_multiple_of(BW) {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << (self.len % BW)) - 1;
            }
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn insert(&mut self, i: usize) {
        assert!(i < self.len, "bit {i} out of range (len {})", self.len);
        self.words[i / BW] |= 1u64 << (i % BW);
    }

    pub fn remove(&mut self, i: usize) {
        assert!(i < self.len);
        self.words[i / BW] &= !(1u64 << (i % BW));
    }

    pub fn contains(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / BW] >> (i % BW)) & 1 != 0
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let b = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * BW + b)
                }
            })
        })
    }

    pub fn union_with(&mut self, other: &BitSet) {
        assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn intersect(&self, other: &BitSet) -> BitSet {
        assert_eq!(self.len, other.len);
        BitSet {
            len: self.len,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a & b)
                .collect(),
        }
    }

    pub fn minus(&self, other: &BitSet) -> BitSet {
        assert_eq!(self.len, other.len);
        BitSet {
            len: self.len,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a & !b)
                .collect(),
        }
    }

    pub fn is_subset_of(&self, other: &BitSet) -> bool {
        assert_eq!(self.len, other.len);
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn is_disjoint(&self, other: &BitSet) -> bool {
        assert_eq!(self.len, other.len);
        self.words.iter().zip(&other.words).all(|(a, b)| a & b == 0)
    }

    /// `|self ∩ mask|`.
    pub fn count_and(&self, mask: &BitSet) -> u64 {
        debug_assert_eq!(self.len, mask.len);
        self.words
            .iter()
            .zip(&mask.words)
            .map(|(a, b)| (a & b).count_ones() as u64)
            .sum()
    }

    /// `|(self △ other) ∩ mask|`.
    pub fn count_xor_and(&self, other: &BitSet, mask: &BitSet) -> u64 {
        debug_assert_eq!(self.len, other.len);
        debug_assert_eq!(self.len, mask.len);
        self.words
            .iter()
            .zip(&other.words)
            .zip(&mask.words)
            .map(|((a, b), m)| ((a ^ b) & m).count_ones() as u64)
            .sum()
    }

    /// Words of `self ∩ mask`, boxed for use as a grouping key.
    pub fn masked_key(&self, mask: &BitSet) -> Box<[u64]> {
        debug_assert_eq!(self.len, mask.len);
        self.words
            .iter()
            .zip(&mask.words)
            .map(|(a, b)| a & b)
            .collect()
    }
}

impl std::fmt::Debug for BitSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}
