//! Fixed-width bit sets and row-major bit matrices.

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitSet {
    len: usize,
    words: Vec<u64>,
}

#[inline]
pub fn words_for(len: usize) -> usize {
    len.div_ceil(64)
}

impl BitSet {
    pub fn new(len: usize) -> Self {
        BitSet {
            len,
            words: vec![0; words_for(len)],
        }
    }

    pub fn full(len: usize) -> Self {
        let mut s = BitSet {
            len,
            words: vec![!0; words_for(len)],
        };
        s.trim();
        s
    }

    pub fn from_indices(len: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut s = BitSet::new(len);
        for i in indices {
            s.insert(i);
        }
        s
    }

    pub fn from_words(len: usize, words: &[u64]) -> Self {
        let mut s = BitSet {
            len,
            words: words.to_vec(),
        };
        s.trim();
        s
    }

    fn trim(&mut self) {
        let rem = self.len % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    #[inline]
    pub fn insert(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i >> 6] |= 1 << (i & 63);
    }

    #[inline]
    pub fn remove(&mut self, i: usize) {
        self.words[i >> 6] &= !(1 << (i & 63));
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        i < self.len && self.words[i >> 6] >> (i & 63) & 1 == 1
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn intersect_with(&mut self, other: &[u64]) {
        for (a, b) in self.words.iter_mut().zip(other) {
            *a &= *b;
        }
    }

    pub fn union_with(&mut self, other: &[u64]) {
        for (a, b) in self.words.iter_mut().zip(other) {
            *a |= *b;
        }
        self.trim();
    }

    pub fn difference_with(&mut self, other: &[u64]) {
        for (a, b) in self.words.iter_mut().zip(other) {
            *a &= !*b;
        }
    }

    pub fn is_subset_of(&self, other: &BitSet) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & !b == 0)
    }

    pub fn iter(&self) -> BitIter<'_> {
        iter_words(&self.words)
    }

    pub fn first(&self) -> Option<usize> {
        self.iter().next()
    }
}

/// Iterates the set bits of a word slice in increasing order.
pub fn iter_words(words: &[u64]) -> BitIter<'_> {
    BitIter {
        words,
        idx: 0,
        cur: words.first().copied().unwrap_or(0),
    }
}

/// Appends the set bits of a word slice, increasing, to `out`.
#[inline]
pub fn iter_words_into(words: &[u64], out: &mut Vec<u32>) {
    for (i, &w) in words.iter().enumerate() {
        let mut w = w;
        while w != 0 {
            out.push((i * 64) as u32 + w.trailing_zeros());
            w &= w - 1;
        }
    }
}

pub struct BitIter<'a> {
    words: &'a [u64],
    idx: usize,
    cur: u64,
}

impl Iterator for BitIter<'_> {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        loop {
            if self.cur != 0 {
                let t = self.cur.trailing_zeros() as usize;
                self.cur &= self.cur - 1;
                return Some(self.idx * 64 + t);
            }
            self.idx += 1;
            if self.idx >= self.words.len() {
                return None;
            }
            self.cur = self.words[self.idx];
        }
    }
}

/// A dense `rows x cols` bit matrix stored row by row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn new(rows: usize, cols: usize) -> Self {
        let stride = words_for(cols);
        BitMatrix {
            rows,
            cols,
            stride,
            data: vec![0; rows * stride],
        }
    }

    pub fn from_rows(cols: usize, rows: Vec<Vec<u64>>) -> Self {
        let stride = words_for(cols);
        let mut data = Vec::with_capacity(rows.len() * stride);
        for r in &rows {
            debug_assert_eq!(r.len(), stride);
            data.extend_from_slice(r);
        }
        BitMatrix {
            rows: rows.len(),
            cols,
            stride,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        self.data[r * self.stride + (c >> 6)] >> (c & 63) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize) {
        self.data[r * self.stride + (c >> 6)] |= 1 << (c & 63);
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[u64] {
        &self.data[r * self.stride..(r + 1) * self.stride]
    }

    pub fn row_count(&self, r: usize) -> usize {
        self.row(r).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn row_set(&self, r: usize) -> BitSet {
        BitSet::from_words(self.cols, self.row(r))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iteration_is_sorted_and_complete() {
        let s = BitSet::from_indices(200, [3, 64, 65, 199, 0]);
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![0, 3, 64, 65, 199]);
        assert_eq!(s.count(), 5);
        assert!(s.contains(199) && !s.contains(198) && !s.contains(500));
    }

    #[test]
    fn full_set_is_trimmed() {
        let s = BitSet::full(70);
        assert_eq!(s.count(), 70);
        let mut t = BitSet::new(70);
        t.union_with(&[!0, !0]);
        assert_eq!(t.count(), 70);
    }

    #[test]
    fn matrix_rows() {
        let mut m = BitMatrix::new(3, 130);
        m.set(1, 129);
        m.set(1, 2);
        assert!(m.get(1, 129));
        assert_eq!(m.row_count(1), 2);
        assert_eq!(m.row_set(1).iter().collect::<Vec<_>>(), vec![2, 129]);
    }
}
