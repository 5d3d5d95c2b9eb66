//! Linear algebra over GF(2) on vectors packed into `u32`.

/// Echelon basis indexed by pivot (highest set bit).
#[derive(Clone, Copy, Debug, Default)]
pub struct XorBasis {
    slots: [u32; 32],
    rank: u8,
}

impl XorBasis {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_vectors(vs: impl IntoIterator<Item = u32>) -> Self {
        let mut b = Self::new();
        for v in vs {
            b.insert(v);
        }
        b
    }

    #[inline]
    pub fn reduce(&self, mut v: u32) -> u32 {
        while v != 0 {
            let p = 31 - v.leading_zeros() as usize;
            let s = self.slots[p];
            if s == 0 {
                return v;
            }
            v ^= s;
        }
        0
    }

    /// Inserts `v`; returns `true` when it was independent of the basis.
    #[inline]
    pub fn insert(&mut self, v: u32) -> bool {
        let r = self.reduce(v);
        if r == 0 {
            return false;
        }
        self.slots[31 - r.leading_zeros() as usize] = r;
        self.rank += 1;
        true
    }

    #[inline]
    pub fn contains(&self, v: u32) -> bool {
        self.reduce(v) == 0
    }

    pub fn rank(&self) -> usize {
        self.rank as usize
    }

    /// Reduced row echelon form, rows ordered by decreasing pivot.
    pub fn canonical_rows(&self) -> Vec<u32> {
        let mut s = self.slots;
        for p in 0..32 {
            if s[p] == 0 {
                continue;
            }
            for q in p + 1..32 {
                if s[q] >> p & 1 == 1 {
                    s[q] ^= s[p];
                }
            }
        }
        s.iter().rev().copied().filter(|&r| r != 0).collect()
    }
}

pub fn rank(vs: &[u32]) -> usize {
    XorBasis::from_vectors(vs.iter().copied()).rank()
}

/// Basis of `{x : parity(x & r) = 0 for every r in rows}` inside `width` bits.
pub fn kernel(rows: &[u32], width: u32) -> Vec<u32> {
    let rref = XorBasis::from_vectors(rows.iter().copied()).canonical_rows();
    let pivots: Vec<u32> = rref.iter().map(|r| 31 - r.leading_zeros()).collect();
    let mut out = Vec::new();
    for c in 0..width {
        if pivots.contains(&c) {
            continue;
        }
        let mut v = 1u32 << c;
        for (r, &p) in rref.iter().zip(&pivots) {
            if r >> c & 1 == 1 {
                v |= 1 << p;
            }
        }
        out.push(v);
    }
    out
}

/// Basis of the intersection of two spans (Zassenhaus).
pub fn intersection(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut slots = [0u64; 64];
    let mut insert = |mut v: u64| {
        while v != 0 {
            let p = 63 - v.leading_zeros() as usize;
            if slots[p] == 0 {
                slots[p] = v;
                return;
            }
            v ^= slots[p];
        }
    };
    for &x in a {
        insert((x as u64) << 32 | x as u64);
    }
    for &y in b {
        insert((y as u64) << 32);
    }
    slots[..32].iter().filter(|&&v| v != 0).map(|&v| v as u32).collect()
}

/// All nonzero vectors of the span of an independent list, in increasing order.
pub fn span_points(basis: &[u32]) -> Vec<u32> {
    let k = basis.len();
    let mut out = Vec::with_capacity((1usize << k) - 1);
    let mut v = 0u32;
    // Gray code walk
    for i in 1u32..(1 << k) {
        v ^= basis[i.trailing_zeros() as usize];
        out.push(v);
    }
    out.sort_unstable();
    out
}
