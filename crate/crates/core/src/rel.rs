//! Dense bit-matrix relations over a finite set of positions.

/// A subset of `0..len`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BitSet {
    len: usize,
    words: Vec<u64>,
}

fn nwords(len: usize) -> usize {
    len.div_ceil(64)
}

impl BitSet {
    pub fn empty(len: usize) -> BitSet {
        BitSet { len, words: vec![0; nwords(len)] }
    }

    pub fn full(len: usize) -> BitSet {
        let mut s = BitSet::empty(len);
        for x in 0..len {
            s.insert(x);
        }
        s
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn contains(&self, x: usize) -> bool {
        self.words[x / 64] >> (x % 64) & 1 == 1
    }

    pub fn insert(&mut self, x: usize) {
        self.words[x / 64] |= 1 << (x % 64);
    }

    pub fn remove(&mut self, x: usize) {
        self.words[x / 64] &= !(1 << (x % 64));
    }

    pub fn union_with(&mut self, other: &BitSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn intersect_with(&mut self, other: &BitSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
    }

    pub fn complement(&self) -> BitSet {
        let mut s = self.clone();
        for w in &mut s.words {
            *w = !*w;
        }
        if self.len % 64 != 0 {
            if let Some(last) = s.words.last_mut() {
                *last &= (1u64 << (self.len % 64)) - 1;
            }
        }
        s
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let b = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(i * 64 + b)
                }
            })
        })
    }

    pub fn intersects(&self, other: &BitSet) -> bool {
        self.words.iter().zip(&other.words).any(|(a, b)| a & b != 0)
    }
}

/// A binary relation on `0..len`, stored row by row.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Rel {
    len: usize,
    stride: usize,
    bits: Vec<u64>,
}

impl Rel {
    pub fn empty(len: usize) -> Rel {
        let stride = nwords(len);
        Rel { len, stride, bits: vec![0; stride * len] }
    }

    pub fn identity(len: usize) -> Rel {
        let mut r = Rel::empty(len);
        for x in 0..len {
            r.insert(x, x);
        }
        r
    }

    /// The diagonal restricted to `set`.
    pub fn diagonal(set: &BitSet) -> Rel {
        let mut r = Rel::empty(set.len());
        for x in set.iter() {
            r.insert(x, x);
        }
        r
    }

    pub fn from_pairs(len: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Rel {
        let mut r = Rel::empty(len);
        for (x, y) in pairs {
            r.insert(x, y);
        }
        r
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        self.bits[x * self.stride + y / 64] >> (y % 64) & 1 == 1
    }

    pub fn insert(&mut self, x: usize, y: usize) {
        self.bits[x * self.stride + y / 64] |= 1 << (y % 64);
    }

    fn row(&self, x: usize) -> &[u64] {
        &self.bits[x * self.stride..(x + 1) * self.stride]
    }

    /// Successors of `x`.
    pub fn image(&self, x: usize) -> BitSet {
        BitSet { len: self.len, words: self.row(x).to_vec() }
    }

    /// Union of the successors of every element of `set`.
    pub fn image_of(&self, set: &BitSet) -> BitSet {
        let mut out = BitSet::empty(self.len);
        for x in set.iter() {
            for (a, b) in out.words.iter_mut().zip(self.row(x)) {
                *a |= b;
            }
        }
        out
    }

    pub fn union_with(&mut self, other: &Rel) -> bool {
        let mut changed = false;
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            let n = *a | b;
            changed |= n != *a;
            *a = n;
        }
        changed
    }

    /// `self ; other`.
    pub fn compose(&self, other: &Rel) -> Rel {
        let mut out = Rel::empty(self.len);
        let s = self.stride;
        for x in 0..self.len {
            for (wi, &w) in self.row(x).iter().enumerate() {
                let mut w = w;
                while w != 0 {
                    let y = wi * 64 + w.trailing_zeros() as usize;
                    w &= w - 1;
                    let (dst, src) = (x * s, y * s);
                    for k in 0..s {
                        out.bits[dst + k] |= other.bits[src + k];
                    }
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> Rel {
        let mut out = Rel::empty(self.len);
        for (x, y) in self.pairs() {
            out.insert(y, x);
        }
        out
    }

    /// Transitive closure.
    pub fn plus(&self) -> Rel {
        let mut out = self.clone();
        let s = self.stride;
        for k in 0..self.len {
            for i in 0..self.len {
                if out.contains(i, k) && i != k {
                    for w in 0..s {
                        let v = out.bits[k * s + w];
                        out.bits[i * s + w] |= v;
                    }
                }
            }
        }
        out
    }

    /// Reflexive-transitive closure.
    pub fn star(&self) -> Rel {
        let mut out = self.plus();
        for x in 0..self.len {
            out.insert(x, x);
        }
        out
    }

    /// Elements related to themselves.
    pub fn loops(&self) -> BitSet {
        let mut out = BitSet::empty(self.len);
        for x in 0..self.len {
            if self.contains(x, x) {
                out.insert(x);
            }
        }
        out
    }

    /// Elements with at least one successor in `set`.
    pub fn preimage(&self, set: &BitSet) -> BitSet {
        let mut out = BitSet::empty(self.len);
        for x in 0..self.len {
            if self.row(x).iter().zip(&set.words).any(|(a, b)| a & b != 0) {
                out.insert(x);
            }
        }
        out
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.len).flat_map(move |x| self.image(x).iter().map(move |y| (x, y)).collect::<Vec<_>>())
    }

    pub fn count(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }
}
