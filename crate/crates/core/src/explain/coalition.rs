use std::fmt;

/// A subset of `n` players stored as a bitset.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Coalition {
    n: usize,
    bits: Vec<u64>,
}

impl Coalition {
    pub fn empty(n: usize) -> Self {
        Self {
            n,
            bits: vec![0; n.div_ceil(64)],
        }
    }

    pub fn full(n: usize) -> Self {
        let mut c = Self::empty(n);
        for i in 0..n {
            c.insert(i);
        }
        c
    }

    /// Coalition whose members are the set bits of `mask` (requires `n <= 64`).
    pub fn from_mask(n: usize, mask: u64) -> Self {
        assert!(n <= 64, "mask form supports at most 64 players");
        let mut c = Self::empty(n);
        if n > 0 {
            c.bits[0] = if n == 64 { mask } else { mask & ((1u64 << n) - 1) };
        }
        c
    }

    pub fn from_members(n: usize, members: impl IntoIterator<Item = usize>) -> Self {
        let mut c = Self::empty(n);
        for i in members {
            c.insert(i);
        }
        c
    }

    pub fn players(&self) -> usize {
        self.n
    }

    pub fn contains(&self, i: usize) -> bool {
        i < self.n && self.bits[i / 64] & (1 << (i % 64)) != 0
    }

    pub fn insert(&mut self, i: usize) {
        assert!(i < self.n, "player {i} out of range for {} players", self.n);
        self.bits[i / 64] |= 1 << (i % 64);
    }

    pub fn remove(&mut self, i: usize) {
        assert!(i < self.n, "player {i} out of range for {} players", self.n);
        self.bits[i / 64] &= !(1 << (i % 64));
    }

    pub fn len(&self) -> usize {
        self.bits.iter().map(|b| b.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&b| b == 0)
    }

    pub fn members(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&i| self.contains(i))
    }
}

impl fmt::Debug for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.members()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_set_ops() {
        let mut c = Coalition::empty(70);
        assert!(c.is_empty());
        c.insert(3);
        c.insert(65);
        assert_eq!(c.len(), 2);
        assert!(c.contains(65) && !c.contains(64) && !c.contains(200));
        c.remove(3);
        assert_eq!(c.members().collect::<Vec<_>>(), vec![65]);
        assert_eq!(Coalition::full(70).len(), 70);
        assert_eq!(Coalition::from_mask(3, 0b1111).len(), 3);
        assert_eq!(Coalition::from_mask(3, 0b101), Coalition::from_members(3, [0, 2]));
    }
}
