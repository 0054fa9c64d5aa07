use rand::Rng;

const ABSENT: u32 = u32::MAX;

/// Subset of `0..capacity` with O(1) insert, remove, membership and uniform
/// sampling. Members live in a dense array; a position map points back into
/// it and removal swaps the last member into the vacated slot.
#[derive(Clone, Debug)]
pub struct IndexedSet {
    items: Vec<u32>,
    pos: Vec<u32>,
}

impl IndexedSet {
    pub fn new(capacity: usize) -> Self {
        IndexedSet {
            items: Vec::new(),
            pos: vec![ABSENT; capacity],
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.items.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    #[inline]
    pub fn contains(&self, x: u32) -> bool {
        self.pos[x as usize] != ABSENT
    }

    /// Returns `false` if `x` was already present.
    #[inline]
    pub fn insert(&mut self, x: u32) -> bool {
        if self.contains(x) {
            return false;
        }
        self.pos[x as usize] = self.items.len() as u32;
        self.items.push(x);
        true
    }

    /// Returns `false` if `x` was not present.
    #[inline]
    pub fn remove(&mut self, x: u32) -> bool {
        let p = self.pos[x as usize];
        if p == ABSENT {
            return false;
        }
        let last = self.items.pop().expect("non-empty when a member exists");
        if last != x {
            self.items[p as usize] = last;
            self.pos[last as usize] = p;
        }
        self.pos[x as usize] = ABSENT;
        true
    }

    #[inline]
    pub fn get(&self, i: usize) -> u32 {
        self.items[i]
    }

    /// Uniform member, or `None` when empty.
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<u32> {
        if self.items.is_empty() {
            None
        } else {
            Some(self.items[rng.random_range(0..self.items.len())])
        }
    }

    /// Uniform member other than `exclude`, which must be a member.
    /// Draws an index among the first `len - 1` slots and substitutes the
    /// last slot when the draw lands on `exclude`.
    #[inline]
    pub fn sample_excluding<R: Rng + ?Sized>(&self, exclude: u32, rng: &mut R) -> Option<u32> {
        debug_assert!(self.contains(exclude));
        let k = self.items.len();
        if k < 2 {
            return None;
        }
        let w = self.items[rng.random_range(0..k - 1)];
        Some(if w == exclude { self.items[k - 1] } else { w })
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.items.iter().copied()
    }

    /// Checks that the dense array and the position map agree.
    pub(crate) fn is_consistent(&self) -> bool {
        let members = self.pos.iter().filter(|&&p| p != ABSENT).count();
        members == self.items.len()
            && self
                .items
                .iter()
                .enumerate()
                .all(|(i, &x)| self.pos.get(x as usize) == Some(&(i as u32)))
    }
}
