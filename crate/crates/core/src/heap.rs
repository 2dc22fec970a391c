//! Binary min-heap over dense integer slots with decrease/increase-key.

const ABSENT: usize = usize::MAX;

/// Min-heap of `(key, slot)` pairs, at most one entry per slot. Entries are
/// ordered by key, then slot, so the pop order is fully determined.
#[derive(Clone, Debug)]
pub(crate) struct IndexedHeap<K> {
    heap: Vec<(K, usize)>,
    position: Vec<usize>,
}

impl<K> Default for IndexedHeap<K> {
    fn default() -> Self {
        IndexedHeap {
            heap: Vec::new(),
            position: Vec::new(),
        }
    }
}

impl<K: Ord + Copy> IndexedHeap<K> {
    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn key(&self, slot: usize) -> Option<K> {
        match self.position.get(slot) {
            Some(&i) if i != ABSENT => Some(self.heap[i].0),
            _ => None,
        }
    }

    pub fn contains(&self, slot: usize) -> bool {
        self.position.get(slot).is_some_and(|&i| i != ABSENT)
    }

    /// Inserts `slot` or changes its key. Returns true if it was absent.
    pub fn push(&mut self, slot: usize, key: K) -> bool {
        if slot >= self.position.len() {
            self.position.resize(slot + 1, ABSENT);
        }
        match self.position[slot] {
            ABSENT => {
                self.heap.push((key, slot));
                self.position[slot] = self.heap.len() - 1;
                self.sift_up(self.heap.len() - 1);
                true
            }
            i => {
                let old = self.heap[i].0;
                self.heap[i].0 = key;
                if key < old {
                    self.sift_up(i);
                } else if key > old {
                    self.sift_down(i);
                }
                false
            }
        }
    }

    pub fn remove(&mut self, slot: usize) -> Option<K> {
        let i = *self.position.get(slot)?;
        if i == ABSENT {
            return None;
        }
        Some(self.take(i))
    }

    pub fn peek(&self) -> Option<(K, usize)> {
        self.heap.first().copied()
    }

    pub fn pop(&mut self) -> Option<(K, usize)> {
        let top = self.heap.first().copied()?;
        self.take(0);
        Some(top)
    }

    pub fn clear(&mut self) {
        for &(_, slot) in &self.heap {
            self.position[slot] = ABSENT;
        }
        self.heap.clear();
    }

    /// Entries in heap order, not key order.
    pub fn iter(&self) -> impl Iterator<Item = (K, usize)> + '_ {
        self.heap.iter().copied()
    }

    fn take(&mut self, i: usize) -> K {
        let (key, slot) = self.heap.swap_remove(i);
        self.position[slot] = ABSENT;
        if i < self.heap.len() {
            self.position[self.heap[i].1] = i;
            let moved = self.heap[i];
            if moved < (key, slot) {
                self.sift_up(i);
            } else {
                self.sift_down(i);
            }
        }
        key
    }

    fn sift_up(&mut self, mut i: usize) {
        let item = self.heap[i];
        while i > 0 {
            let parent = (i - 1) / 2;
            if self.heap[parent] <= item {
                break;
            }
            self.heap[i] = self.heap[parent];
            self.position[self.heap[i].1] = i;
            i = parent;
        }
        self.heap[i] = item;
        self.position[item.1] = i;
    }

    fn sift_down(&mut self, mut i: usize) {
        let item = self.heap[i];
        let n = self.heap.len();
        loop {
            let left = 2 * i + 1;
            if left >= n {
                break;
            }
            let right = left + 1;
            let child = if right < n && self.heap[right] < self.heap[left] {
                right
            } else {
                left
            };
            if item <= self.heap[child] {
                break;
            }
            self.heap[i] = self.heap[child];
            self.position[self.heap[i].1] = i;
            i = child;
        }
        self.heap[i] = item;
        self.position[item.1] = i;
    }
}
