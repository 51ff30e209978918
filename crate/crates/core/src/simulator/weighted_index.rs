//! Dynamic weighted sampling over a complete binary sum tree.
//!
//! Leaves hold nonnegative weights; every internal node is recomputed from its two
//! children on update, so the root never accumulates drift from incremental
//! additions and subtractions. `set` and `sample` are `O(log n)`.

use crate::scalar::Scalar;

#[derive(Debug, Clone)]
pub struct WeightedIndex<T> {
    /// Number of leaves, a power of two.
    width: usize,
    /// Heap layout: node `i` has children `2i` and `2i + 1`; leaves start at `width`.
    nodes: Vec<T>,
}

impl<T: Scalar> WeightedIndex<T> {
    pub fn new(capacity: usize) -> Self {
        let width = capacity.max(1).next_power_of_two();
        Self {
            width,
            nodes: vec![T::zero(); 2 * width],
        }
    }

    pub fn from_weights(weights: &[T]) -> Self {
        let mut idx = Self::new(weights.len());
        idx.nodes[idx.width..idx.width + weights.len()].copy_from_slice(weights);
        idx.rebuild();
        idx
    }

    pub fn capacity(&self) -> usize {
        self.width
    }

    pub fn total(&self) -> T {
        self.nodes[1]
    }

    pub fn get(&self, i: usize) -> T {
        self.nodes[self.width + i]
    }

    pub fn leaf_weights(&self) -> &[T] {
        &self.nodes[self.width..]
    }

    /// Sets leaf `i`, growing the tree if `i` is beyond its capacity.
    ///
    /// # Panics
    /// When `w` is negative or not finite.
    pub fn set(&mut self, i: usize, w: T) {
        assert!(w >= T::zero() && w.is_finite(), "weights must be finite and nonnegative");
        if i >= self.width {
            self.grow(i + 1);
        }
        let mut node = self.width + i;
        self.nodes[node] = w;
        while node > 1 {
            node /= 2;
            self.nodes[node] = self.nodes[2 * node] + self.nodes[2 * node + 1];
        }
    }

    /// Doubles the leaf count until at least `capacity` leaves exist.
    pub fn grow(&mut self, capacity: usize) {
        if capacity <= self.width {
            return;
        }
        let width = capacity.next_power_of_two();
        let mut nodes = vec![T::zero(); 2 * width];
        nodes[width..width + self.width].copy_from_slice(&self.nodes[self.width..]);
        self.width = width;
        self.nodes = nodes;
        self.rebuild();
    }

    fn rebuild(&mut self) {
        for node in (1..self.width).rev() {
            self.nodes[node] = self.nodes[2 * node] + self.nodes[2 * node + 1];
        }
    }

    /// Smallest `j` whose inclusive prefix sum exceeds `u * total()`.
    ///
    /// Returns `None` when the total weight is zero. The result always has a
    /// positive weight, including when rounding pushes the target past the root.
    pub fn sample(&self, u: T) -> Option<usize> {
        if !(self.total() > T::zero()) {
            return None;
        }
        let mut target = u * self.total();
        let mut node = 1;
        while node < self.width {
            let left = self.nodes[2 * node];
            if target < left {
                node *= 2;
            } else {
                target = target - left;
                node = 2 * node + 1;
            }
        }
        if self.nodes[node] > T::zero() {
            Some(node - self.width)
        } else {
            self.last_positive_before(node - self.width)
        }
    }

    /// Largest index `<= i` with positive weight.
    fn last_positive_before(&self, i: usize) -> Option<usize> {
        (0..=i).rev().find(|&j| self.get(j) > T::zero())
    }
}
