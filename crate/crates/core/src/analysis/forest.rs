//! Components of the alive forest left after removing ghost links.

use std::collections::{BTreeMap, HashMap};

use petgraph::unionfind::UnionFind;

use crate::scalar::Scalar;
use crate::simulator::PopulationState;

/// Component size -> number of components, over alive vertices joined to an
/// alive mother.
pub fn forest_components<T: Scalar>(state: &PopulationState<T>) -> BTreeMap<u64, u64> {
    let slots = state.slots();
    let mut uf = UnionFind::<usize>::new(slots.len());
    for (i, v) in slots.iter().enumerate() {
        if v.alive {
            if let Some(m) = state.living_mother(i) {
                uf.union(i, m);
            }
        }
    }
    let mut sizes: HashMap<usize, u64> = HashMap::new();
    for (i, v) in slots.iter().enumerate() {
        if v.alive {
            *sizes.entry(uf.find(i)).or_insert(0) += 1;
        }
    }
    let mut hist = BTreeMap::new();
    for size in sizes.into_values() {
        *hist.entry(size).or_insert(0) += 1;
    }
    hist
}
