//! Vertex slot table and the birth/death event step.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::rates::RateFunction;
use crate::scalar::Scalar;
use crate::simulator::weighted_index::WeightedIndex;

/// Which count drives a vertex's rates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Children ever born, dead ones included.
    Fitness,
    /// Children currently alive.
    InDegree,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Fitness => "fitness",
            Mode::InDegree => "in_degree",
        })
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fitness" => Ok(Mode::Fitness),
            "in_degree" | "indegree" | "in-degree" => Ok(Mode::InDegree),
            other => Err(format!("unknown mode `{other}` (expected fitness or in_degree)")),
        }
    }
}

/// A mother reference that stays valid when her slot is recycled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Parent {
    pub slot: usize,
    pub id: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexRecord {
    /// Monotone vertex id, unique over the whole run.
    pub id: u64,
    pub fitness: u64,
    pub alive_children: u64,
    pub mother: Option<Parent>,
    pub alive: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    Birth { mother: usize, child: usize },
    Death { victim: usize },
}

#[derive(Debug, Clone)]
pub struct PopulationState<T> {
    b: RateFunction<T>,
    d: RateFunction<T>,
    mode: Mode,
    slots: Vec<VertexRecord>,
    index: WeightedIndex<T>,
    free: BinaryHeap<Reverse<usize>>,
    alive_count: u64,
    births_total: u64,
    deaths_total: u64,
    next_id: u64,
}

/// A population holding only the root.
///
/// # Panics
/// When `capacity_hint` is zero.
pub fn new_population<T: Scalar>(
    b: RateFunction<T>,
    d: RateFunction<T>,
    mode: Mode,
    capacity_hint: usize,
) -> PopulationState<T> {
    assert!(capacity_hint >= 1, "capacity hint must be at least 1");
    let mut state = PopulationState {
        b,
        d,
        mode,
        slots: Vec::with_capacity(capacity_hint),
        index: WeightedIndex::new(capacity_hint),
        free: BinaryHeap::new(),
        alive_count: 0,
        births_total: 0,
        deaths_total: 0,
        next_id: 0,
    };
    state.insert(None);
    state
}

impl<T: Scalar> PopulationState<T> {
    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn birth_rate(&self) -> &RateFunction<T> {
        &self.b
    }

    pub fn death_rate(&self) -> &RateFunction<T> {
        &self.d
    }

    pub fn alive_count(&self) -> u64 {
        self.alive_count
    }

    pub fn births_total(&self) -> u64 {
        self.births_total
    }

    pub fn deaths_total(&self) -> u64 {
        self.deaths_total
    }

    pub fn slots(&self) -> &[VertexRecord] {
        &self.slots
    }

    pub fn slot(&self, i: usize) -> &VertexRecord {
        &self.slots[i]
    }

    /// Sum of `b(key) + d(key)` over alive vertices.
    pub fn total_rate(&self) -> T {
        self.index.total()
    }

    pub fn weight(&self, slot: usize) -> T {
        self.index.get(slot)
    }

    pub fn key(&self, slot: usize) -> u64 {
        let v = &self.slots[slot];
        match self.mode {
            Mode::Fitness => v.fitness,
            Mode::InDegree => v.alive_children,
        }
    }

    fn rate_at(&self, key: u64) -> (T, T) {
        (self.b.evaluate(key), self.d.evaluate(key))
    }

    fn refresh(&mut self, slot: usize) {
        let (b, d) = self.rate_at(self.key(slot));
        self.index.set(slot, b + d);
    }

    /// Slot of the live vertex `p` refers to, if it is still alive.
    pub fn living_mother(&self, slot: usize) -> Option<usize> {
        let p = self.slots[slot].mother?;
        let m = &self.slots[p.slot];
        (m.alive && m.id == p.id).then_some(p.slot)
    }

    fn insert(&mut self, mother: Option<Parent>) -> usize {
        let record = VertexRecord {
            id: self.next_id,
            fitness: 0,
            alive_children: 0,
            mother,
            alive: true,
        };
        self.next_id += 1;
        let slot = match self.free.pop() {
            Some(Reverse(s)) => {
                self.slots[s] = record;
                s
            }
            None => {
                self.slots.push(record);
                self.slots.len() - 1
            }
        };
        self.alive_count += 1;
        self.refresh(slot);
        slot
    }

    /// Gives `mother` one child and returns the child's slot.
    ///
    /// # Panics
    /// When `mother` is not alive.
    pub fn apply_birth(&mut self, mother: usize) -> usize {
        assert!(self.slots[mother].alive, "birth from a dead vertex");
        let m = &mut self.slots[mother];
        m.fitness += 1;
        m.alive_children += 1;
        let parent = Parent { slot: mother, id: m.id };
        self.refresh(mother);
        self.births_total += 1;
        self.insert(Some(parent))
    }

    /// Kills `victim`; its slot becomes a ghost until recycled.
    ///
    /// # Panics
    /// When `victim` is not alive.
    pub fn apply_death(&mut self, victim: usize) {
        assert!(self.slots[victim].alive, "death of a dead vertex");
        let mother = self.living_mother(victim);
        self.slots[victim].alive = false;
        self.index.set(victim, T::zero());
        self.free.push(Reverse(victim));
        self.alive_count -= 1;
        self.deaths_total += 1;
        if let Some(m) = mother {
            self.slots[m].alive_children -= 1;
            if self.mode == Mode::InDegree {
                self.refresh(m);
            }
        }
    }

    /// Draws the next event of the embedded jump chain and applies it.
    ///
    /// # Panics
    /// When the population is empty.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> EventKind {
        assert!(self.alive_count > 0, "step on an empty population");
        let u = T::lit(rng.random::<f64>());
        let slot = self.index.sample(u).expect("alive vertices carry positive total rate");
        let (b, d) = self.rate_at(self.key(slot));
        let coin = T::lit(rng.random::<f64>());
        if coin * (b + d) < b {
            let child = self.apply_birth(slot);
            EventKind::Birth { mother: slot, child }
        } else {
            self.apply_death(slot);
            EventKind::Death { victim: slot }
        }
    }

    pub fn fitness_histogram(&self) -> BTreeMap<u64, u64> {
        self.histogram(|v| v.fitness)
    }

    pub fn indegree_histogram(&self) -> BTreeMap<u64, u64> {
        self.histogram(|v| v.alive_children)
    }

    fn histogram(&self, key: impl Fn(&VertexRecord) -> u64) -> BTreeMap<u64, u64> {
        let mut h = BTreeMap::new();
        for v in self.slots.iter().filter(|v| v.alive) {
            *h.entry(key(v)).or_insert(0) += 1;
        }
        h
    }

    /// Full-scan consistency check of every structural invariant.
    pub fn check_invariants(&self) -> Result<(), String> {
        if self.alive_count + self.deaths_total != self.births_total + 1 {
            return Err("alive count does not match births and deaths".into());
        }
        let mut kids = vec![0u64; self.slots.len()];
        let mut alive = 0;
        let mut total = T::zero();
        for (i, v) in self.slots.iter().enumerate() {
            if v.alive {
                alive += 1;
                let (b, d) = self.rate_at(self.key(i));
                if self.index.get(i) != b + d {
                    return Err(format!("slot {i} carries a stale weight"));
                }
                total = total + b + d;
                if let Some(m) = self.living_mother(i) {
                    kids[m] += 1;
                }
            } else if self.index.get(i) != T::zero() {
                return Err(format!("dead slot {i} has positive weight"));
            }
        }
        if alive != self.alive_count {
            return Err("alive flags disagree with the alive count".into());
        }
        for (i, v) in self.slots.iter().enumerate() {
            if v.alive && v.alive_children != kids[i] {
                return Err(format!("slot {i} counts {} alive children, scan finds {}", v.alive_children, kids[i]));
            }
        }
        let scale = total.abs().max(T::one());
        if (self.index.total() - total).abs() > T::lit(1e-9) * scale {
            return Err("index total differs from the sum of alive rates".into());
        }
        Ok(())
    }
}
