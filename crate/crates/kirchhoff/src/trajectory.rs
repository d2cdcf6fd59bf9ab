//! Time-stamped samples of any state type with integrator metadata.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::ode::Stats;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Trajectory<S> {
    pub times: Vec<f64>,
    pub states: Vec<S>,
    pub stats: Stats,
    pub meta: BTreeMap<String, String>,
}

impl<S> Trajectory<S> {
    pub fn new() -> Self {
        Self { times: Vec::new(), states: Vec::new(), stats: Stats::default(), meta: BTreeMap::new() }
    }

    pub fn push(&mut self, t: f64, s: S) {
        self.times.push(t);
        self.states.push(s);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn with_meta(mut self, key: &str, value: impl ToString) -> Self {
        self.meta.insert(key.to_string(), value.to_string());
        self
    }

    pub fn map<R>(&self, f: impl FnMut(&S) -> R) -> Trajectory<R> {
        Trajectory { times: self.times.clone(), states: self.states.iter().map(f).collect(), stats: self.stats, meta: self.meta.clone() }
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &S)> {
        self.times.iter().copied().zip(self.states.iter())
    }
}

/// `n + 1` equally spaced times on `[t0, t1]`.
pub fn linspace(t0: f64, t1: f64, n: usize) -> Vec<f64> {
    if n == 0 {
        return vec![t0];
    }
    (0..=n).map(|i| t0 + (t1 - t0) * i as f64 / n as f64).collect()
}
