use serde::{Deserialize, Serialize};

use super::BlowupReason;

/// One row of the trajectory CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub mass: f64,
    pub lq_norm: f64,
    pub linf_norm: f64,
    pub dt: f64,
    pub min_u: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Blowup {
    pub time: f64,
    pub reason: BlowupReason,
}

/// Sampled monitors plus running maxima over every accepted step.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub blowup: Option<Blowup>,
    pub terminated_at: f64,
    pub max_mass: f64,
    pub max_lq: f64,
    pub max_linf: f64,
    pub min_u: f64,
    pub steps: usize,
}

impl Trajectory {
    /// Folds an accepted state into the running maxima.
    pub fn observe(&mut self, s: Sample) {
        if self.steps == 0 {
            self.min_u = s.min_u;
        }
        self.steps += 1;
        self.max_mass = self.max_mass.max(s.mass);
        self.max_lq = self.max_lq.max(s.lq_norm);
        self.max_linf = self.max_linf.max(s.linf_norm);
        self.min_u = self.min_u.min(s.min_u);
    }

    /// Appends a sample unless it repeats the last recorded time.
    pub fn record(&mut self, s: Sample) {
        if self.samples.last().is_some_and(|last| last.t >= s.t) {
            return;
        }
        self.samples.push(s);
    }

    pub fn completed(&self) -> bool {
        self.blowup.is_none()
    }
}
