//! Classical twin clock-pointer experiment.
//!
//! Two objects leave a source with pointers aligned at a random angle γ.
//! Each side adds its measurement rotation (α on the left, β on the right)
//! and a bivalent fork sends the object up when the pointer is in `[0, π)`
//! and down otherwise. The same-branch probability is `1 − d/π`, `d` being
//! the circular distance between α and β.
//!
//! The canonical settings menu is `{0, 2π/3, 4π/3}`. Any two distinct menu
//! settings are `2π/3` apart on the circle, so every unequal pair (including
//! a raw difference of `4π/3`) gives 1/3.

use std::f64::consts::{PI, TAU};

use serde::Serialize;

use crate::amplitude::{circular_distance, in_upper_half, normalize_angle};
use crate::error::{ensure_finite, Result};
use crate::montecarlo::{self, Estimate};

/// The three measurement rotations of the canonical experiment.
pub const CANONICAL_SETTINGS: [f64; 3] = [0.0, TAU / 3.0, 2.0 * TAU / 3.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Branch {
    Upper,
    Lower,
}

/// Bivalent fork: `[0, π)` goes up, `[π, 2π)` down.
pub fn branch(theta: f64) -> Branch {
    if in_upper_half(theta) {
        Branch::Upper
    } else {
        Branch::Lower
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ToySettings {
    alpha: f64,
    beta: f64,
}

impl ToySettings {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        ensure_finite("alpha", alpha)?;
        ensure_finite("beta", beta)?;
        Ok(Self {
            alpha: normalize_angle(alpha),
            beta: normalize_angle(beta),
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ToyTrial {
    pub gamma: f64,
    pub left: Branch,
    pub right: Branch,
}

impl ToyTrial {
    pub fn same(&self) -> bool {
        self.left == self.right
    }
}

pub fn run_toy_trial(settings: ToySettings, gamma: f64) -> ToyTrial {
    ToyTrial {
        gamma,
        left: branch(gamma + settings.alpha),
        right: branch(gamma + settings.beta),
    }
}

/// Exact same-branch probability for uniform γ.
pub fn toy_p_same_exact(settings: ToySettings) -> f64 {
    1.0 - circular_distance(settings.alpha, settings.beta) / PI
}

/// Monte Carlo estimate of the same-branch probability, single worker.
pub fn toy_p_same_mc(settings: ToySettings, n: u64, seed: u64) -> Result<Estimate> {
    toy_p_same_mc_with_workers(settings, n, seed, 1)
}

pub fn toy_p_same_mc_with_workers(
    settings: ToySettings,
    n: u64,
    seed: u64,
    workers: usize,
) -> Result<Estimate> {
    montecarlo::estimate_fraction(n, seed, workers, |rng| {
        run_toy_trial(settings, montecarlo::uniform_angle(rng)).same()
    })
}
