//! Per-trial local model of the two-particle experiment.
//!
//! Each trial draws one shared initial pointer direction `γ` for the twin
//! streams. A side's composite phase is `base + setting + γ`, and its
//! beamsplitter transmits (`Up`) when that phase, measured from the device's
//! rotation `Γ`, lies in `[0, π)`. The two stations are separate values
//! with no access to each other's setting or device.
//!
//! Adding `γ` once per side is an interpretive choice: it keeps both
//! marginals at 50/50 and makes equal settings perfectly correlated. Under it
//! the same-outcome fraction follows the classical `1 − d/π` curve rather
//! than `cos²((α − β)/2)`.

use std::collections::HashMap;
use std::f64::consts::PI;

use rand::Rng;
use serde::Serialize;

use crate::amplitude::{circular_distance, in_upper_half, normalize_angle};
use crate::error::{domain, ensure_finite, Result};
use crate::montecarlo::{self, Estimate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Outcome {
    Up,
    Down,
}

/// A beamsplitter's fixed rotation of the unit circle.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct BeamsplitterRule {
    pub gamma_rot: f64,
}

impl BeamsplitterRule {
    pub fn new(gamma_rot: f64) -> Result<Self> {
        ensure_finite("beamsplitter rotation", gamma_rot)?;
        Ok(Self {
            gamma_rot: normalize_angle(gamma_rot),
        })
    }
}

/// Transmitted (`Up`) iff `phase − Γ` falls in `[0, π)`.
pub fn side_outcome(phase: f64, rule: BeamsplitterRule) -> Outcome {
    if in_upper_half(phase - rule.gamma_rot) {
        Outcome::Up
    } else {
        Outcome::Down
    }
}

/// Everything one side knows: its own setting, device and path phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Station {
    pub setting: f64,
    pub rule: BeamsplitterRule,
    pub base_phase: f64,
}

impl Station {
    pub fn new(setting: f64, rule: BeamsplitterRule, base_phase: f64) -> Result<Self> {
        ensure_finite("setting", setting)?;
        ensure_finite("base phase", base_phase)?;
        Ok(Self {
            setting,
            rule,
            base_phase,
        })
    }

    pub fn phase(&self, gamma_pair: f64) -> f64 {
        self.base_phase + self.setting + gamma_pair
    }

    pub fn outcome(&self, gamma_pair: f64) -> Outcome {
        side_outcome(self.phase(gamma_pair), self.rule)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairTrial {
    pub gamma_pair: f64,
    pub alpha: f64,
    pub beta: f64,
    pub left: Outcome,
    pub right: Outcome,
}

impl PairTrial {
    pub fn same(&self) -> bool {
        self.left == self.right
    }
}

/// Settings and devices for a run of pair trials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairSetup {
    pub left: Station,
    pub right: Station,
}

impl PairSetup {
    pub fn new(alpha: f64, beta: f64, rules: (BeamsplitterRule, BeamsplitterRule), base_phase: f64) -> Result<Self> {
        Ok(Self {
            left: Station::new(alpha, rules.0, base_phase)?,
            right: Station::new(beta, rules.1, base_phase)?,
        })
    }

    /// Identical devices with `Γ = 0` and no base phase.
    pub fn identical(alpha: f64, beta: f64) -> Result<Self> {
        Self::new(alpha, beta, Default::default(), 0.0)
    }

    pub fn trial_at(&self, gamma_pair: f64) -> PairTrial {
        PairTrial {
            gamma_pair,
            alpha: self.left.setting,
            beta: self.right.setting,
            left: self.left.outcome(gamma_pair),
            right: self.right.outcome(gamma_pair),
        }
    }

    /// Exact same-outcome probability over uniform `γ`, by locating the
    /// switch points of both sides and classifying each arc between them.
    pub fn p_same_exact(&self) -> f64 {
        // each side flips where its phase offset crosses 0 or π
        let switch = |s: &Station| {
            let offset = s.base_phase + s.setting - s.rule.gamma_rot;
            [normalize_angle(-offset), normalize_angle(PI - offset)]
        };
        let mut cuts: Vec<f64> = switch(&self.left)
            .into_iter()
            .chain(switch(&self.right))
            .chain([0.0])
            .collect();
        cuts.sort_by(f64::total_cmp);
        cuts.push(std::f64::consts::TAU);
        let same: f64 = cuts
            .windows(2)
            .filter(|w| w[1] > w[0])
            .filter(|w| self.trial_at(0.5 * (w[0] + w[1])).same())
            .map(|w| w[1] - w[0])
            .sum();
        same / std::f64::consts::TAU
    }
}

/// Draws `γ` and runs both sides.
pub fn run_pair_trial<R: Rng + ?Sized>(
    alpha: f64,
    beta: f64,
    rules: (BeamsplitterRule, BeamsplitterRule),
    base_phase: f64,
    rng: &mut R,
) -> Result<PairTrial> {
    let setup = PairSetup::new(alpha, beta, rules, base_phase)?;
    Ok(setup.trial_at(montecarlo::uniform_angle(rng)))
}

/// Same-outcome fraction with identical `Γ = 0` devices, single worker.
pub fn sampler_p_same(alpha: f64, beta: f64, n: u64, seed: u64) -> Result<Estimate> {
    sampler_p_same_with(&PairSetup::identical(alpha, beta)?, n, seed, 1)
}

pub fn sampler_p_same_with(setup: &PairSetup, n: u64, seed: u64, workers: usize) -> Result<Estimate> {
    montecarlo::estimate_fraction(n, seed, workers, |rng| {
        setup.trial_at(montecarlo::uniform_angle(rng)).same()
    })
}

/// Fraction of `Up` outcomes on the left and on the right.
pub fn sampler_marginals(setup: &PairSetup, n: u64, seed: u64) -> Result<(Estimate, Estimate)> {
    let left = montecarlo::estimate_fraction(n, seed, 1, |rng| {
        setup.left.outcome(montecarlo::uniform_angle(rng)) == Outcome::Up
    })?;
    let right = montecarlo::estimate_fraction(n, seed, 1, |rng| {
        setup.right.outcome(montecarlo::uniform_angle(rng)) == Outcome::Up
    })?;
    Ok((left, right))
}

/// Same-outcome estimates for every `(α, β)` in `alphas × betas`, all
/// computed from one shared stream of `γ` draws.
///
/// Entry `[i][j]` is bit-identical to
/// `sampler_p_same_with(&setup(alphas[i], betas[j]), n, seed, 1)`: every pair
/// sees the same `γ` sequence, so trials are grouped by their full outcome
/// pattern and each pattern is scored once.
pub fn sampler_grid(
    alphas: &[f64],
    betas: &[f64],
    rules: (BeamsplitterRule, BeamsplitterRule),
    base_phase: f64,
    n: u64,
    seed: u64,
) -> Result<Vec<Vec<Estimate>>> {
    if n == 0 {
        return Err(domain("trial count must be at least 1"));
    }
    let left: Vec<Station> = alphas
        .iter()
        .map(|&a| Station::new(a, rules.0, base_phase))
        .collect::<Result<_>>()?;
    let right: Vec<Station> = betas
        .iter()
        .map(|&b| Station::new(b, rules.1, base_phase))
        .collect::<Result<_>>()?;
    let mut rng = montecarlo::substream(seed, 0);
    let mut patterns: HashMap<(Vec<bool>, Vec<bool>), u64> = HashMap::new();
    for _ in 0..n {
        let gamma = montecarlo::uniform_angle(&mut rng);
        let l = left.iter().map(|s| s.outcome(gamma) == Outcome::Up).collect();
        let r = right.iter().map(|s| s.outcome(gamma) == Outcome::Up).collect();
        *patterns.entry((l, r)).or_default() += 1;
    }
    let mut hits = vec![vec![0u64; betas.len()]; alphas.len()];
    for ((l, r), count) in &patterns {
        for (i, li) in l.iter().enumerate() {
            for (j, rj) in r.iter().enumerate() {
                if li == rj {
                    hits[i][j] += count;
                }
            }
        }
    }
    Ok(hits
        .into_iter()
        .map(|row| row.into_iter().map(|h| Estimate::from_counts(h, n)).collect())
        .collect())
}

/// `1 − d/π` for the effective per-side offsets; matches
/// [`PairSetup::p_same_exact`] and, with identical devices, the classical
/// twin-pointer curve.
pub fn classical_curve(setup: &PairSetup) -> f64 {
    let eff = |s: &Station| s.base_phase + s.setting - s.rule.gamma_rot;
    1.0 - circular_distance(eff(&setup.left), eff(&setup.right)) / PI
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::montecarlo::substream;
    use crate::toy::{toy_p_same_exact, ToySettings};
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, TAU};

    fn rules(a: f64, b: f64) -> (BeamsplitterRule, BeamsplitterRule) {
        (BeamsplitterRule::new(a).unwrap(), BeamsplitterRule::new(b).unwrap())
    }

    #[test]
    fn side_outcome_examples() {
        let r0 = BeamsplitterRule::new(0.0).unwrap();
        let r90 = BeamsplitterRule::new(FRAC_PI_2).unwrap();
        assert_eq!(side_outcome(FRAC_PI_4, r0), Outcome::Up);
        assert_eq!(side_outcome(FRAC_PI_4, r90), Outcome::Down);
        for k in 0..50 {
            let theta = k as f64 * 0.37 - 5.0;
            let r = BeamsplitterRule::new(theta).unwrap();
            assert_eq!(side_outcome(theta, r), Outcome::Up);
        }
    }

    #[test]
    fn pair_trial_examples() {
        let setup = PairSetup::identical(TAU / 3.0, 0.0).unwrap();
        let t = setup.trial_at(0.0);
        assert_eq!((t.left, t.right), (Outcome::Up, Outcome::Up));
        let t = setup.trial_at(FRAC_PI_2);
        assert_eq!((t.left, t.right), (Outcome::Down, Outcome::Up));

        let mut rng = substream(5, 0);
        for _ in 0..1_000 {
            let t = run_pair_trial(1.3, 1.3, rules(0.4, 0.4), 0.9, &mut rng).unwrap();
            assert!(t.same());
        }
    }

    #[test]
    fn sampler_examples() {
        let e = sampler_p_same(2.0, 2.0, 100_000, 1).unwrap();
        assert_eq!(e.estimate, 1.0);
        assert!(sampler_p_same(0.0, 1.0, 0, 1).is_err());
        let e = sampler_p_same(FRAC_PI_2, 0.0, 200_000, 3).unwrap();
        assert!((e.estimate - 0.5).abs() <= e.ci);
    }

    #[test]
    fn exact_integration_matches_classical_curve() {
        for (a, b, ga, gb, base) in [
            (TAU / 3.0, 0.0, 0.0, 0.0, 0.0),
            (0.3, 2.0, 0.5, 0.5, 1.0),
            (1.0, 1.0, 0.0, 1.2, 0.0),
            (5.5, 0.1, 3.0, 0.2, -2.0),
        ] {
            let s = PairSetup::new(a, b, rules(ga, gb), base).unwrap();
            assert!((s.p_same_exact() - classical_curve(&s)).abs() < 1e-12);
        }
    }

    #[test]
    fn identical_devices_follow_toy_curve() {
        for (a, b) in [(TAU / 3.0, 0.0), (0.0, 2.0 * TAU / 3.0), (FRAC_PI_2, 0.0), (0.7, 4.4)] {
            let s = PairSetup::identical(a, b).unwrap();
            let toy = toy_p_same_exact(ToySettings::new(a, b).unwrap());
            assert!((s.p_same_exact() - toy).abs() < 1e-12);
        }
    }

    #[test]
    fn unequal_devices_break_equal_setting_correlation() {
        let s = PairSetup::new(1.0, 1.0, rules(0.0, FRAC_PI_2), 0.0).unwrap();
        assert!((s.p_same_exact() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn marginals_are_balanced() {
        let s = PairSetup::new(0.4, 2.2, rules(1.0, 5.0), 0.3).unwrap();
        let (l, r) = sampler_marginals(&s, 200_000, 9).unwrap();
        assert!((l.estimate - 0.5).abs() <= l.ci);
        assert!((r.estimate - 0.5).abs() <= r.ci);
    }

    #[test]
    fn grid_matches_per_pair_runs_bitwise() {
        let alphas = [0.0, 1.0, 2.5];
        let betas = [0.3, 4.0];
        let grid = sampler_grid(&alphas, &betas, Default::default(), 0.0, 20_000, 17).unwrap();
        for (i, &a) in alphas.iter().enumerate() {
            for (j, &b) in betas.iter().enumerate() {
                let single = sampler_p_same(a, b, 20_000, 17).unwrap();
                assert_eq!(grid[i][j], single);
            }
        }
    }

    proptest! {
        #[test]
        fn left_outcome_ignores_right_station(gamma in 0.0f64..TAU, alpha in -7.0f64..7.0,
                                              ga in -7.0f64..7.0, beta in -7.0f64..7.0, gb in -7.0f64..7.0) {
            let a = PairSetup::new(alpha, 0.0, rules(ga, 0.0), 0.0).unwrap();
            let b = PairSetup::new(alpha, beta, rules(ga, gb), 0.0).unwrap();
            prop_assert_eq!(a.trial_at(gamma).left, b.trial_at(gamma).left);
        }
    }
}
