//! Bell-test statistics over interchangeable correlation sources.
//!
//! A source reports, for each settings pair, the probability that both
//! sides give the same outcome. Outcomes are binary, so the correlator is
//! `E = 2·p_same − 1`.

use std::f64::consts::{PI, TAU};

use serde::Serialize;

use crate::amplitude::circular_distance;
use crate::error::{domain, ensure_finite, Error, Result};
use crate::interferometer;
use crate::montecarlo::Estimate;
use crate::sampler::{self, PairSetup};
use crate::toy::{self, ToySettings};

/// Same-outcome probability for one settings pair; `ci` is zero for exact
/// sources.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SourceValue {
    pub p_same: f64,
    pub ci: f64,
}

impl SourceValue {
    pub fn exact(p_same: f64) -> Self {
        Self { p_same, ci: 0.0 }
    }
}

impl From<Estimate> for SourceValue {
    fn from(e: Estimate) -> Self {
        Self {
            p_same: e.estimate,
            ci: e.ci,
        }
    }
}

pub trait CorrelationSource: Sync {
    fn name(&self) -> &str;
    fn p_same(&self, alpha: f64, beta: f64) -> Result<SourceValue>;
}

/// `cos²((α − β)/2)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct QuantumSource;

impl CorrelationSource for QuantumSource {
    fn name(&self) -> &str {
        "quantum"
    }

    fn p_same(&self, alpha: f64, beta: f64) -> Result<SourceValue> {
        Ok(SourceValue::exact(interferometer::p_same(alpha, beta)))
    }
}

/// Twin clock-pointer toy model, exact.
#[derive(Debug, Clone, Copy, Default)]
pub struct ToySource;

impl CorrelationSource for ToySource {
    fn name(&self) -> &str {
        "toy"
    }

    fn p_same(&self, alpha: f64, beta: f64) -> Result<SourceValue> {
        Ok(SourceValue::exact(toy::toy_p_same_exact(ToySettings::new(alpha, beta)?)))
    }
}

/// Local sampler integrated exactly over the hidden phase.
#[derive(Debug, Clone, Copy, Default)]
pub struct SamplerExactSource {
    pub rules: (sampler::BeamsplitterRule, sampler::BeamsplitterRule),
    pub base_phase: f64,
}

impl CorrelationSource for SamplerExactSource {
    fn name(&self) -> &str {
        "sampler-exact"
    }

    fn p_same(&self, alpha: f64, beta: f64) -> Result<SourceValue> {
        let setup = PairSetup::new(alpha, beta, self.rules, self.base_phase)?;
        Ok(SourceValue::exact(setup.p_same_exact()))
    }
}

/// Local sampler, Monte Carlo. Every settings pair reuses the same seed.
#[derive(Debug, Clone, Copy)]
pub struct SamplerMcSource {
    pub rules: (sampler::BeamsplitterRule, sampler::BeamsplitterRule),
    pub base_phase: f64,
    pub n: u64,
    pub seed: u64,
    pub workers: usize,
}

impl SamplerMcSource {
    pub fn new(n: u64, seed: u64) -> Self {
        Self {
            rules: Default::default(),
            base_phase: 0.0,
            n,
            seed,
            workers: 1,
        }
    }
}

impl CorrelationSource for SamplerMcSource {
    fn name(&self) -> &str {
        "sampler"
    }

    fn p_same(&self, alpha: f64, beta: f64) -> Result<SourceValue> {
        let setup = PairSetup::new(alpha, beta, self.rules, self.base_phase)?;
        Ok(sampler::sampler_p_same_with(&setup, self.n, self.seed, self.workers)?.into())
    }
}

/// Values looked up from a precomputed `(α, β)` table.
#[derive(Debug, Clone)]
pub struct TabulatedSource {
    pub name: String,
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    pub table: Vec<Vec<SourceValue>>,
}

impl TabulatedSource {
    fn index(axis: &[f64], x: f64) -> Option<usize> {
        axis.iter().position(|&v| (v - x).abs() <= 1e-12)
    }
}

impl CorrelationSource for TabulatedSource {
    fn name(&self) -> &str {
        &self.name
    }

    fn p_same(&self, alpha: f64, beta: f64) -> Result<SourceValue> {
        match (Self::index(&self.alphas, alpha), Self::index(&self.betas, beta)) {
            (Some(i), Some(j)) => Ok(self.table[i][j]),
            _ => Err(domain(format!("({alpha}, {beta}) is not in the table"))),
        }
    }
}

/// Any closure `(α, β) → p_same`, treated as exact.
pub struct FnSource<F> {
    pub name: String,
    pub f: F,
}

impl<F: Fn(f64, f64) -> f64 + Sync> CorrelationSource for FnSource<F> {
    fn name(&self) -> &str {
        &self.name
    }

    fn p_same(&self, alpha: f64, beta: f64) -> Result<SourceValue> {
        Ok(SourceValue::exact((self.f)(alpha, beta)))
    }
}

fn checked(src: &dyn CorrelationSource, alpha: f64, beta: f64) -> Result<SourceValue> {
    let v = src.p_same(alpha, beta)?;
    if !(0.0..=1.0).contains(&v.p_same) {
        return Err(Error::Validation(format!(
            "source '{}' returned p_same = {} at ({alpha}, {beta})",
            src.name(),
            v.p_same
        )));
    }
    Ok(v)
}

/// Settings `(a, a′, b, b′)`.
pub type ChshSettings = [f64; 4];

/// The settings that maximize the quantum value.
pub const STANDARD_CHSH: ChshSettings = [0.0, PI / 2.0, PI / 4.0, 3.0 * PI / 4.0];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChshReport {
    pub source: String,
    pub settings: ChshSettings,
    /// `E(a,b), E(a,b′), E(a′,b), E(a′,b′)`.
    pub correlators: [f64; 4],
    /// Index of the correlator carrying the minus sign.
    pub minus_term: usize,
    pub s: f64,
    /// 3σ half-width of `s`, zero for exact sources.
    pub ci: f64,
}

/// `|ΣE − 2E_k|` with the minus on correlator `k`.
pub fn chsh_with_minus(e: [f64; 4], k: usize) -> f64 {
    (e.iter().sum::<f64>() - 2.0 * e[k]).abs()
}

/// `S` from the four same-outcome values in correlator order, maximized
/// over which correlator carries the minus sign. Every placement has local
/// bound 2. Returns `(s, correlators, minus_term, ci)`.
pub fn chsh_from_values(values: [SourceValue; 4]) -> (f64, [f64; 4], usize, f64) {
    let e = values.map(|v| 2.0 * v.p_same - 1.0);
    // ties resolve to the last term, the textbook placement
    let (minus_term, s) = (0..4)
        .map(|k| (k, chsh_with_minus(e, k)))
        .fold((3, chsh_with_minus(e, 3)), |best, c| if c.1 > best.1 { c } else { best });
    let ci = values.iter().map(|v| (2.0 * v.ci).powi(2)).sum::<f64>().sqrt();
    (s, e, minus_term, ci)
}

pub fn chsh(src: &dyn CorrelationSource, settings: ChshSettings) -> Result<ChshReport> {
    for &x in &settings {
        ensure_finite("CHSH setting", x)?;
    }
    let [a, ap, b, bp] = settings;
    let values = [
        checked(src, a, b)?,
        checked(src, a, bp)?,
        checked(src, ap, b)?,
        checked(src, ap, bp)?,
    ];
    let (s, correlators, minus_term, ci) = chsh_from_values(values);
    Ok(ChshReport {
        source: src.name().to_string(),
        settings,
        correlators,
        minus_term,
        s,
        ci,
    })
}

/// Grid angles `k · step` in `[0, 2π)`.
pub fn grid_angles(step: f64) -> Result<Vec<f64>> {
    ensure_finite("grid step", step)?;
    if step <= 0.0 {
        return Err(domain(format!("grid step must be positive, got {step}")));
    }
    let count = (TAU / step - 1e-9).ceil() as usize;
    Ok((0..count).map(|k| k as f64 * step).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChshGridReport {
    pub source: String,
    pub step: f64,
    pub quadruples: u64,
    pub max_s: f64,
    pub argmax: ChshSettings,
    /// Quadruples with `S > bound + ci`.
    pub violations: u64,
    /// Largest `S − ci − bound` over the grid.
    pub worst_margin: f64,
}

/// Evaluates `S` at every settings quadruple on the grid and compares it
/// against `bound` (plus the quadruple's own ci).
pub fn chsh_grid_search(src: &dyn CorrelationSource, step: f64, bound: f64) -> Result<ChshGridReport> {
    let angles = grid_angles(step)?;
    let m = angles.len();
    let mut table = Vec::with_capacity(m * m);
    for &a in &angles {
        for &b in &angles {
            table.push(checked(src, a, b)?);
        }
    }
    let at = |i: usize, j: usize| table[i * m + j];
    let mut report = ChshGridReport {
        source: src.name().to_string(),
        step,
        quadruples: 0,
        max_s: f64::NEG_INFINITY,
        argmax: [0.0; 4],
        violations: 0,
        worst_margin: f64::NEG_INFINITY,
    };
    for a in 0..m {
        for ap in 0..m {
            for b in 0..m {
                for bp in 0..m {
                    let (s, _, _, ci) = chsh_from_values([at(a, b), at(a, bp), at(ap, b), at(ap, bp)]);
                    report.quadruples += 1;
                    if s > report.max_s {
                        report.max_s = s;
                        report.argmax = [angles[a], angles[ap], angles[b], angles[bp]];
                    }
                    let margin = s - ci - bound;
                    if margin > 0.0 {
                        report.violations += 1;
                    }
                    report.worst_margin = report.worst_margin.max(margin);
                }
            }
        }
    }
    Ok(report)
}

/// Three-setting same-fraction test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MerminReport {
    pub source: String,
    pub settings: [f64; 3],
    pub equal_mean: f64,
    pub unequal_mean: f64,
    pub unequal_ci: f64,
    /// Perfect equal-setting agreement with an unequal-setting mean below
    /// the local bound of 1/3.
    pub violates_local_bound: bool,
}

pub const MERMIN_EPS: f64 = 1e-9;

pub fn mermin3(src: &dyn CorrelationSource, settings: [f64; 3]) -> Result<MerminReport> {
    let (mut equal, mut unequal) = (Vec::new(), Vec::new());
    for (i, &a) in settings.iter().enumerate() {
        for (j, &b) in settings.iter().enumerate() {
            let v = checked(src, a, b)?;
            if i == j {
                equal.push(v);
            } else {
                unequal.push(v);
            }
        }
    }
    let mean = |vs: &[SourceValue]| vs.iter().map(|v| v.p_same).sum::<f64>() / vs.len() as f64;
    let equal_mean = mean(&equal);
    let unequal_mean = mean(&unequal);
    let unequal_ci = unequal.iter().map(|v| v.ci * v.ci).sum::<f64>().sqrt() / unequal.len() as f64;
    Ok(MerminReport {
        source: src.name().to_string(),
        settings,
        equal_mean,
        unequal_mean,
        unequal_ci,
        violates_local_bound: equal_mean >= 1.0 - MERMIN_EPS && unequal_mean < 1.0 / 3.0 - unequal_ci,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub beta: f64,
    pub p_same: f64,
    pub ci: f64,
    pub classical_ref: f64,
    pub quantum_ref: f64,
}

/// `p_same` over the `(α, β)` grid with both reference curves alongside.
pub fn settings_sweep(src: &dyn CorrelationSource, grid_step: f64) -> Result<Vec<SweepRow>> {
    let angles = grid_angles(grid_step)?;
    let mut rows = Vec::with_capacity(angles.len() * angles.len());
    for &alpha in &angles {
        for &beta in &angles {
            let v = checked(src, alpha, beta)?;
            rows.push(SweepRow {
                alpha,
                beta,
                p_same: v.p_same,
                ci: v.ci,
                classical_ref: 1.0 - circular_distance(alpha, beta) / PI,
                quantum_ref: interferometer::p_same(alpha, beta),
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::toy::CANONICAL_SETTINGS;

    #[test]
    fn chsh_examples() {
        let q = chsh(&QuantumSource, STANDARD_CHSH).unwrap();
        assert!((q.s - 2.0 * 2f64.sqrt()).abs() < 1e-9);
        assert_eq!(q.ci, 0.0);

        let t = chsh(&ToySource, STANDARD_CHSH).unwrap();
        assert!((t.s - 2.0).abs() < 1e-9);
        let mut e = t.correlators;
        e.sort_by(f64::total_cmp);
        assert!((e[0] + 0.5).abs() < 1e-12 && e[1..].iter().all(|x| (x - 0.5).abs() < 1e-12));

        let half = FnSource { name: "half".into(), f: |_, _| 0.5 };
        assert_eq!(chsh(&half, STANDARD_CHSH).unwrap().s, 0.0);
    }

    #[test]
    fn chsh_direct_cosine_oracle() {
        // E = cos(x − y) straight from the quantum correlator.
        let [a, ap, b, bp] = STANDARD_CHSH;
        let e = |x: f64, y: f64| (x - y).cos();
        let last = (e(a, b) + e(a, bp) + e(ap, b) - e(ap, bp)).abs();
        let second = (e(a, b) - e(a, bp) + e(ap, b) + e(ap, bp)).abs();
        assert!(last < 1e-12);
        let r = chsh(&QuantumSource, STANDARD_CHSH).unwrap();
        assert_eq!(r.minus_term, 1);
        assert!((r.s - second).abs() < 1e-12);
    }

    #[test]
    fn out_of_range_source_names_the_pair() {
        let bad = FnSource {
            name: "bad".into(),
            f: |a: f64, _b: f64| if a > 1.0 { 1.5 } else { 0.5 },
        };
        match chsh(&bad, STANDARD_CHSH) {
            Err(Error::Validation(msg)) => assert!(msg.contains("1.5707963267948966"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn mermin_examples() {
        let t = mermin3(&ToySource, CANONICAL_SETTINGS).unwrap();
        assert!((t.unequal_mean - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(t.equal_mean, 1.0);
        assert!(!t.violates_local_bound);

        let q = mermin3(&QuantumSource, CANONICAL_SETTINGS).unwrap();
        assert!((q.unequal_mean - 0.25).abs() < 1e-12);
        assert!(q.violates_local_bound);

        let s = mermin3(&SamplerExactSource::default(), CANONICAL_SETTINGS).unwrap();
        assert!((s.unequal_mean - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(s.equal_mean, 1.0);
    }

    #[test]
    fn sweep_examples() {
        let step = PI / 12.0;
        let q = settings_sweep(&QuantumSource, step).unwrap();
        assert_eq!(q.len(), 24 * 24);
        let row = q.iter().find(|r| r.alpha == 0.0 && (r.beta - PI / 3.0).abs() < 1e-12).unwrap();
        assert!((row.p_same - 0.75).abs() < 1e-12);

        let t = settings_sweep(&ToySource, step).unwrap();
        let row = t.iter().find(|r| r.alpha == 0.0 && (r.beta - PI / 3.0).abs() < 1e-12).unwrap();
        assert!((row.p_same - 2.0 / 3.0).abs() < 1e-12);
        assert!(t.iter().filter(|r| r.alpha == r.beta).all(|r| r.p_same == 1.0));
        assert!(settings_sweep(&ToySource, 0.0).is_err());
    }

    #[test]
    fn grid_angles_cover_circle_once() {
        let g = grid_angles(PI / 24.0).unwrap();
        assert_eq!(g.len(), 48);
        assert!(*g.last().unwrap() < TAU);
    }

    #[test]
    fn coarse_grid_search_bounds() {
        let toy = chsh_grid_search(&ToySource, PI / 8.0, 2.0 + 1e-9).unwrap();
        assert_eq!(toy.violations, 0);
        assert!((toy.max_s - 2.0).abs() < 1e-9);
        let q = chsh_grid_search(&QuantumSource, PI / 8.0, 2.0).unwrap();
        assert!((q.max_s - 2.0 * 2f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn tabulated_source_rejects_off_grid() {
        let t = TabulatedSource {
            name: "t".into(),
            alphas: vec![0.0],
            betas: vec![1.0],
            table: vec![vec![SourceValue::exact(0.3)]],
        };
        assert_eq!(t.p_same(0.0, 1.0).unwrap().p_same, 0.3);
        assert!(t.p_same(0.5, 1.0).is_err());
    }
}
