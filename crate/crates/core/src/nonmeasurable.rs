//! Disjoint-ball packing behind the nonmeasurability of path space.
//!
//! `x_n` is zero up to `2^{-n}`, rises linearly to `r/2` at `2^{-n+1}` and
//! stays there. Any two of them are exactly `r/2` apart in the sup norm, so
//! the balls of radius `r/4` around them are pairwise disjoint while all
//! lying inside the ball of radius `r` around the zero path.
//!
//! The functions run from `0` to `r/2`, so they do not honour fixed
//! endpoints `x(0) = a`, `x(1) = b` for general `a`, `b`. The report carries
//! that caveat in its `note` field.

use serde::Serialize;

use crate::error::{domain, ensure_finite, Error, Result};

/// Piecewise-linear function on `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampledFunction {
    breakpoints: Vec<(f64, f64)>,
}

impl SampledFunction {
    pub fn new(breakpoints: Vec<(f64, f64)>) -> Result<Self> {
        let (first, last) = match (breakpoints.first(), breakpoints.last()) {
            (Some(f), Some(l)) => (f.0, l.0),
            _ => return Err(domain("a function needs breakpoints")),
        };
        if first != 0.0 || last != 1.0 || breakpoints.len() < 2 {
            return Err(domain("breakpoints must start at t = 0 and end at t = 1"));
        }
        if breakpoints.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(domain("breakpoint times must be strictly increasing"));
        }
        for &(t, v) in &breakpoints {
            ensure_finite("breakpoint", t)?;
            ensure_finite("breakpoint value", v)?;
        }
        Ok(Self { breakpoints })
    }

    pub fn zero() -> Self {
        Self {
            breakpoints: vec![(0.0, 0.0), (1.0, 0.0)],
        }
    }

    pub fn breakpoints(&self) -> &[(f64, f64)] {
        &self.breakpoints
    }

    /// Linear interpolation; exact at stored breakpoints.
    pub fn eval(&self, t: f64) -> f64 {
        let bp = &self.breakpoints;
        let k = bp.partition_point(|&(s, _)| s < t);
        if k < bp.len() && bp[k].0 == t {
            return bp[k].1;
        }
        if k == 0 {
            return bp[0].1;
        }
        if k == bp.len() {
            return bp[k - 1].1;
        }
        let ((t0, v0), (t1, v1)) = (bp[k - 1], bp[k]);
        v0 + (v1 - v0) * (t - t0) / (t1 - t0)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            breakpoints: self.breakpoints.iter().map(|&(t, v)| (t, c * v)).collect(),
        }
    }
}

/// Largest `n` for which `2^{-n}` spacing is still resolved next to 1.
pub const MAX_N: u32 = 52;

pub fn build_xn(n: u32, r_sharp: f64) -> Result<SampledFunction> {
    if !(1..=MAX_N).contains(&n) {
        return Err(domain(format!("n must be in 1..={MAX_N}, got {n}")));
    }
    ensure_finite("r#", r_sharp)?;
    if r_sharp <= 0.0 {
        return Err(domain(format!("r# must be positive, got {r_sharp}")));
    }
    let lo = 2f64.powi(-(n as i32));
    let hi = 2.0 * lo;
    let ramp = |t: f64| 2f64.powi(n as i32 - 1) * r_sharp * (t - lo);
    let mut bp = vec![(0.0, 0.0), (lo, 0.0), (hi, ramp(hi))];
    if hi < 1.0 {
        bp.push((1.0, r_sharp / 2.0));
    }
    SampledFunction::new(bp)
}

/// `max |f − g|`, evaluated on the union of both breakpoint sets, where a
/// piecewise-linear difference attains its extremes.
pub fn sup_distance(f: &SampledFunction, g: &SampledFunction) -> f64 {
    let mut ts: Vec<f64> = f
        .breakpoints
        .iter()
        .chain(&g.breakpoints)
        .map(|&(t, _)| t)
        .collect();
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    ts.into_iter()
        .map(|t| (f.eval(t) - g.eval(t)).abs())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairCheck {
    pub n: u32,
    pub m: u32,
    pub distance: f64,
    /// `distance − r#/2`.
    pub residual: f64,
    /// `distance ≥ 2 · r#/4`.
    pub disjoint: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContainmentCheck {
    pub n: u32,
    pub norm: f64,
    /// `norm − r#/2`.
    pub residual: f64,
    /// `norm + r#/4 ≤ r#`.
    pub contained: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PackingReport {
    pub note: String,
    pub n_max: u32,
    pub r_sharp: f64,
    pub ball_radius: f64,
    pub pairs: Vec<PairCheck>,
    pub containment: Vec<ContainmentCheck>,
    pub max_abs_residual: f64,
    pub all_pass: bool,
}

pub const ENDPOINT_NOTE: &str = "x_n(0) = 0 and x_n(1) = r#/2, so these paths satisfy fixed \
endpoints x(0) = a, x(1) = b only for a = 0, b = r#/2; the functions are used as given.";

pub fn verify_packing(n_max: u32, r_sharp: f64) -> Result<PackingReport> {
    if n_max < 1 {
        return Err(domain("n_max must be at least 1"));
    }
    let funcs = (1..=n_max)
        .map(|n| build_xn(n, r_sharp))
        .collect::<Result<Vec<_>>>()?;
    let half = r_sharp / 2.0;
    let radius = r_sharp / 4.0;
    let zero = SampledFunction::zero();
    let mut pairs = Vec::new();
    for (i, f) in funcs.iter().enumerate() {
        for (j, g) in funcs.iter().enumerate().skip(i + 1) {
            let distance = sup_distance(f, g);
            pairs.push(PairCheck {
                n: i as u32 + 1,
                m: j as u32 + 1,
                distance,
                residual: distance - half,
                disjoint: distance >= 2.0 * radius,
            });
        }
    }
    let containment: Vec<_> = funcs
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let norm = sup_distance(f, &zero);
            ContainmentCheck {
                n: i as u32 + 1,
                norm,
                residual: norm - half,
                contained: norm + radius <= r_sharp,
            }
        })
        .collect();
    let max_abs_residual = pairs
        .iter()
        .map(|p| p.residual.abs())
        .chain(containment.iter().map(|c| c.residual.abs()))
        .fold(0.0, f64::max);
    let all_pass = pairs.iter().all(|p| p.disjoint) && containment.iter().all(|c| c.contained);
    Ok(PackingReport {
        note: ENDPOINT_NOTE.to_string(),
        n_max,
        r_sharp,
        ball_radius: radius,
        pairs,
        containment,
        max_abs_residual,
        all_pass,
    })
}

impl PackingReport {
    pub fn ensure_pass(&self) -> Result<()> {
        if self.all_pass {
            Ok(())
        } else {
            Err(Error::Validation("disjoint-ball packing check failed".into()))
        }
    }
}
