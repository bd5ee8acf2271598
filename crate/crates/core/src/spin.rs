//! Stern–Gerlach cascades for spin ½.
//!
//! The simulator tracks the homotopy-class state of the particle: the axis
//! of the last standard device it crossed and the sign it produced there.
//! A standard device along the same axis reproduces that sign. A standard
//! device at angle Δ re-randomizes the class with `P(+) = cos²(Δ/2)` from a
//! `+` state (`sin²(Δ/2)` from `−`). A modified device recombines its beams,
//! records nothing and leaves the state alone.
//!
//! [`spinor_oracle`] computes the same distributions independently from
//! two-component state vectors and projectors `(1 ± n·σ)/2`.

use rand::Rng;
use serde::Serialize;

use crate::amplitude::Complex64;
use crate::error::{domain, ensure_finite, Result};
use crate::montecarlo::{self, TrialRng};

const NORM_TOL: f64 = 1e-12;
const SAME_AXIS_TOL: f64 = 1e-12;
/// Outcome tables are dense in `2^recorded`.
pub const MAX_RECORDED: usize = 20;

/// A unit vector in 3-space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Orientation {
    x: f64,
    y: f64,
    z: f64,
}

impl Orientation {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        for v in [x, y, z] {
            ensure_finite("orientation component", v)?;
        }
        let norm = (x * x + y * y + z * z).sqrt();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(domain(format!("orientation ({x}, {y}, {z}) has norm {norm}, not 1")));
        }
        Ok(Self { x, y, z })
    }

    /// Axis in the x–z plane at polar angle `theta` from ẑ towards x̂.
    pub fn planar(theta: f64) -> Self {
        Self {
            x: theta.sin(),
            y: 0.0,
            z: theta.cos(),
        }
    }

    pub fn z_axis() -> Self {
        Self { x: 0.0, y: 0.0, z: 1.0 }
    }

    pub fn x_axis() -> Self {
        Self { x: 1.0, y: 0.0, z: 0.0 }
    }

    pub fn y_axis() -> Self {
        Self { x: 0.0, y: 1.0, z: 0.0 }
    }

    pub fn components(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    /// Angle between the two axes, in `[0, π]`.
    pub fn angle_to(&self, other: &Orientation) -> f64 {
        let dot = self.x * other.x + self.y * other.y + self.z * other.z;
        let cx = self.y * other.z - self.z * other.y;
        let cy = self.z * other.x - self.x * other.z;
        let cz = self.x * other.y - self.y * other.x;
        (cx * cx + cy * cy + cz * cz).sqrt().atan2(dot)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Spin {
    Plus,
    Minus,
}

impl Spin {
    pub fn symbol(self) -> char {
        match self {
            Spin::Plus => '+',
            Spin::Minus => '-',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DeviceKind {
    Standard,
    Modified,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SgDevice {
    pub orientation: Orientation,
    pub kind: DeviceKind,
}

impl SgDevice {
    pub fn standard(orientation: Orientation) -> Self {
        Self {
            orientation,
            kind: DeviceKind::Standard,
        }
    }

    pub fn modified(orientation: Orientation) -> Self {
        Self {
            orientation,
            kind: DeviceKind::Modified,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SgState {
    pub last_orientation: Orientation,
    pub class_sign: Spin,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum InitialState {
    /// Random sign along the first device's axis.
    Unpolarized,
    Polarized(SgState),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StepOutcome {
    Measured(Spin),
    PassThrough,
}

/// `P(+)` at a standard device at angle `delta` from the current axis.
pub fn plus_probability(class_sign: Spin, delta: f64) -> f64 {
    let c = (delta / 2.0).cos();
    let s = (delta / 2.0).sin();
    match class_sign {
        Spin::Plus => c * c,
        Spin::Minus => s * s,
    }
}

pub fn sg_step<R: Rng + ?Sized>(state: SgState, device: &SgDevice, rng: &mut R) -> (StepOutcome, SgState) {
    match device.kind {
        DeviceKind::Modified => (StepOutcome::PassThrough, state),
        DeviceKind::Standard => {
            let delta = state.last_orientation.angle_to(&device.orientation);
            if delta <= SAME_AXIS_TOL {
                return (StepOutcome::Measured(state.class_sign), state);
            }
            let spin = if rng.gen::<f64>() < plus_probability(state.class_sign, delta) {
                Spin::Plus
            } else {
                Spin::Minus
            };
            let next = SgState {
                last_orientation: device.orientation,
                class_sign: spin,
            };
            (StepOutcome::Measured(spin), next)
        }
    }
}

fn draw_initial<R: Rng + ?Sized>(devices: &[SgDevice], initial: InitialState, rng: &mut R) -> SgState {
    match initial {
        InitialState::Polarized(state) => state,
        InitialState::Unpolarized => SgState {
            last_orientation: devices[0].orientation,
            class_sign: if rng.gen::<f64>() < 0.5 { Spin::Plus } else { Spin::Minus },
        },
    }
}

/// Counts of each recorded-outcome string over `n` trials.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutcomeTable {
    /// Number of standard devices, i.e. outcomes per trial.
    pub recorded: usize,
    pub n: u64,
    /// Indexed by outcome mask: bit `i` set means the i-th recorded outcome
    /// was `−`.
    pub counts: Vec<u64>,
}

impl OutcomeTable {
    pub fn probability(&self, mask: usize) -> f64 {
        self.counts[mask] as f64 / self.n as f64
    }
}

/// Label such as `"+-+"` for an outcome mask.
pub fn outcome_label(mask: usize, recorded: usize) -> String {
    (0..recorded)
        .map(|i| if mask >> i & 1 == 0 { '+' } else { '-' })
        .collect()
}

fn recorded_count(devices: &[SgDevice]) -> Result<usize> {
    if devices.is_empty() {
        return Err(domain("device sequence is empty"));
    }
    let k = devices.iter().filter(|d| d.kind == DeviceKind::Standard).count();
    if k > MAX_RECORDED {
        return Err(domain(format!("at most {MAX_RECORDED} standard devices are supported")));
    }
    Ok(k)
}

/// Runs trials one device at a time through [`sg_step`].
pub fn run_sequence_stepwise(devices: &[SgDevice], initial: InitialState, n: u64, seed: u64) -> Result<OutcomeTable> {
    let recorded = recorded_count(devices)?;
    if n == 0 {
        return Err(domain("trial count must be at least 1"));
    }
    let mut rng = montecarlo::substream(seed, 0);
    let mut counts = vec![0u64; 1 << recorded];
    for _ in 0..n {
        let mut state = draw_initial(devices, initial, &mut rng);
        let (mut mask, mut bit) = (0usize, 0usize);
        for device in devices {
            let (outcome, next) = sg_step(state, device, &mut rng);
            state = next;
            if let StepOutcome::Measured(spin) = outcome {
                mask |= usize::from(spin == Spin::Minus) << bit;
                bit += 1;
            }
        }
        counts[mask] += 1;
    }
    Ok(OutcomeTable { recorded, n, counts })
}

/// Per-standard-device transition, fixed by the sequence alone: the axis
/// before each standard device is that of the previous standard device.
#[derive(Debug, Clone, Copy)]
enum Transition {
    Repeat,
    Draw { if_plus: f64, if_minus: f64 },
}

fn plan(devices: &[SgDevice], start_axis: Orientation) -> Vec<Transition> {
    let mut axis = start_axis;
    devices
        .iter()
        .filter(|d| d.kind == DeviceKind::Standard)
        .map(|d| {
            let delta = axis.angle_to(&d.orientation);
            if delta <= SAME_AXIS_TOL {
                Transition::Repeat
            } else {
                axis = d.orientation;
                Transition::Draw {
                    if_plus: plus_probability(Spin::Plus, delta),
                    if_minus: plus_probability(Spin::Minus, delta),
                }
            }
        })
        .collect()
}

/// Empirical joint distribution of the recorded outcomes.
///
/// Produces exactly the same counts as [`run_sequence_stepwise`] for the
/// same seed; the transition probabilities are resolved once per sequence
/// instead of once per step.
pub fn run_sequence(devices: &[SgDevice], initial: InitialState, n: u64, seed: u64) -> Result<OutcomeTable> {
    let recorded = recorded_count(devices)?;
    if n == 0 {
        return Err(domain("trial count must be at least 1"));
    }
    let start_axis = match initial {
        InitialState::Polarized(s) => s.last_orientation,
        InitialState::Unpolarized => devices[0].orientation,
    };
    let steps = plan(devices, start_axis);
    let mut rng: TrialRng = montecarlo::substream(seed, 0);
    let mut counts = vec![0u64; 1 << recorded];
    for _ in 0..n {
        let mut minus = match initial {
            InitialState::Polarized(s) => s.class_sign == Spin::Minus,
            InitialState::Unpolarized => rng.gen::<f64>() >= 0.5,
        };
        let mut mask = 0usize;
        for (bit, step) in steps.iter().enumerate() {
            if let Transition::Draw { if_plus, if_minus } = *step {
                let p = if minus { if_minus } else { if_plus };
                minus = rng.gen::<f64>() >= p;
            }
            mask |= usize::from(minus) << bit;
        }
        counts[mask] += 1;
    }
    Ok(OutcomeTable { recorded, n, counts })
}

type Spinor = [Complex64; 2];
type Matrix = [[Complex64; 2]; 2];

fn projector(axis: &Orientation, spin: Spin) -> Matrix {
    let sign = match spin {
        Spin::Plus => 1.0,
        Spin::Minus => -1.0,
    };
    let [x, y, z] = axis.components();
    let h = |v: Complex64| 0.5 * v;
    [
        [h(Complex64::new(1.0 + sign * z, 0.0)), h(sign * Complex64::new(x, -y))],
        [h(sign * Complex64::new(x, y)), h(Complex64::new(1.0 - sign * z, 0.0))],
    ]
}

fn apply(m: &Matrix, v: &Spinor) -> Spinor {
    [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}

fn norm_sqr(v: &Spinor) -> f64 {
    v[0].norm_sqr() + v[1].norm_sqr()
}

fn eigenstate(axis: &Orientation, spin: Spin) -> Spinor {
    let p = projector(axis, spin);
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let a = apply(&p, &[one, zero]);
    let b = apply(&p, &[zero, one]);
    let v = if norm_sqr(&a) >= norm_sqr(&b) { a } else { b };
    let norm = norm_sqr(&v).sqrt();
    [v[0] / norm, v[1] / norm]
}

/// Exact distribution of the recorded outcomes as a dense vector indexed
/// like [`OutcomeTable::counts`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactDistribution {
    pub recorded: usize,
    pub probabilities: Vec<f64>,
}

/// Sequential projective measurement on spinors; modified devices act as the
/// identity. The unpolarized start is the maximally mixed state.
pub fn spinor_oracle(devices: &[SgDevice], initial: InitialState) -> Result<ExactDistribution> {
    let recorded = recorded_count(devices)?;
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    // (weight, spinor) ensemble
    let ensemble: Vec<(f64, Spinor)> = match initial {
        InitialState::Polarized(s) => vec![(1.0, eigenstate(&s.last_orientation, s.class_sign))],
        InitialState::Unpolarized => vec![(0.5, [one, zero]), (0.5, [zero, one])],
    };
    let axes: Vec<Orientation> = devices
        .iter()
        .filter(|d| d.kind == DeviceKind::Standard)
        .map(|d| d.orientation)
        .collect();
    let mut probabilities = vec![0.0; 1 << recorded];
    for (mask, p) in probabilities.iter_mut().enumerate() {
        *p = ensemble
            .iter()
            .map(|(w, psi)| {
                let out = axes.iter().enumerate().fold(*psi, |v, (bit, axis)| {
                    let spin = if mask >> bit & 1 == 0 { Spin::Plus } else { Spin::Minus };
                    apply(&projector(axis, spin), &v)
                });
                w * norm_sqr(&out)
            })
            .sum();
    }
    Ok(ExactDistribution {
        recorded,
        probabilities,
    })
}

/// One cell of an empirical-vs-exact comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellComparison {
    pub outcomes: String,
    pub empirical: f64,
    pub oracle: f64,
    /// Binomial standard error under the oracle probability.
    pub sigma: f64,
    pub within_3sigma: bool,
}

pub fn compare(table: &OutcomeTable, oracle: &ExactDistribution) -> Result<Vec<CellComparison>> {
    if table.recorded != oracle.recorded {
        return Err(domain("tables describe different numbers of outcomes"));
    }
    Ok(oracle
        .probabilities
        .iter()
        .enumerate()
        .map(|(mask, &p)| {
            let empirical = table.probability(mask);
            let sigma = (p * (1.0 - p) / table.n as f64).max(0.0).sqrt();
            CellComparison {
                outcomes: outcome_label(mask, table.recorded),
                empirical,
                oracle: p,
                sigma,
                within_3sigma: (empirical - p).abs() <= 3.0 * sigma,
            }
        })
        .collect())
}

fn parse_axis(token: &str) -> Result<Orientation> {
    let (neg, body) = match token.strip_prefix('-') {
        Some(rest) if rest.chars().all(char::is_alphabetic) => (true, rest),
        _ => (false, token),
    };
    let axis = match body {
        "z" => Orientation::z_axis(),
        "x" => Orientation::x_axis(),
        "y" => Orientation::y_axis(),
        _ => {
            let deg: f64 = body
                .trim_end_matches("deg")
                .parse()
                .map_err(|_| domain(format!("unrecognized device axis '{token}'")))?;
            ensure_finite("device angle", deg)?;
            Orientation::planar(deg.to_radians())
        }
    };
    Ok(if neg {
        let [x, y, z] = axis.components();
        Orientation { x: -x, y: -y, z: -z }
    } else {
        axis
    })
}

/// Parses a comma-separated device list such as `"z,x,z"` or `"z,Mx,45"`.
///
/// Axis tokens are `x`, `y`, `z` (optionally negated, `-z`) or a number of
/// degrees measured from ẑ towards x̂ in the x–z plane. A leading `M` makes
/// the device a modified (recombining) one.
pub fn parse_sequence(text: &str) -> Result<Vec<SgDevice>> {
    let devices = text
        .split(',')
        .map(str::trim)
        .map(|tok| {
            if tok.is_empty() {
                return Err(domain("empty device token"));
            }
            match tok.strip_prefix(['M', 'm']) {
                Some(rest) => Ok(SgDevice::modified(parse_axis(rest)?)),
                None => Ok(SgDevice::standard(parse_axis(tok)?)),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    recorded_count(&devices)?;
    Ok(devices)
}
