//! Discretized sums over paths.
//!
//! A photon path is a polyline; its phase is `2π · length / λ`, i.e. a
//! clock-pointer turning once per wavelength travelled. A [`PathFamily`]
//! collects paths between the same two endpoints, and [`sum_over_paths`]
//! adds their unit vectors head to tail, producing the Cornu-spiral trace
//! whose chord is the family's amplitude.
//!
//! The continuum of paths is replaced by a uniform quadrature over the
//! mirror: `n` reflection points at the centres of `n` equal cells. Raw sums
//! are reported; normalization is up to the caller.

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::Serialize;

use crate::amplitude::{ComplexAmplitude, Complex64};
use crate::error::{domain, ensure_finite, Error, Result};

const ENDPOINT_TOL: f64 = 1e-9;
const UNDEFINED_BELOW: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn translated(self, dx: f64, dy: f64) -> Self {
        Self::new(self.x + dx, self.y + dy)
    }

    /// Reflection through the vertical axis `x = 0`.
    pub fn mirrored_x(self) -> Self {
        Self::new(-self.x, self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Segment {
    pub start: Point,
    pub end: Point,
}

impl Segment {
    pub const fn new(start: Point, end: Point) -> Self {
        Self { start, end }
    }

    pub fn length(&self) -> f64 {
        self.start.distance(self.end)
    }

    /// Signed distance of `p` from the segment's supporting line.
    fn signed_offset(&self, p: Point) -> f64 {
        let (dx, dy) = (self.end.x - self.start.x, self.end.y - self.start.y);
        (dx * (p.y - self.start.y) - dy * (p.x - self.start.x)) / self.length()
    }

    /// Centre of cell `k` out of `n` equal cells.
    fn cell_centre(&self, k: usize, n: usize) -> Point {
        let t = (k as f64 + 0.5) / n as f64;
        Point::new(
            self.start.x + t * (self.end.x - self.start.x),
            self.start.y + t * (self.end.y - self.start.y),
        )
    }
}

/// A polyline travelled at constant speed by light of a fixed wavelength.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolyPath {
    vertices: Vec<Point>,
    wavelength: f64,
}

impl PolyPath {
    pub fn new(vertices: Vec<Point>, wavelength: f64) -> Result<Self> {
        ensure_finite("wavelength", wavelength)?;
        if wavelength <= 0.0 {
            return Err(domain(format!("wavelength must be positive, got {wavelength}")));
        }
        if vertices.len() < 2 {
            return Err(domain("a path needs at least two vertices"));
        }
        for v in &vertices {
            ensure_finite("vertex coordinate", v.x)?;
            ensure_finite("vertex coordinate", v.y)?;
        }
        let path = Self {
            vertices,
            wavelength,
        };
        if path.length() <= 0.0 {
            return Err(domain("path has zero length"));
        }
        Ok(path)
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn first(&self) -> Point {
        self.vertices[0]
    }

    pub fn last(&self) -> Point {
        self.vertices[self.vertices.len() - 1]
    }

    pub fn length(&self) -> f64 {
        self.vertices.windows(2).map(|w| w[0].distance(w[1])).sum()
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Self {
        Self {
            vertices: self.vertices.iter().map(|v| v.translated(dx, dy)).collect(),
            wavelength: self.wavelength,
        }
    }

    pub fn with_wavelength(&self, wavelength: f64) -> Result<Self> {
        Self::new(self.vertices.clone(), wavelength)
    }
}

/// Clock-pointer phase accumulated along the path, `2π L / λ` (not reduced
/// mod 2π).
pub fn path_phase(path: &PolyPath) -> f64 {
    TAU * path.length() / path.wavelength
}

/// Paths sharing a common start and end point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathFamily {
    label: String,
    paths: Vec<PolyPath>,
}

impl PathFamily {
    pub fn new(label: impl Into<String>, paths: Vec<PolyPath>) -> Result<Self> {
        if let Some(head) = paths.first() {
            let (a, b) = (head.first(), head.last());
            for (k, p) in paths.iter().enumerate() {
                if p.first().distance(a) > ENDPOINT_TOL || p.last().distance(b) > ENDPOINT_TOL {
                    return Err(Error::Validation(format!(
                        "path {k} does not share the family endpoints"
                    )));
                }
            }
        }
        Ok(Self {
            label: label.into(),
            paths,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn paths(&self) -> &[PolyPath] {
        &self.paths
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Self {
        Self {
            label: self.label.clone(),
            paths: self.paths.iter().map(|p| p.translated(dx, dy)).collect(),
        }
    }

    /// Phase of every path, in family order.
    pub fn phases(&self) -> Vec<f64> {
        self.paths.par_iter().map(path_phase).collect()
    }
}

/// Two-leg paths `source → mirror point → detector`, one per mirror cell.
pub fn mirror_family(
    source: Point,
    detector: Point,
    mirror: Segment,
    n: usize,
    wavelength: f64,
) -> Result<PathFamily> {
    if n == 0 {
        return Err(domain("mirror family needs at least one path"));
    }
    if mirror.length() <= 0.0 {
        return Err(domain("mirror segment has zero length"));
    }
    let (s, d) = (mirror.signed_offset(source), mirror.signed_offset(detector));
    let scale = mirror.length().max(source.distance(detector));
    if s.abs() <= 1e-12 * scale || d.abs() <= 1e-12 * scale {
        return Err(domain("source or detector lies on the mirror line"));
    }
    if s.signum() != d.signum() {
        return Err(domain("source and detector are on opposite sides of the mirror"));
    }
    let paths = (0..n)
        .map(|k| PolyPath::new(vec![source, mirror.cell_centre(k, n), detector], wavelength))
        .collect::<Result<Vec<_>>>()?;
    PathFamily::new(format!("mirror[{n}]"), paths)
}

/// Head-to-tail trace of the unit vectors of a family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpiralTrace {
    pub phases: Vec<f64>,
    pub partial_sums: Vec<ComplexAmplitude>,
    pub resultant: ComplexAmplitude,
}

impl SpiralTrace {
    /// Total length of the trace, one unit per path.
    pub fn arc_length(&self) -> f64 {
        let mut prev = Complex64::new(0.0, 0.0);
        self.partial_sums
            .iter()
            .map(|&z| {
                let step = (z - prev).norm();
                prev = z;
                step
            })
            .sum()
    }
}

pub fn sum_over_paths(family: &PathFamily) -> Result<SpiralTrace> {
    if family.is_empty() {
        return Err(domain("cannot sum over an empty family"));
    }
    let phases = family.phases();
    let mut acc = Complex64::new(0.0, 0.0);
    let partial_sums: Vec<_> = phases
        .iter()
        .map(|&phi| {
            acc += Complex64::from_polar(1.0, phi);
            acc
        })
        .collect();
    Ok(SpiralTrace {
        phases,
        partial_sums,
        resultant: acc,
    })
}

/// Index range of the window of `fraction · n` paths centred on the path of
/// least phase.
pub fn central_window(phases: &[f64], fraction: f64) -> Result<std::ops::Range<usize>> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(domain(format!("central fraction must be in (0, 1], got {fraction}")));
    }
    let n = phases.len();
    if n == 0 {
        return Err(domain("empty family"));
    }
    let centre = phases
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, _)| k)
        .unwrap_or(0);
    let width = ((fraction * n as f64).round() as usize).clamp(1, n);
    let start = centre.saturating_sub(width / 2).min(n - width);
    Ok(start..start + width)
}

/// `|sum over the central window| / |sum over all paths|`.
pub fn stationary_fraction(family: &PathFamily, central_fraction: f64) -> Result<f64> {
    let trace = sum_over_paths(family)?;
    let window = central_window(&trace.phases, central_fraction)?;
    let total = trace.resultant.norm();
    if total < UNDEFINED_BELOW {
        return Err(Error::Undefined(format!(
            "resultant magnitude {total:e} is below {UNDEFINED_BELOW:e}"
        )));
    }
    let central: Complex64 = trace.phases[window]
        .iter()
        .map(|&phi| Complex64::from_polar(1.0, phi))
        .fold(Complex64::new(0.0, 0.0), |a, b| a + b);
    Ok(central.norm() / total)
}

/// Reference mirror experiment: light from a source bounces off a flat
/// mirror into a detector at the same height.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MirrorSetup {
    pub source: Point,
    pub detector: Point,
    pub mirror: Segment,
    pub wavelength: f64,
}

impl Default for MirrorSetup {
    /// 1 mm light, endpoints 10 cm above a 50 cm mirror and 10 cm apart.
    /// With 10⁴ cells the neighbour phase step stays below 0.6 rad.
    fn default() -> Self {
        Self {
            source: Point::new(-0.05, 0.1),
            detector: Point::new(0.05, 0.1),
            mirror: Segment::new(Point::new(-0.25, 0.0), Point::new(0.25, 0.0)),
            wavelength: 1e-3,
        }
    }
}

impl MirrorSetup {
    pub fn family(&self, n: usize) -> Result<PathFamily> {
        mirror_family(self.source, self.detector, self.mirror, n, self.wavelength)
    }

    /// Point of specular reflection for a horizontal mirror.
    pub fn specular_x(&self) -> f64 {
        let (hs, hd) = (
            self.source.y - self.mirror.start.y,
            self.detector.y - self.mirror.start.y,
        );
        self.source.x + (self.detector.x - self.source.x) * hs / (hs + hd)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const LAMBDA: f64 = 1e-3;

    fn straight(len: f64) -> PolyPath {
        PolyPath::new(vec![Point::new(0.0, 0.0), Point::new(len, 0.0)], LAMBDA).unwrap()
    }

    #[test]
    fn phase_examples() {
        assert!((path_phase(&straight(LAMBDA)) - TAU).abs() < 1e-12);
        assert!((path_phase(&straight(LAMBDA / 2.0)) - PI).abs() < 1e-12);
        // two legs of 3λ/4 along a 3-4-5 triangle
        let leg = 0.75 * LAMBDA;
        let p = PolyPath::new(
            vec![
                Point::new(0.0, 0.0),
                Point::new(0.6 * leg, 0.8 * leg),
                Point::new(1.2 * leg, 0.0),
            ],
            LAMBDA,
        )
        .unwrap();
        assert!((path_phase(&p) - 3.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn invalid_paths_rejected() {
        let pts = vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0)];
        assert!(PolyPath::new(pts.clone(), 0.0).is_err());
        assert!(PolyPath::new(pts.clone(), -1.0).is_err());
        assert!(PolyPath::new(pts[..1].to_vec(), 1.0).is_err());
        assert!(PolyPath::new(vec![pts[0], pts[0]], 1.0).is_err());
    }

    #[test]
    fn family_requires_common_endpoints() {
        let a = straight(LAMBDA);
        let b = straight(2.0 * LAMBDA);
        assert!(matches!(
            PathFamily::new("bad", vec![a, b]),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn single_symmetric_path_hits_mirror_midpoint() {
        let setup = MirrorSetup::default();
        let f = setup.family(1).unwrap();
        assert_eq!(f.len(), 1);
        assert_eq!(f.paths()[0].vertices()[1], Point::new(0.0, 0.0));
    }

    #[test]
    fn three_paths_middle_shortest() {
        let f = MirrorSetup::default().family(3).unwrap();
        let l: Vec<f64> = f.paths().iter().map(PolyPath::length).collect();
        assert!(l[1] < l[0] && l[1] < l[2]);
        assert!((l[0] - l[2]).abs() < 1e-15);
    }

    #[test]
    fn degenerate_mirror_geometry_rejected() {
        let m = Segment::new(Point::new(-1.0, 0.0), Point::new(1.0, 0.0));
        let up = Point::new(0.0, 1.0);
        assert!(mirror_family(Point::new(0.2, 0.0), up, m, 5, LAMBDA).is_err());
        assert!(mirror_family(up, Point::new(0.3, -1.0), m, 5, LAMBDA).is_err());
        assert!(mirror_family(up, up, m, 0, LAMBDA).is_err());
    }

    #[test]
    fn least_phase_path_is_specular() {
        let setup = MirrorSetup {
            source: Point::new(-0.2, 0.1),
            detector: Point::new(0.15, 0.25),
            ..MirrorSetup::default()
        };
        let n = 1001;
        let f = setup.family(n).unwrap();
        let trace = sum_over_paths(&f).unwrap();
        let k = central_window(&trace.phases, 1.0 / n as f64).unwrap().start;
        let x = f.paths()[k].vertices()[1].x;
        let step = setup.mirror.length() / n as f64;
        assert!((x - setup.specular_x()).abs() <= step, "{x} vs {}", setup.specular_x());
    }

    #[test]
    fn sum_examples() {
        let one = PathFamily::new("one", vec![straight(0.3)]).unwrap();
        assert!((sum_over_paths(&one).unwrap().resultant.norm() - 1.0).abs() < 1e-15);

        let a = straight(LAMBDA);
        let twin = PathFamily::new("twin", vec![a.clone(), a.clone()]).unwrap();
        assert!((sum_over_paths(&twin).unwrap().resultant.norm() - 2.0).abs() < 1e-12);

        let fam = cancelling_pair();
        assert!(sum_over_paths(&fam).unwrap().resultant.norm() < 1e-12);
        assert!(sum_over_paths(&PathFamily::new("empty", vec![]).unwrap()).is_err());
    }

    /// Straight path of length λ and a bent one of 1.5λ: phases 2π and 3π.
    fn cancelling_pair() -> PathFamily {
        let h = (0.5625f64 - 0.25).sqrt() * LAMBDA;
        let bent = PolyPath::new(
            vec![
                Point::new(0.0, 0.0),
                Point::new(LAMBDA / 2.0, h),
                Point::new(LAMBDA, 0.0),
            ],
            LAMBDA,
        )
        .unwrap();
        PathFamily::new("cancel", vec![straight(LAMBDA), bent]).unwrap()
    }

    #[test]
    fn stationary_fraction_examples() {
        let f = MirrorSetup::default().family(2_000).unwrap();
        assert_eq!(stationary_fraction(&f, 1.0).unwrap(), 1.0);
        assert!(matches!(
            stationary_fraction(&cancelling_pair(), 0.5),
            Err(Error::Undefined(_))
        ));
        assert!(stationary_fraction(&f, 0.0).is_err());
        assert!(stationary_fraction(&f, 1.5).is_err());
    }

    #[test]
    fn central_third_dominates_at_fine_discretization() {
        let f = MirrorSetup::default().family(10_000).unwrap();
        let v = stationary_fraction(&f, 1.0 / 3.0).unwrap();
        assert!(v >= 0.9, "{v}");
    }

    #[test]
    fn trace_invariants() {
        let f = MirrorSetup::default().family(5_000).unwrap();
        let t = sum_over_paths(&f).unwrap();
        assert_eq!(t.resultant, *t.partial_sums.last().unwrap());
        assert!((t.arc_length() - 5_000.0).abs() < 1e-9);
        assert!(t.resultant.norm() <= 5_000.0);
    }

    #[test]
    fn rigid_translation_preserves_phases() {
        let f = MirrorSetup::default().family(500).unwrap();
        let base = sum_over_paths(&f).unwrap();
        for (dx, dy) in [(1.0, 0.0), (-3.5, 2.25), (0.0, -10.0)] {
            let moved = sum_over_paths(&f.translated(dx, dy)).unwrap();
            for (a, b) in base.phases.iter().zip(&moved.phases) {
                assert!((a - b).abs() < 1e-9);
            }
            assert!((base.resultant - moved.resultant).norm() < 1e-9);
        }
    }

    #[test]
    fn doubling_wavelength_halves_phase() {
        let f = MirrorSetup::default().family(50).unwrap();
        for p in f.paths() {
            let doubled = p.with_wavelength(2.0 * LAMBDA).unwrap();
            assert!((path_phase(&doubled) - path_phase(p) / 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn resultant_direction_is_refinement_stable() {
        let setup = MirrorSetup::default();
        let angle = |n| sum_over_paths(&setup.family(n).unwrap()).unwrap().resultant.arg();
        let d = crate::amplitude::circular_distance(angle(10_000), angle(20_000));
        assert!(d < 1e-3, "{d}");
    }
}
