//! Two-particle interferometer with floor and ceiling mirrors.
//!
//! The source sits at the origin. On each side one stream reaches the
//! beamsplitter via the ceiling mirror (classes `X` on the left, `X′` on the
//! right) and one via the floor mirror (`Y`, `Y′`). The phase shifter adds α
//! to class `X` and β to class `X′`; the beamsplitter contributes a factor
//! `i` per reflection.
//!
//! With left/right congruent arms the amplitude for both detectors to flash
//! the same is `i(ax·byp + bxp·ay) = i r² e^{2iθ}(e^{iα} + e^{iβ})`, and the
//! same-outcome probability normalized by `4|ax||ay||bxp||byp|` is
//! `cos²((α − β)/2)`.

use rayon::prelude::*;
use serde::Serialize;

use crate::amplitude::{unit, ComplexAmplitude, I};
use crate::error::{domain, ensure_finite, Error, Result};
use crate::paths::{mirror_family, sum_over_paths, Point, Segment};

/// Residual above which two arms are not treated as congruent.
pub const CONGRUENCE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum PathClass {
    X,
    Y,
    Xp,
    Yp,
}

impl PathClass {
    pub const ALL: [PathClass; 4] = [PathClass::X, PathClass::Y, PathClass::Xp, PathClass::Yp];

    pub fn is_left(self) -> bool {
        matches!(self, PathClass::X | PathClass::Y)
    }

    pub fn name(self) -> &'static str {
        match self {
            PathClass::X => "X",
            PathClass::Y => "Y",
            PathClass::Xp => "X'",
            PathClass::Yp => "Y'",
        }
    }
}

/// The two stream amplitudes reaching one beamsplitter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SideAmplitudes {
    pub upper: ComplexAmplitude,
    pub lower: ComplexAmplitude,
}

impl SideAmplitudes {
    /// Product of the two stream amplitudes of this side. Uses nothing from
    /// the other side.
    pub fn composite(&self) -> ComplexAmplitude {
        self.upper * self.lower
    }
}

/// `⟨A|X⟩`, `⟨A|Y⟩`, `⟨B|X′⟩`, `⟨B|Y′⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassAmplitudes {
    pub ax: ComplexAmplitude,
    pub ay: ComplexAmplitude,
    pub bxp: ComplexAmplitude,
    pub byp: ComplexAmplitude,
}

impl ClassAmplitudes {
    pub fn get(&self, class: PathClass) -> ComplexAmplitude {
        match class {
            PathClass::X => self.ax,
            PathClass::Y => self.ay,
            PathClass::Xp => self.bxp,
            PathClass::Yp => self.byp,
        }
    }

    pub fn left(&self) -> SideAmplitudes {
        SideAmplitudes {
            upper: self.ax,
            lower: self.ay,
        }
    }

    pub fn right(&self) -> SideAmplitudes {
        SideAmplitudes {
            upper: self.bxp,
            lower: self.byp,
        }
    }
}

/// Congruent-arm amplitudes: every class has modulus `r` and phase `θ`,
/// plus α on `X` and β on `X′`.
pub fn class_amplitudes_closed(r: f64, theta: f64, alpha: f64, beta: f64) -> Result<ClassAmplitudes> {
    ensure_finite("r", r)?;
    if r <= 0.0 {
        return Err(domain(format!("amplitude modulus must be positive, got {r}")));
    }
    let base = r * unit(theta)?;
    Ok(ClassAmplitudes {
        ax: base * unit(alpha)?,
        ay: base,
        bxp: base * unit(beta)?,
        byp: base,
    })
}

/// Amplitude for both detectors to flash the same.
pub fn amp_same(c: &ClassAmplitudes) -> ComplexAmplitude {
    I * c.ax * c.byp + c.bxp * I * c.ay
}

/// Same amplitude written as a sum of one composite per side; equal to
/// [`amp_same`] whenever `ay == byp`.
pub fn amp_same_side_local(left: &SideAmplitudes, right: &SideAmplitudes) -> ComplexAmplitude {
    I * (left.composite() + right.composite())
}

/// `|amp_same|² / (4 |ax||ay||bxp||byp|)`; reduces to `|amp_same|²/(4r⁴)`
/// when all moduli equal `r`.
pub fn p_same_from_amplitudes(c: &ClassAmplitudes) -> f64 {
    let scale = 4.0 * c.ax.norm() * c.ay.norm() * c.bxp.norm() * c.byp.norm();
    amp_same(c).norm_sqr() / scale
}

/// Closed-form same-outcome probability `cos²((α − β)/2)`.
pub fn p_same(alpha: f64, beta: f64) -> f64 {
    let c = ((alpha - beta) / 2.0).cos();
    c * c
}

/// Outcomes are binary, so the different-outcome probability is the
/// complement.
pub fn p_diff(alpha: f64, beta: f64) -> f64 {
    1.0 - p_same(alpha, beta)
}

/// Mirror and beamsplitter layout. Classes are ordered `X, Y, X′, Y′`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RtGeometry {
    pub source: Point,
    pub splitter_a: Point,
    pub splitter_b: Point,
    pub left_ceiling: Segment,
    pub left_floor: Segment,
    pub right_ceiling: Segment,
    pub right_floor: Segment,
    pub wavelength: f64,
}

impl RtGeometry {
    /// Mirror-symmetric layout: splitters at `(±arm, 0)`, ceiling at
    /// `+height`, floor at `−height`, each mirror spanning
    /// `inner ≤ |x| ≤ outer`. Right-hand mirrors run outward-in like the
    /// left ones, so cell `k` on the right is the mirror image of cell `k`
    /// on the left.
    pub fn symmetric(arm: f64, height: f64, inner: f64, outer: f64, wavelength: f64) -> Result<Self> {
        for (name, v) in [("arm", arm), ("height", height), ("inner", inner), ("outer", outer)] {
            ensure_finite(name, v)?;
            if v <= 0.0 {
                return Err(domain(format!("{name} must be positive, got {v}")));
            }
        }
        if inner >= outer {
            return Err(domain("mirror inner edge must lie inside its outer edge"));
        }
        let seg = |x0: f64, x1: f64, y: f64| Segment::new(Point::new(x0, y), Point::new(x1, y));
        Ok(Self {
            source: Point::new(0.0, 0.0),
            splitter_a: Point::new(-arm, 0.0),
            splitter_b: Point::new(arm, 0.0),
            left_ceiling: seg(-outer, -inner, height),
            left_floor: seg(-outer, -inner, -height),
            right_ceiling: seg(outer, inner, height),
            right_floor: seg(outer, inner, -height),
            wavelength,
        })
    }

    fn arm(&self, class: PathClass) -> (Point, Segment) {
        match class {
            PathClass::X => (self.splitter_a, self.left_ceiling),
            PathClass::Y => (self.splitter_a, self.left_floor),
            PathClass::Xp => (self.splitter_b, self.right_ceiling),
            PathClass::Yp => (self.splitter_b, self.right_floor),
        }
    }
}

impl Default for RtGeometry {
    /// 1 mm light, splitters 50 cm from the source, mirrors 20 cm above and
    /// below covering 5–45 cm. Each arm is about 640 wavelengths long.
    fn default() -> Self {
        Self::symmetric(0.5, 0.2, 0.05, 0.45, 1e-3).expect("default geometry is valid")
    }
}

/// Class amplitudes built from path sums over the mirror geometry.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NumericInterferometer {
    pub paths_per_class: usize,
    /// Unshifted class sums divided by the path count, ordered `X, Y, X′, Y′`.
    pub class_sums: [ComplexAmplitude; 4],
}

impl NumericInterferometer {
    /// Sums every class and checks left/right congruence.
    pub fn build(geometry: &RtGeometry, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(domain("need at least one path per class"));
        }
        let sums = PathClass::ALL
            .par_iter()
            .map(|&class| {
                let (splitter, mirror) = geometry.arm(class);
                let family = mirror_family(geometry.source, splitter, mirror, n, geometry.wavelength)?;
                Ok(sum_over_paths(&family)?.resultant / n as f64)
            })
            .collect::<Result<Vec<_>>>()?;
        let built = Self {
            paths_per_class: n,
            class_sums: [sums[0], sums[1], sums[2], sums[3]],
        };
        let mismatched: Vec<String> = [(PathClass::X, PathClass::Xp), (PathClass::Y, PathClass::Yp)]
            .into_iter()
            .filter_map(|(l, r)| {
                let res = (built.sum(l) - built.sum(r)).norm();
                (res >= CONGRUENCE_TOL).then(|| format!("{}/{} (residual {res:e})", l.name(), r.name()))
            })
            .collect();
        if !mismatched.is_empty() {
            return Err(Error::Validation(format!(
                "arms are not congruent: {}",
                mismatched.join(", ")
            )));
        }
        Ok(built)
    }

    pub fn sum(&self, class: PathClass) -> ComplexAmplitude {
        self.class_sums[PathClass::ALL.iter().position(|&c| c == class).unwrap()]
    }

    /// `|⟨A|Y⟩ − ⟨B|Y′⟩|`.
    pub fn lower_residual(&self) -> f64 {
        (self.sum(PathClass::Y) - self.sum(PathClass::Yp)).norm()
    }

    /// Largest left/right mismatch over both stream pairs.
    pub fn congruence_residual(&self) -> f64 {
        let upper = (self.sum(PathClass::X) - self.sum(PathClass::Xp)).norm();
        upper.max(self.lower_residual())
    }

    pub fn class_amplitudes(&self, alpha: f64, beta: f64) -> Result<ClassAmplitudes> {
        Ok(ClassAmplitudes {
            ax: self.sum(PathClass::X) * unit(alpha)?,
            ay: self.sum(PathClass::Y),
            bxp: self.sum(PathClass::Xp) * unit(beta)?,
            byp: self.sum(PathClass::Yp),
        })
    }

    pub fn p_same(&self, alpha: f64, beta: f64) -> Result<f64> {
        let c = self.class_amplitudes(alpha, beta)?;
        let scale = c.ax.norm() * c.ay.norm() * c.bxp.norm() * c.byp.norm();
        if scale < 1e-300 {
            return Err(Error::Undefined("a class amplitude vanished".into()));
        }
        Ok(p_same_from_amplitudes(&c))
    }
}

/// Builds the interferometer and evaluates one settings pair.
pub fn p_same_numeric(geometry: &RtGeometry, n: usize, alpha: f64, beta: f64) -> Result<f64> {
    NumericInterferometer::build(geometry, n)?.p_same(alpha, beta)
}
