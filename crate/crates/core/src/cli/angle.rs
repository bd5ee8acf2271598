//! Angle arguments: plain numbers or symbolic multiples of π such as `2pi/3`.

use std::f64::consts::PI;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleArg {
    value: f64,
    symbolic: bool,
}

impl AngleArg {
    /// Radians. Bare numbers are read as degrees when `degrees` is set;
    /// symbolic π forms are always radians.
    pub fn radians(self, degrees: bool) -> f64 {
        if degrees && !self.symbolic {
            self.value.to_radians()
        } else {
            self.value
        }
    }
}

fn parse_number(s: &str, what: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("invalid {what} '{s}'"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{what} must be finite"))
    }
}

impl FromStr for AngleArg {
    type Err = String;

    fn from_str(raw: &str) -> Result<Self, Self::Err> {
        let s = raw.trim().replace('π', "pi");
        let Some(pos) = s.find("pi") else {
            return Ok(Self {
                value: parse_number(&s, "angle")?,
                symbolic: false,
            });
        };
        let coeff = s[..pos].trim_end_matches('*');
        let coeff = match coeff {
            "" | "+" => 1.0,
            "-" => -1.0,
            c => parse_number(c, "angle coefficient")?,
        };
        let rest = &s[pos + 2..];
        let denom = match rest.strip_prefix('/') {
            Some(d) => parse_number(d, "angle denominator")?,
            None if rest.is_empty() => 1.0,
            None => return Err(format!("invalid angle '{raw}'")),
        };
        if denom == 0.0 {
            return Err(format!("angle '{raw}' divides by zero"));
        }
        Ok(Self {
            value: coeff * PI / denom,
            symbolic: true,
        })
    }
}

/// Comma-separated list of angles.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleList(pub Vec<AngleArg>);

impl FromStr for AngleList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.split(',').map(AngleArg::from_str).collect::<Result<_, _>>().map(AngleList)
    }
}
