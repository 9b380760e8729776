use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::{Error, Result};

/// Magnetic flux per plaquette `p/q` in units of the flux quantum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FluxRational {
    p: i64,
    q: i64,
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

impl FluxRational {
    /// Builds `p/q` in lowest terms. Requires `q > 0` and `0 <= p/q < 1`.
    pub fn new(p: i64, q: i64) -> Result<Self> {
        if q <= 0 {
            return Err(Error::Parameter(format!("flux denominator must be positive, got {q}")));
        }
        if p < 0 || p >= q {
            return Err(Error::Parameter(format!("flux {p}/{q} outside [0, 1)")));
        }
        let g = gcd(p, q).max(1);
        Ok(Self { p: p / g, q: q / g })
    }

    pub fn zero() -> Self {
        Self { p: 0, q: 1 }
    }

    pub fn p(&self) -> i64 {
        self.p
    }

    pub fn q(&self) -> i64 {
        self.q
    }

    pub fn alpha(&self) -> f64 {
        self.p as f64 / self.q as f64
    }

    /// `exp(2πi α k)` evaluated from the residue of `p k` mod `q`, so equal
    /// residues give bit-identical phases.
    pub fn phase(&self, k: i64) -> num_complex::Complex64 {
        let r = (self.p * k).rem_euclid(self.q);
        num_complex::Complex64::from_polar(1.0, 2.0 * PI * r as f64 / self.q as f64)
    }
}
