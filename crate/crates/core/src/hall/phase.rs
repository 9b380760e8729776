use num_complex::Complex64;
use serde::Serialize;

use crate::{Error, Result};

/// Which of `γ_a`, `conj(γ_a)` implements the flux insertion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Orientation {
    /// Multiply by `γ_a`.
    Counterclockwise,
    /// Multiply by `conj(γ_a)`; the default for Hall computations.
    Clockwise,
}

/// Point of the dual lattice `(1/2, 1/2) + ℤ²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GaugeFluxCenter {
    a: [f64; 2],
    pub orientation: Orientation,
}

fn is_half_integer(t: f64) -> bool {
    t.is_finite() && (t - 0.5).fract() == 0.0
}

impl GaugeFluxCenter {
    pub fn new(a1: f64, a2: f64) -> Result<Self> {
        if !is_half_integer(a1) || !is_half_integer(a2) {
            return Err(Error::Parameter(format!("flux center ({a1}, {a2}) is not on the dual lattice")));
        }
        Ok(Self { a: [a1, a2], orientation: Orientation::Clockwise })
    }

    /// Dual-lattice point `(s1 + 1/2, s2 + 1/2)` next to the site `s`.
    pub fn next_to(s: [i64; 2]) -> Self {
        Self { a: [s[0] as f64 + 0.5, s[1] as f64 + 0.5], orientation: Orientation::Clockwise }
    }

    pub fn with_orientation(mut self, orientation: Orientation) -> Self {
        self.orientation = orientation;
        self
    }

    pub fn position(&self) -> [f64; 2] {
        self.a
    }

    /// Phase applied by the flux-insertion unitary at `x`.
    pub fn insertion_phase(&self, x: [i64; 2]) -> Complex64 {
        let g = gauge_phase(self, x);
        match self.orientation {
            Orientation::Counterclockwise => g,
            Orientation::Clockwise => g.conj(),
        }
    }
}

/// `γ_a(x) = (x1 - a1 + i(x2 - a2)) / |x - a|`.
pub fn gauge_phase(a: &GaugeFluxCenter, x: [i64; 2]) -> Complex64 {
    let z = Complex64::new(x[0] as f64 - a.a[0], x[1] as f64 - a.a[1]);
    z / z.norm()
}
