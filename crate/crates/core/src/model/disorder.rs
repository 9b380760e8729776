use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum DisorderKind {
    /// Uniform density on `[-M1, M2]`.
    Uniform,
    /// `ρ(s) = ((η+1)/2)(1-|s|)^η` on `[-1, 1]`, mapped affinely onto `[-M1, M2]`.
    PolynomialEta { eta: f64 },
    /// Point mass at `c`.
    Constant { c: f64 },
}

/// Single-site distribution with support in `[-M1, M2]` and coupling `λ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisorderModel {
    pub m1: f64,
    pub m2: f64,
    pub lambda: f64,
    pub kind: DisorderKind,
}

impl DisorderModel {
    pub fn new(m1: f64, m2: f64, lambda: f64, kind: DisorderKind) -> Result<Self> {
        let model = Self { m1, m2, lambda, kind };
        model.validate()?;
        Ok(model)
    }

    /// Zero-coupling model, used for clean Hamiltonians.
    pub fn clean() -> Self {
        Self { m1: 1.0, m2: 1.0, lambda: 0.0, kind: DisorderKind::Constant { c: 0.0 } }
    }

    pub fn uniform(m1: f64, m2: f64, lambda: f64) -> Result<Self> {
        Self::new(m1, m2, lambda, DisorderKind::Uniform)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.m1, self.m2, self.lambda].iter().all(|v| v.is_finite());
        if !finite || self.m1 < 0.0 || self.m2 < 0.0 || self.m1 + self.m2 <= 0.0 {
            return Err(Error::Parameter(format!(
                "support bounds need M1, M2 >= 0 and M1 + M2 > 0 (got M1={}, M2={})",
                self.m1, self.m2
            )));
        }
        if self.lambda < 0.0 {
            return Err(Error::Parameter(format!("coupling must be nonnegative, got {}", self.lambda)));
        }
        match self.kind {
            DisorderKind::PolynomialEta { eta } if !(eta > 0.0 && eta.is_finite()) => {
                Err(Error::Parameter(format!("polynomial-eta exponent must be positive, got {eta}")))
            }
            DisorderKind::Constant { c } if !(c >= -self.m1 && c <= self.m2) => Err(Error::Parameter(
                format!("constant disorder {c} outside [-{}, {}]", self.m1, self.m2),
            )),
            _ => Ok(()),
        }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        let (lo, hi) = (-self.m1, self.m2);
        let v = match self.kind {
            DisorderKind::Uniform => lo + (hi - lo) * rng.gen::<f64>(),
            DisorderKind::PolynomialEta { eta } => {
                // |s| has CDF 1 - (1 - t)^(η+1); the sign is symmetric.
                let u: f64 = rng.gen();
                let t = 1.0 - (1.0 - u).powf(1.0 / (eta + 1.0));
                let s = if rng.gen::<bool>() { t } else { -t };
                lo + 0.5 * (s + 1.0) * (hi - lo)
            }
            DisorderKind::Constant { c } => c,
        };
        v.clamp(lo, hi)
    }
}

/// Per-site amplitudes `ω_i`, reproducible from `seed`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisorderRealization {
    pub seed: u64,
    pub omega: Vec<f64>,
}

impl DisorderRealization {
    pub fn zeros(n: usize) -> Self {
        Self { seed: 0, omega: vec![0.0; n] }
    }

    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }
}

/// Draws `n_sites` i.i.d. amplitudes from the model's density.
pub fn sample_disorder(model: &DisorderModel, n_sites: usize, seed: u64) -> Result<DisorderRealization> {
    model.validate()?;
    if n_sites == 0 {
        return Err(Error::Parameter("n_sites must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let omega = (0..n_sites).map(|_| model.draw(&mut rng)).collect();
    Ok(DisorderRealization { seed, omega })
}
