use crate::linalg::CMat;
use crate::{Error, Result};

/// Schatten norm `(Σ σ_i^p)^{1/p}`; `p = ∞` gives the operator norm.
pub fn schatten_norm(t: &CMat, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::Argument(format!("Schatten exponent must be >= 1, got {p}")));
    }
    let sv = t.clone().singular_values();
    if p.is_infinite() {
        return Ok(sv.iter().fold(0.0, |m, &s| m.max(s)));
    }
    let top = sv.iter().fold(0.0f64, |m, &s| m.max(s));
    if top == 0.0 {
        return Ok(0.0);
    }
    let sum: f64 = sv.iter().map(|s| (s / top).powf(p)).sum();
    Ok(top * sum.powf(1.0 / p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::matmul;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};

    #[test]
    fn diagonal_examples() {
        let t = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![Complex64::new(3.0, 0.0), Complex64::new(-4.0, 0.0)]));
        assert!((schatten_norm(&t, 1.0).unwrap() - 7.0).abs() < 1e-12);
        assert!((schatten_norm(&t, 2.0).unwrap() - 5.0).abs() < 1e-12);
        assert!((schatten_norm(&t, f64::INFINITY).unwrap() - 4.0).abs() < 1e-12);
        assert!(schatten_norm(&t, 0.5).is_err());
    }

    #[test]
    fn holder_inequality_on_random_pairs() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        for _ in 0..50 {
            let mut m = || CMat::from_fn(8, 8, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            let (s, t) = (m(), m());
            let lhs = schatten_norm(&matmul(&s, &t), 1.0).unwrap();
            let rhs = schatten_norm(&s, 2.0).unwrap() * schatten_norm(&t, 2.0).unwrap();
            assert!(lhs <= rhs * (1.0 + 1e-12));
        }
    }
}
