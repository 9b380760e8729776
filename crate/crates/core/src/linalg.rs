//! Small dense linear-algebra helpers shared by the modules.
//!
//! Complex products are split into four real products so that nalgebra can
//! dispatch them to its blocked `f64` kernel.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;
pub type RMat = DMatrix<f64>;

pub fn split(a: &CMat) -> (RMat, RMat) {
    (a.map(|z| z.re), a.map(|z| z.im))
}

pub fn join(re: &RMat, im: &RMat) -> CMat {
    CMat::from_fn(re.nrows(), re.ncols(), |i, j| Complex64::new(re[(i, j)], im[(i, j)]))
}

/// Complex matrix product `a * b`.
pub fn matmul(a: &CMat, b: &CMat) -> CMat {
    let (ar, ai) = split(a);
    let (br, bi) = split(b);
    matmul_split(&ar, &ai, &br, &bi)
}

pub fn matmul_split(ar: &RMat, ai: &RMat, br: &RMat, bi: &RMat) -> CMat {
    let re = ar * br - ai * bi;
    let im = ar * bi + ai * br;
    join(&re, &im)
}

/// `a * a^†` for a tall or wide complex matrix.
pub fn gram_outer(a: &CMat) -> CMat {
    let (ar, ai) = split(a);
    let re = &ar * ar.transpose() + &ai * ai.transpose();
    let im = &ai * ar.transpose() - &ar * ai.transpose();
    join(&re, &im)
}

/// `a^† * b`.
pub fn adjoint_mul(a: &CMat, b: &CMat) -> CMat {
    let (ar, ai) = split(a);
    let (br, bi) = split(b);
    let re = ar.tr_mul(&br) + ai.tr_mul(&bi);
    let im = ar.tr_mul(&bi) - ai.tr_mul(&br);
    join(&re, &im)
}

pub fn max_abs(a: &CMat) -> f64 {
    a.iter().fold(0.0, |m, z| m.max(z.norm()))
}

/// Largest entrywise deviation `max |a_ij - conj(a_ji)|`.
pub fn hermiticity_defect(a: &CMat) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Replace `a` by `(a + a^†)/2`.
pub fn hermitize(a: &mut CMat) {
    let n = a.nrows();
    for i in 0..n {
        a[(i, i)].im = 0.0;
        for j in (i + 1)..n {
            let m = (a[(i, j)] + a[(j, i)].conj()) * 0.5;
            a[(i, j)] = m;
            a[(j, i)] = m.conj();
        }
    }
}

/// Deviation of `a` from the identity in the max norm.
pub fn identity_defect(a: &CMat) -> f64 {
    let mut worst = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((a[(i, j)] - target).norm());
        }
    }
    worst
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn hermitian_eigenvalues(a: &CMat) -> Vec<f64> {
    let mut ev: Vec<f64> = a.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Pairwise (tree) summation in fixed index order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        n => {
            let (l, r) = xs.split_at(n / 2);
            pairwise_sum(l) + pairwise_sum(r)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(n: usize, m: usize, s: f64) -> CMat {
        CMat::from_fn(n, m, |i, j| {
            Complex64::new(((i * 7 + j * 3) as f64 * s).sin(), ((i + 2 * j) as f64 * s).cos())
        })
    }

    fn naive(a: &CMat, b: &CMat) -> CMat {
        let mut c = CMat::zeros(a.nrows(), b.ncols());
        for i in 0..a.nrows() {
            for j in 0..b.ncols() {
                for k in 0..a.ncols() {
                    c[(i, j)] += a[(i, k)] * b[(k, j)];
                }
            }
        }
        c
    }

    #[test]
    fn split_products_match_naive() {
        let a = sample(5, 4, 0.3);
        let b = sample(4, 6, 0.7);
        assert!(max_abs(&(matmul(&a, &b) - naive(&a, &b))) < 1e-12);
        assert!(max_abs(&(gram_outer(&a) - naive(&a, &a.adjoint()))) < 1e-12);
        let c = sample(5, 3, 1.1);
        assert!(max_abs(&(adjoint_mul(&a, &c) - naive(&a.adjoint(), &c))) < 1e-12);
    }

    #[test]
    fn hermitize_removes_defect() {
        let mut a = sample(6, 6, 0.4);
        assert!(hermiticity_defect(&a) > 0.1);
        hermitize(&mut a);
        assert_eq!(hermiticity_defect(&a), 0.0);
    }

    #[test]
    fn pairwise_sum_is_exact_on_integers() {
        let xs: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(pairwise_sum(&xs), 5050.0);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }
}
