use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Stopping rule of conjugate gradients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CgOptions {
    pub max_iter: usize,
    /// Relative residual `|r| / |b|` at which the iteration stops.
    pub tol: f64,
}

impl Default for CgOptions {
    fn default() -> Self {
        CgOptions {
            max_iter: 40,
            tol: 1e-10,
        }
    }
}

/// Result of an iterative solve.
#[derive(Debug, Clone, PartialEq)]
pub struct CgOutcome<S> {
    pub solution: Vec<S>,
    /// Relative residual norms, starting with the initial one.
    pub residuals: Vec<S>,
    pub iterations: usize,
    pub converged: bool,
}

pub(crate) fn dot<S: Real>(a: &[S], b: &[S]) -> S {
    a.iter().zip(b).map(|(x, y)| *x * *y).sum()
}

/// Conjugate gradients from a zero initial guess.
pub fn cg_solve<S, F>(mut apply: F, b: &[S], options: &CgOptions) -> Result<CgOutcome<S>>
where
    S: Real,
    F: FnMut(&[S]) -> Result<Vec<S>>,
{
    let n = b.len();
    let mut x = vec![S::zero(); n];
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let b_norm = rr.sqrt();
    if !b_norm.is_finite() {
        return Err(Error::Solver(
            "right-hand side contains non-finite values".into(),
        ));
    }
    let mut outcome = CgOutcome {
        solution: Vec::new(),
        residuals: vec![S::one()],
        iterations: 0,
        converged: b_norm == S::zero(),
    };
    if outcome.converged {
        outcome.residuals[0] = S::zero();
        outcome.solution = x;
        return Ok(outcome);
    }
    let tol = S::lit(options.tol);
    for it in 1..=options.max_iter {
        let ap = apply(&p)?;
        if ap.len() != n {
            return Err(Error::ShapeMismatch(format!(
                "operator returned {} values for a system of size {n}",
                ap.len()
            )));
        }
        let pap = dot(&p, &ap);
        if !pap.is_finite() {
            return Err(Error::Solver(format!(
                "non-finite curvature at iteration {it}"
            )));
        }
        if pap <= S::zero() {
            return Err(Error::Solver(format!(
                "operator is not positive definite: p^T A p = {pap} at iteration {it}"
            )));
        }
        let alpha = rr / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_new = dot(&r, &r);
        let rel = rr_new.sqrt() / b_norm;
        if !rel.is_finite() {
            return Err(Error::Solver(format!(
                "non-finite residual at iteration {it}"
            )));
        }
        outcome.residuals.push(rel);
        outcome.iterations = it;
        if rel <= tol {
            outcome.converged = true;
            break;
        }
        let beta = rr_new / rr;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        rr = rr_new;
    }
    outcome.solution = x;
    Ok(outcome)
}

fn not_definite(row: usize) -> Error {
    Error::Solver(format!("matrix is not positive definite (pivot {row})"))
}

/// Solves `A x = b` for a dense symmetric positive definite row-major `A`.
pub fn cholesky_solve<S: Real>(a: &[S], n: usize, b: &[S]) -> Result<Vec<S>> {
    if a.len() != n * n || b.len() != n {
        return Err(Error::ShapeMismatch(format!(
            "dense solve of size {n} got a matrix of {} and a vector of {} entries",
            a.len(),
            b.len()
        )));
    }
    let mut l = vec![S::zero(); n * n];
    for i in 0..n {
        for j in 0..=i {
            let s = a[i * n + j] - dot(&l[i * n..i * n + j], &l[j * n..j * n + j]);
            if i == j {
                if !(s > S::zero()) {
                    return Err(not_definite(i));
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    let mut y = b.to_vec();
    for i in 0..n {
        y[i] = (y[i] - dot(&l[i * n..i * n + i], &y[..i])) / l[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s -= l[k * n + i] * y[k];
        }
        y[i] = s / l[i * n + i];
    }
    Ok(y)
}

/// Cholesky factor of a symmetric positive definite band matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedCholesky<S> {
    n: usize,
    band: usize,
    factor: Vec<S>,
}

impl<S: Real> BandedCholesky<S> {
    /// Factors the matrix whose lower entries `a(i, j)`, `i - band <= j <= i`, are given.
    pub fn factor(n: usize, band: usize, a: impl Fn(usize, usize) -> S) -> Result<Self> {
        let w = band + 1;
        let mut f = vec![S::zero(); n * w];
        for i in 0..n {
            let lo = i.saturating_sub(band);
            for j in lo..=i {
                let mut s = a(i, j);
                let kl = lo.max(j.saturating_sub(band));
                for k in kl..j {
                    s -= f[i * w + k + band - i] * f[j * w + k + band - j];
                }
                if i == j {
                    if !(s > S::zero()) {
                        return Err(not_definite(i));
                    }
                    f[i * w + band] = s.sqrt();
                } else {
                    f[i * w + j + band - i] = s / f[j * w + band];
                }
            }
        }
        Ok(BandedCholesky { n, band, factor: f })
    }

    pub fn solve(&self, b: &[S]) -> Result<Vec<S>> {
        let (n, band, w) = (self.n, self.band, self.band + 1);
        if b.len() != n {
            return Err(Error::ShapeMismatch(format!(
                "band solve of size {n} got {} values",
                b.len()
            )));
        }
        let l = |i: usize, j: usize| self.factor[i * w + j + band - i];
        let mut y = b.to_vec();
        for i in 0..n {
            let lo = i.saturating_sub(band);
            let s = (lo..i).fold(y[i], |s, k| s - l(i, k) * y[k]);
            y[i] = s / l(i, i);
        }
        for i in (0..n).rev() {
            let hi = (i + band + 1).min(n);
            let s = (i + 1..hi).fold(y[i], |s, k| s - l(k, i) * y[k]);
            y[i] = s / l(i, i);
        }
        Ok(y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn matvec(a: &[f64], x: &[f64]) -> Vec<f64> {
        let n = x.len();
        (0..n).map(|i| dot(&a[i * n..(i + 1) * n], x)).collect()
    }

    fn random_spd(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m: Vec<f64> = (0..n * n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                a[i * n + j] = (0..n).map(|k| m[k * n + i] * m[k * n + j]).sum::<f64>();
            }
            a[i * n + i] += n as f64 * 0.1;
        }
        a
    }

    #[test]
    fn identity_converges_in_one_step() {
        let b = vec![1.0, -2.0, 3.0];
        let out = cg_solve(|p: &[f64]| Ok(p.to_vec()), &b, &CgOptions::default()).unwrap();
        assert_eq!(out.iterations, 1);
        assert!(out.converged);
        assert_eq!(out.solution, b);
    }

    #[test]
    fn diagonal_system_terminates() {
        let d = [1.0, 2.0, 3.0];
        let op = |p: &[f64]| Ok(p.iter().zip(&d).map(|(a, b)| a * b).collect());
        let out = cg_solve(op, &[1.0; 3], &CgOptions::default()).unwrap();
        assert!(out.iterations <= 3 && out.converged);
        for (x, e) in out.solution.iter().zip([1.0, 0.5, 1.0 / 3.0]) {
            assert!((x - e).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_rhs_and_failures() {
        let out = cg_solve(|p: &[f64]| Ok(p.to_vec()), &[0.0; 4], &CgOptions::default()).unwrap();
        assert_eq!(out.iterations, 0);
        assert_eq!(out.solution, vec![0.0; 4]);
        let nan = cg_solve(
            |p: &[f64]| Ok(vec![f64::NAN; p.len()]),
            &[1.0; 2],
            &CgOptions::default(),
        );
        assert!(matches!(nan, Err(Error::Solver(_))));
        let neg = cg_solve(
            |p: &[f64]| Ok(p.iter().map(|v| -v).collect()),
            &[1.0; 2],
            &CgOptions::default(),
        );
        assert!(neg.is_err());
        assert!(cholesky_solve(&[1.0, 2.0, 2.0, 1.0], 2, &[1.0, 1.0]).is_err());
    }

    #[test]
    fn cg_matches_dense_factorization() {
        let n = 50;
        let a = random_spd(n, 3);
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let direct = cholesky_solve(&a, n, &b).unwrap();
        let opts = CgOptions {
            max_iter: 500,
            tol: 1e-12,
        };
        let out = cg_solve(|p: &[f64]| Ok(matvec(&a, p)), &b, &opts).unwrap();
        assert!(out.converged);
        let scale = direct.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (x, y) in out.solution.iter().zip(&direct) {
            assert!((x - y).abs() < 1e-8 * scale);
        }
        let back = matvec(&a, &direct);
        for (x, y) in back.iter().zip(&b) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn error_energy_decreases() {
        let n = 30;
        let a = random_spd(n, 9);
        let b: Vec<f64> = (0..n).map(|i| (i as f64 * 0.4).cos()).collect();
        let exact = cholesky_solve(&a, n, &b).unwrap();
        let mut last = f64::INFINITY;
        for k in 1..12 {
            let opts = CgOptions {
                max_iter: k,
                tol: 0.0,
            };
            let x = cg_solve(|p: &[f64]| Ok(matvec(&a, p)), &b, &opts)
                .unwrap()
                .solution;
            let e: Vec<f64> = x.iter().zip(&exact).map(|(u, v)| u - v).collect();
            let energy = dot(&e, &matvec(&a, &e));
            assert!(energy <= last * (1.0 + 1e-12));
            last = energy;
        }
    }

    #[test]
    fn banded_matches_dense() {
        let n = 40;
        let band = 3;
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let d = i.abs_diff(j);
                if d <= band {
                    a[i * n + j] =
                        [4.0, -1.0, 0.5, 0.25][d] + if d == 0 { (i % 3) as f64 } else { 0.0 };
                }
            }
        }
        let b: Vec<f64> = (0..n).map(|i| 1.0 + i as f64 * 0.1).collect();
        let dense = cholesky_solve(&a, n, &b).unwrap();
        let banded = BandedCholesky::factor(n, band, |i, j| a[i * n + j])
            .unwrap()
            .solve(&b)
            .unwrap();
        for (x, y) in dense.iter().zip(&banded) {
            assert!((x - y).abs() < 1e-13);
        }
        let wide = BandedCholesky::factor(n, n - 1, |i, j| a[i * n + j])
            .unwrap()
            .solve(&b)
            .unwrap();
        for (x, y) in dense.iter().zip(&wide) {
            assert!((x - y).abs() < 1e-13);
        }
    }
}
