//! Half-line Jacobi coefficient recovery from an m-function: power moments
//! by contour sampling, the moment-to-three-term-recurrence reduction, and
//! coefficient stripping with a resolvent rebuild for cross-checks.

use num_complex::Complex64;

use crate::error::{CoreError, Result};
use crate::sphere::HerglotzMap;
use crate::systems::laurent_coeffs;

/// Coefficient window (a_n, b_n), n = 1..K, of a half-line Jacobi matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobiWindow {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

/// Power moments m_k, k = 0..2K, of a spectral measure.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSequence {
    pub m: Vec<f64>,
}

pub const MAX_WINDOW: usize = 8;
const HANKEL_COND_LIMIT: f64 = 1e10;

/// Moments of the measure of F(z) = -1/z + O(1/z^2): -F = sum m_k z^{-k-1},
/// read off by discrete Fourier analysis on |z| = radius.
pub fn laurent_moments(f: &HerglotzMap, radius: f64, k: usize) -> Result<MomentSequence> {
    if k > MAX_WINDOW {
        return Err(CoreError::InvalidInput(format!(
            "window size {k} exceeds the double-precision cap {MAX_WINDOW}"
        )));
    }
    let n_hi = 3;
    let co = laurent_coeffs(f, radius, -(2 * k as i32) - 1, n_hi)?;
    let idx = |n: i32| (n + 2 * k as i32 + 1) as usize;
    // aliasing diagnostic: genuine expansions have no positive powers
    let scale = 1.0 + co[idx(-1)].norm();
    let high: f64 = (1..=n_hi).map(|n| co[idx(n)].norm() * radius.powi(n)).sum();
    if high > 1e-8 * scale || co[idx(0)].norm() > 1e-7 * scale {
        return Err(CoreError::Numerical(format!(
            "function is not O(1/z) outside |z| = {radius}"
        )));
    }
    let mut m = Vec::with_capacity(2 * k + 1);
    for j in 0..=2 * k {
        let c = -co[idx(-(j as i32) - 1)];
        if c.im.abs() > 1e-7 * (1.0 + c.norm()) {
            return Err(CoreError::Numerical(format!(
                "moment {j} = {c} is not real"
            )));
        }
        m.push(c.re);
    }
    if !(m[0] > 0.0) {
        return Err(CoreError::Numerical(format!(
            "total mass {} is not positive",
            m[0]
        )));
    }
    Ok(MomentSequence { m })
}

/// Condition number of the (k+1) x (k+1) Hankel matrix (m_{i+j}).
fn hankel_condition(m: &[f64], k: usize) -> f64 {
    let h = nalgebra::DMatrix::from_fn(k + 1, k + 1, |i, j| m[i + j]);
    let svd = h.svd(false, false);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smin <= 0.0 {
        f64::INFINITY
    } else {
        smax / smin
    }
}

/// The unique Jacobi window with the given moments, by the orthogonal
/// polynomial recursion in the monomial basis with reorthogonalization.
pub fn moments_to_jacobi(mom: &MomentSequence, k: usize) -> Result<JacobiWindow> {
    if k > MAX_WINDOW {
        return Err(CoreError::InvalidInput(format!(
            "window size {k} exceeds the double-precision cap {MAX_WINDOW}"
        )));
    }
    if mom.m.len() < 2 * k + 1 {
        return Err(CoreError::InvalidInput(format!(
            "need {} moments for a window of {k}, got {}",
            2 * k + 1,
            mom.m.len()
        )));
    }
    if !(mom.m[0] > 0.0) {
        return Err(CoreError::InvalidInput("total mass must be positive".into()));
    }
    if k == 0 {
        return Ok(JacobiWindow { a: vec![], b: vec![] });
    }
    // recovering b_1..b_K and a_1..a_{K-1} needs the K x K Hankel matrix;
    // the final a_K may legitimately degenerate to 0 (finitely supported
    // measure)
    let cond = hankel_condition(&mom.m, k - 1);
    if cond > HANKEL_COND_LIMIT {
        let safe = (1..k)
            .rev()
            .find(|&kk| hankel_condition(&mom.m, kk - 1) <= HANKEL_COND_LIMIT)
            .unwrap_or(0);
        return Err(CoreError::Numerical(format!(
            "moment Hankel matrix condition {cond:.3e} beyond {HANKEL_COND_LIMIT:.0e}; largest safe window is {safe}"
        )));
    }
    // inner product of monomial-coefficient vectors against the measure
    let dot = |p: &[f64], q: &[f64]| -> f64 {
        let mut acc = 0.0;
        for (i, &pi) in p.iter().enumerate() {
            if pi == 0.0 {
                continue;
            }
            for (j, &qj) in q.iter().enumerate() {
                acc += pi * qj * mom.m[i + j];
            }
        }
        acc
    };
    let dim = k + 1;
    // orthonormal polynomials as coefficient vectors
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(dim);
    let mut p0 = vec![0.0; dim];
    p0[0] = 1.0 / mom.m[0].sqrt();
    basis.push(p0);
    let mut a = Vec::with_capacity(k);
    let mut b = Vec::with_capacity(k);
    for n in 0..k {
        // q = z p_n
        let mut q = vec![0.0; dim];
        for i in 0..dim - 1 {
            q[i + 1] = basis[n][i];
        }
        let bn = dot(&q, &basis[n]);
        b.push(bn);
        // two rounds of Gram-Schmidt against the whole basis
        for _ in 0..2 {
            for p in &basis {
                let c = dot(&q, p);
                for (qi, pi) in q.iter_mut().zip(p) {
                    *qi -= c * pi;
                }
            }
        }
        let norm2 = dot(&q, &q);
        let tol = 1e-12 * mom.m.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        if norm2 <= tol {
            if norm2 < -tol || n + 1 < k {
                return Err(CoreError::Numerical(format!(
                    "degenerate measure: vanishing norm at step {}; largest safe window is {n}",
                    n + 1
                )));
            }
            // finitely supported measure: the window ends here
            a.push(0.0);
            break;
        }
        let an = norm2.sqrt();
        a.push(an);
        for qi in q.iter_mut() {
            *qi /= an;
        }
        basis.push(q);
    }
    Ok(JacobiWindow { a, b })
}

/// Window recovery straight from an m-function: moments then recursion.
pub fn strip_coefficients(f: &HerglotzMap, k: usize, radius: f64) -> Result<JacobiWindow> {
    let mom = laurent_moments(f, radius, k)?;
    moments_to_jacobi(&mom, k)
}

/// The once-stripped m-function m1(z) = (b1 - z - 1/F(z)) / a1^2.
pub fn once_stripped(f: &HerglotzMap, a1: f64, b1: f64) -> Result<HerglotzMap> {
    if !(a1 > 0.0) {
        return Err(CoreError::InvalidInput(format!(
            "off-diagonal entry must be positive, got {a1}"
        )));
    }
    let f = f.clone();
    Ok(HerglotzMap::from_fn(move |z| {
        let v = f.eval_reflected(z);
        (b1 - z - 1.0 / v) / (a1 * a1)
    }))
}

/// m-function of the free half-line Jacobi matrix (a_n = 1, b_n = 0):
/// the Herglotz branch of (-z + sqrt(z^2 - 4)) / 2.
pub fn free_m(z: Complex64) -> Complex64 {
    let mut s = (z * z - 4.0).sqrt();
    if (s * z.conj()).re < 0.0 {
        s = -s;
    }
    0.5 * (-z + s)
}

/// Resolvent of the window continued by the free tail: the continued
/// fraction m = 1/(b_n - z - a_n^2 m_next) folded from the tail.
pub fn rebuild_with_free_tail(win: &JacobiWindow, z: Complex64) -> Complex64 {
    let mut m = free_m(z);
    for (an, bn) in win.a.iter().zip(&win.b).rev() {
        m = 1.0 / (bn - z - an * an * m);
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::chordal_distance;

    fn free_map() -> HerglotzMap {
        HerglotzMap::from_fn(free_m)
    }

    #[test]
    fn free_moments_are_catalan() {
        let mom = laurent_moments(&free_map(), 6.0, 5).unwrap();
        let expect = [1.0, 0.0, 1.0, 0.0, 2.0, 0.0, 5.0, 0.0, 14.0, 0.0, 42.0];
        for (got, want) in mom.m.iter().zip(expect) {
            assert!((got - want).abs() < 1e-8, "moments {:?}", mom.m);
        }
    }

    #[test]
    fn point_mass_moments() {
        let f = HerglotzMap::from_fn(|z| 1.0 / (2.0 - z));
        let mom = laurent_moments(&f, 8.0, 3).unwrap();
        for (j, got) in mom.m.iter().enumerate() {
            assert!((got - 2.0f64.powi(j as i32)).abs() < 1e-8);
        }
        let f = HerglotzMap::from_fn(|z| -1.0 / z);
        let mom = laurent_moments(&f, 3.0, 3).unwrap();
        assert!((mom.m[0] - 1.0).abs() < 1e-12);
        for v in &mom.m[1..] {
            assert!(v.abs() < 1e-12);
        }
    }

    #[test]
    fn frozen_small_window() {
        let mom = MomentSequence { m: vec![1.0, 0.0, 1.0, 0.0, 2.0] };
        let win = moments_to_jacobi(&mom, 2).unwrap();
        assert!((win.a[0] - 1.0).abs() < 1e-12);
        assert!(win.b[0].abs() < 1e-12 && win.b[1].abs() < 1e-12);
    }

    #[test]
    fn free_window_is_free() {
        let win = strip_coefficients(&free_map(), 5, 6.0).unwrap();
        for (a, b) in win.a.iter().zip(&win.b) {
            assert!((a - 1.0).abs() < 1e-6 && b.abs() < 1e-6, "window {win:?}");
        }
    }

    #[test]
    fn stripping_self_similarity() {
        let m1 = once_stripped(&free_map(), 1.0, 0.0).unwrap();
        let mut worst: f64 = 0.0;
        for k in 0..20 {
            let th = std::f64::consts::PI * (k as f64 + 0.5) / 20.0;
            let z = Complex64::new(2.0 * th.cos(), 1.0 + th.sin());
            let d = chordal_distance(m1.eval(z).unwrap(), free_map().eval(z).unwrap());
            worst = worst.max(d);
        }
        assert!(worst < 1e-9, "deviation {worst}");
    }

    #[test]
    fn point_mass_degenerates() {
        let f = HerglotzMap::from_fn(|z| -1.0 / (z - 3.0));
        let win = strip_coefficients(&f, 1, 9.0).unwrap();
        assert!((win.b[0] - 3.0).abs() < 1e-8);
        assert!(strip_coefficients(&f, 2, 9.0).is_err());
    }

    #[test]
    fn rebuild_matches() {
        let win = strip_coefficients(&free_map(), 5, 6.0).unwrap();
        let mut worst: f64 = 0.0;
        for k in 0..20 {
            let th = std::f64::consts::PI * (k as f64 + 0.5) / 20.0;
            let z = Complex64::from_polar(12.0, th);
            let z = Complex64::new(z.re, z.im.max(0.5));
            let d = chordal_distance(
                crate::sphere::SpherePoint::from_complex(rebuild_with_free_tail(&win, z)),
                free_map().eval(z).unwrap(),
            );
            worst = worst.max(d);
        }
        assert!(worst < 1e-6, "deviation {worst}");
    }

    #[test]
    fn prefix_stability() {
        let w3 = strip_coefficients(&free_map(), 3, 6.0).unwrap();
        let w5 = strip_coefficients(&free_map(), 5, 6.0).unwrap();
        for i in 0..3 {
            assert!((w3.a[i] - w5.a[i]).abs() < 1e-8);
            assert!((w3.b[i] - w5.b[i]).abs() < 1e-8);
        }
    }

    #[test]
    fn window_cap_enforced() {
        assert!(laurent_moments(&free_map(), 6.0, 9).is_err());
        let mom = MomentSequence { m: vec![1.0; 19] };
        assert!(moments_to_jacobi(&mom, 9).is_err());
    }

    #[test]
    fn hankel_guard() {
        // one-point measure: rank-1 Hankel beyond K=1
        let mom = MomentSequence { m: vec![1.0, 2.0, 4.0, 8.0, 16.0] };
        let err = moments_to_jacobi(&mom, 2).unwrap_err();
        let msg = format!("{err}");
        assert!(msg.contains("safe window"), "message: {msg}");
        // K=1 still fine
        let win = moments_to_jacobi(&mom, 1).unwrap();
        assert!((win.b[0] - 2.0).abs() < 1e-10);
    }
}
