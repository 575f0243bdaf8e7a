//! Riemann sphere points, the chordal metric, real Moebius transformations
//! modulo sign, and Herglotz functions as abstract evaluatable maps.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{CoreError, Result};

/// A point on the Riemann sphere.
#[derive(Debug, Clone, Copy)]
pub enum SpherePoint {
    Finite(Complex64),
    Infinity,
}

impl SpherePoint {
    pub fn from_complex(z: Complex64) -> SpherePoint {
        if z.re.is_finite() && z.im.is_finite() {
            SpherePoint::Finite(z)
        } else {
            SpherePoint::Infinity
        }
    }

    pub fn finite(self) -> Option<Complex64> {
        match self {
            SpherePoint::Finite(z) => Some(z),
            SpherePoint::Infinity => None,
        }
    }

    pub fn is_infinity(self) -> bool {
        matches!(self, SpherePoint::Infinity)
    }
}

impl From<Complex64> for SpherePoint {
    fn from(z: Complex64) -> Self {
        SpherePoint::from_complex(z)
    }
}

impl From<f64> for SpherePoint {
    fn from(x: f64) -> Self {
        if x.is_finite() {
            SpherePoint::Finite(Complex64::new(x, 0.0))
        } else {
            SpherePoint::Infinity
        }
    }
}

/// Chordal distance on the sphere:
/// delta(p, q) = 2|p - q| / sqrt((1 + |p|^2)(1 + |q|^2)),
/// delta(p, inf) = 2 / sqrt(1 + |p|^2), delta(inf, inf) = 0.
/// Diameter 2; both conventions (diameter 1 or 2) appear in the literature,
/// this crate consistently uses 2.
pub fn chordal_distance(p: SpherePoint, q: SpherePoint) -> f64 {
    match (p, q) {
        (SpherePoint::Infinity, SpherePoint::Infinity) => 0.0,
        (SpherePoint::Finite(a), SpherePoint::Infinity)
        | (SpherePoint::Infinity, SpherePoint::Finite(a)) => {
            2.0 / (1.0 + a.norm_sqr()).sqrt()
        }
        (SpherePoint::Finite(a), SpherePoint::Finite(b)) => {
            // For very large finite values fall back to the form that is
            // stable against overflow of |a|^2 |b|^2.
            let na = a.norm_sqr();
            let nb = b.norm_sqr();
            if na.is_finite() && nb.is_finite() && na < 1e150 && nb < 1e150 {
                2.0 * (a - b).norm() / ((1.0 + na) * (1.0 + nb)).sqrt()
            } else {
                // Treat the larger one through the inversion z -> 1/z, which
                // is a chordal isometry.
                let ia = if na > 1.0 { a.inv() } else { a };
                let ib = if nb > 1.0 { b.inv() } else { b };
                if na > 1.0 && nb > 1.0 {
                    2.0 * (ia - ib).norm()
                        / ((1.0 + ia.norm_sqr()) * (1.0 + ib.norm_sqr())).sqrt()
                } else {
                    // mixed magnitudes: the plain formula with clamping
                    let d = 2.0 * (a - b).norm() / ((1.0 + na).sqrt() * (1.0 + nb).sqrt());
                    d.min(2.0)
                }
            }
        }
    }
}

/// An element of PSL(2, R): a real 2x2 matrix with det = 1, taken modulo
/// an overall sign.  Entries are stored row major as [a, b, c, d] with the
/// canonical sign choice that the first entry of absolute value > 1e-12
/// is positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoebiusElement {
    m: [f64; 4],
}

impl MoebiusElement {
    /// Build from a matrix with positive determinant; the matrix is scaled
    /// to det = 1 and sign-canonicalized.
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<MoebiusElement> {
        let det = a * d - b * c;
        if !det.is_finite() || det <= 0.0 {
            return Err(CoreError::InvalidInput(format!(
                "moebius matrix must have positive determinant, got {det}"
            )));
        }
        let s = det.sqrt();
        let mut m = [a / s, b / s, c / s, d / s];
        canonicalize_sign(&mut m);
        Ok(MoebiusElement { m })
    }

    pub fn identity() -> MoebiusElement {
        MoebiusElement { m: [1.0, 0.0, 0.0, 1.0] }
    }

    /// Rotation R(alpha) = [[cos a, -sin a], [sin a, cos a]].
    pub fn rotation(alpha: f64) -> MoebiusElement {
        let (s, c) = alpha.sin_cos();
        let mut m = [c, -s, s, c];
        canonicalize_sign(&mut m);
        MoebiusElement { m }
    }

    /// w -> w + a.
    pub fn translation(a: f64) -> MoebiusElement {
        MoebiusElement::new(1.0, a, 0.0, 1.0).unwrap()
    }

    /// w -> l * w for l > 0.
    pub fn dilation(l: f64) -> Result<MoebiusElement> {
        if !(l > 0.0) || !l.is_finite() {
            return Err(CoreError::InvalidInput(format!(
                "dilation factor must be positive and finite, got {l}"
            )));
        }
        MoebiusElement::new(l.sqrt(), 0.0, 0.0, 1.0 / l.sqrt())
    }

    /// The inversion w -> -1/w.
    pub fn inversion() -> MoebiusElement {
        MoebiusElement { m: [0.0, -1.0, 1.0, 0.0] }
    }

    pub fn entries(&self) -> [f64; 4] {
        self.m
    }

    pub fn compose(&self, other: &MoebiusElement) -> MoebiusElement {
        let a = &self.m;
        let b = &other.m;
        let mut m = [
            a[0] * b[0] + a[1] * b[2],
            a[0] * b[1] + a[1] * b[3],
            a[2] * b[0] + a[3] * b[2],
            a[2] * b[1] + a[3] * b[3],
        ];
        // renormalize against drift
        let det = m[0] * m[3] - m[1] * m[2];
        let s = det.sqrt();
        for e in m.iter_mut() {
            *e /= s;
        }
        canonicalize_sign(&mut m);
        MoebiusElement { m }
    }

    pub fn invert(&self) -> MoebiusElement {
        let [a, b, c, d] = self.m;
        let mut m = [d, -b, -c, a];
        canonicalize_sign(&mut m);
        MoebiusElement { m }
    }

    /// Apply the fractional-linear action to a sphere point.
    pub fn apply(&self, p: SpherePoint) -> SpherePoint {
        let [a, b, c, d] = self.m;
        match p {
            SpherePoint::Infinity => {
                if c == 0.0 {
                    SpherePoint::Infinity
                } else {
                    SpherePoint::from_complex(Complex64::new(a / c, 0.0))
                }
            }
            SpherePoint::Finite(z) => {
                let den = c * z + Complex64::new(d, 0.0);
                if den.norm() == 0.0 {
                    SpherePoint::Infinity
                } else {
                    SpherePoint::from_complex((a * z + Complex64::new(b, 0.0)) / den)
                }
            }
        }
    }

    /// Apply to a finite complex number, mapping poles to an infinite value.
    pub fn apply_complex(&self, z: Complex64) -> Complex64 {
        let [a, b, c, d] = self.m;
        let den = c * z + Complex64::new(d, 0.0);
        if den.norm() == 0.0 {
            Complex64::new(f64::INFINITY, f64::INFINITY)
        } else {
            (a * z + Complex64::new(b, 0.0)) / den
        }
    }

    /// Entry-wise distance between the two sign representatives, minimized
    /// over the sign; mainly for tests.
    pub fn approx_eq(&self, other: &MoebiusElement, tol: f64) -> bool {
        let d1: f64 = self
            .m
            .iter()
            .zip(other.m.iter())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        let d2: f64 = self
            .m
            .iter()
            .zip(other.m.iter())
            .map(|(x, y)| (x + y).abs())
            .fold(0.0, f64::max);
        d1.min(d2) < tol
    }
}

fn canonicalize_sign(m: &mut [f64; 4]) {
    for &e in m.iter() {
        if e.abs() > 1e-12 {
            if e < 0.0 {
                for x in m.iter_mut() {
                    *x = -*x;
                }
            }
            return;
        }
    }
}

/// KAN-style coordinates on PSL(2, R): the pair (point, angle) where
/// point = A * i lies in the upper half plane and angle = exp(2 i alpha)
/// records the rotation part.  The doubled angle makes the chart single
/// valued on the sign quotient.  Writing point = a + i c^2 (c > 0), the
/// element is [[c, a/c], [0, 1/c]] . R(alpha).
#[derive(Debug, Clone, Copy)]
pub struct KanCoordinates {
    pub point: Complex64,
    pub angle: Complex64,
}

pub fn kan_decompose(a: &MoebiusElement) -> KanCoordinates {
    let [m11, m12, m21, m22] = a.entries();
    let h = m21.hypot(m22);
    let c = 1.0 / h;
    let eia = Complex64::new(m22 / h, m21 / h);
    let (sin_a, cos_a) = (eia.im, eia.re);
    let aa = c * (m11 * sin_a + m12 * cos_a);
    KanCoordinates {
        point: Complex64::new(aa, c * c),
        angle: eia * eia,
    }
}

pub fn kan_compose(k: &KanCoordinates) -> Result<MoebiusElement> {
    if !(k.point.im > 0.0) {
        return Err(CoreError::InvalidInput(
            "kan point must lie in the open upper half plane".into(),
        ));
    }
    if (k.angle.norm() - 1.0).abs() > 1e-9 {
        return Err(CoreError::InvalidInput(
            "kan angle must be unimodular".into(),
        ));
    }
    let c = k.point.im.sqrt();
    let a = k.point.re;
    let alpha = 0.5 * k.angle.arg();
    let upper = MoebiusElement::new(c, a / c, 0.0, 1.0 / c)?;
    Ok(upper.compose(&MoebiusElement::rotation(alpha)))
}

/// A Herglotz function as an evaluatable object: either a constant in
/// R union {inf} (a degenerate limit) or an analytic map of the upper
/// half plane into its closure.
#[derive(Clone)]
pub enum HerglotzMap {
    Constant(SpherePoint),
    Analytic(Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>),
}

impl HerglotzMap {
    pub fn constant_real(x: f64) -> HerglotzMap {
        HerglotzMap::Constant(SpherePoint::from(x))
    }

    pub fn constant_infinity() -> HerglotzMap {
        HerglotzMap::Constant(SpherePoint::Infinity)
    }

    pub fn from_fn<F>(f: F) -> HerglotzMap
    where
        F: Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    {
        HerglotzMap::Analytic(Arc::new(f))
    }

    pub fn as_constant(&self) -> Option<SpherePoint> {
        match self {
            HerglotzMap::Constant(p) => Some(*p),
            HerglotzMap::Analytic(_) => None,
        }
    }

    /// Evaluate at z with Im z > 0.
    pub fn eval(&self, z: Complex64) -> Result<SpherePoint> {
        if !(z.im > 0.0) {
            return Err(CoreError::Domain(format!(
                "herglotz map evaluated at z = {z} outside the upper half plane"
            )));
        }
        Ok(match self {
            HerglotzMap::Constant(p) => *p,
            HerglotzMap::Analytic(f) => SpherePoint::from_complex(f(z)),
        })
    }

    /// Evaluation that reflects through the real axis,
    /// F(z) := conj(F(conj z)) for Im z < 0.  Valid for maps that are real
    /// and analytic across the relevant part of the real line (used when
    /// sampling Laurent coefficients on circles around infinity).
    pub fn eval_reflected(&self, z: Complex64) -> Complex64 {
        match self {
            HerglotzMap::Constant(p) => match p {
                SpherePoint::Finite(v) => *v,
                SpherePoint::Infinity => Complex64::new(f64::INFINITY, f64::INFINITY),
            },
            HerglotzMap::Analytic(f) => {
                if z.im >= 0.0 {
                    f(z)
                } else {
                    f(z.conj()).conj()
                }
            }
        }
    }

    /// Post-compose with a Moebius transformation.
    pub fn transformed(&self, a: &MoebiusElement) -> HerglotzMap {
        match self {
            HerglotzMap::Constant(p) => HerglotzMap::Constant(a.apply(*p)),
            HerglotzMap::Analytic(f) => {
                let f = Arc::clone(f);
                let a = *a;
                HerglotzMap::from_fn(move |z| a.apply_complex(f(z)))
            }
        }
    }
}

/// The distance d(F, G) = max over the closed disk |z - 2i| <= 1 of the
/// chordal distance between F(z) and G(z), approximated on a deterministic
/// polar grid (center plus `grid_n` radii times `grid_n` angles).
pub fn herglotz_metric(f: &HerglotzMap, g: &HerglotzMap, grid_n: usize) -> Result<f64> {
    let center = Complex64::new(0.0, 2.0);
    let mut best: f64 = 0.0;
    let mut at = |z: Complex64| -> Result<()> {
        let d = chordal_distance(f.eval(z)?, g.eval(z)?);
        if d > best {
            best = d;
        }
        Ok(())
    };
    at(center)?;
    let n = grid_n.max(1);
    for j in 1..=n {
        let r = j as f64 / n as f64;
        for k in 0..n {
            let th = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            at(center + Complex64::from_polar(r, th))?;
        }
    }
    Ok(best)
}

/// Default grid resolution for `herglotz_metric`.
pub const METRIC_GRID_N: usize = 24;

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn chordal_examples() {
        // antipodal pair 0 and infinity
        assert!((chordal_distance(SpherePoint::from(0.0), SpherePoint::Infinity) - 2.0).abs() < 1e-15);
        // delta(1, i) = 2 sqrt(2) / 2 = sqrt(2)
        let d = chordal_distance(
            SpherePoint::Finite(c(1.0, 0.0)),
            SpherePoint::Finite(c(0.0, 1.0)),
        );
        assert!((d - 2.0_f64.sqrt()).abs() < 1e-14);
        // distance to infinity decreasing in |p|
        let d1 = chordal_distance(SpherePoint::Finite(c(1.0, 0.0)), SpherePoint::Infinity);
        let d2 = chordal_distance(SpherePoint::Finite(c(10.0, 0.0)), SpherePoint::Infinity);
        assert!(d2 < d1);
    }

    #[test]
    fn chordal_inversion_isometry() {
        // z -> -1/z is a rotation of the sphere, hence a chordal isometry
        let pts = [c(0.3, 0.8), c(-2.0, 0.1), c(5.0, 3.0)];
        let inv = MoebiusElement::inversion();
        for &p in &pts {
            for &q in &pts {
                let d0 = chordal_distance(p.into(), q.into());
                let d1 = chordal_distance(
                    inv.apply(p.into()),
                    inv.apply(q.into()),
                );
                assert!((d0 - d1).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn moebius_apply_examples() {
        // [[2, 3], [1, 2]] acting on i: (2i+3)/(i+2) = (8 + i)/5
        let a = MoebiusElement::new(2.0, 3.0, 1.0, 2.0).unwrap();
        let w = a.apply(SpherePoint::Finite(c(0.0, 1.0))).finite().unwrap();
        assert!((w - c(1.6, 0.2)).norm() < 1e-14);
        // pole: [[0,-1],[1,0]] at 0 -> infinity
        assert!(MoebiusElement::inversion()
            .apply(SpherePoint::from(0.0))
            .is_infinity());
        // infinity -> a/c
        let w = a.apply(SpherePoint::Infinity).finite().unwrap();
        assert!((w - c(2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn moebius_group_props() {
        let a = MoebiusElement::new(2.0, 3.0, 1.0, 2.0).unwrap();
        let b = MoebiusElement::new(1.0, -1.0, 0.5, 3.0).unwrap();
        let ab = a.compose(&b);
        // compose then apply == apply then apply
        let z = SpherePoint::Finite(c(0.4, 1.3));
        let w1 = ab.apply(z).finite().unwrap();
        let w2 = a.apply(b.apply(z)).finite().unwrap();
        assert!((w1 - w2).norm() < 1e-12);
        // inverse
        assert!(a.compose(&a.invert()).approx_eq(&MoebiusElement::identity(), 1e-12));
        // sign quotient: -A equals A
        let neg = MoebiusElement { m: [-1.0, 0.0, 0.0, -1.0] };
        let mut mm = neg.m;
        canonicalize_sign(&mut mm);
        assert_eq!(mm, [1.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn nonpositive_det_rejected() {
        assert!(MoebiusElement::new(1.0, 0.0, 0.0, -1.0).is_err());
        assert!(MoebiusElement::new(1.0, 2.0, 2.0, 4.0).is_err());
    }

    #[test]
    fn kan_frozen_example() {
        // [[2, 3/2], [0, 1/2]] -> point 3 + 4i, angle 1
        let a = MoebiusElement::new(2.0, 1.5, 0.0, 0.5).unwrap();
        let k = kan_decompose(&a);
        assert!((k.point - c(3.0, 4.0)).norm() < 1e-12);
        assert!((k.angle - c(1.0, 0.0)).norm() < 1e-12);
        let back = kan_compose(&k).unwrap();
        assert!(back.approx_eq(&a, 1e-12));
    }

    #[test]
    fn kan_identity_and_rotation() {
        let k = kan_decompose(&MoebiusElement::identity());
        assert!((k.point - c(0.0, 1.0)).norm() < 1e-14);
        assert!((k.angle - c(1.0, 0.0)).norm() < 1e-14);
        let alpha = 0.7;
        let k = kan_decompose(&MoebiusElement::rotation(alpha));
        assert!((k.point - c(0.0, 1.0)).norm() < 1e-12);
        assert!((k.angle - Complex64::from_polar(1.0, 2.0 * alpha)).norm() < 1e-12);
    }

    #[test]
    fn kan_round_trip_random() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let e: [f64; 4] = [
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-3.0..3.0),
            ];
            let det = e[0] * e[3] - e[1] * e[2];
            if det <= 1e-3 {
                continue;
            }
            let a = MoebiusElement::new(e[0], e[1], e[2], e[3]).unwrap();
            let k = kan_decompose(&a);
            assert!(k.point.im > 0.0);
            assert!((k.angle.norm() - 1.0).abs() < 1e-12);
            let back = kan_compose(&k).unwrap();
            assert!(back.approx_eq(&a, 1e-10));
        }
    }

    #[test]
    fn metric_constants() {
        // metric between constants equals their chordal distance
        let f = HerglotzMap::constant_real(0.0);
        let g = HerglotzMap::constant_infinity();
        let d = herglotz_metric(&f, &g, 8).unwrap();
        assert!((d - 2.0).abs() < 1e-14);
        let d = herglotz_metric(&f, &f, 8).unwrap();
        assert_eq!(d, 0.0);
    }

    #[test]
    fn metric_symmetry_and_triangle() {
        let f = HerglotzMap::from_fn(|z| z);
        let g = HerglotzMap::from_fn(|z| z + Complex64::new(1.0, 0.0));
        let h = HerglotzMap::constant_real(0.5);
        let dfg = herglotz_metric(&f, &g, 12).unwrap();
        let dgf = herglotz_metric(&g, &f, 12).unwrap();
        assert!((dfg - dgf).abs() < 1e-14);
        let dfh = herglotz_metric(&f, &h, 12).unwrap();
        let dhg = herglotz_metric(&h, &g, 12).unwrap();
        assert!(dfg <= dfh + dhg + 1e-12);
    }

    #[test]
    fn transformed_map() {
        let f = HerglotzMap::from_fn(|z| z);
        let a = MoebiusElement::inversion();
        let g = f.transformed(&a);
        let z = c(0.0, 2.0);
        let w = g.eval(z).unwrap().finite().unwrap();
        assert!((w - c(0.0, 0.5)).norm() < 1e-14);
    }
}
