//! Reflectionless canonical systems over a finite gap set, their Weyl
//! functions m+/-, asymptotic data at infinity, and recovery of the full
//! parameter tuple from a single Herglotz function.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{CoreError, Result};
use crate::ext::ExtReal;
use crate::gapset::{
    ac_mass, divisor_needs_g, h0_eval, log_h0, representation_data, Divisor, FiniteGapSet,
    GapPoint, RepresentationData, Zpt,
};
use crate::sphere::{chordal_distance, herglotz_metric, HerglotzMap, SpherePoint, METRIC_GRID_N};

/// Affine normalization (A+, D): m+ = A+ + D * (canonical part), D > 0.
#[derive(Debug, Clone, Copy)]
pub struct Normalization {
    pub a_plus: f64,
    pub d: f64,
}

impl Normalization {
    pub fn new(a_plus: f64, d: f64) -> Result<Normalization> {
        if !a_plus.is_finite() || !d.is_finite() || !(d > 0.0) {
            return Err(CoreError::InvalidInput(format!(
                "normalization requires finite A+ and D > 0, got ({a_plus}, {d})"
            )));
        }
        Ok(Normalization { a_plus, d })
    }
}

/// Which half-line Weyl function to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Plus,
    Minus,
}

/// A reflectionless system over a finite gap set, given by divisor and
/// normalization, with the representation data of h0 computed eagerly.
#[derive(Debug, Clone)]
pub struct ReflectionlessSystem {
    set: FiniteGapSet,
    divisor: Divisor,
    norm: Normalization,
    rep: RepresentationData,
}

/// Build and validate a system.
pub fn build_system(
    set: FiniteGapSet,
    divisor: Divisor,
    norm: Normalization,
) -> Result<ReflectionlessSystem> {
    // Divisor::new has already validated membership and the g rules; the
    // constructor here revalidates against this particular set so that a
    // divisor cannot be smuggled across sets.
    let divisor = Divisor::new(&set, divisor.points, divisor.g)?;
    let rep = representation_data(&set, &divisor)?;
    Ok(ReflectionlessSystem { set, divisor, norm, rep })
}

impl ReflectionlessSystem {
    pub fn set(&self) -> &FiniteGapSet {
        &self.set
    }

    pub fn divisor(&self) -> &Divisor {
        &self.divisor
    }

    pub fn normalization(&self) -> Normalization {
        self.norm
    }

    pub fn representation(&self) -> &RepresentationData {
        &self.rep
    }

    /// Evaluate m+ or m- at a point of the open upper half plane.
    pub fn eval_m(&self, side: Side, z: Complex64) -> Result<Complex64> {
        if !(z.im > 0.0) {
            return Err(CoreError::Domain(format!(
                "m function evaluated at z = {z} outside the open upper half plane"
            )));
        }
        let h0 = h0_eval(&self.set, &self.divisor, z)?;
        let plus = self.m_plus_from_h0(z, h0);
        Ok(match side {
            Side::Plus => plus,
            Side::Minus => self.norm.d * h0 - plus,
        })
    }

    fn m_plus_from_h0(&self, z: Complex64, h0: Complex64) -> Complex64 {
        let mut acc = 0.5 * (h0 - Complex64::new(self.rep.a, 0.0));
        if let Some(g) = self.divisor.g {
            acc += g * z;
        }
        for (pt, &w) in self.divisor.points.iter().zip(&self.rep.weights) {
            if w == 0.0 {
                continue;
            }
            let mu = pt.mu.finite().expect("positive weight at finite divisor point");
            let sgn = if pt.s { 0.5 } else { -0.5 };
            acc += sgn * w * (1.0 + mu * z) / (Complex64::new(mu, 0.0) - z);
        }
        Complex64::new(self.norm.a_plus, 0.0) + self.norm.d * acc
    }

    /// m+ as an abstract Herglotz map (owned closure).
    pub fn m_plus_map(&self) -> HerglotzMap {
        let me = Arc::new(self.clone());
        HerglotzMap::from_fn(move |z| {
            let h0 = h0_eval(&me.set, &me.divisor, z)
                .unwrap_or(Complex64::new(f64::NAN, f64::NAN));
            me.m_plus_from_h0(z, h0)
        })
    }

    /// m- as an abstract Herglotz map.
    pub fn m_minus_map(&self) -> HerglotzMap {
        let me = Arc::new(self.clone());
        HerglotzMap::from_fn(move |z| {
            let h0 = h0_eval(&me.set, &me.divisor, z)
                .unwrap_or(Complex64::new(f64::NAN, f64::NAN));
            me.norm.d * h0 - me.m_plus_from_h0(z, h0)
        })
    }
}

/// The degenerate whole-line systems K_a, a in R union {inf}:
/// m+ = a and m- = -a identically.
#[derive(Debug, Clone, Copy)]
pub struct SingularSystem {
    pub value: SpherePoint,
}

impl SingularSystem {
    pub fn new(value: SpherePoint) -> Result<SingularSystem> {
        match value {
            SpherePoint::Infinity => Ok(SingularSystem { value }),
            SpherePoint::Finite(v) => {
                if v.im != 0.0 {
                    Err(CoreError::InvalidInput(format!(
                        "singular system constant must be real or infinity, got {v}"
                    )))
                } else {
                    Ok(SingularSystem { value })
                }
            }
        }
    }

    pub fn from_real(a: f64) -> SingularSystem {
        SingularSystem { value: SpherePoint::from(a) }
    }

    pub fn infinity() -> SingularSystem {
        SingularSystem { value: SpherePoint::Infinity }
    }

    pub fn m_plus_map(&self) -> HerglotzMap {
        HerglotzMap::Constant(self.value)
    }

    pub fn m_minus_map(&self) -> HerglotzMap {
        match self.value {
            SpherePoint::Infinity => HerglotzMap::Constant(SpherePoint::Infinity),
            SpherePoint::Finite(v) => HerglotzMap::Constant(SpherePoint::Finite(-v)),
        }
    }
}

/// Either a genuine reflectionless system or a singular limit.
#[derive(Debug, Clone)]
pub enum AnySystem {
    Regular(ReflectionlessSystem),
    Singular(SingularSystem),
}

impl AnySystem {
    pub fn m_plus_map(&self) -> HerglotzMap {
        match self {
            AnySystem::Regular(s) => s.m_plus_map(),
            AnySystem::Singular(s) => s.m_plus_map(),
        }
    }

    pub fn m_minus_map(&self) -> HerglotzMap {
        match self {
            AnySystem::Regular(s) => s.m_minus_map(),
            AnySystem::Singular(s) => s.m_minus_map(),
        }
    }

    pub fn as_regular(&self) -> Option<&ReflectionlessSystem> {
        match self {
            AnySystem::Regular(s) => Some(s),
            AnySystem::Singular(_) => None,
        }
    }
}

/// Leading Laurent data of a Herglotz map at infinity:
/// F(z) = b0 z + a + c / z + O(1/z^2).
#[derive(Debug, Clone, Copy)]
pub struct AsymptoticData {
    pub b0: f64,
    pub a: f64,
    pub c: f64,
}

/// Laurent coefficients f_n of F on the circle |z| = radius for
/// n = n_lo ..= n_hi, by trapezoidal sampling (512 points, offset off the
/// real axis) and discrete Fourier inversion.  Requires F to be real and
/// analytic on the real line outside the circle so that reflection
/// F(conj z) = conj F(z) is valid on the lower half circle.
pub fn laurent_coeffs(
    f: &HerglotzMap,
    radius: f64,
    n_lo: i32,
    n_hi: i32,
) -> Result<Vec<Complex64>> {
    const M: usize = 512;
    let mut samples = Vec::with_capacity(M);
    for k in 0..M {
        let th = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / M as f64;
        let z = Complex64::from_polar(radius, th);
        let v = f.eval_reflected(z);
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(CoreError::Numerical(format!(
                "function not finite on the sampling circle |z| = {radius}"
            )));
        }
        samples.push((th, v));
    }
    let mut out = Vec::new();
    for n in n_lo..=n_hi {
        let mut acc = Complex64::new(0.0, 0.0);
        for &(th, v) in &samples {
            acc += v * Complex64::from_polar(1.0, -(n as f64) * th);
        }
        acc /= M as f64;
        acc /= radius.powi(n);
        out.push(acc);
    }
    Ok(out)
}

/// Extract b0, a, c at infinity with an aliasing diagnostic; the radius is
/// doubled until the diagnostic passes.  `radius_hint` lets callers that
/// know the pole locations start beyond them.
pub fn asymptotics(
    f: &HerglotzMap,
    set: &FiniteGapSet,
    radius_hint: Option<f64>,
) -> Result<AsymptoticData> {
    let mut radius = radius_hint.unwrap_or(3.0 * set.scale());
    let mut last_err = None;
    for _ in 0..9 {
        match try_asymptotics(f, radius) {
            Ok(data) => return Ok(data),
            Err(e) => {
                last_err = Some(e);
                radius *= 2.0;
            }
        }
    }
    Err(last_err.unwrap_or_else(|| CoreError::Numerical("asymptotics failed".into())))
}

fn try_asymptotics(f: &HerglotzMap, radius: f64) -> Result<AsymptoticData> {
    let co = laurent_coeffs(f, radius, -1, 4)?;
    let (c, a, b0) = (co[0], co[1], co[2]);
    let scale = 1.0 + b0.norm() * radius + a.norm() + c.norm() / radius;
    // genuine expansions terminate at z^1; energy in higher powers means
    // the circle crosses singularities (aliasing)
    let high: f64 = (2..=4)
        .map(|i| co[(i + 1) as usize].norm() * radius.powi(i + 1))
        .sum();
    if high > 1e-8 * scale {
        return Err(CoreError::Numerical(format!(
            "laurent tail does not decay on |z| = {radius}"
        )));
    }
    for (name, v) in [("b0", b0), ("a", a), ("c", c)] {
        if v.im.abs() > 1e-7 * (1.0 + v.norm()) {
            return Err(CoreError::Numerical(format!(
                "laurent coefficient {name} = {v} is not real"
            )));
        }
    }
    let mut b0 = b0.re;
    if b0 < 0.0 {
        if b0 < -1e-7 {
            return Err(CoreError::Numerical(format!(
                "negative leading coefficient b0 = {b0}"
            )));
        }
        b0 = 0.0;
    }
    Ok(AsymptoticData { b0, a: a.re, c: c.re })
}

/// Limit of F along the imaginary axis, by Neville extrapolation in 1/Y.
/// Valid when F is holomorphic at infinity (all singularities in a bounded
/// part of the real line).
pub fn m_at_infinity(f: &HerglotzMap, scale: f64) -> Result<Complex64> {
    let y0 = 512.0 * scale.max(1.0);
    let n = 8;
    let mut us = Vec::with_capacity(n);
    let mut vs = Vec::with_capacity(n);
    for k in 0..n {
        let y = y0 * (1 << k) as f64;
        let v = f
            .eval(Complex64::new(0.0, y))?
            .finite()
            .ok_or_else(|| CoreError::Numerical("pole on the imaginary axis".into()))?;
        us.push(1.0 / y);
        vs.push(v);
    }
    // Neville tableau toward u = 0
    for j in 1..n {
        for i in (j..n).rev() {
            let den = us[i - j] - us[i];
            vs[i] = (us[i - j] * vs[i] - us[i] * vs[i - 1]) / den;
        }
    }
    Ok(vs[n - 1])
}

/// Outcome of parameter extraction.
#[derive(Debug, Clone)]
pub enum ExtractionOutcome {
    Regular { divisor: Divisor, norm: Normalization },
    Singular(SingularSystem),
}

const BOUNDARY_EPS: f64 = 1e-100;

fn sample_real(f: &HerglotzMap, t: f64) -> Result<Complex64> {
    f.eval(Complex64::new(t, BOUNDARY_EPS))?
        .finite()
        .ok_or_else(|| CoreError::Numerical(format!("pole met while sampling at t = {t}")))
        .or_else(|_| Ok(Complex64::new(f64::INFINITY, 0.0)))
}

/// Interior sample points of every band, used to read off the absolutely
/// continuous density of the function being analyzed.
fn band_probes(set: &FiniteGapSet) -> Vec<f64> {
    let mut pts = Vec::new();
    for &(lo, hi) in set.bands() {
        match (lo, hi) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => {
                // asymmetric positions keep the per-gap ratio equations
                // independent even on a single band
                let l = b - a;
                for frac in [0.12, 0.38, 0.66, 0.91] {
                    pts.push(a + frac * l);
                }
            }
            (ExtReal::Finite(a), ExtReal::PosInf) => {
                pts.push(a + 0.4);
                pts.push(a + 1.3);
                pts.push(a + 3.1);
            }
            (ExtReal::NegInf, ExtReal::Finite(b)) => {
                pts.push(b - 0.4);
                pts.push(b - 1.3);
                pts.push(b - 3.1);
            }
            _ => {}
        }
    }
    pts
}

struct GapScan {
    /// wrap-located pole of F inside the gap, if any
    pole: Option<f64>,
}

/// Locate the pole of a circle-monotone increasing function on a gap by
/// counting wraps through infinity on a sample grid and bisecting the
/// wrapping subinterval.
fn scan_gap_for_pole(f: &HerglotzMap, gap: &crate::gapset::Gap, scale: f64) -> Result<GapScan> {
    // work in the compactified coordinate so unbounded gaps are handled
    // uniformly
    let to_t = |v: f64| ExtReal::decompactify(v).finite().unwrap_or(0.0);
    let (v_lo, v_hi) = gap_inner_range(gap, scale);
    if !(v_lo < v_hi) {
        return Ok(GapScan { pole: None });
    }
    let n = 257;
    let mut vs = Vec::with_capacity(n);
    let mut fs = Vec::with_capacity(n);
    for k in 0..n {
        let v = v_lo + (v_hi - v_lo) * k as f64 / (n - 1) as f64;
        vs.push(v);
        fs.push(sample_real(f, to_t(v))?.re);
    }
    let is_wrap = |a: f64, b: f64| b < a && (a - b) > 1e-12 * (1.0 + a.abs() + b.abs());
    let wraps: Vec<usize> = (0..n - 1).filter(|&k| is_wrap(fs[k], fs[k + 1])).collect();
    match wraps.len() {
        0 => Ok(GapScan { pole: None }),
        1 => {
            let k = wraps[0];
            let (mut a, mut b) = (vs[k], vs[k + 1]);
            let mut fa = fs[k];
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if m <= a || m >= b {
                    break;
                }
                let fm = sample_real(f, to_t(m))?.re;
                if fm < fa {
                    b = m;
                } else {
                    a = m;
                    fa = fm;
                }
            }
            let v = 0.5 * (a + b);
            Ok(GapScan { pole: Some(to_t(v)) })
        }
        _ => Err(CoreError::Inconsistent(format!(
            "found {} poles in one gap; the function is not a half-line Weyl function over this set",
            wraps.len()
        ))),
    }
}

/// Compactified coordinates of the slightly shrunk open gap.
fn gap_inner_range(gap: &crate::gapset::Gap, scale: f64) -> (f64, f64) {
    let v_lo = match gap.left {
        ExtReal::NegInf => -1.0 + 1e-12,
        ExtReal::Finite(c) => {
            let margin = margin_for(gap, scale);
            ExtReal::Finite(c + margin).compactify()
        }
        ExtReal::PosInf => 1.0,
    };
    let v_hi = match gap.right {
        ExtReal::PosInf => 1.0 - 1e-12,
        ExtReal::Finite(d) => {
            let margin = margin_for(gap, scale);
            ExtReal::Finite(d - margin).compactify()
        }
        ExtReal::NegInf => -1.0,
    };
    (v_lo, v_hi)
}

fn margin_for(gap: &crate::gapset::Gap, scale: f64) -> f64 {
    match (gap.left.finite(), gap.right.finite()) {
        (Some(c), Some(d)) => 1e-9 * (d - c),
        _ => 1e-9 * scale,
    }
}

/// Recover divisor and normalization of a reflectionless system from its
/// m+ function alone.
///
/// Strategy: poles of F inside gaps are located exactly by monotone wrap
/// bisection and fix those divisor points with s = 1; the remaining points
/// are recovered from ratios of the boundary density Im F(t + i0) sampled
/// inside the bands, one monotone one-dimensional solve per gap, iterated
/// to joint convergence.  D comes from the density level, is cross-checked
/// through the total-mass bookkeeping at z = i, and A+ = Re F(i).
pub fn extract_parameters(f: &HerglotzMap, set: &FiniteGapSet) -> Result<ExtractionOutcome> {
    // singular limits first
    if let Some(p) = f.as_constant() {
        return Ok(ExtractionOutcome::Singular(SingularSystem::new(p)?));
    }
    let probes0 = [
        Complex64::new(0.0, 1.0),
        Complex64::new(0.0, 2.0),
        Complex64::new(1.0, 1.0),
        Complex64::new(-1.5, 2.5),
        Complex64::new(0.3, 0.7),
    ];
    let vals: Vec<SpherePoint> = probes0
        .iter()
        .map(|&z| f.eval(z))
        .collect::<Result<_>>()?;
    let spread = vals
        .iter()
        .flat_map(|&a| vals.iter().map(move |&b| chordal_distance(a, b)))
        .fold(0.0f64, f64::max);
    if spread < 1e-9 {
        return match vals[0] {
            SpherePoint::Infinity => Ok(ExtractionOutcome::Singular(SingularSystem::infinity())),
            SpherePoint::Finite(v) => {
                if v.im.abs() < 1e-7 * (1.0 + v.norm()) {
                    Ok(ExtractionOutcome::Singular(SingularSystem::from_real(v.re)))
                } else {
                    Err(CoreError::Inconsistent(format!(
                        "constant function with value {v} off the real sphere circle"
                    )))
                }
            }
        };
    }

    let fi = f
        .eval(Complex64::new(0.0, 1.0))?
        .finite()
        .ok_or_else(|| CoreError::Inconsistent("pole at z = i".into()))?;
    if !(fi.im > 0.0) {
        return Err(CoreError::Inconsistent(
            "Im F(i) <= 0: not a nonconstant Herglotz function".into(),
        ));
    }
    let a_plus = fi.re;
    let scale = set.scale();

    // stage 1: poles of F itself (the s = 1 points)
    let mut mu: Vec<ExtReal> = Vec::new();
    let mut s_flag: Vec<bool> = Vec::new();
    let mut pinned: Vec<bool> = Vec::new();
    for gap in set.gaps() {
        let scan = scan_gap_for_pole(f, gap, scale)?;
        match scan.pole {
            Some(t) => {
                mu.push(ExtReal::Finite(t));
                s_flag.push(true);
                pinned.push(true);
            }
            None => {
                // start in the middle of the compactified gap
                let v = 0.5 * (gap.left.compactify() + gap.right.compactify());
                mu.push(ExtReal::decompactify(v));
                s_flag.push(false);
                pinned.push(false);
            }
        }
    }

    // stage 2: band density data
    let probes = band_probes(set);
    if probes.is_empty() {
        return Err(CoreError::InvalidInput("set has no usable bands".into()));
    }
    let mut ln_y = Vec::with_capacity(probes.len());
    for &t in &probes {
        let v = sample_real(f, t)?;
        if !(v.im > 0.0) || !v.im.is_finite() {
            return Err(CoreError::Inconsistent(format!(
                "boundary density of F not positive at band point t = {t}"
            )));
        }
        ln_y.push(v.im.ln());
    }

    // model of ln |h0(t + i0)| for a candidate divisor
    let model = |mu: &[ExtReal], t: f64| -> Result<f64> {
        let points: Vec<GapPoint> = mu.iter().map(|&m| GapPoint { mu: m, s: false }).collect();
        let g = if divisor_needs_g(set, &points) { Some(0.0) } else { None };
        let div = Divisor { points, g };
        Ok(log_h0(set, &div, Zpt::Boundary(t))?.re)
    };

    // per-gap probe pairs for the ratio equations; distinct gaps must use
    // distinct unordered pairs or the equations become dependent
    let mut pairs: Vec<(usize, usize)> = Vec::with_capacity(set.gaps().len());
    for gap in set.gaps() {
        let dist = |t: f64| -> f64 {
            match (gap.left, gap.right) {
                (ExtReal::Finite(c), ExtReal::Finite(d)) => (t - c).abs().min((d - t).abs()),
                (ExtReal::NegInf, ExtReal::Finite(d)) => (t - d).abs(),
                (ExtReal::Finite(c), ExtReal::PosInf) => (t - c).abs(),
                _ => f64::INFINITY,
            }
        };
        let pair = match (gap.left, gap.right) {
            (ExtReal::Finite(c), ExtReal::Finite(d)) => {
                // nearest probe on each side
                let mut best_l = (f64::INFINITY, 0);
                let mut best_r = (f64::INFINITY, 0);
                for (i, &t) in probes.iter().enumerate() {
                    if t < c && c - t < best_l.0 {
                        best_l = (c - t, i);
                    }
                    if t > d && t - d < best_r.0 {
                        best_r = (t - d, i);
                    }
                }
                (best_l.1, best_r.1)
            }
            _ => {
                // nearest probe plus increasingly distant partners until the
                // unordered pair is unused
                let mut order: Vec<usize> = (0..probes.len()).collect();
                order.sort_by(|&a, &b| dist(probes[a]).total_cmp(&dist(probes[b])));
                let near = order[0];
                let mut chosen = (near, *order.last().unwrap());
                for &cand in order.iter().skip(1).rev() {
                    let p = (near, cand);
                    let clash = pairs
                        .iter()
                        .any(|&(a, b)| (a, b) == p || (b, a) == p);
                    if !clash {
                        chosen = p;
                        break;
                    }
                }
                chosen
            }
        };
        pairs.push(pair);
    }

    // residual of the ratio equation attached to gap j for a candidate
    // divisor
    let pair_resid = |mu_try: &[ExtReal], j: usize| -> Result<f64> {
        let (i1, i2) = pairs[j];
        Ok(model(mu_try, probes[i2])? - model(mu_try, probes[i1])? - (ln_y[i2] - ln_y[i1]))
    };

    // one pass of coordinate-wise bisection in the compactified gap
    // coordinate over the given set of gaps; returns the largest move
    let near_sweep = |mu: &mut Vec<ExtReal>, gaps: &[usize]| -> Result<f64> {
        let mut max_step = 0.0f64;
        for &j in gaps {
            let gap = &set.gaps()[j];
            let (v_lo, v_hi) = (gap.left.compactify(), gap.right.compactify());
            let resid = |v: f64| -> Result<f64> {
                let mut mu_try = mu.clone();
                mu_try[j] = ExtReal::decompactify(v);
                pair_resid(&mu_try, j)
            };
            let f_lo = resid(v_lo)?;
            let f_hi = resid(v_hi)?;
            let v_new = if f_lo == 0.0 {
                v_lo
            } else if f_hi == 0.0 {
                v_hi
            } else if f_lo.signum() == f_hi.signum() {
                // root outside the closed gap: clamp to the nearer end
                if f_lo.abs() <= f_hi.abs() {
                    v_lo
                } else {
                    v_hi
                }
            } else {
                let (mut a, mut b, mut fa) = (v_lo, v_hi, f_lo);
                for _ in 0..80 {
                    let m = 0.5 * (a + b);
                    if m <= a || m >= b {
                        break;
                    }
                    let fm = resid(m)?;
                    if fm == 0.0 {
                        a = m;
                        b = m;
                        break;
                    }
                    if fm.signum() == fa.signum() {
                        a = m;
                        fa = fm;
                    } else {
                        b = m;
                    }
                }
                0.5 * (a + b)
            };
            let step = (v_new - mu[j].compactify()).abs();
            if step > max_step {
                max_step = step;
            }
            mu[j] = ExtReal::decompactify(v_new);
        }
        Ok(max_step)
    };

    // Gauss-Seidel over the unpinned gaps
    let free: Vec<usize> = (0..mu.len()).filter(|&j| !pinned[j]).collect();
    if !free.is_empty() {
        for _sweep in 0..200 {
            if near_sweep(&mut mu, &free)? < 1e-13 {
                break;
            }
        }
        // repeat until the far/near split stabilizes: a point treated as
        // near can land in the far field during the joint polish and then
        // needs the q-coordinate treatment (including infinity snapping)
        for _ in 0..3 {
            let before = mu.clone();
            refine_far_field(set, &free, &mut mu, scale, &pair_resid, &near_sweep)?;
            if mu == before {
                break;
            }
        }
        // snap huge finite values in unbounded gaps to infinity
        for &j in &free {
            if let ExtReal::Finite(x) = mu[j] {
                if x.abs() > 1e10 {
                    mu[j] = if x > 0.0 { ExtReal::PosInf } else { ExtReal::NegInf };
                }
            }
        }
    }

    // D from the density level
    let mut ln_d_acc = 0.0;
    for (i, &t) in probes.iter().enumerate() {
        let dens = {
            let points: Vec<GapPoint> = mu.iter().map(|&m| GapPoint { mu: m, s: false }).collect();
            let g = if divisor_needs_g(set, &points) { Some(0.0) } else { None };
            let div = Divisor { points, g };
            log_h0(set, &div, Zpt::Boundary(t))?.exp().im
        };
        if !(dens > 0.0) {
            return Err(CoreError::Numerical(format!(
                "model density vanished at band point {t}"
            )));
        }
        ln_d_acc += ln_y[i] - (0.5 * dens).ln();
    }
    let d_level = (ln_d_acc / probes.len() as f64).exp();

    // provisional divisor (s bits pending) for the weights
    let prov_points: Vec<GapPoint> = mu.iter().map(|&m| GapPoint { mu: m, s: false }).collect();
    let g_needed = divisor_needs_g(set, &prov_points);
    let prov = Divisor { points: prov_points, g: if g_needed { Some(0.0) } else { None } };
    let rep = representation_data(set, &prov)?;

    // stage 3: pole-side decision at each massive divisor point
    for (j, gap) in set.gaps().iter().enumerate() {
        let w = rep.weights[j];
        let mu_j = match mu[j] {
            ExtReal::Finite(x) => x,
            _ => continue,
        };
        if mu[j] == gap.left || mu[j] == gap.right {
            s_flag[j] = false;
            continue;
        }
        let thresh = d_level * w * (1.0 + mu_j * mu_j);
        if thresh < 1e-10 * d_level * (1.0 + mu_j * mu_j) {
            // essentially massless point: keep the wrap verdict
            continue;
        }
        // a true pole keeps eps |F| at the level of the point mass as eps
        // shrinks; background contamination decays linearly, so refine eps
        // when the first reading is ambiguous
        let mut eps = 1e-6;
        let mut decided = None;
        let mut last = 0.0;
        for _ in 0..4 {
            let v = f.eval(Complex64::new(mu_j, eps))?;
            let resid = match v {
                SpherePoint::Infinity => f64::INFINITY,
                SpherePoint::Finite(v) => eps * v.norm(),
            };
            last = resid;
            if resid > 0.5 * thresh {
                decided = Some(true);
                break;
            }
            if resid < 1e-3 * thresh {
                decided = Some(false);
                break;
            }
            eps /= 100.0;
        }
        match decided {
            Some(s) => s_flag[j] = s,
            None => {
                return Err(CoreError::Inconsistent(format!(
                    "ambiguous pole side in gap {j}: scaled residue {last} against point mass {thresh}"
                )))
            }
        }
    }

    // stage 4: g for the compact doubly-infinite situation
    let g = if g_needed {
        let r_hint = laurent_radius(set, &mu);
        let asy = asymptotics(f, set, Some(r_hint))?;
        let g_raw = asy.b0 / d_level - 0.5;
        if g_raw < -0.5 - 1e-6 || g_raw > 0.5 + 1e-6 {
            return Err(CoreError::Inconsistent(format!(
                "extracted torus parameter g = {g_raw} outside [-1/2, 1/2]"
            )));
        }
        Some(g_raw.clamp(-0.5, 0.5))
    } else {
        None
    };

    // final divisor and cross-checks; solver margins keep iterates a hair
    // inside the open gap, so snap near-edge recoveries onto the endpoint
    // (an exact-endpoint divisor point carries no mass, and a point this
    // close to the edge is indistinguishable from one at the edge)
    let points: Vec<GapPoint> = mu
        .iter()
        .zip(&s_flag)
        .zip(set.gaps())
        .map(|((&m, &s), gap)| {
            let mu = match m {
                ExtReal::Finite(x) => {
                    let mut x = x;
                    let win = match (gap.left.finite(), gap.right.finite()) {
                        (Some(c), Some(d)) => 1e-10 * (d - c),
                        _ => 1e-10 * scale,
                    };
                    if let ExtReal::Finite(c) = gap.left {
                        if x - c < win {
                            x = c;
                        }
                    }
                    if let ExtReal::Finite(d) = gap.right {
                        if d - x < win {
                            x = d;
                        }
                    }
                    ExtReal::Finite(x)
                }
                other => other,
            };
            GapPoint { mu, s }
        })
        .collect();
    let divisor = Divisor::new(set, points, g)?;
    let ac = ac_mass(set, &divisor, 1e-10)?;
    let nu_plus = 0.5 * ac
        + divisor
            .points
            .iter()
            .zip(&rep.weights)
            .filter(|(p, _)| p.s)
            .map(|(_, &w)| w)
            .sum::<f64>()
        + (0.5 + g.unwrap_or(0.0)) * rep.nu_infinity;
    if !(nu_plus > 0.0) {
        return Err(CoreError::Inconsistent("vanishing plus measure".into()));
    }
    let d_check = fi.im / nu_plus;
    if (d_check - d_level).abs() > 1e-6 * d_level.max(d_check) {
        return Err(CoreError::Inconsistent(format!(
            "normalization mismatch: density level gives D = {d_level}, measure bookkeeping gives {d_check}"
        )));
    }
    Ok(ExtractionOutcome::Regular {
        divisor,
        norm: Normalization::new(a_plus, d_level)?,
    })
}

/// Refine divisor points of unbounded gaps whose estimates sit in the far
/// field (|mu| beyond ~10 set scales) or at infinity.  The band-density
/// ratio equations depend on such points only through q = 1/mu, and when
/// two unbounded gaps are both far the leading dependence is on the single
/// combination q_A - q_B, so coordinate-wise iteration stalls.  Solving in
/// the variables (q_A - q_B, q_A^2 + q_B^2), where the equations have a
/// nondegenerate Jacobian, converges; a recovered q below 1e-7 is decided
/// as mu at infinity.
fn refine_far_field<R, S>(
    set: &FiniteGapSet,
    free: &[usize],
    mu: &mut Vec<ExtReal>,
    scale: f64,
    pair_resid: &R,
    near_sweep: &S,
) -> Result<()>
where
    R: Fn(&[ExtReal], usize) -> Result<f64>,
    S: Fn(&mut Vec<ExtReal>, &[usize]) -> Result<f64>,
{
    let far_thresh = 10.0 * scale;
    let q_max = 1.0 / far_thresh;
    let q_snap = 1e-7;
    let mut far: Vec<(usize, f64)> = Vec::new();
    for &j in free {
        let gap = &set.gaps()[j];
        let sign = if gap.right == ExtReal::PosInf {
            1.0
        } else if gap.left == ExtReal::NegInf {
            -1.0
        } else {
            continue;
        };
        let is_far = match mu[j] {
            ExtReal::Finite(x) => x.abs() > far_thresh,
            _ => true,
        };
        if is_far {
            far.push((j, sign));
        }
    }
    let near: Vec<usize> = free
        .iter()
        .copied()
        .filter(|j| !far.iter().any(|&(k, _)| k == *j))
        .collect();
    let q_of = |m: ExtReal| -> f64 {
        match m {
            ExtReal::Finite(x) => (1.0 / x.abs()).min(q_max),
            _ => 0.0,
        }
    };
    let put = |mu: &mut Vec<ExtReal>, qs: &[f64]| {
        for (&(j, sign), &q) in far.iter().zip(qs) {
            mu[j] = if q < q_snap {
                if sign > 0.0 {
                    ExtReal::PosInf
                } else {
                    ExtReal::NegInf
                }
            } else {
                ExtReal::Finite(sign / q)
            };
        }
    };
    let rounds = if far.is_empty() {
        0
    } else if near.is_empty() {
        1
    } else {
        8
    };
    for _round in 0..rounds {
        if !near.is_empty() {
            for _ in 0..100 {
                if near_sweep(mu, &near)? < 1e-13 {
                    break;
                }
            }
        }
        if far.len() == 1 {
            let j = far[0].0;
            // bisection straight in q; keep q = 0 evaluable (mu at infinity)
            let exact_q = |q: f64| -> Result<f64> {
                let mut mt = mu.clone();
                mt[j] = if q == 0.0 {
                    if far[0].1 > 0.0 { ExtReal::PosInf } else { ExtReal::NegInf }
                } else {
                    ExtReal::Finite(far[0].1 / q)
                };
                pair_resid(&mt, j)
            };
            let f0 = exact_q(0.0)?;
            let f1 = exact_q(q_max)?;
            let mut q = if f0 == 0.0 || f0.signum() == f1.signum() {
                if f0.abs() <= f1.abs() {
                    0.0
                } else {
                    q_max
                }
            } else {
                let (mut a, mut b, mut fa) = (0.0f64, q_max, f0);
                for _ in 0..120 {
                    let m = 0.5 * (a + b);
                    if m <= a || m >= b {
                        break;
                    }
                    let fm = exact_q(m)?;
                    if fm == 0.0 {
                        a = m;
                        b = m;
                        break;
                    }
                    if fm.signum() == fa.signum() {
                        a = m;
                        fa = fm;
                    } else {
                        b = m;
                    }
                }
                0.5 * (a + b)
            };
            if q < q_snap {
                q = 0.0;
            }
            put(mu, &[q]);
        } else {
            // two far gaps: Newton in (u, w)
            let (qa0, qb0) = (q_of(mu[far[0].0]), q_of(mu[far[1].0]));
            let mut u = qa0 - qb0;
            let mut w = qa0 * qa0 + qb0 * qb0;
            let w_cap = 2.0 * q_max * q_max;
            let qs_of = |u: f64, w: f64| -> [f64; 2] {
                let r = (2.0 * w - u * u).max(0.0).sqrt().max(u.abs());
                [
                    (0.5 * (u + r)).clamp(0.0, q_max),
                    (0.5 * (r - u)).clamp(0.0, q_max),
                ]
            };
            let resid_uw = |u: f64, w: f64| -> Result<[f64; 2]> {
                let mut mt = mu.clone();
                put(&mut mt, &qs_of(u, w));
                Ok([pair_resid(&mt, far[0].0)?, pair_resid(&mt, far[1].0)?])
            };
            for _ in 0..60 {
                let r = resid_uw(u, w)?;
                let du = 1e-9 + 1e-6 * u.abs();
                let dw = 1e-12 + 1e-6 * w.abs();
                let ru = resid_uw(u + du, w)?;
                let rw = resid_uw(u, w + dw)?;
                let j11 = (ru[0] - r[0]) / du;
                let j21 = (ru[1] - r[1]) / du;
                let j12 = (rw[0] - r[0]) / dw;
                let j22 = (rw[1] - r[1]) / dw;
                let det = j11 * j22 - j12 * j21;
                if det.abs() < 1e-300 {
                    break;
                }
                let su = (r[0] * j22 - r[1] * j12) / det;
                let sw = (r[1] * j11 - r[0] * j21) / det;
                let su = su.clamp(-0.5 * q_max, 0.5 * q_max);
                let sw = sw.clamp(-0.5 * w_cap, 0.5 * w_cap);
                u -= su;
                w -= sw;
                u = u.clamp(-(2.0f64 * w_cap).sqrt(), (2.0f64 * w_cap).sqrt());
                w = w.clamp(0.0, w_cap);
                if su.abs() + sw.abs() < 1e-17 {
                    break;
                }
            }
            put(mu, &qs_of(u, w));
        }
        if near.is_empty() {
            break;
        }
    }

    // The alternating scheme above contracts slowly when coordinates
    // couple strongly, so finish with a joint Newton solve over all free
    // coordinates: compactified positions for the near gaps, q = 1/|mu|
    // for the far ones.
    let n = near.len() + far.len();
    if n == 0 {
        return Ok(());
    }
    let put_state = |mu: &mut Vec<ExtReal>, v: &[f64]| {
        for (i, &j) in near.iter().enumerate() {
            mu[j] = ExtReal::decompactify(v[i]);
        }
        // exact q mapping here; infinity snapping happens after the solve
        for (&(j, sign), &q) in far.iter().zip(&v[near.len()..]) {
            mu[j] = if q == 0.0 {
                if sign > 0.0 { ExtReal::PosInf } else { ExtReal::NegInf }
            } else {
                ExtReal::Finite(sign / q)
            };
        }
    };
    let resid_all = |base: &Vec<ExtReal>, v: &[f64]| -> Result<Vec<f64>> {
        let mut mt = base.clone();
        put_state(&mut mt, v);
        let mut r = Vec::with_capacity(n);
        for &j in &near {
            r.push(pair_resid(&mt, j)?);
        }
        for &(j, _) in &far {
            r.push(pair_resid(&mt, j)?);
        }
        Ok(r)
    };
    let mut lo = Vec::with_capacity(n);
    let mut hi = Vec::with_capacity(n);
    for &j in &near {
        let (a, b) = (set.gaps()[j].left.compactify(), set.gaps()[j].right.compactify());
        let m = 1e-12 * (b - a);
        lo.push(a + m);
        hi.push(b - m);
    }
    for _ in &far {
        lo.push(0.0);
        hi.push(q_max);
    }
    let mut v: Vec<f64> = near.iter().map(|&j| mu[j].compactify()).collect();
    v.extend(far.iter().map(|&(j, _)| q_of(mu[j])));
    for k in 0..n {
        v[k] = v[k].clamp(lo[k], hi[k]);
    }
    for _ in 0..40 {
        let r = resid_all(mu, &v)?;
        let mut jac = nalgebra::DMatrix::<f64>::zeros(n, n);
        for k in 0..n {
            let dk = 1e-9 + 1e-7 * v[k].abs();
            let mut vp = v.clone();
            vp[k] = if v[k] + dk <= hi[k] { v[k] + dk } else { v[k] - dk };
            let dd = vp[k] - v[k];
            let rp = resid_all(mu, &vp)?;
            for i in 0..n {
                jac[(i, k)] = (rp[i] - r[i]) / dd;
            }
        }
        let rhs = nalgebra::DVector::from_iterator(n, r.iter().copied());
        let step = match jac.lu().solve(&rhs) {
            Some(s) => s,
            None => break,
        };
        let mut moved = 0.0f64;
        for k in 0..n {
            let span = hi[k] - lo[k];
            let s = step[k].clamp(-0.25 * span, 0.25 * span);
            let nv = (v[k] - s).clamp(lo[k], hi[k]);
            moved = moved.max((nv - v[k]).abs());
            v[k] = nv;
        }
        if moved < 1e-15 {
            break;
        }
    }
    for k in near.len()..n {
        if v[k] < q_snap {
            v[k] = 0.0;
        }
    }
    // with several far gaps the residual is only second-order sensitive
    // near q = 0, so the solver can stall slightly off zero; accept a
    // joint snap of all small q's when it does not worsen the fit (the
    // coordinates balance each other, so they must be snapped together)
    let candidates: Vec<usize> =
        (near.len()..n).filter(|&k| v[k] > 0.0 && v[k] < 1e-5).collect();
    if !candidates.is_empty() {
        let norm = |r: &[f64]| r.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
        let before = norm(&resid_all(mu, &v)?);
        let mut vt = v.clone();
        for &k in &candidates {
            vt[k] = 0.0;
        }
        if norm(&resid_all(mu, &vt)?) <= before + 1e-9 {
            v = vt;
        }
    }
    put_state(mu, &v);
    Ok(())
}

/// A sampling radius beyond the set and all finite divisor points.
pub fn laurent_radius(set: &FiniteGapSet, mu: &[ExtReal]) -> f64 {
    let mut r = 3.0 * set.scale();
    for m in mu {
        if let Some(x) = m.finite() {
            r = r.max(2.0 * (1.0 + x.abs()));
        }
    }
    r
}

/// |Re(m+ + m-)(t + i0)| at a band point, estimated on the ladder
/// eps = 1e-3 .. 1e-7 with Richardson extrapolation.  Zero (to numerical
/// accuracy) exactly when the system is reflectionless at t.
pub fn reflectionless_defect(sys: &ReflectionlessSystem, t: f64) -> Result<f64> {
    if sys.set().band_containing(t).is_none() {
        return Err(CoreError::Domain(format!(
            "reflectionless defect requested at t = {t} outside the open bands"
        )));
    }
    let mut vals = Vec::new();
    let mut eps = 1e-3;
    for _ in 0..5 {
        let z = Complex64::new(t, eps);
        let h = sys.eval_m(Side::Plus, z)? + sys.eval_m(Side::Minus, z)?;
        vals.push(h.re);
        eps /= 10.0;
    }
    let mut acc = vals;
    for k in 1..acc.len() {
        for i in (k..acc.len()).rev() {
            let p = 10.0f64.powi(k as i32);
            acc[i] = (p * acc[i] - acc[i - 1]) / (p - 1.0);
        }
    }
    Ok(acc.last().unwrap().abs())
}

/// Distance between systems: the Herglotz-function metric applied to both
/// half-line Weyl functions, worst side.
pub fn system_distance(a: &AnySystem, b: &AnySystem) -> Result<f64> {
    let dp = herglotz_metric(&a.m_plus_map(), &b.m_plus_map(), METRIC_GRID_N)?;
    let dm = herglotz_metric(&a.m_minus_map(), &b.m_minus_map(), METRIC_GRID_N)?;
    Ok(dp.max(dm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gapset::classify_set;

    fn c64(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    pub(crate) fn dirac_example() -> ReflectionlessSystem {
        let set = classify_set(&[
            (ExtReal::NegInf, ExtReal::Finite(-1.0)),
            (ExtReal::Finite(1.0), ExtReal::PosInf),
        ])
        .unwrap();
        let div = Divisor::new(
            &set,
            vec![GapPoint { mu: ExtReal::Finite(0.0), s: true }],
            None,
        )
        .unwrap();
        build_system(set, div, Normalization::new(0.0, 1.0).unwrap()).unwrap()
    }

    pub(crate) fn free_jacobi(g: f64) -> ReflectionlessSystem {
        let set = classify_set(&[(ExtReal::Finite(-2.0), ExtReal::Finite(2.0))]).unwrap();
        let div = Divisor::new(
            &set,
            vec![
                GapPoint { mu: ExtReal::NegInf, s: false },
                GapPoint { mu: ExtReal::PosInf, s: false },
            ],
            Some(g),
        )
        .unwrap();
        build_system(set, div, Normalization::new(0.0, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn m_frozen_values() {
        // R \ (-1,1), mu = 0, s = 1, A+ = 0, D = 1:
        // m+(i) = (sqrt 2 + 1) i, m-(i) = (sqrt 2 - 1) i
        let sys = dirac_example();
        let mp = sys.eval_m(Side::Plus, c64(0.0, 1.0)).unwrap();
        let mm = sys.eval_m(Side::Minus, c64(0.0, 1.0)).unwrap();
        let r = 2.0f64.sqrt();
        assert!((mp - c64(0.0, r + 1.0)).norm() < 1e-13);
        assert!((mm - c64(0.0, r - 1.0)).norm() < 1e-13);

        // free Jacobi: m+(z) = (-z + sqrt(z^2 - 4))/2, so m+(2i) = (sqrt 2 - 1) i
        let sys = free_jacobi(-0.5);
        let mp = sys.eval_m(Side::Plus, c64(0.0, 2.0)).unwrap();
        assert!((mp - c64(0.0, 2.0f64.sqrt() - 1.0)).norm() < 1e-13);
        // and m+(i) = (sqrt 5 - 1)/2 i
        let mp = sys.eval_m(Side::Plus, c64(0.0, 1.0)).unwrap();
        assert!((mp - c64(0.0, (5.0f64.sqrt() - 1.0) / 2.0)).norm() < 1e-13);
    }

    #[test]
    fn m_domain_checked() {
        let sys = dirac_example();
        assert!(sys.eval_m(Side::Plus, c64(0.0, -1.0)).is_err());
        assert!(sys.eval_m(Side::Plus, c64(5.0, 0.0)).is_err());
    }

    #[test]
    fn measure_bookkeeping_at_i() {
        // Im m+(i) = D nu_plus with nu_plus = ac/2 + masses on the plus side
        for sys in [dirac_example(), free_jacobi(0.25)] {
            let rep = sys.representation().clone();
            let ac = ac_mass(sys.set(), sys.divisor(), 1e-10).unwrap();
            let nu_plus = 0.5 * ac
                + sys
                    .divisor()
                    .points
                    .iter()
                    .zip(&rep.weights)
                    .filter(|(p, _)| p.s)
                    .map(|(_, &w)| w)
                    .sum::<f64>()
                + (0.5 + sys.divisor().g.unwrap_or(0.0)) * rep.nu_infinity;
            let mp = sys.eval_m(Side::Plus, c64(0.0, 1.0)).unwrap();
            assert!(
                (mp.im - sys.normalization().d * nu_plus).abs() < 1e-7,
                "Im m+(i) = {}, D nu+ = {}",
                mp.im,
                sys.normalization().d * nu_plus
            );
            assert!((mp.re - sys.normalization().a_plus).abs() < 1e-12);
        }
    }

    #[test]
    fn asymptotics_frozen() {
        // free Jacobi m+: -1/z - 1/z^3 - ... -> (b0, a, c) = (0, 0, -1)
        let sys = free_jacobi(-0.5);
        let asy = asymptotics(&sys.m_plus_map(), sys.set(), None).unwrap();
        assert!(asy.b0.abs() < 1e-10);
        assert!(asy.a.abs() < 1e-10);
        assert!((asy.c + 1.0).abs() < 1e-9);

        // polynomial test map z + 5
        let f = HerglotzMap::from_fn(|z| z + Complex64::new(5.0, 0.0));
        let asy = asymptotics(&f, sys.set(), None).unwrap();
        assert!((asy.b0 - 1.0).abs() < 1e-10);
        assert!((asy.a - 5.0).abs() < 1e-9);
        assert!(asy.c.abs() < 1e-9);
    }

    #[test]
    fn m_at_infinity_dirac() {
        let sys = dirac_example();
        let w = m_at_infinity(&sys.m_plus_map(), sys.set().scale()).unwrap();
        // h0 -> 2i, the point mass contributes -mu w/... with mu = 0: limit i
        assert!((w - c64(0.0, 1.0)).norm() < 1e-9, "w = {w}");
    }

    #[test]
    fn extraction_round_trip_fixed() {
        // a two-gap Dirac set with one pole on each side assignment
        let set = classify_set(&[
            (ExtReal::NegInf, ExtReal::Finite(-2.0)),
            (ExtReal::Finite(-1.0), ExtReal::Finite(0.5)),
            (ExtReal::Finite(2.0), ExtReal::PosInf),
        ])
        .unwrap();
        let div = Divisor::new(
            &set,
            vec![
                GapPoint { mu: ExtReal::Finite(-1.3), s: true },
                GapPoint { mu: ExtReal::Finite(1.1), s: false },
            ],
            None,
        )
        .unwrap();
        let sys = build_system(set.clone(), div, Normalization::new(0.7, 1.9).unwrap()).unwrap();
        let out = extract_parameters(&sys.m_plus_map(), &set).unwrap();
        match out {
            ExtractionOutcome::Regular { divisor, norm } => {
                assert!((norm.a_plus - 0.7).abs() < 1e-8);
                assert!((norm.d - 1.9).abs() < 1e-8 * 1.9);
                let mus: Vec<f64> = divisor.points.iter().map(|p| p.mu.finite().unwrap()).collect();
                assert!((mus[0] + 1.3).abs() < 1e-7, "mu0 = {}", mus[0]);
                assert!((mus[1] - 1.1).abs() < 1e-7, "mu1 = {}", mus[1]);
                assert!(divisor.points[0].s);
                assert!(!divisor.points[1].s);
            }
            _ => panic!("expected regular outcome"),
        }
    }

    #[test]
    fn extraction_round_trip_compact_infinite() {
        let sys = free_jacobi(0.25);
        let out = extract_parameters(&sys.m_plus_map(), sys.set()).unwrap();
        match out {
            ExtractionOutcome::Regular { divisor, norm } => {
                assert!(matches!(divisor.points[0].mu, ExtReal::NegInf));
                assert!(matches!(divisor.points[1].mu, ExtReal::PosInf));
                assert!((divisor.g.unwrap() - 0.25).abs() < 1e-7);
                assert!(norm.a_plus.abs() < 1e-9);
                assert!((norm.d - 1.0).abs() < 1e-8);
            }
            _ => panic!("expected regular outcome"),
        }
    }

    #[test]
    fn extraction_schroedinger_infinite_point() {
        let set = classify_set(&[(ExtReal::Finite(0.0), ExtReal::PosInf)]).unwrap();
        let div =
            Divisor::new(&set, vec![GapPoint { mu: ExtReal::NegInf, s: false }], None).unwrap();
        let sys = build_system(set.clone(), div, Normalization::new(-0.3, 2.5).unwrap()).unwrap();
        let out = extract_parameters(&sys.m_plus_map(), &set).unwrap();
        match out {
            ExtractionOutcome::Regular { divisor, norm } => {
                assert!(matches!(divisor.points[0].mu, ExtReal::NegInf));
                assert!((norm.a_plus + 0.3).abs() < 1e-8);
                assert!((norm.d - 2.5).abs() < 1e-8 * 2.5);
            }
            _ => panic!("expected regular outcome"),
        }
    }

    #[test]
    fn singular_detection() {
        let set = classify_set(&[(ExtReal::Finite(-2.0), ExtReal::Finite(2.0))]).unwrap();
        let f = HerglotzMap::constant_real(1.5);
        match extract_parameters(&f, &set).unwrap() {
            ExtractionOutcome::Singular(s) => {
                assert!((s.value.finite().unwrap().re - 1.5).abs() < 1e-12);
            }
            _ => panic!("expected singular outcome"),
        }
    }

    #[test]
    fn defect_small_on_bands() {
        let sys = dirac_example();
        for &t in &[-3.0, 2.0, 7.5] {
            let d = reflectionless_defect(&sys, t).unwrap();
            assert!(d < 1e-8, "defect {d} at t = {t}");
        }
        assert!(reflectionless_defect(&sys, 0.0).is_err());
    }

    #[test]
    fn distance_to_singular() {
        // small-D system close to K_0
        let set = classify_set(&[(ExtReal::Finite(-2.0), ExtReal::Finite(2.0))]).unwrap();
        let div = Divisor::new(
            &set,
            vec![
                GapPoint { mu: ExtReal::NegInf, s: false },
                GapPoint { mu: ExtReal::PosInf, s: false },
            ],
            Some(0.0),
        )
        .unwrap();
        let sys =
            build_system(set, div, Normalization::new(0.0, 0.01).unwrap()).unwrap();
        let d = system_distance(
            &AnySystem::Regular(sys),
            &AnySystem::Singular(SingularSystem::from_real(0.0)),
        )
        .unwrap();
        assert!(d < 0.2, "distance {d}");
    }
}
