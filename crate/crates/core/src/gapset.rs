//! Finite-gap subsets of the real line, divisors on their gaps, and the
//! distinguished Herglotz function h0 attached to a set-divisor pair,
//! together with its measure-theoretic representation data.

use num_complex::Complex64;

use crate::error::{CoreError, Result};
use crate::ext::ExtReal;
use crate::quad;

/// Topological type of the set, by the number of unbounded components of
/// its complement in the extended reals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetCase {
    /// Complement has two unbounded components; the set is unbounded on
    /// both sides (Dirac type).
    TwoUnbounded,
    /// Exactly one unbounded complement component (-inf, d0); the set is
    /// a half-line type set (Schroedinger type).
    OneUnbounded,
    /// Compact set; both (-inf, d0) and (c_last, inf) are gaps
    /// (Jacobi type).
    Compact,
}

/// A maximal open interval of the complement.
#[derive(Debug, Clone, Copy)]
pub struct Gap {
    pub left: ExtReal,
    pub right: ExtReal,
}

impl Gap {
    pub fn contains_closed(&self, mu: ExtReal) -> bool {
        self.left <= mu && mu <= self.right
    }

    pub fn is_unbounded(&self) -> bool {
        self.left.is_infinite() || self.right.is_infinite()
    }
}

/// A finite union of closed intervals ("bands") with finitely many gaps.
#[derive(Debug, Clone)]
pub struct FiniteGapSet {
    case: SetCase,
    bands: Vec<(ExtReal, ExtReal)>,
    gaps: Vec<Gap>,
}

/// Classify a list of bands into a validated `FiniteGapSet`.
///
/// Bands must be disjoint, nondegenerate, and given with finite endpoints
/// except that the first may extend to -inf and the last to +inf.  A set
/// unbounded only to the left is rejected: one-sided sets are supported in
/// the half-line orientation [d0, ...) only.
pub fn classify_set(bands: &[(ExtReal, ExtReal)]) -> Result<FiniteGapSet> {
    if bands.is_empty() {
        return Err(CoreError::InvalidInput("at least one band is required".into()));
    }
    let mut sorted: Vec<(ExtReal, ExtReal)> = bands.to_vec();
    sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    for (i, &(lo, hi)) in sorted.iter().enumerate() {
        if !(lo < hi) {
            return Err(CoreError::InvalidInput(format!(
                "band {i} is degenerate or reversed: ({lo}, {hi})"
            )));
        }
        if matches!(lo, ExtReal::NegInf) && i != 0 {
            return Err(CoreError::InvalidInput(
                "only the first band may extend to -inf".into(),
            ));
        }
        if matches!(hi, ExtReal::PosInf) && i != sorted.len() - 1 {
            return Err(CoreError::InvalidInput(
                "only the last band may extend to +inf".into(),
            ));
        }
        if matches!(lo, ExtReal::PosInf) || matches!(hi, ExtReal::NegInf) {
            return Err(CoreError::InvalidInput("band endpoint has the wrong sign of infinity".into()));
        }
        if let Some(x) = lo.finite() {
            if !x.is_finite() {
                return Err(CoreError::InvalidInput("band endpoint is not finite".into()));
            }
        }
        if let Some(x) = hi.finite() {
            if !x.is_finite() {
                return Err(CoreError::InvalidInput("band endpoint is not finite".into()));
            }
        }
    }
    for w in sorted.windows(2) {
        let (_, hi) = w[0];
        let (lo, _) = w[1];
        if !(hi < lo) {
            return Err(CoreError::InvalidInput(format!(
                "bands must be separated by open gaps; got touching or overlapping bands near {hi}"
            )));
        }
    }
    let left_unbounded = matches!(sorted.first().unwrap().0, ExtReal::NegInf);
    let right_unbounded = matches!(sorted.last().unwrap().1, ExtReal::PosInf);
    let case = match (left_unbounded, right_unbounded) {
        (true, true) => SetCase::TwoUnbounded,
        (false, true) => SetCase::OneUnbounded,
        (false, false) => SetCase::Compact,
        (true, false) => {
            return Err(CoreError::InvalidInput(
                "sets unbounded only to the left are not supported; mirror the data first".into(),
            ))
        }
    };
    let mut gaps = Vec::new();
    if !left_unbounded {
        gaps.push(Gap { left: ExtReal::NegInf, right: sorted[0].0 });
    }
    for w in sorted.windows(2) {
        gaps.push(Gap { left: w[0].1, right: w[1].0 });
    }
    if !right_unbounded {
        gaps.push(Gap { left: sorted.last().unwrap().1, right: ExtReal::PosInf });
    }
    Ok(FiniteGapSet { case, bands: sorted, gaps })
}

impl FiniteGapSet {
    pub fn case(&self) -> SetCase {
        self.case
    }

    pub fn bands(&self) -> &[(ExtReal, ExtReal)] {
        &self.bands
    }

    pub fn gaps(&self) -> &[Gap] {
        &self.gaps
    }

    /// Number of bounded gaps.
    pub fn bounded_gap_count(&self) -> usize {
        self.gaps.iter().filter(|g| !g.is_unbounded()).count()
    }

    /// All finite band endpoints.
    pub fn finite_endpoints(&self) -> Vec<f64> {
        let mut v = Vec::new();
        for &(lo, hi) in &self.bands {
            if let Some(x) = lo.finite() {
                v.push(x);
            }
            if let Some(x) = hi.finite() {
                v.push(x);
            }
        }
        v
    }

    /// A magnitude scale for tolerances: 1 + largest |finite endpoint|.
    pub fn scale(&self) -> f64 {
        1.0 + self
            .finite_endpoints()
            .iter()
            .fold(0.0f64, |m, &x| m.max(x.abs()))
    }

    /// Index of the band whose open interior contains t, if any.
    pub fn band_containing(&self, t: f64) -> Option<usize> {
        let te = ExtReal::Finite(t);
        self.bands
            .iter()
            .position(|&(lo, hi)| lo < te && te < hi)
    }

    /// Index of the gap whose open interval contains t, if any.
    pub fn gap_containing(&self, t: f64) -> Option<usize> {
        let te = ExtReal::Finite(t);
        self.gaps
            .iter()
            .position(|g| g.left < te && te < g.right)
    }
}

/// Divisor datum on a single gap: a point of the closed gap plus the sign
/// bit saying whether the associated pole belongs to m+ (s = true) or to
/// m- (s = false).  The bit is normalized to false whenever the point
/// carries no mass (gap endpoint or infinite).
#[derive(Debug, Clone, Copy)]
pub struct GapPoint {
    pub mu: ExtReal,
    pub s: bool,
}

/// A full divisor: one `GapPoint` per gap (in gap order), plus the extra
/// torus angle parameter g in [-1/2, 1/2] that exists exactly for compact
/// sets whose divisor puts both unbounded-gap points at infinity.
#[derive(Debug, Clone)]
pub struct Divisor {
    pub points: Vec<GapPoint>,
    pub g: Option<f64>,
}

impl Divisor {
    pub fn new(set: &FiniteGapSet, mut points: Vec<GapPoint>, g: Option<f64>) -> Result<Divisor> {
        if points.len() != set.gaps().len() {
            return Err(CoreError::InvalidInput(format!(
                "divisor has {} points but the set has {} gaps",
                points.len(),
                set.gaps().len()
            )));
        }
        for (j, (pt, gap)) in points.iter_mut().zip(set.gaps()).enumerate() {
            if !gap.contains_closed(pt.mu) {
                return Err(CoreError::InvalidInput(format!(
                    "divisor point {} = {} lies outside its closed gap ({}, {})",
                    j, pt.mu, gap.left, gap.right
                )));
            }
            if let ExtReal::Finite(x) = pt.mu {
                if !x.is_finite() {
                    return Err(CoreError::InvalidInput(format!("divisor point {j} is not finite")));
                }
            }
            // no mass at endpoints or infinity: normalize the side bit
            if pt.mu.is_infinite() || pt.mu == gap.left || pt.mu == gap.right {
                pt.s = false;
            }
        }
        let needs_g = divisor_needs_g(set, &points);
        match (needs_g, g) {
            (true, None) => {
                return Err(CoreError::InvalidInput(
                    "g is required for a compact set with both unbounded-gap points at infinity".into(),
                ))
            }
            (false, Some(_)) => {
                return Err(CoreError::InvalidInput(
                    "g is only meaningful for a compact set with both unbounded-gap points at infinity".into(),
                ))
            }
            (true, Some(gv)) => {
                if !(-0.5..=0.5).contains(&gv) {
                    return Err(CoreError::InvalidInput(format!(
                        "g = {gv} outside [-1/2, 1/2]"
                    )));
                }
            }
            (false, None) => {}
        }
        Ok(Divisor { points, g })
    }
}

pub fn divisor_needs_g(set: &FiniteGapSet, points: &[GapPoint]) -> bool {
    set.case() == SetCase::Compact
        && matches!(points.first().map(|p| p.mu), Some(ExtReal::NegInf))
        && matches!(points.last().map(|p| p.mu), Some(ExtReal::PosInf))
}

/// Where to evaluate logs of linear factors: in the open upper half plane,
/// or on the real line understood as a limit from above.
#[derive(Debug, Clone, Copy)]
pub enum Zpt {
    Upper(Complex64),
    Boundary(f64),
}

#[derive(Debug, Clone, Copy)]
enum Orient {
    /// factor (p - z)
    Lower,
    /// factor (z - p)
    Upper,
}

#[derive(Debug, Clone, Copy)]
struct LogFactor {
    p: f64,
    weight: f64,
    orient: Orient,
}

/// Principal log of (p - z) continued from the upper half plane.
fn log_lower(p: f64, z: Zpt) -> Complex64 {
    match z {
        Zpt::Upper(z) => (Complex64::new(p, 0.0) - z).ln(),
        Zpt::Boundary(t) => {
            if p > t {
                Complex64::new((p - t).ln(), 0.0)
            } else {
                Complex64::new((t - p).ln(), -std::f64::consts::PI)
            }
        }
    }
}

/// Principal log of (z - p) continued from the upper half plane.
fn log_upper(p: f64, z: Zpt) -> Complex64 {
    match z {
        Zpt::Upper(z) => (z - Complex64::new(p, 0.0)).ln(),
        Zpt::Boundary(t) => {
            if t > p {
                Complex64::new((t - p).ln(), 0.0)
            } else {
                Complex64::new((p - t).ln(), std::f64::consts::PI)
            }
        }
    }
}

fn eval_factor(f: &LogFactor, z: Zpt) -> Complex64 {
    match f.orient {
        Orient::Lower => f.weight * log_lower(f.p, z),
        Orient::Upper => f.weight * log_upper(f.p, z),
    }
}

/// The case normalization constant in front of the product formula:
/// 2 for two-sided sets, (1 + d0 - mu0) for half-line sets, and
/// (1 + d0 - mu-)(1 + mu+ - c_last) for compact sets, with factors at
/// infinite divisor points replaced by 1.
fn case_constant(set: &FiniteGapSet, div: &Divisor) -> f64 {
    match set.case() {
        SetCase::TwoUnbounded => 2.0,
        SetCase::OneUnbounded => {
            let d0 = set.gaps()[0].right.finite().unwrap();
            match div.points[0].mu {
                ExtReal::Finite(mu0) => 1.0 + d0 - mu0,
                _ => 1.0,
            }
        }
        SetCase::Compact => {
            let d0 = set.gaps().first().unwrap().right.finite().unwrap();
            let clast = set.gaps().last().unwrap().left.finite().unwrap();
            let f1 = match div.points.first().unwrap().mu {
                ExtReal::Finite(mu) => 1.0 + d0 - mu,
                _ => 1.0,
            };
            let f2 = match div.points.last().unwrap().mu {
                ExtReal::Finite(mu) => 1.0 + mu - clast,
                _ => 1.0,
            };
            f1 * f2
        }
    }
}

/// Assemble log h0 as  const + sum of weighted principal logs of oriented
/// linear factors.  The orientation and the imaginary constant are chosen
/// per case so that the principal sum is the Herglotz branch exactly, with
/// no posterior correction.  `skip_gap` drops the divisor-pole factor of
/// the given gap (used for residues); the returned bool says whether the
/// dropped factor was of (z - p) orientation, which flips the sign of the
/// resulting residue.
fn log_h0_impl(
    set: &FiniteGapSet,
    div: &Divisor,
    z: Zpt,
    skip_gap: Option<usize>,
) -> Result<(Complex64, bool)> {
    let mut factors: Vec<LogFactor> = Vec::new();
    let mut c_im = 0.0f64;
    let mut skipped_upper = false;
    let c_re = case_constant(set, div).ln();
    match set.case() {
        SetCase::TwoUnbounded => {
            c_im = std::f64::consts::FRAC_PI_2;
        }
        SetCase::OneUnbounded => {
            let d0 = set.gaps()[0].right.finite().unwrap();
            factors.push(LogFactor { p: d0, weight: 0.5, orient: Orient::Lower });
            match div.points[0].mu {
                ExtReal::Finite(mu0) => {
                    if skip_gap != Some(0) {
                        factors.push(LogFactor { p: mu0, weight: -1.0, orient: Orient::Lower });
                    }
                }
                _ => {
                    c_im = std::f64::consts::PI;
                }
            }
        }
        SetCase::Compact => {
            let d0 = set.gaps().first().unwrap().right.finite().unwrap();
            let clast = set.gaps().last().unwrap().left.finite().unwrap();
            factors.push(LogFactor { p: d0, weight: 0.5, orient: Orient::Upper });
            factors.push(LogFactor { p: clast, weight: 0.5, orient: Orient::Upper });
            // an unbounded-gap pole factor 1/(mu - z) contributes an extra
            // i pi in the limit of infinite mu, one per infinite point
            match div.points.first().unwrap().mu {
                ExtReal::Finite(mu) => {
                    if skip_gap != Some(0) {
                        factors.push(LogFactor { p: mu, weight: -1.0, orient: Orient::Lower });
                    }
                }
                _ => c_im += std::f64::consts::PI,
            }
            match div.points.last().unwrap().mu {
                ExtReal::Finite(mu) => {
                    if skip_gap != Some(set.gaps().len() - 1) {
                        factors.push(LogFactor { p: mu, weight: -1.0, orient: Orient::Upper });
                    } else {
                        skipped_upper = true;
                    }
                }
                _ => c_im += std::f64::consts::PI,
            }
        }
    }
    // bounded gaps contribute sqrt((c - z)(d - z)) / (mu - z)
    for (j, gap) in set.gaps().iter().enumerate() {
        if gap.is_unbounded() {
            continue;
        }
        let c = gap.left.finite().unwrap();
        let d = gap.right.finite().unwrap();
        factors.push(LogFactor { p: c, weight: 0.5, orient: Orient::Lower });
        factors.push(LogFactor { p: d, weight: 0.5, orient: Orient::Lower });
        if skip_gap != Some(j) {
            let mu = div.points[j].mu.finite().expect("bounded gap point is finite");
            factors.push(LogFactor { p: mu, weight: -1.0, orient: Orient::Lower });
        }
    }
    // merge coincident factors so endpoint divisors cancel exactly and do
    // not produce log(0) at boundary evaluations
    factors.sort_by(|a, b| a.p.partial_cmp(&b.p).unwrap());
    let mut merged: Vec<LogFactor> = Vec::new();
    for f in factors {
        if let Some(last) = merged.last_mut() {
            if last.p == f.p && matches!((last.orient, f.orient), (Orient::Lower, Orient::Lower) | (Orient::Upper, Orient::Upper)) {
                last.weight += f.weight;
                continue;
            }
        }
        merged.push(f);
    }
    let mut total = Complex64::new(c_re, c_im);
    for f in &merged {
        if f.weight == 0.0 {
            continue;
        }
        if let Zpt::Boundary(t) = z {
            if t == f.p {
                return Err(CoreError::Domain(format!(
                    "log h0 evaluated at a singular boundary point t = {t}"
                )));
            }
        }
        total += eval_factor(f, z);
    }
    Ok((total, skipped_upper))
}

/// log h0 at z (upper half plane or boundary-from-above), Herglotz branch.
pub fn log_h0(set: &FiniteGapSet, div: &Divisor, z: Zpt) -> Result<Complex64> {
    let (v, _) = log_h0_impl(set, div, z, None)?;
    Ok(v)
}

/// Evaluate h0 at a point of the open upper half plane.
pub fn h0_eval(set: &FiniteGapSet, div: &Divisor, z: Complex64) -> Result<Complex64> {
    if !(z.im > 0.0) {
        return Err(CoreError::Domain(format!(
            "h0 evaluated at z = {z} outside the open upper half plane"
        )));
    }
    Ok(log_h0(set, div, Zpt::Upper(z))?.exp())
}

/// The intervals on which the exponential-representation density is
/// constant and nonzero, as (lo, hi, value) with value in {1/2, 1}.
pub fn krein_intervals(set: &FiniteGapSet, div: &Divisor) -> Vec<(ExtReal, ExtReal, f64)> {
    let mut out = Vec::new();
    for &(lo, hi) in set.bands() {
        out.push((lo, hi, 0.5));
    }
    for (gap, pt) in set.gaps().iter().zip(&div.points) {
        if pt.mu < gap.right {
            out.push((pt.mu, gap.right, 1.0));
        }
    }
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    out
}

/// The step density of the exponential Herglotz representation of h0:
/// 1/2 on the bands, the indicator of (mu_j, right gap edge) on gap j
/// (with the right edge read as d0 resp. +inf on the unbounded gaps),
/// and 0 elsewhere.  At jump points the two-sided mean is returned.
pub fn krein_xi(set: &FiniteGapSet, div: &Divisor, t: f64) -> Result<f64> {
    if !t.is_finite() {
        return Err(CoreError::Domain("krein_xi wants a finite t".into()));
    }
    let lim = |eps: f64| -> f64 {
        let te = ExtReal::Finite(t + eps);
        for &(lo, hi, v) in &krein_intervals(set, div) {
            if lo < te && te < hi {
                return v;
            }
        }
        0.0
    };
    let h = 1e-9 * (1.0 + t.abs());
    Ok(0.5 * (lim(h) + lim(-h)))
}

/// Independent evaluation of h0 through the exponential Herglotz
/// representation: per-interval closed-form integrals of the step density
/// against the Herglotz kernel, exponentiated and scaled by the case
/// normalization constant.  Exercises completely different branch
/// bookkeeping than `h0_eval` and serves as its oracle.
pub fn h0_log_oracle(set: &FiniteGapSet, div: &Divisor, z: Complex64) -> Result<Complex64> {
    if !(z.im > 0.0) {
        return Err(CoreError::Domain(format!(
            "h0 oracle evaluated at z = {z} outside the open upper half plane"
        )));
    }
    let mut t_sum = Complex64::new(0.0, 0.0);
    for &(lo, hi, v) in &krein_intervals(set, div) {
        let piece = match (lo, hi) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => {
                (Complex64::new(b, 0.0) - z).ln() - (Complex64::new(a, 0.0) - z).ln()
            }
            (ExtReal::NegInf, ExtReal::Finite(b)) => {
                (Complex64::new(b, 0.0) - z).ln() + Complex64::new(0.0, std::f64::consts::PI)
            }
            (ExtReal::Finite(a), ExtReal::PosInf) => -((Complex64::new(a, 0.0) - z).ln()),
            _ => {
                return Err(CoreError::Numerical(
                    "doubly infinite constancy interval in the representation".into(),
                ))
            }
        };
        t_sum += v * piece;
    }
    Ok(case_constant(set, div) * t_sum.exp())
}

/// Representation data of h0 as a Herglotz function:
/// h0(z) = a + integral of (1 + t z)/(t - z) d nu with nu a positive
/// measure on the extended reals.
#[derive(Debug, Clone)]
pub struct RepresentationData {
    /// a = Re h0(i)
    pub a: f64,
    /// total mass nu(R union {inf}) = Im h0(i)
    pub nu_total: f64,
    /// nu-mass at each divisor point, one entry per gap (zero for
    /// endpoint or infinite divisor points)
    pub weights: Vec<f64>,
    /// nu({inf}); equals 1 exactly for a compact set with both
    /// unbounded-gap points at infinity, else 0
    pub nu_infinity: f64,
}

fn residue_weight(set: &FiniteGapSet, div: &Divisor, j: usize, mu: f64) -> Result<f64> {
    let (l, skipped_upper) = log_h0_impl(set, div, Zpt::Boundary(mu), Some(j))?;
    let val = l.exp();
    let sign = if skipped_upper { -1.0 } else { 1.0 };
    let w = sign * val.re / (1.0 + mu * mu);
    if val.im.abs() > 1e-6 * (1.0 + val.norm()) || w < -1e-12 {
        return Err(CoreError::Numerical(format!(
            "residue at mu = {mu} did not come out positive real: {val}"
        )));
    }
    Ok(w.max(0.0))
}

fn ladder_weight(set: &FiniteGapSet, div: &Divisor, mu: f64, edge_dist: f64) -> Result<f64> {
    // w = lim y->0+ Im(y h0(mu + i y)) / (1 + mu^2), Richardson-accelerated
    // on a geometric ladder; the ladder must sit well below the distance to
    // the nearest square-root branch point
    let mut vals = Vec::new();
    let mut y = 1e-3_f64.min(0.1 * edge_dist);
    for _ in 0..5 {
        let h = h0_eval(set, div, Complex64::new(mu, y))?;
        vals.push((Complex64::new(0.0, y) * h).im / (1.0 + mu * mu));
        y /= 10.0;
    }
    let mut acc = vals.clone();
    for k in 1..acc.len() {
        for i in (k..acc.len()).rev() {
            acc[i] = (10.0f64.powi(k as i32) * acc[i] - acc[i - 1]) / (10.0f64.powi(k as i32) - 1.0);
        }
    }
    Ok(acc.last().copied().unwrap().max(0.0))
}

/// Compute the representation data of h0 for a set-divisor pair.
pub fn representation_data(set: &FiniteGapSet, div: &Divisor) -> Result<RepresentationData> {
    let hi = h0_eval(set, div, Complex64::new(0.0, 1.0))?;
    let mut weights = Vec::with_capacity(set.gaps().len());
    for (j, (gap, pt)) in set.gaps().iter().zip(&div.points).enumerate() {
        let w = match pt.mu {
            ExtReal::Finite(mu) if pt.mu != gap.left && pt.mu != gap.right => {
                let edge_dist = [gap.left, gap.right]
                    .iter()
                    .filter_map(|e| e.finite().map(|x| (x - mu).abs()))
                    .fold(f64::INFINITY, f64::min);
                if edge_dist < 1e-8 * set.scale() {
                    // the closed form loses accuracy exactly where the mass
                    // vanishes; use the defining limit there
                    ladder_weight(set, div, mu, edge_dist)?
                } else {
                    residue_weight(set, div, j, mu)?
                }
            }
            _ => 0.0,
        };
        weights.push(w);
    }
    let nu_infinity = if divisor_needs_g(set, &div.points) { 1.0 } else { 0.0 };
    Ok(RepresentationData {
        a: hi.re,
        nu_total: hi.im,
        weights,
        nu_infinity,
    })
}

/// Boundary density Im h0(t + i0) at an interior point of a band.
pub fn boundary_density(set: &FiniteGapSet, div: &Divisor, t: f64) -> Result<f64> {
    if set.band_containing(t).is_none() {
        return Err(CoreError::Domain(format!(
            "boundary density requested at t = {t}, not interior to a band"
        )));
    }
    Ok(log_h0(set, div, Zpt::Boundary(t))?.exp().im)
}

/// The absolutely continuous mass of nu:
/// integral over the set of Im h0(t + i0) / (pi (1 + t^2)) dt.
/// Inverse-square-root band edge singularities are removed by square-root
/// substitutions; unbounded bands are folded by t -> 1/t.
pub fn ac_mass(set: &FiniteGapSet, div: &Divisor, tol: f64) -> Result<f64> {
    let dens = |t: f64| -> f64 {
        match log_h0(set, div, Zpt::Boundary(t)) {
            Ok(l) => {
                let im = l.exp().im;
                im.max(0.0) / (std::f64::consts::PI * (1.0 + t * t))
            }
            Err(_) => 0.0,
        }
    };
    let mut total = 0.0;
    for &(lo, hi) in set.bands() {
        match (lo, hi) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => {
                let m = 0.5 * (a + b);
                // left half with t = a + u^2, right half with t = b - u^2
                let ul = (m - a).sqrt();
                total += quad::integrate(&|u| 2.0 * u * dens(a + u * u), 0.0, ul, tol);
                let ur = (b - m).sqrt();
                total += quad::integrate(&|u| 2.0 * u * dens(b - u * u), 0.0, ur, tol);
            }
            (ExtReal::Finite(a), ExtReal::PosInf) => {
                let cut = a + 2.0;
                let ul = (cut - a).sqrt();
                total += quad::integrate(&|u| 2.0 * u * dens(a + u * u), 0.0, ul, tol);
                // tail: t = cut + s/(1-s), s in (0,1)
                total += quad::integrate(
                    &|s: f64| {
                        if s >= 1.0 {
                            return 0.0;
                        }
                        let t = cut + s / (1.0 - s);
                        dens(t) / ((1.0 - s) * (1.0 - s))
                    },
                    0.0,
                    1.0,
                    tol,
                );
            }
            (ExtReal::NegInf, ExtReal::Finite(b)) => {
                let cut = b - 2.0;
                let ur = (b - cut).sqrt();
                total += quad::integrate(&|u| 2.0 * u * dens(b - u * u), 0.0, ur, tol);
                total += quad::integrate(
                    &|s: f64| {
                        if s >= 1.0 {
                            return 0.0;
                        }
                        let t = cut - s / (1.0 - s);
                        dens(t) / ((1.0 - s) * (1.0 - s))
                    },
                    0.0,
                    1.0,
                    tol,
                );
            }
            _ => {
                return Err(CoreError::InvalidInput("band cannot be doubly unbounded".into()));
            }
        }
    }
    Ok(total)
}
