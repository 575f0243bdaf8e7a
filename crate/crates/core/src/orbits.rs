//! The Moebius group action on reflectionless systems and the per-case
//! normal forms of its orbits, together with the twisted-shift matrices of
//! the Jacobi correspondence.

use num_complex::Complex64;

use crate::error::{CoreError, Result};
use crate::ext::ExtReal;
use crate::gapset::SetCase;
use crate::jacobi::{strip_coefficients, JacobiWindow};
use crate::sphere::{herglotz_metric, HerglotzMap, MoebiusElement, METRIC_GRID_N};
use crate::systems::{
    asymptotics, build_system, extract_parameters, laurent_coeffs, laurent_radius, m_at_infinity,
    AnySystem, ExtractionOutcome, Normalization, ReflectionlessSystem, SingularSystem,
};

/// Element of the dilation-translation subgroup: w -> c^2 w + a, c > 0.
#[derive(Debug, Clone, Copy)]
pub struct GElement {
    pub c: f64,
    pub a: f64,
}

impl GElement {
    pub fn new(c: f64, a: f64) -> Result<GElement> {
        if !(c > 0.0) || !c.is_finite() || !a.is_finite() {
            return Err(CoreError::InvalidInput(format!(
                "group element requires c > 0 and finite a, got ({c}, {a})"
            )));
        }
        Ok(GElement { c, a })
    }

    /// From the multiplier c^2 directly.
    pub fn from_c2(c2: f64, a: f64) -> Result<GElement> {
        if !(c2 > 0.0) {
            return Err(CoreError::InvalidInput(format!(
                "multiplier must be positive, got {c2}"
            )));
        }
        GElement::new(c2.sqrt(), a)
    }

    pub fn to_moebius(self) -> MoebiusElement {
        MoebiusElement::new(self.c, self.a / self.c, 0.0, 1.0 / self.c).unwrap()
    }

    pub fn apply_value(self, w: Complex64) -> Complex64 {
        self.c * self.c * w + self.a
    }
}

/// Which normal form a representative realizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RepresentativeKind {
    Dirac,
    Schroedinger,
    Jacobi,
}

/// A normalizing transform together with the normal-form system it
/// produces.
#[derive(Debug, Clone)]
pub struct OrbitRepresentative {
    pub transform: MoebiusElement,
    pub system: ReflectionlessSystem,
    pub kind: RepresentativeKind,
}

/// Shift-normal-form data of a Jacobi-type orbit: the circle parameter t
/// and the recovered right-half-line coefficient window.
#[derive(Debug, Clone)]
pub struct JacobiOrbitData {
    pub t: f64,
    pub coefficients: JacobiWindow,
    pub transform: MoebiusElement,
}

/// Act on a system by a Moebius transformation of its m functions:
/// m+ -> A(m+) and -m- -> A(-m-).  The result is re-parametrized over the
/// same gap set.
pub fn act(a: &MoebiusElement, sys: &AnySystem) -> Result<AnySystem> {
    match sys {
        AnySystem::Singular(s) => {
            Ok(AnySystem::Singular(SingularSystem::new(a.apply(s.value))?))
        }
        AnySystem::Regular(s) => {
            let f = s.m_plus_map().transformed(a);
            match extract_parameters(&f, s.set())? {
                ExtractionOutcome::Regular { divisor, norm } => Ok(AnySystem::Regular(
                    build_system(s.set().clone(), divisor, norm)?,
                )),
                ExtractionOutcome::Singular(_) => Err(CoreError::Inconsistent(
                    "transformed m function degenerated to a constant".into(),
                )),
            }
        }
    }
}

/// Act by a subgroup element.  The divisor is unchanged (the subgroup
/// fixes infinity, hence the gap poles of h), so only the normalization
/// moves: (A+, D) -> (c^2 A+ + a, c^2 D).
pub fn act_g(g: GElement, sys: &ReflectionlessSystem) -> Result<ReflectionlessSystem> {
    let n = sys.normalization();
    build_system(
        sys.set().clone(),
        sys.divisor().clone(),
        Normalization::new(g.c * g.c * n.a_plus + g.a, g.c * g.c * n.d)?,
    )
}

/// Normal form over a two-sided unbounded set: the unique subgroup element
/// taking m+(infinity) (and then automatically m-(infinity)) to i.
pub fn dirac_representative(sys: &ReflectionlessSystem) -> Result<OrbitRepresentative> {
    if sys.set().case() != SetCase::TwoUnbounded {
        return Err(CoreError::CaseMismatch(format!(
            "this normal form needs a two-sided unbounded set, got {:?}",
            sys.set().case()
        )));
    }
    let w = m_at_infinity(&sys.m_plus_map(), sys.set().scale())?;
    if !(w.im > 0.0) {
        return Err(CoreError::Numerical(format!(
            "m+(infinity) = {w} not in the upper half plane"
        )));
    }
    let c2 = 1.0 / w.im;
    let g = GElement::from_c2(c2, -c2 * w.re)?;
    let normalized = act_g(g, sys)?;
    for map in [normalized.m_plus_map(), normalized.m_minus_map()] {
        let v = m_at_infinity(&map, normalized.set().scale())?;
        if (v - Complex64::new(0.0, 1.0)).norm() > 1e-7 {
            return Err(CoreError::NormalForm(format!(
                "normalized m(infinity) = {v} is not i"
            )));
        }
    }
    Ok(OrbitRepresentative {
        transform: g.to_moebius(),
        system: normalized,
        kind: RepresentativeKind::Dirac,
    })
}

fn unbounded_left_gap(sys: &ReflectionlessSystem) -> Option<usize> {
    sys.set()
        .gaps()
        .iter()
        .position(|g| g.left == ExtReal::NegInf)
}

/// The finite real limit m+(−infinity) along the left unbounded gap, from
/// the measure representation (h0 vanishes there).
fn m_plus_at_minus_infinity(sys: &ReflectionlessSystem) -> f64 {
    let n = sys.normalization();
    let rep = sys.representation();
    let mut acc = -0.5 * rep.a;
    for (p, &w) in sys.divisor().points.iter().zip(&rep.weights) {
        if w == 0.0 {
            continue;
        }
        let mu = p.mu.finite().expect("positive weight at finite point");
        let sgn = if p.s { 0.5 } else { -0.5 };
        acc -= sgn * w * mu;
    }
    n.a_plus + n.d * acc
}

/// Normal form over a one-sided unbounded set: parameters
/// (mu_0, A+, D) = (-infinity, 0, 1).
pub fn schrodinger_representative(sys: &ReflectionlessSystem) -> Result<OrbitRepresentative> {
    if sys.set().case() != SetCase::OneUnbounded {
        return Err(CoreError::CaseMismatch(format!(
            "this normal form needs a one-sided unbounded set, got {:?}",
            sys.set().case()
        )));
    }
    let j0 = unbounded_left_gap(sys)
        .ok_or_else(|| CoreError::Inconsistent("missing unbounded gap".into()))?;
    let mu0 = sys.divisor().points[j0].mu;
    let (b1, intermediate) = if mu0 == ExtReal::NegInf {
        (MoebiusElement::identity(), sys.clone())
    } else {
        // send the finite limit m+(-infinity) to infinity, creating the
        // pole at the far end of the gap
        let m_inf = m_plus_at_minus_infinity(sys);
        let b1 = MoebiusElement::new(0.0, -1.0, 1.0, -m_inf)?;
        let f = sys.m_plus_map().transformed(&b1);
        match extract_parameters(&f, sys.set())? {
            ExtractionOutcome::Regular { divisor, norm } => {
                if divisor.points[j0].mu != ExtReal::NegInf {
                    return Err(CoreError::NormalForm(format!(
                        "gap pole did not move to -infinity (mu_0 = {})",
                        divisor.points[j0].mu
                    )));
                }
                (b1, build_system(sys.set().clone(), divisor, norm)?)
            }
            ExtractionOutcome::Singular(_) => {
                return Err(CoreError::Inconsistent(
                    "transformed m function degenerated to a constant".into(),
                ))
            }
        }
    };
    let n = intermediate.normalization();
    let b2 = GElement::from_c2(1.0 / n.d, -n.a_plus / n.d)?;
    let normalized = build_system(
        intermediate.set().clone(),
        intermediate.divisor().clone(),
        Normalization::new(0.0, 1.0)?,
    )?;
    Ok(OrbitRepresentative {
        transform: b2.to_moebius().compose(&b1),
        system: normalized,
        kind: RepresentativeKind::Schroedinger,
    })
}

/// Laurent data (b0, a, c, f_{-2}) of a map known to be analytic at
/// infinity with singularities inside the given radius.
pub(crate) fn normal_form_coeffs(f: &HerglotzMap, radius: f64) -> Result<[f64; 4]> {
    let mut r = radius;
    let mut last = None;
    for _ in 0..9 {
        let co = laurent_coeffs(f, r, -2, 4)?;
        let high: f64 = (2..=4)
            .map(|n| co[(n + 2) as usize].norm() * r.powi(n))
            .sum();
        let scale = 1.0 + co[3].norm() * r + co[2].norm() + co[1].norm() / r;
        if high < 1e-8 * scale {
            return Ok([co[3].re, co[2].re, co[1].re, co[0].re]);
        }
        last = Some(CoreError::Numerical(format!(
            "laurent tail does not decay on |z| = {r}"
        )));
        r *= 2.0;
    }
    Err(last.unwrap())
}

const NF_TOL: f64 = 1e-7;
const NF_SNAP: f64 = 1e-8;

/// Normal form over a compact set: m+(z) = -1/z + O(1/z^3).
pub fn jacobi_representative(sys: &ReflectionlessSystem) -> Result<OrbitRepresentative> {
    if sys.set().case() != SetCase::Compact {
        return Err(CoreError::CaseMismatch(format!(
            "this normal form needs a compact set, got {:?}",
            sys.set().case()
        )));
    }
    let mus: Vec<ExtReal> = sys.divisor().points.iter().map(|p| p.mu).collect();
    let r0 = laurent_radius(sys.set(), &mus);
    let f = sys.m_plus_map();
    let [b0, a, c, f2] = normal_form_coeffs(&f, r0)?;
    if b0.abs() < NF_SNAP && a.abs() < NF_SNAP && (c + 1.0).abs() < NF_SNAP && f2.abs() < NF_SNAP {
        return Ok(OrbitRepresentative {
            transform: MoebiusElement::identity(),
            system: sys.clone(),
            kind: RepresentativeKind::Jacobi,
        });
    }
    let (pre, f_mid, b_mid, a_mid) = if b0.abs() < NF_SNAP {
        // no linear term: translation then inversion produces one
        let m1 = MoebiusElement::inversion().compose(&MoebiusElement::translation(-a));
        let f1 = f.transformed(&m1);
        let asy1 = asymptotics(&f1, sys.set(), Some(r0))?;
        (m1, f1, asy1.b0, asy1.a)
    } else {
        (MoebiusElement::identity(), f.clone(), b0, a)
    };
    if !(b_mid > 1e-12) {
        return Err(CoreError::NormalForm(format!(
            "no positive linear term reachable (b = {b_mid})"
        )));
    }
    // kill the constant, invert (which clears the 1/z^2 slot), rescale
    let m2 = MoebiusElement::dilation(b_mid)?
        .compose(&MoebiusElement::inversion())
        .compose(&MoebiusElement::translation(-a_mid));
    let total = m2.compose(&pre);
    let f_fin = f_mid.transformed(&m2);
    let system = match extract_parameters(&f_fin, sys.set())? {
        ExtractionOutcome::Regular { divisor, norm } => {
            build_system(sys.set().clone(), divisor, norm)?
        }
        ExtractionOutcome::Singular(_) => {
            return Err(CoreError::Inconsistent(
                "transformed m function degenerated to a constant".into(),
            ))
        }
    };
    let mus: Vec<ExtReal> = system.divisor().points.iter().map(|p| p.mu).collect();
    let [b0, a, c, f2] = normal_form_coeffs(&system.m_plus_map(), laurent_radius(system.set(), &mus))?;
    if b0.abs() > NF_TOL || a.abs() > NF_TOL || (c + 1.0).abs() > NF_TOL || f2.abs() > NF_TOL {
        return Err(CoreError::NormalForm(format!(
            "normal-form coefficients off target: b0 = {b0}, a = {a}, c = {c}, z^-2 = {f2}"
        )));
    }
    Ok(OrbitRepresentative {
        transform: total,
        system,
        kind: RepresentativeKind::Jacobi,
    })
}

/// Shift data of a Jacobi-type orbit: normalize to
/// m+(z) = b z - 1/z + O(1/z^2) by a translation and dilation, read b,
/// recover the right-half-line coefficients from m0 = m+ - b z, take the
/// initial off-diagonal a0 from the left-side slope, and set t = b a0^2.
pub fn jacobi_orbit_data(sys: &ReflectionlessSystem, window: usize) -> Result<JacobiOrbitData> {
    if sys.set().case() != SetCase::Compact {
        return Err(CoreError::CaseMismatch(format!(
            "shift data needs a compact set, got {:?}",
            sys.set().case()
        )));
    }
    let mus: Vec<ExtReal> = sys.divisor().points.iter().map(|p| p.mu).collect();
    let r0 = laurent_radius(sys.set(), &mus);
    let f = sys.m_plus_map();
    let asy = asymptotics(&f, sys.set(), Some(r0))?;
    if !(asy.c < 0.0) {
        return Err(CoreError::Inconsistent(format!(
            "1/z coefficient {} of m+ is not negative",
            asy.c
        )));
    }
    // translate by -a, then scale values by lambda so the 1/z slot is -1
    let lambda = -1.0 / asy.c;
    let transform = MoebiusElement::dilation(lambda)?
        .compose(&MoebiusElement::translation(-asy.a));
    let f1 = f.transformed(&transform);
    let b = lambda * asy.b0;
    // left side: -m- transforms like m+, so m-(H1) = lambda (m- + a)
    let minus1 = sys.m_minus_map().transformed(
        &MoebiusElement::dilation(lambda)?.compose(&MoebiusElement::translation(asy.a)),
    );
    let l1 = asymptotics(&minus1, sys.set(), Some(r0))?.b0;
    let t = if b < 1e-9 {
        0.0
    } else {
        let total = l1 + b;
        if !(total > 0.0) {
            return Err(CoreError::Inconsistent(format!(
                "left slope {l1} incompatible with b = {b}"
            )));
        }
        let t = b / total;
        if t < 1e-9 || t > 1.0 - 1e-9 {
            0.0
        } else if t >= 1.0 {
            return Err(CoreError::Inconsistent(format!("shift parameter t = {t} >= 1")));
        } else {
            t
        }
    };
    let m0 = {
        let f1 = f1.clone();
        HerglotzMap::from_fn(move |z| f1.eval_reflected(z) - b * z)
    };
    // high moments amplify sampling noise by radius^k, so start just
    // outside the spectral hull and enlarge only if the decay diagnostic
    // objects (poles of the normalized function further out)
    let hull = sys
        .set()
        .finite_endpoints()
        .iter()
        .fold(1.0f64, |m, x| m.max(x.abs()));
    let mut r_m = 1.5 * hull;
    let mut coefficients = None;
    let mut last_err = None;
    for _ in 0..5 {
        match strip_coefficients(&m0, window, r_m) {
            Ok(w) => {
                coefficients = Some(w);
                break;
            }
            Err(e) => {
                last_err = Some(e);
                r_m *= 2.0;
            }
        }
    }
    let coefficients = match coefficients {
        Some(w) => w,
        None => return Err(last_err.unwrap()),
    };
    Ok(JacobiOrbitData { t, coefficients, transform })
}

/// The twisted-shift matrix A(H) = [[0, -1/a0], [a0, -b0/a0]].
pub fn twisted_shift_matrix(a0: f64, b0: f64) -> Result<MoebiusElement> {
    if !(a0 > 0.0) || !a0.is_finite() {
        return Err(CoreError::InvalidInput(format!(
            "off-diagonal entry must be positive, got {a0}"
        )));
    }
    MoebiusElement::new(0.0, -1.0 / a0, a0, -b0 / a0)
}

/// The interpolating family A(t) = diag(s, 1/s) [[1,0],[t a,1]] R(pi t/2)
/// with s = 1 + t(c - 1); identity at t = 0.
pub fn a_t_family(t: f64, a: f64, c: f64) -> Result<MoebiusElement> {
    let s = 1.0 + t * (c - 1.0);
    if !(s > 0.0) {
        return Err(CoreError::InvalidInput(format!(
            "degenerate scale 1 + t(c-1) = {s}"
        )));
    }
    let diag = MoebiusElement::new(s, 0.0, 0.0, 1.0 / s)?;
    let shear = MoebiusElement::new(1.0, 0.0, t * a, 1.0)?;
    Ok(diag
        .compose(&shear)
        .compose(&MoebiusElement::rotation(std::f64::consts::FRAC_PI_2 * t)))
}

/// Deviation, in the chordal metric over the test disk, between the
/// twisted-shift route A(H) applied to (length z + m(z)) and the
/// coefficient-stripping prediction 1/(b0 - z - a0^2 m(z)) for the shifted
/// m-function.  Exactly zero when length = 1/a0^2 and the matrix matches.
pub fn twisted_shift_check(m: &HerglotzMap, a0: f64, b0: f64, length: f64) -> Result<f64> {
    let a = twisted_shift_matrix(a0, b0)?;
    let lhs = {
        let m = m.clone();
        HerglotzMap::from_fn(move |z| a.apply_complex(length * z + m.eval_reflected(z)))
    };
    let rhs = {
        let m = m.clone();
        HerglotzMap::from_fn(move |z| {
            let den = b0 - z - a0 * a0 * m.eval_reflected(z);
            if den.norm() == 0.0 {
                Complex64::new(f64::INFINITY, f64::INFINITY)
            } else {
                1.0 / den
            }
        })
    };
    herglotz_metric(&lhs, &rhs, METRIC_GRID_N)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gapset::{classify_set, Divisor, GapPoint};
    
    use crate::systems::{system_distance, Side};

    fn dirac_sys(a_plus: f64, d: f64) -> ReflectionlessSystem {
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
        build_system(set, div, Normalization::new(a_plus, d).unwrap()).unwrap()
    }

    fn free_jacobi(g: f64) -> ReflectionlessSystem {
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

    fn schrod_sys(mu0: ExtReal, a_plus: f64, d: f64) -> ReflectionlessSystem {
        let set = classify_set(&[(ExtReal::Finite(0.0), ExtReal::PosInf)]).unwrap();
        let div = Divisor::new(&set, vec![GapPoint { mu: mu0, s: false }], None).unwrap();
        build_system(set, div, Normalization::new(a_plus, d).unwrap()).unwrap()
    }

    #[test]
    fn act_on_singular() {
        let inv = MoebiusElement::inversion();
        let k2 = AnySystem::Singular(SingularSystem::from_real(2.0));
        match act(&inv, &k2).unwrap() {
            AnySystem::Singular(s) => {
                let v = s.value.finite().unwrap();
                assert!((v.re + 0.5).abs() < 1e-15 && v.im == 0.0);
            }
            _ => panic!("expected singular"),
        }
    }

    #[test]
    fn act_identity_and_g() {
        let sys = dirac_sys(0.0, 1.0);
        let out = act(&MoebiusElement::identity(), &AnySystem::Regular(sys.clone())).unwrap();
        let d = system_distance(&AnySystem::Regular(sys.clone()), &out).unwrap();
        assert!(d < 1e-10, "identity action moved the system by {d}");

        // subgroup element c^2 = 2, a = 1: m+(i) goes from (sqrt2+1)i to
        // 1 + 2(sqrt2+1)i
        let g = GElement::from_c2(2.0, 1.0).unwrap();
        let out = act(&g.to_moebius(), &AnySystem::Regular(sys)).unwrap();
        let s = out.as_regular().unwrap();
        let n = s.normalization();
        assert!((n.a_plus - 1.0).abs() < 1e-8);
        assert!((n.d - 2.0).abs() < 1e-8);
        let mp = s.eval_m(Side::Plus, Complex64::new(0.0, 1.0)).unwrap();
        assert!((mp - Complex64::new(1.0, 2.0 * (2.0f64.sqrt() + 1.0))).norm() < 1e-8);
        // divisor untouched by the subgroup
        assert!(s.divisor().points[0].mu.finite().unwrap().abs() < 1e-7);
        assert!(s.divisor().points[0].s);
    }

    #[test]
    fn dirac_normal_form() {
        // the reference divisor already has m+(infinity) = i
        let rep = dirac_representative(&dirac_sys(0.0, 1.0)).unwrap();
        assert!(rep.transform.approx_eq(&MoebiusElement::identity(), 1e-9));

        // A+ = 1, D = 2: m+(infinity) = 1 + 2i, so c^2 = 1/2, a = -1/2
        let rep = dirac_representative(&dirac_sys(1.0, 2.0)).unwrap();
        let e = rep.transform.entries();
        let c = 0.5f64.sqrt();
        assert!((e[0] - c).abs() < 1e-8 && (e[1] + 0.5 / c).abs() < 1e-8);
        // A+ = c^2 * 1 + a = 0.5 - 0.5 = 0, D = c^2 * 2 = 1
        let n = rep.system.normalization();
        assert!(n.a_plus.abs() < 1e-8 && (n.d - 1.0).abs() < 1e-8);
    }

    #[test]
    fn schrodinger_normal_form() {
        let rep = schrodinger_representative(&schrod_sys(ExtReal::NegInf, 0.0, 1.0)).unwrap();
        assert!(rep.transform.approx_eq(&MoebiusElement::identity(), 1e-12));

        let rep = schrodinger_representative(&schrod_sys(ExtReal::NegInf, 3.0, 5.0)).unwrap();
        let n = rep.system.normalization();
        assert_eq!((n.a_plus, n.d), (0.0, 1.0));
        let e = rep.transform.entries();
        let c = (1.0f64 / 5.0).sqrt();
        assert!((e[0] - c).abs() < 1e-12 && (e[1] + 0.6 / c).abs() < 1e-12);

        // finite gap pole: B1 must push it to -infinity
        let rep = schrodinger_representative(&schrod_sys(ExtReal::Finite(-1.0), 0.4, 1.7)).unwrap();
        assert_eq!(rep.system.divisor().points[0].mu, ExtReal::NegInf);
        let n = rep.system.normalization();
        assert_eq!((n.a_plus, n.d), (0.0, 1.0));
    }

    #[test]
    fn jacobi_normal_form() {
        // free system is already normalized
        let rep = jacobi_representative(&free_jacobi(-0.5)).unwrap();
        assert!(rep.transform.approx_eq(&MoebiusElement::identity(), 1e-12));

        // g = +1/2 gives m+ = (z + sqrt(z^2-4))/2 ~ z - 1/z: the b0 > 0 branch
        let rep = jacobi_representative(&free_jacobi(0.5)).unwrap();
        let mus: Vec<ExtReal> = rep.system.divisor().points.iter().map(|p| p.mu).collect();
        let co = normal_form_coeffs(
            &rep.system.m_plus_map(),
            laurent_radius(rep.system.set(), &mus),
        )
        .unwrap();
        assert!(co[0].abs() < 1e-7 && co[1].abs() < 1e-7);
        assert!((co[2] + 1.0).abs() < 1e-7 && co[3].abs() < 1e-7);
    }

    #[test]
    fn jacobi_shift_data() {
        let data = jacobi_orbit_data(&free_jacobi(-0.5), 5).unwrap();
        assert_eq!(data.t, 0.0);
        for (a, b) in data.coefficients.a.iter().zip(&data.coefficients.b) {
            assert!((a - 1.0).abs() < 1e-6 && b.abs() < 1e-6);
        }

        // g = -0.25: m+ = (-z + sqrt(z^2-4))/2 + z/4 has b = 1/4 with a0 = 1
        let data = jacobi_orbit_data(&free_jacobi(-0.25), 5).unwrap();
        assert!((data.t - 0.25).abs() < 1e-7, "t = {}", data.t);
        for (a, b) in data.coefficients.a.iter().zip(&data.coefficients.b) {
            assert!((a - 1.0).abs() < 1e-6 && b.abs() < 1e-6);
        }
    }

    #[test]
    fn twisted_shift_values() {
        let m = twisted_shift_matrix(1.0, 0.0).unwrap();
        assert!(m.approx_eq(&MoebiusElement::inversion(), 1e-15));
        let m = twisted_shift_matrix(2.0, 1.0).unwrap();
        let want = MoebiusElement::new(0.0, -0.5, 2.0, -0.5).unwrap();
        assert!(m.approx_eq(&want, 1e-15));
        assert!(twisted_shift_matrix(0.0, 1.0).is_err());
    }

    #[test]
    fn a_t_family_endpoints() {
        assert!(a_t_family(0.0, 3.0, 2.0)
            .unwrap()
            .approx_eq(&MoebiusElement::identity(), 1e-15));
        assert!(a_t_family(1.0, 0.0, 1.0)
            .unwrap()
            .approx_eq(&MoebiusElement::inversion(), 1e-15));
        assert!(a_t_family(1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn twisted_shift_on_free() {
        let sys = free_jacobi(-0.5);
        let m = sys.m_plus_map();
        let dev = twisted_shift_check(&m, 1.0, 0.0, 1.0).unwrap();
        assert!(dev < 1e-10, "deviation {dev}");
        let bad = twisted_shift_check(&m, 1.1, 0.0, 1.0).unwrap();
        assert!(bad > 1e-3, "perturbed deviation {bad}");
    }
}
