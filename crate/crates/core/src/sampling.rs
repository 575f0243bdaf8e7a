//! Deterministic random generators of sets, divisors, and normalizations
//! for property suites.  All draws go through a caller-provided RNG so the
//! whole battery is reproducible from one seed.

use rand::Rng;

use crate::ext::ExtReal;
use crate::gapset::{classify_set, divisor_needs_g, Divisor, FiniteGapSet, GapPoint, SetCase};
use crate::orbits::GElement;
use crate::sphere::MoebiusElement;
use crate::systems::{build_system, Normalization, ReflectionlessSystem};

fn len(rng: &mut impl Rng) -> f64 {
    rng.gen_range(0.5..3.0)
}

/// A random finite gap set of the requested case with interval lengths of
/// order one.
pub fn random_set(rng: &mut impl Rng, case: SetCase) -> FiniteGapSet {
    let mut bands: Vec<(ExtReal, ExtReal)> = Vec::new();
    let mut cursor = rng.gen_range(-4.0..-1.0);
    match case {
        SetCase::TwoUnbounded => {
            bands.push((ExtReal::NegInf, ExtReal::Finite(cursor)));
            let mid = rng.gen_range(0..=1);
            for _ in 0..mid {
                cursor += len(rng);
                let lo = cursor;
                cursor += len(rng);
                bands.push((ExtReal::Finite(lo), ExtReal::Finite(cursor)));
            }
            cursor += len(rng);
            bands.push((ExtReal::Finite(cursor), ExtReal::PosInf));
        }
        SetCase::OneUnbounded => {
            let k = rng.gen_range(1..=2);
            for _ in 0..k {
                let lo = cursor;
                cursor += len(rng);
                bands.push((ExtReal::Finite(lo), ExtReal::Finite(cursor)));
                cursor += len(rng);
            }
            bands.push((ExtReal::Finite(cursor), ExtReal::PosInf));
        }
        SetCase::Compact => {
            let k = rng.gen_range(2..=3);
            for _ in 0..k {
                let lo = cursor;
                cursor += len(rng);
                bands.push((ExtReal::Finite(lo), ExtReal::Finite(cursor)));
                cursor += len(rng);
            }
        }
    }
    classify_set(&bands).expect("generated bands are valid")
}

/// Largest magnitude allowed for finite divisor points in unbounded gaps.
pub const MAX_FINITE_MU: f64 = 100.0;

/// A random divisor: interior points, occasional exact endpoints, and
/// points at infinity on the unbounded gaps.
pub fn random_divisor(rng: &mut impl Rng, set: &FiniteGapSet) -> Divisor {
    let mut points = Vec::with_capacity(set.gaps().len());
    for gap in set.gaps() {
        let p: f64 = rng.gen();
        let mu = match (gap.left, gap.right) {
            (ExtReal::Finite(c), ExtReal::Finite(d)) => {
                if p < 0.08 {
                    ExtReal::Finite(c)
                } else if p < 0.16 {
                    ExtReal::Finite(d)
                } else {
                    ExtReal::Finite(c + (d - c) * rng.gen_range(0.01..0.99))
                }
            }
            (ExtReal::NegInf, ExtReal::Finite(d)) => {
                if p < 0.3 {
                    ExtReal::NegInf
                } else if p < 0.4 {
                    ExtReal::Finite(d)
                } else {
                    let lo = (d - MAX_FINITE_MU).min(d - 0.5);
                    ExtReal::Finite(rng.gen_range(lo..d))
                }
            }
            (ExtReal::Finite(c), ExtReal::PosInf) => {
                if p < 0.3 {
                    ExtReal::PosInf
                } else if p < 0.4 {
                    ExtReal::Finite(c)
                } else {
                    let hi = (c + MAX_FINITE_MU).max(c + 0.5);
                    ExtReal::Finite(rng.gen_range(c..hi))
                }
            }
            _ => unreachable!("a gap cannot span the whole line"),
        };
        let s = rng.gen_bool(0.5);
        points.push(GapPoint { mu, s });
    }
    let g = if divisor_needs_g(set, &points) {
        Some(rng.gen_range(-0.5..0.5))
    } else {
        None
    };
    Divisor::new(set, points, g).expect("generated divisor is valid")
}

/// A random affine normalization with A+ of order one and D within a
/// factor of five of one.
pub fn random_normalization(rng: &mut impl Rng) -> Normalization {
    let a_plus = rng.gen_range(-2.0..2.0);
    let d = rng.gen_range(0.2f64.ln()..5.0f64.ln()).exp();
    Normalization::new(a_plus, d).unwrap()
}

/// A complete random system of the requested case.
pub fn random_system(rng: &mut impl Rng, case: SetCase) -> ReflectionlessSystem {
    let set = random_set(rng, case);
    let div = random_divisor(rng, &set);
    let norm = random_normalization(rng);
    build_system(set, div, norm).expect("generated system is valid")
}

/// A random subgroup element within moderate bounds.
pub fn random_g_element(rng: &mut impl Rng) -> GElement {
    GElement::new(rng.gen_range(0.75..1.3), rng.gen_range(-1.0..1.0)).unwrap()
}

/// A random Moebius element of moderate size: rotation, shear, dilation.
pub fn random_moebius(rng: &mut impl Rng) -> MoebiusElement {
    let rot = MoebiusElement::rotation(rng.gen_range(-0.5..0.5));
    let tr = MoebiusElement::translation(rng.gen_range(-1.0..1.0));
    let dil = MoebiusElement::dilation(rng.gen_range(0.7..1.4)).unwrap();
    dil.compose(&tr).compose(&rot)
}
