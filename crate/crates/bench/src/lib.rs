//! Shared fixtures for the benchmark suite.

use refless_core::gapset::{classify_set, Divisor, FiniteGapSet, GapPoint};
use refless_core::systems::{build_system, Normalization, ReflectionlessSystem};
use refless_core::ExtReal;

/// A compact three-band set with two interior poles and one pole at a
/// finite unbounded-gap position: exercises every factor type.
pub fn compact_system() -> ReflectionlessSystem {
    let set: FiniteGapSet = classify_set(&[
        (ExtReal::Finite(-3.0), ExtReal::Finite(-1.5)),
        (ExtReal::Finite(-0.5), ExtReal::Finite(0.75)),
        (ExtReal::Finite(1.25), ExtReal::Finite(2.5)),
    ])
    .unwrap();
    let points = vec![
        GapPoint { mu: ExtReal::Finite(-8.0), s: false },
        GapPoint { mu: ExtReal::Finite(-1.0), s: true },
        GapPoint { mu: ExtReal::Finite(1.0), s: false },
        GapPoint { mu: ExtReal::PosInf, s: false },
    ];
    let div = Divisor::new(&set, points, None).unwrap();
    build_system(set, div, Normalization::new(0.3, 1.2).unwrap()).unwrap()
}

/// The simplest compact system: one band, both poles at infinity.
pub fn free_system() -> ReflectionlessSystem {
    let set = classify_set(&[(ExtReal::Finite(-2.0), ExtReal::Finite(2.0))]).unwrap();
    let points = vec![
        GapPoint { mu: ExtReal::NegInf, s: false },
        GapPoint { mu: ExtReal::PosInf, s: false },
    ];
    let div = Divisor::new(&set, points, Some(-0.5)).unwrap();
    build_system(set, div, Normalization::new(0.0, 1.0).unwrap()).unwrap()
}
