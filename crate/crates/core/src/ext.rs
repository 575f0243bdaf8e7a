use std::cmp::Ordering;
use std::fmt;

/// A point of the extended real line [-inf, inf].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    NegInf,
    Finite(f64),
    PosInf,
}

impl ExtReal {
    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(x) => Some(x),
            _ => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        !matches!(self, ExtReal::Finite(_))
    }

    /// Homeomorphism onto [-1, 1]: x -> x / (1 + |x|), with the infinities
    /// going to the endpoints.  Strictly increasing, so it is used as the
    /// working coordinate for bisection on unbounded gaps.
    pub fn compactify(self) -> f64 {
        match self {
            ExtReal::NegInf => -1.0,
            ExtReal::PosInf => 1.0,
            ExtReal::Finite(x) => x / (1.0 + x.abs()),
        }
    }

    /// Inverse of `compactify`.
    pub fn decompactify(v: f64) -> ExtReal {
        if v <= -1.0 {
            ExtReal::NegInf
        } else if v >= 1.0 {
            ExtReal::PosInf
        } else {
            ExtReal::Finite(v / (1.0 - v.abs()))
        }
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        use ExtReal::*;
        match (self, other) {
            (NegInf, NegInf) | (PosInf, PosInf) => Some(Ordering::Equal),
            (NegInf, _) | (_, PosInf) => Some(Ordering::Less),
            (_, NegInf) | (PosInf, _) => Some(Ordering::Greater),
            (Finite(a), Finite(b)) => a.partial_cmp(b),
        }
    }
}

impl From<f64> for ExtReal {
    fn from(x: f64) -> Self {
        if x == f64::INFINITY {
            ExtReal::PosInf
        } else if x == f64::NEG_INFINITY {
            ExtReal::NegInf
        } else {
            ExtReal::Finite(x)
        }
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::NegInf => write!(f, "-inf"),
            ExtReal::PosInf => write!(f, "inf"),
            ExtReal::Finite(x) => write!(f, "{x}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering() {
        assert!(ExtReal::NegInf < ExtReal::Finite(-1e300));
        assert!(ExtReal::Finite(3.0) < ExtReal::PosInf);
        assert!(ExtReal::Finite(1.0) < ExtReal::Finite(2.0));
    }

    #[test]
    fn compactify_round_trip() {
        for &x in &[-250.0, -1.0, 0.0, 0.5, 17.25] {
            let v = ExtReal::Finite(x).compactify();
            let back = ExtReal::decompactify(v).finite().unwrap();
            assert!((back - x).abs() < 1e-9 * (1.0 + x.abs()));
        }
        assert_eq!(ExtReal::decompactify(-1.0), ExtReal::NegInf);
        assert_eq!(ExtReal::decompactify(1.0), ExtReal::PosInf);
    }
}
