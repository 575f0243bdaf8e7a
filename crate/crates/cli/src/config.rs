//! Configuration file handling: a JSON document describing a system is
//! validated field by field and turned into the core domain types.

use std::fmt;

use refless_core::gapset::{classify_set, Divisor, FiniteGapSet, GapPoint};
use refless_core::systems::{build_system, Normalization, ReflectionlessSystem};
use refless_core::ExtReal;
use serde_json::Value;

/// A schema-level problem: the document does not have the documented
/// shape.  The message always names the offending field path.
#[derive(Debug)]
pub struct SchemaError(pub String);

impl fmt::Display for SchemaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "schema error: {}", self.0)
    }
}

impl std::error::Error for SchemaError {}

fn schema(path: &str, what: &str) -> SchemaError {
    SchemaError(format!("{path}: {what}"))
}

/// The parsed configuration, still in plain numbers; value-level
/// constraints are checked by the core constructors.
#[derive(Debug, Clone)]
pub struct SystemConfig {
    pub bands: Vec<(ExtReal, ExtReal)>,
    pub divisor: Vec<DivisorEntry>,
    pub g: Option<f64>,
    pub a_plus: f64,
    pub d: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct DivisorEntry {
    pub gap_index: usize,
    pub mu: ExtReal,
    pub s: bool,
}

fn ext_real(v: &Value, path: &str) -> Result<ExtReal, SchemaError> {
    match v {
        Value::Number(n) => {
            let x = n
                .as_f64()
                .ok_or_else(|| schema(path, "number out of range"))?;
            Ok(ExtReal::Finite(x))
        }
        Value::String(s) if s == "inf" => Ok(ExtReal::PosInf),
        Value::String(s) if s == "-inf" => Ok(ExtReal::NegInf),
        _ => Err(schema(path, "expected a number or \"inf\"/\"-inf\"")),
    }
}

fn finite(v: &Value, path: &str) -> Result<f64, SchemaError> {
    match v {
        Value::Number(n) => n
            .as_f64()
            .ok_or_else(|| schema(path, "number out of range")),
        _ => Err(schema(path, "expected a number")),
    }
}

impl SystemConfig {
    /// Validate the shape of a JSON document and collect the fields.
    pub fn from_json(doc: &Value) -> Result<SystemConfig, SchemaError> {
        let obj = doc
            .as_object()
            .ok_or_else(|| schema("<root>", "expected an object"))?;
        for key in obj.keys() {
            if !matches!(key.as_str(), "bands" | "divisor" | "g" | "A_plus" | "D") {
                return Err(schema(key, "unknown field"));
            }
        }
        let bands_v = obj
            .get("bands")
            .ok_or_else(|| schema("bands", "missing field"))?
            .as_array()
            .ok_or_else(|| schema("bands", "expected a list of [lo, hi] pairs"))?;
        let mut bands = Vec::new();
        for (i, b) in bands_v.iter().enumerate() {
            let pair = b
                .as_array()
                .filter(|a| a.len() == 2)
                .ok_or_else(|| schema(&format!("bands[{i}]"), "expected a [lo, hi] pair"))?;
            bands.push((
                ext_real(&pair[0], &format!("bands[{i}][0]"))?,
                ext_real(&pair[1], &format!("bands[{i}][1]"))?,
            ));
        }
        let div_v = obj
            .get("divisor")
            .ok_or_else(|| schema("divisor", "missing field"))?
            .as_array()
            .ok_or_else(|| schema("divisor", "expected a list of entries"))?;
        let mut divisor = Vec::new();
        for (i, e) in div_v.iter().enumerate() {
            let eo = e
                .as_object()
                .ok_or_else(|| schema(&format!("divisor[{i}]"), "expected an object"))?;
            for key in eo.keys() {
                if !matches!(key.as_str(), "gap_index" | "mu" | "s") {
                    return Err(schema(&format!("divisor[{i}].{key}"), "unknown field"));
                }
            }
            let gap_index = eo
                .get("gap_index")
                .and_then(Value::as_u64)
                .ok_or_else(|| {
                    schema(&format!("divisor[{i}].gap_index"), "expected a non-negative integer")
                })? as usize;
            let mu = ext_real(
                eo.get("mu")
                    .ok_or_else(|| schema(&format!("divisor[{i}].mu"), "missing field"))?,
                &format!("divisor[{i}].mu"),
            )?;
            let s = match eo.get("s").and_then(Value::as_u64) {
                Some(0) => false,
                Some(1) => true,
                _ => return Err(schema(&format!("divisor[{i}].s"), "expected 0 or 1")),
            };
            divisor.push(DivisorEntry { gap_index, mu, s });
        }
        let g = match obj.get("g") {
            None | Some(Value::Null) => None,
            Some(v) => Some(finite(v, "g")?),
        };
        let a_plus = finite(
            obj.get("A_plus")
                .ok_or_else(|| schema("A_plus", "missing field"))?,
            "A_plus",
        )?;
        let d = finite(obj.get("D").ok_or_else(|| schema("D", "missing field"))?, "D")?;
        Ok(SystemConfig { bands, divisor, g, a_plus, d })
    }

    /// Check the divisor listing itself: every gap exactly once.
    fn gap_points(&self, set: &FiniteGapSet) -> Result<Vec<GapPoint>, SchemaError> {
        let n = set.gaps().len();
        let mut points: Vec<Option<GapPoint>> = vec![None; n];
        for (i, e) in self.divisor.iter().enumerate() {
            if e.gap_index >= n {
                return Err(schema(
                    &format!("divisor[{i}].gap_index"),
                    &format!("index {} out of range, the set has {n} gaps", e.gap_index),
                ));
            }
            if points[e.gap_index].is_some() {
                return Err(schema(
                    &format!("divisor[{i}].gap_index"),
                    &format!("gap {} listed twice", e.gap_index),
                ));
            }
            points[e.gap_index] = Some(GapPoint { mu: e.mu, s: e.s });
        }
        points
            .into_iter()
            .enumerate()
            .map(|(j, p)| {
                p.ok_or_else(|| schema("divisor", &format!("no entry for gap {j}")))
            })
            .collect()
    }

    /// Build the system; schema problems and value problems keep their
    /// distinct error types.
    pub fn build(&self) -> Result<Result<ReflectionlessSystem, refless_core::CoreError>, SchemaError>
    {
        let set = match classify_set(&self.bands) {
            Ok(s) => s,
            Err(e) => return Ok(Err(e)),
        };
        let points = self.gap_points(&set)?;
        Ok((|| {
            let div = Divisor::new(&set, points, self.g)?;
            let norm = Normalization::new(self.a_plus, self.d)?;
            build_system(set, div, norm)
        })())
    }
}

fn fmt_ext(x: ExtReal) -> String {
    match x {
        ExtReal::Finite(v) => format!("{v:.16e}"),
        ExtReal::PosInf => "inf".into(),
        ExtReal::NegInf => "-inf".into(),
    }
}

/// The one-line build summary.  It contains the full parameter set, so
/// the record can be transcribed back into a configuration.
pub fn summary_line(sys: &ReflectionlessSystem) -> String {
    use refless_core::gapset::SetCase;
    let case = match sys.set().case() {
        SetCase::TwoUnbounded => "dirac",
        SetCase::OneUnbounded => "schrodinger",
        SetCase::Compact => "jacobi",
    };
    let bands = sys
        .set()
        .bands()
        .iter()
        .map(|&(a, b)| format!("{},{}", fmt_ext(a), fmt_ext(b)))
        .collect::<Vec<_>>()
        .join(";");
    let divisor = sys
        .divisor()
        .points
        .iter()
        .map(|p| format!("{}/{}", fmt_ext(p.mu), u8::from(p.s)))
        .collect::<Vec<_>>()
        .join(";");
    let g = match sys.divisor().g {
        Some(v) => format!("{v:.16e}"),
        None => "none".into(),
    };
    let rep = sys.representation();
    let w = rep
        .weights
        .iter()
        .map(|x| format!("{x:.16e}"))
        .collect::<Vec<_>>()
        .join(";");
    let mi = sys
        .eval_m(refless_core::Side::Plus, num_complex::Complex64::new(0.0, 1.0))
        .expect("m+ at i");
    format!(
        "case={case} N={} bands={bands} divisor={divisor} g={g} A_plus={:.16e} D={:.16e} \
         A={:.16e} nu_total={:.16e} w={w} nu_inf={:.16e} m_plus_i={:.16e},{:.16e}",
        sys.set().gaps().len(),
        sys.normalization().a_plus,
        sys.normalization().d,
        rep.a,
        rep.nu_total,
        rep.nu_infinity,
        mi.re,
        mi.im,
    )
}
