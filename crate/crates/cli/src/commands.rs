//! Subcommand implementations.  Every function returns a process exit
//! code; human-facing messages go to stderr, data to stdout or the
//! requested output file.

use std::collections::HashMap;
use std::io::Write as _;
use std::path::Path;

use num_complex::Complex64;
use refless_core::gapset::{h0_eval, h0_log_oracle, SetCase};
use refless_core::orbits::{
    dirac_representative, jacobi_orbit_data, jacobi_representative, schrodinger_representative,
};
use refless_core::sphere::herglotz_metric;
use refless_core::systems::reflectionless_defect;
use refless_core::{CoreError, HerglotzMap, ReflectionlessSystem, Side};

use crate::config::{summary_line, SchemaError, SystemConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAIL: i32 = 1;
pub const EXIT_SCHEMA: i32 = 2;
pub const EXIT_MATH: i32 = 3;
pub const EXIT_IO: i32 = 4;
pub const EXIT_CASE: i32 = 5;
pub const EXIT_NORMAL_FORM: i32 = 6;

fn core_exit(e: &CoreError) -> i32 {
    match e {
        CoreError::CaseMismatch(_) => EXIT_CASE,
        CoreError::NormalForm(_) => EXIT_NORMAL_FORM,
        _ => EXIT_MATH,
    }
}

fn fail(code: i32, msg: impl std::fmt::Display) -> i32 {
    eprintln!("error: {msg}");
    code
}

fn load_config(path: &Path) -> Result<SystemConfig, i32> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| fail(EXIT_IO, format!("cannot read {}: {e}", path.display())))?;
    let doc: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| fail(EXIT_SCHEMA, format!("{}: not valid JSON: {e}", path.display())))?;
    SystemConfig::from_json(&doc).map_err(|e: SchemaError| fail(EXIT_SCHEMA, e))
}

fn load_system(path: &Path) -> Result<ReflectionlessSystem, i32> {
    let cfg = load_config(path)?;
    match cfg.build() {
        Ok(Ok(sys)) => Ok(sys),
        Ok(Err(e)) => Err(fail(core_exit(&e), e)),
        Err(e) => Err(fail(EXIT_SCHEMA, e)),
    }
}

pub fn cmd_build(path: &Path) -> i32 {
    let sys = match load_system(path) {
        Ok(s) => s,
        Err(code) => return code,
    };
    println!("{}", summary_line(&sys));
    EXIT_OK
}

pub enum GridSpec {
    Rect { re_lo: f64, re_hi: f64, im_lo: f64, im_hi: f64, n: usize },
    Boundary { t_lo: f64, t_hi: f64, eps: f64, n: usize },
}

impl GridSpec {
    pub fn validate(&self) -> Result<(), String> {
        match *self {
            GridSpec::Rect { re_lo, re_hi, im_lo, im_hi, n } => {
                if n == 0 {
                    return Err("grid: n must be positive".into());
                }
                if !(im_lo > 0.0) {
                    return Err("grid: im_lo must be positive".into());
                }
                if !(re_hi >= re_lo) || !(im_hi >= im_lo) {
                    return Err("grid: bounds out of order".into());
                }
                Ok(())
            }
            GridSpec::Boundary { t_lo, t_hi, eps, n } => {
                if n == 0 {
                    return Err("boundary: n must be positive".into());
                }
                if !(eps > 0.0) {
                    return Err("boundary: eps must be positive".into());
                }
                if !(t_hi >= t_lo) {
                    return Err("boundary: bounds out of order".into());
                }
                Ok(())
            }
        }
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

pub fn cmd_eval(path: &Path, grid: &GridSpec, side: Side, out: Option<&Path>) -> i32 {
    let sys = match load_system(path) {
        Ok(s) => s,
        Err(code) => return code,
    };
    if let Err(msg) = grid.validate() {
        return fail(EXIT_SCHEMA, msg);
    }
    let mut body = String::new();
    let result: Result<(), CoreError> = (|| {
        match *grid {
            GridSpec::Rect { re_lo, re_hi, im_lo, im_hi, n } => {
                body.push_str("re_z,im_z,re_m,im_m\n");
                for &im in &linspace(im_lo, im_hi, n) {
                    for &re in &linspace(re_lo, re_hi, n) {
                        let m = sys.eval_m(side, Complex64::new(re, im))?;
                        body.push_str(&format!(
                            "{re:.16e},{im:.16e},{:.16e},{:.16e}\n",
                            m.re, m.im
                        ));
                    }
                }
            }
            GridSpec::Boundary { t_lo, t_hi, eps, n } => {
                body.push_str("t,epsilon,re_m,im_m\n");
                for &t in &linspace(t_lo, t_hi, n) {
                    let m = sys.eval_m(side, Complex64::new(t, eps))?;
                    body.push_str(&format!(
                        "{t:.16e},{eps:.16e},{:.16e},{:.16e}\n",
                        m.re, m.im
                    ));
                }
            }
        }
        Ok(())
    })();
    if let Err(e) = result {
        return fail(core_exit(&e), e);
    }
    match out {
        Some(p) => {
            if let Err(e) = std::fs::write(p, body) {
                return fail(EXIT_IO, format!("cannot write {}: {e}", p.display()));
            }
        }
        None => {
            print!("{body}");
            let _ = std::io::stdout().flush();
        }
    }
    EXIT_OK
}

fn transform_line(m: &refless_core::MoebiusElement) -> String {
    let [a, b, c, d] = m.entries();
    format!("transform={a:.16e},{b:.16e},{c:.16e},{d:.16e}")
}

pub fn cmd_orbit(path: &Path, kind: &str) -> i32 {
    let sys = match load_system(path) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let case = sys.set().case();
    let wanted = match kind {
        "dirac" => SetCase::TwoUnbounded,
        "schroedinger" => SetCase::OneUnbounded,
        "jacobi" | "jacobi-data" => SetCase::Compact,
        _ => return fail(EXIT_SCHEMA, format!("unknown kind {kind}")),
    };
    if case != wanted {
        return fail(
            EXIT_CASE,
            format!("kind {kind} needs a {wanted:?} set, the configuration is {case:?}"),
        );
    }
    if kind == "jacobi-data" {
        return match jacobi_orbit_data(&sys, 5) {
            Ok(data) => {
                println!("{}", transform_line(&data.transform));
                let a = data
                    .coefficients
                    .a
                    .iter()
                    .map(|x| format!("{x:.16e}"))
                    .collect::<Vec<_>>()
                    .join(",");
                let b = data
                    .coefficients
                    .b
                    .iter()
                    .map(|x| format!("{x:.16e}"))
                    .collect::<Vec<_>>()
                    .join(",");
                println!("t={:.16e} a={a} b={b}", data.t);
                EXIT_OK
            }
            Err(e) => fail(core_exit(&e), e),
        };
    }
    let rep = match kind {
        "dirac" => dirac_representative(&sys),
        "schroedinger" => schrodinger_representative(&sys),
        _ => jacobi_representative(&sys),
    };
    match rep {
        Ok(rep) => {
            println!("{}", transform_line(&rep.transform));
            println!("{}", summary_line(&rep.system));
            EXIT_OK
        }
        Err(e) => fail(core_exit(&e), e),
    }
}

fn print_check(
    name: &str,
    measured: f64,
    tols: &HashMap<String, f64>,
    default_tol: f64,
) -> bool {
    let threshold = *tols.get(name).unwrap_or(&default_tol);
    let pass = measured < threshold;
    println!(
        "{name} measured={measured:.3e} < threshold={threshold:.3e} ... {}",
        if pass { "PASS" } else { "FAIL" }
    );
    pass
}

pub fn cmd_check(
    config: Option<&Path>,
    suite: bool,
    check: Option<&str>,
    t: Option<f64>,
    tols: &HashMap<String, f64>,
) -> i32 {
    if suite {
        let mut ok = true;
        for r in refless_core::verify::run_suite() {
            let r = match tols.get(&r.name) {
                Some(&tol) => r.with_threshold(tol),
                None => r,
            };
            println!("{}", r.line());
            ok &= r.pass;
        }
        return if ok { EXIT_OK } else { EXIT_CHECK_FAIL };
    }
    let path = match config {
        Some(p) => p,
        None => return fail(EXIT_SCHEMA, "check needs --config or --suite"),
    };
    let sys = match load_system(path) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let band_points: Vec<f64> = sys
        .set()
        .bands()
        .iter()
        .filter_map(|&(a, b)| {
            let lo = a.finite().unwrap_or(b.finite().map_or(-3.0, |x| x - 2.0));
            let hi = b.finite().unwrap_or(a.finite().map_or(3.0, |x| x + 2.0));
            (hi > lo).then_some(0.5 * (lo + hi))
        })
        .collect();
    let result: Result<i32, CoreError> = (|| {
        let mut ok = true;
        let want = |name: &str| check.is_none() || check == Some(name);
        if want("reflectionless") {
            let pts: Vec<f64> = match t {
                Some(t0) => vec![t0],
                None => band_points.clone(),
            };
            let mut worst = 0.0f64;
            for &t0 in &pts {
                worst = worst.max(reflectionless_defect(&sys, t0)?);
            }
            ok &= print_check("reflectionless", worst, tols, 1e-8);
        }
        if want("positivity") {
            let mut worst = f64::NEG_INFINITY;
            for k in 1..=10 {
                for &t0 in &band_points {
                    let z = Complex64::new(t0, 0.2 * k as f64);
                    worst = worst.max(-sys.eval_m(Side::Plus, z)?.im);
                    worst = worst.max(-sys.eval_m(Side::Minus, z)?.im);
                }
            }
            ok &= print_check("positivity", worst, tols, 0.0);
        }
        if want("oracle") {
            let mut worst = 0.0f64;
            for k in 1..=10 {
                let z = Complex64::new(0.3 * k as f64 - 1.5, 0.4 + 0.1 * k as f64);
                let direct = h0_eval(sys.set(), sys.divisor(), z)?;
                let oracle = h0_log_oracle(sys.set(), sys.divisor(), z)?;
                worst = worst.max((direct - oracle).norm() / oracle.norm().max(1e-300));
            }
            ok &= print_check("oracle", worst, tols, 1e-8);
        }
        Ok(if ok { EXIT_OK } else { EXIT_CHECK_FAIL })
    })();
    match result {
        Ok(code) => code,
        Err(e) => fail(core_exit(&e), e),
    }
}

fn operand_map(spec: &str) -> Result<(HerglotzMap, Option<ReflectionlessSystem>), i32> {
    if let Some(rest) = spec.strip_prefix("const:") {
        if rest == "inf" {
            return Ok((HerglotzMap::constant_infinity(), None));
        }
        let x: f64 = rest
            .parse()
            .map_err(|_| fail(EXIT_SCHEMA, format!("const operand {rest} is not a number")))?;
        return Ok((HerglotzMap::constant_real(x), None));
    }
    let sys = load_system(Path::new(spec))?;
    Ok((sys.m_plus_map(), Some(sys)))
}

pub fn cmd_distance(a: &str, b: &str) -> i32 {
    let (fa, sa) = match operand_map(a) {
        Ok(v) => v,
        Err(code) => return code,
    };
    let (fb, sb) = match operand_map(b) {
        Ok(v) => v,
        Err(code) => return code,
    };
    if let (Some(x), Some(y)) = (&sa, &sb) {
        if x.set().bands() != y.set().bands() {
            return fail(EXIT_MATH, "the two configurations describe different sets");
        }
    }
    match herglotz_metric(&fa, &fb, 64) {
        Ok(d) => {
            println!("distance={d:.16e}");
            EXIT_OK
        }
        Err(e) => fail(core_exit(&e), e),
    }
}
