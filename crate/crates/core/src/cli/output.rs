use std::fs;
use std::path::Path;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::dyadic::DyadicArc;
use crate::error::{BlochError, Result};
use crate::rational::fmt_f64;
use crate::transform::DiscPoint;

pub fn write_json(path: &Path, v: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(v)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn read_json(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path).map_err(|e| BlochError::InvalidArgument(format!("{}: {e}", path.display())))?;
    Ok(serde_json::from_str(&text)?)
}

/// `[level, index]`.
pub fn arc_json(a: DyadicArc) -> Value {
    json!([a.level, a.index])
}

pub fn pair_json(p: Option<(DyadicArc, DyadicArc)>) -> Value {
    p.map_or(Value::Null, |(a, b)| json!([arc_json(a), arc_json(b)]))
}

/// `count` points with uniform angle and `1 - |z| = 2^-u`, `u` uniform in `[1, max_log2_gap]`,
/// drawn from a ChaCha8 stream.
pub fn sample_points(seed: u64, count: usize, max_log2_gap: f64) -> Result<Vec<DiscPoint<f64>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let theta: f64 = rng.gen();
            let u: f64 = rng.gen_range(1.0..=max_log2_gap);
            DiscPoint::polar(1.0 - (-u).exp2(), theta)
        })
        .collect()
}

/// Two columns `re, im`; a first line that does not parse is taken as a header.
pub fn read_points_csv(path: &Path) -> Result<Vec<DiscPoint<f64>>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_path(path)?;
    let mut out = Vec::new();
    for (n, rec) in reader.records().enumerate() {
        let rec = rec?;
        let parsed: Option<(f64, f64)> = match (rec.get(0), rec.get(1)) {
            (Some(a), Some(b)) => a.parse().ok().zip(b.parse().ok()),
            _ => None,
        };
        match parsed {
            Some((re, im)) => out.push(DiscPoint::from_parts(re, im)?),
            None if n == 0 => continue,
            None => return Err(BlochError::Parse(format!("{}: line {} is not 're,im'", path.display(), n + 1))),
        }
    }
    Ok(out)
}

/// Row `re(z), im(z), re(val), im(val), err_bound`.
pub fn value_row(z: Complex<f64>, v: Complex<f64>, err: f64) -> String {
    format!("{},{},{},{},{}\n", fmt_f64(z.re), fmt_f64(z.im), fmt_f64(v.re), fmt_f64(v.im), fmt_f64(err))
}

pub const VALUE_HEADER: &str = "re_z,im_z,re_val,im_val,err_bound\n";

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn samples_depend_only_on_the_seed() {
        let a = sample_points(3, 20, 10.0).unwrap();
        assert_eq!(a, sample_points(3, 20, 10.0).unwrap());
        assert_ne!(a, sample_points(4, 20, 10.0).unwrap());
        assert!(a.iter().all(|z| z.boundary_gap() >= 2f64.powi(-10) * (1.0 - 1e-12) && z.boundary_gap() <= 0.5 + 1e-12));
    }

    #[test]
    fn points_csv_with_header() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("p.csv");
        fs::write(&p, "re,im\n0.5,0\n-0.25, 0.25\n").unwrap();
        let pts = read_points_csv(&p).unwrap();
        assert_eq!(pts.len(), 2);
        assert_eq!(pts[1].value(), Complex::new(-0.25, 0.25));
        fs::write(&p, "0.5,0\n1.5,0\n").unwrap();
        assert!(read_points_csv(&p).is_err());
    }
}
