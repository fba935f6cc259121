//! Plain-text state serialization.
//!
//! A ket is written as a header line followed by one line per nonzero
//! amplitude, fields separated by single tabs:
//!
//! ```text
//! # fock-ket modes=3 cutoffs=1,1,1 total_cap=1
//! 0,0,1    1.0000000000000000e0    0.0000000000000000e0
//! ```
//!
//! Density operators use the `fock-density` header and carry two occupation
//! vectors (row, column) per line. Floats are printed with 17 significant
//! digits so a write/read cycle is bit-exact.

use std::fmt::Write as _;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::basis::Basis;
use super::state::{DensityOp, Ket};
use crate::error::{Error, Result};

const KET_TAG: &str = "fock-ket";
const DENSITY_TAG: &str = "fock-density";

/// Dense density matrices are capped well below the ket limit.
pub const DENSITY_MAX_DIM: usize = 4096;

pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn header(tag: &str, basis: &Basis) -> String {
    let cutoffs: Vec<String> = basis.cutoffs().iter().map(u32::to_string).collect();
    let cap = basis.total_cap().map_or_else(|| "none".to_string(), |c| c.to_string());
    format!(
        "# {tag} modes={} cutoffs={} total_cap={cap}\n",
        basis.mode_count(),
        cutoffs.join(",")
    )
}

fn occupation_str(occ: &[u32]) -> String {
    occ.iter().map(u32::to_string).collect::<Vec<_>>().join(",")
}

pub fn write_ket(ket: &Ket) -> String {
    let basis = ket.basis();
    let mut out = header(KET_TAG, basis);
    for (i, a) in ket.amplitudes().iter().enumerate() {
        if a.re != 0.0 || a.im != 0.0 || a.re.is_sign_negative() || a.im.is_sign_negative() {
            let _ = writeln!(
                out,
                "{}\t{}\t{}",
                occupation_str(basis.occupation(i)),
                format_float(a.re),
                format_float(a.im)
            );
        }
    }
    out
}

pub fn write_density(rho: &DensityOp) -> String {
    let basis = rho.basis();
    let mut out = header(DENSITY_TAG, basis);
    let m = rho.matrix();
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            let v = m[(r, c)];
            if v.re != 0.0 || v.im != 0.0 {
                let _ = writeln!(
                    out,
                    "{}\t{}\t{}\t{}",
                    occupation_str(basis.occupation(r)),
                    occupation_str(basis.occupation(c)),
                    format_float(v.re),
                    format_float(v.im)
                );
            }
        }
    }
    out
}

pub fn parse_ket(text: &str) -> Result<Ket> {
    let mut lines = content_lines(text);
    let basis = parse_header(lines.next(), KET_TAG, super::DEFAULT_MAX_DIM)?;
    let mut amps = vec![C64::new(0.0, 0.0); basis.dim()];
    let mut seen = vec![false; basis.dim()];
    for (line_no, line) in lines {
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(parse_err(line_no, format!("expected 3 tab-separated fields, got {}", fields.len())));
        }
        let idx = parse_occupation(&basis, fields[0], line_no)?;
        if std::mem::replace(&mut seen[idx], true) {
            return Err(parse_err(line_no, format!("duplicate occupation {}", fields[0])));
        }
        amps[idx] = C64::new(parse_f64(fields[1], line_no)?, parse_f64(fields[2], line_no)?);
    }
    Ket::new(&basis, amps)
}

pub fn parse_density(text: &str) -> Result<DensityOp> {
    let mut lines = content_lines(text);
    let basis = parse_header(lines.next(), DENSITY_TAG, DENSITY_MAX_DIM)?;
    let n = basis.dim();
    let mut m = DMatrix::zeros(n, n);
    let mut seen = vec![false; n * n];
    for (line_no, line) in lines {
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(parse_err(line_no, format!("expected 4 tab-separated fields, got {}", fields.len())));
        }
        let r = parse_occupation(&basis, fields[0], line_no)?;
        let c = parse_occupation(&basis, fields[1], line_no)?;
        if std::mem::replace(&mut seen[r * n + c], true) {
            return Err(parse_err(line_no, "duplicate matrix entry".to_string()));
        }
        m[(r, c)] = C64::new(parse_f64(fields[2], line_no)?, parse_f64(fields[3], line_no)?);
    }
    DensityOp::new(&basis, m)
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty())
}

fn parse_err(line: usize, msg: String) -> Error {
    Error::Parse { line, msg }
}

fn parse_header(line: Option<(usize, &str)>, tag: &str, max_dim: usize) -> Result<Arc<Basis>> {
    let (line_no, line) = line.ok_or_else(|| parse_err(1, "missing header".into()))?;
    let rest = line
        .strip_prefix('#')
        .map(str::trim_start)
        .and_then(|l| l.strip_prefix(tag))
        .ok_or_else(|| parse_err(line_no, format!("header must start with '# {tag}'")))?;
    let (mut modes, mut cutoffs, mut cap) = (None, None, None);
    for field in rest.split_whitespace() {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| parse_err(line_no, format!("malformed header field '{field}'")))?;
        match key {
            "modes" => {
                modes = Some(
                    value
                        .parse::<usize>()
                        .map_err(|e| parse_err(line_no, format!("modes: {e}")))?,
                )
            }
            "cutoffs" => {
                let parsed: std::result::Result<Vec<u32>, _> = value.split(',').map(str::parse).collect();
                cutoffs = Some(parsed.map_err(|e| parse_err(line_no, format!("cutoffs: {e}")))?);
            }
            "total_cap" => {
                cap = Some(if value == "none" {
                    None
                } else {
                    Some(
                        value
                            .parse::<u32>()
                            .map_err(|e| parse_err(line_no, format!("total_cap: {e}")))?,
                    )
                })
            }
            other => return Err(parse_err(line_no, format!("unknown header field '{other}'"))),
        }
    }
    let modes = modes.ok_or_else(|| parse_err(line_no, "header lacks modes".into()))?;
    let cutoffs = cutoffs.ok_or_else(|| parse_err(line_no, "header lacks cutoffs".into()))?;
    let cap = cap.ok_or_else(|| parse_err(line_no, "header lacks total_cap".into()))?;
    if cutoffs.len() != modes {
        return Err(parse_err(
            line_no,
            format!("modes={modes} but {} cutoffs given", cutoffs.len()),
        ));
    }
    Basis::with_limit(&cutoffs, cap, max_dim)
}

fn parse_occupation(basis: &Basis, field: &str, line_no: usize) -> Result<usize> {
    let occ: std::result::Result<Vec<u32>, _> = field.split(',').map(str::parse).collect();
    let occ = occ.map_err(|e| parse_err(line_no, format!("occupation '{field}': {e}")))?;
    basis
        .index_of(&occ)
        .ok_or_else(|| parse_err(line_no, format!("occupation '{field}' is outside the basis")))
}

fn parse_f64(field: &str, line_no: usize) -> Result<f64> {
    let v: f64 = field
        .trim()
        .parse()
        .map_err(|e| parse_err(line_no, format!("number '{field}': {e}")))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(parse_err(line_no, format!("non-finite number '{field}'")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_and_lines() {
        let b = Basis::new(&[1, 1, 1], Some(1)).unwrap();
        let mut k = Ket::zeros(&b);
        k.set_amplitude(&[0, 0, 1], C64::new(0.5, -0.25)).unwrap();
        let text = write_ket(&k);
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("# fock-ket modes=3 cutoffs=1,1,1 total_cap=1"));
        assert_eq!(lines.next(), Some("0,0,1\t5.0000000000000000e-1\t-2.5000000000000000e-1"));
        assert_eq!(lines.next(), None);
    }

    #[test]
    fn rejects_malformed_input() {
        let cases = [
            "",
            "# fock-ket modes=2 cutoffs=1 total_cap=none\n",
            "# fock-ket modes=1 cutoffs=1 total_cap=none\n2\t0\t0\n",
            "# fock-ket modes=1 cutoffs=1 total_cap=none\n1\t0\n",
            "# fock-ket modes=1 cutoffs=1 total_cap=none\n1\tnan\t0\n",
            "# fock-ket modes=1 cutoffs=1 total_cap=none\n1\t1\t0\n1\t1\t0\n",
            "# fock-ket modes=1 cutoffs=1\n",
            "# fock-ket modes=1 cutoffs=1 total_cap=none colour=red\n",
            "# fock-density modes=1 cutoffs=1 total_cap=none\n",
        ];
        for case in cases {
            assert!(parse_ket(case).is_err(), "accepted {case:?}");
        }
    }

    #[test]
    fn huge_header_is_an_error_not_an_allocation() {
        let text = "# fock-ket modes=4 cutoffs=4000000000,9,9,9 total_cap=none\n";
        assert!(matches!(parse_ket(text), Err(Error::DimensionOverflow { .. })));
    }

    #[test]
    fn density_round_trip() {
        let b = Basis::new(&[1, 2], Some(2)).unwrap();
        let m = DMatrix::from_fn(b.dim(), b.dim(), |i, j| C64::new(1.0 / (1.0 + i as f64), j as f64 / 7.0));
        let rho = DensityOp::new(&b, m).unwrap();
        let back = parse_density(&write_density(&rho)).unwrap();
        assert_eq!(back, rho);
    }

    proptest! {
        #[test]
        fn ket_round_trip_is_bit_exact(
            cutoffs in prop::collection::vec(0u32..3, 1..4),
            seed in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 64),
        ) {
            let b = Basis::new(&cutoffs, None).unwrap();
            let amps: Vec<C64> = (0..b.dim()).map(|i| {
                let (re, im) = seed[i % seed.len()];
                C64::new(re / 3.0_f64.powi(i as i32), im * std::f64::consts::PI)
            }).collect();
            let k = Ket::new(&b, amps).unwrap();
            let back = parse_ket(&write_ket(&k)).unwrap();
            for (a, b) in k.amplitudes().iter().zip(back.amplitudes()) {
                prop_assert_eq!(a.re.to_bits(), b.re.to_bits());
                prop_assert_eq!(a.im.to_bits(), b.im.to_bits());
            }
        }
    }
}
