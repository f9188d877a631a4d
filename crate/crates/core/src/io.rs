//! On-disk formats.
//!
//! | object | format |
//! |---|---|
//! | [`DensityMatrix`] | JSON `{"dim", "re", "im"}`, row-major `D×D` arrays |
//! | [`NPWignerTable`] | CSV `phi,n,rho_w`, phase index major |
//! | [`CGTable`] | CSV `abs_alpha,gamma,s,re,im`, radius index major |
//! | [`PolarGridSpec`] | JSON `{"r_max", "n_r", "m_gamma"}` |
//! | [`FourierSymbol`] | JSON `{"m_max", "coef_re", "coef_im"}`, `m = −M..M` |
//! | [`FourierLadder`] | JSON `{"dim", "d", "m", "n", "re", "im"}` |
//!
//! Every float is written with 17 significant digits in exponent form so
//! that reading a file back reproduces the exact doubles. The path `-`
//! stands for stdin or stdout.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize, Serializer};
use serde_json::value::RawValue;

use crate::cahill_glauber::{CGTable, PolarGrid, PolarGridSpec, SParameter};
use crate::fock::{DensityMatrix, Truncation};
use crate::npw::{NPWignerTable, PhaseGrid};
use crate::phase_ops::FourierSymbol;
use crate::reconstruct::FourierLadder;
use crate::{Error, Result, Tolerances, C64};

/// `x` with 17 significant digits, e.g. `-1.2500000000000000e-1`.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// A double that serializes through [`format_float`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Float(pub f64);

impl Serialize for Float {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return Err(serde::ser::Error::custom("non-finite float"));
        }
        let raw = RawValue::from_string(format_float(self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(serializer)
    }
}

fn floats(xs: impl IntoIterator<Item = f64>) -> Vec<Float> {
    xs.into_iter().map(Float).collect()
}

pub fn open_input(path: &Path) -> Result<Box<dyn Read>> {
    if path == Path::new("-") {
        Ok(Box::new(io::stdin().lock()))
    } else {
        Ok(Box::new(BufReader::new(File::open(path)?)))
    }
}

pub fn open_output(path: &Path) -> Result<Box<dyn Write>> {
    if path == Path::new("-") {
        Ok(Box::new(io::stdout().lock()))
    } else {
        Ok(Box::new(BufWriter::new(File::create(path)?)))
    }
}

#[derive(Serialize)]
struct DensityOut {
    dim: usize,
    re: Vec<Vec<Float>>,
    im: Vec<Vec<Float>>,
}

#[derive(Deserialize)]
struct DensityIn {
    dim: usize,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

pub fn write_density_json(rho: &DensityMatrix, mut out: impl Write) -> Result<()> {
    let d = rho.dim();
    let rows = |f: fn(C64) -> f64| -> Vec<Vec<Float>> {
        (0..d).map(|j| floats((0..d).map(|k| f(rho.get(j, k))))).collect()
    };
    let doc = DensityOut { dim: d, re: rows(|z| z.re), im: rows(|z| z.im) };
    serde_json::to_writer(&mut out, &doc)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

/// Reads and validates a density matrix.
pub fn read_density_json(input: impl Read, tol: &Tolerances) -> Result<DensityMatrix> {
    let doc: DensityIn = serde_json::from_reader(input)?;
    let d = doc.dim;
    Truncation::new(d)?;
    let shape_ok = |m: &Vec<Vec<f64>>| m.len() == d && m.iter().all(|r| r.len() == d);
    if !shape_ok(&doc.re) || !shape_ok(&doc.im) {
        return Err(Error::Parse(format!("density arrays are not {d}x{d}")));
    }
    let m = DMatrix::from_fn(d, d, |j, k| C64::new(doc.re[j][k], doc.im[j][k]));
    DensityMatrix::new(m, tol)
}

const NPW_HEADER: [&str; 3] = ["phi", "n", "rho_w"];

/// Writes the table, or only the Fock rows in `rows` when given.
pub fn write_npw_csv(table: &NPWignerTable, rows: Option<&[usize]>, out: impl Write) -> Result<()> {
    let d = table.truncation().dim();
    let selected: Vec<usize> = match rows {
        Some(r) => {
            for &n in r {
                table.truncation().check_index(n)?;
            }
            r.to_vec()
        }
        None => (0..d).collect(),
    };
    let mut w = csv::Writer::from_writer(out);
    w.write_record(NPW_HEADER)?;
    let grid = table.grid();
    for j in 0..grid.len() {
        let phi = format_float(grid.node(j));
        for &n in &selected {
            w.write_record([phi.as_str(), &n.to_string(), &format_float(table.get(j, n))])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn parse_f64(field: Option<&str>, what: &str, line: usize) -> Result<f64> {
    let s = field.ok_or_else(|| Error::Parse(format!("line {line}: missing {what}")))?;
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("line {line}: bad {what} '{s}'")))?;
    if !v.is_finite() {
        return Err(Error::Parse(format!("line {line}: non-finite {what}")));
    }
    Ok(v)
}

fn check_header(r: &mut csv::Reader<impl Read>, expected: &[&str]) -> Result<()> {
    let header = r.headers()?;
    if header.iter().map(str::trim).ne(expected.iter().copied()) {
        return Err(Error::Parse(format!(
            "expected header '{}', found '{}'",
            expected.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    Ok(())
}

/// Reads a complete table. The phase grid and dimension are inferred from
/// the rows, which must cover every `(φ_j, n)` in writer order.
pub fn read_npw_csv(input: impl Read) -> Result<NPWignerTable> {
    let mut r = csv::Reader::from_reader(input);
    check_header(&mut r, &NPW_HEADER)?;
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        if rec.len() != 3 {
            return Err(Error::Parse(format!("line {line}: expected 3 fields")));
        }
        let phi = parse_f64(rec.get(0), "phi", line)?;
        let n: usize = rec[1]
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("line {line}: bad Fock index '{}'", &rec[1])))?;
        let v = parse_f64(rec.get(2), "rho_w", line)?;
        rows.push((phi, n, v));
    }
    let d = rows.iter().map(|r| r.1).max().map(|n| n + 1).unwrap_or(0);
    if d == 0 || rows.len() % d != 0 {
        return Err(Error::Parse(format!(
            "{} rows do not form a complete table",
            rows.len()
        )));
    }
    let m = rows.len() / d;
    let grid = PhaseGrid::new(m)?;
    let mut values = DMatrix::zeros(m, d);
    for (idx, &(phi, n, v)) in rows.iter().enumerate() {
        let (j, expected_n) = (idx / d, idx % d);
        if n != expected_n || (phi - grid.node(j)).abs() > 1e-12 {
            return Err(Error::Parse(format!(
                "line {}: expected (phi_{j}, {expected_n}), found ({phi}, {n})",
                idx + 2
            )));
        }
        values[(j, n)] = v;
    }
    NPWignerTable::new(grid, Truncation::new(d)?, values)
}

const CG_HEADER: [&str; 5] = ["abs_alpha", "gamma", "s", "re", "im"];

pub fn write_cg_csv(table: &CGTable, out: impl Write) -> Result<()> {
    let grid = table.grid();
    let s = format_float(table.s().value());
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CG_HEADER)?;
    for (i, &r) in grid.radii().iter().enumerate() {
        let r = format_float(r);
        for q in 0..grid.m_gamma() {
            let v = table.get(i, q);
            w.write_record([
                r.as_str(),
                &format_float(grid.gamma(q)),
                &s,
                &format_float(v.re),
                &format_float(v.im),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads a table written by [`write_cg_csv`]. The radial rule is rebuilt
/// from the node count and `r_max = r_1 + r_N` (Gauss-Legendre nodes are
/// symmetric about `r_max/2`), then checked node by node.
pub fn read_cg_csv(input: impl Read) -> Result<CGTable> {
    let mut r = csv::Reader::from_reader(input);
    check_header(&mut r, &CG_HEADER)?;
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        if rec.len() != 5 {
            return Err(Error::Parse(format!("line {line}: expected 5 fields")));
        }
        let vals = (0..5)
            .map(|c| parse_f64(rec.get(c), CG_HEADER[c], line))
            .collect::<Result<Vec<_>>>()?;
        rows.push(vals);
    }
    if rows.is_empty() {
        return Err(Error::Parse("empty table".into()));
    }
    let s = rows[0][2];
    if rows.iter().any(|r| r[2] != s) {
        return Err(Error::Parse("ordering parameter varies within the table".into()));
    }
    let radii: BTreeSet<u64> = rows.iter().map(|r| r[0].to_bits()).collect();
    let n_r = radii.len();
    if rows.len() % n_r != 0 {
        return Err(Error::Parse("rows do not form a complete polar grid".into()));
    }
    let m_gamma = rows.len() / n_r;
    let r_min = f64::from_bits(*radii.first().unwrap_or(&0));
    let r_top = f64::from_bits(*radii.last().unwrap_or(&0));
    let grid = PolarGrid::new(PolarGridSpec { r_max: r_min + r_top, n_r, m_gamma })?;
    let mut values = DMatrix::zeros(n_r, m_gamma);
    for (idx, row) in rows.iter().enumerate() {
        let (i, q) = (idx / m_gamma, idx % m_gamma);
        let r_ok = (row[0] - grid.radii()[i]).abs() <= 1e-12 * grid.r_max();
        let g_ok = (row[1] - grid.gamma(q)).abs() <= 1e-12;
        if !r_ok || !g_ok {
            return Err(Error::Parse(format!(
                "line {}: node ({}, {}) is not on the reconstructed polar grid",
                idx + 2,
                row[0],
                row[1]
            )));
        }
        values[(i, q)] = C64::new(row[3], row[4]);
    }
    CGTable::new(grid, SParameter::new(s)?, values)
}

pub fn write_grid_spec_json(spec: &PolarGridSpec, mut out: impl Write) -> Result<()> {
    serde_json::to_writer(&mut out, spec)?;
    writeln!(out)?;
    Ok(())
}

pub fn read_grid_spec_json(input: impl Read) -> Result<PolarGridSpec> {
    let spec: PolarGridSpec = serde_json::from_reader(input)?;
    PolarGrid::new(spec)?;
    Ok(spec)
}

#[derive(Serialize)]
struct SymbolOut {
    m_max: usize,
    coef_re: Vec<Float>,
    coef_im: Vec<Float>,
}

#[derive(Deserialize)]
struct SymbolIn {
    m_max: usize,
    coef_re: Vec<f64>,
    coef_im: Vec<f64>,
}

pub fn write_symbol_json(sym: &FourierSymbol, mut out: impl Write) -> Result<()> {
    let doc = SymbolOut {
        m_max: sym.m_max(),
        coef_re: floats(sym.coefs().iter().map(|c| c.re)),
        coef_im: floats(sym.coefs().iter().map(|c| c.im)),
    };
    serde_json::to_writer(&mut out, &doc)?;
    writeln!(out)?;
    Ok(())
}

pub fn read_symbol_json(input: impl Read) -> Result<FourierSymbol> {
    let doc: SymbolIn = serde_json::from_reader(input)?;
    if doc.coef_re.len() != doc.coef_im.len() {
        return Err(Error::Parse("coef_re and coef_im differ in length".into()));
    }
    let coefs = doc.coef_re.iter().zip(&doc.coef_im).map(|(&a, &b)| C64::new(a, b)).collect();
    FourierSymbol::new(doc.m_max, coefs)
}

#[derive(Serialize)]
struct LadderOut {
    dim: usize,
    d: Vec<Float>,
    m: Vec<usize>,
    n: Vec<usize>,
    re: Vec<Float>,
    im: Vec<Float>,
}

#[derive(Deserialize)]
struct LadderIn {
    dim: usize,
    d: Vec<f64>,
    m: Vec<usize>,
    n: Vec<usize>,
    re: Vec<f64>,
    im: Vec<f64>,
}

/// `d` holds `ϱ_0(n) + ϱ_0*(n)`; the parallel `m, n, re, im` arrays list
/// every stored `ϱ_m(n)`, `m` ascending then `n` ascending.
pub fn write_ladder_json(ladder: &FourierLadder, mut out: impl Write) -> Result<()> {
    let entries: Vec<(usize, usize, C64)> = ladder.iter().collect();
    let doc = LadderOut {
        dim: ladder.truncation().dim(),
        d: floats(ladder.diag_sum().iter().copied()),
        m: entries.iter().map(|e| e.0).collect(),
        n: entries.iter().map(|e| e.1).collect(),
        re: floats(entries.iter().map(|e| e.2.re)),
        im: floats(entries.iter().map(|e| e.2.im)),
    };
    serde_json::to_writer(&mut out, &doc)?;
    writeln!(out)?;
    Ok(())
}

pub fn read_ladder_json(input: impl Read) -> Result<FourierLadder> {
    let doc: LadderIn = serde_json::from_reader(input)?;
    let t = Truncation::new(doc.dim)?;
    let d = doc.dim;
    let len = doc.m.len();
    if doc.n.len() != len || doc.re.len() != len || doc.im.len() != len {
        return Err(Error::Parse("ladder arrays differ in length".into()));
    }
    let mut coeffs: Vec<Vec<C64>> = (1..d).map(|m| vec![C64::new(0.0, 0.0); d - m]).collect();
    let mut seen = vec![vec![false; d]; d];
    for i in 0..len {
        let (m, n) = (doc.m[i], doc.n[i]);
        if m == 0 || m >= d || n + m >= d {
            return Err(Error::Parse(format!("ladder entry ({m}, {n}) outside dimension {d}")));
        }
        if std::mem::replace(&mut seen[m][n], true) {
            return Err(Error::Parse(format!("duplicate ladder entry ({m}, {n})")));
        }
        coeffs[m - 1][n] = C64::new(doc.re[i], doc.im[i]);
    }
    FourierLadder::new(t, doc.d, coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cahill_glauber::w_s_from_density;
    use crate::fock::random_density;
    use crate::npw::npw_from_density;
    use crate::reconstruct::ladder_closed_form;
    use crate::states::number_state;

    fn t(d: usize) -> Truncation {
        Truncation::new(d).unwrap()
    }

    #[test]
    fn float_format() {
        assert_eq!(format_float(0.75), "7.5000000000000000e-1");
        assert_eq!(format_float(-2.0), "-2.0000000000000000e0");
        let x = 0.1 + 0.2;
        assert_eq!(format_float(x).parse::<f64>().unwrap(), x);
        assert!(serde_json::to_string(&Float(f64::NAN)).is_err());
    }

    #[test]
    fn density_json_round_trip_is_exact() {
        let rho = random_density(t(5), 11);
        let mut buf = Vec::new();
        write_density_json(&rho, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("{\"dim\":5,\"re\":[["));
        let back = read_density_json(&buf[..], &Tolerances::default()).unwrap();
        assert_eq!(back, rho);
    }

    #[test]
    fn density_json_rejects_bad_input() {
        let tol = Tolerances::default();
        let ragged = r#"{"dim":2,"re":[[1,0],[0]],"im":[[0,0],[0,0]]}"#;
        assert!(matches!(read_density_json(ragged.as_bytes(), &tol), Err(Error::Parse(_))));
        let bad_trace = r#"{"dim":2,"re":[[1,0],[0,1]],"im":[[0,0],[0,0]]}"#;
        assert!(matches!(
            read_density_json(bad_trace.as_bytes(), &tol),
            Err(Error::TraceMismatch { .. })
        ));
        assert!(matches!(read_density_json("{".as_bytes(), &tol), Err(Error::Json(_))));
    }

    #[test]
    fn npw_csv_layout_and_round_trip() {
        let vac = number_state(t(2), 0).unwrap().to_density();
        let table = npw_from_density(&vac, PhaseGrid::new(3).unwrap()).unwrap();
        let mut buf = Vec::new();
        write_npw_csv(&table, None, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "phi,n,rho_w");
        assert_eq!(lines.len(), 1 + 3 * 2);
        assert!(lines[1].starts_with("-3.1415926535897931e0,0,1.5915494309189"));
        assert!(lines[2].starts_with("-3.1415926535897931e0,1,"));
        assert_eq!(read_npw_csv(&buf[..]).unwrap(), table);

        let mut sel = Vec::new();
        write_npw_csv(&table, Some(&[1]), &mut sel).unwrap();
        assert_eq!(String::from_utf8(sel).unwrap().lines().count(), 4);
        assert!(write_npw_csv(&table, Some(&[2]), Vec::new()).is_err());
    }

    #[test]
    fn npw_csv_rejects_truncated_or_corrupt_files() {
        let rho = random_density(t(4), 1);
        let table = npw_from_density(&rho, PhaseGrid::for_dim(t(4))).unwrap();
        let mut buf = Vec::new();
        write_npw_csv(&table, None, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let cut: String = text.lines().take(10).map(|l| format!("{l}\n")).collect();
        assert!(matches!(read_npw_csv(cut.as_bytes()), Err(Error::Parse(_))));
        let garbled = text.replacen(",1,", ",x,", 1);
        assert!(matches!(read_npw_csv(garbled.as_bytes()), Err(Error::Parse(_))));
        let bad_header = text.replacen("rho_w", "value", 1);
        assert!(matches!(read_npw_csv(bad_header.as_bytes()), Err(Error::Parse(_))));
    }

    #[test]
    fn cg_csv_round_trip() {
        let rho = random_density(t(3), 2);
        let grid = PolarGrid::new(PolarGridSpec { r_max: 4.0, n_r: 7, m_gamma: 8 }).unwrap();
        let table = w_s_from_density(&rho, &grid, SParameter::new(-0.25).unwrap()).unwrap();
        let mut buf = Vec::new();
        write_cg_csv(&table, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("abs_alpha,gamma,s,re,im\n"));
        assert_eq!(text.lines().count(), 1 + 7 * 8);
        let back = read_cg_csv(&buf[..]).unwrap();
        assert_eq!(back.values(), table.values());
        assert!((back.grid().r_max() - 4.0).abs() < 1e-14);
        assert_eq!(back.s(), table.s());
    }

    #[test]
    fn grid_spec_json() {
        let spec: PolarGridSpec =
            read_grid_spec_json(r#"{"r_max": 8.5, "n_r": 120, "m_gamma": 64}"#.as_bytes()).unwrap();
        assert_eq!(spec, PolarGridSpec { r_max: 8.5, n_r: 120, m_gamma: 64 });
        assert!(read_grid_spec_json(r#"{"r_max": -1, "n_r": 1, "m_gamma": 1}"#.as_bytes()).is_err());
        let mut buf = Vec::new();
        write_grid_spec_json(&spec, &mut buf).unwrap();
        assert_eq!(read_grid_spec_json(&buf[..]).unwrap(), spec);
    }

    #[test]
    fn symbol_json() {
        let sym = FourierSymbol::from_fn(2, |m| C64::new(m as f64, -0.5 * m as f64));
        let mut buf = Vec::new();
        write_symbol_json(&sym, &mut buf).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v["m_max"], 2);
        assert_eq!(v["coef_re"][0].as_f64(), Some(-2.0));
        assert_eq!(read_symbol_json(&buf[..]).unwrap(), sym);
        let mismatched = r#"{"m_max":1,"coef_re":[0,1,0],"coef_im":[0,0]}"#;
        assert!(read_symbol_json(mismatched.as_bytes()).is_err());
    }

    #[test]
    fn ladder_json() {
        let rho = random_density(t(4), 6);
        let ladder = ladder_closed_form(&npw_from_density(&rho, PhaseGrid::for_dim(t(4))).unwrap()).unwrap();
        let mut buf = Vec::new();
        write_ladder_json(&ladder, &mut buf).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v["m"].as_array().unwrap().len(), 6);
        assert_eq!(v["d"].as_array().unwrap().len(), 4);
        assert_eq!(read_ladder_json(&buf[..]).unwrap(), ladder);
        let outside = r#"{"dim":2,"d":[0.5,0.5],"m":[1],"n":[1],"re":[0],"im":[0]}"#;
        assert!(read_ladder_json(outside.as_bytes()).is_err());
    }
}
