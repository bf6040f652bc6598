//! Plain-text export of kernel matrices and reports.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::Result;
use crate::report::VerificationReport;
use crate::spectral::KernelMatrix;

/// Writes a matrix as CSV, one row per line, 17 significant digits.
pub fn write_matrix_csv<W: Write>(out: &mut W, m: &DMatrix<f64>) -> io::Result<()> {
    for row in m.row_iter() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}

pub fn kernel_csv(k: &KernelMatrix) -> String {
    let mut buf = Vec::new();
    write_matrix_csv(&mut buf, &k.entries).expect("write to memory");
    String::from_utf8(buf).expect("ascii output")
}

/// Parses CSV written by [`write_matrix_csv`].
pub fn read_matrix_csv(text: &str) -> Result<DMatrix<f64>> {
    let rows: Vec<Vec<f64>> = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.split(',').map(|c| c.trim().parse::<f64>()).collect::<std::result::Result<_, _>>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| crate::Error::InvalidParameter {
            name: "csv",
            msg: e.to_string(),
        })?;
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(crate::Error::InvalidParameter {
            name: "csv",
            msg: "ragged rows".into(),
        });
    }
    Ok(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

/// Writes `<dir>/<file_stem>.json`, returning the path.
pub fn write_report(dir: &Path, report: &VerificationReport) -> Result<std::path::PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(format!("{}.json", report.file_stem()));
    fs::write(&path, report.to_json() + "\n")?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::KernelTime;

    #[test]
    fn csv_round_trip_is_exact() {
        let m = DMatrix::from_fn(3, 2, |i, j| (i as f64 + 1.0) / 3.0 - (j as f64) * 1e-300 + 0.1);
        let k = KernelMatrix {
            degree: 0,
            time: KernelTime::At(0.1),
            entries: m.clone(),
        };
        let text = kernel_csv(&k);
        assert_eq!(text.lines().count(), 3);
        assert_eq!(read_matrix_csv(&text).unwrap(), m);
        assert!(read_matrix_csv("1,2\n3\n").is_err());
        assert!(read_matrix_csv("1,x\n").is_err());
    }

    #[test]
    fn report_file_name() {
        let dir = tempfile::tempdir().unwrap();
        let r = VerificationReport::gated("lemma1", "tetra", vec![0.1], vec![0.0], vec![0.0], 1e-8)
            .with_degree(1)
            .with_scheme("identity");
        let p = write_report(dir.path(), &r).unwrap();
        assert_eq!(p.file_name().unwrap(), "lemma1_tetra_identity_k1.json");
        let text = std::fs::read_to_string(p).unwrap();
        assert!(text.contains("\"schema\": 1"));
    }
}
