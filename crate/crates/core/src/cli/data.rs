//! CSV input and fixture output.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::CliError;
use crate::likelihood::Dataset;
use crate::linalg::Matrix;

/// A dataset read from CSV together with the column names behind each
/// design matrix (intercepts excluded).
#[derive(Debug, Clone)]
pub struct TableData {
    pub dataset: Dataset<f64>,
    pub outcome: String,
    /// Columns of the binary-part (occurrence) design.
    pub binary_covars: Vec<String>,
    /// Columns of the continuous-part (marginal mean) design.
    pub cont_covars: Vec<String>,
    /// Means subtracted from covariate columns when centering was requested.
    pub centers: Vec<(String, f64)>,
}

pub fn read_csv_file(
    path: &Path,
    outcome: &str,
    binary_covars: &[String],
    cont_covars: &[String],
    center: bool,
) -> Result<TableData, CliError> {
    let file = File::open(path)
        .map_err(|e| CliError::Input(format!("cannot open {}: {e}", path.display())))?;
    read_csv(file, outcome, binary_covars, cont_covars, center)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Reads the referenced columns. Missing or non-numeric cells are errors;
/// unreferenced columns are ignored. With `center`, every covariate column is
/// shifted by its sample mean (intercepts are untouched).
pub fn read_csv<R: Read>(
    reader: R,
    outcome: &str,
    binary_covars: &[String],
    cont_covars: &[String],
    center: bool,
) -> Result<TableData, String> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers().map_err(|e| format!("bad header row: {e}"))?.clone();
    let locate = |name: &str| -> Result<usize, String> {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| format!("unknown column '{name}'"))
    };
    let y_col = locate(outcome)?;
    let mut covars: Vec<String> = Vec::new();
    for c in binary_covars.iter().chain(cont_covars) {
        if !covars.contains(c) {
            covars.push(c.clone());
        }
    }
    let cols = covars.iter().map(|c| locate(c)).collect::<Result<Vec<_>, _>>()?;

    let mut y = Vec::new();
    let mut values: Vec<Vec<f64>> = vec![Vec::new(); cols.len()];
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| format!("row {}: {e}", i + 1))?;
        let cell = |col: usize| -> Result<f64, String> {
            let raw = rec.get(col).map(str::trim).unwrap_or("");
            if raw.is_empty() {
                return Err(format!("row {}: missing value in column '{}'", i + 1, &headers[col]));
            }
            raw.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| {
                format!("row {}: non-numeric value '{raw}' in column '{}'", i + 1, &headers[col])
            })
        };
        let yi = cell(y_col)?;
        if yi < 0.0 {
            return Err(format!("row {}: negative outcome {yi}", i + 1));
        }
        y.push(yi);
        for (v, &c) in values.iter_mut().zip(&cols) {
            v.push(cell(c)?);
        }
    }
    if y.is_empty() {
        return Err("no data rows".into());
    }
    let n = y.len();
    let mut centers = Vec::new();
    if center {
        for (name, v) in covars.iter().zip(values.iter_mut()) {
            let m = v.iter().sum::<f64>() / n as f64;
            v.iter_mut().for_each(|x| *x -= m);
            centers.push((name.clone(), m));
        }
    }
    let design = |names: &[String]| -> Matrix<f64> {
        let idx: Vec<usize> =
            names.iter().map(|c| covars.iter().position(|k| k == c).expect("located")).collect();
        Matrix::from_fn(n, names.len() + 1, |i, j| if j == 0 { 1.0 } else { values[idx[j - 1]][i] })
    };
    let x = design(cont_covars);
    let z = design(binary_covars);
    let dataset = Dataset::new(y, x, z).map_err(|e| e.to_string())?;
    Ok(TableData {
        dataset,
        outcome: outcome.to_string(),
        binary_covars: binary_covars.to_vec(),
        cont_covars: cont_covars.to_vec(),
        centers,
    })
}

/// Writes `outcome` followed by the named columns. Values use the shortest
/// representation that parses back to the same `f64`.
pub fn write_csv<W: Write>(
    writer: W,
    outcome: (&str, &[f64]),
    columns: &[(&str, &[f64])],
) -> Result<(), CliError> {
    let io = |e: csv::Error| CliError::Input(format!("write failed: {e}"));
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec![outcome.0];
    header.extend(columns.iter().map(|c| c.0));
    w.write_record(&header).map_err(io)?;
    for i in 0..outcome.1.len() {
        let mut row = vec![outcome.1[i].to_string()];
        row.extend(columns.iter().map(|c| c.1[i].to_string()));
        w.write_record(&row).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::Input(format!("write failed: {e}")))
}

/// Writes a simulated dataset (design `[1, x1, x2]` in both parts) as
/// columns `y, x1, x2`.
pub fn write_sim_dataset<W: Write>(writer: W, d: &Dataset<f64>) -> Result<(), CliError> {
    let x = d.x();
    if x.ncols() != 3 {
        return Err(CliError::Input("simulated datasets have design [1, x1, x2]".into()));
    }
    let x1: Vec<f64> = x.rows_iter().map(|r| r[1]).collect();
    let x2: Vec<f64> = x.rows_iter().map(|r| r[2]).collect();
    write_csv(writer, ("y", d.y()), &[("x1", &x1), ("x2", &x2)])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn reads_selected_columns_with_intercepts() {
        let csv = "id,y,a,b\n1,0,1,2.5\n2,3.5,0,1\n3,1,1,-2\n";
        let t = read_csv(csv.as_bytes(), "y", &names(&["a"]), &names(&["b", "a"]), false).unwrap();
        assert_eq!(t.dataset.y(), &[0.0, 3.5, 1.0]);
        assert_eq!(t.dataset.x().row(0), &[1.0, 2.5, 1.0]);
        assert_eq!(t.dataset.z().row(2), &[1.0, 1.0]);
    }

    #[test]
    fn rejects_missing_and_non_numeric_cells() {
        let e = read_csv("y,a\n1,\n0,1\n".as_bytes(), "y", &names(&["a"]), &[], false).unwrap_err();
        assert!(e.contains("missing value"), "{e}");
        let e = read_csv("y,a\n1,abc\n".as_bytes(), "y", &names(&["a"]), &[], false).unwrap_err();
        assert!(e.contains("non-numeric"), "{e}");
        let e = read_csv("y,a\nNaN,1\n".as_bytes(), "y", &[], &[], false).unwrap_err();
        assert!(e.contains("non-numeric"), "{e}");
        let e = read_csv("y,a\n1,1\n".as_bytes(), "y", &names(&["zz"]), &[], false).unwrap_err();
        assert!(e.contains("unknown column 'zz'"), "{e}");
        let e = read_csv("y\n-1\n".as_bytes(), "y", &[], &[], false).unwrap_err();
        assert!(e.contains("negative"), "{e}");
    }

    #[test]
    fn centering_shifts_covariates_only() {
        let csv = "y,a,b\n0,1,10\n2,3,20\n";
        let t = read_csv(csv.as_bytes(), "y", &names(&["a"]), &names(&["a", "b"]), true).unwrap();
        assert_eq!(t.dataset.x().row(0), &[1.0, -1.0, -5.0]);
        assert_eq!(t.dataset.z().row(1), &[1.0, 1.0]);
        assert_eq!(t.centers, vec![("a".to_string(), 2.0), ("b".to_string(), 15.0)]);
    }

    #[test]
    fn write_then_read_is_exact() {
        let y = [0.0, 1.0 / 3.0, 2.0e-300, 12345.678901234567];
        let a = [0.1, 0.2, 0.30000000000000004, -7.0];
        let mut buf = Vec::new();
        write_csv(&mut buf, ("y", &y), &[("a", &a)]).unwrap();
        let t = read_csv(buf.as_slice(), "y", &[], &names(&["a"]), false).unwrap();
        assert_eq!(t.dataset.y(), &y);
        let back: Vec<f64> = t.dataset.x().rows_iter().map(|r| r[1]).collect();
        assert_eq!(back, a);
    }
}
