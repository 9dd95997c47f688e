//! File formats: headerless CSV point clouds and distance matrices, CSV
//! criterion curves.

use std::path::Path;

use crate::metric::{DistanceMatrix, PointCloud};
use crate::selection::ScanResult;
use crate::{Error, Result};

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io { path: path.display().to_string(), source }
}

fn csv_err(path: &Path, source: csv::Error) -> Error {
    Error::Csv { path: path.display().to_string(), source }
}

/// Reads a headerless CSV point cloud: one point per row, the numeric
/// columns are its coordinates. Accepts LF and CRLF endings.
pub fn read_point_cloud(path: impl AsRef<Path>) -> Result<PointCloud> {
    let path = path.as_ref();
    let points = read_numeric_csv(path)?;
    if points.is_empty() {
        return Err(Error::InvalidInput(format!("{}: no points", path.display())));
    }
    PointCloud::new(points)
}

/// Reads a headerless CSV square distance matrix.
pub fn read_distance_matrix(path: impl AsRef<Path>) -> Result<DistanceMatrix> {
    let path = path.as_ref();
    let rows = read_numeric_csv(path)?;
    if rows.is_empty() {
        return Err(Error::InvalidInput(format!("{}: no rows", path.display())));
    }
    DistanceMatrix::from_rows(&rows)
}

fn read_numeric_csv(path: &Path) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(path)
        .map_err(|e| csv_err(path, e))?;
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_err(path, e))?;
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let row: std::result::Result<Vec<f64>, _> =
            record.iter().map(|f| f.parse::<f64>()).collect();
        match row {
            Ok(r) => rows.push(r),
            Err(e) => {
                return Err(Error::InvalidInput(format!(
                    "{}: row {}: {e}",
                    path.display(),
                    i + 1
                )))
            }
        }
    }
    Ok(rows)
}

/// Writes a point cloud as headerless CSV with round-trip float formatting.
pub fn write_point_cloud(path: impl AsRef<Path>, pc: &PointCloud) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    for p in pc.points() {
        let row: Vec<String> = p.iter().map(|x| format!("{x}")).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| io_err(path, e))
}

/// Criterion curve as CSV, one row per grid point.
pub fn scan_curve_csv(result: &ScanResult) -> String {
    let mut out = String::from("r,D,n_simplices_down,n_simplices_q,n_simplices_up,kernel_dim,skipped\n");
    for e in &result.curve {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            e.r, e.d_value, e.n_simplices[0], e.n_simplices[1], e.n_simplices[2], e.kernel_dim, e.skipped
        ));
    }
    out
}

pub fn write_scan_curve_csv(path: impl AsRef<Path>, result: &ScanResult) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, scan_curve_csv(result)).map_err(|e| io_err(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{pairwise_distances, sample, SamplerConfig, Shape};

    #[test]
    fn point_cloud_round_trip_is_lossless() {
        let cfg = SamplerConfig {
            shape: Shape::Circle { radius: 1.0 },
            n_points: 17,
            noise_sigma: 0.02,
            seed: 99,
        };
        let pc = sample(&cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("points.csv");
        write_point_cloud(&path, &pc).unwrap();
        let back = read_point_cloud(&path).unwrap();
        assert_eq!(pc, back);
    }

    #[test]
    fn crlf_and_blank_lines_accepted() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("points.csv");
        std::fs::write(&path, "0.0,0.0\r\n1.0,0.5\r\n\r\n2.0,1.0\r\n").unwrap();
        let pc = read_point_cloud(&path).unwrap();
        assert_eq!(pc.len(), 3);
        assert_eq!(pc.points()[1], vec![1.0, 0.5]);
    }

    #[test]
    fn empty_file_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.csv");
        std::fs::write(&path, "").unwrap();
        let err = read_point_cloud(&path);
        assert!(matches!(err, Err(Error::InvalidInput(msg)) if msg.contains("no points")));
    }

    #[test]
    fn non_numeric_field_is_reported_with_row() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "0.0,0.0\n0.5,oops\n").unwrap();
        let err = read_point_cloud(&path).unwrap_err();
        assert!(err.to_string().contains("row 2"));
    }

    #[test]
    fn distance_matrix_round_trip_through_csv() {
        let pc = sample(&SamplerConfig {
            shape: Shape::Circle { radius: 1.0 },
            n_points: 8,
            noise_sigma: 0.0,
            seed: 1,
        })
        .unwrap();
        let dm = pairwise_distances(&pc);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("dm.csv");
        let mut body = String::new();
        for row in dm.rows() {
            let cells: Vec<String> = row.iter().map(|x| format!("{x}")).collect();
            body.push_str(&cells.join(","));
            body.push('\n');
        }
        std::fs::write(&path, body).unwrap();
        let back = read_distance_matrix(&path).unwrap();
        assert_eq!(dm.size(), back.size());
        for i in 0..dm.size() {
            for j in 0..dm.size() {
                assert_eq!(dm.get(i, j), back.get(i, j));
            }
        }
    }
}
