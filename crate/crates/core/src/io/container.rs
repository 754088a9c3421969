use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::byte_offset;
use crate::error::{DoaError, Result};
use crate::synthesis::{GroundTruth, NoiseStdMatrix, SnapshotMatrix};

pub const CONTAINER_FORMAT: &str = "hetdoa-snapshots";
pub const CONTAINER_VERSION: u32 = 1;

/// On-disk layout of a snapshot container. Complex matrices are stored
/// row-major as interleaved `re, im` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotFile {
    pub format: String,
    pub version: u32,
    pub n_sensors: usize,
    pub n_snapshots: usize,
    pub data: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_std: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitudes: Option<AmplitudeBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeBlock {
    pub n_rows: usize,
    pub data: Vec<f64>,
}

fn pack_complex(m: &DMatrix<Complex64>) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * m.len());
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            out.push(m[(r, c)].re);
            out.push(m[(r, c)].im);
        }
    }
    out
}

fn unpack_complex(rows: usize, cols: usize, data: &[f64], what: &str) -> Result<DMatrix<Complex64>> {
    if data.len() != 2 * rows * cols {
        return Err(DoaError::invalid(format!(
            "{what}: expected {} numbers for {rows}x{cols} complex values, found {}",
            2 * rows * cols,
            data.len()
        )));
    }
    Ok(DMatrix::from_fn(rows, cols, |r, c| {
        let i = 2 * (r * cols + c);
        Complex64::new(data[i], data[i + 1])
    }))
}

impl SnapshotFile {
    pub fn from_snapshots(y: &SnapshotMatrix) -> Self {
        let (n, l) = y.data().shape();
        let truth = y.truth.as_ref();
        Self {
            format: CONTAINER_FORMAT.to_string(),
            version: CONTAINER_VERSION,
            n_sensors: n,
            n_snapshots: l,
            data: pack_complex(y.data()),
            noise_std: truth.map(|t| {
                let v = t.noise_std.values();
                (0..n).flat_map(|r| (0..l).map(move |c| v[(r, c)])).collect()
            }),
            amplitudes: truth.map(|t| AmplitudeBlock {
                n_rows: t.amplitudes.nrows(),
                data: pack_complex(&t.amplitudes),
            }),
            seed: y.seed,
        }
    }

    pub fn into_snapshots(self) -> Result<SnapshotMatrix> {
        if self.format != CONTAINER_FORMAT {
            return Err(DoaError::invalid(format!(
                "unexpected container format '{}'",
                self.format
            )));
        }
        if self.version != CONTAINER_VERSION {
            return Err(DoaError::invalid(format!(
                "unsupported container version {}",
                self.version
            )));
        }
        let (n, l) = (self.n_sensors, self.n_snapshots);
        let data = unpack_complex(n, l, &self.data, "data")?;
        let truth = match (self.noise_std, self.amplitudes) {
            (Some(std), Some(amp)) => {
                if std.len() != n * l {
                    return Err(DoaError::invalid("noise_std has the wrong length"));
                }
                let std = NoiseStdMatrix::new(DMatrix::from_row_slice(n, l, &std))?;
                let amplitudes = unpack_complex(amp.n_rows, l, &amp.data, "amplitudes")?;
                Some(GroundTruth {
                    amplitudes,
                    noise_std: std,
                })
            }
            (None, None) => None,
            _ => {
                return Err(DoaError::invalid(
                    "noise_std and amplitudes must be given together",
                ))
            }
        };
        let mut y = SnapshotMatrix::new(data)?;
        y.truth = truth;
        y.seed = self.seed;
        Ok(y)
    }
}

pub fn snapshots_to_json(y: &SnapshotMatrix) -> String {
    serde_json::to_string(&SnapshotFile::from_snapshots(y)).expect("container serializes")
}

pub fn snapshots_from_json(text: &str) -> Result<SnapshotMatrix> {
    let file: SnapshotFile = serde_json::from_str(text).map_err(|e| DoaError::Parse {
        offset: byte_offset(text, e.line(), e.column()),
        message: e.to_string(),
    })?;
    file.into_snapshots()
}

/// Writes the container; a `.csv` extension selects the CSV variant.
pub fn write_snapshots(path: &Path, y: &SnapshotMatrix) -> Result<()> {
    if path.extension().is_some_and(|e| e == "csv") {
        return write_snapshots_csv(path, y);
    }
    fs::write(path, snapshots_to_json(y))?;
    Ok(())
}

pub fn read_snapshots(path: &Path) -> Result<SnapshotMatrix> {
    if path.extension().is_some_and(|e| e == "csv") {
        return read_snapshots_csv(path);
    }
    snapshots_from_json(&fs::read_to_string(path)?)
}

/// CSV variant: one row per entry with columns `sensor, snapshot, re, im`.
pub fn write_snapshots_csv(path: &Path, y: &SnapshotMatrix) -> Result<()> {
    let mut out = String::from("# hetdoa snapshots v1\nsensor,snapshot,re,im\n");
    let d = y.data();
    for l in 0..d.ncols() {
        for n in 0..d.nrows() {
            out.push_str(&format!("{n},{l},{},{}\n", d[(n, l)].re, d[(n, l)].im));
        }
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn read_snapshots_csv(path: &Path) -> Result<SnapshotMatrix> {
    let text = fs::read_to_string(path)?;
    parse_snapshots_csv(&text)
}

pub(crate) fn parse_snapshots_csv(text: &str) -> Result<SnapshotMatrix> {
    let mut entries = Vec::new();
    let mut offset = 0;
    let mut header_seen = false;
    for line in text.split_inclusive('\n') {
        let start = offset;
        offset += line.len();
        let row = line.trim();
        if row.is_empty() || row.starts_with('#') {
            continue;
        }
        if !header_seen {
            if row != "sensor,snapshot,re,im" {
                return Err(DoaError::Parse {
                    offset: start,
                    message: format!("expected header 'sensor,snapshot,re,im', found '{row}'"),
                });
            }
            header_seen = true;
            continue;
        }
        let fields: Vec<&str> = row.split(',').collect();
        let bad = |message: String| DoaError::Parse {
            offset: start,
            message,
        };
        if fields.len() != 4 {
            return Err(bad(format!("expected 4 fields, found {}", fields.len())));
        }
        let n: usize = fields[0].trim().parse().map_err(|_| bad(format!("bad sensor index '{}'", fields[0])))?;
        let l: usize = fields[1].trim().parse().map_err(|_| bad(format!("bad snapshot index '{}'", fields[1])))?;
        let re: f64 = fields[2].trim().parse().map_err(|_| bad(format!("bad real part '{}'", fields[2])))?;
        let im: f64 = fields[3].trim().parse().map_err(|_| bad(format!("bad imaginary part '{}'", fields[3])))?;
        entries.push((n, l, Complex64::new(re, im)));
    }
    if entries.is_empty() {
        return Err(DoaError::Parse {
            offset: text.len(),
            message: "no data rows".into(),
        });
    }
    let n = entries.iter().map(|e| e.0).max().unwrap_or(0) + 1;
    let l = entries.iter().map(|e| e.1).max().unwrap_or(0) + 1;
    if entries.len() != n * l {
        return Err(DoaError::invalid(format!(
            "CSV has {} rows, expected {n} x {l} = {}",
            entries.len(),
            n * l
        )));
    }
    let mut seen = vec![false; n * l];
    let mut data = DMatrix::zeros(n, l);
    for (s, t, z) in entries {
        if std::mem::replace(&mut seen[s * l + t], true) {
            return Err(DoaError::invalid(format!("duplicate entry ({s}, {t})")));
        }
        data[(s, t)] = z;
    }
    SnapshotMatrix::new(data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::{build_dictionary, AngularGrid, ArrayGeometry};
    use crate::synthesis::{simulate, NoiseCase, NoiseSpec, SourceScenario};
    use proptest::prelude::*;

    fn sample() -> SnapshotMatrix {
        let d = build_dictionary(
            &ArrayGeometry::ula(5, 0.5).unwrap(),
            &AngularGrid::uniform(-90.0, 90.0, 10.0).unwrap(),
        );
        simulate(
            &d,
            &SourceScenario::single(-10.0, 0.0),
            &NoiseSpec::new(NoiseCase::III, -5.0),
            4,
            9,
        )
        .unwrap()
        .snapshots
    }

    #[test]
    fn json_round_trip_keeps_truth() {
        let y = sample();
        let back = snapshots_from_json(&snapshots_to_json(&y)).unwrap();
        assert_eq!(back, y);
    }

    #[test]
    fn parse_errors_report_offset() {
        let text = "{\"format\": \"hetdoa-snapshots\", \"version\": 1, \"n_sensors\": x}";
        match snapshots_from_json(text) {
            Err(DoaError::Parse { offset, .. }) => assert_eq!(&text[offset..offset + 1], "x"),
            other => panic!("unexpected {other:?}"),
        }
        let wrong = snapshots_to_json(&sample()).replace("\"version\":1", "\"version\":2");
        assert!(snapshots_from_json(&wrong).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let y = sample();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("y.csv");
        write_snapshots(&path, &y).unwrap();
        let back = read_snapshots(&path).unwrap();
        assert_eq!(back.data(), y.data());
    }

    #[test]
    fn csv_errors() {
        let err = parse_snapshots_csv("sensor,snapshot,re,im\n0,0,1.0\n").unwrap_err();
        assert!(matches!(err, DoaError::Parse { offset: 22, .. }), "{err}");
        assert!(parse_snapshots_csv("a,b\n").is_err());
        assert!(parse_snapshots_csv("sensor,snapshot,re,im\n0,0,1,0\n0,0,1,0\n1,1,0,0\n1,0,0,0\n").is_err());
    }

    proptest! {
        #[test]
        fn json_preserves_any_values(
            vals in proptest::collection::vec(-1e6f64..1e6, 12),
        ) {
            let m = DMatrix::from_fn(3, 2, |r, c| Complex64::new(vals[2 * (r * 2 + c)], vals[2 * (r * 2 + c) + 1]));
            let y = SnapshotMatrix::new(m).unwrap();
            let back = snapshots_from_json(&snapshots_to_json(&y)).unwrap();
            prop_assert_eq!(back.data(), y.data());
        }
    }
}
