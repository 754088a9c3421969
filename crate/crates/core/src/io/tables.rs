use serde::{Deserialize, Serialize};

use crate::array::{AngularGrid, SteeringDictionary};
use crate::beamform::Spectrum;
use crate::error::{DoaError, Result};
use crate::sbl::SblResult;

pub const CSV_SCHEMA_VERSION: u32 = 1;

fn header(kind: &str) -> String {
    format!("# hetdoa {kind} v{CSV_SCHEMA_VERSION}\n")
}

fn write_rows<T: Serialize>(kind: &str, rows: impl IntoIterator<Item = T>) -> String {
    let mut w = csv::Writer::from_writer(header(kind).into_bytes());
    for r in rows {
        w.serialize(r).expect("in-memory csv write");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv flush")).expect("utf-8 csv")
}

fn read_rows<T: for<'de> Deserialize<'de>>(kind: &str, text: &str) -> Result<Vec<T>> {
    let expected = header(kind);
    if !text.starts_with(expected.trim_end()) {
        return Err(DoaError::Parse {
            offset: 0,
            message: format!("missing '{}' header line", expected.trim_end()),
        });
    }
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    rdr.deserialize()
        .map(|r| {
            r.map_err(|e| DoaError::Parse {
                offset: e.position().map_or(0, |p| p.byte() as usize),
                message: e.to_string(),
            })
        })
        .collect()
}

#[derive(Serialize, Deserialize)]
struct SpectrumRow<'a> {
    angle_deg: f64,
    power_linear: f64,
    power_db: f64,
    method: std::borrow::Cow<'a, str>,
}

pub fn spectrum_csv(s: &Spectrum) -> String {
    let db = s.values_db();
    write_rows(
        "spectrum",
        (0..s.values.len()).map(|i| SpectrumRow {
            angle_deg: s.grid.angle(i),
            power_linear: s.values[i],
            power_db: db[i],
            method: s.method_tag.as_str().into(),
        }),
    )
}

pub fn read_spectrum_csv(text: &str) -> Result<Spectrum> {
    let rows: Vec<SpectrumRow> = read_rows("spectrum", text)?;
    let Some(first) = rows.first() else {
        return Err(DoaError::invalid("spectrum CSV has no rows"));
    };
    let tag = first.method.to_string();
    if rows.iter().any(|r| r.method != tag) {
        return Err(DoaError::invalid("spectrum CSV mixes methods"));
    }
    let grid = AngularGrid::new(rows.iter().map(|r| r.angle_deg).collect())?;
    Spectrum::new(grid, rows.iter().map(|r| r.power_linear).collect(), tag)
}

/// One Monte Carlo cell of a benchmark.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RmseRow {
    pub method: String,
    pub noise_case: String,
    pub snr_db: f64,
    pub n_snapshots: usize,
    pub n_trials: usize,
    pub rmse_deg: f64,
}

pub fn rmse_csv(rows: &[RmseRow]) -> String {
    write_rows("rmse", rows)
}

pub fn read_rmse_csv(text: &str) -> Result<Vec<RmseRow>> {
    read_rows("rmse", text)
}

/// Run metadata stored next to an SBL gamma table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SblRunMeta {
    pub method: String,
    pub noise_case: String,
    pub iterations: usize,
    pub converged: bool,
    pub final_eps: f64,
    pub doas_deg: Vec<f64>,
    pub seed: Option<u64>,
}

impl SblRunMeta {
    pub fn new(
        method: &str,
        res: &SblResult,
        dict: &SteeringDictionary,
        seed: Option<u64>,
    ) -> Self {
        Self {
            method: method.to_string(),
            noise_case: res.noise.model().label().to_string(),
            iterations: res.iterations,
            converged: res.converged,
            final_eps: res.final_eps(),
            doas_deg: res.doas_deg(dict),
            seed,
        }
    }
}

#[derive(Serialize)]
struct GammaRow {
    angle_deg: f64,
    gamma: f64,
}

pub fn sbl_gamma_csv(res: &SblResult, dict: &SteeringDictionary) -> String {
    write_rows(
        "sbl-gamma",
        res.gamma.values().iter().enumerate().map(|(i, g)| GammaRow {
            angle_deg: dict.grid().angle(i),
            gamma: *g,
        }),
    )
}
