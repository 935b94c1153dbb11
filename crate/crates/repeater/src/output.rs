//! Tabular results and their CSV / JSON encodings.
//!
//! Every row has the same columns; cells that do not apply to an
//! experiment are left empty. Floats are written with 9 significant
//! digits and rows are quantized to that precision when built, so a CSV
//! file parses back to exactly the result that produced it.

use std::io::{Read, Write};

use serde::Serialize;

pub const COLUMNS: [&str; 14] = [
    "policy",
    "links",
    "distance_km",
    "lambda",
    "coherence_time_s",
    "alpha",
    "fidelity_analytic",
    "fidelity_sim",
    "ci_low",
    "ci_high",
    "skr_analytic",
    "skr_sim",
    "n_repeaters_opt",
    "incomplete",
];

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SweepRow {
    pub policy: Option<String>,
    pub links: Option<u64>,
    pub distance_km: Option<f64>,
    pub lambda: Option<f64>,
    pub coherence_time_s: Option<f64>,
    pub alpha: Option<f64>,
    pub fidelity_analytic: Option<f64>,
    pub fidelity_sim: Option<f64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub skr_analytic: Option<f64>,
    pub skr_sim: Option<f64>,
    /// Optimal node count, end nodes included.
    pub n_repeaters_opt: Option<u64>,
    /// Measured stream requests left in the system at the end of the run.
    pub incomplete: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

#[derive(Debug, thiserror::Error)]
pub enum TableError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("bad header: expected {expected:?}")]
    Header { expected: String },
    #[error("row {row}, column {column}: cannot parse {value:?}")]
    Cell {
        row: usize,
        column: &'static str,
        value: String,
    },
}

/// `%g`-style formatting with `digits` significant digits.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let sci = format!("{:.*e}", digits - 1, x);
    // rounding can carry into the next decade
    let (mantissa, e) = sci.split_once('e').expect("scientific format");
    let e: i32 = e.parse().expect("exponent");
    if e < -5 || e >= digits as i32 {
        format!("{}e{}", trim_zeros(mantissa), e)
    } else {
        let decimals = (digits as i32 - 1 - e).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Round to the precision the CSV carries.
pub fn quantize(x: f64) -> f64 {
    format_sig(x, 9).parse().unwrap_or(x)
}

impl SweepRow {
    pub fn quantized(mut self) -> Self {
        for v in [
            &mut self.distance_km,
            &mut self.lambda,
            &mut self.coherence_time_s,
            &mut self.alpha,
            &mut self.fidelity_analytic,
            &mut self.fidelity_sim,
            &mut self.ci_low,
            &mut self.ci_high,
            &mut self.skr_analytic,
            &mut self.skr_sim,
        ] {
            *v = v.map(quantize);
        }
        self
    }

    fn cells(&self) -> [String; 14] {
        let f = |x: Option<f64>| x.map(|x| format_sig(x, 9)).unwrap_or_default();
        let u = |x: Option<u64>| x.map(|x| x.to_string()).unwrap_or_default();
        [
            self.policy.clone().unwrap_or_default(),
            u(self.links),
            f(self.distance_km),
            f(self.lambda),
            f(self.coherence_time_s),
            f(self.alpha),
            f(self.fidelity_analytic),
            f(self.fidelity_sim),
            f(self.ci_low),
            f(self.ci_high),
            f(self.skr_analytic),
            f(self.skr_sim),
            u(self.n_repeaters_opt),
            u(self.incomplete),
        ]
    }

    fn from_record(row: usize, rec: &csv::StringRecord) -> Result<Self, TableError> {
        let cell = |i: usize| rec.get(i).unwrap_or("");
        let err = |i: usize| TableError::Cell {
            row,
            column: COLUMNS[i],
            value: cell(i).to_string(),
        };
        let f = |i: usize| -> Result<Option<f64>, TableError> {
            match cell(i) {
                "" => Ok(None),
                s => s.parse().map(Some).map_err(|_| err(i)),
            }
        };
        let u = |i: usize| -> Result<Option<u64>, TableError> {
            match cell(i) {
                "" => Ok(None),
                s => s.parse().map(Some).map_err(|_| err(i)),
            }
        };
        Ok(SweepRow {
            policy: Some(cell(0).to_string()).filter(|s| !s.is_empty()),
            links: u(1)?,
            distance_km: f(2)?,
            lambda: f(3)?,
            coherence_time_s: f(4)?,
            alpha: f(5)?,
            fidelity_analytic: f(6)?,
            fidelity_sim: f(7)?,
            ci_low: f(8)?,
            ci_high: f(9)?,
            skr_analytic: f(10)?,
            skr_sim: f(11)?,
            n_repeaters_opt: u(12)?,
            incomplete: u(13)?,
        })
    }
}

impl SweepResult {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), TableError> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(COLUMNS)?;
        for row in &self.rows {
            out.write_record(row.cells())?;
        }
        out.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self, TableError> {
        let mut input = csv::Reader::from_reader(r);
        let header = input.headers()?;
        if header.iter().ne(COLUMNS.iter().copied()) {
            return Err(TableError::Header {
                expected: COLUMNS.join(","),
            });
        }
        let rows = input
            .records()
            .enumerate()
            .map(|(i, rec)| SweepRow::from_record(i + 1, &rec?))
            .collect::<Result<_, _>>()?;
        Ok(SweepResult { rows })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("rows serialize")
    }
}
