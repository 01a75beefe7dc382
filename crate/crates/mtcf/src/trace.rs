//! Correlation traces: the CSV output format shared by all computation
//! routes, plus grid-aligned comparison of two traces.
//!
//! Layout: `#`-prefixed metadata lines, one header line, then rows
//! `t,t_prime,re,im,stderr_re,stderr_im` with 17 significant digits. The
//! standard-error columns are zero for deterministic routes.

use std::io::{BufRead, Write};
use std::path::Path;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "t,t_prime,re,im,stderr_re,stderr_im";

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TracePoint {
    pub t: f64,
    pub t_prime: f64,
    pub value: C64,
    pub stderr_re: f64,
    pub stderr_im: f64,
}

impl TracePoint {
    pub fn exact(t: f64, t_prime: f64, value: C64) -> Self {
        TracePoint {
            t,
            t_prime,
            value,
            stderr_re: 0.0,
            stderr_im: 0.0,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CorrelationTrace {
    pub metadata: Vec<(String, String)>,
    pub points: Vec<TracePoint>,
}

impl CorrelationTrace {
    pub fn new(points: Vec<TracePoint>) -> Result<Self> {
        let trace = CorrelationTrace {
            metadata: Vec::new(),
            points,
        };
        trace.validate()?;
        Ok(trace)
    }

    pub fn push_metadata(&mut self, key: impl Into<String>, value: impl std::fmt::Display) {
        self.metadata.push((key.into(), value.to_string()));
    }

    fn validate(&self) -> Result<()> {
        for p in &self.points {
            let finite = p.t.is_finite()
                && p.t_prime.is_finite()
                && p.value.re.is_finite()
                && p.value.im.is_finite()
                && p.stderr_re.is_finite()
                && p.stderr_im.is_finite();
            if !finite {
                return Err(Error::NonFinite);
            }
        }
        if self
            .points
            .windows(2)
            .any(|w| w[1].t_prime <= w[0].t_prime)
        {
            return Err(Error::BadTimeGrid);
        }
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        for (k, v) in &self.metadata {
            writeln!(w, "# {k} = {v}")?;
        }
        writeln!(w, "{CSV_HEADER}")?;
        for p in &self.points {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                p.t, p.t_prime, p.value.re, p.value.im, p.stderr_re, p.stderr_im
            )?;
        }
        Ok(())
    }

    /// Write through a temporary file in the destination directory and rename
    /// into place.
    pub fn write_csv_atomic(&self, path: &Path) -> Result<()> {
        let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
        let mut tmp = match dir {
            Some(d) => tempfile::NamedTempFile::new_in(d)?,
            None => tempfile::NamedTempFile::new_in(".")?,
        };
        self.write_csv(&mut tmp)?;
        tmp.flush()?;
        tmp.persist(path).map_err(|e| Error::Io(e.error))?;
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut metadata = Vec::new();
        let mut points = Vec::new();
        let mut saw_header = false;
        for (line_no, line) in r.lines().enumerate() {
            let line = line?;
            let parse_err = |message: &str| Error::TraceParse {
                line: line_no + 1,
                message: message.to_string(),
            };
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            if let Some(comment) = trimmed.strip_prefix('#') {
                if let Some((k, v)) = comment.split_once('=') {
                    metadata.push((k.trim().to_string(), v.trim().to_string()));
                }
                continue;
            }
            if !saw_header {
                if trimmed != CSV_HEADER {
                    return Err(parse_err("expected header line"));
                }
                saw_header = true;
                continue;
            }
            let fields: Vec<&str> = trimmed.split(',').collect();
            if fields.len() != 6 {
                return Err(parse_err("expected 6 comma-separated fields"));
            }
            let mut nums = [0.0f64; 6];
            for (slot, field) in nums.iter_mut().zip(fields.iter()) {
                *slot = field
                    .trim()
                    .parse::<f64>()
                    .map_err(|_| parse_err("invalid float"))?;
            }
            points.push(TracePoint {
                t: nums[0],
                t_prime: nums[1],
                value: C64::new(nums[2], nums[3]),
                stderr_re: nums[4],
                stderr_im: nums[5],
            });
        }
        if !saw_header {
            return Err(Error::TraceParse {
                line: 0,
                message: "missing header line".to_string(),
            });
        }
        let trace = CorrelationTrace { metadata, points };
        trace.validate()?;
        Ok(trace)
    }

    pub fn read_csv_path(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read_csv(std::io::BufReader::new(file))
    }
}

/// One grid point of a two-trace comparison.
#[derive(Clone, Copy, Debug)]
pub struct CompareRow {
    pub t: f64,
    pub t_prime: f64,
    pub delta_abs: f64,
    /// |Δ| divided by the combined standard error, where any is reported.
    pub sigma_ratio: Option<f64>,
}

#[derive(Clone, Debug, Default)]
pub struct CompareReport {
    pub max_abs_delta: f64,
    pub max_sigma_ratio: Option<f64>,
    pub rows: Vec<CompareRow>,
}

/// Point-by-point comparison of two traces on the identical (t, t') grid.
pub fn compare(a: &CorrelationTrace, b: &CorrelationTrace) -> Result<CompareReport> {
    if a.points.len() != b.points.len() {
        return Err(Error::GridMismatch);
    }
    let mut report = CompareReport::default();
    for (pa, pb) in a.points.iter().zip(b.points.iter()) {
        if pa.t != pb.t || pa.t_prime != pb.t_prime {
            return Err(Error::GridMismatch);
        }
        let delta_abs = (pa.value - pb.value).norm();
        let var = pa.stderr_re * pa.stderr_re
            + pa.stderr_im * pa.stderr_im
            + pb.stderr_re * pb.stderr_re
            + pb.stderr_im * pb.stderr_im;
        let sigma_ratio = if var > 0.0 {
            Some(delta_abs / var.sqrt())
        } else {
            None
        };
        report.max_abs_delta = report.max_abs_delta.max(delta_abs);
        if let Some(r) = sigma_ratio {
            report.max_sigma_ratio = Some(report.max_sigma_ratio.unwrap_or(0.0).max(r));
        }
        report.rows.push(CompareRow {
            t: pa.t,
            t_prime: pa.t_prime,
            delta_abs,
            sigma_ratio,
        });
    }
    Ok(report)
}
