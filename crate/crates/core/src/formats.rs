//! File formats: the `.big` graph format, partition and report JSON, and
//! the energy-trace CSV.
//!
//! `.big` is a plain text edge list: comment lines start with `#`, the
//! first non-comment line is `n_x n_y`, and every following non-comment
//! line is an edge `u v` with `0 <= u < n_x`, `0 <= v < n_y`. Duplicate
//! edges are an error.
//!
//! Rationals serialize as exact numerator/denominator strings plus an
//! informational float. All writers emit deterministic bytes for
//! deterministic inputs.

use crate::bigraph::{BipartiteRelation, Side, VertexSubset};
use crate::error::{Error, Result};
use crate::partition::{NetPair, Partition};
use crate::ratio::{rat_to_f64, Rat};
use crate::refine::EnergyTrace;
use crate::regularity::{RegularityReport, Verdict};
use num::bigint::BigInt;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::str::FromStr;

// ---------------------------------------------------------------------------
// .big graph files

pub fn read_big_from<R: Read>(reader: R) -> Result<BipartiteRelation> {
    let reader = BufReader::new(reader);
    let mut dims: Option<(usize, usize)> = None;
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let line_num = lineno + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut parts = trimmed.split_whitespace();
        let (a, b) = match (parts.next(), parts.next(), parts.next()) {
            (Some(a), Some(b), None) => (a, b),
            _ => {
                return Err(Error::Parse {
                    line: line_num,
                    msg: format!("expected two integers, got {trimmed:?}"),
                })
            }
        };
        let parse = |s: &str| -> Result<usize> {
            s.parse().map_err(|_| Error::Parse {
                line: line_num,
                msg: format!("not a non-negative integer: {s:?}"),
            })
        };
        let (a, b) = (parse(a)?, parse(b)?);
        match dims {
            None => {
                if a < 1 || b < 1 {
                    return Err(Error::Parse {
                        line: line_num,
                        msg: "sides must have at least 1 vertex".into(),
                    });
                }
                dims = Some((a, b));
            }
            Some((n_x, n_y)) => {
                if a >= n_x || b >= n_y {
                    return Err(Error::Parse {
                        line: line_num,
                        msg: format!("edge ({a}, {b}) out of range for {n_x}x{n_y}"),
                    });
                }
                edges.push((a, b));
            }
        }
    }
    let (n_x, n_y) = dims.ok_or(Error::Parse {
        line: 0,
        msg: "missing size header".into(),
    })?;
    BipartiteRelation::from_edges(n_x, n_y, &edges)
}

pub fn read_big(path: impl AsRef<Path>) -> Result<BipartiteRelation> {
    read_big_from(std::fs::File::open(path)?)
}

pub fn write_big_to<W: Write>(
    mut w: W,
    g: &BipartiteRelation,
    comment: Option<&str>,
) -> Result<()> {
    if let Some(c) = comment {
        for line in c.lines() {
            writeln!(w, "# {line}")?;
        }
    }
    writeln!(w, "{} {}", g.n_x(), g.n_y())?;
    for (x, y) in g.edges() {
        writeln!(w, "{x} {y}")?;
    }
    Ok(())
}

pub fn write_big(
    path: impl AsRef<Path>,
    g: &BipartiteRelation,
    comment: Option<&str>,
) -> Result<()> {
    write_big_to(std::fs::File::create(path)?, g, comment)
}

// ---------------------------------------------------------------------------
// JSON encodings

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RationalJson {
    pub num: String,
    pub den: String,
    /// Informational only; the exact value is num/den.
    pub float: f64,
}

impl RationalJson {
    pub fn from_rat(r: &Rat) -> Self {
        RationalJson {
            num: r.numer().to_string(),
            den: r.denom().to_string(),
            float: rat_to_f64(r),
        }
    }

    pub fn to_rat(&self) -> Result<Rat> {
        let num = BigInt::from_str(&self.num).map_err(|e| Error::Parse {
            line: 0,
            msg: format!("bad numerator {:?}: {e}", self.num),
        })?;
        let den = BigInt::from_str(&self.den).map_err(|e| Error::Parse {
            line: 0,
            msg: format!("bad denominator {:?}: {e}", self.den),
        })?;
        if den <= BigInt::from(0) {
            return Err(Error::Parse {
                line: 0,
                msg: "denominator must be positive".into(),
            });
        }
        Ok(Rat::new(num, den))
    }
}

/// Parse a rational from `"a/b"`, an integer `"a"`, or a decimal `"0.25"`.
pub fn parse_rational(s: &str) -> Result<Rat> {
    let bad = |msg: String| Error::Parse { line: 0, msg };
    let s = s.trim();
    if let Some((a, b)) = s.split_once('/') {
        let num = BigInt::from_str(a.trim()).map_err(|e| bad(format!("bad numerator: {e}")))?;
        let den = BigInt::from_str(b.trim()).map_err(|e| bad(format!("bad denominator: {e}")))?;
        if den == BigInt::from(0) {
            return Err(bad("zero denominator".into()));
        }
        return Ok(Rat::new(num, den));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let int = if int.is_empty() { "0" } else { int };
        let whole = BigInt::from_str(int).map_err(|e| bad(format!("bad number: {e}")))?;
        if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad(format!("bad decimal: {s:?}")));
        }
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let frac_val = BigInt::from_str(frac).map_err(|e| bad(format!("bad decimal: {e}")))?;
        let sign = if s.starts_with('-') {
            BigInt::from(-1)
        } else {
            BigInt::from(1)
        };
        return Ok(Rat::new(whole * &scale + sign * frac_val, scale));
    }
    let n = BigInt::from_str(s).map_err(|e| bad(format!("bad rational {s:?}: {e}")))?;
    Ok(Rat::from(n))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NetsJson {
    pub x: Vec<usize>,
    pub y: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PartitionJson {
    pub x_blocks: Vec<Vec<usize>>,
    pub y_blocks: Vec<Vec<usize>>,
    pub energy: RationalJson,
    pub nets: NetsJson,
    pub epsilon: RationalJson,
}

impl PartitionJson {
    pub fn from_parts(g: &BipartiteRelation, p: &Partition, nets: &NetPair, eps: &Rat) -> Self {
        PartitionJson {
            x_blocks: p.x_blocks().iter().map(|b| b.indices()).collect(),
            y_blocks: p.y_blocks().iter().map(|b| b.indices()).collect(),
            energy: RationalJson::from_rat(&crate::partition::energy(g, p)),
            nets: NetsJson {
                x: nets.x_net.indices(),
                y: nets.y_net.indices(),
            },
            epsilon: RationalJson::from_rat(eps),
        }
    }

    /// Rebuild the partition and nets against a graph, validating sizes.
    pub fn to_parts(&self, g: &BipartiteRelation) -> Result<(Partition, NetPair)> {
        let max_idx = |blocks: &[Vec<usize>]| blocks.iter().flatten().copied().max();
        if let Some(m) = max_idx(&self.x_blocks) {
            if m >= g.n_x() {
                return Err(Error::GroundMismatch(format!(
                    "x index {m} out of range for n_x = {}",
                    g.n_x()
                )));
            }
        }
        if let Some(m) = max_idx(&self.y_blocks) {
            if m >= g.n_y() {
                return Err(Error::GroundMismatch(format!(
                    "y index {m} out of range for n_y = {}",
                    g.n_y()
                )));
            }
        }
        let xs = self
            .x_blocks
            .iter()
            .map(|b| VertexSubset::from_indices(Side::X, g.n_x(), b.iter().copied()))
            .collect();
        let ys = self
            .y_blocks
            .iter()
            .map(|b| VertexSubset::from_indices(Side::Y, g.n_y(), b.iter().copied()))
            .collect();
        let partition = Partition::new(xs, ys)?;
        let quality = self.epsilon.to_rat()?;
        let nets = NetPair {
            x_net: VertexSubset::from_indices(Side::X, g.n_x(), self.nets.x.iter().copied()),
            y_net: VertexSubset::from_indices(Side::Y, g.n_y(), self.nets.y.iter().copied()),
            quality,
        };
        Ok((partition, nets))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WitnessJson {
    pub i: usize,
    pub j: usize,
    pub wx: Vec<usize>,
    pub wy: Vec<usize>,
    pub defect: RationalJson,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairCountsJson {
    pub total: usize,
    pub regular_certified: usize,
    pub regular_probable: usize,
    pub irregular_witnessed: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TesterConfigJson {
    pub size_cap: usize,
    pub trials: usize,
    pub seed: u64,
    pub mode: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportJson {
    pub epsilon: RationalJson,
    pub regular: bool,
    pub irregular_mass: RationalJson,
    pub pairs: PairCountsJson,
    pub witnesses: Vec<WitnessJson>,
    pub config: TesterConfigJson,
}

impl ReportJson {
    pub fn from_report(report: &RegularityReport) -> Self {
        let mut counts = PairCountsJson {
            total: report.verdicts.len(),
            regular_certified: 0,
            regular_probable: 0,
            irregular_witnessed: 0,
        };
        let mut witnesses = Vec::new();
        for out in &report.verdicts {
            match &out.verdict {
                Verdict::RegularCertified => counts.regular_certified += 1,
                Verdict::RegularProbable => counts.regular_probable += 1,
                Verdict::Irregular(w) => {
                    counts.irregular_witnessed += 1;
                    witnesses.push(WitnessJson {
                        i: out.i,
                        j: out.j,
                        wx: w.wx.indices(),
                        wy: w.wy.indices(),
                        defect: RationalJson::from_rat(&w.defect),
                    });
                }
            }
        }
        ReportJson {
            epsilon: RationalJson::from_rat(&report.epsilon),
            regular: report.regular,
            irregular_mass: RationalJson::from_rat(&report.irregular_mass),
            pairs: counts,
            witnesses,
            config: TesterConfigJson {
                size_cap: report.config.size_cap,
                trials: report.config.trials,
                seed: report.config.seed,
                mode: match report.config.mode {
                    crate::regularity::TesterMode::Auto => "auto".into(),
                    crate::regularity::TesterMode::ExactOnly => "exact-only".into(),
                },
            },
        }
    }
}

// ---------------------------------------------------------------------------
// Energy trace CSV

pub const TRACE_CSV_HEADER: &str = "iter,rho_num,rho_den,parts_x,parts_y,net_x_size,net_y_size,irregular_mass_num,irregular_mass_den,wall_ms";

/// Write the trace; `zero_wall` replaces wall-clock milliseconds with 0 so
/// reruns are byte-identical.
pub fn write_trace_csv_to<W: Write>(mut w: W, trace: &EnergyTrace, zero_wall: bool) -> Result<()> {
    writeln!(w, "{TRACE_CSV_HEADER}")?;
    for row in &trace.rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{}",
            row.iter,
            row.rho.numer(),
            row.rho.denom(),
            row.parts_x,
            row.parts_y,
            row.net_x_size,
            row.net_y_size,
            row.irregular_mass.numer(),
            row.irregular_mass.denom(),
            if zero_wall { 0 } else { row.wall_ms },
        )?;
    }
    Ok(())
}

pub fn write_trace_csv(
    path: impl AsRef<Path>,
    trace: &EnergyTrace,
    zero_wall: bool,
) -> Result<()> {
    write_trace_csv_to(std::fs::File::create(path)?, trace, zero_wall)
}
