//! File formats: `.vk` series and `.vm` morphisms as JSON, signals and grids as
//! CSV, heatmaps as binary PGM.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use volterra_core::morphism::Morphism;
use volterra_core::series::TermIndex;
use volterra_core::tfd::{HigherOrderGrid, TfdGrid};
use volterra_core::{Complex64, Result, SampledSignal, VolterraError, VolterraKernel, VolterraSeries};

const SERIES_FORMAT: &str = "volterra-series";
const MORPHISM_FORMAT: &str = "volterra-morphism";
const VERSION: u32 = 1;

fn format_err(path: &Path, e: impl std::fmt::Display) -> VolterraError {
    VolterraError::Format(format!("{}: {e}", path.display()))
}

#[derive(Serialize, Deserialize)]
struct SeriesFile {
    format: String,
    version: u32,
    memory: usize,
    terms: Vec<TermRecord>,
}

#[derive(Serialize, Deserialize)]
struct TermRecord {
    index: String,
    order: usize,
    /// Row-major kernel values as `[re, im]`.
    data: Vec<Complex64>,
}

pub fn series_to_json(s: &VolterraSeries) -> String {
    let file = SeriesFile {
        format: SERIES_FORMAT.into(),
        version: VERSION,
        memory: s.memory(),
        terms: s
            .terms()
            .iter()
            .map(|t| TermRecord { index: t.index.0.clone(), order: t.kernel.order(), data: t.kernel.data().to_vec() })
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("series serialize")
}

pub fn series_from_json(text: &str) -> Result<VolterraSeries> {
    let file: SeriesFile = serde_json::from_str(text).map_err(|e| VolterraError::Format(e.to_string()))?;
    if file.format != SERIES_FORMAT || file.version != VERSION {
        return Err(VolterraError::Format(format!("not a {SERIES_FORMAT} v{VERSION} file")));
    }
    let memory = file.memory.max(1);
    let terms = file
        .terms
        .into_iter()
        .map(|t| {
            let mem = if t.order == 0 { 1 } else { memory };
            Ok((TermIndex::new(t.index), VolterraKernel::new(t.order, mem, t.data)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let s = VolterraSeries::from_terms(terms)?;
    if s.memory() < memory {
        s.with_memory(memory)
    } else {
        Ok(s)
    }
}

pub fn read_series(path: &Path) -> Result<VolterraSeries> {
    series_from_json(&fs::read_to_string(path)?).map_err(|e| match e {
        VolterraError::Format(m) => format_err(path, m),
        other => other,
    })
}

pub fn write_series(path: &Path, s: &VolterraSeries) -> Result<()> {
    fs::write(path, series_to_json(s) + "\n")?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct MorphismFile {
    format: String,
    version: u32,
    morphism: Morphism,
}

pub fn morphism_to_json(m: &Morphism) -> String {
    let file = MorphismFile { format: MORPHISM_FORMAT.into(), version: VERSION, morphism: m.clone() };
    serde_json::to_string_pretty(&file).expect("morphism serialize")
}

pub fn morphism_from_json(text: &str) -> Result<Morphism> {
    let file: MorphismFile = serde_json::from_str(text).map_err(|e| VolterraError::Format(e.to_string()))?;
    if file.format != MORPHISM_FORMAT || file.version != VERSION {
        return Err(VolterraError::Format(format!("not a {MORPHISM_FORMAT} v{VERSION} file")));
    }
    // rebuild through the checked constructor
    Morphism::new(file.morphism.length(), file.morphism.components().clone())
}

pub fn read_morphism(path: &Path) -> Result<Morphism> {
    morphism_from_json(&fs::read_to_string(path)?).map_err(|e| match e {
        VolterraError::Format(m) => format_err(path, m),
        other => other,
    })
}

pub fn write_morphism(path: &Path, m: &Morphism) -> Result<()> {
    fs::write(path, morphism_to_json(m) + "\n")?;
    Ok(())
}

/// One sample per line, `re` or `re,im`. Blank lines and `#` comments are skipped.
pub fn signal_from_csv(text: &str) -> Result<SampledSignal> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| VolterraError::Format(e.to_string()))?;
        let field = |i: usize| -> Result<f64> {
            rec.get(i)
                .unwrap_or("0")
                .parse::<f64>()
                .map_err(|e| VolterraError::Format(format!("record {}: {e}", line + 1)))
        };
        if rec.len() > 2 || rec.is_empty() {
            return Err(VolterraError::Format(format!("record {}: expected `re` or `re,im`", line + 1)));
        }
        out.push(Complex64::new(field(0)?, field(1)?));
    }
    SampledSignal::new(out)
}

pub fn read_signal(path: &Path) -> Result<SampledSignal> {
    signal_from_csv(&fs::read_to_string(path)?).map_err(|e| match e {
        VolterraError::Format(m) => format_err(path, m),
        other => other,
    })
}

fn csv_error(e: csv::Error) -> VolterraError {
    VolterraError::Format(e.to_string())
}

pub fn signal_to_csv(s: &SampledSignal, out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for v in s.samples() {
        w.write_record([v.re.to_string(), v.im.to_string()]).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// Which real view of a complex grid to export.
#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Part {
    Re,
    Im,
    Abs,
}

impl Part {
    fn of(self, v: Complex64) -> f64 {
        match self {
            Part::Re => v.re,
            Part::Im => v.im,
            Part::Abs => v.norm(),
        }
    }
}

/// Row-major matrix view shared by the grid writers.
pub struct Matrix<'a> {
    pub rows: usize,
    pub cols: usize,
    pub values: &'a [Complex64],
}

impl<'a> From<&'a TfdGrid> for Matrix<'a> {
    fn from(g: &'a TfdGrid) -> Self {
        Matrix { rows: g.times(), cols: g.bins(), values: g.values() }
    }
}

/// Frequency tuples flattened row-major into the columns.
impl<'a> From<&'a HigherOrderGrid> for Matrix<'a> {
    fn from(g: &'a HigherOrderGrid) -> Self {
        Matrix { rows: g.times(), cols: g.values().len() / g.times(), values: g.values() }
    }
}

/// One row per time sample.
pub fn grid_to_csv(m: &Matrix<'_>, part: Part, out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in m.values.chunks(m.cols) {
        w.write_record(row.iter().map(|v| part.of(*v).to_string())).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// Binary 8-bit PGM of `|value|`, scaled so the maximum maps to 255.
pub fn grid_to_pgm(m: &Matrix<'_>, mut out: impl Write) -> Result<()> {
    let max = m.values.iter().fold(0.0f64, |a, v| a.max(v.norm()));
    write!(out, "P5\n{} {}\n255\n", m.cols, m.rows)?;
    let bytes: Vec<u8> =
        m.values.iter().map(|v| if max > 0.0 { (v.norm() / max * 255.0).round() as u8 } else { 0 }).collect();
    out.write_all(&bytes)?;
    Ok(())
}
