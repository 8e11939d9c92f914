//! JSON and CSV formats.
//!
//! Complex numbers are `[re, im]` pairs and matrices are row-major. A layer
//! carries either `state_diag` or a dense `state_matrix`; the first layer's
//! `input_matrix` is a column (`m` rows of one entry). Floats are written in
//! shortest round-trip form, so JSON round trips are bit-exact.

use std::fs;
use std::io::Write;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::convert::ExpansionTable;
use crate::error::{Error, Result};
use crate::model::{ConvolutionKernel, DeepLinearSsm, DenseLayer, DenseSsm, DiagLayer};
use crate::C64;

/// Serde adapter for a single complex number as `[re, im]`.
pub mod complex {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::C64;

    pub fn serialize<S: Serializer>(z: &C64, s: S) -> Result<S::Ok, S::Error> {
        [z.re, z.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<C64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(C64::new(re, im))
    }
}

type Pair = [f64; 2];

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayerDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    state_diag: Option<Vec<Pair>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    state_matrix: Option<Vec<Vec<Pair>>>,
    input_matrix: Vec<Vec<Pair>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDoc {
    layers: Vec<LayerDoc>,
    read_out: Vec<Pair>,
}

fn pair(z: &C64) -> Pair {
    [z.re, z.im]
}

fn rows(m: &DMatrix<C64>) -> Vec<Vec<Pair>> {
    m.row_iter().map(|r| r.iter().map(pair).collect()).collect()
}

fn matrix(rows: &[Vec<Pair>], what: &str) -> Result<DMatrix<C64>> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Format(format!("{what}: rows have different lengths")));
    }
    Ok(DMatrix::from_row_iterator(
        nrows,
        ncols,
        rows.iter().flatten().map(|&[re, im]| C64::new(re, im)),
    ))
}

/// A parsed model document: diagonal when every layer gives `state_diag`.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyModel {
    Diagonal(DeepLinearSsm),
    Dense(DenseSsm),
}

impl AnyModel {
    pub fn to_dense(&self) -> DenseSsm {
        match self {
            AnyModel::Diagonal(m) => m.to_dense(),
            AnyModel::Dense(m) => m.clone(),
        }
    }

    /// The diagonal form, if every state matrix is exactly diagonal.
    pub fn as_diagonal(&self) -> Option<DeepLinearSsm> {
        match self {
            AnyModel::Diagonal(m) => Some(m.clone()),
            AnyModel::Dense(m) => m.as_diagonal(),
        }
    }
}

pub fn model_to_json(model: &DeepLinearSsm) -> String {
    let doc = ModelDoc {
        layers: model
            .layers()
            .iter()
            .map(|l| LayerDoc {
                state_diag: Some(l.state_diag.iter().map(pair).collect()),
                state_matrix: None,
                input_matrix: rows(&l.input),
            })
            .collect(),
        read_out: model.read_out().iter().map(pair).collect(),
    };
    to_pretty(&doc)
}

pub fn dense_model_to_json(model: &DenseSsm) -> String {
    let doc = ModelDoc {
        layers: model
            .layers()
            .iter()
            .map(|l| LayerDoc {
                state_diag: None,
                state_matrix: Some(rows(&l.state)),
                input_matrix: rows(&l.input),
            })
            .collect(),
        read_out: model.read_out().iter().map(pair).collect(),
    };
    to_pretty(&doc)
}

fn to_pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("model documents always serialize");
    s.push('\n');
    s
}

pub fn parse_model(json: &str) -> Result<AnyModel> {
    let doc: ModelDoc = serde_json::from_str(json)?;
    let read_out = DVector::from_iterator(doc.read_out.len(), doc.read_out.iter().map(|&[re, im]| C64::new(re, im)));
    let all_diag = doc.layers.iter().all(|l| l.state_diag.is_some());
    let mut diag_layers = Vec::new();
    let mut dense_layers = Vec::new();
    for (i, layer) in doc.layers.iter().enumerate() {
        let input = matrix(&layer.input_matrix, "input_matrix")?;
        let state = match (&layer.state_diag, &layer.state_matrix) {
            (Some(d), None) => {
                let d = DVector::from_iterator(d.len(), d.iter().map(|&[re, im]| C64::new(re, im)));
                if all_diag {
                    diag_layers.push(DiagLayer { state_diag: d, input });
                    continue;
                }
                DMatrix::from_diagonal(&d)
            }
            (None, Some(m)) => matrix(m, "state_matrix")?,
            _ => {
                return Err(Error::Format(format!(
                    "layer {} needs exactly one of state_diag and state_matrix",
                    i + 1
                )))
            }
        };
        dense_layers.push(DenseLayer { state, input });
    }
    if all_diag {
        Ok(AnyModel::Diagonal(DeepLinearSsm::new(diag_layers, read_out)?))
    } else {
        Ok(AnyModel::Dense(DenseSsm::new(dense_layers, read_out)?))
    }
}

pub fn read_model(path: &Path) -> Result<AnyModel> {
    parse_model(&fs::read_to_string(path)?)
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))
}

/// Serializes any sequence of flat records, one row each, with a header.
pub fn records_to_csv<T: Serialize>(records: &[T]) -> Result<String> {
    let mut w = csv_writer();
    for r in records {
        w.serialize(r)?;
    }
    finish(w)
}

#[derive(Serialize, Deserialize)]
struct KernelRow {
    t: usize,
    re: f64,
    im: f64,
}

pub fn kernel_to_csv(kernel: &ConvolutionKernel) -> Result<String> {
    let rows: Vec<KernelRow> = kernel
        .taps
        .iter()
        .enumerate()
        .map(|(t, z)| KernelRow { t, re: z.re, im: z.im })
        .collect();
    if rows.is_empty() {
        return Ok("t,re,im\n".into());
    }
    records_to_csv(&rows)
}

pub fn kernel_from_csv(text: &str) -> Result<ConvolutionKernel> {
    let mut taps = Vec::new();
    for (i, row) in csv::Reader::from_reader(text.as_bytes()).deserialize().enumerate() {
        let row: KernelRow = row?;
        if row.t != i {
            return Err(Error::Format(format!("kernel row {i} has t = {}", row.t)));
        }
        taps.push(C64::new(row.re, row.im));
    }
    ConvolutionKernel::new(taps)
}

#[derive(Serialize)]
struct ExpansionRow {
    layer: usize,
    index: usize,
    lambda_re: f64,
    lambda_im: f64,
    xi_re: f64,
    xi_im: f64,
}

pub fn expansion_to_csv(table: &ExpansionTable) -> Result<String> {
    let rows: Vec<ExpansionRow> = table
        .entries
        .iter()
        .map(|e| ExpansionRow {
            layer: e.layer,
            index: e.index,
            lambda_re: e.lambda.re,
            lambda_im: e.lambda.im,
            xi_re: e.xi.re,
            xi_im: e.xi.im,
        })
        .collect();
    if rows.is_empty() {
        return Ok("layer,index,lambda_re,lambda_im,xi_re,xi_im\n".into());
    }
    records_to_csv(&rows)
}

/// Writes through a temporary file in the destination directory and renames
/// it into place, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}
