//! Text model file: one JSON document holding the architecture, the weight
//! matrices (row-major, 17 significant digits), the scaler and provenance.

use std::fs;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use super::{MlpArchitecture, MlpModel, ModelMetadata, Network};
use crate::error::{Error, Result};
use crate::scaler::ScalerParams;

pub const FORMAT_NAME: &str = "garchnet-mlp";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize)]
struct LayerOut {
    rows: usize,
    cols: usize,
    weights: Box<RawValue>,
}

#[derive(Serialize)]
struct ModelFileOut<'a> {
    format: &'static str,
    version: u32,
    architecture: &'a MlpArchitecture,
    layers: Vec<LayerOut>,
    scaler: &'a ScalerParams,
    metadata: &'a ModelMetadata,
}

#[derive(Deserialize)]
struct LayerIn {
    rows: usize,
    cols: usize,
    weights: Vec<f64>,
}

#[derive(Deserialize)]
struct ModelFileIn {
    format: String,
    #[allow(dead_code)]
    version: u32,
    architecture: MlpArchitecture,
    layers: Vec<LayerIn>,
    scaler: ScalerParams,
    metadata: ModelMetadata,
}

fn weights_json(layer: &Array2<f64>) -> Box<RawValue> {
    let body: Vec<String> = layer.iter().map(|w| format!("{w:.16e}")).collect();
    RawValue::from_string(format!("[{}]", body.join(","))).expect("formatted floats are valid JSON")
}

pub fn write_model(model: &MlpModel) -> String {
    let file = ModelFileOut {
        format: FORMAT_NAME,
        version: FORMAT_VERSION,
        architecture: model.network.architecture(),
        layers: model
            .network
            .layers()
            .iter()
            .map(|l| LayerOut {
                rows: l.nrows(),
                cols: l.ncols(),
                weights: weights_json(l),
            })
            .collect(),
        scaler: &model.scaler,
        metadata: &model.metadata,
    };
    let mut text = serde_json::to_string_pretty(&file).expect("model serializes");
    text.push('\n');
    text
}

pub fn read_model(text: &str) -> Result<MlpModel> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::format("<document>", e))?;
    match value.get("version") {
        Some(v) if v.as_u64() == Some(u64::from(FORMAT_VERSION)) => {}
        Some(v) => {
            return Err(Error::format(
                "version",
                format!("unsupported model format version {v} (expected {FORMAT_VERSION})"),
            ))
        }
        None => return Err(Error::format("version", "missing field")),
    }
    let file: ModelFileIn = serde_path_to_error::deserialize(value)
        .map_err(|e| Error::format(e.path().to_string(), e.inner()))?;
    if file.format != FORMAT_NAME {
        return Err(Error::format(
            "format",
            format!("expected `{FORMAT_NAME}`, found `{}`", file.format),
        ));
    }
    let shapes = file.architecture.layer_shapes();
    if shapes.len() != file.layers.len() {
        return Err(Error::format(
            "layers",
            format!("architecture needs {} layers, file has {}", shapes.len(), file.layers.len()),
        ));
    }
    let mut layers = Vec::with_capacity(shapes.len());
    for (i, (layer, &(rows, cols))) in file.layers.into_iter().zip(&shapes).enumerate() {
        if (layer.rows, layer.cols) != (rows, cols) {
            return Err(Error::format(
                format!("layers[{i}]"),
                format!("shape {}x{} does not match architecture {rows}x{cols}", layer.rows, layer.cols),
            ));
        }
        let matrix = Array2::from_shape_vec((rows, cols), layer.weights).map_err(|_| {
            Error::format(format!("layers[{i}].weights"), format!("expected {} values", rows * cols))
        })?;
        layers.push(matrix);
    }
    let network = Network::from_layers(file.architecture, layers)?;
    Ok(MlpModel {
        network,
        scaler: file.scaler,
        metadata: file.metadata,
    })
}

pub fn save_model(model: &MlpModel, path: &Path) -> Result<()> {
    fs::write(path, write_model(model)).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<MlpModel> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    read_model(&text)
}
