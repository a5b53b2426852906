//! Saving and loading trained models in the GPNCKPT container.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::gpn::{GraphEmbedLayer, LstmCell, PointerDecoder};
use crate::solver::{FeatureMode, MatrixTspGpn, Stage2Features, TwoStageGpn};
use crate::tensor::{checkpoint, Tensor};

/// A model together with its kind, as stored in a checkpoint.
#[derive(Clone, Debug)]
pub enum TrainedModel {
    MatrixTsp(MatrixTspGpn),
    TwoStageQap(TwoStageGpn),
}

const KIND_TSP: f64 = 1.0;
const KIND_QAP: f64 = 2.0;

impl From<MatrixTspGpn> for TrainedModel {
    fn from(m: MatrixTspGpn) -> Self {
        TrainedModel::MatrixTsp(m)
    }
}

impl From<TwoStageGpn> for TrainedModel {
    fn from(m: TwoStageGpn) -> Self {
        TrainedModel::TwoStageQap(m)
    }
}

/// Serializes the model's named parameters plus kind metadata.
pub fn save_checkpoint(model: &TrainedModel, path: impl AsRef<Path>) -> Result<()> {
    let mut entries: Vec<(String, Tensor)> = Vec::new();
    match model {
        TrainedModel::MatrixTsp(m) => {
            entries.push(("meta.kind".into(), Tensor::scalar(KIND_TSP)));
            let mode = match m.feature_mode {
                FeatureMode::CurrentRow => 0.0,
                FeatureMode::FullMatrix => 1.0,
            };
            entries.push(("meta.feature_mode".into(), Tensor::scalar(mode)));
            for (name, t) in m.params() {
                entries.push((name, t.detach()));
            }
        }
        TrainedModel::TwoStageQap(m) => {
            entries.push(("meta.kind".into(), Tensor::scalar(KIND_QAP)));
            let stage2 = match m.stage2 {
                Stage2Features::CostIncrement => 0.0,
                Stage2Features::BlockColumn => 1.0,
            };
            entries.push(("meta.stage2".into(), Tensor::scalar(stage2)));
            for (name, t) in m.params() {
                entries.push((name, t.detach()));
            }
        }
    }
    checkpoint::write_file(path, &entries)
}

fn required(map: &BTreeMap<String, Tensor>, name: &str) -> Result<Tensor> {
    map.get(name)
        .cloned()
        .ok_or_else(|| Error::CorruptCheckpoint(format!("missing array '{name}'")))
}

fn matrix_tsp_from_map(
    prefix: &str,
    map: &BTreeMap<String, Tensor>,
    feature_mode: FeatureMode,
) -> Result<MatrixTspGpn> {
    let mut encoder = Vec::new();
    loop {
        let i = encoder.len();
        let theta_name = format!("{prefix}embed.{i}.theta");
        if !map.contains_key(&theta_name) {
            break;
        }
        encoder.push(GraphEmbedLayer {
            theta: required(map, &theta_name)?,
            gamma: required(map, &format!("{prefix}embed.{i}.gamma"))?,
            agg_weight: required(map, &format!("{prefix}embed.{i}.agg_weight"))?,
            agg_bias: required(map, &format!("{prefix}embed.{i}.agg_bias"))?,
        });
    }
    if encoder.is_empty() {
        return Err(Error::CorruptCheckpoint(format!(
            "no encoder layers under '{prefix}'"
        )));
    }
    let v = required(map, &format!("{prefix}pointer.v"))?;
    if v.cols() != 1 {
        return Err(Error::CorruptCheckpoint(format!(
            "'{prefix}pointer.v' must be a column vector"
        )));
    }
    let hidden = v.rows();
    let decoder = PointerDecoder {
        w_r: required(map, &format!("{prefix}pointer.w_r"))?,
        w_q: map.get(&format!("{prefix}pointer.w_q")).cloned(),
        v,
    };
    let lstm = if map.contains_key(&format!("{prefix}lstm.w_x")) {
        Some(LstmCell {
            w_x: required(map, &format!("{prefix}lstm.w_x"))?,
            w_h: required(map, &format!("{prefix}lstm.w_h"))?,
            bias: required(map, &format!("{prefix}lstm.bias"))?,
            hidden,
        })
    } else {
        None
    };
    Ok(MatrixTspGpn {
        encoder,
        decoder,
        lstm,
        hidden,
        feature_mode,
    })
}

/// Reads a checkpoint back into a model. The stored kind tag decides the
/// model family; array names and shapes are validated on the way in.
pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<TrainedModel> {
    let entries = checkpoint::read_file(path)?;
    let map: BTreeMap<String, Tensor> = entries.into_iter().collect();
    let kind = required(&map, "meta.kind")?;
    if !kind.is_scalar() {
        return Err(Error::CorruptCheckpoint("meta.kind must be scalar".into()));
    }
    if kind.item() == KIND_TSP {
        let mode = match map.get("meta.feature_mode").map(|t| t.item()) {
            Some(x) if x == 1.0 => FeatureMode::FullMatrix,
            _ => FeatureMode::CurrentRow,
        };
        Ok(TrainedModel::MatrixTsp(matrix_tsp_from_map("", &map, mode)?))
    } else if kind.item() == KIND_QAP {
        let stage2 = match map.get("meta.stage2").map(|t| t.item()) {
            Some(x) if x == 1.0 => Stage2Features::BlockColumn,
            _ => Stage2Features::CostIncrement,
        };
        Ok(TrainedModel::TwoStageQap(TwoStageGpn {
            block_model: matrix_tsp_from_map("block.", &map, FeatureMode::CurrentRow)?,
            inblock_model: matrix_tsp_from_map("inblock.", &map, FeatureMode::CurrentRow)?,
            stage2,
        }))
    } else {
        Err(Error::CorruptCheckpoint(format!(
            "unknown model kind {}",
            kind.item()
        )))
    }
}
