//! Graph pointer network building blocks: graph embedding encoder,
//! pointer-attention decoder, softmax policy, and an optional LSTM cell.

use rand::Rng;

use crate::error::{Error, Result};
use crate::tensor::Tensor;

mod embed;
mod lstm;
mod pointer;
mod policy;

pub use embed::{graph_embed, GraphEmbedLayer};
pub use lstm::{lstm_step, LstmCell};
pub use pointer::{pointer_logits, PointerDecoder};
pub use policy::{policy_select, PolicyStep, SelectMode};

/// Encoder shape: `layers` graph-embedding layers mapping `input_dim`
/// features per node to `hidden_dim`.
#[derive(Clone, Copy, Debug)]
pub struct GraphEmbedConfig {
    pub layers: usize,
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub gamma_init: f64,
}

impl Default for GraphEmbedConfig {
    fn default() -> Self {
        GraphEmbedConfig {
            layers: 3,
            input_dim: 1,
            hidden_dim: 128,
            gamma_init: 0.5,
        }
    }
}

impl GraphEmbedConfig {
    pub fn validate(&self) -> Result<()> {
        if self.layers == 0 || self.input_dim == 0 || self.hidden_dim == 0 {
            return Err(Error::shape(
                "graph_embed_config",
                format!(
                    "layers {}, input_dim {}, hidden_dim {} must all be >= 1",
                    self.layers, self.input_dim, self.hidden_dim
                ),
            ));
        }
        Ok(())
    }
}

/// Weight matrices start uniform in `(-1/sqrt(fan_in), 1/sqrt(fan_in))`,
/// biases at zero.
pub(crate) fn init_weight<R: Rng>(rng: &mut R, fan_in: usize, fan_out: usize) -> Tensor {
    let bound = 1.0 / (fan_in as f64).sqrt();
    Tensor::uniform(rng, fan_in, fan_out, bound)
}

/// Builds the encoder stack for a config.
pub fn init_encoder<R: Rng>(cfg: &GraphEmbedConfig, rng: &mut R) -> Result<Vec<GraphEmbedLayer>> {
    cfg.validate()?;
    let mut layers = Vec::with_capacity(cfg.layers);
    let mut d_in = cfg.input_dim;
    for _ in 0..cfg.layers {
        let d_out = cfg.hidden_dim;
        layers.push(GraphEmbedLayer {
            theta: init_weight(rng, d_in, d_out),
            gamma: Tensor::scalar(cfg.gamma_init),
            agg_weight: init_weight(rng, d_in, d_out),
            agg_bias: Tensor::zeros(1, d_out),
        });
        d_in = d_out;
    }
    Ok(layers)
}

/// Builds a pointer decoder; `with_query` adds the query projection used by
/// the LSTM-bearing variant.
pub fn init_pointer<R: Rng>(hidden: usize, with_query: bool, rng: &mut R) -> PointerDecoder {
    PointerDecoder {
        w_r: init_weight(rng, hidden, hidden),
        w_q: with_query.then(|| init_weight(rng, hidden, hidden)),
        v: init_weight(rng, hidden, 1),
    }
}

/// Builds an LSTM cell with the given input and hidden sizes.
pub fn init_lstm<R: Rng>(input: usize, hidden: usize, rng: &mut R) -> LstmCell {
    LstmCell {
        w_x: init_weight(rng, input, 4 * hidden),
        w_h: init_weight(rng, hidden, 4 * hidden),
        bias: Tensor::zeros(1, 4 * hidden),
        hidden,
    }
}
