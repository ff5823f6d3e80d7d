use rand::Rng;

use super::graph::{Graph, Var};
use super::tensor::{ParamId, ParamStore, Tensor};
use crate::error::{Error, Result};

/// Bias value the forget gate starts from.
pub const FORGET_BIAS_INIT: f64 = 1.0;

/// Weights of one LSTM direction. Gate blocks are stacked in the order
/// input, forget, cell, output along the first dimension of each weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LstmParams {
    pub w_input: ParamId,
    pub w_hidden: ParamId,
    pub bias: ParamId,
    pub input_dim: usize,
    pub hidden_dim: usize,
}

impl LstmParams {
    pub fn register<R: Rng + ?Sized>(
        store: &mut ParamStore,
        prefix: &str,
        input_dim: usize,
        hidden_dim: usize,
        scale: f64,
        rng: &mut R,
    ) -> Self {
        let w_input =
            store.add(format!("{prefix}.w_input"), Tensor::uniform(vec![4 * hidden_dim, input_dim], scale, rng));
        let w_hidden =
            store.add(format!("{prefix}.w_hidden"), Tensor::uniform(vec![4 * hidden_dim, hidden_dim], scale, rng));
        let mut b = Tensor::zeros(vec![4 * hidden_dim]);
        b.data_mut()[hidden_dim..2 * hidden_dim].fill(FORGET_BIAS_INIT);
        let bias = store.add(format!("{prefix}.bias"), b);
        LstmParams { w_input, w_hidden, bias, input_dim, hidden_dim }
    }
}

/// Both directions of a bidirectional LSTM.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BiLstmParams {
    pub forward: LstmParams,
    pub backward: LstmParams,
}

impl BiLstmParams {
    pub fn register<R: Rng + ?Sized>(
        store: &mut ParamStore,
        prefix: &str,
        input_dim: usize,
        hidden_dim: usize,
        scale: f64,
        rng: &mut R,
    ) -> Self {
        BiLstmParams {
            forward: LstmParams::register(store, &format!("{prefix}.fw"), input_dim, hidden_dim, scale, rng),
            backward: LstmParams::register(store, &format!("{prefix}.bw"), input_dim, hidden_dim, scale, rng),
        }
    }

    pub fn output_dim(&self) -> usize {
        self.forward.hidden_dim + self.backward.hidden_dim
    }
}

/// Affine map `W x + b` (bias optional).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Linear {
    pub weight: ParamId,
    pub bias: Option<ParamId>,
}

impl Linear {
    pub fn register<R: Rng + ?Sized>(
        store: &mut ParamStore,
        name: &str,
        out_dim: usize,
        in_dim: usize,
        with_bias: bool,
        scale: f64,
        rng: &mut R,
    ) -> Self {
        let weight = store.add(format!("{name}.weight"), Tensor::uniform(vec![out_dim, in_dim], scale, rng));
        let bias = with_bias.then(|| store.add(format!("{name}.bias"), Tensor::zeros(vec![out_dim])));
        Linear { weight, bias }
    }
}

pub fn linear(g: &mut Graph, layer: Linear, x: Var) -> Result<Var> {
    let y = g.matvec(layer.weight, x)?;
    match layer.bias {
        Some(b) => {
            let b = g.param(b);
            g.add(y, b)
        }
        None => Ok(y),
    }
}

pub fn tanh_map(g: &mut Graph, x: Var) -> Var {
    g.tanh(x)
}

/// Rows `indices` of an embedding table, one node per row.
pub fn embedding_lookup(g: &mut Graph, table: ParamId, indices: &[usize]) -> Result<Vec<Var>> {
    indices.iter().map(|&i| g.row(table, i)).collect()
}

/// One LSTM step: returns `(h_t, c_t)`.
pub fn lstm_step(g: &mut Graph, p: &LstmParams, x: Var, h_prev: Var, c_prev: Var) -> Result<(Var, Var)> {
    let h = p.hidden_dim;
    if g.dim(x) != p.input_dim || g.dim(h_prev) != h || g.dim(c_prev) != h {
        return Err(Error::Shape(format!(
            "lstm expects x[{}], h[{h}], c[{h}]; got x[{}], h[{}], c[{}]",
            p.input_dim,
            g.dim(x),
            g.dim(h_prev),
            g.dim(c_prev)
        )));
    }
    let wx = g.matvec(p.w_input, x)?;
    let wh = g.matvec(p.w_hidden, h_prev)?;
    let b = g.param(p.bias);
    let pre = g.add(wx, wh)?;
    let pre = g.add(pre, b)?;

    let i = g.slice(pre, 0, h)?;
    let f = g.slice(pre, h, h)?;
    let c_hat = g.slice(pre, 2 * h, h)?;
    let o = g.slice(pre, 3 * h, h)?;
    let i = g.sigmoid(i);
    let f = g.sigmoid(f);
    let c_hat = g.tanh(c_hat);
    let o = g.sigmoid(o);

    let keep = g.mul(f, c_prev)?;
    let write = g.mul(i, c_hat)?;
    let c = g.add(keep, write)?;
    let tc = g.tanh(c);
    let h_t = g.mul(o, tc)?;
    Ok((h_t, c))
}

/// Runs one direction over `inputs`, starting from the given state.
pub fn lstm_run(g: &mut Graph, p: &LstmParams, inputs: &[Var], h0: Var, c0: Var) -> Result<Vec<Var>> {
    let (mut h, mut c) = (h0, c0);
    let mut out = Vec::with_capacity(inputs.len());
    for &x in inputs {
        (h, c) = lstm_step(g, p, x, h, c)?;
        out.push(h);
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct BiLstmOutput {
    /// Row t is `[forward h_t ; backward h_t]`.
    pub states: Vec<Var>,
    /// `[forward h_T ; backward h_1]`: the terminal state of each direction.
    pub final_state: Var,
}

pub fn bilstm_encode(g: &mut Graph, p: &BiLstmParams, inputs: &[Var]) -> Result<BiLstmOutput> {
    if inputs.is_empty() {
        return Err(Error::InvalidArgument("bidirectional encoder needs at least one input".into()));
    }
    let zf = g.input(vec![0.0; p.forward.hidden_dim]);
    let fwd = lstm_run(g, &p.forward, inputs, zf, zf)?;
    let reversed: Vec<Var> = inputs.iter().rev().copied().collect();
    let zb = g.input(vec![0.0; p.backward.hidden_dim]);
    let mut bwd = lstm_run(g, &p.backward, &reversed, zb, zb)?;
    bwd.reverse();

    let states = fwd.iter().zip(&bwd).map(|(f, b)| g.concat(&[*f, *b])).collect();
    let final_state = g.concat(&[*fwd.last().unwrap(), bwd[0]]);
    Ok(BiLstmOutput { states, final_state })
}

/// Inverted dropout. Identity when `training` is false or `rate` is 0.
pub fn dropout<R: Rng + ?Sized>(g: &mut Graph, x: Var, rate: f64, training: bool, rng: &mut R) -> Result<Var> {
    let mask = dropout_mask(g.dim(x), rate, training, rng)?;
    match mask {
        Some(m) => {
            let m = g.input(m);
            g.mul(x, m)
        }
        None => Ok(x),
    }
}

/// Scaled keep-mask, or `None` when dropout is a no-op.
pub fn dropout_mask<R: Rng + ?Sized>(n: usize, rate: f64, training: bool, rng: &mut R) -> Result<Option<Vec<f64>>> {
    if !(0.0..1.0).contains(&rate) {
        return Err(Error::InvalidArgument(format!("dropout rate {rate} outside [0, 1)")));
    }
    if !training || rate == 0.0 {
        return Ok(None);
    }
    let keep = 1.0 / (1.0 - rate);
    Ok(Some((0..n).map(|_| if rng.random::<f64>() < rate { 0.0 } else { keep }).collect()))
}
