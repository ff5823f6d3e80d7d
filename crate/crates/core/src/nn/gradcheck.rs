//! Central finite-difference gradient checking.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::tensor::{Gradients, ParamId, ParamStore};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct GradCheckOptions {
    pub epsilon: f64,
    /// Coordinates checked per parameter tensor; tensors at most this
    /// large are checked exhaustively.
    pub coords_per_param: usize,
    pub seed: u64,
}

impl Default for GradCheckOptions {
    fn default() -> Self {
        GradCheckOptions { epsilon: 1e-5, coords_per_param: 64, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamCheck {
    pub name: String,
    pub coords_checked: usize,
    pub max_relative_error: f64,
    /// Flat index, analytic, numeric at the worst coordinate.
    pub worst: Option<(usize, f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub params: Vec<ParamCheck>,
}

impl GradCheckReport {
    pub fn max_relative_error(&self) -> f64 {
        self.params.iter().map(|p| p.max_relative_error).fold(0.0, f64::max)
    }

    pub fn coords_checked(&self) -> usize {
        self.params.iter().map(|p| p.coords_checked).sum()
    }
}

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-8)
}

/// Compares `analytic` against `(f(θ+ε) − f(θ−ε)) / 2ε` for a sample of
/// coordinates of every parameter. The store is restored before returning.
pub fn grad_check<F>(
    store: &mut ParamStore,
    loss_fn: F,
    analytic: &Gradients,
    options: &GradCheckOptions,
) -> Result<GradCheckReport>
where
    F: Fn(&ParamStore) -> Result<f64>,
{
    if options.epsilon.is_nan() || options.epsilon <= 0.0 {
        return Err(Error::InvalidArgument(format!("epsilon must be positive, got {}", options.epsilon)));
    }
    let base = loss_fn(store)?;
    if !base.is_finite() {
        return Err(Error::NonFinite(format!("loss is {base}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let ids: Vec<ParamId> = store.ids().collect();
    let mut report = GradCheckReport { params: Vec::with_capacity(ids.len()) };

    for id in ids {
        let (len, cols) = {
            let t = store.get(id);
            (t.len(), t.cols())
        };
        let coords = choose_coords(analytic, id, len, cols, options.coords_per_param, &mut rng);
        let mut check = ParamCheck {
            name: store.name(id).to_string(),
            coords_checked: coords.len(),
            max_relative_error: 0.0,
            worst: None,
        };
        for k in coords {
            let original = store.get(id).data()[k];
            store.get_mut(id).data_mut()[k] = original + options.epsilon;
            let plus = loss_fn(store);
            store.get_mut(id).data_mut()[k] = original - options.epsilon;
            let minus = loss_fn(store);
            store.get_mut(id).data_mut()[k] = original;
            let (plus, minus) = (plus?, minus?);
            if !plus.is_finite() || !minus.is_finite() {
                return Err(Error::NonFinite(format!("loss at {}[{k}] ± ε", check.name)));
            }
            let numeric = (plus - minus) / (2.0 * options.epsilon);
            let a = analytic.get(id, k, cols);
            let err = relative_error(a, numeric);
            if err > check.max_relative_error || check.worst.is_none() {
                check.max_relative_error = check.max_relative_error.max(err);
                check.worst = Some((k, a, numeric));
            }
        }
        report.params.push(check);
    }
    Ok(report)
}

/// Prefers coordinates with a non-zero analytic gradient, plus a few
/// zero-gradient ones to confirm they really are flat.
fn choose_coords(
    analytic: &Gradients,
    id: ParamId,
    len: usize,
    cols: usize,
    budget: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<usize> {
    if len <= budget {
        return (0..len).collect();
    }
    let (nonzero, zero): (Vec<usize>, Vec<usize>) = (0..len).partition(|&k| analytic.get(id, k, cols) != 0.0);
    let mut pick = |pool: &[usize], n: usize| -> Vec<usize> {
        let n = n.min(pool.len());
        sample(rng, pool.len(), n).into_iter().map(|i| pool[i]).collect()
    };
    let mut out = pick(&nonzero, budget);
    out.extend(pick(&zero, (budget / 4).max(1)));
    out.sort_unstable();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{Graph, Tensor};

    fn quadratic(store: &ParamStore) -> (f64, Gradients) {
        let mut g = Graph::new(store);
        let t = g.param(ParamId(0));
        let sq = g.mul(t, t).unwrap();
        let loss = g.pick(sq, &[0]).unwrap();
        (g.scalar(loss), g.backward(loss))
    }

    #[test]
    fn quadratic_is_exact() {
        let mut store = ParamStore::new();
        store.add("theta", Tensor::vector(vec![3.0]));
        let (_, grads) = quadratic(&store);
        assert_eq!(grads.get(ParamId(0), 0, 1), 6.0);
        let report = grad_check(&mut store, |s| Ok(quadratic(s).0), &grads, &GradCheckOptions::default()).unwrap();
        assert!(report.max_relative_error() < 1e-9, "{report:?}");
        assert_eq!(store.get(ParamId(0)).data(), &[3.0]);
    }

    #[test]
    fn zero_epsilon_rejected() {
        let mut store = ParamStore::new();
        store.add("theta", Tensor::vector(vec![3.0]));
        let (_, grads) = quadratic(&store);
        let opts = GradCheckOptions { epsilon: 0.0, ..Default::default() };
        assert!(matches!(
            grad_check(&mut store, |s| Ok(quadratic(s).0), &grads, &opts),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn non_finite_loss_rejected() {
        let mut store = ParamStore::new();
        store.add("theta", Tensor::vector(vec![3.0]));
        let (_, grads) = quadratic(&store);
        let res = grad_check(&mut store, |_| Ok(f64::NAN), &grads, &GradCheckOptions::default());
        assert!(matches!(res, Err(Error::NonFinite(_))));
    }

    #[test]
    fn detects_wrong_gradient() {
        let mut store = ParamStore::new();
        store.add("theta", Tensor::vector(vec![3.0]));
        let (_, mut grads) = quadratic(&store);
        grads.dense_mut(ParamId(0), 1)[0] = 5.0;
        let report = grad_check(&mut store, |s| Ok(quadratic(s).0), &grads, &GradCheckOptions::default()).unwrap();
        assert!(report.max_relative_error() > 0.1);
    }
}
