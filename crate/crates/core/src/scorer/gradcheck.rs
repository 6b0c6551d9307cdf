//! Central finite-difference checks of the analytic gradients.

use super::model::{Model, Prepared};
use super::params::Grads;
use super::ScorerError;

/// Finite-difference step.
pub const STEP: f64 = 1e-5;

/// Gradients below this magnitude are dominated by rounding in the loss
/// and are compared by absolute error only.
pub const GRAD_FLOOR: f64 = 1e-5;

/// Result for one parameter block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockCheck {
    pub name: String,
    /// Entries compared.
    pub checked: usize,
    /// Compared entries with a gradient of at least [`GRAD_FLOOR`].
    pub assessed: usize,
    /// Entries whose analytic gradient is non-zero.
    pub nonzero: usize,
    /// Over assessed entries.
    pub max_relative_error: f64,
    /// Over all compared entries.
    pub max_absolute_error: f64,
}

impl BlockCheck {
    pub fn passes(&self, relative: f64, absolute: f64) -> bool {
        self.assessed > 0 && self.max_relative_error < relative && self.max_absolute_error < absolute
    }
}

/// `|a - n| / max(|a|, |n|)`, zero when both are zero.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    let scale = analytic.abs().max(numeric.abs());
    if scale == 0.0 {
        0.0
    } else {
        (analytic - numeric).abs() / scale
    }
}

/// Analytic gradient of the sentence loss.
pub fn analytic_gradient(model: &Model, ex: &Prepared) -> Result<(f64, Grads), ScorerError> {
    let mut grads = Grads::zeros(&model.params);
    let (run, loss, _) = model.forward(ex)?;
    run.t.backward(loss, &mut grads);
    Ok((run.t.scalar(loss), grads))
}

/// Compares analytic and central-difference gradients on up to
/// `per_block` evenly spread entries of every block whose gradient reaches
/// [`GRAD_FLOOR`], plus two smaller non-zero entries and two zero entries.
pub fn check_gradients(model: &Model, ex: &Prepared, per_block: usize) -> Result<Vec<BlockCheck>, ScorerError> {
    let (_, grads) = analytic_gradient(model, ex)?;
    let mut probe = model.clone();
    let mut out = Vec::with_capacity(model.params.len());
    for id in 0..model.params.len() {
        let g = grads.values(id);
        let large: Vec<usize> = (0..g.len()).filter(|&k| g[k].abs() >= GRAD_FLOOR).collect();
        let small = (0..g.len()).filter(|&k| g[k] != 0.0 && g[k].abs() < GRAD_FLOOR).take(2);
        let zero = (0..g.len()).filter(|&k| g[k] == 0.0).take(2);
        let stride = large.len().div_ceil(per_block.max(1)).max(1);
        let entries: Vec<usize> = large.iter().step_by(stride).copied().chain(small).chain(zero).collect();
        let mut check = BlockCheck {
            name: model.params.name(id).to_string(),
            checked: 0,
            assessed: 0,
            nonzero: g.iter().filter(|x| **x != 0.0).count(),
            max_relative_error: 0.0,
            max_absolute_error: 0.0,
        };
        for k in entries {
            let orig = probe.params.values(id)[k];
            probe.params.values_mut(id)[k] = orig + STEP;
            let plus = probe.score(ex)?.loss;
            probe.params.values_mut(id)[k] = orig - STEP;
            let minus = probe.score(ex)?.loss;
            probe.params.values_mut(id)[k] = orig;
            let numeric = (plus - minus) / (2.0 * STEP);
            check.checked += 1;
            if g[k].abs() >= GRAD_FLOOR {
                check.assessed += 1;
                check.max_relative_error = check.max_relative_error.max(relative_error(g[k], numeric));
            }
            check.max_absolute_error = check.max_absolute_error.max((g[k] - numeric).abs());
        }
        out.push(check);
    }
    Ok(out)
}
