//! Central finite differences over every parameter of a [`ParamSet`].
//!
//! Only the loss closure is evaluated here, so the numeric gradient shares no
//! code with the analytic backward passes it is compared against.

use super::params::ParamSet;

/// Numeric `∂loss/∂θ` for every parameter, in [`ParamSet::flatten`] order.
pub fn finite_difference<P, F>(params: &P, eps: f64, loss: F) -> Vec<f64>
where
    P: ParamSet,
    F: Fn(&P) -> f64,
{
    let mut probe = params.clone();
    let sizes: Vec<usize> = params.tensors().iter().map(|t| t.values.len()).collect();
    let mut grads = Vec::with_capacity(sizes.iter().sum());
    for (ti, &len) in sizes.iter().enumerate() {
        for k in 0..len {
            let original = probe.tensors_mut()[ti][k];
            probe.tensors_mut()[ti][k] = original + eps;
            let plus = loss(&probe);
            probe.tensors_mut()[ti][k] = original - eps;
            let minus = loss(&probe);
            probe.tensors_mut()[ti][k] = original;
            grads.push((plus - minus) / (2.0 * eps));
        }
    }
    grads
}

/// `|a − n| / max(|a|, |n|, floor)`, maximised over all entries.
///
/// The floor keeps entries whose true gradient is (near) zero from turning
/// round-off into a huge ratio.
pub fn max_relative_error(analytic: &[f64], numeric: &[f64], floor: f64) -> f64 {
    assert_eq!(analytic.len(), numeric.len());
    analytic
        .iter()
        .zip(numeric)
        .map(|(a, n)| (a - n).abs() / a.abs().max(n.abs()).max(floor))
        .fold(0.0, f64::max)
}
