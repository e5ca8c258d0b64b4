use crate::error::{Error, Result};
use crate::quantizer::ModelVector;

/// `sum_k alpha_k * models[k]`, componentwise.
///
/// Each product is split exactly into value and rounding error (FMA), and the
/// terms of a component are summed in sorted order with Neumaier
/// compensation. The result is therefore independent of the order of the
/// models and exact for identical models under dyadic weights.
pub fn fedavg(models: &[ModelVector], weights: &[f64]) -> Result<ModelVector> {
    if models.is_empty() || models.len() != weights.len() {
        return Err(Error::domain(format!(
            "{} models with {} weights",
            models.len(),
            weights.len()
        )));
    }
    let n = models[0].len();
    for m in models {
        m.check_len(n, "fedavg")?;
    }
    if weights.iter().any(|&a| a.is_nan() || a < 0.0) || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::domain("weights must be non-negative and sum to 1"));
    }
    let mut terms = Vec::with_capacity(2 * models.len());
    let out = (0..n)
        .map(|i| {
            terms.clear();
            for (m, &a) in models.iter().zip(weights) {
                let p = a * m[i];
                terms.push(p);
                terms.push(a.mul_add(m[i], -p));
            }
            terms.sort_by(f64::total_cmp);
            neumaier_sum(&terms)
        })
        .collect();
    ModelVector::new(out)
}

fn neumaier_sum(terms: &[f64]) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for &t in terms {
        let s = sum + t;
        if sum.abs() >= t.abs() {
            comp += (sum - s) + t;
        } else {
            comp += (t - s) + sum;
        }
        sum = s;
    }
    sum + comp
}
