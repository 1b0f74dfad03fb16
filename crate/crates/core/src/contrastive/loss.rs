use ndarray::Array2;

use crate::error::{Error, Result};

/// Default SCL temperature.
pub const DEFAULT_TEMPERATURE: f64 = 0.07;

fn check_inputs(z: &Array2<f64>, labels: &[usize], tau: f64) -> Result<()> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::config(format!("temperature must be > 0, got {tau}")));
    }
    if z.nrows() != labels.len() {
        return Err(Error::config(format!(
            "{} latents but {} labels",
            z.nrows(),
            labels.len()
        )));
    }
    Ok(())
}

/// Supervised contrastive loss summed over anchors:
/// `L = Σ_i −1/|P(i)| Σ_{p∈P(i)} log( exp(z_i·z_p/τ) / Σ_{a≠i} exp(z_i·z_a/τ) )`.
/// Anchors without positives contribute nothing.
pub fn scl_loss(z: &Array2<f64>, labels: &[usize], tau: f64) -> Result<f64> {
    scl_loss_impl(z, labels, tau, false).map(|(l, _)| l)
}

/// Loss and its gradient with respect to the latents.
pub fn scl_loss_grad(z: &Array2<f64>, labels: &[usize], tau: f64) -> Result<(f64, Array2<f64>)> {
    scl_loss_impl(z, labels, tau, true).map(|(l, g)| (l, g.expect("gradient requested")))
}

fn scl_loss_impl(z: &Array2<f64>, labels: &[usize], tau: f64, want_grad: bool) -> Result<(f64, Option<Array2<f64>>)> {
    check_inputs(z, labels, tau)?;
    let b = z.nrows();
    let s = z.dot(&z.t()) / tau;
    let mut loss = 0.0;
    // coefficient matrix c_ia = dL/ds_ia
    let mut coef = want_grad.then(|| Array2::<f64>::zeros((b, b)));
    let mut q = vec![0.0; b];
    for i in 0..b {
        let n_pos = (0..b).filter(|&a| a != i && labels[a] == labels[i]).count();
        if n_pos == 0 {
            continue;
        }
        let max = (0..b).filter(|&a| a != i).map(|a| s[[i, a]]).fold(f64::NEG_INFINITY, f64::max);
        let mut denom = 0.0;
        for a in 0..b {
            if a != i {
                q[a] = (s[[i, a]] - max).exp();
                denom += q[a];
            }
        }
        let log_denom = max + denom.ln();
        let pos_mean = (0..b)
            .filter(|&a| a != i && labels[a] == labels[i])
            .map(|a| s[[i, a]])
            .sum::<f64>()
            / n_pos as f64;
        loss += log_denom - pos_mean;
        if let Some(c) = coef.as_mut() {
            for a in 0..b {
                if a == i {
                    continue;
                }
                let pos = if labels[a] == labels[i] { 1.0 / n_pos as f64 } else { 0.0 };
                c[[i, a]] = q[a] / denom - pos;
            }
        }
    }
    // s = Z Zᵀ/τ, so dZ = (C + Cᵀ) Z / τ
    let grad = coef.map(|c| (&c + &c.t()).dot(z) / tau);
    Ok((loss, grad))
}

/// Mean binary cross-entropy on logits and its gradient with respect to them.
pub fn bce_with_logits(logits: &[f64], targets: &[f64]) -> (f64, Vec<f64>) {
    let n = logits.len().max(1) as f64;
    let mut loss = 0.0;
    let mut grad = Vec::with_capacity(logits.len());
    for (&x, &y) in logits.iter().zip(targets) {
        loss += x.max(0.0) - x * y + (-x.abs()).exp().ln_1p();
        grad.push((sigmoid(x) - y) / n);
    }
    (loss / n, grad)
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}
