use crate::error::{Error, Result};
use crate::math::mean_std;

/// Number of trailing steps averaged into the reported final energy.
pub const FINAL_WINDOW: usize = 100;

/// Sample mean and standard error (`std / sqrt(N)`) of local energies.
pub fn estimate_energy(locals: &[f64]) -> Result<(f64, f64)> {
    if locals.is_empty() {
        return Err(Error::InvalidInput("no local energies".into()));
    }
    let (mean, std) = mean_std(locals);
    Ok((mean, std / (locals.len() as f64).sqrt()))
}

/// Centered gradient estimate `(1/N) Σ (E_loc - Ē) ∇ln P`.
pub fn estimate_gradient(locals: &[f64], scores: &[Vec<f64>]) -> Result<Vec<f64>> {
    let w = vec![1.0 / locals.len().max(1) as f64; locals.len()];
    estimate_gradient_weighted(locals, scores, &w)
}

/// `Σ_k w_k (E_k - Ē_w) score_k` with `Ē_w = Σ_k w_k E_k`; weights must sum
/// to one. With `w = P` over every configuration this is the exact gradient.
pub fn estimate_gradient_weighted(locals: &[f64], scores: &[Vec<f64>], weights: &[f64]) -> Result<Vec<f64>> {
    if locals.is_empty() {
        return Err(Error::InvalidInput("no local energies".into()));
    }
    if scores.len() != locals.len() || weights.len() != locals.len() {
        return Err(Error::InvalidInput(format!(
            "{} local energies, {} scores, {} weights",
            locals.len(),
            scores.len(),
            weights.len()
        )));
    }
    let dim = scores[0].len();
    if let Some(bad) = scores.iter().find(|s| s.len() != dim) {
        return Err(Error::Shape { expected: dim, got: bad.len() });
    }
    let mean: f64 = locals.iter().zip(weights).map(|(e, w)| e * w).sum();
    let mut g = vec![0.0; dim];
    for ((e, s), w) in locals.iter().zip(scores).zip(weights) {
        let c = w * (e - mean);
        for (gi, si) in g.iter_mut().zip(s) {
            *gi += c * si;
        }
    }
    Ok(g)
}

/// Mean of the last `FINAL_WINDOW` (or fewer) per-step energies.
pub fn smoothed_final_energy(energies: &[f64]) -> Option<f64> {
    if energies.is_empty() {
        return None;
    }
    let tail = &energies[energies.len().saturating_sub(FINAL_WINDOW)..];
    Some(tail.iter().sum::<f64>() / tail.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn energy_examples() {
        assert_eq!(estimate_energy(&[2.5; 7]).unwrap(), (2.5, 0.0));
        assert_eq!(estimate_energy(&[-1.0, 1.0]).unwrap(), (0.0, 1.0));
        assert!(estimate_energy(&[]).is_err());
    }

    #[test]
    fn constant_locals_give_zero_gradient() {
        let scores = vec![vec![0.3, -1.0], vec![2.0, 0.5], vec![-0.1, 0.0]];
        assert_eq!(estimate_gradient(&[4.0; 3], &scores).unwrap(), vec![0.0, 0.0]);
        assert!(estimate_gradient(&[1.0, 2.0], &scores).is_err());
    }

    #[test]
    fn final_window() {
        let e: Vec<f64> = (0..250).map(|k| k as f64).collect();
        assert_eq!(smoothed_final_energy(&e), Some(199.5));
        assert_eq!(smoothed_final_energy(&[3.0]), Some(3.0));
        assert_eq!(smoothed_final_energy(&[]), None);
    }
}
