use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConstants {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConstants {
    fn default() -> Self {
        AdamConstants { beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

impl AdamConstants {
    pub fn validate(&self) -> Result<()> {
        let open01 = |x: f64| x > 0.0 && x < 1.0;
        if !open01(self.beta1) || !open01(self.beta2) || !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::InvalidInput(format!("invalid ADAM constants {self:?}")));
        }
        Ok(())
    }
}

/// Moment accumulators of the ADAM optimizer.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    m: Vec<f64>,
    v: Vec<f64>,
    step: u64,
    constants: AdamConstants,
}

impl OptimizerState {
    pub fn new(dim: usize, constants: AdamConstants) -> Result<Self> {
        constants.validate()?;
        Ok(OptimizerState { m: vec![0.0; dim], v: vec![0.0; dim], step: 0, constants })
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn first_moment(&self) -> &[f64] {
        &self.m
    }

    pub fn second_moment(&self) -> &[f64] {
        &self.v
    }

    /// One bias-corrected ADAM step. Returns the parameter delta; the state
    /// is left untouched if the gradient is rejected.
    pub fn update(&mut self, grad: &[f64], lr: f64) -> Result<Vec<f64>> {
        if grad.len() != self.m.len() {
            return Err(Error::Shape { expected: self.m.len(), got: grad.len() });
        }
        if let Some(k) = grad.iter().position(|g| !g.is_finite()) {
            return Err(Error::Numeric(format!("gradient component {k} is {}", grad[k])));
        }
        let AdamConstants { beta1, beta2, eps } = self.constants;
        self.step += 1;
        let t = self.step as i32;
        let c1 = 1.0 - beta1.powi(t);
        let c2 = 1.0 - beta2.powi(t);
        let mut delta = Vec::with_capacity(grad.len());
        for ((m, v), &g) in self.m.iter_mut().zip(self.v.iter_mut()).zip(grad) {
            *m = beta1 * *m + (1.0 - beta1) * g;
            *v = beta2 * *v + (1.0 - beta2) * g * g;
            delta.push(-lr * (*m / c1) / ((*v / c2).sqrt() + eps));
        }
        Ok(delta)
    }
}
