use serde::{Deserialize, Serialize};

use super::config::TrainConfig;
use super::params::NetParams;
use crate::error::{Error, Result};

/// Per-parameter first and second moments plus the step counter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
}

impl AdamState {
    pub fn new(len: usize) -> Self {
        Self {
            m: vec![0.0; len],
            v: vec![0.0; len],
            t: 0,
        }
    }

    pub fn for_params(params: &NetParams) -> Self {
        Self::new(params.len())
    }
}

/// One bias-corrected Adam update in place. A non-finite gradient leaves
/// both `params` and `state` untouched.
pub fn adam_step(state: &mut AdamState, params: &mut NetParams, grads: &[f64], cfg: &TrainConfig) -> Result<()> {
    cfg.validate()?;
    let n = params.len();
    if grads.len() != n || state.m.len() != n || state.v.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n.to_string(),
            actual: format!("grads {}, m {}, v {}", grads.len(), state.m.len(), state.v.len()),
        });
    }
    if let Some((i, g)) = grads.iter().enumerate().find(|(_, g)| !g.is_finite()) {
        return Err(Error::TrainingAborted(format!(
            "non-finite gradient {g} at parameter {i} (step {})",
            state.t + 1
        )));
    }
    state.t += 1;
    let t = state.t as i32;
    let (b1, b2) = (cfg.beta1, cfg.beta2);
    let c1 = 1.0 - b1.powi(t);
    let c2 = 1.0 - b2.powi(t);
    for (((p, m), v), &g) in params.values.iter_mut().zip(&mut state.m).zip(&mut state.v).zip(grads) {
        *m = b1 * *m + (1.0 - b1) * g;
        *v = b2 * *v + (1.0 - b2) * g * g;
        let m_hat = *m / c1;
        let v_hat = *v / c2;
        *p -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.epsilon);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::NetConfig;

    fn params() -> NetParams {
        NetParams::init(NetConfig::new(4), 3).unwrap()
    }

    #[test]
    fn zero_gradient_is_a_no_op() {
        let mut p = params();
        let before = p.clone();
        let mut s = AdamState::for_params(&p);
        adam_step(&mut s, &mut p, &vec![0.0; before.len()], &TrainConfig::default()).unwrap();
        assert_eq!(p, before);
        assert_eq!(s.t, 1);
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        let mut p = params();
        let before = p.clone();
        let mut g = vec![0.0; p.len()];
        g[0] = 0.5;
        g[1] = -2.0;
        let mut s = AdamState::for_params(&p);
        adam_step(&mut s, &mut p, &g, &TrainConfig::default()).unwrap();
        assert!((p.values[0] - before.values[0] + 1e-4).abs() < 1e-7);
        assert!((p.values[1] - before.values[1] - 1e-4).abs() < 1e-7);
        for i in 0..g.len() {
            let d = p.values[i] - before.values[i];
            if g[i] != 0.0 {
                assert_eq!(d.signum(), -g[i].signum());
            }
        }
        assert!(s.v.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn non_finite_gradient_aborts() {
        let mut p = params();
        let before = p.clone();
        let mut g = vec![0.0; p.len()];
        g[5] = f64::NAN;
        let mut s = AdamState::for_params(&p);
        let err = adam_step(&mut s, &mut p, &g, &TrainConfig::default()).unwrap_err();
        assert!(matches!(err, Error::TrainingAborted(_)));
        assert_eq!(p, before);
        assert_eq!(s.t, 0);
    }
}
