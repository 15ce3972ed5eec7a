//! Adam optimizer with bias-corrected first and second moments.

use super::net::{Gradients, ModelParams};
use super::TrainConfig;
use crate::error::{Error, Result};

/// Optimizer state: step counter plus per-parameter moment estimates,
/// shaped exactly like the parameters they track.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub step: u64,
    m: Gradients,
    v: Gradients,
}

impl AdamState {
    pub fn new(params: &ModelParams) -> AdamState {
        AdamState {
            step: 0,
            m: Gradients::zeros_like(params),
            v: Gradients::zeros_like(params),
        }
    }
}

fn check_finite(component: &'static str, values: &[f64]) -> Result<()> {
    if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(Error::NonFiniteGradient {
            component,
            index,
            value,
        });
    }
    Ok(())
}

fn update_slice(
    params: &mut [f64],
    grads: &[f64],
    m: &mut [f64],
    v: &mut [f64],
    cfg: &TrainConfig,
    bias1: f64,
    bias2: f64,
) {
    for i in 0..params.len() {
        let g = grads[i];
        m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
        v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
        let m_hat = m[i] / bias1;
        let v_hat = v[i] / bias2;
        params[i] -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.epsilon);
    }
}

/// One Adam update. Rejects non-finite gradients before touching any state
/// so a failed step leaves parameters and moments unchanged.
pub fn adam_step(
    params: &mut ModelParams,
    grads: &Gradients,
    state: &mut AdamState,
    cfg: &TrainConfig,
) -> Result<()> {
    if params.embeddings.len() != grads.embeddings.len()
        || params.query.len() != grads.query.len()
        || params.head_w.len() != grads.head_w.len()
        || params.embeddings.len() != state.m.embeddings.len()
    {
        return Err(Error::ShapeMismatch(
            "gradient/optimizer tensors do not match the parameter shapes".to_string(),
        ));
    }
    check_finite("embeddings", &grads.embeddings)?;
    check_finite("query", &grads.query)?;
    check_finite("head_w", &grads.head_w)?;
    check_finite("head_b", &grads.head_b)?;

    let t = state.step + 1;
    let bias1 = 1.0 - cfg.beta1.powi(t as i32);
    let bias2 = 1.0 - cfg.beta2.powi(t as i32);
    update_slice(
        &mut params.embeddings,
        &grads.embeddings,
        &mut state.m.embeddings,
        &mut state.v.embeddings,
        cfg,
        bias1,
        bias2,
    );
    update_slice(
        &mut params.query,
        &grads.query,
        &mut state.m.query,
        &mut state.v.query,
        cfg,
        bias1,
        bias2,
    );
    update_slice(
        &mut params.head_w,
        &grads.head_w,
        &mut state.m.head_w,
        &mut state.v.head_w,
        cfg,
        bias1,
        bias2,
    );
    update_slice(
        &mut params.head_b,
        &grads.head_b,
        &mut state.m.head_b,
        &mut state.v.head_b,
        cfg,
        bias1,
        bias2,
    );
    state.step = t;
    debug_assert!(params.all_finite(), "adam produced non-finite parameters");
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Encoder;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn small_params() -> ModelParams {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        ModelParams::init(4, 3, Encoder::MeanPool, &mut rng).unwrap()
    }

    #[test]
    fn first_step_moves_by_lr_times_sign() {
        let mut params = small_params();
        let before = params.clone();
        let mut grads = Gradients::zeros_like(&params);
        grads.embeddings[0] = 0.37;
        grads.embeddings[1] = -2.5;
        let mut state = AdamState::new(&params);
        let cfg = TrainConfig {
            learning_rate: 0.01,
            ..TrainConfig::default()
        };
        adam_step(&mut params, &grads, &mut state, &cfg).unwrap();
        assert_eq!(state.step, 1);
        // m_hat = g, v_hat = g^2 -> delta = -lr * g / (|g| + eps)
        assert_abs_diff_eq!(
            params.embeddings[0] - before.embeddings[0],
            -0.01,
            epsilon = 1e-6
        );
        assert_abs_diff_eq!(
            params.embeddings[1] - before.embeddings[1],
            0.01,
            epsilon = 1e-6
        );
    }

    #[test]
    fn zero_gradient_leaves_parameters_unchanged() {
        let mut params = small_params();
        let before = params.clone();
        let grads = Gradients::zeros_like(&params);
        let mut state = AdamState::new(&params);
        let cfg = TrainConfig::default();
        for _ in 0..3 {
            adam_step(&mut params, &grads, &mut state, &cfg).unwrap();
        }
        assert_eq!(params, before);
        assert_eq!(state.step, 3);
    }

    #[test]
    fn non_finite_gradients_abort_without_side_effects() {
        let mut params = small_params();
        let before = params.clone();
        let mut grads = Gradients::zeros_like(&params);
        grads.query[2] = f64::NAN;
        let mut state = AdamState::new(&params);
        let err = adam_step(&mut params, &grads, &mut state, &TrainConfig::default());
        match err {
            Err(Error::NonFiniteGradient {
                component, index, ..
            }) => {
                assert_eq!(component, "query");
                assert_eq!(index, 2);
            }
            other => panic!("expected non-finite gradient error, got {other:?}"),
        }
        assert_eq!(params, before);
        assert_eq!(state.step, 0);
    }

    #[test]
    fn descends_a_scalar_quadratic() {
        // Minimize f(x) = (x - 1)^2 using the head bias slot as the scalar.
        let mut params = small_params();
        params.head_b = [5.0, 0.0];
        let mut state = AdamState::new(&params);
        let cfg = TrainConfig {
            learning_rate: 0.1,
            ..TrainConfig::default()
        };
        let f = |x: f64| (x - 1.0) * (x - 1.0);
        let mut last = f(params.head_b[0]);
        for _ in 0..2 {
            let mut grads = Gradients::zeros_like(&params);
            grads.head_b[0] = 2.0 * (params.head_b[0] - 1.0);
            adam_step(&mut params, &grads, &mut state, &cfg).unwrap();
            let now = f(params.head_b[0]);
            assert!(now < last, "objective failed to decrease: {now} >= {last}");
            last = now;
        }
    }

    #[test]
    fn shape_mismatch_is_detected() {
        let mut params = small_params();
        let other = {
            let mut rng = ChaCha8Rng::seed_from_u64(4);
            ModelParams::init(6, 3, Encoder::MeanPool, &mut rng).unwrap()
        };
        let grads = Gradients::zeros_like(&other);
        let mut state = AdamState::new(&params);
        assert!(matches!(
            adam_step(&mut params, &grads, &mut state, &TrainConfig::default()),
            Err(Error::ShapeMismatch(_))
        ));
    }
}
