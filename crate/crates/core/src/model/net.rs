//! Network math: forward pass, cross-entropy loss, analytic gradients.
//!
//! Shapes (row-major everywhere):
//!
//! - embeddings `E`: `|V| x d`
//! - attention query `q`: `d` (used only by the self-attention encoder)
//! - head `W`: `2 x d`, bias `b`: `2`
//!
//! For a sequence with token embeddings `e_1..e_T` the sentence vector is
//! either the mean or `sum_t softmax(q . e_t / sqrt(d))_t e_t`; logits are
//! `z = W h + b` and the loss is the batch mean of `-log softmax(z)_y`.
//!
//! The backward pass is derived by hand (and verified against central
//! finite differences): with `dz = p - onehot(y)` per sequence,
//!
//! - `dW = dz (x) h`, `db = dz`, `g := dh = W^T dz`
//! - mean pooling: `de_t = g / T`
//! - attention, with `gamma_t = g . e_t` and `gamma_bar = g . h`:
//!   `de_t = a_t g + a_t (gamma_t - gamma_bar) / sqrt(d) * q` and
//!   `dq = sum_t a_t (gamma_t - gamma_bar) e_t / sqrt(d)`

// Indexed loops keep the kernels aligned with the subscripts above.
#![allow(clippy::needless_range_loop)]

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Encoder, LabeledSequence, PAD};
use crate::error::{Error, Result};

/// All trainable tensors plus the shape/encoder metadata needed to run
/// them. Self-describing so a checkpoint can be used without its config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub encoder: Encoder,
    pub embed_dim: usize,
    pub embeddings: Vec<f64>,
    pub query: Vec<f64>,
    pub head_w: Vec<f64>,
    pub head_b: [f64; 2],
}

impl ModelParams {
    /// Fresh parameters: embeddings uniform in [-0.05, 0.05) from the given
    /// generator, everything else zero. The zero head makes the initial
    /// loss exactly ln 2 and the zero query makes initial attention
    /// uniform.
    pub fn init<R: Rng>(
        vocab_size: usize,
        embed_dim: usize,
        encoder: Encoder,
        rng: &mut R,
    ) -> Result<ModelParams> {
        if vocab_size < 2 {
            return Err(Error::InvalidConfig(format!(
                "vocabulary must include the two special tokens, got size {vocab_size}"
            )));
        }
        if embed_dim == 0 {
            return Err(Error::InvalidConfig("embed_dim must be at least 1".into()));
        }
        let embeddings = (0..vocab_size * embed_dim)
            .map(|_| rng.random_range(-0.05..0.05))
            .collect();
        Ok(ModelParams {
            encoder,
            embed_dim,
            embeddings,
            query: vec![0.0; embed_dim],
            head_w: vec![0.0; 2 * embed_dim],
            head_b: [0.0; 2],
        })
    }

    pub fn vocab_size(&self) -> usize {
        self.embeddings.len() / self.embed_dim
    }

    fn embedding(&self, token: usize) -> &[f64] {
        let d = self.embed_dim;
        &self.embeddings[token * d..(token + 1) * d]
    }

    pub fn all_finite(&self) -> bool {
        self.embeddings.iter().all(|v| v.is_finite())
            && self.query.iter().all(|v| v.is_finite())
            && self.head_w.iter().all(|v| v.is_finite())
            && self.head_b.iter().all(|v| v.is_finite())
    }

    fn check_tokens(&self, tokens: &[usize]) -> Result<()> {
        let v = self.vocab_size();
        if let Some(&bad) = tokens.iter().find(|&&t| t >= v) {
            return Err(Error::ShapeMismatch(format!(
                "token index {bad} out of range for vocabulary of {v}"
            )));
        }
        Ok(())
    }
}

/// Gradient (or moment) tensors shaped like [`ModelParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub embeddings: Vec<f64>,
    pub query: Vec<f64>,
    pub head_w: Vec<f64>,
    pub head_b: [f64; 2],
}

impl Gradients {
    pub fn zeros_like(params: &ModelParams) -> Gradients {
        Gradients {
            embeddings: vec![0.0; params.embeddings.len()],
            query: vec![0.0; params.query.len()],
            head_w: vec![0.0; params.head_w.len()],
            head_b: [0.0; 2],
        }
    }
}

/// Per-sequence forward state kept for the backward pass.
struct Hidden {
    h: Vec<f64>,
    /// Attention weights, one per token (self-attention only).
    attn: Option<Vec<f64>>,
}

fn pool<'a>(tokens: &'a [usize], params: &ModelParams) -> (Hidden, &'a [usize]) {
    static PAD_ONLY: [usize; 1] = [PAD];
    let tokens: &[usize] = if tokens.is_empty() { &PAD_ONLY } else { tokens };
    let d = params.embed_dim;
    let t_count = tokens.len() as f64;
    match params.encoder {
        Encoder::MeanPool => {
            let mut h = vec![0.0; d];
            for &t in tokens {
                for (j, hj) in h.iter_mut().enumerate() {
                    *hj += params.embedding(t)[j];
                }
            }
            for hj in &mut h {
                *hj /= t_count;
            }
            (Hidden { h, attn: None }, tokens)
        }
        Encoder::SelfAttention => {
            let scale = 1.0 / (d as f64).sqrt();
            let scores: Vec<f64> = tokens
                .iter()
                .map(|&t| {
                    params
                        .embedding(t)
                        .iter()
                        .zip(&params.query)
                        .map(|(e, q)| e * q)
                        .sum::<f64>()
                        * scale
                })
                .collect();
            let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let exps: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
            let total: f64 = exps.iter().sum();
            let attn: Vec<f64> = exps.iter().map(|e| e / total).collect();
            let mut h = vec![0.0; d];
            for (&t, &a) in tokens.iter().zip(&attn) {
                for (j, hj) in h.iter_mut().enumerate() {
                    *hj += a * params.embedding(t)[j];
                }
            }
            (
                Hidden {
                    h,
                    attn: Some(attn),
                },
                tokens,
            )
        }
    }
}

fn logits(h: &[f64], params: &ModelParams) -> [f64; 2] {
    let d = params.embed_dim;
    let mut z = params.head_b;
    for k in 0..2 {
        for j in 0..d {
            z[k] += params.head_w[k * d + j] * h[j];
        }
    }
    z
}

/// Numerically stable log(exp(z0) + exp(z1)).
fn log_sum_exp(z: [f64; 2]) -> f64 {
    let m = z[0].max(z[1]);
    m + ((z[0] - m).exp() + (z[1] - m).exp()).ln()
}

fn softmax(z: [f64; 2]) -> [f64; 2] {
    let m = z[0].max(z[1]);
    let e = [(z[0] - m).exp(), (z[1] - m).exp()];
    let total = e[0] + e[1];
    [e[0] / total, e[1] / total]
}

/// Class probabilities (p_neutral, p_biased) for one token sequence. Empty
/// sequences are scored as a lone PAD token.
pub fn forward(tokens: &[usize], params: &ModelParams) -> Result<[f64; 2]> {
    params.check_tokens(tokens)?;
    let (hidden, _) = pool(tokens, params);
    Ok(softmax(logits(&hidden.h, params)))
}

/// Mean cross-entropy over the batch: (1/N) sum_i -log p(y_i).
pub fn loss(batch: &[LabeledSequence], params: &ModelParams) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::EmptyInput("loss batch"));
    }
    let mut total = 0.0;
    for seq in batch {
        params.check_tokens(&seq.tokens)?;
        let (hidden, _) = pool(&seq.tokens, params);
        let z = logits(&hidden.h, params);
        total += log_sum_exp(z) - z[seq.class()];
    }
    Ok(total / batch.len() as f64)
}

/// Loss and its exact gradients over the batch.
pub fn gradients(batch: &[LabeledSequence], params: &ModelParams) -> Result<(f64, Gradients)> {
    if batch.is_empty() {
        return Err(Error::EmptyInput("gradient batch"));
    }
    let d = params.embed_dim;
    let inv_n = 1.0 / batch.len() as f64;
    let mut grads = Gradients::zeros_like(params);
    let mut total_loss = 0.0;

    for seq in batch {
        params.check_tokens(&seq.tokens)?;
        let (hidden, tokens) = pool(&seq.tokens, params);
        let z = logits(&hidden.h, params);
        total_loss += log_sum_exp(z) - z[seq.class()];
        let p = softmax(z);

        // dL/dz, already scaled by the batch mean.
        let mut dz = [p[0] * inv_n, p[1] * inv_n];
        dz[seq.class()] -= inv_n;

        // Head: dW = dz (x) h, db = dz; backprop g = W^T dz.
        let mut g = vec![0.0; d];
        for k in 0..2 {
            grads.head_b[k] += dz[k];
            for j in 0..d {
                grads.head_w[k * d + j] += dz[k] * hidden.h[j];
                g[j] += params.head_w[k * d + j] * dz[k];
            }
        }

        match &hidden.attn {
            None => {
                let scale = 1.0 / tokens.len() as f64;
                for &t in tokens {
                    for j in 0..d {
                        grads.embeddings[t * d + j] += g[j] * scale;
                    }
                }
            }
            Some(attn) => {
                let scale = 1.0 / (d as f64).sqrt();
                // gamma_t = g . e_t; gamma_bar = g . h
                let gammas: Vec<f64> = tokens
                    .iter()
                    .map(|&t| {
                        params
                            .embedding(t)
                            .iter()
                            .zip(&g)
                            .map(|(e, gj)| e * gj)
                            .sum()
                    })
                    .collect();
                let gamma_bar: f64 = hidden.h.iter().zip(&g).map(|(h, gj)| h * gj).sum();
                for ((&t, &a), &gamma) in tokens.iter().zip(attn).zip(&gammas) {
                    let coeff = a * (gamma - gamma_bar) * scale;
                    for j in 0..d {
                        grads.embeddings[t * d + j] += a * g[j] + coeff * params.query[j];
                        grads.query[j] += coeff * params.embedding(t)[j];
                    }
                }
            }
        }
    }

    Ok((total_loss * inv_n, grads))
}

/// Largest relative disagreement between analytic gradients and central
/// finite differences of the loss, over every parameter component.
///
/// Components where both sides are below 1e-5 in magnitude count as exact:
/// at that scale the difference quotient is dominated by floating-point
/// noise, not by the derivative.
pub fn max_relative_gradient_error(
    batch: &[LabeledSequence],
    params: &ModelParams,
    step: f64,
) -> Result<f64> {
    let (_, analytic) = gradients(batch, params)?;
    let mut probe = params.clone();
    let mut worst = 0.0f64;

    let rel = |a: f64, n: f64| -> f64 {
        if a.abs() < 1e-5 && n.abs() < 1e-5 {
            0.0
        } else {
            (a - n).abs() / a.abs().max(n.abs())
        }
    };

    macro_rules! sweep {
        ($field:ident) => {
            for i in 0..probe.$field.len() {
                let original = probe.$field[i];
                probe.$field[i] = original + step;
                let up = loss(batch, &probe)?;
                probe.$field[i] = original - step;
                let down = loss(batch, &probe)?;
                probe.$field[i] = original;
                let numeric = (up - down) / (2.0 * step);
                worst = worst.max(rel(analytic.$field[i], numeric));
            }
        };
    }
    sweep!(embeddings);
    sweep!(query);
    sweep!(head_w);
    sweep!(head_b);
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn zero_params(vocab: usize, d: usize, encoder: Encoder) -> ModelParams {
        ModelParams {
            encoder,
            embed_dim: d,
            embeddings: vec![0.0; vocab * d],
            query: vec![0.0; d],
            head_w: vec![0.0; 2 * d],
            head_b: [0.0; 2],
        }
    }

    #[test]
    fn zero_parameters_give_even_odds_and_ln2_loss() {
        for encoder in [Encoder::MeanPool, Encoder::SelfAttention] {
            let p = zero_params(6, 4, encoder);
            let probs = forward(&[2, 3, 4], &p).unwrap();
            assert_eq!(probs, [0.5, 0.5]);
            let batch = vec![
                LabeledSequence {
                    tokens: vec![2, 3],
                    biased: true,
                },
                LabeledSequence {
                    tokens: vec![4],
                    biased: false,
                },
            ];
            let l = loss(&batch, &p).unwrap();
            assert_abs_diff_eq!(l, std::f64::consts::LN_2, epsilon = 1e-12);
        }
    }

    #[test]
    fn single_token_mean_pool_uses_that_embedding() {
        let mut p = zero_params(4, 2, Encoder::MeanPool);
        p.embeddings[2 * 2] = 0.7;
        p.embeddings[2 * 2 + 1] = -0.3;
        p.head_w = vec![1.0, 0.0, 0.0, 1.0];
        let probs = forward(&[2], &p).unwrap();
        // z = (0.7, -0.3); p1 = 1 / (1 + exp(z0 - z1))
        let expected = 1.0 / (1.0 + (0.7f64 - -0.3).exp());
        assert_abs_diff_eq!(probs[1], expected, epsilon = 1e-15);
        assert_abs_diff_eq!(probs[0] + probs[1], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn two_token_fixture_matches_hand_arithmetic() {
        let mut p = zero_params(4, 2, Encoder::MeanPool);
        // e_2 = (0.1, 0.2), e_3 = (0.3, -0.4)
        p.embeddings[4] = 0.1;
        p.embeddings[5] = 0.2;
        p.embeddings[6] = 0.3;
        p.embeddings[7] = -0.4;
        // W = [[1, 2], [-1, 0.5]], b = (0.05, -0.05)
        p.head_w = vec![1.0, 2.0, -1.0, 0.5];
        p.head_b = [0.05, -0.05];
        let probs = forward(&[2, 3], &p).unwrap();
        // h = (0.2, -0.1); z0 = 0.05 + 0.2 - 0.2 = 0.05
        //                  z1 = -0.05 - 0.2 - 0.05 = -0.3
        let (z0, z1) = (0.05f64, -0.3f64);
        let p1 = 1.0 / (1.0 + (z0 - z1).exp());
        assert_abs_diff_eq!(probs[1], p1, epsilon = 1e-14);
        assert_abs_diff_eq!(probs[0], 1.0 - p1, epsilon = 1e-14);
    }

    #[test]
    fn uniform_attention_with_zero_query_equals_mean_pool() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut mean = ModelParams::init(8, 4, Encoder::MeanPool, &mut rng).unwrap();
        mean.head_w.iter_mut().enumerate().for_each(|(i, w)| {
            *w = 0.1 * (i as f64 + 1.0);
        });
        let mut attn = mean.clone();
        attn.encoder = Encoder::SelfAttention;
        let tokens = [2, 5, 7, 2];
        let a = forward(&tokens, &mean).unwrap();
        let b = forward(&tokens, &attn).unwrap();
        assert_abs_diff_eq!(a[0], b[0], epsilon = 1e-15);
        assert_abs_diff_eq!(a[1], b[1], epsilon = 1e-15);
    }

    #[test]
    fn empty_sequences_score_like_a_lone_pad() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let p = ModelParams::init(8, 4, Encoder::MeanPool, &mut rng).unwrap();
        assert_eq!(forward(&[], &p).unwrap(), forward(&[PAD], &p).unwrap());
    }

    #[test]
    fn out_of_range_tokens_are_rejected() {
        let p = zero_params(4, 2, Encoder::MeanPool);
        assert!(matches!(forward(&[9], &p), Err(Error::ShapeMismatch(_))));
        assert!(loss(&[], &p).is_err());
    }

    #[test]
    fn closed_form_batch_loss() {
        // Single-token sequences with a diagonal head reduce to logistic
        // arithmetic that can be checked in closed form.
        let mut p = zero_params(4, 2, Encoder::MeanPool);
        p.embeddings[4] = 2.0; // e_2 = (2, 0)
        p.embeddings[7] = 1.0; // e_3 = (0, 1)
        p.head_w = vec![1.0, 0.0, 0.0, 1.0];
        let batch = vec![
            LabeledSequence {
                tokens: vec![2],
                biased: false,
            },
            LabeledSequence {
                tokens: vec![3],
                biased: true,
            },
        ];
        // seq 1: z = (2, 0), p_true = e^2 / (e^2 + 1)
        // seq 2: z = (0, 1), p_true = e / (1 + e)
        let p1 = (2.0f64).exp() / ((2.0f64).exp() + 1.0);
        let p2 = 1.0f64.exp() / (1.0 + 1.0f64.exp());
        let expected = -(p1.ln() + p2.ln()) / 2.0;
        assert_abs_diff_eq!(loss(&batch, &p).unwrap(), expected, epsilon = 1e-14);
    }

    #[test]
    fn symmetric_batch_sits_at_a_stationary_point() {
        for encoder in [Encoder::MeanPool, Encoder::SelfAttention] {
            let p = zero_params(5, 3, encoder);
            let batch = vec![
                LabeledSequence {
                    tokens: vec![2, 4],
                    biased: false,
                },
                LabeledSequence {
                    tokens: vec![2, 4],
                    biased: true,
                },
            ];
            let (l, g) = gradients(&batch, &p).unwrap();
            assert_abs_diff_eq!(l, std::f64::consts::LN_2, epsilon = 1e-12);
            assert!(g.embeddings.iter().all(|&v| v == 0.0));
            assert!(g.query.iter().all(|&v| v == 0.0));
            assert!(g.head_w.iter().all(|&v| v == 0.0));
            assert_eq!(g.head_b, [0.0, 0.0]);
        }
    }

    #[test]
    fn absent_tokens_get_zero_embedding_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut p = ModelParams::init(10, 3, Encoder::SelfAttention, &mut rng).unwrap();
        for (i, w) in p.head_w.iter_mut().enumerate() {
            *w = 0.2 * (i as f64 - 2.0);
        }
        let batch = vec![LabeledSequence {
            tokens: vec![2, 3, 2],
            biased: true,
        }];
        let (_, g) = gradients(&batch, &p).unwrap();
        let d = p.embed_dim;
        for token in [0usize, 1, 4, 5, 6, 7, 8, 9] {
            for j in 0..d {
                assert_eq!(g.embeddings[token * d + j], 0.0, "token {token} dim {j}");
            }
        }
        // present tokens do move
        assert!((0..d).any(|j| g.embeddings[2 * d + j] != 0.0));
        assert!((0..d).any(|j| g.embeddings[3 * d + j] != 0.0));
    }

    #[test]
    fn analytic_gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for encoder in [Encoder::MeanPool, Encoder::SelfAttention] {
            let mut p = ModelParams::init(20, 4, encoder, &mut rng).unwrap();
            for v in p.query.iter_mut() {
                *v = rng.random_range(-0.5..0.5);
            }
            for v in p.head_w.iter_mut() {
                *v = rng.random_range(-0.5..0.5);
            }
            p.head_b = [rng.random_range(-0.2..0.2), rng.random_range(-0.2..0.2)];
            let batch: Vec<LabeledSequence> = (0..6)
                .map(|i| LabeledSequence {
                    tokens: (0..4).map(|_| rng.random_range(0..20)).collect(),
                    biased: i % 2 == 0,
                })
                .collect();
            let err = max_relative_gradient_error(&batch, &p, 1e-5).unwrap();
            assert!(err < 1e-4, "{encoder:?}: relative error {err}");
        }
    }
}
