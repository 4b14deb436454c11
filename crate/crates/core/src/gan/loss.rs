use crate::error::{invalid, Result};

/// Scores are kept this far from 0 and 1 inside logarithms.
pub const SCORE_EPS: f64 = 1e-7;

fn check(scores: &[f64], what: &str) -> Result<()> {
    if scores.is_empty() {
        return Err(invalid(format!("{what}: empty minibatch")));
    }
    if let Some(s) = scores.iter().find(|s| !(0.0..=1.0).contains(*s)) {
        return Err(invalid(format!("{what}: score {s} is not a probability")));
    }
    Ok(())
}

pub fn clamp_score(s: f64) -> f64 {
    s.clamp(SCORE_EPS, 1.0 - SCORE_EPS)
}

/// Derivative of [`clamp_score`]: 1 inside the band, 0 where clamping bites.
fn clamp_slope(s: f64) -> f64 {
    if s > SCORE_EPS && s < 1.0 - SCORE_EPS {
        1.0
    } else {
        0.0
    }
}

/// `(1/m) Σ log(1 − D(G(z|y)))`, minimised by the generator.
pub fn loss_generator(fake_scores: &[f64]) -> Result<f64> {
    check(fake_scores, "generator loss")?;
    let m = fake_scores.len() as f64;
    Ok(fake_scores.iter().map(|&s| (1.0 - clamp_score(s)).ln()).sum::<f64>() / m)
}

/// `∂L_G/∂score_i`.
pub fn loss_generator_grad(fake_scores: &[f64]) -> Result<Vec<f64>> {
    check(fake_scores, "generator loss")?;
    let m = fake_scores.len() as f64;
    Ok(fake_scores
        .iter()
        .map(|&s| -clamp_slope(s) / ((1.0 - clamp_score(s)) * m))
        .collect())
}

/// `(1/m) Σ [−log D(x|y) − log(1 − D(G(z|y)))]`.
pub fn loss_discriminator(real_scores: &[f64], fake_scores: &[f64]) -> Result<f64> {
    check(real_scores, "discriminator loss")?;
    check(fake_scores, "discriminator loss")?;
    if real_scores.len() != fake_scores.len() {
        return Err(invalid("discriminator loss needs as many real as fake scores"));
    }
    let m = real_scores.len() as f64;
    Ok(real_scores
        .iter()
        .zip(fake_scores)
        .map(|(&r, &f)| -clamp_score(r).ln() - (1.0 - clamp_score(f)).ln())
        .sum::<f64>()
        / m)
}

/// `(∂L_D/∂real_i, ∂L_D/∂fake_i)`.
pub fn loss_discriminator_grad(real_scores: &[f64], fake_scores: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    loss_discriminator(real_scores, fake_scores)?;
    let m = real_scores.len() as f64;
    let d_real = real_scores.iter().map(|&r| -clamp_slope(r) / (clamp_score(r) * m)).collect();
    let d_fake = fake_scores
        .iter()
        .map(|&f| clamp_slope(f) / ((1.0 - clamp_score(f)) * m))
        .collect();
    Ok((d_real, d_fake))
}
