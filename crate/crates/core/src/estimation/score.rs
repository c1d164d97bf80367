//! Confidence fusion, posterior score updates and the fusion-weight
//! variance analysis.

use crate::config::ScoreStrategy;
use crate::scalar::{real, Real};

/// Convex combination of the two modality scores: `alpha * s3d + (1 - alpha) * s2d`.
pub fn fuse_scores<S: Real>(s3d: S, s2d: S, alpha: S) -> S {
    alpha * s3d + (S::one() - alpha) * s2d
}

/// Noisy-OR combination: `1 - (1 - a)(1 - b)`.
pub fn noisy_or<S: Real>(a: S, b: S) -> S {
    S::one() - (S::one() - a) * (S::one() - b)
}

/// Posterior score at multi-modal frames: Noisy-OR of the decayed prior and
/// the fused observation score.
pub fn update_score_sync<S: Real>(prior: S, s_fused: S) -> S {
    noisy_or(prior, s_fused)
}

/// Posterior score at camera-only frames: the single-modality observation is
/// attenuated by `beta` before the Noisy-OR.
pub fn update_score_async<S: Real>(prior: S, s_single: S, beta: S) -> S {
    noisy_or(prior, beta * s_single)
}

/// One interface over the compared posterior-score rules. `eff_obs` is the
/// effective observation score (fused for multi-modal, attenuated for
/// single-modality observations).
pub fn strategy_update<S: Real>(strategy: ScoreStrategy, prior: S, eff_obs: S, ema_weight: S) -> S {
    match strategy {
        ScoreStrategy::NoisyOr => noisy_or(prior, eff_obs),
        ScoreStrategy::Max => prior.max(eff_obs),
        ScoreStrategy::Ema => (S::one() - ema_weight) * prior + ema_weight * eff_obs,
        ScoreStrategy::Average => (prior + eff_obs) * real(0.5),
    }
}

/// The fusion weight minimizing the fused-score variance:
/// `alpha* = var2d / (var3d + var2d)`.
pub fn optimal_alpha<S: Real>(var3d: S, var2d: S) -> S {
    var2d / (var3d + var2d)
}

/// Variance of the fused score for uncorrelated modality noise:
/// `alpha^2 var3d + (1 - alpha)^2 var2d`.
pub fn fused_variance<S: Real>(alpha: S, var3d: S, var2d: S) -> S {
    alpha * alpha * var3d + (S::one() - alpha) * (S::one() - alpha) * var2d
}

/// Variance of the posterior score after a Noisy-OR update with a fixed
/// prior: the update is affine in the observation, scaling the input
/// variance by `(1 - prior)^2`.
pub fn updated_score_variance<S: Real>(prior: S, input_variance: S) -> S {
    let k = S::one() - prior;
    k * k * input_variance
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn fusion_arithmetic_matches_hand_values() {
        assert_relative_eq!(fuse_scores(0.8, 0.6, 0.5), 0.7);
        assert_relative_eq!(fuse_scores(0.8, 0.6, 1.0), 0.8);
        assert_relative_eq!(fuse_scores(1.0, 0.5, 0.4), 0.7);
    }

    #[test]
    fn sync_update_matches_hand_values() {
        assert_relative_eq!(update_score_sync(0.5, 0.5), 0.75);
        assert_relative_eq!(update_score_sync(0.3, 0.0), 0.3);
        assert_relative_eq!(update_score_sync(0.0, 0.4), 0.4);
        assert_relative_eq!(update_score_sync(0.56, 0.7), 1.0 - 0.44 * 0.3, epsilon = 1e-12);
    }

    #[test]
    fn async_update_matches_hand_values() {
        assert_relative_eq!(update_score_async(0.5, 0.9, 0.0), 0.5);
        assert_relative_eq!(update_score_async(0.5, 1.0, 0.5), 0.75);
        assert_relative_eq!(update_score_async(0.0, 0.8, 0.5), 0.4);
    }

    #[test]
    fn optimal_alpha_and_minimum_variance_match_closed_form() {
        assert_relative_eq!(optimal_alpha(1.0, 1.0), 0.5);
        assert_relative_eq!(fused_variance(0.5, 1.0, 1.0), 0.5);

        let a = optimal_alpha(1.0, 3.0);
        assert_relative_eq!(a, 0.75);
        let v = fused_variance(a, 1.0, 3.0);
        assert_relative_eq!(v, 0.75);
        assert!(v < 1.0f64.min(3.0));
        // Minimum value equals the harmonic form.
        assert_relative_eq!(v, 1.0 * 3.0 / (1.0 + 3.0));

        // A degenerate modality is ignored in the limit.
        assert!(optimal_alpha(1.0, 1e12) > 0.999_999);
    }

    #[test]
    fn fused_variance_endpoints() {
        assert_relative_eq!(fused_variance(0.0, 2.0, 3.0), 3.0);
        assert_relative_eq!(fused_variance(1.0, 2.0, 3.0), 2.0);
        assert_relative_eq!(fused_variance(0.75, 1.0, 3.0), 0.5625 + 0.1875);
    }

    #[test]
    fn strategies_behave_as_named() {
        let (p, o) = (0.5, 0.8);
        assert_relative_eq!(strategy_update(ScoreStrategy::NoisyOr, p, o, 0.5), 0.9);
        assert_relative_eq!(strategy_update(ScoreStrategy::Max, p, o, 0.5), 0.8);
        assert_relative_eq!(strategy_update(ScoreStrategy::Average, p, o, 0.5), 0.65);
        assert_relative_eq!(strategy_update(ScoreStrategy::Ema, p, o, 0.25), 0.575);
    }

    proptest! {
        #[test]
        fn noisy_or_bounds_and_monotonicity(
            prior in 0.0..=1.0f64,
            s3d in 0.0..=1.0f64,
            s2d in 0.0..=1.0f64,
            single in 0.0..=1.0f64,
            alpha in 0.0..=1.0f64,
            beta in 0.0..=1.0f64,
            bump in 0.0..=0.5f64,
        ) {
            let fused = fuse_scores(s3d, s2d, alpha);
            prop_assert!((0.0..=1.0).contains(&fused));

            let sync = update_score_sync(prior, fused);
            prop_assert!((0.0..=1.0).contains(&sync));
            prop_assert!(sync >= prior.max(fused) - 1e-12);

            let async_out = update_score_async(prior, single, beta);
            prop_assert!((0.0..=1.0).contains(&async_out));
            prop_assert!(async_out >= prior.max(beta * single) - 1e-12);

            // Monotone in both arguments.
            let prior_up = (prior + bump).min(1.0);
            let obs_up = (fused + bump).min(1.0);
            prop_assert!(update_score_sync(prior_up, fused) >= sync - 1e-12);
            prop_assert!(update_score_sync(prior, obs_up) >= sync - 1e-12);
        }

        #[test]
        fn optimal_alpha_minimizes_on_grid(
            var3d in 0.01..5.0f64,
            var2d in 0.01..5.0f64,
        ) {
            let best = optimal_alpha(var3d, var2d);
            let v_best = fused_variance(best, var3d, var2d);
            for i in 0..=100 {
                let a = i as f64 / 100.0;
                prop_assert!(v_best <= fused_variance(a, var3d, var2d) + 1e-12);
            }
            prop_assert!(v_best < var3d.min(var2d));
        }
    }
}
