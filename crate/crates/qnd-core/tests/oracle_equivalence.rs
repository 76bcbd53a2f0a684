//! Cross-module ground-truth checks: the truncated-Fock-space oracle against
//! the closed-form moments, the measurement kernel against the brute-force
//! homodyne density, and the Bayesian posterior against the conditional
//! joint state.

use num_complex::Complex64;
use qnd_core::analytic::{
    exact_number_error, exact_quadrature_moments, InteractionParams, ProbePrep,
};
use qnd_core::bayes::{
    kraus_amplitude, kraus_density, posterior, poisson_prior, KrausParams, PhotonDistribution,
};
use qnd_core::fock::{
    homodyne_density, joint_conditional_state, kerr_phase_evolve, oracle_moments, FockVector,
    JointState,
};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn evolved_probe(alpha: f64, gamma_s: f64, gamma_x: f64, n_s: f64) -> FockVector {
    kerr_phase_evolve(&FockVector::coherent_auto(alpha).unwrap(), gamma_s, gamma_x, n_s)
}

#[test]
fn oracle_moments_match_closed_forms_over_grid() {
    let mut worst = 0.0f64;
    for alpha in [1.0, 2.0, 3.0] {
        for gamma_s in [0.01, 0.05] {
            let gamma_x = 2.0 * gamma_s;
            for n_s in [0.0, 1.0, 5.0] {
                for zeta in [0.0, std::f64::consts::FRAC_PI_4, std::f64::consts::FRAC_PI_2] {
                    let probe = ProbePrep::from_alpha(alpha).unwrap();
                    let params = InteractionParams::from_factors(gamma_s, gamma_x).unwrap();
                    let m = exact_quadrature_moments(&probe, &params, zeta, n_s);
                    let vec = evolved_probe(alpha, gamma_s, gamma_x, n_s);
                    let (mean_x, mean_x2) = oracle_moments(&vec, zeta);
                    worst = worst.max(rel(mean_x, m.mean_x));
                    worst = worst.max(rel(mean_x2, m.mean_x_sqr()));
                }
            }
        }
    }
    assert!(worst < 1e-8, "worst relative deviation {worst:e}");
}

#[test]
fn oracle_moments_match_at_spec_point() {
    let probe = ProbePrep::from_alpha(3.0).unwrap();
    let params = InteractionParams::from_factors(0.02, 0.04).unwrap();
    let m = exact_quadrature_moments(&probe, &params, 0.0, 3.0);
    let vec = evolved_probe(3.0, 0.02, 0.04, 3.0);
    let (mean_x, mean_x2) = oracle_moments(&vec, 0.0);
    assert!(rel(mean_x, m.mean_x) < 1e-8);
    let var = mean_x2 - mean_x * mean_x;
    assert!(rel(var, m.var_x) < 1e-8);
}

#[test]
fn number_error_matches_oracle_finite_difference() {
    // (Δn)² against oracle variance over a centered difference of the mean
    let alpha = 3.0;
    let (gamma_s, gamma_x) = (0.02, 0.04);
    let n_s = 3.0;
    let zeta = 1.2708083265548989; // cot(phi) = 0 at n_s = 3
    let probe = ProbePrep::from_alpha(alpha).unwrap();
    let params = InteractionParams::from_factors(gamma_s, gamma_x).unwrap();
    let m = exact_quadrature_moments(&probe, &params, zeta, n_s);
    let closed = exact_number_error(&m, &probe, &params).unwrap();

    let h = 1e-3;
    let mean_at = |n: f64| oracle_moments(&evolved_probe(alpha, gamma_s, gamma_x, n), zeta).0;
    let g = (mean_at(n_s + h) - mean_at(n_s - h)) / (2.0 * h);
    let (mean_x, mean_x2) = oracle_moments(&evolved_probe(alpha, gamma_s, gamma_x, n_s), zeta);
    let var = mean_x2 - mean_x * mean_x;
    let oracle = var / (g * g);
    assert!(rel(closed, oracle) < 1e-8, "closed {closed} vs oracle {oracle}");
}

#[test]
fn kernel_density_tracks_oracle_density() {
    // |Ω(X, n)|² and the Gaussian density against the brute-force homodyne
    // density of the evolved probe; the gap is the leading SPM correction
    // and shrinks as alpha grows at fixed Gamma_S alpha².
    let mut previous_sup = f64::INFINITY;
    for alpha in [3.0, 5.0] {
        let gamma_s = 0.1 / (alpha * alpha);
        let gamma_x = 2.0 * gamma_s;
        let zeta = std::f64::consts::FRAC_PI_2;
        let kp = KrausParams { alpha, gamma_s, gamma_x, zeta };
        let span = std::f64::consts::SQRT_2 * alpha + 12.0;
        let steps = 4000usize;
        let mut sup_kernel = 0.0f64;
        let mut sup_gauss = 0.0f64;
        for n in [0usize, 3, 10] {
            let vec = evolved_probe(alpha, gamma_s, gamma_x, n as f64);
            for i in 0..=steps {
                let x = -span + 2.0 * span * i as f64 / steps as f64;
                let oracle = homodyne_density(&vec, x, zeta);
                let kernel = kraus_amplitude(x, n, &kp).unwrap().norm_sqr();
                let gauss = kraus_density(x, n, &kp);
                sup_kernel = sup_kernel.max((kernel - oracle).abs());
                sup_gauss = sup_gauss.max((gauss - oracle).abs());
            }
        }
        assert!(sup_kernel <= 2e-2, "alpha={alpha}: kernel sup gap {sup_kernel}");
        assert!(sup_gauss <= 2e-2, "alpha={alpha}: gaussian sup gap {sup_gauss}");
        assert!(sup_kernel < previous_sup, "gap must shrink with alpha");
        previous_sup = sup_kernel;
    }
}

#[test]
fn kernel_density_tracks_oracle_at_spec_point() {
    let alpha = 3.0;
    let (gamma_s, gamma_x) = (0.02, 0.04);
    let n = 3usize;
    let zeta = 0.0;
    let kp = KrausParams { alpha, gamma_s, gamma_x, zeta };
    let vec = evolved_probe(alpha, gamma_s, gamma_x, n as f64);
    let span = std::f64::consts::SQRT_2 * alpha + 12.0;
    let steps = 4000usize;
    let mut sup = 0.0f64;
    for i in 0..=steps {
        let x = -span + 2.0 * span * i as f64 / steps as f64;
        let kernel = kraus_amplitude(x, n, &kp).unwrap().norm_sqr();
        sup = sup.max((kernel - homodyne_density(&vec, x, zeta)).abs());
    }
    assert!(sup <= 2e-2, "sup gap {sup}");
}

#[test]
fn posterior_matches_joint_state_pmf() {
    // total-variation distance between the Gaussian-likelihood posterior and
    // the photon pmf of the conditioned joint state, tightening with alpha
    let signal = FockVector::coherent_auto(2.0).unwrap(); // n_bar_s = 4
    let prior_weights = signal.number_pmf();
    let prior =
        PhotonDistribution::from_weights(0, prior_weights, 0.0).unwrap();

    let mut previous_worst = f64::INFINITY;
    for alpha in [3.0, 5.0] {
        let gamma_s = 0.2 / (alpha * alpha);
        let gamma_x = 2.0 * gamma_s;
        let zeta = std::f64::consts::FRAC_PI_2;
        let params = InteractionParams::from_factors(gamma_s, gamma_x).unwrap();
        let kp = KrausParams { alpha, gamma_s, gamma_x, zeta };
        let center = kp.outcome_mean(4.0);
        let mut worst = 0.0f64;
        for dx in [-1.0, 0.0, 1.0] {
            let x = center + dx;
            let (post_oracle, _) =
                joint_conditional_state(&signal, alpha, &params, zeta, x).unwrap();
            let pmf_oracle = post_oracle.number_pmf();
            let (post_bayes, _) = posterior(x, &prior, &kp).unwrap();
            let tv: f64 = pmf_oracle
                .iter()
                .zip(post_bayes.pmf())
                .map(|(a, b)| (a - b).abs())
                .sum::<f64>()
                / 2.0;
            worst = worst.max(tv);
        }
        assert!(worst <= 2e-2, "alpha={alpha}: TV {worst}");
        assert!(worst < previous_worst, "TV must tighten with alpha");
        previous_worst = worst;
    }
}

#[test]
fn marginal_sums_branch_densities() {
    let signal = FockVector::coherent_auto(1.5).unwrap();
    let params = InteractionParams::from_factors(0.02, 0.04).unwrap();
    let joint = JointState::new(&signal, 2.0, &params).unwrap();
    let zeta = 0.3;
    for &x in &[-2.0, 0.5, 2.5] {
        let by_branches: f64 = (0..signal.dim())
            .map(|n| {
                signal.amplitudes()[n].norm_sqr()
                    * homodyne_density(joint.branch(n), x, zeta)
            })
            .sum();
        let w = joint.marginal_density(zeta, x);
        assert!((by_branches - w).abs() < 1e-10 * w.max(1.0));
        let (_, d) = joint.condition_on(zeta, x).unwrap();
        assert!((d - w).abs() < 1e-10 * w.max(1.0));
    }
}

#[test]
fn asymptotic_moments_converge_with_alpha() {
    // doubling alpha at fixed Gamma_S alpha² and Gamma_X n_s: the exact
    // moments approach the weak-nonlinearity forms monotonically
    let mut prev = [f64::INFINITY; 3];
    for alpha in [2.0, 4.0, 8.0, 16.0, 32.0] {
        let a2 = alpha * alpha;
        let gamma_s = 0.1 / a2;
        let gamma_x = 2.0 * gamma_s;
        let n_s = 0.05 / gamma_x;
        let zeta = 0.7;
        let probe = ProbePrep::from_alpha(alpha).unwrap();
        let params = InteractionParams::from_factors(gamma_s, gamma_x).unwrap();
        let m = exact_quadrature_moments(&probe, &params, zeta, n_s);

        let phi = gamma_s * a2 + gamma_x * n_s + zeta;
        let mean_a = std::f64::consts::SQRT_2 * alpha * phi.cos();
        let g = gamma_s * a2;
        let var_a = 0.5 - g * (2.0 * phi).sin() + 2.0 * g * g * phi.sin().powi(2);
        let transfer_a = -std::f64::consts::SQRT_2 * alpha * gamma_x * phi.sin();

        let gaps = [
            rel(m.mean_x, mean_a),
            rel(m.var_x, var_a),
            rel(m.transfer, transfer_a),
        ];
        for (i, (gap, p)) in gaps.iter().zip(&prev).enumerate() {
            assert!(gap < p, "alpha={alpha}: gap[{i}]={gap:e} did not shrink from {p:e}");
        }
        prev = gaps;
    }
    // converged to better than 1e-5 at alpha = 32
    assert!(prev.iter().all(|g| *g < 1e-5));
}

#[test]
fn variance_coefficients_reach_weak_nonlinearity_limits() {
    // A → 1/2 + α⁴Γ_S², B → −α⁴Γ_S², C → α²Γ_S and A + B → 1/2, with every
    // relative gap shrinking as alpha doubles at fixed Γ_S α²
    let mut prev = [f64::INFINITY; 4];
    for alpha in [5.0, 10.0, 20.0, 40.0] {
        let a2 = alpha * alpha;
        let gamma_s = 0.1 / a2;
        let probe = ProbePrep::from_alpha(alpha).unwrap();
        let params = InteractionParams::from_factors(gamma_s, 2.0 * gamma_s).unwrap();
        let m = exact_quadrature_moments(&probe, &params, 0.0, 0.0);
        let g2 = a2 * a2 * gamma_s * gamma_s;
        let gaps = [
            rel(m.a, 0.5 + g2),
            rel(m.b, -g2),
            rel(m.c, a2 * gamma_s),
            rel(m.a + m.b, 0.5),
        ];
        for (i, (gap, p)) in gaps.iter().zip(&prev).enumerate() {
            assert!(gap < p, "alpha={alpha}: limit gap[{i}]={gap:e} vs {p:e}");
        }
        prev = gaps;
    }
    assert!(prev.iter().all(|g| *g < 1e-3));
}

#[test]
fn coherent_phase_average_closed_form() {
    // <alpha|e^{i lambda n}|alpha> = exp[alpha²(e^{i lambda} − 1)], checked
    // against direct series summation over the number distribution
    let alpha = 2.0f64;
    let lambda = 0.3f64;
    let vec = FockVector::coherent_auto(alpha).unwrap();
    let series = vec.number_characteristic(lambda);
    let closed = (Complex64::new(0.0, lambda).exp() - 1.0) * alpha * alpha;
    let closed = closed.exp();
    assert!((series - closed).norm() < 1e-12, "series {series} closed {closed}");
    assert!((series - Complex64::new(0.31699383001719656, 0.773_997_320_322_541_1)).norm() < 1e-10);
}

#[test]
fn law_of_total_probability_recovers_prior() {
    // integrating posterior(n | X) · W(X) over outcomes reproduces the prior
    let prior = poisson_prior(4.0, Some((0, 30))).unwrap();
    let alpha = 2.0;
    let kp = KrausParams { alpha, gamma_s: 0.03, gamma_x: 0.06, zeta: 0.9 };
    let span = std::f64::consts::SQRT_2 * alpha + 10.0;
    let steps = 24_000usize;
    let h = 2.0 * span / steps as f64;
    let mut acc = vec![0.0f64; prior.pmf().len()];
    for i in 0..=steps {
        let x = -span + h * i as f64;
        let w_trap = if i == 0 || i == steps { 0.5 } else { 1.0 };
        if let Ok((post, marginal)) = posterior(x, &prior, &kp) {
            for (slot, p) in acc.iter_mut().zip(post.pmf()) {
                *slot += w_trap * p * marginal * h;
            }
        }
    }
    for (n, (got, expect)) in acc.iter().zip(prior.pmf()).enumerate() {
        assert!((got - expect).abs() < 1e-6, "n={n}: {got} vs {expect}");
    }
}
