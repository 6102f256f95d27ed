//! Entropy distance, per-class Lyapunov function, deviation measures,
//! and numeric decrease certificates.
//!
//! The entropy distance `W(x, z)` is a strictly convex separable function
//! with its global minimum at `z`; against the class equilibrium it
//! yields the Lyapunov function `V`. The decrease certificate checks, at
//! every interior trajectory sample, both the monotonicity of `V` and
//! the rate inequality `⟨ρ(x) − ρ(z), f(x)⟩ ≤ −c·δ(x, z)`, with `c`
//! assembled from the smallest eigenvalue of a reduced quadratic form of
//! the rate constants and the smallest monomial at `z`.

use crate::dynamics::{self, Trajectory};
use crate::kinetics::Kinetics;
use crate::linalg::{self, Mat};
use crate::network::{Network, NetError};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

/// Slack allowed by decrease certificates.
pub const CERT_SLACK: f64 = 1e-8;
/// Default probe count for the quadratic-form sampling check.
pub const KAPPA_PROBES: usize = 100_000;

#[derive(Debug, Error)]
pub enum LyapError {
    #[error("vector must be strictly positive (component {index} is {value})")]
    NotPositive { index: usize, value: f64 },
    #[error("dimension mismatch: got {got}, expected {expected}")]
    Dimension { got: usize, expected: usize },
    #[error("the reduced quadratic form is not positive definite (smallest eigenvalue {0})")]
    DegenerateForm(f64),
    #[error("the quadratic-form constant needs at least two complexes")]
    TooFewComplexes,
    #[error("trajectory is empty")]
    EmptyTrajectory,
    #[error(transparent)]
    Net(#[from] NetError),
}

/// Certified constant for the pairwise quadratic-form bound.
#[derive(Debug, Clone, Serialize)]
pub struct KappaBound {
    /// Smallest eigenvalue of the reduced (m−1)-variable form.
    pub kappa0: f64,
    /// Certified constant: `kappa0 / (4m)`.
    pub kappa: f64,
    /// Worst ratio `Q(q) / (kappa·spread(q))` over the probes; ≥ 1 when
    /// the bound holds with margin.
    pub sample_check: f64,
    pub probes: usize,
    pub violations: usize,
}

/// Pass/fail record for an inequality checked along sampled points.
#[derive(Debug, Clone, Serialize)]
pub struct CertificateReport {
    pub checked_points: usize,
    pub max_violation: f64,
    pub c_used: f64,
    pub pass: bool,
    pub slack: f64,
    /// Largest violation of the rate inequality alone.
    pub decrease_violation: f64,
    /// Largest increase of the Lyapunov value between samples.
    pub monotonicity_violation: f64,
}

/// The entropy distance `W(x, z) = Σ_i [P(x_i) − x_i·ρ(z_i)]` where `P`
/// is the antiderivative of `ρ` from 1. Defined for `x ≥ 0`, `z > 0`;
/// strictly minimized over `x` at `x = z`.
pub fn entropy_distance(x: &[f64], z: &[f64], kinetics: Kinetics) -> f64 {
    debug_assert_eq!(x.len(), z.len());
    x.iter()
        .zip(z)
        .map(|(&xi, &zi)| {
            debug_assert!(xi >= 0.0 && zi > 0.0);
            kinetics.log_theta_antideriv(xi) - xi * kinetics.log_theta(zi)
        })
        .sum()
}

/// Gradient of `W(·, z)` at an interior point: `ρ(x) − ρ(z)` transposed.
pub fn entropy_gradient(x: &[f64], z: &[f64], kinetics: Kinetics) -> Vec<f64> {
    x.iter()
        .zip(z)
        .map(|(&xi, &zi)| kinetics.log_theta(xi) - kinetics.log_theta(zi))
        .collect()
}

/// The Lyapunov value against an equilibrium: `W(x, z) − W(z, z)`.
/// Nonnegative everywhere and zero only at `x = z`.
pub fn lyapunov_value(equilibrium: &[f64], x: &[f64], kinetics: Kinetics) -> f64 {
    entropy_distance(x, equilibrium, kinetics) - entropy_distance(equilibrium, equilibrium, kinetics)
}

/// Squared spread of the log-state difference along all reaction
/// directions: `Σ_ij ⟨b_i − b_j, ρ(x) − ρ(z)⟩²`. Zero exactly when the
/// log difference is orthogonal to the reaction subspace.
pub fn reaction_deviation(net: &Network, x: &[f64], z: &[f64]) -> f64 {
    let dlog = entropy_gradient(x, z, net.kinetics);
    let q = net.complexes.tr_matvec(&dlog);
    pairwise_spread(&q)
}

/// `Σ_ij (q_i − q_j)²` over ordered pairs.
pub fn pairwise_spread(q: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..q.len() {
        for j in i + 1..q.len() {
            let d = q[i] - q[j];
            acc += 2.0 * d * d;
        }
    }
    acc
}

/// The rate-weighted pairwise form `Q(q) = Σ_ij a_ij (q_i − q_j)²`.
pub fn rate_quadratic(net: &Network, q: &[f64]) -> f64 {
    let m = net.num_complexes();
    debug_assert_eq!(q.len(), m);
    let mut acc = 0.0;
    for j in 0..m {
        for i in 0..m {
            if i == j {
                continue;
            }
            let a = net.rates.at(i, j);
            if a != 0.0 {
                let d = q[i] - q[j];
                acc += a * d * d;
            }
        }
    }
    acc
}

/// Combined separation measure: reaction-direction spread of the log
/// difference plus conservation-direction spread of the state difference.
/// Zero exactly when the two states coincide.
pub fn state_separation(net: &Network, x: &[f64], z: &[f64]) -> Result<f64, LyapError> {
    let basis = crate::network::stoich_basis(net)?;
    let dlog = entropy_gradient(x, z, net.kinetics);
    let first = net.complexes.col(0);
    let mut acc = 0.0;
    for j in 1..net.num_complexes() {
        let diff = linalg::sub(&net.complexes.col(j), &first);
        let inner = linalg::dot(&diff, &dlog);
        acc += inner * inner;
    }
    let dx = linalg::sub(x, z);
    for v in &basis.conservation_basis {
        let inner = linalg::dot(v, &dx);
        acc += inner * inner;
    }
    Ok(acc)
}

/// Smallest eigenvalue of the reduced quadratic form and the certified
/// constant, without the sampling check.
///
/// The reduced form eliminates the last complex coordinate: in the
/// convention fixed here, `P(ξ) = ξᵀMξ` with `M` symmetric, each
/// off-diagonal rate adding to two diagonal entries and subtracting from
/// the two symmetric ones, and the rates touching the last complex
/// adding to the diagonal alone.
fn kappa_eigen(net: &Network) -> Result<(f64, f64), LyapError> {
    let m = net.num_complexes();
    if m < 2 {
        return Err(LyapError::TooFewComplexes);
    }
    let last = m - 1;
    let mut form = Mat::zeros(last, last);
    for j in 0..last {
        for i in 0..last {
            if i == j {
                continue;
            }
            let a = net.rates.at(i, j);
            if a != 0.0 {
                form.add_at(i, i, a);
                form.add_at(j, j, a);
                form.add_at(i, j, -a);
                form.add_at(j, i, -a);
            }
        }
    }
    for i in 0..last {
        form.add_at(i, i, net.rates.at(i, last));
        form.add_at(i, i, net.rates.at(last, i));
    }
    let eigenvalues = linalg::symmetric_eigenvalues(&form);
    let kappa0 = eigenvalues[0];
    let scale = form.max_abs().max(1.0);
    if kappa0 <= 1e-12 * scale {
        return Err(LyapError::DegenerateForm(kappa0));
    }
    Ok((kappa0, kappa0 / (4.0 * m as f64)))
}

/// Certified constant for `Q(q) ≥ κ·Σ_ij (q_i − q_j)²`, verified by
/// standard-normal sampling with the default probe budget and seed 0.
pub fn kappa_bound(net: &Network) -> Result<KappaBound, LyapError> {
    kappa_bound_with(net, KAPPA_PROBES, 0)
}

/// [`kappa_bound`] with explicit probe count and seed.
pub fn kappa_bound_with(net: &Network, probes: usize, seed: u64) -> Result<KappaBound, LyapError> {
    let (kappa0, kappa) = kappa_eigen(net)?;
    let m = net.num_complexes();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = rand_distr_standard_normal();
    let mut worst = f64::INFINITY;
    let mut violations = 0usize;
    for _ in 0..probes {
        let q: Vec<f64> = (0..m).map(|_| normal(&mut rng)).collect();
        let spread = pairwise_spread(&q);
        if spread <= 1e-30 {
            continue;
        }
        let ratio = rate_quadratic(net, &q) / (kappa * spread);
        if ratio < worst {
            worst = ratio;
        }
        if ratio < 1.0 {
            violations += 1;
        }
    }
    Ok(KappaBound {
        kappa0,
        kappa,
        sample_check: worst,
        probes,
        violations,
    })
}

/// Box-Muller standard normal; kept local so the probe stream depends
/// only on the seed.
fn rand_distr_standard_normal() -> impl Fn(&mut ChaCha8Rng) -> f64 {
    |rng: &mut ChaCha8Rng| {
        let u1: f64 = rng.random::<f64>().max(1e-300);
        let u2: f64 = rng.random();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }
}

/// The decrease constant for a positive reference state: half the
/// certified quadratic-form constant times the smallest monomial there.
pub fn decrease_constant(net: &Network, z: &[f64]) -> Result<f64, LyapError> {
    check_positive(z)?;
    if z.len() != net.num_species() {
        return Err(LyapError::Dimension {
            got: z.len(),
            expected: net.num_species(),
        });
    }
    let (_, kappa) = kappa_eigen(net)?;
    let mono = dynamics::monomials(net, z);
    let smallest = mono.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(kappa * smallest / 2.0)
}

fn check_positive(v: &[f64]) -> Result<(), LyapError> {
    for (i, &x) in v.iter().enumerate() {
        if !(x > 0.0) {
            return Err(LyapError::NotPositive { index: i, value: x });
        }
    }
    Ok(())
}

/// Checks, along a simulated trajectory against its class equilibrium,
/// the rate inequality `⟨ρ(x) − ρ(z), f(x)⟩ + c·δ(x, z) ≤ slack` at every
/// strictly positive sample and the monotonicity of the Lyapunov value
/// between consecutive samples. Violations are report fields, never
/// errors.
pub fn decrease_certificate(
    net: &Network,
    equilibrium: &[f64],
    traj: &Trajectory,
) -> Result<CertificateReport, LyapError> {
    if traj.is_empty() {
        return Err(LyapError::EmptyTrajectory);
    }
    let c = decrease_constant(net, equilibrium)?;
    let product = net
        .complexes
        .matmul(&crate::equilibria::generator_matrix(net));
    let n = net.num_species();
    let m = net.num_complexes();
    let mut monomial_buf = vec![0.0; m];
    let mut field_buf = vec![0.0; n];
    let mut dlog = vec![0.0; n];
    let mut q = vec![0.0; m];
    let mut checked = 0usize;
    let mut decrease_violation = f64::NEG_INFINITY;
    let mut monotonicity_violation = f64::NEG_INFINITY;
    let mut previous_v: Option<f64> = None;
    for state in &traj.states {
        let v = lyapunov_value(equilibrium, state, net.kinetics);
        if let Some(prev) = previous_v {
            monotonicity_violation = monotonicity_violation.max(v - prev);
        }
        previous_v = Some(v);
        if state.iter().any(|&c| !(c > 0.0)) {
            continue; // boundary sample: the rate inequality needs logs
        }
        checked += 1;
        for i in 0..n {
            dlog[i] = net.kinetics.log_theta(state[i]) - net.kinetics.log_theta(equilibrium[i]);
        }
        dynamics::monomials_into(net, state, &mut monomial_buf);
        product.matvec_into(&monomial_buf, &mut field_buf);
        net.complexes.tr_matvec_into(&dlog, &mut q);
        let delta = pairwise_spread(&q);
        decrease_violation =
            decrease_violation.max(linalg::dot(&dlog, &field_buf) + c * delta);
    }
    let max_violation = decrease_violation.max(monotonicity_violation);
    Ok(CertificateReport {
        checked_points: checked,
        max_violation,
        c_used: c,
        pass: max_violation <= CERT_SLACK,
        slack: CERT_SLACK,
        decrease_violation,
        monotonicity_violation,
    })
}

/// Gap between the tangent line of the exponential at `a` and the
/// exponential itself, evaluated at `r`; nonpositive by convexity, and
/// on `a ≥ 0, r ≥ 0` it is dominated by `−(r−a)²/2`.
pub fn exp_tangent_gap(a: f64, r: f64) -> f64 {
    a.exp() * (r - a) - r.exp() + a.exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{simulate, SimOptions};
    use crate::equilibria;
    use crate::network::class_of;
    use crate::network::fixtures::two_species_line;
    use approx::assert_relative_eq;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn entropy_matches_closed_form_for_mass_action() {
        let k = Kinetics::mass_action();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let n = rng.random_range(1..5);
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..4.0)).collect();
            let z: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..4.0)).collect();
            let direct: f64 = x
                .iter()
                .zip(&z)
                .map(|(&xi, &zi)| xi * xi.ln() - xi - xi * zi.ln())
                .sum();
            // the antiderivative-from-1 convention shifts by +1 per
            // coordinate
            assert_relative_eq!(
                entropy_distance(&x, &z, k),
                direct + n as f64,
                max_relative = 1e-12,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn entropy_is_strictly_minimized_at_the_reference() {
        let k = Kinetics::new(1.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let z: Vec<f64> = (0..3).map(|_| rng.random_range(0.05..3.0)).collect();
            let x: Vec<f64> = (0..3).map(|_| rng.random_range(0.0..3.5)).collect();
            if x.iter().zip(&z).any(|(a, b)| (a - b).abs() > 1e-9) {
                assert!(entropy_distance(&x, &z, k) > entropy_distance(&z, &z, k));
            }
        }
    }

    #[test]
    fn entropy_gradient_matches_central_differences() {
        let k = Kinetics::mass_action();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let z: Vec<f64> = (0..3).map(|_| rng.random_range(0.2..2.0)).collect();
            let x: Vec<f64> = (0..3).map(|_| rng.random_range(0.2..2.0)).collect();
            let grad = entropy_gradient(&x, &z, k);
            for i in 0..3 {
                let h = 1e-6;
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[i] += h;
                xm[i] -= h;
                let fd = (entropy_distance(&xp, &z, k) - entropy_distance(&xm, &z, k))
                    / (2.0 * h);
                let scale = grad[i].abs().max(1e-3);
                assert!(
                    (grad[i] - fd).abs() <= 1e-6 * scale.max(1.0),
                    "gradient mismatch {} vs {fd}",
                    grad[i]
                );
            }
        }
    }

    #[test]
    fn lyapunov_value_vanishes_only_at_the_equilibrium() {
        let k = Kinetics::mass_action();
        let z = vec![1.0, 2.0, 0.5];
        assert_eq!(lyapunov_value(&z, &z, k), 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let x: Vec<f64> = (0..3).map(|_| rng.random_range(0.05..4.0)).collect();
            if x.iter().zip(&z).any(|(a, b)| (a - b).abs() > 1e-6) {
                assert!(lyapunov_value(&z, &x, k) > 0.0);
            }
        }
    }

    /// Largest coordinate representable inside the sublevel set
    /// {W(·, z) ≤ total}, found by doubling and bisection on the
    /// increasing branch of the per-coordinate summand.
    fn sublevel_coordinate_cap(z: &[f64], k: Kinetics, total: f64) -> f64 {
        let r_term = |zi: f64, r: f64| k.log_theta_antideriv(r) - r * k.log_theta(zi);
        let min_term: Vec<f64> = z.iter().map(|&zi| r_term(zi, zi)).collect();
        let sum_min: f64 = min_term.iter().sum();
        let mut cap = 0.0f64;
        for (i, &zi) in z.iter().enumerate() {
            let budget = total - (sum_min - min_term[i]);
            let mut hi = zi.max(1.0);
            while r_term(zi, hi) < budget && hi < 1e12 {
                hi *= 2.0;
            }
            let mut lo = zi;
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if r_term(zi, mid) < budget {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            cap = cap.max(hi);
        }
        cap
    }

    #[test]
    fn sublevel_sets_are_bounded() {
        let k = Kinetics::mass_action();
        let z = vec![1.0, 0.5];
        let w = 3.0;
        let total = w + entropy_distance(&z, &z, k);
        let cap = sublevel_coordinate_cap(&z, k, total);
        assert!(cap.is_finite());
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut seen = 0;
        for _ in 0..20_000 {
            let x: Vec<f64> = (0..2).map(|_| rng.random_range(0.0..30.0)).collect();
            if lyapunov_value(&z, &x, k) <= w {
                seen += 1;
                assert!(linalg::norm_inf(&x) <= cap + 1e-9);
            }
        }
        assert!(seen > 100, "sampling missed the sublevel set entirely");
    }

    #[test]
    fn deviation_examples_on_the_line_network() {
        let net = two_species_line();
        let x = [2.0, 1.0];
        let z = [1.0, 1.0];
        assert_eq!(reaction_deviation(&net, &x, &x), 0.0);
        // the only reaction direction produces ±ln 2, squared and summed
        // over both ordered pairs
        let expected = 2.0 * (2.0f64.ln()) * (2.0f64.ln());
        assert_relative_eq!(reaction_deviation(&net, &x, &z), expected, max_relative = 1e-12);
    }

    #[test]
    fn deviation_vanishes_between_positive_equilibria() {
        let net = two_species_line();
        // both states have first coordinate 1, so both are equilibria in
        // different classes
        let a = [1.0, 1.0];
        let b = [1.0, 5.0];
        assert!(reaction_deviation(&net, &a, &b) < 1e-20);
    }

    #[test]
    fn separation_vanishes_only_on_equal_states() {
        let net = two_species_line();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let x: Vec<f64> = (0..2).map(|_| rng.random_range(0.1..3.0)).collect();
            assert!(state_separation(&net, &x, &x).unwrap() < 1e-24);
            let z: Vec<f64> = (0..2).map(|_| rng.random_range(0.1..3.0)).collect();
            if x.iter().zip(&z).any(|(a, b)| (a - b).abs() > 1e-7) {
                assert!(state_separation(&net, &x, &z).unwrap() > 0.0);
            }
        }
        // state difference along the reaction axis: caught by the log part
        assert!(state_separation(&net, &[2.0, 1.0], &[1.0, 1.0]).unwrap() > 1e-3);
        // state difference along the conservation axis: caught by the
        // affine part even though the log part vanishes
        assert!(state_separation(&net, &[1.0, 2.0], &[1.0, 1.0]).unwrap() > 1e-3);
    }

    #[test]
    fn kappa_of_the_symmetric_pair() {
        let net = two_species_line();
        let bound = kappa_bound_with(&net, 2_000, 0).unwrap();
        assert_relative_eq!(bound.kappa0, 2.0, max_relative = 1e-10);
        assert_relative_eq!(bound.kappa, 0.25, max_relative = 1e-10);
        assert_eq!(bound.violations, 0);
        assert!(bound.sample_check >= 1.0);
    }

    #[test]
    fn rate_quadratic_vanishes_on_constants() {
        let net = two_species_line();
        for c in [-2.0, 0.0, 3.5] {
            assert_eq!(rate_quadratic(&net, &[c, c]), 0.0);
        }
    }

    #[test]
    fn reduced_form_bounds_the_anchored_spread() {
        let net = two_species_line();
        let (kappa0, _) = kappa_eigen(&net).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..2_000 {
            let q: Vec<f64> = (0..2).map(|_| rng.random_range(-3.0..3.0)).collect();
            let anchored: f64 = (0..1).map(|i| (q[i] - q[1]) * (q[i] - q[1])).sum();
            assert!(rate_quadratic(&net, &q) + 1e-12 >= kappa0 * anchored);
        }
    }

    #[test]
    fn decrease_constant_examples() {
        let net = two_species_line();
        // unit monomials at (1,1): the constant is κ/2
        let c = decrease_constant(&net, &[1.0, 1.0]).unwrap();
        assert_relative_eq!(c, 0.125, max_relative = 1e-10);
        // scaling the state up strictly increases every monomial
        let c2 = decrease_constant(&net, &[2.0, 2.0]).unwrap();
        assert!(c2 > c);
        // positive at any class equilibrium
        let cls = class_of(&net, &[1.0, 2.0]).unwrap();
        let eq = equilibria::class_equilibrium(&net, &cls).unwrap();
        assert!(decrease_constant(&net, &eq.state).unwrap() > 0.0);
    }

    #[test]
    fn certificate_on_a_constant_trajectory() {
        let net = two_species_line();
        let cls = class_of(&net, &[1.0, 1.0]).unwrap();
        let eq = equilibria::class_equilibrium(&net, &cls).unwrap();
        let traj = simulate(&net, &eq.state, &SimOptions::to(5.0)).unwrap();
        let report = decrease_certificate(&net, &eq.state, &traj).unwrap();
        assert!(report.pass, "constant trajectory must certify: {report:?}");
        assert!(report.max_violation <= CERT_SLACK);
    }

    #[test]
    fn certificate_along_a_converging_trajectory() {
        let net = two_species_line();
        let cls = class_of(&net, &[3.0, 1.0]).unwrap();
        let eq = equilibria::class_equilibrium(&net, &cls).unwrap();
        let traj = simulate(&net, &[3.0, 1.0], &SimOptions::to(120.0)).unwrap();
        let report = decrease_certificate(&net, &eq.state, &traj).unwrap();
        assert!(report.pass, "certificate failed: {report:?}");
        assert!(report.checked_points > 10);
        assert!(report.c_used > 0.0);
    }

    #[test]
    fn tangent_gap_is_dominated_on_the_nonnegative_quadrant()
    {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..5_000 {
            let a = rng.random_range(0.0..4.0);
            let r = rng.random_range(0.0..4.0);
            assert!(
                exp_tangent_gap(a, r) <= -0.5 * (r - a) * (r - a) + 1e-12,
                "gap bound failed at a={a}, r={r}"
            );
        }
    }
}
