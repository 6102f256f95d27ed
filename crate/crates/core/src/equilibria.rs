//! Equilibrium computation.
//!
//! Three stages, each feeding the next:
//!
//! 1. [`generator_matrix`] folds the rate constants into the singular
//!    generator `G` with zero column sums, so equilibria are exactly the
//!    states whose monomial vector lies in `ker G`.
//! 2. [`positive_kernel`] extracts the strictly positive kernel direction
//!    by power iteration on the shifted nonnegative matrix `G + γI`; for
//!    an irreducible network the direction is unique up to scale.
//! 3. [`some_positive_equilibrium`] pulls the kernel direction back
//!    through the monomial map by a minimum-norm solve, and
//!    [`class_equilibrium`] moves that equilibrium into any positive
//!    class with the strictly convex coordinatization solve in
//!    [`coordinatize`].

use crate::boundary::{self, BoundaryError};
use crate::dynamics;
use crate::kinetics::Kinetics;
use crate::linalg::{self, Mat};
use crate::network::{stoich_basis, ClassDescriptor, Network, NetError, StoichBasis};
use serde::Serialize;
use thiserror::Error;

/// Kernel residual target, scaled by `1 + ‖G‖∞`.
pub const KERNEL_RESIDUAL_FACTOR: f64 = 1e-13;
/// Kernel residual the result must meet, scaled by `1 + ‖G‖∞`.
pub const KERNEL_RESIDUAL_BOUND: f64 = 1e-12;
/// Power iteration budget.
pub const KERNEL_MAX_ITER: usize = 3_000_000;
/// Field residual required of a free positive equilibrium.
pub const FIELD_TOL: f64 = 1e-10;
/// Field residual required of a per-class equilibrium.
pub const CLASS_FIELD_TOL: f64 = 1e-9;
/// Class-membership residual required of a per-class equilibrium.
pub const CLASS_MEMBER_TOL: f64 = 1e-9;
/// Residual required of both coordinatization conditions.
pub const COORD_RESIDUAL_TOL: f64 = 1e-10;
/// Gradient stop for the coordinatization Newton solve.
pub const NEWTON_GRAD_TOL: f64 = 1e-12;
/// Iteration cap for the coordinatization Newton solve.
pub const NEWTON_MAX_ITER: usize = 200;
/// Armijo slope fraction for the backtracking line search.
pub const ARMIJO_C: f64 = 1e-4;
/// Smallest interior level at which a class counts as positive.
pub const POSITIVE_CLASS_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum EqError {
    #[error("power iteration did not converge: residual {residual} after {iterations} iterations")]
    KernelNonConvergence { residual: f64, iterations: usize },
    #[error("kernel vector has a nonpositive component")]
    KernelNotPositive,
    #[error("normal equations are ill-conditioned")]
    IllConditioned,
    #[error("input vector must be strictly positive (component {index} is {value})")]
    NotPositive { index: usize, value: f64 },
    #[error("dimension mismatch: got {got}, expected {expected}")]
    Dimension { got: usize, expected: usize },
    #[error("line search failed to make progress")]
    LineSearchFailure,
    #[error("minimizer did not converge: gradient norm {grad_norm} after {iterations} iterations")]
    NonConvergence { grad_norm: f64, iterations: usize },
    #[error("class contains no strictly positive point (best interior level {0})")]
    ClassNotPositive(f64),
    #[error("{what} residual {value} exceeds tolerance {tol}")]
    ToleranceNotMet { what: String, value: f64, tol: f64 },
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Boundary(#[from] BoundaryError),
}

/// Strictly positive kernel direction of the generator, normalized to
/// unit 1-norm.
#[derive(Debug, Clone, Serialize)]
pub struct KernelVector {
    pub vector: Vec<f64>,
    /// ‖G·vector‖∞ at return.
    pub residual: f64,
    pub iterations: usize,
}

/// A positive equilibrium with its certification residuals.
#[derive(Debug, Clone, Serialize)]
pub struct EquilibriumResult {
    pub state: Vec<f64>,
    /// ‖f(state)‖∞.
    pub field_residual: f64,
    /// Violation of class membership (per-class results only).
    pub membership_residual: Option<f64>,
    /// Violation of the log-state orthogonality condition (per-class
    /// results only).
    pub log_orthogonality_residual: Option<f64>,
    /// Newton steps of the coordinatization solve, or power-iteration
    /// count for the free equilibrium.
    pub iterations: usize,
}

/// The generator `G`: off-diagonal entries are the rate constants, each
/// diagonal entry is the negated off-diagonal sum of its column, so the
/// column sums vanish identically and the all-ones row annihilates `G`.
pub fn generator_matrix(net: &Network) -> Mat {
    let m = net.num_complexes();
    let mut g = Mat::zeros(m, m);
    for j in 0..m {
        let mut colsum = 0.0;
        for i in 0..m {
            if i != j {
                let a = net.rates.at(i, j);
                g.set(i, j, a);
                colsum += a;
            }
        }
        g.set(j, j, -colsum);
    }
    g
}

/// Power iteration for the positive kernel direction, started from the
/// uniform vector.
pub fn positive_kernel(net: &Network) -> Result<KernelVector, EqError> {
    let m = net.num_complexes();
    positive_kernel_from(net, &vec![1.0 / m as f64; m])
}

/// Power iteration from a caller-supplied positive start; different
/// starts converge to the same direction.
pub fn positive_kernel_from(net: &Network, start: &[f64]) -> Result<KernelVector, EqError> {
    let m = net.num_complexes();
    if start.len() != m {
        return Err(EqError::Dimension {
            got: start.len(),
            expected: m,
        });
    }
    for (i, &v) in start.iter().enumerate() {
        if !(v > 0.0) {
            return Err(EqError::NotPositive { index: i, value: v });
        }
    }
    let g = generator_matrix(net);
    // shift so every entry is nonnegative and the diagonal strictly
    // positive; the shifted matrix has constant column sum γ, which is
    // therefore its spectral radius, and the kernel of G is its leading
    // eigenspace
    let gamma = 1.0 + (0..m)
        .map(|j| -g.at(j, j))
        .fold(0.0, f64::max);
    let mut shifted = g.clone();
    for j in 0..m {
        shifted.add_at(j, j, gamma);
    }
    let norm = g.norm_inf();
    let target = KERNEL_RESIDUAL_FACTOR * (1.0 + norm);
    let bound = KERNEL_RESIDUAL_BOUND * (1.0 + norm);

    let total: f64 = start.iter().sum();
    let mut y: Vec<f64> = start.iter().map(|v| v / total).collect();
    let mut best = y.clone();
    let mut best_residual = linalg::norm_inf(&g.matvec(&y));
    let mut iterations = 0usize;
    while iterations < KERNEL_MAX_ITER {
        iterations += 1;
        let next = shifted.matvec(&y);
        let sum: f64 = next.iter().sum();
        y = next.iter().map(|v| v / sum).collect();
        let residual = linalg::norm_inf(&g.matvec(&y));
        if residual < best_residual {
            best_residual = residual;
            best = y.clone();
        }
        if residual <= target {
            break;
        }
    }
    if best_residual > bound {
        return Err(EqError::KernelNonConvergence {
            residual: best_residual,
            iterations,
        });
    }
    if best.iter().any(|&v| !(v > 0.0)) {
        return Err(EqError::KernelNotPositive);
    }
    Ok(KernelVector {
        vector: best,
        residual: best_residual,
        iterations,
    })
}

/// One strictly positive equilibrium: inverts the monomial map on the
/// kernel direction through the minimum-norm solution of
/// `Bᵀ·logs = ln(kernel)` and exponentiates back.
pub fn some_positive_equilibrium(net: &Network) -> Result<EquilibriumResult, EqError> {
    let kernel = positive_kernel(net)?;
    let log_kernel: Vec<f64> = kernel.vector.iter().map(|v| v.ln()).collect();
    let bt_b = net.complexes.transpose().matmul(&net.complexes);
    let w = linalg::cholesky_solve(&bt_b, &log_kernel).ok_or(EqError::IllConditioned)?;
    let logs = net.complexes.matvec(&w);
    let state: Vec<f64> = logs
        .iter()
        .map(|&s| net.kinetics.inv_log_theta(s))
        .collect();
    let field_residual = linalg::norm_inf(&dynamics::vector_field(net, &state));
    if field_residual > FIELD_TOL {
        return Err(EqError::ToleranceNotMet {
            what: "equilibrium field".into(),
            value: field_residual,
            tol: FIELD_TOL,
        });
    }
    Ok(EquilibriumResult {
        state,
        field_residual,
        membership_residual: None,
        log_orthogonality_residual: None,
        iterations: kernel.iterations,
    })
}

/// The unique positive point `x` with `x − p` in the span of `subspace`
/// and the log-state difference from `q` orthogonal to it.
///
/// Internally minimizes the strictly convex separable objective from the
/// orthogonal complement of the span: at the minimum the gradient is
/// `x − p` projected onto the complement, which is exactly the first
/// condition, while the second holds by construction of the iterate.
pub fn coordinatize(
    subspace: &[Vec<f64>],
    p: &[f64],
    q: &[f64],
    kinetics: Kinetics,
) -> Result<Vec<f64>, EqError> {
    coordinatize_from(subspace, p, q, kinetics, None).map(|(x, _)| x)
}

/// [`coordinatize`] with an explicit start for the inner Newton solve
/// (coordinates over the complement basis); `None` starts at zero.
pub fn coordinatize_from(
    subspace: &[Vec<f64>],
    p: &[f64],
    q: &[f64],
    kinetics: Kinetics,
    start: Option<&[f64]>,
) -> Result<(Vec<f64>, usize), EqError> {
    let n = p.len();
    if q.len() != n {
        return Err(EqError::Dimension {
            got: q.len(),
            expected: n,
        });
    }
    for v in subspace {
        if v.len() != n {
            return Err(EqError::Dimension {
                got: v.len(),
                expected: n,
            });
        }
    }
    check_positive(p)?;
    check_positive(q)?;
    let ortho = linalg::orthonormalize(subspace, 1e-12);
    let complement = linalg::orthonormal_complement(&ortho, n, 1e-12);
    let solved = minimize_over(&complement, p, q, kinetics, start)?;
    // both defining conditions, checked against the *given* spanning set
    let x = &solved.0;
    let shift = linalg::sub(x, p);
    for w in &complement {
        let r = linalg::dot(w, &shift).abs();
        if r > COORD_RESIDUAL_TOL {
            return Err(EqError::ToleranceNotMet {
                what: "subspace membership".into(),
                value: r,
                tol: COORD_RESIDUAL_TOL,
            });
        }
    }
    let dlog: Vec<f64> = (0..n)
        .map(|i| kinetics.log_theta(x[i]) - kinetics.log_theta(q[i]))
        .collect();
    for d in &ortho {
        let r = linalg::dot(d, &dlog).abs();
        if r > COORD_RESIDUAL_TOL {
            return Err(EqError::ToleranceNotMet {
                what: "log orthogonality".into(),
                value: r,
                tol: COORD_RESIDUAL_TOL,
            });
        }
    }
    Ok(solved)
}

fn check_positive(v: &[f64]) -> Result<(), EqError> {
    for (i, &x) in v.iter().enumerate() {
        if !(x > 0.0 && x.is_finite()) {
            return Err(EqError::NotPositive { index: i, value: x });
        }
    }
    Ok(())
}

/// Newton minimization of `t ↦ Σ_i L_i(y_i(t))` where `y = Σ t_a w_a`
/// ranges over the span of the orthonormal `basis` and
/// `L_i(u) = ∫₀^{u+ρ(q_i)} ρ⁻¹ − p_i·u`. Returns the positive state `x`
/// with `ρ(x_i) = y_i + ρ(q_i)` and the iteration count.
fn minimize_over(
    basis: &[Vec<f64>],
    p: &[f64],
    q: &[f64],
    kinetics: Kinetics,
    start: Option<&[f64]>,
) -> Result<(Vec<f64>, usize), EqError> {
    let n = p.len();
    let k = basis.len();
    let log_q: Vec<f64> = q.iter().map(|&v| kinetics.log_theta(v)).collect();

    let state_of = |t: &[f64]| -> Vec<f64> {
        let mut logs = log_q.clone();
        for (a, w) in t.iter().zip(basis) {
            for i in 0..n {
                logs[i] += a * w[i];
            }
        }
        logs.iter().map(|&s| kinetics.inv_log_theta(s)).collect()
    };
    let objective = |t: &[f64]| -> f64 {
        let x = state_of(t);
        let mut y = vec![0.0; n];
        for (a, w) in t.iter().zip(basis) {
            for i in 0..n {
                y[i] += a * w[i];
            }
        }
        let pexp = kinetics.exponent();
        (0..n).map(|i| pexp * x[i] - pexp - p[i] * y[i]).sum()
    };

    let gradient_at = |t: &[f64]| -> Vec<f64> {
        let x = state_of(t);
        let mut grad = vec![0.0; k];
        for (a, w) in basis.iter().enumerate() {
            grad[a] = (0..n).map(|i| (x[i] - p[i]) * w[i]).sum();
        }
        grad
    };

    let mut t = match start {
        Some(s) => {
            if s.len() != k {
                return Err(EqError::Dimension {
                    got: s.len(),
                    expected: k,
                });
            }
            s.to_vec()
        }
        None => vec![0.0; k],
    };
    if k == 0 {
        return Ok((state_of(&t), 0));
    }
    if !objective(&t).is_finite() {
        // recover from a wild caller-supplied start
        t = vec![0.0; k];
    }
    let mut iterations = 0usize;
    loop {
        let x = state_of(&t);
        let grad = gradient_at(&t);
        let grad_norm = linalg::norm_inf(&grad);
        if grad_norm <= NEWTON_GRAD_TOL {
            return Ok((x, iterations));
        }
        if iterations >= NEWTON_MAX_ITER {
            return Err(EqError::NonConvergence {
                grad_norm,
                iterations,
            });
        }
        iterations += 1;
        // Hessian: Σ_i (x_i / p) w_ai w_bi, positive definite
        let mut hess = Mat::zeros(k, k);
        let pexp = kinetics.exponent();
        for i in 0..n {
            let weight = x[i] / pexp;
            for a in 0..k {
                let wa = basis[a][i];
                if wa == 0.0 {
                    continue;
                }
                for b in a..k {
                    hess.add_at(a, b, weight * wa * basis[b][i]);
                }
            }
        }
        for a in 0..k {
            for b in 0..a {
                let v = hess.at(b, a);
                hess.set(a, b, v);
            }
        }
        let neg_grad: Vec<f64> = grad.iter().map(|g| -g).collect();
        let direction = match linalg::cholesky_solve(&hess, &neg_grad) {
            Some(d) => d,
            // ill-conditioned curvature: fall back to steepest descent
            None => neg_grad.clone(),
        };
        let slope = linalg::dot(&grad, &direction);
        let direction = if slope < 0.0 {
            direction
        } else {
            neg_grad.clone()
        };
        let slope = linalg::dot(&grad, &direction);

        let value = objective(&t);
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let trial: Vec<f64> = t
                .iter()
                .zip(&direction)
                .map(|(ti, di)| ti + alpha * di)
                .collect();
            // close to the optimum the objective decrease drops below
            // f64 resolution; accept by gradient reduction there
            if grad_norm <= 1e-6 {
                let trial_norm = linalg::norm_inf(&gradient_at(&trial));
                if trial_norm.is_finite() && trial_norm < grad_norm {
                    t = trial;
                    accepted = true;
                    break;
                }
            } else {
                let trial_value = objective(&trial);
                if trial_value.is_finite() && trial_value <= value + ARMIJO_C * alpha * slope {
                    t = trial;
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !accepted {
            return Err(EqError::LineSearchFailure);
        }
    }
}

/// Returns a strictly positive anchor for the class, replacing an anchor
/// with zero components by the most interior feasible point.
pub fn positive_anchor(
    basis: &StoichBasis,
    cls: &ClassDescriptor,
) -> Result<Vec<f64>, EqError> {
    if cls.anchor.iter().all(|&v| v > 0.0) {
        return Ok(cls.anchor.clone());
    }
    let lhs = Mat::from_rows(&basis.conservation_basis);
    match boundary::most_interior_point(&lhs, &cls.conservation_values)? {
        Some((x, level)) if level > POSITIVE_CLASS_TOL => Ok(x),
        Some((_, level)) => Err(EqError::ClassNotPositive(level)),
        None => Err(EqError::ClassNotPositive(f64::NEG_INFINITY)),
    }
}

/// The unique positive equilibrium of a positive class: coordinatizes
/// the free positive equilibrium against a strictly positive anchor of
/// the class.
pub fn class_equilibrium(
    net: &Network,
    cls: &ClassDescriptor,
) -> Result<EquilibriumResult, EqError> {
    let basis = stoich_basis(net)?;
    let anchor = positive_anchor(&basis, cls)?;
    let free = some_positive_equilibrium(net)?;
    let (state, iterations) = minimize_over(
        &basis.conservation_basis,
        &anchor,
        &free.state,
        net.kinetics,
        None,
    )?;
    let membership = basis
        .conservation_values(&state)
        .iter()
        .zip(&cls.conservation_values)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if membership > CLASS_MEMBER_TOL {
        return Err(EqError::ToleranceNotMet {
            what: "class membership".into(),
            value: membership,
            tol: CLASS_MEMBER_TOL,
        });
    }
    let dlog: Vec<f64> = state
        .iter()
        .zip(&free.state)
        .map(|(&x, &q)| net.kinetics.log_theta(x) - net.kinetics.log_theta(q))
        .collect();
    let log_orthogonality = basis.reaction_component(&dlog);
    let field_residual = linalg::norm_inf(&dynamics::vector_field(net, &state));
    if field_residual > CLASS_FIELD_TOL {
        return Err(EqError::ToleranceNotMet {
            what: "class equilibrium field".into(),
            value: field_residual,
            tol: CLASS_FIELD_TOL,
        });
    }
    Ok(EquilibriumResult {
        state,
        field_residual,
        membership_residual: Some(membership),
        log_orthogonality_residual: Some(log_orthogonality),
        iterations,
    })
}
