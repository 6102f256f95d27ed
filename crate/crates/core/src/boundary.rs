//! Boundary equilibria: support sets, membership tests, and the decision
//! procedure for whether a class contains any equilibrium with a zero
//! coordinate.
//!
//! A nonnegative state is a boundary equilibrium exactly when its zero
//! coordinates hit the support set of every complex, which reduces the
//! per-class existence question to finitely many zero patterns: enumerate
//! the inclusion-minimal hitting sets of the supports, and test each
//! pattern for feasibility against the class constraints with a
//! phase-one simplex.

use crate::dynamics;
use crate::linalg::{self, Mat};
use crate::network::{ClassDescriptor, Network, NetError};
use serde::Serialize;
use thiserror::Error;

/// Pivot tolerance for the dense simplex.
pub const PIVOT_TOL: f64 = 1e-9;
/// Enumeration budget for zero patterns.
pub const PATTERN_CAP: usize = 1_000_000;
/// Class-membership accuracy required of returned witnesses.
pub const WITNESS_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum BoundaryError {
    #[error("state component {index} is negative ({value})")]
    NegativeComponent { index: usize, value: f64 },
    #[error("dimension mismatch: got {got}, expected {expected}")]
    Dimension { got: usize, expected: usize },
    #[error("zero-pattern enumeration exceeded the cap of {0}")]
    PatternCap(usize),
    #[error("simplex failure: {0}")]
    Simplex(String),
    #[error("witness violates class constraints by {0}")]
    WitnessTolerance(f64),
    #[error(transparent)]
    Net(#[from] NetError),
}

/// For each complex, the species indices with a positive coefficient.
#[derive(Debug, Clone, Serialize)]
pub struct SupportSets {
    pub sets: Vec<Vec<usize>>,
}

impl SupportSets {
    /// True when `zeros` (sorted or not) intersects every support set.
    pub fn hit_by(&self, zeros: &[usize]) -> bool {
        self.sets
            .iter()
            .all(|s| s.iter().any(|k| zeros.contains(k)))
    }
}

/// How a nonnegative point relates to the boundary equilibrium set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PointClass {
    /// All coordinates strictly positive.
    Interior,
    /// On the boundary with zeros hitting every support set.
    BoundaryEquilibrium,
    /// On the boundary but not an equilibrium.
    BoundaryNonEquilibrium,
}

/// Result of searching a class for boundary equilibria.
#[derive(Debug, Clone, Serialize)]
pub struct BoundaryAnalysis {
    pub has_boundary_equilibria: bool,
    /// A boundary equilibrium in the class, when one exists; the witness
    /// for the lexicographically smallest feasible zero pattern.
    pub witness: Option<Vec<f64>>,
    pub zero_patterns_checked: usize,
}

/// The support sets of all complexes. Each is nonempty for a validated
/// network and their union covers every species.
pub fn support_sets(net: &Network) -> SupportSets {
    let n = net.num_species();
    let m = net.num_complexes();
    let mut sets = Vec::with_capacity(m);
    for j in 0..m {
        let set: Vec<usize> = (0..n).filter(|&k| net.complexes.at(k, j) > 0.0).collect();
        sets.push(set);
    }
    SupportSets { sets }
}

/// Classifies a nonnegative point as interior, boundary equilibrium, or
/// boundary non-equilibrium.
pub fn classify_point(net: &Network, x: &[f64]) -> Result<PointClass, BoundaryError> {
    if x.len() != net.num_species() {
        return Err(BoundaryError::Dimension {
            got: x.len(),
            expected: net.num_species(),
        });
    }
    for (i, &v) in x.iter().enumerate() {
        if !(v >= 0.0) {
            return Err(BoundaryError::NegativeComponent { index: i, value: v });
        }
    }
    let zeros: Vec<usize> = (0..x.len()).filter(|&i| x[i] == 0.0).collect();
    if zeros.is_empty() {
        return Ok(PointClass::Interior);
    }
    let supports = support_sets(net);
    let hit = supports.hit_by(&zeros);
    #[cfg(debug_assertions)]
    {
        // zeros hit every support iff every monomial vanishes, and in that
        // case the field is exactly zero
        let mono = dynamics::monomials(net, x);
        debug_assert_eq!(hit, mono.iter().all(|&v| v == 0.0));
        if hit {
            let f = dynamics::vector_field_via_pairs(net, x);
            debug_assert!(f.iter().all(|&v| v == 0.0));
        }
    }
    if hit {
        Ok(PointClass::BoundaryEquilibrium)
    } else {
        Ok(PointClass::BoundaryNonEquilibrium)
    }
}

/// True exactly for boundary equilibria; interior points answer false.
pub fn is_boundary_equilibrium(net: &Network, x: &[f64]) -> Result<bool, BoundaryError> {
    Ok(classify_point(net, x)? == PointClass::BoundaryEquilibrium)
}

/// Decides whether the class contains a boundary equilibrium by testing
/// every inclusion-minimal zero pattern for feasibility. When one is
/// feasible, the returned witness is refined by a least-squares
/// projection onto the equality constraints and re-verified.
pub fn class_boundary_check(
    net: &Network,
    cls: &ClassDescriptor,
) -> Result<BoundaryAnalysis, BoundaryError> {
    let n = net.num_species();
    if cls.anchor.len() != n {
        return Err(BoundaryError::Dimension {
            got: cls.anchor.len(),
            expected: n,
        });
    }
    let basis = crate::network::stoich_basis(net)?;
    let supports = support_sets(net);
    let patterns = minimal_hitting_sets(&supports.sets, n, PATTERN_CAP)?;

    let cons_rows: Vec<Vec<f64>> = basis.conservation_basis.clone();
    let mut checked = 0usize;
    for pattern in &patterns {
        checked += 1;
        let mut lhs_rows = cons_rows.clone();
        let mut rhs = cls.conservation_values.clone();
        for &k in pattern {
            let mut row = vec![0.0; n];
            row[k] = 1.0;
            lhs_rows.push(row);
            rhs.push(0.0);
        }
        let lhs = Mat::from_rows(&lhs_rows);
        if let Some(point) = linear_feasibility(&lhs, &rhs)? {
            let witness = refine_witness(&lhs, &rhs, &point, pattern);
            // verify the refined point before reporting it
            let membership = basis
                .conservation_values(&witness)
                .iter()
                .zip(&cls.conservation_values)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            if membership > WITNESS_TOL {
                return Err(BoundaryError::WitnessTolerance(membership));
            }
            debug_assert!(is_boundary_equilibrium(net, &witness)?);
            return Ok(BoundaryAnalysis {
                has_boundary_equilibria: true,
                witness: Some(witness),
                zero_patterns_checked: checked,
            });
        }
    }
    Ok(BoundaryAnalysis {
        has_boundary_equilibria: false,
        witness: None,
        zero_patterns_checked: checked,
    })
}

/// All inclusion-minimal sets of species indices intersecting every
/// support set, in lexicographic order. Depth-first over the supports
/// ordered by ascending size, pruned against already-found sets.
fn minimal_hitting_sets(
    sets: &[Vec<usize>],
    n: usize,
    cap: usize,
) -> Result<Vec<Vec<usize>>, BoundaryError> {
    let mut order: Vec<usize> = (0..sets.len()).collect();
    order.sort_by_key(|&j| sets[j].len());
    let mut found: Vec<Vec<usize>> = Vec::new();
    let mut nodes = 0usize;

    fn is_hitting(sets: &[Vec<usize>], chosen: &[bool]) -> bool {
        sets.iter().all(|s| s.iter().any(|&k| chosen[k]))
    }

    fn dfs(
        sets: &[Vec<usize>],
        order: &[usize],
        chosen: &mut Vec<bool>,
        found: &mut Vec<Vec<usize>>,
        nodes: &mut usize,
        cap: usize,
    ) -> Result<(), BoundaryError> {
        *nodes += 1;
        if *nodes > cap {
            return Err(BoundaryError::PatternCap(cap));
        }
        // smallest uncovered support in the given order
        let uncovered = order
            .iter()
            .copied()
            .find(|&j| !sets[j].iter().any(|&k| chosen[k]));
        let j = match uncovered {
            None => {
                let set: Vec<usize> = (0..chosen.len()).filter(|&k| chosen[k]).collect();
                // keep inclusion-minimal candidates only
                let minimal = set.iter().all(|&z| {
                    let mut reduced = chosen.clone();
                    reduced[z] = false;
                    !is_hitting(sets, &reduced)
                });
                if minimal && !found.contains(&set) {
                    found.push(set);
                }
                return Ok(());
            }
            Some(j) => j,
        };
        for &k in &sets[j] {
            if chosen[k] {
                continue;
            }
            chosen[k] = true;
            // a superset of a known hitting set cannot become minimal
            let dominated = found
                .iter()
                .any(|f| f.iter().all(|&z| chosen[z]));
            if !dominated {
                dfs(sets, order, chosen, found, nodes, cap)?;
            }
            chosen[k] = false;
        }
        Ok(())
    }

    let mut chosen = vec![false; n];
    dfs(sets, &order, &mut chosen, &mut found, &mut nodes, cap)?;
    found.sort();
    Ok(found)
}

/// One least-squares projection of a simplex vertex onto the equality
/// constraints, with the zero pattern pinned exactly and tiny negatives
/// from the projection rounded to zero.
fn refine_witness(lhs: &Mat, rhs: &[f64], point: &[f64], pattern: &[usize]) -> Vec<f64> {
    let rows = lhs.rows();
    let residual: Vec<f64> = lhs
        .matvec(point)
        .iter()
        .zip(rhs)
        .map(|(a, b)| a - b)
        .collect();
    let mut gram = Mat::zeros(rows, rows);
    for i in 0..rows {
        for j in 0..rows {
            gram.set(i, j, linalg::dot(lhs.row(i), lhs.row(j)));
        }
    }
    let mut out = point.to_vec();
    if let Some(lambda) = linalg::cholesky_solve(&gram, &residual) {
        let correction = lhs.tr_matvec(&lambda);
        for (o, c) in out.iter_mut().zip(&correction) {
            *o -= c;
        }
    }
    for &k in pattern {
        out[k] = 0.0;
    }
    for o in out.iter_mut() {
        if *o < 0.0 && *o > -WITNESS_TOL {
            *o = 0.0;
        }
    }
    out
}

/// Searches for a nonnegative solution of `lhs · x = rhs` by phase-one
/// simplex with Bland's rule. Returns `None` when the system is
/// infeasible at the pivot tolerance.
pub fn linear_feasibility(lhs: &Mat, rhs: &[f64]) -> Result<Option<Vec<f64>>, BoundaryError> {
    let tableau = Tableau::standard_form(lhs, rhs);
    match tableau.phase_one()? {
        Some(t) => Ok(Some(t.solution(lhs.cols()))),
        None => Ok(None),
    }
}

/// Maximizes `min_i x_i` over `lhs · x = rhs, x ≥ 0`, with the auxiliary
/// level capped at 1 so the program stays bounded. Returns the achieving
/// point and the level, or `None` when the class constraints themselves
/// are infeasible.
pub fn most_interior_point(
    lhs: &Mat,
    rhs: &[f64],
) -> Result<Option<(Vec<f64>, f64)>, BoundaryError> {
    let n = lhs.cols();
    let rows = lhs.rows();
    // variables: x (n), slack u (n) with x_i − u_i − s = 0, level s, cap t
    let total = 2 * n + 2;
    let s_col = 2 * n;
    let t_col = 2 * n + 1;
    let mut ext_rows: Vec<Vec<f64>> = Vec::with_capacity(rows + n + 1);
    let mut ext_rhs: Vec<f64> = Vec::with_capacity(rows + n + 1);
    for r in 0..rows {
        let mut row = vec![0.0; total];
        row[..n].copy_from_slice(lhs.row(r));
        ext_rows.push(row);
        ext_rhs.push(rhs[r]);
    }
    for i in 0..n {
        let mut row = vec![0.0; total];
        row[i] = 1.0;
        row[n + i] = -1.0;
        row[s_col] = -1.0;
        ext_rows.push(row);
        ext_rhs.push(0.0);
    }
    let mut cap_row = vec![0.0; total];
    cap_row[s_col] = 1.0;
    cap_row[t_col] = 1.0;
    ext_rows.push(cap_row);
    ext_rhs.push(1.0);

    let ext = Mat::from_rows(&ext_rows);
    let tableau = Tableau::standard_form(&ext, &ext_rhs);
    let feasible = match tableau.phase_one()? {
        Some(t) => t,
        None => return Ok(None),
    };
    let mut objective = vec![0.0; total];
    objective[s_col] = -1.0; // maximize s
    let optimal = feasible.phase_two(&objective)?;
    let full = optimal.solution(total);
    let x = full[..n].to_vec();
    let level = full[s_col];
    Ok(Some((x, level)))
}

/// Dense simplex tableau in standard form with Bland's anti-cycling rule.
struct Tableau {
    /// Constraint rows, basis columns kept as unit vectors.
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    /// Structural variable count (artificials live beyond this).
    structural: usize,
}

impl Tableau {
    /// Prepares `lhs·x = rhs, x ≥ 0` with nonnegative right-hand sides
    /// and one artificial variable per row as the starting basis.
    fn standard_form(lhs: &Mat, rhs: &[f64]) -> Tableau {
        let m = lhs.rows();
        let n = lhs.cols();
        let mut rows = Vec::with_capacity(m);
        let mut b = Vec::with_capacity(m);
        for r in 0..m {
            let mut row: Vec<f64> = lhs.row(r).to_vec();
            let mut rhs_r = rhs[r];
            if rhs_r < 0.0 {
                for v in row.iter_mut() {
                    *v = -*v;
                }
                rhs_r = -rhs_r;
            }
            row.extend(std::iter::repeat(0.0).take(m));
            row[n + r] = 1.0;
            rows.push(row);
            b.push(rhs_r);
        }
        Tableau {
            rows,
            rhs: b,
            basis: (0..m).map(|r| n + r).collect(),
            structural: n,
        }
    }

    /// Minimizes the sum of artificials. Returns the feasible tableau
    /// with artificials driven out (redundant rows dropped), or `None`
    /// when the optimum is positive.
    fn phase_one(mut self) -> Result<Option<Tableau>, BoundaryError> {
        let total = self.structural + self.rows.len();
        let mut cost = vec![0.0; total];
        for j in self.structural..total {
            cost[j] = 1.0;
        }
        let value = self.minimize(&cost)?;
        let scale = 1.0 + self.rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if value > PIVOT_TOL * scale {
            return Ok(None);
        }
        // drive remaining artificial basics out or drop their rows
        let mut r = 0;
        while r < self.rows.len() {
            if self.basis[r] >= self.structural {
                let pivot_col = (0..self.structural)
                    .find(|&j| self.rows[r][j].abs() > PIVOT_TOL);
                match pivot_col {
                    Some(j) => self.pivot(r, j),
                    None => {
                        self.rows.remove(r);
                        self.rhs.remove(r);
                        self.basis.remove(r);
                        continue;
                    }
                }
            }
            r += 1;
        }
        // artificial columns are dead from here on
        for row in self.rows.iter_mut() {
            row.truncate(self.structural);
        }
        Ok(Some(self))
    }

    /// Minimizes a structural objective from a feasible basis.
    fn phase_two(mut self, objective: &[f64]) -> Result<Tableau, BoundaryError> {
        self.minimize(objective)?;
        Ok(self)
    }

    fn minimize(&mut self, cost: &[f64]) -> Result<f64, BoundaryError> {
        let width = self.rows.first().map_or(0, Vec::len);
        let mut iterations = 0usize;
        loop {
            iterations += 1;
            if iterations > 200_000 {
                return Err(BoundaryError::Simplex(
                    "iteration budget exhausted".into(),
                ));
            }
            // reduced costs under the current basis
            let mut reduced: Vec<f64> = cost[..width].to_vec();
            for (r, &b) in self.basis.iter().enumerate() {
                let cb = cost[b];
                if cb != 0.0 {
                    for j in 0..width {
                        reduced[j] -= cb * self.rows[r][j];
                    }
                }
            }
            // Bland: smallest improving index enters
            let entering = (0..width).find(|&j| reduced[j] < -PIVOT_TOL);
            let j = match entering {
                None => {
                    let value = self
                        .basis
                        .iter()
                        .enumerate()
                        .map(|(r, &b)| cost[b] * self.rhs[r])
                        .sum();
                    return Ok(value);
                }
                Some(j) => j,
            };
            // ratio test; smallest basis index breaks ties
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.rows.len() {
                let a = self.rows[r][j];
                if a > PIVOT_TOL {
                    let ratio = self.rhs[r] / a;
                    match leave {
                        None => leave = Some((r, ratio)),
                        Some((lr, lratio)) => {
                            if ratio < lratio - 1e-15
                                || ((ratio - lratio).abs() <= 1e-15
                                    && self.basis[r] < self.basis[lr])
                            {
                                leave = Some((r, ratio));
                            }
                        }
                    }
                }
            }
            let r = match leave {
                None => {
                    return Err(BoundaryError::Simplex(
                        "objective unbounded below".into(),
                    ))
                }
                Some((r, _)) => r,
            };
            self.pivot(r, j);
        }
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let piv = self.rows[r][j];
        for v in self.rows[r].iter_mut() {
            *v /= piv;
        }
        self.rhs[r] /= piv;
        for rr in 0..self.rows.len() {
            if rr == r {
                continue;
            }
            let factor = self.rows[rr][j];
            if factor != 0.0 {
                let pivot_row = self.rows[r].clone();
                for (v, p) in self.rows[rr].iter_mut().zip(&pivot_row) {
                    *v -= factor * p;
                }
                self.rhs[rr] -= factor * self.rhs[r];
            }
        }
        self.basis[r] = j;
    }

    fn solution(&self, n: usize) -> Vec<f64> {
        let mut x = vec![0.0; n];
        for (r, &b) in self.basis.iter().enumerate() {
            if b < n {
                x[b] = self.rhs[r].max(0.0);
            }
        }
        x
    }
}
