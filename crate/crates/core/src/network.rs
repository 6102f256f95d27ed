//! Network representation, text format, and structural validation.
//!
//! A network is the pair of matrices `(A, B)`: `A` holds the rate
//! constants (entry `a_ij` drives the reaction from complex `j` to
//! complex `i`), the columns of `B` are the complex coefficient vectors
//! over the species, and a power-law kinetics fixes θ. The structural
//! hypotheses checked by [`validate_network`] are the ones under which
//! the equilibrium and stability machinery in the sibling modules
//! applies:
//!
//! 1. the reaction graph (edge `j → i` iff `a_ij > 0`, `i ≠ j`) is
//!    strongly connected;
//! 2. `B` has full column rank;
//! 3. no species row of `B` vanishes;
//! 4. every entry of `B` is 0 or ≥ 1.

use crate::kinetics::{Kinetics, KineticsError};
use crate::linalg::{self, Mat};
use serde::Serialize;
use std::collections::HashMap;
use std::fmt::Write as _;
use thiserror::Error;

/// Relative pivot tolerance for the column-rank decision on `B`.
pub const RANK_REL_TOL: f64 = 1e-9;
/// Pairwise orthonormality required of computed bases.
pub const ORTHO_TOL: f64 = 1e-12;
/// Residual below which a candidate basis vector counts as dependent.
pub const BASIS_DROP_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum NetError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: duplicate name `{name}`")]
    DuplicateName { line: usize, name: String },
    #[error("line {line}: reference to undeclared name `{name}`")]
    UnknownName { line: usize, name: String },
    #[error("line {line}: coefficient {value} for `{name}` must be 0 or at least 1")]
    CoefficientBelowOne { line: usize, name: String, value: f64 },
    #[error("line {line}: negative coefficient {value} for `{name}`")]
    NegativeCoefficient { line: usize, name: String, value: f64 },
    #[error("line {line}: rate must be a positive finite real, got {value}")]
    NonPositiveRate { line: usize, value: f64 },
    #[error("line {line}: duplicate rate for {from} -> {to}")]
    DuplicateRate { line: usize, from: String, to: String },
    #[error("line {line}: {source}")]
    BadKinetics {
        line: usize,
        #[source]
        source: KineticsError,
    },
    #[error("network declares no species")]
    NoSpecies,
    #[error("network declares no complexes")]
    NoComplexes,
    #[error("inconsistent network shapes: {0}")]
    Shape(String),
    #[error("negative entry {value} at ({row}, {col}) of the {which} matrix")]
    NegativeEntry {
        which: &'static str,
        row: usize,
        col: usize,
        value: f64,
    },
    #[error("complex matrix is rank deficient at tolerance (rank {rank} < {expected})")]
    RankDeficient { rank: usize, expected: usize },
    #[error("state component {index} is negative ({value})")]
    NegativeComponent { index: usize, value: f64 },
}

/// A mass-action network over named species.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    /// Species names; position fixes the state index.
    pub species_names: Vec<String>,
    /// Complex names; position fixes the column index in `complexes`.
    pub complex_names: Vec<String>,
    /// m×m rate constants; `rates[i][j]` drives complex j → complex i.
    /// The diagonal is accepted in input but ignored by the dynamics.
    pub rates: Mat,
    /// n×m complex coefficients; column j is the vector of complex j.
    pub complexes: Mat,
    /// The kinetics map θ(y) = y^p.
    pub kinetics: Kinetics,
}

impl Network {
    /// Number of species (state dimension).
    pub fn num_species(&self) -> usize {
        self.complexes.rows()
    }

    /// Number of complexes (columns of the complex matrix).
    pub fn num_complexes(&self) -> usize {
        self.complexes.cols()
    }

    pub fn from_parts(
        species_names: Vec<String>,
        complex_names: Vec<String>,
        rates: Mat,
        complexes: Mat,
        kinetics: Kinetics,
    ) -> Result<Self, NetError> {
        let n = species_names.len();
        let m = complex_names.len();
        if complexes.rows() != n || complexes.cols() != m {
            return Err(NetError::Shape(format!(
                "complex matrix is {}x{}, expected {}x{}",
                complexes.rows(),
                complexes.cols(),
                n,
                m
            )));
        }
        if rates.rows() != m || rates.cols() != m {
            return Err(NetError::Shape(format!(
                "rate matrix is {}x{}, expected {}x{}",
                rates.rows(),
                rates.cols(),
                m,
                m
            )));
        }
        if n == 0 {
            return Err(NetError::NoSpecies);
        }
        if m == 0 {
            return Err(NetError::NoComplexes);
        }
        for (which, mat) in [("rate", &rates), ("complex", &complexes)] {
            for i in 0..mat.rows() {
                for j in 0..mat.cols() {
                    let v = mat.at(i, j);
                    if !v.is_finite() || v < 0.0 {
                        return Err(NetError::NegativeEntry {
                            which,
                            row: i,
                            col: j,
                            value: v,
                        });
                    }
                }
            }
        }
        let mut seen = HashMap::new();
        for name in &species_names {
            if seen.insert(name.clone(), ()).is_some() {
                return Err(NetError::DuplicateName {
                    line: 0,
                    name: name.clone(),
                });
            }
        }
        let mut seen = HashMap::new();
        for name in &complex_names {
            if seen.insert(name.clone(), ()).is_some() {
                return Err(NetError::DuplicateName {
                    line: 0,
                    name: name.clone(),
                });
            }
        }
        Ok(Network {
            species_names,
            complex_names,
            rates,
            complexes,
            kinetics,
        })
    }

    /// Convenience constructor for programmatic instances: generates
    /// species names `X1..Xn` and complex names `c1..cm`.
    pub fn from_matrices(rates: Mat, complexes: Mat) -> Result<Self, NetError> {
        let species = (1..=complexes.rows()).map(|i| format!("X{i}")).collect();
        let names = (1..=complexes.cols()).map(|j| format!("c{j}")).collect();
        Network::from_parts(species, names, rates, complexes, Kinetics::mass_action())
    }

    pub fn species_index(&self, name: &str) -> Option<usize> {
        self.species_names.iter().position(|s| s == name)
    }
}

/// Outcome of checking the four structural hypotheses.
#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    /// Strong connectivity of the reaction graph.
    pub irreducible: bool,
    /// Column rank of the complex matrix at the configured tolerance.
    pub complex_rank: usize,
    /// Species rows of the complex matrix that vanish entirely.
    pub zero_rows: Vec<usize>,
    /// Entries of the complex matrix that are strictly between 0 and 1.
    pub sub_one_entries: Vec<SubOneEntry>,
    pub overall: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SubOneEntry {
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

/// Orthonormal bases for the reaction subspace (spanned by the pairwise
/// differences of complex vectors) and its orthogonal complement, whose
/// vectors are the conservation laws.
#[derive(Debug, Clone)]
pub struct StoichBasis {
    /// m−1 orthonormal vectors spanning the reaction subspace.
    pub reaction_basis: Vec<Vec<f64>>,
    /// n−m+1 orthonormal vectors spanning the conservation subspace.
    pub conservation_basis: Vec<Vec<f64>>,
}

impl StoichBasis {
    /// Inner products of `x` with each conservation vector.
    pub fn conservation_values(&self, x: &[f64]) -> Vec<f64> {
        self.conservation_basis
            .iter()
            .map(|v| linalg::dot(v, x))
            .collect()
    }

    /// Largest |⟨v, x⟩| over the conservation basis: how far `x` is from
    /// lying in the reaction subspace.
    pub fn conservation_component(&self, x: &[f64]) -> f64 {
        self.conservation_basis
            .iter()
            .map(|v| linalg::dot(v, x).abs())
            .fold(0.0, f64::max)
    }

    /// Largest |⟨d, x⟩| over the reaction basis: how far `x` is from
    /// lying in the conservation subspace.
    pub fn reaction_component(&self, x: &[f64]) -> f64 {
        self.reaction_basis
            .iter()
            .map(|v| linalg::dot(v, x).abs())
            .fold(0.0, f64::max)
    }
}

/// A stoichiometric compatibility class: the translate of the reaction
/// subspace through `anchor`, intersected with the nonnegative orthant,
/// identified by its conservation values.
#[derive(Debug, Clone, Serialize)]
pub struct ClassDescriptor {
    /// Inner products ⟨v, anchor⟩ over the conservation basis.
    pub conservation_values: Vec<f64>,
    /// A nonnegative point of the class.
    pub anchor: Vec<f64>,
}

/// Parses the line-oriented network format.
///
/// Grammar (UTF-8, `#` starts a comment, blank lines ignored):
///
/// ```text
/// species <name> <name> ...
/// complex <cname> = [<coeff>*]<species> + ...
/// rate <cname> -> <cname> : <positive real>
/// kinetics exponent <positive real>
/// ```
///
/// Species and complexes must be declared before use; declaration order
/// fixes state and column indices. An omitted coefficient means 1;
/// coefficients must be 0 or ≥ 1. Unspecified rates default to 0.
pub fn parse_network(text: &str) -> Result<Network, NetError> {
    let mut species: Vec<String> = Vec::new();
    let mut species_index: HashMap<String, usize> = HashMap::new();
    let mut complex_names: Vec<String> = Vec::new();
    let mut complex_index: HashMap<String, usize> = HashMap::new();
    let mut columns: Vec<Vec<f64>> = Vec::new();
    let mut rate_entries: Vec<(usize, usize, f64, usize)> = Vec::new(); // (target, source, value, line)
    let mut kinetics = Kinetics::mass_action();

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let content = content.trim();
        if content.is_empty() {
            continue;
        }
        let (keyword, rest) = match content.split_once(char::is_whitespace) {
            Some((k, r)) => (k, r.trim()),
            None => (content, ""),
        };
        match keyword {
            "species" => {
                if rest.is_empty() {
                    return Err(NetError::Syntax {
                        line,
                        msg: "species line lists no names".into(),
                    });
                }
                for name in rest.split_whitespace() {
                    check_name(name, line)?;
                    if species_index.contains_key(name) {
                        return Err(NetError::DuplicateName {
                            line,
                            name: name.into(),
                        });
                    }
                    species_index.insert(name.to_string(), species.len());
                    species.push(name.to_string());
                }
            }
            "complex" => {
                let (name, formula) = rest.split_once('=').ok_or_else(|| NetError::Syntax {
                    line,
                    msg: "complex line needs `<name> = <terms>`".into(),
                })?;
                let name = name.trim();
                check_name(name, line)?;
                if complex_index.contains_key(name) {
                    return Err(NetError::DuplicateName {
                        line,
                        name: name.into(),
                    });
                }
                let mut col = vec![0.0; species.len()];
                let formula = formula.trim();
                if formula.is_empty() {
                    return Err(NetError::Syntax {
                        line,
                        msg: "complex has no terms".into(),
                    });
                }
                for term in formula.split('+') {
                    let term = term.trim();
                    let (coeff, sp) = match term.split_once('*') {
                        Some((c, s)) => {
                            let value = parse_number(c.trim(), line)?;
                            (value, s.trim())
                        }
                        None => (1.0, term),
                    };
                    let idx = *species_index.get(sp).ok_or_else(|| NetError::UnknownName {
                        line,
                        name: sp.into(),
                    })?;
                    if coeff < 0.0 {
                        return Err(NetError::NegativeCoefficient {
                            line,
                            name: sp.into(),
                            value: coeff,
                        });
                    }
                    if coeff > 0.0 && coeff < 1.0 {
                        return Err(NetError::CoefficientBelowOne {
                            line,
                            name: sp.into(),
                            value: coeff,
                        });
                    }
                    col[idx] += coeff;
                }
                complex_index.insert(name.to_string(), complex_names.len());
                complex_names.push(name.to_string());
                columns.push(col);
            }
            "rate" => {
                let (from, tail) = rest.split_once("->").ok_or_else(|| NetError::Syntax {
                    line,
                    msg: "rate line needs `<from> -> <to> : <value>`".into(),
                })?;
                let (to, value) = tail.split_once(':').ok_or_else(|| NetError::Syntax {
                    line,
                    msg: "rate line needs `: <value>`".into(),
                })?;
                let from = from.trim();
                let to = to.trim();
                let source = *complex_index
                    .get(from)
                    .ok_or_else(|| NetError::UnknownName {
                        line,
                        name: from.into(),
                    })?;
                let target = *complex_index.get(to).ok_or_else(|| NetError::UnknownName {
                    line,
                    name: to.into(),
                })?;
                let value = parse_number(value.trim(), line)?;
                if !(value > 0.0) {
                    return Err(NetError::NonPositiveRate { line, value });
                }
                if rate_entries
                    .iter()
                    .any(|&(t, s, _, _)| t == target && s == source)
                {
                    return Err(NetError::DuplicateRate {
                        line,
                        from: from.into(),
                        to: to.into(),
                    });
                }
                rate_entries.push((target, source, value, line));
            }
            "kinetics" => {
                let value = rest
                    .strip_prefix("exponent")
                    .map(str::trim)
                    .ok_or_else(|| NetError::Syntax {
                        line,
                        msg: "kinetics line needs `exponent <value>`".into(),
                    })?;
                let p = parse_number(value, line)?;
                kinetics =
                    Kinetics::new(p).map_err(|source| NetError::BadKinetics { line, source })?;
            }
            other => {
                return Err(NetError::Syntax {
                    line,
                    msg: format!("unknown directive `{other}`"),
                });
            }
        }
    }

    if species.is_empty() {
        return Err(NetError::NoSpecies);
    }
    if complex_names.is_empty() {
        return Err(NetError::NoComplexes);
    }
    let n = species.len();
    let m = complex_names.len();
    let mut complexes = Mat::zeros(n, m);
    for (j, col) in columns.iter().enumerate() {
        // species may have been declared after earlier complexes; missing
        // tail entries are zero
        for (i, &v) in col.iter().enumerate() {
            complexes.set(i, j, v);
        }
    }
    let mut rates = Mat::zeros(m, m);
    for (target, source, value, _) in rate_entries {
        rates.set(target, source, value);
    }
    Network::from_parts(species, complex_names, rates, complexes, kinetics)
}

fn check_name(name: &str, line: usize) -> Result<(), NetError> {
    let mut chars = name.chars();
    let ok = match chars.next() {
        Some(c) => {
            (c.is_alphabetic() || c == '_') && chars.all(|c| c.is_alphanumeric() || c == '_')
        }
        None => false,
    };
    if ok {
        Ok(())
    } else {
        Err(NetError::Syntax {
            line,
            msg: format!("invalid name `{name}`"),
        })
    }
}

fn parse_number(s: &str, line: usize) -> Result<f64, NetError> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(NetError::Syntax {
            line,
            msg: format!("expected a finite real, got `{s}`"),
        }),
    }
}

/// Emits the same grammar [`parse_network`] reads; parsing the output
/// reproduces every field of the network.
pub fn serialize_network(net: &Network) -> String {
    let mut out = String::new();
    let mut species_line = String::from("species");
    for name in &net.species_names {
        let _ = write!(species_line, " {name}");
    }
    out.push_str(&species_line);
    out.push('\n');
    for (j, cname) in net.complex_names.iter().enumerate() {
        let mut terms: Vec<String> = Vec::new();
        for (i, sname) in net.species_names.iter().enumerate() {
            let coeff = net.complexes.at(i, j);
            if coeff == 0.0 {
                continue;
            }
            if coeff == 1.0 {
                terms.push(sname.clone());
            } else {
                terms.push(format!("{coeff}*{sname}"));
            }
        }
        let _ = writeln!(out, "complex {cname} = {}", terms.join(" + "));
    }
    for j in 0..net.num_complexes() {
        for i in 0..net.num_complexes() {
            let v = net.rates.at(i, j);
            if v > 0.0 {
                let _ = writeln!(
                    out,
                    "rate {} -> {} : {}",
                    net.complex_names[j], net.complex_names[i], v
                );
            }
        }
    }
    let _ = writeln!(out, "kinetics exponent {}", net.kinetics.exponent());
    out
}

/// Checks the four structural hypotheses and reports each separately.
/// Pure and idempotent; failures are report fields, never errors.
pub fn validate_network(net: &Network) -> ValidationReport {
    validate_network_with(net, RANK_REL_TOL)
}

/// [`validate_network`] with a caller-chosen relative rank tolerance.
pub fn validate_network_with(net: &Network, rank_rel_tol: f64) -> ValidationReport {
    let n = net.num_species();
    let m = net.num_complexes();
    let irreducible = strongly_connected(&net.rates);
    let complex_rank = linalg::rank(&net.complexes, rank_rel_tol);
    let mut zero_rows = Vec::new();
    for i in 0..n {
        if (0..m).all(|j| net.complexes.at(i, j) == 0.0) {
            zero_rows.push(i);
        }
    }
    let mut sub_one_entries = Vec::new();
    for i in 0..n {
        for j in 0..m {
            let v = net.complexes.at(i, j);
            if v > 0.0 && v < 1.0 {
                sub_one_entries.push(SubOneEntry {
                    row: i,
                    col: j,
                    value: v,
                });
            }
        }
    }
    let overall =
        irreducible && complex_rank == m && zero_rows.is_empty() && sub_one_entries.is_empty();
    ValidationReport {
        irreducible,
        complex_rank,
        zero_rows,
        sub_one_entries,
        overall,
    }
}

/// Strong connectivity of the reaction graph by two reachability sweeps:
/// every node reachable from node 0 along edges, and node 0 reachable
/// from every node (a sweep over the reversed graph).
fn strongly_connected(rates: &Mat) -> bool {
    let m = rates.rows();
    if m <= 1 {
        return true;
    }
    let reaches = |reverse: bool| -> bool {
        let mut seen = vec![false; m];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(j) = stack.pop() {
            for i in 0..m {
                if i == j || seen[i] {
                    continue;
                }
                // edge source -> target iff rates[target][source] > 0
                let connected = if reverse {
                    rates.at(j, i) > 0.0
                } else {
                    rates.at(i, j) > 0.0
                };
                if connected {
                    seen[i] = true;
                    count += 1;
                    stack.push(i);
                }
            }
        }
        count == m
    };
    reaches(false) && reaches(true)
}

/// Orthonormal bases of the reaction subspace and its complement.
///
/// The reaction subspace is spanned by the differences `b_1 − b_j`; for a
/// validated network it has dimension m−1 exactly, and the deterministic
/// Gram-Schmidt sweep below recovers that count or reports rank trouble.
pub fn stoich_basis(net: &Network) -> Result<StoichBasis, NetError> {
    let n = net.num_species();
    let m = net.num_complexes();
    let first = net.complexes.col(0);
    let diffs: Vec<Vec<f64>> = (1..m)
        .map(|j| linalg::sub(&first, &net.complexes.col(j)))
        .collect();
    let reaction_basis = linalg::orthonormalize(&diffs, BASIS_DROP_TOL);
    if reaction_basis.len() != m - 1 {
        return Err(NetError::RankDeficient {
            rank: reaction_basis.len() + 1,
            expected: m,
        });
    }
    let conservation_basis = linalg::orthonormal_complement(&reaction_basis, n, BASIS_DROP_TOL);
    if reaction_basis.len() + conservation_basis.len() != n {
        return Err(NetError::RankDeficient {
            rank: reaction_basis.len() + conservation_basis.len(),
            expected: n,
        });
    }
    Ok(StoichBasis {
        reaction_basis,
        conservation_basis,
    })
}

/// The class through a nonnegative point `p`: its conservation values
/// and `p` itself as anchor.
pub fn class_of(net: &Network, p: &[f64]) -> Result<ClassDescriptor, NetError> {
    if p.len() != net.num_species() {
        return Err(NetError::Shape(format!(
            "point has dimension {}, expected {}",
            p.len(),
            net.num_species()
        )));
    }
    for (i, &v) in p.iter().enumerate() {
        if !(v >= 0.0) {
            return Err(NetError::NegativeComponent { index: i, value: v });
        }
    }
    let basis = stoich_basis(net)?;
    Ok(ClassDescriptor {
        conservation_values: basis.conservation_values(p),
        anchor: p.to_vec(),
    })
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    /// Two species, two complexes, unit rates both ways: the textbook
    /// instance whose positive classes are horizontal lines x₂ = r.
    pub fn two_species_line() -> Network {
        let rates = Mat::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        let complexes = Mat::from_rows(&[vec![1.0, 2.0], vec![1.0, 1.0]]);
        Network::from_matrices(rates, complexes).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const EXAMPLE_FILE: &str = "\
# two species, two complexes, unit rates
species X1 X2
complex c1 = X1 + X2
complex c2 = 2*X1 + X2
rate c1 -> c2 : 1
rate c2 -> c1 : 1
";

    const MCKEITHAN_N0: &str = "\
species T M C0
complex bound = T + M
complex stage0 = C0
rate bound -> stage0 : 1
rate stage0 -> bound : 1
";

    #[test]
    fn parses_two_complex_file() {
        let net = parse_network(MCKEITHAN_N0).unwrap();
        assert_eq!(net.num_species(), 3);
        assert_eq!(net.num_complexes(), 2);
        assert_eq!(net.complexes.col(0), vec![1.0, 1.0, 0.0]);
        assert_eq!(net.complexes.col(1), vec![0.0, 0.0, 1.0]);
        assert_eq!(net.rates.at(1, 0), 1.0);
        assert_eq!(net.rates.at(0, 1), 1.0);
        assert_eq!(net.kinetics.exponent(), 1.0);
    }

    #[test]
    fn parses_coefficient_syntax() {
        let net = parse_network(EXAMPLE_FILE).unwrap();
        assert_eq!(net.complexes.at(0, 0), 1.0);
        assert_eq!(net.complexes.at(0, 1), 2.0);
        assert_eq!(net.complexes.at(1, 0), 1.0);
        assert_eq!(net.complexes.at(1, 1), 1.0);
        assert_eq!(net.rates.at(0, 1), 1.0);
        assert_eq!(net.rates.at(1, 0), 1.0);
    }

    #[test]
    fn rejects_fractional_coefficient() {
        let text = "species X1\ncomplex c1 = 0.5*X1\n";
        match parse_network(text) {
            Err(NetError::CoefficientBelowOne { line, value, .. }) => {
                assert_eq!(line, 2);
                assert_eq!(value, 0.5);
            }
            other => panic!("expected coefficient error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            parse_network("species X X\n"),
            Err(NetError::DuplicateName { .. })
        ));
        assert!(matches!(
            parse_network("species X\ncomplex c = Y\n"),
            Err(NetError::UnknownName { .. })
        ));
        assert!(matches!(
            parse_network("species X\ncomplex c = X\nrate c -> c : -2\n"),
            Err(NetError::NonPositiveRate { .. })
        ));
        assert!(matches!(
            parse_network("species X\ncomplex c = X\nrate c -> c : 1\nrate c -> c : 2\n"),
            Err(NetError::DuplicateRate { .. })
        ));
        let err = parse_network("species X\nbogus line\n").unwrap_err();
        match err {
            NetError::Syntax { line, .. } => assert_eq!(line, 2),
            other => panic!("expected syntax error, got {other:?}"),
        }
        assert!(matches!(
            parse_network("species X\ncomplex c = -1*X\n"),
            Err(NetError::NegativeCoefficient { .. })
        ));
        assert!(matches!(
            parse_network("species X\ncomplex c = X\nkinetics exponent 0\n"),
            Err(NetError::BadKinetics { .. })
        ));
    }

    #[test]
    fn validation_passes_on_good_instances() {
        let report = validate_network(&parse_network(MCKEITHAN_N0).unwrap());
        assert!(report.irreducible);
        assert_eq!(report.complex_rank, 2);
        assert!(report.zero_rows.is_empty());
        assert!(report.sub_one_entries.is_empty());
        assert!(report.overall);
    }

    #[test]
    fn identity_rate_matrix_is_reducible() {
        // off-diagonals all zero: no edges at all
        let rates = Mat::identity(2);
        let complexes = Mat::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]);
        let net = Network::from_matrices(rates, complexes).unwrap();
        let report = validate_network(&net);
        assert!(!report.irreducible);
        assert!(!report.overall);
    }

    #[test]
    fn zero_row_fails_validation() {
        let rates = Mat::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        let complexes = Mat::from_rows(&[vec![1.0, 2.0], vec![0.0, 0.0]]);
        let net = Network::from_matrices(rates, complexes).unwrap();
        let report = validate_network(&net);
        assert_eq!(report.zero_rows, vec![1]);
        assert!(!report.overall);
    }

    #[test]
    fn sub_one_entry_reported_for_programmatic_networks() {
        let rates = Mat::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        let complexes = Mat::from_rows(&[vec![1.0, 0.5], vec![1.0, 1.0]]);
        let net = Network::from_matrices(rates, complexes).unwrap();
        let report = validate_network(&net);
        assert_eq!(report.sub_one_entries.len(), 1);
        assert_eq!(report.sub_one_entries[0].value, 0.5);
        assert!(!report.overall);
    }

    #[test]
    fn basis_of_two_species_line() {
        let net = fixtures::two_species_line();
        let basis = stoich_basis(&net).unwrap();
        assert_eq!(basis.reaction_basis.len(), 1);
        assert_eq!(basis.conservation_basis.len(), 1);
        // reaction subspace is the x1 axis, conservation the x2 axis
        assert_relative_eq!(basis.reaction_basis[0][0].abs(), 1.0, epsilon = 1e-12);
        assert!(basis.reaction_basis[0][1].abs() < 1e-12);
        assert_relative_eq!(basis.conservation_basis[0][1].abs(), 1.0, epsilon = 1e-12);
        // dimensions always sum to the state dimension
        assert_eq!(
            basis.reaction_basis.len() + basis.conservation_basis.len(),
            net.num_species()
        );
    }

    #[test]
    fn basis_vectors_are_mutually_orthonormal() {
        let net = parse_network(MCKEITHAN_N0).unwrap();
        let basis = stoich_basis(&net).unwrap();
        let all: Vec<&Vec<f64>> = basis
            .reaction_basis
            .iter()
            .chain(basis.conservation_basis.iter())
            .collect();
        for (i, u) in all.iter().enumerate() {
            assert_relative_eq!(linalg::norm2(u), 1.0, epsilon = 1e-12);
            for v in all.iter().skip(i + 1) {
                assert!(linalg::dot(u, v).abs() < ORTHO_TOL);
            }
        }
        // complex differences have no conservation component
        let d = linalg::sub(&net.complexes.col(0), &net.complexes.col(1));
        assert!(basis.conservation_component(&d) < 1e-10 * linalg::norm2(&d));
    }

    #[test]
    fn conservation_laws_of_proofreading_shape() {
        // totals T+C0 and M+C0 are conserved: both generating vectors lie
        // in the span of the conservation basis
        let net = parse_network(MCKEITHAN_N0).unwrap();
        let basis = stoich_basis(&net).unwrap();
        for gen in [vec![1.0, 0.0, 1.0], vec![0.0, 1.0, 1.0]] {
            assert!(basis.reaction_component(&gen) < 1e-10);
        }
    }

    #[test]
    fn class_of_reports_conservation_values() {
        let net = fixtures::two_species_line();
        let cls = class_of(&net, &[0.3, 2.0]).unwrap();
        assert_eq!(cls.conservation_values.len(), 1);
        assert_relative_eq!(cls.conservation_values[0].abs(), 2.0, epsilon = 1e-12);

        let zero = class_of(&net, &[0.0, 0.0]).unwrap();
        assert!(zero.conservation_values.iter().all(|v| v.abs() < 1e-15));

        assert!(matches!(
            class_of(&net, &[-0.1, 1.0]),
            Err(NetError::NegativeComponent { index: 0, .. })
        ));
    }

    #[test]
    fn validation_is_idempotent() {
        let net = parse_network(MCKEITHAN_N0).unwrap();
        let a = validate_network(&net);
        let b = validate_network(&net);
        assert_eq!(a.overall, b.overall);
        assert_eq!(a.complex_rank, b.complex_rank);
        assert_eq!(a.irreducible, b.irreducible);
    }

    fn coeff_strategy() -> impl Strategy<Value = f64> {
        prop_oneof![
            3 => Just(0.0),
            3 => Just(1.0),
            2 => Just(2.0),
            1 => Just(1.5),
            1 => Just(3.0),
        ]
    }

    prop_compose! {
        fn small_network()(n in 1usize..5, m in 1usize..5)
            (entries in proptest::collection::vec(coeff_strategy(), (5 * 5) as usize),
             rate_bits in proptest::collection::vec(0u8..3, (5 * 5) as usize),
             exponent in prop_oneof![Just(1.0), Just(0.5), Just(2.0)],
             n in Just(n), m in Just(m))
            -> Network {
            let mut complexes = Mat::zeros(n, m);
            for i in 0..n {
                for j in 0..m {
                    complexes.set(i, j, entries[i * 5 + j]);
                }
            }
            // keep the grammar representable: every complex needs a term
            for j in 0..m {
                if (0..n).all(|i| complexes.at(i, j) == 0.0) {
                    complexes.set(j % n, j, 1.0);
                }
            }
            let mut rates = Mat::zeros(m, m);
            for i in 0..m {
                for j in 0..m {
                    match rate_bits[i * 5 + j] {
                        1 => rates.set(i, j, 0.75),
                        2 => rates.set(i, j, 2.5),
                        _ => {}
                    }
                }
            }
            let species = (0..n).map(|i| format!("S{i}")).collect();
            let names = (0..m).map(|j| format!("K{j}")).collect();
            Network::from_parts(species, names, rates, complexes,
                                Kinetics::new(exponent).unwrap()).unwrap()
        }
    }

    proptest! {
        #[test]
        fn serialize_parse_round_trip(net in small_network()) {
            let text = serialize_network(&net);
            let back = parse_network(&text).unwrap();
            prop_assert_eq!(back.species_names, net.species_names);
            prop_assert_eq!(back.complex_names, net.complex_names);
            prop_assert_eq!(back.kinetics, net.kinetics);
            prop_assert_eq!(back.complexes, net.complexes);
            prop_assert_eq!(back.rates, net.rates);
        }
    }
}
