//! The kinetic proofreading chain as a built-in network family.
//!
//! A receptor `T` binds a ligand `M` into an initial complex `C0`, which
//! is driven through `N` successive modification stages `C1 .. CN`; every
//! stage can dissociate back into free `T + M`. The species order is
//! `(T, M, C0, .., CN)` and the complexes are the bound pair `T + M`
//! followed by the singleton stages, so the network has `N + 3` species
//! and `N + 2` complexes. Both totals `T + ΣC_i` and `M + ΣC_i` are
//! conserved, and every positive class carries exactly one equilibrium,
//! which is interior.

use crate::kinetics::Kinetics;
use crate::linalg::Mat;
use crate::network::{class_of, ClassDescriptor, NetError, Network};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ProofreadError {
    #[error("rate {name}[{index}] must be positive, got {value}")]
    NonPositiveRate {
        name: &'static str,
        index: usize,
        value: f64,
    },
    #[error("{name} must list {expected} rates, got {got}")]
    WrongLength {
        name: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("totals must be positive, got receptor {0} and ligand {1}")]
    NonPositiveTotals(f64, f64),
    #[error(transparent)]
    Net(#[from] NetError),
}

/// Rate constants of a chain with `steps` modification stages.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProofreadingRates {
    /// Number of modification steps N (zero is allowed: pure binding).
    pub steps: usize,
    /// Association rate for `T + M -> C0`.
    pub association: f64,
    /// Dissociation rates, one per stage `C0 .. CN` (length N + 1).
    pub dissociation: Vec<f64>,
    /// Modification rates `C_{i} -> C_{i+1}` (length N).
    pub modification: Vec<f64>,
}

impl ProofreadingRates {
    pub fn new(
        steps: usize,
        association: f64,
        dissociation: Vec<f64>,
        modification: Vec<f64>,
    ) -> Result<Self, ProofreadError> {
        if dissociation.len() != steps + 1 {
            return Err(ProofreadError::WrongLength {
                name: "dissociation",
                expected: steps + 1,
                got: dissociation.len(),
            });
        }
        if modification.len() != steps {
            return Err(ProofreadError::WrongLength {
                name: "modification",
                expected: steps,
                got: modification.len(),
            });
        }
        if !(association > 0.0 && association.is_finite()) {
            return Err(ProofreadError::NonPositiveRate {
                name: "association",
                index: 0,
                value: association,
            });
        }
        for (name, list) in [
            ("dissociation", &dissociation),
            ("modification", &modification),
        ] {
            for (index, &value) in list.iter().enumerate() {
                if !(value > 0.0 && value.is_finite()) {
                    return Err(ProofreadError::NonPositiveRate { name, index, value });
                }
            }
        }
        Ok(ProofreadingRates {
            steps,
            association,
            dissociation,
            modification,
        })
    }
}

/// Builds the chain network; the result always passes validation.
pub fn build_network(rates: &ProofreadingRates) -> Result<Network, ProofreadError> {
    let n_steps = rates.steps;
    let n = n_steps + 3;
    let m = n_steps + 2;
    let mut species = vec!["T".to_string(), "M".to_string()];
    for i in 0..=n_steps {
        species.push(format!("C{i}"));
    }
    // the bound pair first, then one singleton complex per stage, named
    // after its species (separate namespace from the species names)
    let mut complex_names = vec!["TM".to_string()];
    for i in 0..=n_steps {
        complex_names.push(format!("C{i}"));
    }
    let mut complexes = Mat::zeros(n, m);
    complexes.set(0, 0, 1.0);
    complexes.set(1, 0, 1.0);
    for j in 1..m {
        complexes.set(j + 1, j, 1.0);
    }
    let mut rate_matrix = Mat::zeros(m, m);
    rate_matrix.set(1, 0, rates.association);
    for j in 1..m {
        rate_matrix.set(0, j, rates.dissociation[j - 1]);
    }
    for t in 2..m {
        rate_matrix.set(t, t - 1, rates.modification[t - 2]);
    }
    Ok(Network::from_parts(
        species,
        complex_names,
        rate_matrix,
        complexes,
        Kinetics::mass_action(),
    )?)
}

/// The positive class with receptor total `T + ΣC_i` and ligand total
/// `M + ΣC_i`, anchored at the unbound state.
pub fn class_for_totals(
    net: &Network,
    receptor_total: f64,
    ligand_total: f64,
) -> Result<ClassDescriptor, ProofreadError> {
    if !(receptor_total > 0.0 && ligand_total > 0.0) {
        return Err(ProofreadError::NonPositiveTotals(
            receptor_total,
            ligand_total,
        ));
    }
    let mut anchor = vec![0.0; net.num_species()];
    anchor[0] = receptor_total;
    anchor[1] = ligand_total;
    Ok(class_of(net, &anchor)?)
}
