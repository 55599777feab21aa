//! Assemble the nonzero spectrum of the nonlocal operator: certified real
//! roots of the secular series (simple eigenvalues), plus the decision table
//! at each distinct Dirichlet eigenvalue Λ with cluster dimension d_n:
//!
//! * F and G both nonvanishing on the cluster: multiplicity d_n − 1
//!   (for d_n = 1 this means Λ is not an eigenvalue);
//! * exactly one of F, G vanishing on the cluster: multiplicity d_n;
//! * both vanishing: multiplicity d_n when E(Λ) ≠ 0, d_n + 1 when E(Λ) = 0.
//!
//! The table is discontinuous in the vanishing flags, so only structurally
//! proven zeros select a branch; unprovable near-zeros mark the report
//! indeterminate instead of silently choosing.

use serde::Serialize;

use crate::basis::EigenBasis;
use crate::error::{Error, Result};
use crate::measure::JumpMeasure;
use crate::roots::{real_roots, RootCandidate};
use crate::secular::{SecularFunction, ZeroFlag};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    ERoot,
    DirichletRule,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Characterization {
    Complete,
    EigenvaluesOnly,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportedEigenvalue {
    pub re: f64,
    pub im: f64,
    pub multiplicity: usize,
    pub provenance: Provenance,
    /// Set when the multiplicity could be one higher (E(Λ) indistinguishable
    /// from zero within the certified error).
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub multiplicity_uncertain: bool,
}

/// A value whose classification could not be certified, with the reason.
#[derive(Debug, Clone, Serialize)]
pub struct Indeterminacy {
    pub value: f64,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    pub lambda0: f64,
    pub lambda1: f64,
    pub eigenvalues: Vec<ReportedEigenvalue>,
    pub gap: f64,
    pub flag: Characterization,
    pub indeterminate: Vec<Indeterminacy>,
}

impl SpectrumReport {
    pub fn is_indeterminate(&self) -> bool {
        !self.indeterminate.is_empty()
    }
}

/// Compute the spectrum report for all eigenvalues above `search_floor`.
pub fn spectrum_report(
    basis: &EigenBasis,
    measure: &JumpMeasure,
    search_floor: f64,
) -> Result<SpectrumReport> {
    let ef = SecularFunction::build(basis, measure)?;
    spectrum_report_with(basis, &ef, search_floor)
}

/// Variant reusing an already-built secular function.
pub fn spectrum_report_with(
    basis: &EigenBasis,
    ef: &SecularFunction,
    search_floor: f64,
) -> Result<SpectrumReport> {
    if !(search_floor < basis.lambda0()) {
        return Err(Error::InvalidArgument(format!(
            "search floor {search_floor} must lie below lambda0 {}",
            basis.lambda0()
        )));
    }
    if basis.lambda_omitted_sup() >= search_floor {
        return Err(Error::InvalidArgument(format!(
            "cutoff {} too small: omitted eigenvalues reach {:.6e}, above the floor {:.6e}",
            basis.cutoff(),
            basis.lambda_omitted_sup(),
            search_floor
        )));
    }

    let mut eigenvalues: Vec<ReportedEigenvalue> = Vec::new();
    let mut indeterminate: Vec<Indeterminacy> = Vec::new();

    // (a) certified simple eigenvalues from roots of E, excluding retained
    // Dirichlet values (those are handled by the rule below)
    let scan = real_roots(ef, search_floor, 0.0)?;
    let near = 1e-6 * basis.lambda0().abs();
    let retained = ef.cluster_values_in(search_floor - near, 0.0);
    let is_dirichlet = |x: f64| retained.iter().any(|&v| (v - x).abs() <= near);
    for r in &scan.roots {
        if is_dirichlet(r.value) {
            continue;
        }
        eigenvalues.push(ReportedEigenvalue {
            re: r.value,
            im: 0.0,
            multiplicity: 1,
            provenance: Provenance::ERoot,
            multiplicity_uncertain: false,
        });
    }
    for s in &scan.suspects {
        if is_dirichlet(s.value) {
            continue;
        }
        indeterminate.push(Indeterminacy {
            value: s.value,
            reason: format!(
                "sign change in [{:.9e}, {:.9e}] not certified against the truncation error",
                s.bracket.0, s.bracket.1
            ),
        });
    }

    // (b) the decision table at each distinct eigenvalue above the floor
    for (ci, c) in ef.clusters().iter().enumerate() {
        if c.value <= search_floor {
            continue;
        }
        let dn = c.dirichlet_multiplicity;
        match (c.f_zero, c.g_zero) {
            (ZeroFlag::Indeterminate, _) | (_, ZeroFlag::Indeterminate) => {
                indeterminate.push(Indeterminacy {
                    value: c.value,
                    reason: "coefficient below 1e-10 with no structural proof of vanishing"
                        .into(),
                });
            }
            (ZeroFlag::NonZero, ZeroFlag::NonZero) => {
                if dn >= 2 {
                    push_rule(&mut eigenvalues, c.value, dn - 1, false);
                }
                // d_n = 1: not an eigenvalue
            }
            (ZeroFlag::Zero, ZeroFlag::NonZero) | (ZeroFlag::NonZero, ZeroFlag::Zero) => {
                push_rule(&mut eigenvalues, c.value, dn, false);
            }
            (ZeroFlag::Zero, ZeroFlag::Zero) => {
                let (v, err) = ef.evaluate_at_cluster(ci)?;
                if v.abs() > err {
                    push_rule(&mut eigenvalues, c.value, dn, false);
                } else {
                    // an eigenvalue either way; the extra eigenfunction with
                    // nonzero boundary value cannot be excluded
                    push_rule(&mut eigenvalues, c.value, dn, true);
                    indeterminate.push(Indeterminacy {
                        value: c.value,
                        reason: format!(
                            "E(Λ) = {v:.3e} within certified error {err:.3e} of zero; \
                             multiplicity may be {dn} or {}",
                            dn + 1
                        ),
                    });
                }
            }
        }
    }

    eigenvalues.sort_by(|a, b| b.re.partial_cmp(&a.re).unwrap());
    let gap = eigenvalues
        .first()
        .map(|e| e.re)
        .ok_or_else(|| Error::InvalidArgument("no eigenvalues above the search floor".into()))?;
    let flag = if ef.characterization_complete() {
        Characterization::Complete
    } else {
        Characterization::EigenvaluesOnly
    };
    Ok(SpectrumReport {
        lambda0: basis.lambda0(),
        lambda1: basis.lambda1(),
        eigenvalues,
        gap,
        flag,
        indeterminate,
    })
}

fn push_rule(out: &mut Vec<ReportedEigenvalue>, value: f64, mult: usize, uncertain: bool) {
    out.push(ReportedEigenvalue {
        re: value,
        im: 0.0,
        multiplicity: mult,
        provenance: Provenance::DirichletRule,
        multiplicity_uncertain: uncertain,
    });
}

/// The certified roots of a scan as plain values (test/CLI convenience).
pub fn certified_values(scan: &[RootCandidate]) -> Vec<f64> {
    scan.iter().map(|r| r.value).collect()
}
