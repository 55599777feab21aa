//! Dirichlet eigenbasis of L = Σ_j (½∂²_j + b_j ∂_j) on a product of unit
//! intervals, orthonormal in the reversible measure, together with the
//! coefficients F_n = ∫ φ_n dμ_rev.
//!
//! On a zero-drift factor the 1-d modes are √2 sin(nπx) with eigenvalue
//! −n²π²/2. On a factor with drift b they are √(2Z) e^{−bx} sin(nπx) with
//! eigenvalue −b²/2 − n²π²/2, where Z = ∫₀¹ e^{2bx} dx normalizes the factor's
//! reversible measure e^{2bx}dx/Z. Product eigenfunctions are tensor products
//! and product eigenvalues are sums over factors.
//!
//! Sign convention: every 1-d mode is taken with a positive leading Fourier
//! sine coefficient, i.e. proportional to +sin(nπx) near the left endpoint.

use std::f64::consts::PI;

use crate::domain::DomainSpec;
use crate::error::{Error, Result};
use crate::quad::{adaptive_simpson, adaptive_simpson_panels, Kahan};

/// Absolute tolerance for the per-factor normalizer/coefficient quadratures.
const FACTOR_QUAD_TOL: f64 = 1e-12;

/// One 1-d eigenmode of a single interval factor.
#[derive(Debug, Clone, Copy)]
pub struct Mode1d {
    pub index: u32,
    pub drift: f64,
    pub eigenvalue: f64,
    /// φ(x) = amplitude · e^{−bx} sin(nπx); amplitude = √(2Z).
    pub amplitude: f64,
    /// ∫ φ dμ_rev restricted to this factor.
    pub rev_coeff: f64,
    pub rev_coeff_exact_zero: bool,
    /// ∫ φ dx restricted to this factor (Lebesgue pairing).
    pub leb_coeff: f64,
    pub leb_coeff_exact_zero: bool,
}

impl Mode1d {
    pub fn eval(&self, x: f64) -> f64 {
        self.amplitude * (-self.drift * x).exp() * (self.index as f64 * PI * x).sin()
    }

    pub fn eval_d1(&self, x: f64) -> f64 {
        let b = self.drift;
        let w = self.index as f64 * PI;
        self.amplitude * (-b * x).exp() * (-b * (w * x).sin() + w * (w * x).cos())
    }

    pub fn eval_d2(&self, x: f64) -> f64 {
        let b = self.drift;
        let w = self.index as f64 * PI;
        self.amplitude
            * (-b * x).exp()
            * ((b * b - w * w) * (w * x).sin() - 2.0 * b * w * (w * x).cos())
    }

    /// Uniform bound on |φ| over (0,1), independent of the index.
    pub fn sup_bound(&self) -> f64 {
        self.amplitude * (-self.drift).exp().max(1.0)
    }
}

/// Per-factor eigendata shared by all modes of one axis.
#[derive(Debug, Clone)]
pub struct AxisModes {
    pub drift: f64,
    /// Z = ∫₀¹ e^{2bx} dx, the factor's reversible-measure normalizer.
    pub normalizer: f64,
    pub modes: Vec<Mode1d>,
}

impl AxisModes {
    fn build(drift: f64, cutoff: u32) -> Self {
        let b = drift;
        let normalizer = if b == 0.0 {
            1.0
        } else {
            // adaptive Simpson, cross-checked against (e^{2b}-1)/(2b) in tests
            adaptive_simpson(&|x| (2.0 * b * x).exp(), 0.0, 1.0, FACTOR_QUAD_TOL).0
        };
        let amplitude = (2.0 * normalizer).sqrt();
        let mut modes = Vec::with_capacity(cutoff as usize);
        for n in 1..=cutoff {
            let w = n as f64 * PI;
            let eigenvalue = -0.5 * b * b - 0.5 * w * w;
            let (rev_coeff, rev_zero, leb_coeff, leb_zero) = if b == 0.0 {
                if n % 2 == 1 {
                    let c = 2.0 * std::f64::consts::SQRT_2 / w;
                    (c, false, c, false)
                } else {
                    (0.0, true, 0.0, true)
                }
            } else {
                // one panel per half-arch of sin(nπx) so the oscillation is
                // never aliased away on the initial Simpson nodes
                let rev = adaptive_simpson_panels(
                    &|x| amplitude / normalizer * (b * x).exp() * (w * x).sin(),
                    0.0,
                    1.0,
                    FACTOR_QUAD_TOL,
                    2 * n as usize,
                )
                .0;
                let leb = adaptive_simpson_panels(
                    &|x| amplitude * (-b * x).exp() * (w * x).sin(),
                    0.0,
                    1.0,
                    FACTOR_QUAD_TOL,
                    2 * n as usize,
                )
                .0;
                // e^{±b} ≠ ±1 for b ≠ 0, so neither integral vanishes
                (rev, false, leb, false)
            };
            modes.push(Mode1d {
                index: n,
                drift: b,
                eigenvalue,
                amplitude,
                rev_coeff,
                rev_coeff_exact_zero: rev_zero,
                leb_coeff,
                leb_coeff_exact_zero: leb_zero,
            });
        }
        Self {
            drift,
            normalizer,
            modes,
        }
    }
}

/// The normalized reversible measure exp(2Q)dx with Q = Σ b_j x_j, against
/// which L is self-adjoint. Zero drift gives Lebesgue measure.
#[derive(Debug, Clone)]
pub struct ReversibleMeasure {
    domain: DomainSpec,
    per_axis_normalizer: Vec<f64>,
    normalizer: f64,
}

impl ReversibleMeasure {
    pub fn new(domain: &DomainSpec) -> Self {
        let per_axis: Vec<f64> = domain
            .factors
            .iter()
            .map(|f| {
                if f.drift == 0.0 {
                    1.0
                } else {
                    adaptive_simpson(&|x| (2.0 * f.drift * x).exp(), 0.0, 1.0, FACTOR_QUAD_TOL).0
                }
            })
            .collect();
        let normalizer = per_axis.iter().product();
        Self {
            domain: domain.clone(),
            per_axis_normalizer: per_axis,
            normalizer,
        }
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    pub fn normalizer(&self) -> f64 {
        self.normalizer
    }

    /// 2Q(x) = Σ 2 b_j x_j, without the normalizing constant.
    pub fn log_density_unnormalized(&self, point: &[f64]) -> f64 {
        self.domain
            .factors
            .iter()
            .zip(point)
            .map(|(f, &x)| 2.0 * f.drift * x)
            .sum()
    }

    /// Normalized density exp(2Q)/Z of μ_rev with respect to Lebesgue measure.
    pub fn density(&self, point: &[f64]) -> f64 {
        (self.log_density_unnormalized(point)).exp() / self.normalizer
    }
}

/// One tensor-product eigenpair.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenEntry {
    pub multi_index: Vec<u32>,
    pub lambda: f64,
    /// F = ∫ φ dμ_rev, the product of the per-factor coefficients.
    pub f: f64,
    /// True when F vanishes identically (some even index on a zero-drift factor).
    pub f_exact_zero: bool,
}

/// Ordered Dirichlet eigendata up to a per-axis index cutoff.
#[derive(Debug, Clone)]
pub struct EigenBasis {
    domain: DomainSpec,
    cutoff: u32,
    axes: Vec<AxisModes>,
    entries: Vec<EigenEntry>,
    rev_measure: ReversibleMeasure,
    /// Σ F² over retained entries; Parseval gives Σ over all entries = 1.
    sq_f_retained: f64,
    /// Π_j sup|mode_j|: uniform bound on |φ_n| over the domain.
    mode_sup_bound: f64,
}

impl EigenBasis {
    /// Construct all tensor-product eigenpairs with every index ≤ `cutoff`,
    /// sorted by eigenvalue nonincreasing, ties broken lexicographically.
    pub fn build(domain: &DomainSpec, cutoff: u32) -> Result<Self> {
        if cutoff == 0 {
            return Err(Error::InvalidArgument("cutoff must be at least 1".into()));
        }
        let d = domain.dim();
        if d == 0 {
            return Err(Error::InvalidArgument("empty domain".into()));
        }
        let total = (cutoff as f64).powi(d as i32);
        if total > 4e6 {
            return Err(Error::InvalidArgument(format!(
                "basis too large: cutoff^dim = {total:.3e} entries"
            )));
        }
        let axes: Vec<AxisModes> = domain
            .factors
            .iter()
            .map(|f| AxisModes::build(f.drift, cutoff))
            .collect();
        let zero_drift = domain.is_zero_drift();

        fn advance(idx: &mut [u32], cutoff: u32) -> bool {
            for j in (0..idx.len()).rev() {
                if idx[j] < cutoff {
                    idx[j] += 1;
                    for k in idx.iter_mut().skip(j + 1) {
                        *k = 1;
                    }
                    return true;
                }
            }
            false
        }

        let mut entries = Vec::with_capacity(total as usize);
        let mut idx = vec![1u32; d];
        loop {
            let mut f = 1.0;
            let mut f_zero = false;
            let mut sq_sum: u64 = 0;
            for (j, &n) in idx.iter().enumerate() {
                let m = &axes[j].modes[(n - 1) as usize];
                f *= m.rev_coeff;
                f_zero |= m.rev_coeff_exact_zero;
                sq_sum += (n as u64) * (n as u64);
            }
            // integer sum of squares keeps eigenvalue ties exact on cubes
            let lambda = if zero_drift {
                -(PI * PI / 2.0) * sq_sum as f64
            } else {
                let mut acc = Kahan::new();
                for (j, &n) in idx.iter().enumerate() {
                    acc.add(axes[j].modes[(n - 1) as usize].eigenvalue);
                }
                acc.value()
            };
            entries.push(EigenEntry {
                multi_index: idx.clone(),
                lambda,
                f: if f_zero { 0.0 } else { f },
                f_exact_zero: f_zero,
            });
            if !advance(&mut idx, cutoff) {
                break;
            }
        }
        entries.sort_by(|a, b| {
            b.lambda
                .partial_cmp(&a.lambda)
                .unwrap()
                .then_with(|| a.multi_index.cmp(&b.multi_index))
        });
        let sq_f_retained = kahan_sq_f(&entries);
        let mode_sup_bound = axes
            .iter()
            .map(|a| a.modes[0].sup_bound())
            .product::<f64>();
        Ok(Self {
            domain: domain.clone(),
            cutoff,
            axes,
            entries,
            rev_measure: ReversibleMeasure::new(domain),
            sq_f_retained,
            mode_sup_bound,
        })
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn entries(&self) -> &[EigenEntry] {
        &self.entries
    }

    pub fn axes(&self) -> &[AxisModes] {
        &self.axes
    }

    pub fn rev_measure(&self) -> &ReversibleMeasure {
        &self.rev_measure
    }

    /// The ground entry (1,…,1); top of the sorted order.
    pub fn ground(&self) -> &EigenEntry {
        &self.entries[0]
    }

    /// λ_0^D, the principal Dirichlet eigenvalue.
    pub fn lambda0(&self) -> f64 {
        self.entries[0].lambda
    }

    /// λ_1^D, the second-largest eigenvalue counted with multiplicity.
    pub fn lambda1(&self) -> f64 {
        self.entries[1].lambda
    }

    pub fn sq_f_retained(&self) -> f64 {
        self.sq_f_retained
    }

    /// Uniform bound on sup|φ_n| valid for every entry, retained or not.
    pub fn mode_sup_bound(&self) -> f64 {
        self.mode_sup_bound
    }

    /// Supremum of eigenvalues omitted by the cutoff: the least-negative λ
    /// among multi-indices with some component equal to cutoff+1.
    pub fn lambda_omitted_sup(&self) -> f64 {
        let d = self.dim();
        let mut best = f64::NEG_INFINITY;
        for j in 0..d {
            let mut acc = 0.0;
            for (k, ax) in self.axes.iter().enumerate() {
                let n = if k == j { self.cutoff + 1 } else { 1 } as f64;
                acc += -0.5 * ax.drift * ax.drift - 0.5 * n * n * PI * PI;
            }
            best = best.max(acc);
        }
        best
    }

    fn position_of(&self, entry: &EigenEntry) -> Result<usize> {
        self.entries
            .iter()
            .position(|e| e.multi_index == entry.multi_index)
            .ok_or(Error::EntryMismatch)
    }

    /// F_n = ∫ φ_n dμ_rev for an entry of this basis.
    pub fn rev_coefficient(&self, entry: &EigenEntry) -> Result<f64> {
        let pos = self.position_of(entry)?;
        Ok(self.entries[pos].f)
    }

    /// Pointwise eigenfunction value at a strictly interior point.
    pub fn evaluate(&self, entry: &EigenEntry, point: &[f64]) -> Result<f64> {
        self.domain.check_interior(point)?;
        if entry.multi_index.len() != self.dim()
            || entry.multi_index.iter().any(|&n| n == 0 || n > self.cutoff)
        {
            return Err(Error::EntryMismatch);
        }
        let mut v = 1.0;
        for (j, (&n, &x)) in entry.multi_index.iter().zip(point).enumerate() {
            v *= self.axes[j].modes[(n - 1) as usize].eval(x);
        }
        Ok(v)
    }

    /// Pointwise value of Lφ, from the analytic derivatives of the factors.
    pub fn evaluate_generator(&self, entry: &EigenEntry, point: &[f64]) -> Result<f64> {
        self.domain.check_interior(point)?;
        let d = self.dim();
        let mut vals = vec![0.0; d];
        let mut d1 = vec![0.0; d];
        let mut d2 = vec![0.0; d];
        for j in 0..d {
            let m = &self.axes[j].modes[(entry.multi_index[j] - 1) as usize];
            vals[j] = m.eval(point[j]);
            d1[j] = m.eval_d1(point[j]);
            d2[j] = m.eval_d2(point[j]);
        }
        let mut acc = 0.0;
        for j in 0..d {
            let mut term = 0.5 * d2[j] + self.axes[j].drift * d1[j];
            for (k, &v) in vals.iter().enumerate() {
                if k != j {
                    term *= v;
                }
            }
            acc += term;
        }
        Ok(acc)
    }
}

fn kahan_sq_f(entries: &[EigenEntry]) -> f64 {
    let mut acc = Kahan::new();
    for e in entries {
        acc.add(e.f * e.f);
    }
    acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn d1_zero_drift_cutoff3_eigenvalues() {
        let basis = EigenBasis::build(&DomainSpec::cube(1).unwrap(), 3).unwrap();
        let lams: Vec<f64> = basis.entries().iter().map(|e| e.lambda).collect();
        assert_relative_eq!(lams[0], -PI * PI / 2.0, max_relative = 1e-15);
        assert_relative_eq!(lams[1], -2.0 * PI * PI, max_relative = 1e-15);
        assert_relative_eq!(lams[2], -4.5 * PI * PI, max_relative = 1e-15);
    }

    #[test]
    fn cube_lambda0_lambda1_general_dimension() {
        for d in 1..=4 {
            let basis = EigenBasis::build(&DomainSpec::cube(d).unwrap(), 3).unwrap();
            assert_relative_eq!(basis.lambda0(), -(d as f64) * PI * PI / 2.0);
            assert_relative_eq!(basis.lambda1(), -((d + 3) as f64) * PI * PI / 2.0);
        }
        let basis = EigenBasis::build(&DomainSpec::cube(2).unwrap(), 4).unwrap();
        let e11 = basis.ground();
        assert_eq!(e11.multi_index, vec![1, 1]);
        assert_relative_eq!(e11.lambda, -PI * PI);
    }

    #[test]
    fn sorted_nonincreasing_with_lexicographic_ties() {
        let basis = EigenBasis::build(&DomainSpec::cube(2).unwrap(), 4).unwrap();
        for w in basis.entries().windows(2) {
            assert!(
                w[0].lambda > w[1].lambda
                    || (w[0].lambda == w[1].lambda && w[0].multi_index < w[1].multi_index)
            );
        }
        // the (1,2)/(2,1) pair is tied and must appear in lexicographic order
        let pos12 = basis
            .entries()
            .iter()
            .position(|e| e.multi_index == vec![1, 2])
            .unwrap();
        assert_eq!(basis.entries()[pos12 + 1].multi_index, vec![2, 1]);
    }

    #[test]
    fn all_eigenvalues_negative() {
        let basis =
            EigenBasis::build(&DomainSpec::with_drifts(&[1.0, -0.5]).unwrap(), 5).unwrap();
        assert!(basis.entries().iter().all(|e| e.lambda < 0.0));
    }

    #[test]
    fn drifted_principal_eigenvalue_closed_form() {
        // -b²/2 - π²/2 for b = 1, checked in spectrum tests against a
        // finite-difference eigensolve as well
        let basis = EigenBasis::build(&DomainSpec::with_drifts(&[1.0]).unwrap(), 3).unwrap();
        assert_relative_eq!(basis.lambda0(), -0.5 - PI * PI / 2.0, max_relative = 1e-14);
    }

    #[test]
    fn cube_f_closed_form() {
        let basis = EigenBasis::build(&DomainSpec::cube(2).unwrap(), 4).unwrap();
        let e11 = basis.ground().clone();
        assert_relative_eq!(
            basis.rev_coefficient(&e11).unwrap(),
            8.0 / (PI * PI),
            max_relative = 1e-14
        );
        for e in basis.entries() {
            let odd = e.multi_index.iter().all(|n| n % 2 == 1);
            if odd {
                let expect = 2f64.powf(3.0)
                    / (PI * PI * e.multi_index.iter().product::<u32>() as f64);
                assert_relative_eq!(e.f, expect, max_relative = 1e-13);
                assert!(!e.f_exact_zero);
            } else {
                assert_eq!(e.f, 0.0);
                assert!(e.f_exact_zero);
            }
        }
    }

    #[test]
    fn drifted_f_matches_elementary_antiderivative() {
        let b: f64 = 1.0;
        let basis = EigenBasis::build(&DomainSpec::with_drifts(&[b]).unwrap(), 4).unwrap();
        let z = ((2.0 * b).exp() - 1.0) / (2.0 * b);
        let amp = (2.0 * z).sqrt();
        for e in basis.entries() {
            let n = e.multi_index[0] as f64;
            let w = n * PI;
            // F_n = (amp/Z) · nπ (1 − (−1)^n e^b) / (b² + n²π²)
            let parity = if e.multi_index[0] % 2 == 0 { 1.0 } else { -1.0 };
            let exact = amp / z * w * (1.0 - parity * b.exp()) / (b * b + w * w);
            assert_relative_eq!(e.f, exact, max_relative = 1e-11);
        }
    }

    #[test]
    fn evaluate_examples() {
        let basis = EigenBasis::build(&DomainSpec::cube(2).unwrap(), 4).unwrap();
        let e11 = basis.ground().clone();
        let v = basis.evaluate(&e11, &[1.0 / 9.0, 1.0 / 9.0]).unwrap();
        let s = (PI / 9.0).sin();
        assert_relative_eq!(v, 2.0 * s * s, max_relative = 1e-14);

        let e22 = basis
            .entries()
            .iter()
            .find(|e| e.multi_index == vec![2, 2])
            .unwrap()
            .clone();
        assert!(basis.evaluate(&e22, &[0.5, 0.5]).unwrap().abs() < 1e-15);

        let basis1 = EigenBasis::build(&DomainSpec::cube(1).unwrap(), 2).unwrap();
        let g = basis1.ground().clone();
        assert_relative_eq!(
            basis1.evaluate(&g, &[0.5]).unwrap(),
            std::f64::consts::SQRT_2,
            max_relative = 1e-15
        );
    }

    #[test]
    fn evaluate_rejects_boundary() {
        let basis = EigenBasis::build(&DomainSpec::cube(1).unwrap(), 2).unwrap();
        let g = basis.ground().clone();
        assert!(matches!(
            basis.evaluate(&g, &[0.0]),
            Err(Error::OutsideDomain)
        ));
        assert!(matches!(
            basis.evaluate(&g, &[1.0]),
            Err(Error::OutsideDomain)
        ));
    }

    #[test]
    fn rejects_zero_cutoff() {
        assert!(EigenBasis::build(&DomainSpec::cube(1).unwrap(), 0).is_err());
    }

    #[test]
    fn foreign_entry_rejected() {
        let basis = EigenBasis::build(&DomainSpec::cube(1).unwrap(), 2).unwrap();
        let fake = EigenEntry {
            multi_index: vec![7],
            lambda: -1.0,
            f: 0.0,
            f_exact_zero: false,
        };
        assert!(matches!(
            basis.rev_coefficient(&fake),
            Err(Error::EntryMismatch)
        ));
    }

    #[test]
    fn reversible_measure_normalizes() {
        let dom = DomainSpec::with_drifts(&[1.0, -0.7]).unwrap();
        let rev = ReversibleMeasure::new(&dom);
        // mass by 2-d Simpson product
        let zx = adaptive_simpson(&|x| (2.0f64 * x).exp(), 0.0, 1.0, 1e-13).0;
        let zy = adaptive_simpson(&|y| (-1.4f64 * y).exp(), 0.0, 1.0, 1e-13).0;
        assert_relative_eq!(rev.normalizer(), zx * zy, max_relative = 1e-11);
        let closed = ((2.0f64).exp() - 1.0) / 2.0 * (((-1.4f64).exp() - 1.0) / -1.4);
        assert_relative_eq!(rev.normalizer(), closed, max_relative = 1e-11);
    }

    #[test]
    fn zero_drift_reversible_measure_is_lebesgue() {
        let rev = ReversibleMeasure::new(&DomainSpec::cube(3).unwrap());
        assert_eq!(rev.density(&[0.2, 0.9, 0.5]), 1.0);
    }

    #[test]
    fn parseval_partial_sums_increase_to_one() {
        let dom = DomainSpec::cube(1).unwrap();
        let s8 = EigenBasis::build(&dom, 8).unwrap().sq_f_retained();
        let s64 = EigenBasis::build(&dom, 64).unwrap().sq_f_retained();
        assert!(s8 < s64 && s64 <= 1.0 + 1e-12);
        // odd-mode tail of Σ 8/(π²n²) beyond 64 is ≈ 6.3e-3
        assert!(1.0 - s64 < 1e-2);
        // drifted coefficients decay like 1/n, so the cutoff-64 tail is a
        // few times 1e-3
        let dom_b = DomainSpec::with_drifts(&[1.0]).unwrap();
        let sb = EigenBasis::build(&dom_b, 64).unwrap().sq_f_retained();
        assert!(sb <= 1.0 + 1e-12 && 1.0 - sb < 1e-2);
    }
}
