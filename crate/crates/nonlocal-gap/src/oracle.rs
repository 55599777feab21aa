//! Independent finite-difference verification: discretize the operator on a
//! uniform grid over (0,1)^d (d ≤ 2), eliminate the nonlocal boundary
//! condition u|∂D = Σ w_i u_i into the interior stencils, and compute the
//! eigenvalues of the resulting dense matrix.
//!
//! Boundary elimination keeps the matrix at interior size and makes the
//! constant vector an exact kernel element: each diagonal entry is assembled
//! as the negated sum of its off-diagonal row entries.

use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::PI;
use std::io::Write;

use crate::basis::EigenBasis;
use crate::error::{Error, Result};
use crate::measure::JumpMeasure;
use crate::quad::Kahan;

/// Dense interior matrix with the jump-measure functional substituted for
/// every boundary reference.
#[derive(Debug, Clone)]
pub struct NonlocalMatrix {
    pub size: usize,
    pub entries: DMatrix<f64>,
    pub grid_spacing: f64,
    /// Quadrature weights of ν on the interior grid (sum exactly 1).
    pub measure_weights: Vec<f64>,
    pub dim: usize,
    pub n_per_axis: usize,
    lambda0_continuum: f64,
}

/// Second-order centered discretization of Σ_j (½∂²_j + b_j∂_j) with the
/// nonlocal condition folded in. `n_per_axis` counts grid cells; interior
/// points per axis are n−1.
pub fn build_nonlocal_matrix(
    basis: &EigenBasis,
    n_per_axis: usize,
    measure: &JumpMeasure,
) -> Result<NonlocalMatrix> {
    let domain = basis.domain();
    let d = domain.dim();
    if d > 2 {
        return Err(Error::Unsupported(
            "finite-difference oracle is restricted to d <= 2".into(),
        ));
    }
    if n_per_axis < 16 {
        return Err(Error::InvalidArgument(
            "need at least 16 grid cells per axis".into(),
        ));
    }
    let m = n_per_axis - 1;
    let size = m.pow(d as u32);
    if size > 10_000 {
        return Err(Error::InvalidArgument(format!(
            "interior size {size} exceeds the dense eigensolve budget 10000"
        )));
    }
    let h = 1.0 / n_per_axis as f64;
    for f in &domain.factors {
        let peclet = f.drift.abs() * h;
        if peclet >= 2.0 {
            return Err(Error::PecletTooLarge(peclet));
        }
    }

    let weights = measure_weights(basis, n_per_axis, measure)?;

    let mut a = DMatrix::<f64>::zeros(size, size);
    let index = |coords: &[usize]| -> usize {
        // row-major over interior points, coords in 0..m
        coords.iter().fold(0, |acc, &c| acc * m + c)
    };
    let mut coords = vec![0usize; d];
    for row in 0..size {
        // decode row-major coordinates
        {
            let mut r = row;
            for j in (0..d).rev() {
                coords[j] = r % m;
                r /= m;
            }
        }
        for (j, f) in domain.factors.iter().enumerate() {
            let diff = 0.5 / (h * h);
            let drift = f.drift / (2.0 * h);
            // left neighbor (coefficient diff − drift), right (diff + drift)
            for (to_right, coeff) in [(false, diff - drift), (true, diff + drift)] {
                let c = coords[j];
                let onto_boundary = if to_right { c + 1 >= m } else { c == 0 };
                if onto_boundary {
                    // u at the boundary node is Σ w_i u_i
                    for (i, &w) in weights.iter().enumerate() {
                        if w != 0.0 {
                            a[(row, i)] += coeff * w;
                        }
                    }
                } else {
                    let mut nb = coords.clone();
                    nb[j] = if to_right { c + 1 } else { c - 1 };
                    a[(row, index(&nb))] += coeff;
                }
            }
        }
        // the diagonal completes the row sum to exactly zero: the continuum
        // operator annihilates constants and the discretization preserves it
        let mut s = Kahan::new();
        for col in 0..size {
            if col != row {
                s.add(a[(row, col)]);
            }
        }
        a[(row, row)] -= s.value();
    }

    Ok(NonlocalMatrix {
        size,
        entries: a,
        grid_spacing: h,
        measure_weights: weights,
        dim: d,
        n_per_axis,
        lambda0_continuum: basis.lambda0(),
    })
}

/// Quadrature weights of ν at the interior grid points, summing to 1.
fn measure_weights(
    basis: &EigenBasis,
    n_per_axis: usize,
    measure: &JumpMeasure,
) -> Result<Vec<f64>> {
    let d = basis.dim();
    let m = n_per_axis - 1;
    let h = 1.0 / n_per_axis as f64;
    let size = m.pow(d as u32);
    let mut w = vec![0.0; size];
    match measure {
        JumpMeasure::PointMass { point } => {
            basis.domain().check_interior(point)?;
            if point.iter().any(|&p| p < h || p > 1.0 - h) {
                return Err(Error::PointMassNearBoundary);
            }
            // distribute onto the 2^d surrounding interior nodes by linear
            // interpolation, preserving total weight 1
            let mut cells = Vec::with_capacity(d);
            for &p in point {
                let t = p / h - 1.0; // interior index coordinate
                let i0 = (t.floor() as usize).min(m - 2);
                cells.push((i0, t - i0 as f64));
            }
            let corners = 1usize << d;
            for mask in 0..corners {
                let mut idx = 0usize;
                let mut weight = 1.0;
                for (j, &(i0, frac)) in cells.iter().enumerate() {
                    let hi = (mask >> j) & 1 == 1;
                    idx = idx * m + if hi { i0 + 1 } else { i0 };
                    weight *= if hi { frac } else { 1.0 - frac };
                }
                w[idx] += weight;
            }
        }
        _ => {
            // density variants: trapezoid weights on interior nodes (the
            // density at the boundary is dropped and the sum renormalized)
            let mut coords = vec![0usize; d];
            let mut point = vec![0.0; d];
            for (i, wi) in w.iter_mut().enumerate() {
                let mut r = i;
                for j in (0..d).rev() {
                    coords[j] = r % m;
                    r /= m;
                }
                for j in 0..d {
                    point[j] = (coords[j] + 1) as f64 * h;
                }
                let rho = measure
                    .density(basis, &point)?
                    .expect("point masses handled above");
                *wi = rho * h.powi(d as i32);
            }
        }
    }
    let total: f64 = w.iter().sum();
    if total <= 0.0 {
        return Err(Error::InvalidArgument(
            "measure weights sum to zero on the grid".into(),
        ));
    }
    for wi in w.iter_mut() {
        *wi /= total;
    }
    // force Σw = 1 to the last ulp so the kernel is exact
    let resid = 1.0 - w.iter().sum::<f64>();
    let argmax = (0..w.len())
        .max_by(|&i, &j| w[i].partial_cmp(&w[j]).unwrap())
        .unwrap();
    w[argmax] += resid;
    Ok(w)
}

impl NonlocalMatrix {
    /// Matrix-vector product with compensated row sums.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.size;
        let mut out = vec![0.0; n];
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = Kahan::new();
            for j in 0..n {
                acc.add(self.entries[(i, j)] * v[j]);
            }
            *o = acc.value();
        }
        out
    }

    /// Write the matrix in coordinate text form: `row col value` per line.
    pub fn export_coordinate_text(&self, out: &mut dyn Write) -> Result<()> {
        for i in 0..self.size {
            for j in 0..self.size {
                let v = self.entries[(i, j)];
                if v != 0.0 {
                    writeln!(out, "{i} {j} {v:.16e}")?;
                }
            }
        }
        Ok(())
    }
}

/// Eigenvalues of the nonlocal matrix sorted by real part descending, with
/// the discrete zero eigenvalue (|λ| < 1e-8·|λ_0^D|) removed.
pub fn oracle_spectrum(matrix: &NonlocalMatrix, how_many: usize) -> Result<Vec<Complex64>> {
    // eigenvalues-only Schur path (no Q accumulation); iterates to
    // convergence internally
    let eig = matrix.entries.complex_eigenvalues();
    if eig.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::EigensolveFailed);
    }
    let zero_tol = 1e-8 * matrix.lambda0_continuum.abs();
    let mut vals: Vec<Complex64> = eig
        .iter()
        .map(|z| Complex64::new(z.re, z.im))
        .filter(|z| z.norm() >= zero_tol)
        .collect();
    vals.sort_by(|a, b| {
        b.re.partial_cmp(&a.re)
            .unwrap()
            .then(a.im.partial_cmp(&b.im).unwrap())
    });
    vals.truncate(how_many);
    Ok(vals)
}

/// h²-Richardson extrapolation from values on grids n and 2n (or any pair).
pub fn richardson(coarse: f64, fine: f64, n_coarse: usize, n_fine: usize) -> f64 {
    let h1 = 1.0 / n_coarse as f64;
    let h2 = 1.0 / n_fine as f64;
    (h1 * h1 * fine - h2 * h2 * coarse) / (h1 * h1 - h2 * h2)
}

/// Convenience: top nonzero eigenvalues Richardson-extrapolated over two
/// grids (real parts paired by rank).
pub fn richardson_spectrum(
    basis: &EigenBasis,
    measure: &JumpMeasure,
    n_coarse: usize,
    n_fine: usize,
    how_many: usize,
) -> Result<Vec<f64>> {
    let mc = build_nonlocal_matrix(basis, n_coarse, measure)?;
    let vc = oracle_spectrum(&mc, how_many)?;
    let mf = build_nonlocal_matrix(basis, n_fine, measure)?;
    let vf = oracle_spectrum(&mf, how_many)?;
    Ok(vc
        .iter()
        .zip(vf.iter())
        .map(|(c, f)| richardson(c.re, f.re, n_coarse, n_fine))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::DomainSpec;
    use approx::assert_relative_eq;

    fn cube_basis(d: usize, cutoff: u32) -> EigenBasis {
        EigenBasis::build(&DomainSpec::cube(d).unwrap(), cutoff).unwrap()
    }

    #[test]
    fn constant_vector_is_in_the_kernel() {
        let basis = cube_basis(1, 8);
        for nu in [
            JumpMeasure::LebesgueNormalized,
            JumpMeasure::point(&[1.0 / 3.0]),
            JumpMeasure::QuasiStationary,
        ] {
            let m = build_nonlocal_matrix(&basis, 64, &nu).unwrap();
            let ones = vec![1.0; m.size];
            let r = m.apply(&ones);
            let norm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!(norm < 1e-12, "{nu:?}: kernel residual {norm:.3e}");
        }
        let basis2 = cube_basis(2, 4);
        let m = build_nonlocal_matrix(&basis2, 24, &JumpMeasure::LebesgueNormalized).unwrap();
        let ones = vec![1.0; m.size];
        let norm = m.apply(&ones).iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!(norm < 1e-12, "2d kernel residual {norm:.3e}");
    }

    #[test]
    fn interval_point_jump_top_eigenvalue() {
        let basis = cube_basis(1, 8);
        let m = build_nonlocal_matrix(&basis, 400, &JumpMeasure::point(&[1.0 / 3.0])).unwrap();
        let eigs = oracle_spectrum(&m, 3).unwrap();
        assert_relative_eq!(eigs[0].re, -2.0 * PI * PI, max_relative = 1e-2);
        assert!(eigs[0].im.abs() < 1e-8);
    }

    #[test]
    fn interval_lebesgue_top_eigenvalue() {
        let basis = cube_basis(1, 8);
        let m = build_nonlocal_matrix(&basis, 400, &JumpMeasure::LebesgueNormalized).unwrap();
        let eigs = oracle_spectrum(&m, 1).unwrap();
        assert_relative_eq!(eigs[0].re, -2.0 * PI * PI, max_relative = 1e-2);
    }

    #[test]
    fn quasi_stationary_spectrum_is_shifted_dirichlet() {
        let basis = cube_basis(1, 8);
        let r = richardson_spectrum(&basis, &JumpMeasure::QuasiStationary, 200, 400, 3).unwrap();
        let expect = [-2.0 * PI * PI, -4.5 * PI * PI, -8.0 * PI * PI];
        for (got, want) in r.iter().zip(&expect) {
            assert_relative_eq!(got, want, max_relative = 2e-5);
        }
    }

    #[test]
    fn richardson_error_shrinks_second_order() {
        let basis = cube_basis(1, 8);
        let nu = JumpMeasure::point(&[1.0 / 3.0]);
        let exact = -2.0 * PI * PI;
        let e_at = |n: usize| -> f64 {
            let m = build_nonlocal_matrix(&basis, n, &nu).unwrap();
            (oracle_spectrum(&m, 1).unwrap()[0].re - exact).abs()
        };
        let e1 = e_at(100);
        let e2 = e_at(200);
        let ratio = e1 / e2;
        assert!(
            (2.5..6.0).contains(&ratio),
            "expected ≈4x shrink, got {ratio:.2} ({e1:.3e} vs {e2:.3e})"
        );
    }

    #[test]
    fn square_point_jump_detaches_from_lambda1() {
        let basis = cube_basis(2, 8);
        let m =
            build_nonlocal_matrix(&basis, 48, &JumpMeasure::point(&[1.0 / 9.0, 1.0 / 9.0]))
                .unwrap();
        let eigs = oracle_spectrum(&m, 1).unwrap();
        assert!(
            eigs[0].re > -2.5 * PI * PI,
            "top nonzero {} not above lambda1",
            eigs[0].re
        );
    }

    #[test]
    fn eigenvalues_have_nonpositive_real_parts_up_to_h2() {
        let basis = cube_basis(1, 8);
        for nu in [
            JumpMeasure::LebesgueNormalized,
            JumpMeasure::point(&[0.29]),
            JumpMeasure::QuasiStationary,
        ] {
            let m = build_nonlocal_matrix(&basis, 64, &nu).unwrap();
            let h = m.grid_spacing;
            let all = oracle_spectrum(&m, m.size).unwrap();
            let bound = 10.0 * h * h * basis.lambda0().abs();
            for z in all {
                assert!(z.re <= bound, "{nu:?}: eigenvalue {z} beyond {bound:.3e}");
            }
        }
    }

    #[test]
    fn point_mass_near_boundary_is_refused() {
        let basis = cube_basis(1, 8);
        assert!(matches!(
            build_nonlocal_matrix(&basis, 64, &JumpMeasure::point(&[0.001])),
            Err(Error::PointMassNearBoundary)
        ));
    }

    #[test]
    fn peclet_guard() {
        let basis = EigenBasis::build(&DomainSpec::with_drifts(&[80.0]).unwrap(), 4).unwrap();
        assert!(matches!(
            build_nonlocal_matrix(&basis, 32, &JumpMeasure::Reversible),
            Err(Error::PecletTooLarge(_))
        ));
    }

    #[test]
    fn coordinate_export_roundtrips() {
        let basis = cube_basis(1, 4);
        let m = build_nonlocal_matrix(&basis, 16, &JumpMeasure::LebesgueNormalized).unwrap();
        let mut buf = Vec::new();
        m.export_coordinate_text(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut count = 0;
        for line in text.lines() {
            let parts: Vec<&str> = line.split_whitespace().collect();
            assert_eq!(parts.len(), 3);
            let i: usize = parts[0].parse().unwrap();
            let j: usize = parts[1].parse().unwrap();
            let v: f64 = parts[2].parse().unwrap();
            assert_relative_eq!(v, m.entries[(i, j)], max_relative = 1e-14);
            count += 1;
        }
        assert!(count > m.size); // off-diagonals present
    }
}
