//! Certified real-root location for the secular series: partition the search
//! interval at the retained distinct eigenvalues, sign-scan each pole-free
//! subinterval on a uniform mesh, bisect every bracket, and certify a root
//! only when the certified evaluation error is below |E| at both bracket
//! endpoints (so the sign change survives the truncation uncertainty).

use crate::error::{Error, Result};
use crate::secular::SecularFunction;

/// Relative exclusion-zone radius around retained eigenvalues (× |λ_0^D|).
pub const SCAN_EXCLUSION_REL: f64 = 1e-9;
/// Relative bisection tolerance (× |λ_0^D|).
pub const BISECTION_TOL_REL: f64 = 1e-10;
/// Sign-scan mesh points per pole-free subinterval.
pub const SCAN_MESH: usize = 240;

#[derive(Debug, Clone)]
pub struct RootCandidate {
    pub value: f64,
    pub bracket: (f64, f64),
    /// True when |E| exceeded the certified error at both initial bracket
    /// endpoints; uncertified candidates are reported as suspects.
    pub certified: bool,
}

#[derive(Debug, Clone, Default)]
pub struct RootScan {
    pub roots: Vec<RootCandidate>,
    pub suspects: Vec<RootCandidate>,
}

/// All real roots of E in (lo, hi), lo < hi ≤ 0.
pub fn real_roots(ef: &SecularFunction, lo: f64, hi: f64) -> Result<RootScan> {
    if !(lo < hi) || hi > 0.0 {
        return Err(Error::InvalidArgument(format!(
            "need lo < hi <= 0, got ({lo}, {hi})"
        )));
    }
    let excl = SCAN_EXCLUSION_REL * ef.lambda0().abs();
    let tol = BISECTION_TOL_REL * ef.lambda0().abs();

    // partition at the retained poles; zero-residue eigenvalues are regular
    // points of E and are scanned through
    let mut cuts = ef.poles_in(lo, hi);
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut bounds = Vec::with_capacity(cuts.len() + 2);
    bounds.push(lo);
    bounds.extend(cuts);
    bounds.push(hi);

    let mut scan = RootScan::default();
    for w in bounds.windows(2) {
        let a = w[0] + excl;
        let b = w[1] - excl;
        if b - a < 4.0 * excl {
            continue;
        }
        scan_subinterval(ef, a, b, tol, &mut scan)?;
    }
    scan.roots
        .sort_by(|x, y| y.value.partial_cmp(&x.value).unwrap());
    scan.suspects
        .sort_by(|x, y| y.value.partial_cmp(&x.value).unwrap());
    Ok(scan)
}

fn scan_subinterval(
    ef: &SecularFunction,
    a: f64,
    b: f64,
    tol: f64,
    out: &mut RootScan,
) -> Result<()> {
    let m = SCAN_MESH;
    let mut xs = Vec::with_capacity(m + 1);
    let mut vs = Vec::with_capacity(m + 1);
    let mut es = Vec::with_capacity(m + 1);
    for i in 0..=m {
        let x = a + (b - a) * i as f64 / m as f64;
        let (v, e) = ef.evaluate_real(x)?;
        xs.push(x);
        vs.push(v);
        es.push(e);
    }
    for i in 1..=m {
        if vs[i - 1] == 0.0 || vs[i] == 0.0 {
            continue; // a mesh point exactly on a root: the neighbors bracket it
        }
        if vs[i - 1].signum() == vs[i].signum() {
            continue;
        }
        let root = bisect(ef, xs[i - 1], xs[i], vs[i - 1], tol)?;
        // the mesh bracket may sit too close to the root for |E| to clear the
        // certified error; widen outward to the nearest margin-clearing mesh
        // points with unchanged signs
        let left = (0..i).rev().find(|&l| {
            vs[l].signum() == vs[i - 1].signum() && vs[l].abs() > es[l]
        });
        let right = (i..=m).find(|&r| {
            vs[r].signum() == vs[i].signum() && vs[r].abs() > es[r]
        });
        let mut certified = false;
        let mut bracket = (xs[i - 1], xs[i]);
        if let (Some(l), Some(r)) = (left, right) {
            let left_ok = (l..i).all(|k| vs[k].signum() == vs[i - 1].signum());
            let right_ok = (i..=r).all(|k| vs[k].signum() == vs[i].signum());
            if left_ok && right_ok {
                certified = true;
                bracket = (xs[l], xs[r]);
            }
        }
        let cand = RootCandidate {
            value: root,
            bracket,
            certified,
        };
        if certified {
            out.roots.push(cand);
        } else {
            out.suspects.push(cand);
        }
    }
    Ok(())
}

fn bisect(ef: &SecularFunction, mut a: f64, mut b: f64, va: f64, tol: f64) -> Result<f64> {
    let mut sa = va.signum();
    for _ in 0..200 {
        if b - a <= tol {
            break;
        }
        let mid = 0.5 * (a + b);
        let (vm, _) = ef.evaluate_real(mid)?;
        if vm == 0.0 {
            return Ok(mid);
        }
        if vm.signum() == sa {
            a = mid;
            sa = vm.signum();
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}
