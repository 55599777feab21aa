//! Small quadrature and summation helpers shared across the crate.

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct Kahan {
    sum: f64,
    comp: f64,
}

impl Kahan {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

pub fn kahan_sum(it: impl IntoIterator<Item = f64>) -> f64 {
    let mut k = Kahan::new();
    for x in it {
        k.add(x);
    }
    k.value()
}

/// Adaptive Simpson quadrature started from an initial uniform partition.
/// The partition must be fine enough that the integrand is not aliased to
/// zero on panel endpoints and midpoints (one panel per half-oscillation is
/// enough for trigonometric integrands).
pub fn adaptive_simpson_panels(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    tol: f64,
    panels: usize,
) -> (f64, f64) {
    let m = panels.max(1);
    let mut acc = Kahan::new();
    let mut err = 0.0;
    for i in 0..m {
        let x0 = a + (b - a) * i as f64 / m as f64;
        let x1 = a + (b - a) * (i + 1) as f64 / m as f64;
        let (v, e) = adaptive_simpson(f, x0, x1, tol / m as f64);
        acc.add(v);
        err += e;
    }
    (acc.value(), err)
}

/// Adaptive Simpson quadrature to an absolute tolerance. Returns the value
/// and an error estimate (the accumulated |S2-S1|/15 refinement residuals).
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> (f64, f64) {
    fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
        h / 6.0 * (fa + 4.0 * fm + fb)
    }
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> (f64, f64) {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, m - a);
        let right = simpson(fm, frm, fb, b - m);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            (left + right + delta / 15.0, delta.abs() / 15.0)
        } else {
            let (vl, el) = recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1);
            let (vr, er) = recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
            (vl + vr, el + er)
        }
    }
    if a == b {
        return (0.0, 0.0);
    }
    let fa = f(a);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let fb = f(b);
    let whole = simpson(fa, fm, fb, b - a);
    recurse(f, a, b, fa, fm, fb, whole, tol, 48)
}

/// Composite Simpson on a uniform grid with `2*panels+1` nodes. Used where a
/// fixed, deterministic node count is preferable to adaptivity.
pub fn simpson_uniform(f: &dyn Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let n = 2 * panels;
    let h = (b - a) / n as f64;
    let mut acc = Kahan::new();
    acc.add(f(a));
    acc.add(f(b));
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc.add(w * f(a + i as f64 * h));
    }
    acc.value() * h / 3.0
}

/// Tabulated inverse CDF for sampling a nonnegative 1-d density on [0,1].
/// The table is built once with `knots` cells; sampling is a binary search
/// plus linear interpolation, which is exact for the tabulated piecewise
/// linear CDF.
#[derive(Debug, Clone)]
pub struct InverseCdfTable {
    cdf: Vec<f64>, // cdf[i] at x = i/knots, cdf[0]=0, cdf[knots]=1
}

impl InverseCdfTable {
    pub fn build(density: &dyn Fn(f64) -> f64, knots: usize) -> Self {
        let h = 1.0 / knots as f64;
        let mut cdf = Vec::with_capacity(knots + 1);
        cdf.push(0.0);
        let mut acc = Kahan::new();
        let mut prev = density(0.0).max(0.0);
        for i in 1..=knots {
            let x = i as f64 * h;
            let cur = density(x.min(1.0)).max(0.0);
            acc.add(0.5 * (prev + cur) * h);
            cdf.push(acc.value());
            prev = cur;
        }
        let total = *cdf.last().unwrap();
        if total > 0.0 {
            for v in cdf.iter_mut() {
                *v /= total;
            }
        }
        cdf[knots] = 1.0;
        Self { cdf }
    }

    pub fn sample(&self, u: f64) -> f64 {
        let n = self.cdf.len() - 1;
        let mut lo = 0usize;
        let mut hi = n;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.cdf[mid] <= u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let c0 = self.cdf[lo];
        let c1 = self.cdf[hi];
        let t = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.5 };
        ((lo as f64 + t) / n as f64).clamp(f64::MIN_POSITIVE, 1.0 - 1e-16)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_exact_on_cubics() {
        let (v, _) = adaptive_simpson(&|x| x * x * x - 2.0 * x + 1.0, 0.0, 2.0, 1e-12);
        assert!((v - (4.0 - 4.0 + 2.0)).abs() < 1e-12);
    }

    #[test]
    fn simpson_exp_matches_closed_form() {
        let (v, e) = adaptive_simpson(&|x| (2.0 * x).exp(), 0.0, 1.0, 1e-12);
        let exact = (2.0f64.exp() - 1.0) / 2.0;
        assert!((v - exact).abs() < 1e-11, "err {:e}", (v - exact).abs());
        assert!(e < 1e-9);
    }

    #[test]
    fn inverse_cdf_uniform_is_identity() {
        let t = InverseCdfTable::build(&|_| 1.0, 1 << 10);
        for &u in &[0.0, 0.125, 0.5, 0.93, 1.0] {
            assert!((t.sample(u) - u).abs() < 1e-9);
        }
    }

    #[test]
    fn inverse_cdf_recovers_sine_density() {
        use std::f64::consts::PI;
        let t = InverseCdfTable::build(&|x| (PI * x).sin(), 1 << 14);
        // F(x) = (1 - cos pi x)/2, so F^{-1}(1/2) = 1/2, F^{-1}(1/4) = 1/3
        assert!((t.sample(0.5) - 0.5).abs() < 1e-6);
        assert!((t.sample(0.25) - 1.0 / 3.0).abs() < 1e-6);
    }
}
