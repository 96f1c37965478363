//! Small numeric helpers shared across modules: standard-normal functions,
//! compensated summation, adaptive quadrature and a float gcd.

use statrs::distribution::{ContinuousCDF, Normal};

pub const SQRT_2_OVER_PI: f64 = 0.797_884_560_802_865_4;
pub const FOUR_SQRT2_MINUS_4: f64 = 1.656_854_249_492_380_6;

fn unit_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal")
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    unit_normal().cdf(x)
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    (-(x * x) / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Standard normal quantile, `p` in (0,1).
pub fn normal_quantile(p: f64) -> f64 {
    unit_normal().inverse_cdf(p)
}

/// Partial expectation E(Z - q)^+ for a standard normal Z.
pub fn normal_pos_part(q: f64) -> f64 {
    normal_pdf(q) - q * (1.0 - normal_cdf(q))
}

/// Partial expectation E(Z - q)^- for a standard normal Z.
pub fn normal_neg_part(q: f64) -> f64 {
    normal_pdf(q) + q * normal_cdf(q)
}

/// Neumaier compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct Kahan {
    sum: f64,
    c: f64,
}

impl Kahan {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.c += (self.sum - t) + x;
        } else {
            self.c += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.c
    }
}

pub fn kahan_sum(it: impl IntoIterator<Item = f64>) -> f64 {
    let mut k = Kahan::new();
    for x in it {
        k.add(x);
    }
    k.total()
}

/// Adaptive Simpson quadrature of `f` on `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        ((b - a) / 6.0 * (fa + 4.0 * fm + fb), m, fm)
    }
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        whole: f64,
        m: f64,
        fm: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (left, lm, flm) = simpson(f, a, fa, m, fm);
        let (right, rm, frm) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, fa, m, fm, left, lm, flm, tol / 2.0, depth - 1)
                + recurse(f, m, fm, b, fb, right, rm, frm, tol / 2.0, depth - 1)
        }
    }
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let (whole, m, fm) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, whole, m, fm, tol, 48)
}

/// Greatest common grid step of a set of reals, within `tol`. Returns
/// `None` when the only candidates are degenerately small relative to the
/// values (incommensurable inputs).
pub fn float_gcd(values: impl IntoIterator<Item = f64>, tol: f64) -> Option<f64> {
    let vals: Vec<f64> = values.into_iter().map(f64::abs).filter(|&v| v > tol).collect();
    let max = vals.iter().copied().fold(0.0f64, f64::max);
    if max == 0.0 {
        return None;
    }
    let floor = tol.max(1e-7 * max);
    let mut g: f64 = 0.0;
    for &v in &vals {
        let mut a = v;
        let mut b = g;
        while b > tol {
            let r = a % b;
            a = b;
            b = if r < tol || r > b - tol { 0.0 } else { r };
        }
        g = a;
        if g < floor {
            return None;
        }
    }
    Some(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_basics() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-15);
        assert!((normal_quantile(0.8) - 0.8416212335729143).abs() < 1e-9);
        // E(Z)^+ = 1/sqrt(2*pi)
        assert!((normal_pos_part(0.0) - 0.3989422804014327).abs() < 1e-14);
    }

    #[test]
    fn simpson_exact_on_poly() {
        let v = adaptive_simpson(&|x| x * x * x, 0.0, 2.0, 1e-12);
        assert!((v - 4.0).abs() < 1e-10);
    }

    #[test]
    fn simpson_gaussian_tail() {
        let v = adaptive_simpson(&normal_pdf, -8.0, 8.0, 1e-12);
        assert!((v - 1.0).abs() < 1e-10);
    }

    #[test]
    fn gcd_of_grid_values() {
        let g = float_gcd([2.0, 2.5, 10.0], 1e-9).unwrap();
        assert!((g - 0.5).abs() < 1e-9);
        assert!(float_gcd([1.0, std::f64::consts::SQRT_2], 1e-9).is_none());
    }
}
