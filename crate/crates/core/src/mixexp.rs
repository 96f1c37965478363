//! Atom-at-zero plus signed exponential mixtures.
//!
//! Under exponential services the waiting-time law stays inside the class
//! `p0 * delta_0 + sum_j c_j exp(-r_j t) dt` on `t > 0`, with signed
//! coefficients and positive pairwise-distinct rates. One Lindley step
//! (convolve with Exponential(rate), shift by the slot length, clip at zero)
//! maps the class to itself in closed form:
//!
//! With `d_j = c_j * rate / (rate - r_j)` and a new term at `rate` carrying
//! the balance, the law of `W + B` is a pure mixture; shifting by `x` and
//! clipping scales each coefficient by `exp(-r x)` and sends the mass below
//! zero into the atom. Expectations of both clipped parts come out exactly.

use crate::error::{Error, Result};
use crate::math::Kahan;

/// Relative tolerance under which two service rates count as duplicates.
pub const RATE_DUP_TOL: f64 = 1e-9;
const MASS_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct MixExpLaw {
    /// Probability mass at zero.
    pub atom: f64,
    /// (coefficient, rate) pairs of the density on t > 0.
    pub terms: Vec<(f64, f64)>,
}

impl MixExpLaw {
    /// The law of a waiting time that is identically zero.
    pub fn zero() -> Self {
        MixExpLaw { atom: 1.0, terms: Vec::new() }
    }

    pub fn total_mass(&self) -> f64 {
        let mut k = Kahan::new();
        k.add(self.atom);
        for &(c, r) in &self.terms {
            k.add(c / r);
        }
        k.total()
    }

    pub fn mean(&self) -> f64 {
        let mut k = Kahan::new();
        for &(c, r) in &self.terms {
            k.add(c / (r * r));
        }
        k.total()
    }

    /// CDF at `t >= 0`.
    pub fn cdf(&self, t: f64) -> f64 {
        let mut k = Kahan::new();
        k.add(self.atom);
        for &(c, r) in &self.terms {
            k.add(c / r * (-(-r * t).exp_m1()));
        }
        k.total()
    }

    /// One Lindley step: convolve with `Exponential(rate)`, shift left by
    /// `x >= 0`, clip at zero. Returns the next waiting law, the mean of the
    /// clipped negative part (idle time) and the mean of the result.
    pub fn lindley_step(&self, rate: f64, x: f64) -> Result<(MixExpLaw, f64, f64)> {
        if x < 0.0 {
            return Err(Error::invalid(format!(
                "effective slot length must be >= 0 in the mixture evaluator, got {x}"
            )));
        }
        // Density of W + B as a pure mixture over the old rates plus `rate`.
        let mut mixed: Vec<(f64, f64)> = Vec::with_capacity(self.terms.len() + 1);
        let mut balance = Kahan::new();
        balance.add(self.atom * rate);
        for &(c, r) in &self.terms {
            let denom = rate - r;
            if denom.abs() < RATE_DUP_TOL * rate.max(r) {
                return Err(Error::NotExponential(format!(
                    "rate collision between {rate} and {r}; rates must be pairwise distinct"
                )));
            }
            let d = c * rate / denom;
            mixed.push((d, r));
            balance.add(-d);
        }
        mixed.push((balance.total(), rate));

        let mut atom = Kahan::new();
        let mut idle = Kahan::new();
        let mut terms = Vec::with_capacity(mixed.len());
        let mut mean = Kahan::new();
        for &(d, r) in &mixed {
            let one_minus_exp = -(-r * x).exp_m1();
            atom.add(d * one_minus_exp / r);
            idle.add(d * (x / r - one_minus_exp / (r * r)));
            let coef = d * (-r * x).exp();
            terms.push((coef, r));
            mean.add(coef / (r * r));
        }
        let next = MixExpLaw { atom: atom.total(), terms };
        let mass = next.total_mass();
        if (mass - 1.0).abs() > MASS_TOL {
            return Err(Error::MassLeak { mass, tol: MASS_TOL });
        }
        Ok((next, idle.total(), mean.total()))
    }

    /// Structural sanity: mass ~ 1 and CDF nondecreasing on log-spaced probes.
    pub fn validate(&self) -> Result<()> {
        let mass = self.total_mass();
        if (mass - 1.0).abs() > MASS_TOL {
            return Err(Error::MassLeak { mass, tol: MASS_TOL });
        }
        let scale = self
            .terms
            .iter()
            .map(|&(_, r)| 1.0 / r)
            .fold(1e-6, f64::max);
        let mut prev = -1e-12;
        for i in 0..64 {
            let t = scale * 1e-4 * (10f64).powf(8.0 * i as f64 / 63.0);
            let c = self.cdf(t);
            if c < prev - 1e-9 {
                return Err(Error::invalid(format!(
                    "mixture CDF decreases near t = {t}: {c} < {prev}"
                )));
            }
            prev = c;
        }
        Ok(())
    }
}

/// Make rates pairwise distinct by relative perturbation; preserves order.
pub fn perturb_duplicate_rates(rates: &mut [f64]) -> bool {
    let mut order: Vec<usize> = (0..rates.len()).collect();
    order.sort_by(|&a, &b| rates[a].partial_cmp(&rates[b]).unwrap());
    let mut changed = false;
    let mut last: Option<f64> = None;
    for &i in &order {
        if let Some(l) = last {
            if rates[i] - l < RATE_DUP_TOL * rates[i].max(l) {
                rates[i] = l * (1.0 + 16.0 * RATE_DUP_TOL);
                changed = true;
            }
        }
        last = Some(rates[i]);
    }
    changed
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_step_unit_exponential() {
        // W2 = (B - x)^+ with B ~ Exp(1), x = 1:
        // atom = 1 - e^-1, E W2 = e^-1, E I2 = x - (1 - e^-1) = e^-1.
        let w = MixExpLaw::zero();
        let (next, idle, mean) = w.lindley_step(1.0, 1.0).unwrap();
        let e1 = (-1.0f64).exp();
        assert!((next.atom - (1.0 - e1)).abs() < 1e-15);
        assert!((idle - e1).abs() < 1e-15);
        assert!((mean - e1).abs() < 1e-15);
        next.validate().unwrap();
    }

    #[test]
    fn two_steps_conserve_mass() {
        let w = MixExpLaw::zero();
        let (w2, _, _) = w.lindley_step(3.0, 1.0 / 3.0).unwrap();
        let (w3, _, _) = w2.lindley_step(2.0, 0.5).unwrap();
        assert!((w3.total_mass() - 1.0).abs() < 1e-12);
        w3.validate().unwrap();
    }

    #[test]
    fn collision_detected() {
        let w = MixExpLaw::zero();
        let (w2, _, _) = w.lindley_step(1.0, 1.0).unwrap();
        assert!(matches!(
            w2.lindley_step(1.0, 1.0),
            Err(Error::NotExponential(_))
        ));
    }

    #[test]
    fn perturbation_separates() {
        let mut rates = vec![1.0, 1.0, 2.0, 1.0];
        assert!(perturb_duplicate_rates(&mut rates));
        for i in 0..rates.len() {
            for j in 0..i {
                assert!((rates[i] - rates[j]).abs() > 1e-10);
            }
        }
        let mut distinct = vec![3.0, 2.0, 1.0];
        assert!(!perturb_duplicate_rates(&mut distinct));
    }
}
