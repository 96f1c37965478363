//! Service-time distribution catalogue.
//!
//! Every law a patient can have: parametric families, finite-support laws on
//! a grid, and shift/scale/negate transforms. Transform constructors fold
//! into leaf parameters whenever a closed form exists, so downstream code
//! mostly sees canonical leaves. All operations are pure; sampling is
//! inverse-transform from an explicit RNG state.

use crate::error::{Error, Result};
use crate::math::{self, Kahan};
use crate::pmf::GridPMF;
use rand::RngCore;

#[derive(Debug, Clone, PartialEq)]
pub enum ServiceDistribution {
    PointMass { value: f64 },
    Exponential { rate: f64 },
    Lognormal { m: f64, s: f64 },
    Normal { mean: f64, sd: f64 },
    Uniform { lo: f64, hi: f64 },
    Laplace { location: f64, scale: f64 },
    ParetoII { mu: f64, sigma: f64, beta: f64 },
    TwoPoint { lo: f64, hi: f64, p_hi: f64 },
    /// Symmetric three-point law: `center +- halfwidth` with probability
    /// `tail_prob` each, `center` otherwise.
    ThreePointSymmetric { center: f64, halfwidth: f64, tail_prob: f64 },
    Discrete(GridPMF),
    Shifted(Box<ServiceDistribution>, f64),
    Scaled(Box<ServiceDistribution>, f64),
    Negated(Box<ServiceDistribution>),
}

use ServiceDistribution as D;

fn check_finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be finite, got {v}")))
    }
}

impl ServiceDistribution {
    pub fn point_mass(value: f64) -> Result<Self> {
        check_finite("value", value)?;
        Ok(D::PointMass { value })
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        check_finite("rate", rate)?;
        if rate <= 0.0 {
            return Err(Error::invalid(format!("rate must be > 0, got {rate}")));
        }
        Ok(D::Exponential { rate })
    }

    pub fn lognormal(m: f64, s: f64) -> Result<Self> {
        check_finite("m", m)?;
        check_finite("s", s)?;
        if s < 0.0 {
            return Err(Error::invalid(format!("s must be >= 0, got {s}")));
        }
        if s == 0.0 {
            return Ok(D::PointMass { value: m.exp() });
        }
        Ok(D::Lognormal { m, s })
    }

    /// Lognormal from target mean and standard deviation:
    /// `s^2 = ln(1 + (sd/mean)^2)`, `m = ln(mean) - s^2/2`.
    pub fn lognormal_from_mean_sd(mean: f64, sd: f64) -> Result<(f64, f64)> {
        check_finite("mean", mean)?;
        check_finite("sd", sd)?;
        if mean <= 0.0 {
            return Err(Error::invalid(format!("mean must be > 0, got {mean}")));
        }
        if sd < 0.0 {
            return Err(Error::invalid(format!("sd must be >= 0, got {sd}")));
        }
        let cv2 = (sd / mean).powi(2);
        let s2 = cv2.ln_1p();
        let s = s2.sqrt();
        let m = mean.ln() - s2 / 2.0;
        Ok((m, s))
    }

    pub fn normal(mean: f64, sd: f64) -> Result<Self> {
        check_finite("mean", mean)?;
        check_finite("sd", sd)?;
        if sd < 0.0 {
            return Err(Error::invalid(format!("sd must be >= 0, got {sd}")));
        }
        if sd == 0.0 {
            return Ok(D::PointMass { value: mean });
        }
        Ok(D::Normal { mean, sd })
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        check_finite("lo", lo)?;
        check_finite("hi", hi)?;
        if lo > hi {
            return Err(Error::invalid(format!("need lo <= hi, got {lo} > {hi}")));
        }
        if lo == hi {
            return Ok(D::PointMass { value: lo });
        }
        Ok(D::Uniform { lo, hi })
    }

    pub fn laplace(location: f64, scale: f64) -> Result<Self> {
        check_finite("location", location)?;
        check_finite("scale", scale)?;
        if scale <= 0.0 {
            return Err(Error::invalid(format!("scale must be > 0, got {scale}")));
        }
        Ok(D::Laplace { location, scale })
    }

    pub fn pareto2(mu: f64, sigma: f64, beta: f64) -> Result<Self> {
        check_finite("mu", mu)?;
        check_finite("sigma", sigma)?;
        check_finite("beta", beta)?;
        if sigma <= 0.0 {
            return Err(Error::invalid(format!("sigma must be > 0, got {sigma}")));
        }
        if beta <= 2.0 {
            return Err(Error::invalid(format!(
                "beta must be > 2 for finite variance, got {beta}"
            )));
        }
        Ok(D::ParetoII { mu, sigma, beta })
    }

    pub fn two_point(lo: f64, hi: f64, p_hi: f64) -> Result<Self> {
        check_finite("lo", lo)?;
        check_finite("hi", hi)?;
        if !(0.0..=1.0).contains(&p_hi) {
            return Err(Error::invalid(format!("p_hi must be in [0,1], got {p_hi}")));
        }
        if lo > hi {
            return Err(Error::invalid(format!("need lo <= hi, got {lo} > {hi}")));
        }
        if lo == hi {
            return Ok(D::PointMass { value: lo });
        }
        Ok(D::TwoPoint { lo, hi, p_hi })
    }

    /// General symmetric three-point law.
    pub fn three_point(center: f64, halfwidth: f64, tail_prob: f64) -> Result<Self> {
        check_finite("center", center)?;
        check_finite("halfwidth", halfwidth)?;
        if halfwidth <= 0.0 {
            return Err(Error::invalid("halfwidth must be > 0"));
        }
        if !(0.0..=0.5).contains(&tail_prob) {
            return Err(Error::invalid(format!(
                "tail_prob must be in [0, 1/2], got {tail_prob}"
            )));
        }
        Ok(D::ThreePointSymmetric { center, halfwidth, tail_prob })
    }

    /// Three-point law parameterized as `center +- 1/a` with probability `a^2`
    /// each. Requires `a <= 1/sqrt(2)`; the variance is exactly 2.
    pub fn three_point_from_a(center: f64, a: f64) -> Result<Self> {
        if !(a > 0.0 && a <= std::f64::consts::FRAC_1_SQRT_2) {
            return Err(Error::invalid(format!(
                "a must satisfy 0 < a <= 1/sqrt(2), got {a}"
            )));
        }
        Self::three_point(center, 1.0 / a, (a * a).min(0.5))
    }

    pub fn discrete(pmf: GridPMF) -> Self {
        D::Discrete(pmf)
    }

    /// `X + c`, folded into leaf parameters where possible.
    pub fn shifted(self, c: f64) -> Self {
        if c == 0.0 {
            return self;
        }
        match self {
            D::PointMass { value } => D::PointMass { value: value + c },
            D::Normal { mean, sd } => D::Normal { mean: mean + c, sd },
            D::Uniform { lo, hi } => D::Uniform { lo: lo + c, hi: hi + c },
            D::Laplace { location, scale } => D::Laplace { location: location + c, scale },
            D::ParetoII { mu, sigma, beta } => D::ParetoII { mu: mu + c, sigma, beta },
            D::TwoPoint { lo, hi, p_hi } => D::TwoPoint { lo: lo + c, hi: hi + c, p_hi },
            D::ThreePointSymmetric { center, halfwidth, tail_prob } => {
                D::ThreePointSymmetric { center: center + c, halfwidth, tail_prob }
            }
            D::Discrete(pmf) => {
                let cells = c / pmf.step();
                if (cells - cells.round()).abs() < 1e-9 && cells.abs() < 9e15 {
                    D::Discrete(pmf.shift_cells(cells.round() as i64))
                } else {
                    D::Shifted(Box::new(D::Discrete(pmf)), c)
                }
            }
            D::Shifted(base, c0) => base.shifted(c0 + c),
            D::Scaled(base, g) => D::Scaled(base, g).wrap_shift(c),
            other => other.wrap_shift(c),
        }
    }

    fn wrap_shift(self, c: f64) -> Self {
        D::Shifted(Box::new(self), c)
    }

    /// `g * X` for `g > 0`, folded into leaf parameters where possible.
    pub fn scaled(self, g: f64) -> Result<Self> {
        if !(g > 0.0) || !g.is_finite() {
            return Err(Error::invalid(format!("scale factor must be > 0, got {g}")));
        }
        if g == 1.0 {
            return Ok(self);
        }
        Ok(match self {
            D::PointMass { value } => D::PointMass { value: value * g },
            D::Exponential { rate } => D::Exponential { rate: rate / g },
            D::Lognormal { m, s } => D::Lognormal { m: m + g.ln(), s },
            D::Normal { mean, sd } => D::Normal { mean: mean * g, sd: sd * g },
            D::Uniform { lo, hi } => D::Uniform { lo: lo * g, hi: hi * g },
            D::Laplace { location, scale } => {
                D::Laplace { location: location * g, scale: scale * g }
            }
            D::ParetoII { mu, sigma, beta } => {
                D::ParetoII { mu: mu * g, sigma: sigma * g, beta }
            }
            D::TwoPoint { lo, hi, p_hi } => D::TwoPoint { lo: lo * g, hi: hi * g, p_hi },
            D::ThreePointSymmetric { center, halfwidth, tail_prob } => {
                D::ThreePointSymmetric {
                    center: center * g,
                    halfwidth: halfwidth * g,
                    tail_prob,
                }
            }
            D::Discrete(pmf) => {
                D::Discrete(GridPMF::new(pmf.step() * g, pmf.offset(), pmf.probs().to_vec())?)
            }
            D::Shifted(base, c) => base.scaled(g)?.shifted(c * g),
            D::Scaled(base, g0) => base.scaled(g0 * g)?,
            D::Negated(base) => D::Negated(Box::new(base.scaled(g)?)),
        })
    }

    /// `-X`, folded into leaf parameters where possible.
    pub fn negated(self) -> Self {
        match self {
            D::PointMass { value } => D::PointMass { value: -value },
            D::Normal { mean, sd } => D::Normal { mean: -mean, sd },
            D::Uniform { lo, hi } => D::Uniform { lo: -hi, hi: -lo },
            D::Laplace { location, scale } => D::Laplace { location: -location, scale },
            D::TwoPoint { lo, hi, p_hi } => D::TwoPoint { lo: -hi, hi: -lo, p_hi: 1.0 - p_hi },
            D::ThreePointSymmetric { center, halfwidth, tail_prob } => {
                D::ThreePointSymmetric { center: -center, halfwidth, tail_prob }
            }
            D::Discrete(pmf) => D::Discrete(pmf.negated()),
            D::Shifted(base, c) => base.negated().shifted(-c),
            D::Scaled(base, g) => match base.negated().scaled(g) {
                Ok(d) => d,
                Err(_) => unreachable!("scale was already validated"),
            },
            D::Negated(base) => *base,
            other => D::Negated(Box::new(other)),
        }
    }

    /// Exact mean and variance.
    pub fn moments(&self) -> (f64, f64) {
        match self {
            D::PointMass { value } => (*value, 0.0),
            D::Exponential { rate } => (1.0 / rate, 1.0 / (rate * rate)),
            D::Lognormal { m, s } => {
                let s2 = s * s;
                let mean = (m + s2 / 2.0).exp();
                (mean, s2.exp_m1() * mean * mean)
            }
            D::Normal { mean, sd } => (*mean, sd * sd),
            D::Uniform { lo, hi } => ((lo + hi) / 2.0, (hi - lo).powi(2) / 12.0),
            D::Laplace { location, scale } => (*location, 2.0 * scale * scale),
            D::ParetoII { mu, sigma, beta } => {
                let mean = mu + sigma / (beta - 1.0);
                let var = sigma * sigma * beta / ((beta - 1.0).powi(2) * (beta - 2.0));
                (mean, var)
            }
            D::TwoPoint { lo, hi, p_hi } => {
                let mean = lo + (hi - lo) * p_hi;
                (mean, p_hi * (1.0 - p_hi) * (hi - lo).powi(2))
            }
            D::ThreePointSymmetric { center, halfwidth, tail_prob } => {
                (*center, 2.0 * tail_prob * halfwidth * halfwidth)
            }
            D::Discrete(pmf) => pmf.moments(),
            D::Shifted(base, c) => {
                let (m, v) = base.moments();
                (m + c, v)
            }
            D::Scaled(base, g) => {
                let (m, v) = base.moments();
                (m * g, v * g * g)
            }
            D::Negated(base) => {
                let (m, v) = base.moments();
                (-m, v)
            }
        }
    }

    pub fn mean(&self) -> f64 {
        self.moments().0
    }

    pub fn variance(&self) -> f64 {
        self.moments().1
    }

    pub fn sd(&self) -> f64 {
        self.variance().sqrt()
    }

    /// P(X <= x).
    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            D::PointMass { value } => {
                if x >= *value {
                    1.0
                } else {
                    0.0
                }
            }
            D::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
            D::Lognormal { m, s } => {
                if x <= 0.0 {
                    0.0
                } else {
                    math::normal_cdf((x.ln() - m) / s)
                }
            }
            D::Normal { mean, sd } => math::normal_cdf((x - mean) / sd),
            D::Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
            D::Laplace { location, scale } => {
                let z = (x - location) / scale;
                if z <= 0.0 {
                    0.5 * z.exp()
                } else {
                    1.0 - 0.5 * (-z).exp()
                }
            }
            D::ParetoII { mu, sigma, beta } => {
                if x < *mu {
                    0.0
                } else {
                    1.0 - (1.0 + (x - mu) / sigma).powf(-beta)
                }
            }
            D::TwoPoint { lo, hi, p_hi } => {
                if x < *lo {
                    0.0
                } else if x < *hi {
                    1.0 - p_hi
                } else {
                    1.0
                }
            }
            D::ThreePointSymmetric { center, halfwidth, tail_prob } => {
                if x < center - halfwidth {
                    0.0
                } else if x < *center {
                    *tail_prob
                } else if x < center + halfwidth {
                    1.0 - tail_prob
                } else {
                    1.0
                }
            }
            D::Discrete(pmf) => {
                let idx = (x / pmf.step() + 1e-9).floor() as i64;
                pmf.cdf_at_index(idx)
            }
            D::Shifted(base, c) => base.cdf(x - c),
            D::Scaled(base, g) => base.cdf(x / g),
            D::Negated(base) => 1.0 - base.cdf(-x) + base.atom_at(-x),
        }
    }

    /// P(X = x); nonzero only for finite-support laws.
    pub fn atom_at(&self, x: f64) -> f64 {
        match self.finite_support() {
            Some(atoms) => atoms
                .iter()
                .filter(|(v, _)| (v - x).abs() < 1e-12 * (1.0 + x.abs()))
                .map(|(_, p)| p)
                .sum(),
            None => 0.0,
        }
    }

    /// Density at `x` for continuous laws.
    pub fn pdf(&self, x: f64) -> Result<f64> {
        Ok(match self {
            D::Exponential { rate } => {
                if x < 0.0 {
                    0.0
                } else {
                    rate * (-rate * x).exp()
                }
            }
            D::Lognormal { m, s } => {
                if x <= 0.0 {
                    0.0
                } else {
                    math::normal_pdf((x.ln() - m) / s) / (x * s)
                }
            }
            D::Normal { mean, sd } => math::normal_pdf((x - mean) / sd) / sd,
            D::Uniform { lo, hi } => {
                if x < *lo || x > *hi {
                    0.0
                } else {
                    1.0 / (hi - lo)
                }
            }
            D::Laplace { location, scale } => {
                (-((x - location).abs() / scale)).exp() / (2.0 * scale)
            }
            D::ParetoII { mu, sigma, beta } => {
                if x < *mu {
                    0.0
                } else {
                    beta / sigma * (1.0 + (x - mu) / sigma).powf(-beta - 1.0)
                }
            }
            D::Shifted(base, c) => base.pdf(x - c)?,
            D::Scaled(base, g) => base.pdf(x / g)? / g,
            D::Negated(base) => base.pdf(-x)?,
            other => {
                return Err(Error::Unsupported(format!(
                    "no density for {other:?}"
                )))
            }
        })
    }

    /// Quantile under the infimum convention
    /// `Q(y) = inf {x : y <= P(X <= x)}`, `y` in (0,1).
    pub fn quantile(&self, y: f64) -> Result<f64> {
        if !(y > 0.0 && y < 1.0) {
            return Err(Error::invalid(format!("quantile level must be in (0,1), got {y}")));
        }
        Ok(self.quantile_unchecked(y))
    }

    fn quantile_unchecked(&self, y: f64) -> f64 {
        match self {
            D::PointMass { value } => *value,
            D::Exponential { rate } => -(-y).ln_1p() / rate,
            D::Lognormal { m, s } => (m + s * math::normal_quantile(y)).exp(),
            D::Normal { mean, sd } => mean + sd * math::normal_quantile(y),
            D::Uniform { lo, hi } => lo + y * (hi - lo),
            D::Laplace { location, scale } => {
                if y <= 0.5 {
                    location + scale * (2.0 * y).ln()
                } else {
                    location - scale * (2.0 * (1.0 - y)).ln()
                }
            }
            D::ParetoII { mu, sigma, beta } => mu + sigma * ((1.0 - y).powf(-1.0 / beta) - 1.0),
            D::TwoPoint { lo, hi, p_hi } => {
                if y <= 1.0 - p_hi {
                    *lo
                } else {
                    *hi
                }
            }
            D::ThreePointSymmetric { center, halfwidth, tail_prob } => {
                if y <= *tail_prob {
                    center - halfwidth
                } else if y <= 1.0 - tail_prob {
                    *center
                } else {
                    center + halfwidth
                }
            }
            D::Discrete(pmf) => pmf.quantile(y),
            D::Shifted(base, c) => base.quantile_unchecked(y) + c,
            D::Scaled(base, g) => base.quantile_unchecked(y) * g,
            // Negated survives canonicalization only over continuous leaves,
            // where Q_{-X}(y) = -Q_X(1-y) under the infimum convention.
            D::Negated(base) => -base.quantile_unchecked(1.0 - y),
        }
    }

    /// Finite support as sorted (value, mass) atoms, when the law is discrete.
    pub fn finite_support(&self) -> Option<Vec<(f64, f64)>> {
        let atoms = match self {
            D::PointMass { value } => vec![(*value, 1.0)],
            D::TwoPoint { lo, hi, p_hi } => vec![(*lo, 1.0 - p_hi), (*hi, *p_hi)],
            D::ThreePointSymmetric { center, halfwidth, tail_prob } => vec![
                (center - halfwidth, *tail_prob),
                (*center, 1.0 - 2.0 * tail_prob),
                (center + halfwidth, *tail_prob),
            ],
            D::Discrete(pmf) => pmf.iter_atoms().collect(),
            D::Shifted(base, c) => {
                let mut a = base.finite_support()?;
                for (v, _) in &mut a {
                    *v += c;
                }
                a
            }
            D::Scaled(base, g) => {
                let mut a = base.finite_support()?;
                for (v, _) in &mut a {
                    *v *= g;
                }
                a
            }
            D::Negated(base) => {
                let mut a = base.finite_support()?;
                for (v, _) in &mut a {
                    *v = -*v;
                }
                a.reverse();
                a
            }
            _ => return None,
        };
        Some(atoms)
    }

    /// Finite support interval, when both ends exist.
    fn bounded_support(&self) -> Option<(f64, f64)> {
        match self {
            D::Uniform { lo, hi } => Some((*lo, *hi)),
            D::Shifted(base, c) => base.bounded_support().map(|(a, b)| (a + c, b + c)),
            D::Scaled(base, g) => base.bounded_support().map(|(a, b)| (a * g, b * g)),
            D::Negated(base) => base.bounded_support().map(|(a, b)| (-b, -a)),
            _ => self
                .finite_support()
                .map(|a| (a.first().unwrap().0, a.last().unwrap().0)),
        }
    }

    /// True when the law is symmetric around its mean, certified by family
    /// structure or a pmf palindrome check (never statistically).
    pub fn is_symmetric(&self) -> bool {
        match self {
            D::PointMass { .. }
            | D::Normal { .. }
            | D::Uniform { .. }
            | D::Laplace { .. }
            | D::ThreePointSymmetric { .. } => true,
            D::TwoPoint { p_hi, .. } => (p_hi - 0.5).abs() < 1e-12,
            D::Discrete(pmf) => pmf.is_palindrome(1e-12),
            D::Shifted(base, _) | D::Scaled(base, _) | D::Negated(base) => base.is_symmetric(),
            _ => false,
        }
    }

    /// Nearest-bin discretization onto a grid of width `step`: the mass of
    /// bin `k` is `F(k*step + step/2) - F(k*step - step/2)`; tails beyond
    /// cumulative mass `mass_tol` are truncated and the result renormalized.
    pub fn discretize(&self, step: f64, mass_tol: f64) -> Result<GridPMF> {
        if !(step > 0.0) {
            return Err(Error::invalid(format!("step must be > 0, got {step}")));
        }
        if !(0.0..=1e-6).contains(&mass_tol) {
            return Err(Error::invalid(format!(
                "mass_tol must be in [0, 1e-6], got {mass_tol}"
            )));
        }
        if let Some(atoms) = self.finite_support() {
            let idx_atoms: Vec<(i64, f64)> = atoms
                .iter()
                .map(|&(v, p)| ((v / step).round() as i64, p))
                .collect();
            return GridPMF::from_atoms(step, &idx_atoms);
        }
        let (lo_x, hi_x) = match self.bounded_support() {
            Some(b) => b,
            None => {
                if mass_tol == 0.0 {
                    return Err(Error::UnboundedSupport);
                }
                let half = (mass_tol / 2.0).max(1e-300);
                (self.quantile_unchecked(half), self.quantile_unchecked(1.0 - half))
            }
        };
        let k_min = (lo_x / step).round() as i64;
        let k_max = (hi_x / step).round() as i64;
        debug_assert!(k_max >= k_min);
        let n = (k_max - k_min + 1) as usize;
        let mut probs = Vec::with_capacity(n);
        let mut prev_cdf = self.cdf((k_min as f64 - 0.5) * step);
        let mut total = Kahan::new();
        for k in k_min..=k_max {
            let next_cdf = self.cdf((k as f64 + 0.5) * step);
            let p = (next_cdf - prev_cdf).max(0.0);
            probs.push(p);
            total.add(p);
            prev_cdf = next_cdf;
        }
        let mass = total.total();
        if mass < 1.0 - 2.0 * mass_tol - 1e-12 {
            return Err(Error::MassLeak { mass, tol: 2.0 * mass_tol });
        }
        for p in &mut probs {
            *p /= mass;
        }
        GridPMF::new(step, k_min, probs)
    }

    /// One inverse-transform draw. Deterministic given the RNG state.
    pub fn sample(&self, rng: &mut impl RngCore) -> f64 {
        self.quantile_unchecked(open01(rng))
    }
}

/// Uniform draw strictly inside (0,1): one `next_u64` per draw.
pub fn open01(rng: &mut impl RngCore) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / 9007199254740992.0)
}

// ---------------------------------------------------------------------------
// Dilation-order certificates
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DilationStatus {
    Proven,
    Unknown,
}

/// Outcome of the dilation-order check. `Proven` only when one of the
/// implemented sufficient criteria fires for every adjacent pair in
/// variance order; never a false positive.
#[derive(Debug, Clone)]
pub struct DilationCertificate {
    pub status: DilationStatus,
    pub rule: String,
}

impl DilationCertificate {
    pub fn is_proven(&self) -> bool {
        self.status == DilationStatus::Proven
    }
}

/// Certify `B_(1) <=_dil B_(2) <=_dil ...` along the variance-sorted order
/// of `ds` (ties broken by position). Sufficient criteria, checked per
/// adjacent pair after stripping shifts and matched negations:
/// degenerate-first, exponential family, lognormal with both parameters
/// nondecreasing, same location-scale family, scaled copy with factor >= 1,
/// and finite-support convolution with an independent mean-zero noise.
pub fn check_dilation_order(ds: &[ServiceDistribution]) -> DilationCertificate {
    if ds.is_empty() {
        return DilationCertificate {
            status: DilationStatus::Unknown,
            rule: "empty instance".into(),
        };
    }
    let mut order: Vec<usize> = (0..ds.len()).collect();
    order.sort_by(|&a, &b| {
        ds[a]
            .variance()
            .partial_cmp(&ds[b].variance())
            .unwrap()
            .then(a.cmp(&b))
    });
    let mut rules: Vec<&'static str> = Vec::new();
    for w in order.windows(2) {
        let a = strip_centering(&ds[w[0]]);
        let b = strip_centering(&ds[w[1]]);
        match pair_rule(&a, &b) {
            Some(rule) => {
                if !rules.contains(&rule) {
                    rules.push(rule);
                }
            }
            None => {
                return DilationCertificate {
                    status: DilationStatus::Unknown,
                    rule: format!(
                        "no criterion applies to patients {} and {}",
                        w[0] + 1,
                        w[1] + 1
                    ),
                }
            }
        }
    }
    DilationCertificate {
        status: DilationStatus::Proven,
        rule: rules.join(" + "),
    }
}

/// Dilation order is invariant to shifts and joint negation.
fn strip_centering(d: &ServiceDistribution) -> ServiceDistribution {
    match d {
        D::Shifted(base, _) => strip_centering(base),
        _ => d.clone(),
    }
}

fn pair_rule(a: &ServiceDistribution, b: &ServiceDistribution) -> Option<&'static str> {
    if a.variance() == 0.0 {
        return Some("degenerate-first");
    }
    if let (D::Negated(x), D::Negated(y)) = (a, b) {
        return pair_rule(x, y);
    }
    match (a, b) {
        (D::Exponential { rate: ra }, D::Exponential { rate: rb }) if rb <= ra => {
            return Some("exponential-family")
        }
        (D::Lognormal { m: ma, s: sa }, D::Lognormal { m: mb, s: sb })
            if ma <= mb && sa <= sb =>
        {
            return Some("lognormal-parameters")
        }
        (D::Normal { .. }, D::Normal { .. })
        | (D::Uniform { .. }, D::Uniform { .. })
        | (D::Laplace { .. }, D::Laplace { .. }) => return Some("location-scale"),
        (D::ParetoII { beta: ba, .. }, D::ParetoII { beta: bb, .. })
            if (ba - bb).abs() < 1e-12 =>
        {
            return Some("location-scale")
        }
        (D::TwoPoint { p_hi: pa, .. }, D::TwoPoint { p_hi: pb, .. })
            if (pa - pb).abs() < 1e-12 =>
        {
            return Some("location-scale")
        }
        (
            D::ThreePointSymmetric { tail_prob: ta, .. },
            D::ThreePointSymmetric { tail_prob: tb, .. },
        ) if (ta - tb).abs() < 1e-12 => return Some("location-scale"),
        _ => {}
    }
    if let Some(g) = scaled_copy_ratio(a, b) {
        if g >= 1.0 - 1e-12 {
            return Some("scaled-copy");
        }
    }
    if mean_zero_convolution_factor(a, b) {
        return Some("mean-zero-convolution");
    }
    None
}

/// If `b` is distributed as `g * a`, return `g`.
pub fn scaled_copy_ratio(a: &ServiceDistribution, b: &ServiceDistribution) -> Option<f64> {
    let rel = |x: f64, y: f64| (x - y).abs() <= 1e-12 * (1.0 + x.abs().max(y.abs()));
    match (a, b) {
        (D::Exponential { rate: ra }, D::Exponential { rate: rb }) => Some(ra / rb),
        (D::PointMass { value: va }, D::PointMass { value: vb })
            if va.signum() == vb.signum() && *va != 0.0 =>
        {
            Some(vb / va)
        }
        (D::Lognormal { m: ma, s: sa }, D::Lognormal { m: mb, s: sb }) if rel(*sa, *sb) => {
            Some((mb - ma).exp())
        }
        (D::TwoPoint { lo: la, hi: ha, p_hi: pa }, D::TwoPoint { lo: lb, hi: hb, p_hi: pb })
            if rel(*pa, *pb) =>
        {
            let g = if *ha != 0.0 { hb / ha } else { lb / la };
            if g > 0.0 && rel(la * g, *lb) && rel(ha * g, *hb) {
                Some(g)
            } else {
                None
            }
        }
        (D::Discrete(pa), D::Discrete(pb)) => {
            if pa.offset() == pb.offset()
                && pa.probs().len() == pb.probs().len()
                && pa
                    .probs()
                    .iter()
                    .zip(pb.probs())
                    .all(|(x, y)| (x - y).abs() < 1e-12)
            {
                Some(pb.step() / pa.step())
            } else {
                None
            }
        }
        (D::Negated(x), D::Negated(y)) => scaled_copy_ratio(x, y),
        _ => None,
    }
}

/// True when `b - E b` equals `(a - E a) + N` for an independent mean-zero
/// noise `N`, detected by exact deconvolution of the centered pmfs.
fn mean_zero_convolution_factor(a: &ServiceDistribution, b: &ServiceDistribution) -> bool {
    let (Some(sa), Some(sb)) = (a.finite_support(), b.finite_support()) else {
        return false;
    };
    let (ma, _) = a.moments();
    let (mb, _) = b.moments();
    let ca: Vec<(f64, f64)> = sa.iter().map(|&(v, p)| (v - ma, p)).collect();
    let cb: Vec<(f64, f64)> = sb.iter().map(|&(v, p)| (v - mb, p)).collect();
    let values = ca.iter().chain(cb.iter()).map(|&(v, _)| v);
    let Some(g) = math::float_gcd(values, 1e-9) else {
        return false;
    };
    let to_coeffs = |atoms: &[(f64, f64)]| -> Option<(i64, Vec<f64>)> {
        let idx: Vec<i64> = atoms
            .iter()
            .map(|&(v, _)| (v / g).round() as i64)
            .collect();
        for (&(v, _), &i) in atoms.iter().zip(&idx) {
            if (v - i as f64 * g).abs() > 1e-9 {
                return None;
            }
        }
        let lo = *idx.iter().min()?;
        let hi = *idx.iter().max()?;
        let mut c = vec![0.0; (hi - lo + 1) as usize];
        for (&(_, p), &i) in atoms.iter().zip(&idx) {
            c[(i - lo) as usize] += p;
        }
        Some((lo, c))
    };
    let Some((lo_a, pa)) = to_coeffs(&ca) else { return false };
    let Some((lo_b, pb)) = to_coeffs(&cb) else { return false };
    if pb.len() < pa.len() {
        return false;
    }
    // Long division of the generating polynomials: q = b / a.
    let mut rem = pb.clone();
    let qn = pb.len() - pa.len() + 1;
    let mut quot = vec![0.0; qn];
    let lead = pa[0];
    if lead.abs() < 1e-12 {
        return false;
    }
    for i in 0..qn {
        let c = rem[i] / lead;
        quot[i] = c;
        for (j, &av) in pa.iter().enumerate() {
            rem[i + j] -= c * av;
        }
    }
    if rem.iter().any(|r| r.abs() > 1e-9) {
        return false;
    }
    if quot.iter().any(|&q| q < -1e-12) {
        return false;
    }
    let total: f64 = quot.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return false;
    }
    let lo_q = lo_b - lo_a;
    let mean: f64 = quot
        .iter()
        .enumerate()
        .map(|(i, &q)| q * (lo_q + i as i64) as f64 * g)
        .sum();
    mean.abs() <= 1e-9
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn moments_closed_forms() {
        let (m, v) = D::exponential(2.0).unwrap().moments();
        assert_eq!((m, v), (0.5, 0.25));

        // Example-2 small patient with m = 10: mean 10, variance 10.
        let (m, v) = D::two_point(0.0, 11.0, 10.0 / 11.0).unwrap().moments();
        assert!((m - 10.0).abs() < 1e-12);
        assert!((v - 10.0).abs() < 1e-12);

        let (m, v) = D::lognormal(50f64.ln(), 0.33).unwrap().moments();
        assert!((m - 50.0 * (0.33f64 * 0.33 / 2.0).exp()).abs() < 1e-9);
        assert!((m - 52.798).abs() < 1e-3);
        assert!((v - 320.72).abs() < 0.05);
    }

    #[test]
    fn lognormal_fit_matches_table_parameters() {
        let (_, s) = D::lognormal_from_mean_sd(15.50, 5.038).unwrap();
        assert!((s - 0.3169).abs() < 5e-5);
        let (_, s) = D::lognormal_from_mean_sd(19.09, 6.85).unwrap();
        assert!((s - 0.3480).abs() < 5e-5);
        let (m, s) = D::lognormal_from_mean_sd(10.0, 0.0).unwrap();
        assert_eq!(s, 0.0);
        assert!((m - 10f64.ln()).abs() < 1e-15);
        assert!(D::lognormal_from_mean_sd(-1.0, 1.0).is_err());
    }

    #[test]
    fn fitted_lognormal_reproduces_moments() {
        let (m, s) = D::lognormal_from_mean_sd(19.09, 6.85).unwrap();
        let (mean, var) = D::lognormal(m, s).unwrap().moments();
        assert!((mean - 19.09).abs() < 1e-10);
        assert!((var.sqrt() - 6.85).abs() < 1e-10);
    }

    #[test]
    fn quantile_conventions() {
        let e = D::exponential(1.0).unwrap();
        assert!((e.quantile(0.5).unwrap() - std::f64::consts::LN_2).abs() < 1e-15);

        // Infimum convention: CDF(0) = 0.5 >= 0.5.
        let t = D::two_point(0.0, 1.0, 0.5).unwrap();
        assert_eq!(t.quantile(0.5).unwrap(), 0.0);

        let n = D::normal(0.0, 1.0).unwrap();
        assert!((n.quantile(0.8).unwrap() - 0.8416).abs() < 1e-4);

        assert!(n.quantile(0.0).is_err());
        assert!(n.quantile(1.0).is_err());
    }

    #[test]
    fn quantile_monotone_nondecreasing() {
        let laws = [
            D::exponential(0.7).unwrap(),
            D::two_point(-1.0, 4.0, 0.3).unwrap(),
            D::laplace(1.0, 2.0).unwrap(),
            D::pareto2(0.0, 1.0, 3.0).unwrap(),
            D::lognormal(0.2, 0.5).unwrap().negated(),
        ];
        for d in &laws {
            let mut prev = f64::NEG_INFINITY;
            for i in 1..200 {
                let q = d.quantile(i as f64 / 200.0).unwrap();
                assert!(q >= prev - 1e-12, "{d:?} at {i}");
                prev = q;
            }
        }
    }

    #[test]
    fn discretize_point_and_atoms() {
        let p = D::point_mass(3.2).unwrap().discretize(1.0, 0.0).unwrap();
        assert_eq!(p.offset(), 3);
        assert_eq!(p.probs(), &[1.0]);

        let t = D::two_point(0.0, 50.0, 0.25)
            .unwrap()
            .discretize(1.0, 0.0)
            .unwrap();
        assert!((t.prob_at_index(0) - 0.75).abs() < 1e-15);
        assert!((t.prob_at_index(50) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn discretize_lognormal_mean_close() {
        let d = D::lognormal(50f64.ln(), 0.33).unwrap();
        let pmf = d.discretize(1.0, 1e-12).unwrap();
        let (exact, _) = d.moments();
        assert!((pmf.total_mass() - 1.0).abs() < 1e-12);
        // Half-step rounding bias bound; actual error is far smaller.
        assert!((pmf.mean() - exact).abs() < 0.51);
        assert!((pmf.mean() - exact).abs() < 0.01);
    }

    #[test]
    fn discretize_moment_agreement_across_variants() {
        for d in [
            D::normal(4.0, 1.5).unwrap(),
            D::uniform(-2.0, 5.0).unwrap(),
            D::laplace(1.0, 0.8).unwrap(),
            D::exponential(0.5).unwrap(),
        ] {
            let step = 0.01;
            let pmf = d.discretize(step, 1e-12).unwrap();
            let (m, v) = d.moments();
            assert!((pmf.mean() - m).abs() < step, "{d:?}");
            assert!((pmf.variance() - v).abs() < v * 0.01 + step, "{d:?}");
        }
    }

    #[test]
    fn discretize_unbounded_zero_tol_rejected() {
        assert!(D::exponential(1.0).unwrap().discretize(1.0, 0.0).is_err());
        // Bounded continuous support works with zero tolerance.
        assert!(D::uniform(0.0, 4.0).unwrap().discretize(0.5, 0.0).is_ok());
    }

    #[test]
    fn sampling_is_deterministic_and_matches_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let p = D::point_mass(7.0).unwrap();
        assert_eq!(p.sample(&mut rng), 7.0);

        let e = D::exponential(1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let n = 1_000_000;
        let mean: f64 = (0..n).map(|_| e.sample(&mut rng)).sum::<f64>() / n as f64;
        assert!((mean - 1.0).abs() < 0.01);

        let neg = D::exponential(1.0).unwrap().negated();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!((0..10_000).all(|_| neg.sample(&mut rng) <= 0.0));

        let mut a = ChaCha8Rng::seed_from_u64(9);
        let mut b = ChaCha8Rng::seed_from_u64(9);
        let d = D::lognormal(1.0, 0.4).unwrap();
        for _ in 0..100 {
            assert_eq!(d.sample(&mut a), d.sample(&mut b));
        }
    }

    #[test]
    fn negation_preserves_variance() {
        for d in [
            D::exponential(2.0).unwrap(),
            D::lognormal(1.0, 0.3).unwrap(),
            D::two_point(0.0, 3.0, 0.25).unwrap(),
        ] {
            let (m, v) = d.moments();
            let (mn, vn) = d.clone().negated().moments();
            assert_eq!(mn, -m);
            assert_eq!(vn, v);
        }
    }

    #[test]
    fn transforms_fold() {
        let d = D::exponential(2.0).unwrap().scaled(4.0).unwrap();
        assert_eq!(d, D::Exponential { rate: 0.5 });
        let d = D::lognormal(1.0, 0.3).unwrap().scaled(2.0).unwrap();
        assert_eq!(d, D::Lognormal { m: 1.0 + 2f64.ln(), s: 0.3 });
        let d = D::normal(1.0, 2.0).unwrap().negated().shifted(3.0);
        assert_eq!(d, D::Normal { mean: 2.0, sd: 2.0 });
        let d = D::exponential(1.0).unwrap().negated().negated();
        assert_eq!(d, D::Exponential { rate: 1.0 });
    }

    #[test]
    fn negated_cdf_has_correct_atoms() {
        let d = D::two_point(0.0, 2.0, 0.25).unwrap().negated();
        // -X in {-2, 0} with P(-2) = 0.25
        assert!((d.cdf(-2.0) - 0.25).abs() < 1e-12);
        assert!((d.cdf(-1.0) - 0.25).abs() < 1e-12);
        assert!((d.cdf(0.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dilation_lognormal_chain_proven() {
        let ds: Vec<_> = (1..=5)
            .map(|i| D::lognormal(50f64.ln() + (i as f64).ln(), 0.33).unwrap())
            .collect();
        assert!(check_dilation_order(&ds).is_proven());
    }

    #[test]
    fn dilation_exponentials_proven_any_rates() {
        let ds: Vec<_> = [0.7, 3.0, 1.2, 5.0]
            .iter()
            .map(|&r| D::exponential(r).unwrap())
            .collect();
        assert!(check_dilation_order(&ds).is_proven());
    }

    #[test]
    fn dilation_unprovable_pair_unknown() {
        // The three-point law here is not a scaled copy of the two-point
        // law and not a mean-zero convolution of it either.
        let ds = vec![
            D::two_point(0.0, 2.0, 0.5).unwrap(),
            D::three_point(1.0, 2.0, 0.1).unwrap(),
        ];
        let cert = check_dilation_order(&ds);
        assert_eq!(cert.status, DilationStatus::Unknown);
    }

    #[test]
    fn dilation_proven_when_noise_convolution_exists() {
        // center +- 1 plus independent +-1 noise gives the {0, 1/2} tail
        // three-point profile; the deconvolution criterion fires.
        let ds = vec![
            D::two_point(0.0, 2.0, 0.5).unwrap(),
            D::three_point(1.0, 2.0, 0.25).unwrap(),
        ];
        assert!(check_dilation_order(&ds).is_proven());
    }

    #[test]
    fn dilation_example1_pair_never_proven() {
        // Variances tie at 2 but no implemented criterion fires.
        let ds = vec![
            D::three_point_from_a(10.0, 0.5).unwrap(),
            D::three_point_from_a(10.0, 0.4).unwrap(),
        ];
        assert_eq!(check_dilation_order(&ds).status, DilationStatus::Unknown);
    }

    #[test]
    fn dilation_scaled_copy_and_convolution() {
        // Figure-1 shape: small Bernoulli plus a 50x scaled copy.
        let small = D::two_point(0.0, 1.0, 0.75).unwrap();
        let big = small.clone().scaled(50.0).unwrap();
        assert!(check_dilation_order(&[small, big]).is_proven());

        // Two-point law vs the same law plus independent +-1 noise.
        let a = D::two_point(0.0, 2.0, 0.5).unwrap();
        let b = D::discrete(
            GridPMF::from_atoms(1.0, &[(0, 0.25), (2, 0.5), (4, 0.25)]).unwrap(),
        );
        let cert = check_dilation_order(&[a, b]);
        assert!(cert.is_proven(), "{}", cert.rule);
        assert!(cert.rule.contains("mean-zero-convolution"));
    }

    #[test]
    fn example1_law_variance_is_two() {
        for a in [0.3, 0.5, std::f64::consts::FRAC_1_SQRT_2] {
            let d = D::three_point_from_a(5.0, a).unwrap();
            assert!((d.variance() - 2.0).abs() < 1e-12);
            assert!(d.is_symmetric());
        }
        assert!(D::three_point_from_a(0.0, 0.8).is_err());
    }

    #[test]
    fn symmetry_certificates() {
        assert!(D::normal(3.0, 1.0).unwrap().is_symmetric());
        assert!(D::uniform(0.0, 2.0).unwrap().is_symmetric());
        assert!(D::laplace(0.0, 1.0).unwrap().is_symmetric());
        assert!(D::two_point(0.0, 2.0, 0.5).unwrap().is_symmetric());
        assert!(!D::two_point(0.0, 2.0, 0.3).unwrap().is_symmetric());
        assert!(!D::exponential(1.0).unwrap().is_symmetric());
        assert!(!D::lognormal(0.0, 1.0).unwrap().is_symmetric());
    }
}
