//! Computable worst-case bounds on the SVF approximation ratio: the 2/4
//! dilation/symmetry envelope, the normal-walk refinement with its limit
//! constant, the simulation-based asymmetry-split bound, location-scale
//! constants K(B, omega) with closed forms for the classic families, the
//! newsvendor lower bound and slack upper bound they quotient from,
//! Kingman's bound, the lognormal multiplicative-slack bound, and the
//! half-normal constant used to normalize asymptotic studies.

use crate::dist::{check_dilation_order, open01, ServiceDistribution};
use crate::error::{Error, Result};
use crate::exec;
use crate::lindley::Instance;
use crate::math::{
    adaptive_simpson, normal_cdf, normal_neg_part, normal_pos_part, normal_quantile, Kahan,
    SQRT_2_OVER_PI,
};
use crate::pmf::GridPMF;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const MC_BLOCK: u64 = 8192;

// ---------------------------------------------------------------------------
// Reporting
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub enum Method {
    ClosedForm,
    Quadrature,
    MonteCarlo { seed: u64, samples: u64 },
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Method::ClosedForm => write!(f, "closed-form"),
            Method::Quadrature => write!(f, "quadrature"),
            Method::MonteCarlo { seed, samples } => {
                write!(f, "monte-carlo(seed={seed};samples={samples})")
            }
        }
    }
}

/// A named bound value with provenance. Monte Carlo entries carry a
/// standard error; closed-form entries do not.
#[derive(Debug, Clone)]
pub struct BoundReport {
    pub name: String,
    pub value: f64,
    pub stderr: Option<f64>,
    pub method: Method,
    pub assumptions: Vec<String>,
}

impl BoundReport {
    fn closed(name: &str, value: f64, assumptions: Vec<String>) -> Self {
        BoundReport {
            name: name.into(),
            value,
            stderr: None,
            method: Method::ClosedForm,
            assumptions,
        }
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{:.10},{},{},{}",
            self.name,
            self.value,
            self.stderr.map(|s| format!("{s:.3e}")).unwrap_or_default(),
            self.method,
            self.assumptions.join("; ")
        )
    }
}

// ---------------------------------------------------------------------------
// K(B, omega): location-scale constants
// ---------------------------------------------------------------------------

/// Standardized shapes (mean 0, variance 1) of the classic families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StandardFamily {
    Normal,
    Uniform,
    ShiftedExponential,
    Laplace,
}

impl StandardFamily {
    pub fn shape(self) -> ServiceDistribution {
        match self {
            StandardFamily::Normal => ServiceDistribution::normal(0.0, 1.0).unwrap(),
            StandardFamily::Uniform => {
                ServiceDistribution::uniform(-3f64.sqrt(), 3f64.sqrt()).unwrap()
            }
            StandardFamily::ShiftedExponential => {
                ServiceDistribution::exponential(1.0).unwrap().shifted(-1.0)
            }
            StandardFamily::Laplace => {
                ServiceDistribution::laplace(0.0, std::f64::consts::FRAC_1_SQRT_2).unwrap()
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            StandardFamily::Normal => "normal",
            StandardFamily::Uniform => "uniform",
            StandardFamily::ShiftedExponential => "shifted-exponential",
            StandardFamily::Laplace => "laplace",
        }
    }

    /// Closed-form K(B, omega) for the family.
    pub fn k_closed_form(self, omega: f64) -> f64 {
        let w = omega;
        match self {
            StandardFamily::Normal => {
                let q = normal_quantile(1.0 - w);
                (2.0 * w).sqrt() / (w * normal_neg_part(q) + (1.0 - w) * normal_pos_part(q))
            }
            StandardFamily::Uniform => (2.0 / (3.0 * w)).sqrt() / (1.0 - w),
            StandardFamily::ShiftedExponential => -std::f64::consts::SQRT_2 / (w.sqrt() * w.ln()),
            StandardFamily::Laplace => {
                let m = w.min(1.0 - w);
                2.0 * w.sqrt() / (m * (1.0 - (2.0 * m).ln()))
            }
        }
    }
}

/// Closed-form K(B, omega) for the Pareto type II family with tail `beta`,
/// derived from the generic definition:
/// `K = sqrt(2 omega / (beta (beta - 2))) / (omega^((beta-1)/beta) - omega)`.
pub fn k_pareto(beta: f64, omega: f64) -> Result<f64> {
    if beta <= 2.0 {
        return Err(Error::invalid("pareto needs beta > 2"));
    }
    if !(omega > 0.0 && omega < 1.0) {
        return Err(Error::invalid("omega must be in (0,1)"));
    }
    let denom = omega.powf((beta - 1.0) / beta) - omega;
    Ok((2.0 * omega / (beta * (beta - 2.0))).sqrt() / denom)
}

/// Standardized Pareto II shape: variance one, mean zero.
pub fn standard_pareto(beta: f64) -> Result<ServiceDistribution> {
    let sigma = (beta - 1.0) * ((beta - 2.0) / beta).sqrt();
    let mu = -sigma / (beta - 1.0);
    ServiceDistribution::pareto2(mu, sigma, beta)
}

/// `omega * E(B - q)^- + (1 - omega) * E(B - q)^+` with `q = Q_B(1 - omega)`:
/// the newsvendor value of a shape. Standard families take closed forms,
/// finite supports sum exactly, anything else integrates the CDF and
/// survival function.
pub fn newsvendor_value(shape: &ServiceDistribution, omega: f64) -> Result<(f64, Method)> {
    if !(omega > 0.0 && omega < 1.0) {
        return Err(Error::invalid(format!("omega must be in (0,1), got {omega}")));
    }
    if let Some(v) = newsvendor_closed_form(shape, omega) {
        return Ok((v, Method::ClosedForm));
    }
    let q = shape.quantile(1.0 - omega)?;
    if let Some(atoms) = shape.finite_support() {
        let mut neg = Kahan::new();
        let mut pos = Kahan::new();
        for (v, p) in atoms {
            if v > q {
                pos.add(p * (v - q));
            } else {
                neg.add(p * (q - v));
            }
        }
        return Ok((omega * neg.total() + (1.0 - omega) * pos.total(), Method::ClosedForm));
    }
    newsvendor_value_quadrature(shape, omega).map(|v| (v, Method::Quadrature))
}

/// Pure quadrature of the newsvendor value; the independent oracle for the
/// closed forms above.
pub fn newsvendor_value_quadrature(shape: &ServiceDistribution, omega: f64) -> Result<f64> {
    let q = shape.quantile(1.0 - omega)?;
    let lo = shape.quantile(1e-12)?.min(q);
    let hi = shape.quantile(1.0 - 1e-12)?.max(q);
    // E(B-q)^- = int_{-inf}^q F; E(B-q)^+ = int_q^{inf} (1 - F).
    let neg = adaptive_simpson(&|x| shape.cdf(x), lo, q, 1e-11);
    let pos = adaptive_simpson(&|x| 1.0 - shape.cdf(x), q, hi, 1e-11);
    Ok(omega * neg + (1.0 - omega) * pos)
}

fn newsvendor_closed_form(shape: &ServiceDistribution, omega: f64) -> Option<f64> {
    use ServiceDistribution as D;
    let w = omega;
    match shape {
        // Every case below is shift-invariant: B - Q_B(1-w) does not move
        // with the location parameter.
        D::Normal { sd, .. } => {
            let q = normal_quantile(1.0 - w);
            Some(sd * (w * normal_neg_part(q) + (1.0 - w) * normal_pos_part(q)))
        }
        D::Uniform { lo, hi } => {
            let width = hi - lo;
            Some(width * w * (1.0 - w) / 2.0)
        }
        D::Laplace { scale, .. } => {
            let m = w.min(1.0 - w);
            Some(scale * m * (1.0 - (2.0 * m).ln()))
        }
        D::Exponential { rate } => {
            // q = -ln(omega)/rate: value = -omega ln(omega) / rate.
            Some(-w * w.ln() / rate)
        }
        D::Shifted(base, _) => newsvendor_closed_form(base, omega),
        D::ParetoII { sigma, beta, .. } => {
            // sigma * (beta-1)/beta normalization folded in below: in raw
            // Pareto units the value is sigma * (w^((b-1)/b) - w) * b/(b-1).
            Some(sigma * (w.powf((beta - 1.0) / beta) - w) * beta / (beta - 1.0))
        }
        _ => None,
    }
}

/// K(B, omega) = sqrt(2 omega) / newsvendor_value for a standardized shape
/// (mean 0, variance 1). Table families and Pareto II take closed-form fast
/// paths; anything else goes through the generic quantile + expectation.
pub fn k_constant(shape: &ServiceDistribution, omega: f64) -> Result<BoundReport> {
    if !(omega > 0.0 && omega < 1.0) {
        return Err(Error::invalid(format!("omega must be in (0,1), got {omega}")));
    }
    let (mean, var) = shape.moments();
    if mean.abs() > 1e-9 || (var - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!(
            "shape must be standardized (mean 0, variance 1), got ({mean}, {var})"
        )));
    }
    for fam in [
        StandardFamily::Normal,
        StandardFamily::Uniform,
        StandardFamily::ShiftedExponential,
        StandardFamily::Laplace,
    ] {
        if *shape == fam.shape() {
            return Ok(BoundReport::closed(
                &format!("K({})", fam.name()),
                fam.k_closed_form(omega),
                vec![format!("family={}", fam.name()), format!("omega={omega}")],
            ));
        }
    }
    if let ServiceDistribution::ParetoII { beta, .. } = shape {
        if *shape == standard_pareto(*beta)? {
            return Ok(BoundReport::closed(
                &format!("K(pareto2,beta={beta})"),
                k_pareto(*beta, omega)?,
                vec![format!("family=pareto2(beta={beta})"), format!("omega={omega}")],
            ));
        }
    }
    let (denom, method) = newsvendor_value(shape, omega)?;
    if denom <= 0.0 {
        return Err(Error::VacuousBound("degenerate shape: zero newsvendor value".into()));
    }
    Ok(BoundReport {
        name: "K(generic)".into(),
        value: (2.0 * omega).sqrt() / denom,
        stderr: None,
        method,
        assumptions: vec![format!("omega={omega}")],
    })
}

/// Generic-path K for cross-checking the closed forms: always integrates.
pub fn k_constant_quadrature(shape: &ServiceDistribution, omega: f64) -> Result<f64> {
    let denom = newsvendor_value_quadrature(shape, omega)?;
    if denom <= 0.0 {
        return Err(Error::VacuousBound("zero newsvendor value".into()));
    }
    Ok((2.0 * omega).sqrt() / denom)
}

// ---------------------------------------------------------------------------
// Envelope bounds (dilation order, symmetry)
// ---------------------------------------------------------------------------

/// Mean-based ratio envelope: 2 when the instance is dilation-certified and
/// every law is symmetry-certified, 4 under dilation alone, infinity (no
/// bound) otherwise.
pub fn theorem12_envelope(instance: &Instance) -> BoundReport {
    let cert = check_dilation_order(instance.patients());
    if !cert.is_proven() {
        return BoundReport::closed(
            "envelope",
            f64::INFINITY,
            vec![format!("no bound: dilation unknown ({})", cert.rule)],
        );
    }
    let symmetric = instance.patients().iter().all(|d| d.is_symmetric());
    if symmetric {
        BoundReport::closed(
            "envelope",
            2.0,
            vec![format!("dilation proven ({})", cert.rule), "symmetry certified".into()],
        )
    } else {
        BoundReport::closed(
            "envelope",
            4.0,
            vec![format!("dilation proven ({})", cert.rule), "no symmetry".into()],
        )
    }
}

// ---------------------------------------------------------------------------
// Normal service times
// ---------------------------------------------------------------------------

/// The ratio profile `f(c) = 2(sqrt(c+1) + sqrt(c)) /
/// (sqrt(c+1) + sqrt(c/2) + sqrt(c/2+1))` for normal instances; increasing
/// in `c`, with `f(0) = 1`.
pub fn normal_f(c: f64) -> f64 {
    assert!(c >= 0.0);
    2.0 * ((c + 1.0).sqrt() + c.sqrt())
        / ((c + 1.0).sqrt() + (c / 2.0).sqrt() + (c / 2.0 + 1.0).sqrt())
}

/// Limit of `normal_f`: `4 (sqrt(2) - 1)`, the mean-based ratio bound for
/// normal service times.
pub fn normal_ratio_limit() -> f64 {
    crate::math::FOUR_SQRT2_MINUS_4
}

/// Closed-form sandwich on E W_(k+1) for normal instances under mean-based
/// SVF, per k = 1..len(sigmas): upper `(S_k + S_(k-1)) / sqrt(2 pi)` with
/// `S_k^2 = sigma_1^2 + ... + sigma_k^2`; lower
/// `(S_k + sqrt(S_(k-1)^2 / 2) + sqrt(S_(k-1)^2 / 2 + sigma_k^2)) /
/// (2 sqrt(2 pi))`, valid for every sequence over the first k patients.
pub fn symmetric_walk_bounds(sigmas: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let inv_sqrt_2pi = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
    let mut sorted = sigmas.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut upper = Vec::with_capacity(sorted.len());
    let mut lower = Vec::with_capacity(sorted.len());
    let mut sum_sq_prev = 0.0;
    for (k, &s) in sorted.iter().enumerate() {
        let sum_sq = sum_sq_prev + s * s;
        let big_k = sum_sq.sqrt();
        let big_prev = sum_sq_prev.sqrt();
        upper.push(inv_sqrt_2pi * (big_k + big_prev));
        lower.push(
            0.5 * inv_sqrt_2pi
                * (big_k + (sum_sq_prev / 2.0).sqrt() + (sum_sq_prev / 2.0 + s * s).sqrt()),
        );
        let _ = k;
        sum_sq_prev = sum_sq;
    }
    (upper, lower)
}

// ---------------------------------------------------------------------------
// Asymmetry split and the simulation bound
// ---------------------------------------------------------------------------

/// The split of a centered step `X = B - mu` into a symmetric part and an
/// asymmetric part: with `g(x) = min(f(x), f(-x))` and `h = f - g`, the
/// draw `X` is kept as the asymmetric contribution with probability
/// `h(X)/f(X)` and dropped otherwise. `p` is the total asymmetric mass.
pub struct AsymmetrySplit {
    dist: ServiceDistribution,
    mean: f64,
    density: SplitDensity,
    /// Estimated asymmetric mass, populated by [`AsymmetrySplit::estimate_p`].
    pub p: Option<f64>,
}

enum SplitDensity {
    Continuous,
    Pmf(GridPMF),
}

impl AsymmetrySplit {
    pub fn new(dist: &ServiceDistribution) -> Result<Self> {
        let mean = dist.mean();
        let density = match dist.finite_support() {
            Some(_) => {
                let step = crate::sequence::infer_grid_step(std::slice::from_ref(dist))
                    .ok_or_else(|| {
                        Error::Unsupported("no common grid for the discrete split".into())
                    })?;
                let centered = dist.clone().shifted(-mean);
                SplitDensity::Pmf(centered.discretize(step, 0.0)?)
            }
            None => {
                dist.pdf(mean)?; // require a density
                SplitDensity::Continuous
            }
        };
        Ok(AsymmetrySplit { dist: dist.clone(), mean, density, p: None })
    }

    /// Probability of keeping a drawn centered step `x` as asymmetric:
    /// `max(0, 1 - f(-x)/f(x))`.
    pub fn accept_prob(&self, x: f64) -> f64 {
        match &self.density {
            SplitDensity::Continuous => {
                let f = self.dist.pdf(x + self.mean).unwrap_or(0.0);
                if f <= 0.0 {
                    return 0.0;
                }
                let f_neg = self.dist.pdf(-x + self.mean).unwrap_or(0.0);
                (1.0 - f_neg / f).max(0.0)
            }
            SplitDensity::Pmf(pmf) => {
                let idx = (x / pmf.step()).round() as i64;
                let f = pmf.prob_at_index(idx);
                if f <= 0.0 {
                    return 0.0;
                }
                (1.0 - pmf.prob_at_index(-idx) / f).max(0.0)
            }
        }
    }

    /// Draw a centered step.
    pub fn sample_x(&self, rng: &mut impl rand::RngCore) -> f64 {
        self.dist.sample(rng) - self.mean
    }

    /// Draw the asymmetric contribution `A J` (the kept-or-zero value).
    pub fn sample_aj(&self, rng: &mut impl rand::RngCore) -> f64 {
        let x = self.sample_x(rng);
        if open01(rng) < self.accept_prob(x) {
            x
        } else {
            0.0
        }
    }

    /// Monte Carlo estimate of the asymmetric mass `p`.
    pub fn estimate_p(&mut self, samples: u64, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sum = 0.0;
        for _ in 0..samples {
            let x = self.sample_x(&mut rng);
            sum += self.accept_prob(x);
        }
        let p = sum / samples as f64;
        self.p = Some(p);
        p
    }
}

/// Two-sample Kolmogorov-Smirnov statistic scaled by `sqrt(nm/(n+m))`;
/// compare against `sqrt(-ln(alpha/2)/2)` for a level-`alpha` test.
pub fn ks_two_sample_statistic(a: &mut [f64], b: &mut [f64]) -> f64 {
    a.sort_by(|x, y| x.partial_cmp(y).unwrap());
    b.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let (n, m) = (a.len() as f64, b.len() as f64);
    let mut i = 0;
    let mut j = 0;
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            i += 1;
        } else {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d * (n * m / (n + m)).sqrt()
}

/// Simulation upper bound on the mean-based ratio:
/// `2 + 2 max_k E|A_1 J_1 + ... + A_k J_k| / E|X_1 + ... + X_k|`,
/// estimated jointly for all k from shared replication streams. Requires a
/// Proven dilation certificate. Symmetric instances return exactly 2.
pub fn theorem5_bound(instance: &Instance, samples: u64, seed: u64) -> Result<BoundReport> {
    let cert = check_dilation_order(instance.patients());
    if !cert.is_proven() {
        return Err(Error::VacuousBound(format!(
            "asymmetry-split bound needs a dilation certificate: {}",
            cert.rule
        )));
    }
    if samples == 0 {
        return Err(Error::invalid("samples must be >= 1"));
    }
    let n = instance.n();
    let order = crate::sequence::svf(instance);
    let splits: Vec<AsymmetrySplit> = order
        .slots()
        .iter()
        .map(|&j| AsymmetrySplit::new(instance.patient(j)))
        .collect::<Result<_>>()?;

    if instance.patients().iter().all(|d| d.is_symmetric()) {
        return Ok(BoundReport::closed(
            "asymmetry-split",
            2.0,
            vec![format!("dilation proven ({})", cert.rule), "symmetric: bound is exactly 2".into()],
        ));
    }

    #[derive(Clone)]
    struct Sums {
        abs_x: Vec<f64>,
        abs_x2: Vec<f64>,
        abs_a: Vec<f64>,
        abs_a2: Vec<f64>,
    }
    let blocks = exec::map_chunks(samples, MC_BLOCK, |range| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (range.start / MC_BLOCK));
        let mut s = Sums {
            abs_x: vec![0.0; n],
            abs_x2: vec![0.0; n],
            abs_a: vec![0.0; n],
            abs_a2: vec![0.0; n],
        };
        for _ in range {
            let mut sx = 0.0;
            let mut sa = 0.0;
            for (k, split) in splits.iter().enumerate() {
                let x = split.sample_x(&mut rng);
                sx += x;
                if open01(&mut rng) < split.accept_prob(x) {
                    sa += x;
                }
                s.abs_x[k] += sx.abs();
                s.abs_x2[k] += sx * sx;
                s.abs_a[k] += sa.abs();
                s.abs_a2[k] += sa * sa;
            }
        }
        s
    });
    let mut total = Sums {
        abs_x: vec![0.0; n],
        abs_x2: vec![0.0; n],
        abs_a: vec![0.0; n],
        abs_a2: vec![0.0; n],
    };
    for b in &blocks {
        for k in 0..n {
            total.abs_x[k] += b.abs_x[k];
            total.abs_x2[k] += b.abs_x2[k];
            total.abs_a[k] += b.abs_a[k];
            total.abs_a2[k] += b.abs_a2[k];
        }
    }

    let nf = samples as f64;
    let mut best_ratio = 0.0;
    let mut best_se = 0.0;
    let mut best_k = 0;
    for k in 0..n {
        let mean_x = total.abs_x[k] / nf;
        let mean_a = total.abs_a[k] / nf;
        if mean_x <= 0.0 {
            return Err(Error::VacuousBound(
                "all-deterministic instance: zero denominator".into(),
            ));
        }
        let var_x = ((total.abs_x2[k] - nf * mean_x * mean_x) / (nf - 1.0)).max(0.0);
        let var_a = ((total.abs_a2[k] - nf * mean_a * mean_a) / (nf - 1.0)).max(0.0);
        let ratio = mean_a / mean_x;
        // Independence-style propagation; conservative for positively
        // correlated numerator and denominator from a shared stream.
        let rel = (var_a / (nf * mean_a * mean_a).max(f64::MIN_POSITIVE)
            + var_x / (nf * mean_x * mean_x))
            .sqrt();
        let se = ratio * rel;
        if ratio > best_ratio {
            best_ratio = ratio;
            best_se = se;
            best_k = k + 1;
        }
    }
    Ok(BoundReport {
        name: "asymmetry-split".into(),
        value: 2.0 + 2.0 * best_ratio,
        stderr: Some(2.0 * best_se),
        method: Method::MonteCarlo { seed, samples },
        assumptions: vec![
            format!("dilation proven ({})", cert.rule),
            format!("max at k={best_k}"),
        ],
    })
}

// ---------------------------------------------------------------------------
// Location-scale instance bounds
// ---------------------------------------------------------------------------

/// Standardized common shape of a location-scale instance, or an error
/// naming the first incompatible patient. Degenerate patients are ignored.
pub fn location_scale_shape(instance: &Instance) -> Result<ServiceDistribution> {
    #[derive(PartialEq, Clone, Copy, Debug)]
    enum Fam {
        Normal,
        Uniform,
        Laplace,
        Exponential,
        Pareto(u64),
        TwoPoint(u64),
    }
    let classify = |d: &ServiceDistribution| -> Option<Fam> {
        match d {
            ServiceDistribution::Normal { .. } => Some(Fam::Normal),
            ServiceDistribution::Uniform { .. } => Some(Fam::Uniform),
            ServiceDistribution::Laplace { .. } => Some(Fam::Laplace),
            ServiceDistribution::Exponential { .. } => Some(Fam::Exponential),
            ServiceDistribution::Shifted(b, _) => {
                matches!(**b, ServiceDistribution::Exponential { .. }).then_some(Fam::Exponential)
            }
            ServiceDistribution::ParetoII { beta, .. } => Some(Fam::Pareto(beta.to_bits())),
            ServiceDistribution::TwoPoint { p_hi, .. } => Some(Fam::TwoPoint(p_hi.to_bits())),
            _ => None,
        }
    };
    let mut family: Option<Fam> = None;
    for (j, d) in instance.patients().iter().enumerate() {
        if d.variance() == 0.0 {
            continue;
        }
        let f = classify(d).ok_or_else(|| {
            Error::NotLocationScale(format!("patient {} has no family shape", j + 1))
        })?;
        match family {
            None => family = Some(f),
            Some(cur) if cur == f => {}
            Some(cur) => {
                return Err(Error::NotLocationScale(format!(
                    "patient {} is {f:?}, instance started as {cur:?}",
                    j + 1
                )))
            }
        }
    }
    let fam = family.ok_or_else(|| {
        Error::NotLocationScale("all patients deterministic: any shape fits".into())
    })?;
    Ok(match fam {
        Fam::Normal => StandardFamily::Normal.shape(),
        Fam::Uniform => StandardFamily::Uniform.shape(),
        Fam::Laplace => StandardFamily::Laplace.shape(),
        Fam::Exponential => StandardFamily::ShiftedExponential.shape(),
        Fam::Pareto(bits) => standard_pareto(f64::from_bits(bits))?,
        Fam::TwoPoint(bits) => {
            let p = f64::from_bits(bits);
            let sd = (p * (1.0 - p)).sqrt();
            ServiceDistribution::two_point(-p / sd, (1.0 - p) / sd, p)?
        }
    })
}

/// Schedule-free lower bound on the cost of every sequence and schedule for
/// a location-scale instance: `newsvendor_value(shape) * sum_{i<n} sigma_i`.
pub fn newsvendor_lower(instance: &Instance, omega: f64) -> Result<BoundReport> {
    let shape = location_scale_shape(instance)?;
    let (value, method) = newsvendor_value(&shape, omega)?;
    let sigma_head = sorted_sigma_head_sum(instance);
    Ok(BoundReport {
        name: "newsvendor-lower".into(),
        value: value * sigma_head,
        stderr: None,
        method,
        assumptions: vec![format!("location-scale shape {shape:?}"), format!("omega={omega}")],
    })
}

/// Upper bound on the SVF cost under the sigma-slack schedule:
/// `sqrt(2 omega) * sum_{i<n} sigma_i`.
pub fn svf_upper(instance: &Instance, omega: f64) -> Result<BoundReport> {
    if !(omega > 0.0 && omega < 1.0) {
        return Err(Error::invalid(format!("omega must be in (0,1), got {omega}")));
    }
    let shape = location_scale_shape(instance)?;
    let sigma_head = sorted_sigma_head_sum(instance);
    Ok(BoundReport::closed(
        "svf-upper",
        (2.0 * omega).sqrt() * sigma_head,
        vec![format!("location-scale shape {shape:?}"), format!("omega={omega}")],
    ))
}

/// Sum of the n-1 smallest standard deviations.
fn sorted_sigma_head_sum(instance: &Instance) -> f64 {
    let mut sds = instance.sds();
    sds.sort_by(|a, b| a.partial_cmp(b).unwrap());
    sds[..sds.len() - 1].iter().sum()
}

/// Kingman's bound on the expected all-time maximum of a negative-drift
/// i.i.d. walk: `Var(Y) / (2 |E Y|)`.
pub fn kingman(mean_step: f64, var_step: f64) -> Result<f64> {
    if mean_step >= 0.0 {
        return Err(Error::invalid(format!(
            "Kingman's bound needs negative drift, got {mean_step}"
        )));
    }
    Ok(var_step / (2.0 * mean_step.abs()))
}

/// Ratio bound for lognormal instances under the multiplicative-slack
/// schedule: `2 omega alpha / ((1-omega) P(Z >= Q_Z(1-omega) - s_1)
/// - omega P(Z <= Q_Z(1-omega) - s_1))` with
/// `alpha = sqrt((exp(s_(n-1)^2) - 1) / (2 omega))`.
pub fn theorem9_bound(instance: &Instance, omega: f64) -> Result<BoundReport> {
    if !(omega > 0.0 && omega < 1.0) {
        return Err(Error::invalid(format!("omega must be in (0,1), got {omega}")));
    }
    let params = crate::schedule::lognormal_params_sorted(instance)?;
    let n = params.len();
    if n < 2 {
        return Err(Error::invalid("need at least 2 patients"));
    }
    let s1 = params[0].1;
    let s_second = params[n - 2].1;
    let alpha = ((s_second * s_second).exp_m1() / (2.0 * omega)).sqrt();
    let qz = normal_quantile(1.0 - omega);
    let denom =
        (1.0 - omega) * (1.0 - normal_cdf(qz - s1)) - omega * normal_cdf(qz - s1);
    if denom <= 0.0 {
        return Err(Error::VacuousBound(format!(
            "denominator {denom} <= 0 at omega={omega}, s1={s1}"
        )));
    }
    Ok(BoundReport::closed(
        "lognormal-multiplicative",
        2.0 * omega * alpha / denom,
        vec![format!("omega={omega}"), format!("s1={s1}"), format!("s(n-1)={s_second}")],
    ))
}

/// The half-normal mean `E|Z| = sqrt(2/pi)` used to normalize the
/// large-session waiting statistic.
pub fn asymptotic_constant() -> f64 {
    SQRT_2_OVER_PI
}
