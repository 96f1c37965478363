//! Instance files: a JSON object with `omega` and a `patients` array.
//!
//! Each patient entry names its law via `dist` plus parameter fields, with
//! optional transform fields applied in the order scale, shift, negate:
//!
//! ```json
//! {"omega": 0.5, "patients": [
//!   {"dist": "exponential", "rate": 2.0},
//!   {"dist": "lognormal", "m": 3.9, "s": 0.33},
//!   {"dist": "lognormal_meansd", "mean": 15.5, "sd": 5.038},
//!   {"dist": "twopoint", "lo": 0, "hi": 11, "p_hi": 0.909},
//!   {"dist": "discrete", "step": 1.0, "offset": 0, "probs": [0.25, 0.5, 0.25]},
//!   {"dist": "point", "value": 10},
//!   {"dist": "exponential", "rate": 1.0, "negate": true, "shift": 2.0}
//! ]}
//! ```
//!
//! `normal`, `uniform`, `laplace`, `pareto2` and `threepoint` are accepted
//! as extensions with the obvious fields.

use crate::dist::ServiceDistribution;
use crate::error::{Error, Result};
use crate::lindley::Instance;
use crate::pmf::GridPMF;
use serde::{Deserialize, Serialize};

#[derive(Debug, Serialize, Deserialize)]
struct InstanceFile {
    omega: f64,
    patients: Vec<PatientSpec>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PatientSpec {
    dist: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mean: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sd: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lo: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    hi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    p_hi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    step: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    offset: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    probs: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    location: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    scale_param: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    center: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    halfwidth: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tail_prob: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    negate: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    shift: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    scale: Option<f64>,
}

fn need(field: &str, v: Option<f64>) -> Result<f64> {
    v.ok_or_else(|| Error::InstanceFile(format!("missing field {field:?}")))
}

fn patient_from_spec(spec: &PatientSpec) -> Result<ServiceDistribution> {
    let base = match spec.dist.as_str() {
        "exponential" => ServiceDistribution::exponential(need("rate", spec.rate)?)?,
        "lognormal" => {
            ServiceDistribution::lognormal(need("m", spec.m)?, need("s", spec.s)?)?
        }
        "lognormal_meansd" => {
            let (m, s) = ServiceDistribution::lognormal_from_mean_sd(
                need("mean", spec.mean)?,
                need("sd", spec.sd)?,
            )?;
            ServiceDistribution::lognormal(m, s)?
        }
        "twopoint" => ServiceDistribution::two_point(
            need("lo", spec.lo)?,
            need("hi", spec.hi)?,
            need("p_hi", spec.p_hi)?,
        )?,
        "discrete" => {
            let probs = spec
                .probs
                .clone()
                .ok_or_else(|| Error::InstanceFile("missing field \"probs\"".into()))?;
            ServiceDistribution::discrete(GridPMF::new(
                need("step", spec.step)?,
                spec.offset.unwrap_or(0),
                probs,
            )?)
        }
        "point" => ServiceDistribution::point_mass(need("value", spec.value)?)?,
        "normal" => {
            ServiceDistribution::normal(need("mean", spec.mean)?, need("sd", spec.sd)?)?
        }
        "uniform" => {
            ServiceDistribution::uniform(need("lo", spec.lo)?, need("hi", spec.hi)?)?
        }
        "laplace" => ServiceDistribution::laplace(
            need("location", spec.location)?,
            need("scale_param", spec.scale_param)?,
        )?,
        "pareto2" => ServiceDistribution::pareto2(
            need("mu", spec.mu)?,
            need("sigma", spec.sigma)?,
            need("beta", spec.beta)?,
        )?,
        "threepoint" => ServiceDistribution::three_point(
            need("center", spec.center)?,
            need("halfwidth", spec.halfwidth)?,
            need("tail_prob", spec.tail_prob)?,
        )?,
        other => {
            return Err(Error::InstanceFile(format!("unknown dist kind {other:?}")))
        }
    };
    let mut d = base;
    if let Some(g) = spec.scale {
        d = d.scaled(g)?;
    }
    if let Some(c) = spec.shift {
        d = d.shifted(c);
    }
    if spec.negate.unwrap_or(false) {
        d = d.negated();
    }
    Ok(d)
}

fn spec_from_patient(d: &ServiceDistribution) -> Result<PatientSpec> {
    use ServiceDistribution as D;
    let mut spec = PatientSpec::default();
    fn leaf(spec: &mut PatientSpec, d: &ServiceDistribution) -> Result<()> {
        use ServiceDistribution as D;
        match d {
            D::PointMass { value } => {
                spec.dist = "point".into();
                spec.value = Some(*value);
            }
            D::Exponential { rate } => {
                spec.dist = "exponential".into();
                spec.rate = Some(*rate);
            }
            D::Lognormal { m, s } => {
                spec.dist = "lognormal".into();
                spec.m = Some(*m);
                spec.s = Some(*s);
            }
            D::Normal { mean, sd } => {
                spec.dist = "normal".into();
                spec.mean = Some(*mean);
                spec.sd = Some(*sd);
            }
            D::Uniform { lo, hi } => {
                spec.dist = "uniform".into();
                spec.lo = Some(*lo);
                spec.hi = Some(*hi);
            }
            D::Laplace { location, scale } => {
                spec.dist = "laplace".into();
                spec.location = Some(*location);
                spec.scale_param = Some(*scale);
            }
            D::ParetoII { mu, sigma, beta } => {
                spec.dist = "pareto2".into();
                spec.mu = Some(*mu);
                spec.sigma = Some(*sigma);
                spec.beta = Some(*beta);
            }
            D::TwoPoint { lo, hi, p_hi } => {
                spec.dist = "twopoint".into();
                spec.lo = Some(*lo);
                spec.hi = Some(*hi);
                spec.p_hi = Some(*p_hi);
            }
            D::ThreePointSymmetric { center, halfwidth, tail_prob } => {
                spec.dist = "threepoint".into();
                spec.center = Some(*center);
                spec.halfwidth = Some(*halfwidth);
                spec.tail_prob = Some(*tail_prob);
            }
            D::Discrete(pmf) => {
                spec.dist = "discrete".into();
                spec.step = Some(pmf.step());
                spec.offset = Some(pmf.offset());
                spec.probs = Some(pmf.probs().to_vec());
            }
            other => {
                return Err(Error::InstanceFile(format!(
                    "cannot serialize nested transform {other:?}"
                )))
            }
        }
        Ok(())
    }
    // Canonical transform nesting is Shifted(Negated(leaf)) at deepest;
    // the file's transform order is scale, then shift, then negate, so
    // -(X) + c serializes as negate(X + (-c)).
    match d {
        D::Shifted(inner, c) => match inner.as_ref() {
            D::Negated(base) => {
                leaf(&mut spec, base)?;
                spec.shift = Some(-c);
                spec.negate = Some(true);
            }
            other => {
                leaf(&mut spec, other)?;
                spec.shift = Some(*c);
            }
        },
        D::Negated(base) => {
            leaf(&mut spec, base)?;
            spec.negate = Some(true);
        }
        other => leaf(&mut spec, other)?,
    }
    Ok(spec)
}

pub fn parse_instance_json(text: &str) -> Result<Instance> {
    let file: InstanceFile =
        serde_json::from_str(text).map_err(|e| Error::InstanceFile(e.to_string()))?;
    let patients = file
        .patients
        .iter()
        .map(patient_from_spec)
        .collect::<Result<Vec<_>>>()?;
    Instance::new(patients, file.omega)
}

pub fn instance_to_json(instance: &Instance) -> Result<String> {
    let file = InstanceFile {
        omega: instance.omega(),
        patients: instance
            .patients()
            .iter()
            .map(spec_from_patient)
            .collect::<Result<_>>()?,
    };
    serde_json::to_string_pretty(&file).map_err(|e| Error::InstanceFile(e.to_string()))
}

pub fn read_instance(path: &std::path::Path) -> Result<Instance> {
    parse_instance_json(&std::fs::read_to_string(path)?)
}

pub fn write_instance(path: &std::path::Path, instance: &Instance) -> Result<()> {
    std::fs::write(path, instance_to_json(instance)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::ServiceDistribution as D;

    #[test]
    fn parse_all_kinds() {
        let text = r#"{"omega": 0.5, "patients": [
            {"dist": "exponential", "rate": 2.0},
            {"dist": "lognormal", "m": 3.9, "s": 0.33},
            {"dist": "lognormal_meansd", "mean": 15.5, "sd": 5.038},
            {"dist": "twopoint", "lo": 0, "hi": 11, "p_hi": 0.9090909090909091},
            {"dist": "discrete", "step": 1.0, "offset": 0, "probs": [0.25, 0.5, 0.25]},
            {"dist": "point", "value": 10},
            {"dist": "exponential", "rate": 1.0, "negate": true, "shift": 2.0, "scale": 3.0}
        ]}"#;
        let inst = parse_instance_json(text).unwrap();
        assert_eq!(inst.n(), 7);
        assert_eq!(inst.omega(), 0.5);
        assert!((inst.patient(0).mean() - 0.5).abs() < 1e-15);
        // scale then shift then negate: -(3 Exp(1) + 2), mean -5.
        assert!((inst.patient(6).mean() + 5.0).abs() < 1e-12);
    }

    #[test]
    fn round_trip_identical() {
        let inst = Instance::new(
            vec![
                D::exponential(2.0).unwrap(),
                D::lognormal(3.9, 0.33).unwrap(),
                D::two_point(0.0, 11.0, 10.0 / 11.0).unwrap(),
                D::point_mass(10.0).unwrap(),
                D::lognormal(1.0, 0.4).unwrap().negated(),
                D::normal(3.0, 1.5).unwrap(),
                D::exponential(1.0).unwrap().shifted(2.5),
            ],
            0.75,
        )
        .unwrap();
        let text = instance_to_json(&inst).unwrap();
        let back = parse_instance_json(&text).unwrap();
        assert_eq!(back, inst);
    }

    #[test]
    fn bad_files_rejected() {
        assert!(parse_instance_json("{}").is_err());
        assert!(parse_instance_json(r#"{"omega": 0.5, "patients": []}"#).is_err());
        assert!(parse_instance_json(
            r#"{"omega": 1.5, "patients": [{"dist": "point", "value": 1}]}"#
        )
        .is_err());
        assert!(parse_instance_json(
            r#"{"omega": 0.5, "patients": [{"dist": "wat"}]}"#
        )
        .is_err());
        assert!(parse_instance_json(
            r#"{"omega": 0.5, "patients": [{"dist": "exponential"}]}"#
        )
        .is_err());
    }
}
