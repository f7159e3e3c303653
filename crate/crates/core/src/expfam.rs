//! One-parameter exponential families in canonical form.
//!
//! A member has density `exp(θx − b(θ)) c(x)` with respect to Lebesgue or
//! counting measure. Its mean is `b′(θ)` and its variance `b″(θ)`. Four
//! families are supported, each with its non-varying parameter fixed in the
//! [`Family`] value:
//!
//! | family           | θ              | b(θ)              | mean range |
//! |------------------|----------------|-------------------|------------|
//! | Gaussian(σ²)     | μ/σ²           | σ²θ²/2            | ℝ          |
//! | Binomial(m)      | log(p/(1−p))   | m·log(1+e^θ)      | [0, m]     |
//! | Poisson          | log λ          | e^θ               | [0, ∞)     |
//! | Gamma(shape m)   | −1/β           | −m·log(−θ)        | (0, ∞)     |
//!
//! The carrier `c(x)` only shows up inside [`Family::log_density`].

use rand::Rng;
use rand_distr::{Binomial, Distribution, Gamma, Normal, Poisson};
use serde::{Deserialize, Serialize};
use statrs::function::factorial::{ln_binomial, ln_factorial};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// An exponential family with its fixed (non-mean) parameter.
///
/// Serializes as `{"kind":"binomial","m":10}`, `{"kind":"gaussian","sigma_sq":1.0}`,
/// `{"kind":"poisson"}` or `{"kind":"gamma","m":2.0}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FamilyRepr", into = "FamilyRepr")]
pub enum Family {
    Gaussian { sigma_sq: f64 },
    Binomial { m: u32 },
    Poisson,
    Gamma { m: f64 },
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum FamilyRepr {
    Gaussian { sigma_sq: f64 },
    Binomial { m: u32 },
    Poisson,
    Gamma { m: f64 },
}

impl TryFrom<FamilyRepr> for Family {
    type Error = Error;

    fn try_from(r: FamilyRepr) -> Result<Self> {
        match r {
            FamilyRepr::Gaussian { sigma_sq } => Family::gaussian(sigma_sq),
            FamilyRepr::Binomial { m } => Family::binomial(m),
            FamilyRepr::Poisson => Ok(Family::Poisson),
            FamilyRepr::Gamma { m } => Family::gamma(m),
        }
    }
}

impl From<Family> for FamilyRepr {
    fn from(f: Family) -> Self {
        match f {
            Family::Gaussian { sigma_sq } => FamilyRepr::Gaussian { sigma_sq },
            Family::Binomial { m } => FamilyRepr::Binomial { m },
            Family::Poisson => FamilyRepr::Poisson,
            Family::Gamma { m } => FamilyRepr::Gamma { m },
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Family::Gaussian { sigma_sq } => write!(f, "gaussian(sigma_sq={sigma_sq})"),
            Family::Binomial { m } => write!(f, "binomial(m={m})"),
            Family::Poisson => write!(f, "poisson"),
            Family::Gamma { m } => write!(f, "gamma(m={m})"),
        }
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    /// Parses `gaussian[:σ²]`, `binomial:<m>`, `poisson` or `gamma:<m>`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n.trim(), Some(a.trim())),
            None => (s.trim(), None),
        };
        let bad = |a: &str| Error::InvalidInput(format!("bad parameter {a:?} for family {name}"));
        match (name.to_ascii_lowercase().as_str(), arg) {
            ("gaussian", None) => Family::gaussian(1.0),
            ("gaussian", Some(a)) => Family::gaussian(a.parse().map_err(|_| bad(a))?),
            ("binomial", Some(a)) => Family::binomial(a.parse().map_err(|_| bad(a))?),
            ("poisson", None) => Ok(Family::poisson()),
            ("gamma", Some(a)) => Family::gamma(a.parse().map_err(|_| bad(a))?),
            ("binomial" | "gamma", None) => Err(Error::InvalidInput(format!(
                "family {name} needs a parameter, e.g. {name}:10"
            ))),
            _ => Err(Error::InvalidInput(format!("unknown family {s:?}"))),
        }
    }
}

/// Closed interval `[v_min, v_max]` of admissible true scores (mean scale).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreBounds {
    pub v_min: f64,
    pub v_max: f64,
}

impl ScoreBounds {
    pub fn new(v_min: f64, v_max: f64) -> Result<Self> {
        if !v_min.is_finite() || !v_max.is_finite() || v_min > v_max {
            return Err(Error::InvalidParameter(format!(
                "score bounds [{v_min}, {v_max}] must be finite with v_min <= v_max"
            )));
        }
        Ok(ScoreBounds { v_min, v_max })
    }

    pub fn width(&self) -> f64 {
        self.v_max - self.v_min
    }
}

/// Witness that `b″((b′)⁻¹(μ)) ≥ c_var·σ²` on a sub-interval covering at
/// least a `c_int` fraction of the score range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceCertificate {
    pub v_tilde_min: f64,
    pub v_tilde_max: f64,
    pub c_int: f64,
    pub c_var: f64,
    pub sigma_sq: f64,
}

impl VarianceCertificate {
    pub fn v_tilde(&self) -> f64 {
        self.v_tilde_max - self.v_tilde_min
    }
}

fn softplus(t: f64) -> f64 {
    t.max(0.0) + (-t.abs()).exp().ln_1p()
}

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

impl Family {
    pub fn gaussian(sigma_sq: f64) -> Result<Self> {
        if !(sigma_sq.is_finite() && sigma_sq > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "gaussian variance must be positive, got {sigma_sq}"
            )));
        }
        Ok(Family::Gaussian { sigma_sq })
    }

    pub fn binomial(m: u32) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParameter(
                "binomial trial count must be positive".into(),
            ));
        }
        Ok(Family::Binomial { m })
    }

    pub fn poisson() -> Self {
        Family::Poisson
    }

    pub fn gamma(m: f64) -> Result<Self> {
        if !(m.is_finite() && m > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "gamma shape must be positive, got {m}"
            )));
        }
        Ok(Family::Gamma { m })
    }

    pub fn check_theta(&self, theta: f64) -> Result<()> {
        let ok = theta.is_finite()
            && match self {
                Family::Gamma { .. } => theta < 0.0,
                _ => true,
            };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "natural parameter {theta} outside the domain of {self}"
            )))
        }
    }

    /// Closure of the image of `b′` (the convex hull of the support).
    pub fn mean_range(&self) -> (f64, f64) {
        match *self {
            Family::Gaussian { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            Family::Binomial { m } => (0.0, m as f64),
            Family::Poisson | Family::Gamma { .. } => (0.0, f64::INFINITY),
        }
    }

    /// True when `mu` lies in the open image of `b′`, i.e. has a finite θ.
    pub fn is_interior_mean(&self, mu: f64) -> bool {
        let (lo, hi) = self.mean_range();
        mu.is_finite() && mu > lo && mu < hi
    }

    /// True when `mu` lies in the closed mean range.
    pub fn is_admissible_mean(&self, mu: f64) -> bool {
        let (lo, hi) = self.mean_range();
        mu.is_finite() && mu >= lo && mu <= hi
    }

    /// `b(θ)`.
    pub fn log_partition(&self, theta: f64) -> Result<f64> {
        self.check_theta(theta)?;
        Ok(match *self {
            Family::Gaussian { sigma_sq } => 0.5 * sigma_sq * theta * theta,
            Family::Binomial { m } => m as f64 * softplus(theta),
            Family::Poisson => theta.exp(),
            Family::Gamma { m } => -m * (-theta).ln(),
        })
    }

    /// `b′(θ)`, the mean.
    pub fn mean(&self, theta: f64) -> Result<f64> {
        self.check_theta(theta)?;
        Ok(match *self {
            Family::Gaussian { sigma_sq } => sigma_sq * theta,
            Family::Binomial { m } => m as f64 * sigmoid(theta),
            Family::Poisson => theta.exp(),
            Family::Gamma { m } => -m / theta,
        })
    }

    /// `(b′)⁻¹(μ)`. Boundary means have no finite natural parameter and are rejected.
    pub fn natural_param(&self, mu: f64) -> Result<f64> {
        if !self.is_interior_mean(mu) {
            return Err(Error::InvalidParameter(format!(
                "mean {mu} is not in the open mean range of {self}"
            )));
        }
        Ok(match *self {
            Family::Gaussian { sigma_sq } => mu / sigma_sq,
            Family::Binomial { m } => (mu / (m as f64 - mu)).ln(),
            Family::Poisson => mu.ln(),
            Family::Gamma { m } => -m / mu,
        })
    }

    /// Like [`Family::natural_param`] but maps boundary means to `±∞`.
    pub fn natural_param_or_sentinel(&self, mu: f64) -> Result<f64> {
        if self.is_interior_mean(mu) {
            return self.natural_param(mu);
        }
        let (lo, hi) = self.mean_range();
        if mu == lo {
            Ok(f64::NEG_INFINITY)
        } else if mu == hi {
            Ok(f64::INFINITY)
        } else {
            Err(Error::InvalidParameter(format!(
                "mean {mu} lies outside the mean range of {self}"
            )))
        }
    }

    /// `b″(θ)`, the variance.
    pub fn variance(&self, theta: f64) -> Result<f64> {
        self.check_theta(theta)?;
        Ok(match *self {
            Family::Gaussian { sigma_sq } => sigma_sq,
            Family::Binomial { m } => {
                let e = (-theta.abs()).exp();
                m as f64 * e / ((1.0 + e) * (1.0 + e))
            }
            Family::Poisson => theta.exp(),
            Family::Gamma { m } => m / (theta * theta),
        })
    }

    /// Variance of the member with mean `mu`, defined on the closed mean range
    /// (zero at Binomial/Poisson boundaries).
    pub fn variance_at_mean(&self, mu: f64) -> Result<f64> {
        if !self.is_admissible_mean(mu) {
            return Err(Error::InvalidParameter(format!(
                "mean {mu} lies outside the mean range of {self}"
            )));
        }
        Ok(match *self {
            Family::Gaussian { sigma_sq } => sigma_sq,
            Family::Binomial { m } => mu * (m as f64 - mu) / m as f64,
            Family::Poisson => mu,
            Family::Gamma { m } => mu * mu / m,
        })
    }

    /// `log p_θ(x)`; `-∞` outside the support.
    pub fn log_density(&self, theta: f64, x: f64) -> Result<f64> {
        let b = self.log_partition(theta)?;
        let log_carrier = match *self {
            Family::Gaussian { sigma_sq } => {
                if !x.is_finite() {
                    return Ok(f64::NEG_INFINITY);
                }
                -x * x / (2.0 * sigma_sq) - 0.5 * (2.0 * std::f64::consts::PI * sigma_sq).ln()
            }
            Family::Binomial { m } => {
                if x < 0.0 || x > m as f64 || x.fract() != 0.0 {
                    return Ok(f64::NEG_INFINITY);
                }
                ln_binomial(m as u64, x as u64)
            }
            Family::Poisson => {
                if !(x >= 0.0 && x.is_finite() && x.fract() == 0.0) {
                    return Ok(f64::NEG_INFINITY);
                }
                -ln_factorial(x as u64)
            }
            Family::Gamma { m } => {
                if !(x > 0.0 && x.is_finite()) {
                    return Ok(f64::NEG_INFINITY);
                }
                (m - 1.0) * x.ln() - ln_gamma(m)
            }
        };
        Ok(theta * x - b + log_carrier)
    }

    /// `KL(p_θ1 ‖ p_θ2) = (θ1 − θ2) b′(θ1) − b(θ1) + b(θ2)`.
    pub fn kl_divergence(&self, theta1: f64, theta2: f64) -> Result<f64> {
        let mean1 = self.mean(theta1)?;
        let b1 = self.log_partition(theta1)?;
        let b2 = self.log_partition(theta2)?;
        if theta1 == theta2 {
            return Ok(0.0);
        }
        Ok(((theta1 - theta2) * mean1 - b1 + b2).max(0.0))
    }

    /// KL divergence between two product measures with independent coordinates.
    pub fn product_kl(&self, thetas1: &[f64], thetas2: &[f64]) -> Result<f64> {
        crate::error::check_len(thetas1.len(), thetas2.len())?;
        thetas1
            .iter()
            .zip(thetas2)
            .map(|(&a, &b)| self.kl_divergence(a, b))
            .sum()
    }

    /// Checks family-specific constraints on score bounds.
    pub fn check_bounds(&self, bounds: &ScoreBounds) -> Result<()> {
        ScoreBounds::new(bounds.v_min, bounds.v_max)?;
        let ok = match *self {
            Family::Gaussian { .. } => true,
            Family::Binomial { m } => bounds.v_min >= 0.0 && bounds.v_max <= m as f64,
            Family::Poisson | Family::Gamma { .. } => bounds.v_min > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "bounds [{}, {}] are not admissible for {self}",
                bounds.v_min, bounds.v_max
            )))
        }
    }

    /// `[θ_min, θ_max]`, with `±∞` at boundary means.
    pub fn theta_range(&self, bounds: &ScoreBounds) -> Result<(f64, f64)> {
        self.check_bounds(bounds)?;
        Ok((
            self.natural_param_or_sentinel(bounds.v_min)?,
            self.natural_param_or_sentinel(bounds.v_max)?,
        ))
    }

    /// `σ² = max b″(θ)` over `[θ_min, θ_max]`, in closed form.
    pub fn sigma_max(&self, bounds: &ScoreBounds) -> Result<f64> {
        self.check_bounds(bounds)?;
        Ok(match *self {
            Family::Gaussian { sigma_sq } => sigma_sq,
            Family::Binomial { m } => {
                let half = m as f64 / 2.0;
                let closest = half.clamp(bounds.v_min, bounds.v_max);
                self.variance_at_mean(closest)?
            }
            Family::Poisson => bounds.v_max,
            Family::Gamma { m } => bounds.v_max * bounds.v_max / m,
        })
    }

    /// Builds the closed-form variance certificate and checks it on a uniform
    /// grid of `grid_points` means over the sub-interval.
    pub fn verify_variance_assumption(
        &self,
        bounds: &ScoreBounds,
        grid_points: usize,
    ) -> Result<VarianceCertificate> {
        if grid_points < 2 {
            return Err(Error::InvalidInput(format!(
                "variance check needs at least 2 grid points, got {grid_points}"
            )));
        }
        let sigma_sq = self.sigma_max(bounds)?;
        let (lo, hi) = (bounds.v_min, bounds.v_max);
        let cert = match *self {
            Family::Gaussian { .. } => VarianceCertificate {
                v_tilde_min: lo,
                v_tilde_max: hi,
                c_int: 1.0,
                c_var: 1.0,
                sigma_sq,
            },
            Family::Binomial { .. } => {
                // middle half of the range; b'' is concave in μ so its minimum
                // over the sub-interval sits at an endpoint
                let quarter = (hi - lo) / 4.0;
                let (a, b) = (lo + quarter, hi - quarter);
                let floor = self.variance_at_mean(a)?.min(self.variance_at_mean(b)?);
                VarianceCertificate {
                    v_tilde_min: a,
                    v_tilde_max: b,
                    c_int: 0.5,
                    c_var: floor / sigma_sq,
                    sigma_sq,
                }
            }
            Family::Poisson => VarianceCertificate {
                v_tilde_min: lo.max(hi / 2.0),
                v_tilde_max: hi,
                c_int: 0.5,
                c_var: 0.5,
                sigma_sq,
            },
            Family::Gamma { .. } => VarianceCertificate {
                v_tilde_min: lo.max(hi / 2.0),
                v_tilde_max: hi,
                c_int: 0.5,
                c_var: 0.25,
                sigma_sq,
            },
        };

        if cert.v_tilde() < cert.c_int * bounds.width() * (1.0 - 1e-12) {
            return Err(Error::ConstructionFailed(format!(
                "sub-interval width {} below c_int * range {}",
                cert.v_tilde(),
                cert.c_int * bounds.width()
            )));
        }
        let required = cert.c_var * sigma_sq;
        for i in 0..grid_points {
            let t = i as f64 / (grid_points - 1) as f64;
            let mu = cert.v_tilde_min + t * cert.v_tilde();
            let variance = match self.natural_param(mu) {
                Ok(theta) => self.variance(theta)?,
                Err(_) => 0.0,
            };
            if variance < required * (1.0 - 1e-12) {
                return Err(Error::AssumptionViolated {
                    mu,
                    variance,
                    required,
                });
            }
        }
        Ok(cert)
    }

    /// Sampler for the member with mean `mu` on the closed mean range.
    /// Binomial and Poisson boundary means give point masses.
    pub fn sampler_at_mean(&self, mu: f64) -> Result<MeanSampler> {
        if !self.is_admissible_mean(mu) {
            return Err(Error::InvalidParameter(format!(
                "mean {mu} lies outside the mean range of {self}"
            )));
        }
        let bad = |e: &dyn std::fmt::Display| Error::InvalidParameter(e.to_string());
        let inner = match *self {
            Family::Gaussian { sigma_sq } => {
                Inner::Normal(Normal::new(mu, sigma_sq.sqrt()).map_err(|e| bad(&e))?)
            }
            Family::Binomial { m } => {
                let p = mu / m as f64;
                if p <= 0.0 || p >= 1.0 {
                    Inner::Point(mu)
                } else {
                    Inner::Binomial(Binomial::new(m as u64, p).map_err(|e| bad(&e))?)
                }
            }
            Family::Poisson => {
                if mu == 0.0 {
                    Inner::Point(0.0)
                } else {
                    Inner::Poisson(Poisson::new(mu).map_err(|e| bad(&e))?)
                }
            }
            Family::Gamma { m } => {
                if mu <= 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "gamma mean must be positive, got {mu}"
                    )));
                }
                Inner::Gamma(Gamma::new(m, mu / m).map_err(|e| bad(&e))?)
            }
        };
        Ok(MeanSampler(inner))
    }

    /// One draw from `p_θ`.
    pub fn sample<R: Rng + ?Sized>(&self, theta: f64, rng: &mut R) -> Result<f64> {
        let mu = self.mean(theta)?;
        Ok(self.sampler_at_mean(mu)?.sample(rng))
    }
}

/// Pre-built sampler for one item's score distribution.
#[derive(Debug, Clone)]
pub struct MeanSampler(Inner);

#[derive(Debug, Clone)]
enum Inner {
    Point(f64),
    Normal(Normal<f64>),
    Binomial(Binomial),
    Poisson(Poisson<f64>),
    Gamma(Gamma<f64>),
}

impl MeanSampler {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.0 {
            Inner::Point(v) => *v,
            Inner::Normal(d) => d.sample(rng),
            Inner::Binomial(d) => d.sample(rng) as f64,
            Inner::Poisson(d) => d.sample(rng),
            Inner::Gamma(d) => d.sample(rng),
        }
    }

    /// Average of `k` independent draws.
    pub fn sample_mean<R: Rng + ?Sized>(&self, k: usize, rng: &mut R) -> f64 {
        let total: f64 = (0..k).map(|_| self.sample(rng)).sum();
        total / k as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{substream, tag};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    fn all_families() -> Vec<Family> {
        vec![
            Family::gaussian(2.0).unwrap(),
            Family::binomial(10).unwrap(),
            Family::Poisson,
            Family::gamma(2.5).unwrap(),
        ]
    }

    #[test]
    fn log_partition_examples() {
        let b = Family::binomial(10).unwrap();
        assert!(close(b.log_partition(0.0).unwrap(), 10.0 * 2f64.ln(), 1e-14));
        assert_eq!(Family::Poisson.log_partition(0.0).unwrap(), 1.0);
        assert_eq!(Family::gaussian(1.0).unwrap().log_partition(0.0).unwrap(), 0.0);
        // no overflow far out in the tails
        assert!(close(b.log_partition(800.0).unwrap(), 8000.0, 1e-14));
        assert!(b.log_partition(-800.0).unwrap() >= 0.0);
    }

    #[test]
    fn gamma_domain_is_negative_theta() {
        let g = Family::gamma(2.0).unwrap();
        assert!(matches!(g.log_partition(0.0), Err(Error::InvalidParameter(_))));
        assert!(g.variance(0.5).is_err());
        assert!(g.kl_divergence(-1.0, 1.0).is_err());
        assert!(Family::Poisson.mean(f64::NAN).is_err());
    }

    #[test]
    fn mean_and_natural_param_examples() {
        let b = Family::binomial(10).unwrap();
        assert_eq!(b.natural_param(5.0).unwrap(), 0.0);
        let g = Family::gamma(2.0).unwrap();
        assert_eq!(g.natural_param(4.0).unwrap(), -0.5);
        assert_eq!(g.mean(-0.5).unwrap(), 4.0);
        assert_eq!(Family::gaussian(4.0).unwrap().natural_param(2.0).unwrap(), 0.5);
    }

    #[test]
    fn boundary_means_are_rejected() {
        let b = Family::binomial(10).unwrap();
        assert!(b.natural_param(0.0).is_err());
        assert!(b.natural_param(10.0).is_err());
        assert!(Family::Poisson.natural_param(0.0).is_err());
        assert_eq!(b.natural_param_or_sentinel(10.0).unwrap(), f64::INFINITY);
        assert_eq!(b.natural_param_or_sentinel(0.0).unwrap(), f64::NEG_INFINITY);
        assert!(b.natural_param_or_sentinel(11.0).is_err());
        // boundary means are still valid data for sampling
        let mut rng = substream(1, tag::UTILITY, 0, 0);
        assert_eq!(b.sampler_at_mean(10.0).unwrap().sample(&mut rng), 10.0);
    }

    #[test]
    fn variance_examples() {
        assert_eq!(Family::gaussian(2.0).unwrap().variance(3.7).unwrap(), 2.0);
        // values frozen from a central difference of b' with step 1e-5
        assert!(close(Family::binomial(10).unwrap().variance(0.0).unwrap(), 2.5, 1e-12));
        assert!(close(Family::Poisson.variance(3f64.ln()).unwrap(), 3.0, 1e-12));
    }

    #[test]
    fn variance_matches_finite_difference_of_mean() {
        let h = 1e-5;
        for f in all_families() {
            let thetas: Vec<f64> = match f {
                Family::Gamma { .. } => (1..40).map(|i| -0.1 * i as f64).collect(),
                _ => (-20..=20).map(|i| 0.2 * i as f64).collect(),
            };
            for t in thetas {
                let fd = (f.mean(t + h).unwrap() - f.mean(t - h).unwrap()) / (2.0 * h);
                let v = f.variance(t).unwrap();
                assert!((fd - v).abs() <= 1e-5 * v, "{f} θ={t}: {fd} vs {v}");
            }
        }
    }

    #[test]
    fn log_density_examples() {
        assert!(close(Family::Poisson.log_density(0.0, 0.0).unwrap(), -1.0, 1e-14));
        let b2 = Family::binomial(2).unwrap();
        assert!(close(b2.log_density(0.0, 1.0).unwrap(), 0.5f64.ln(), 1e-14));
        let g = Family::gaussian(1.0).unwrap();
        let expect = -0.5 * (2.0 * std::f64::consts::PI).ln();
        assert!(close(g.log_density(0.0, 0.0).unwrap(), expect, 1e-14));
        assert_eq!(b2.log_density(0.0, 3.0).unwrap(), f64::NEG_INFINITY);
        assert_eq!(b2.log_density(0.0, 0.5).unwrap(), f64::NEG_INFINITY);
        assert_eq!(Family::Poisson.log_density(0.0, -1.0).unwrap(), f64::NEG_INFINITY);
        let gm = Family::gamma(2.0).unwrap();
        assert_eq!(gm.log_density(-1.0, 0.0).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn kl_examples() {
        for f in all_families() {
            let t = f.natural_param(3.0).unwrap();
            assert_eq!(f.kl_divergence(t, t).unwrap(), 0.0);
        }
        let g = Family::gaussian(1.0).unwrap();
        assert!(close(g.kl_divergence(1.0, 0.0).unwrap(), 0.5, 1e-14));
        let p = Family::Poisson;
        let kl = p.kl_divergence(2f64.ln(), 0.0).unwrap();
        assert!(close(kl, 2.0 * 2f64.ln() - 1.0, 1e-14));
    }

    #[test]
    fn product_kl_is_additive() {
        let f = Family::binomial(10).unwrap();
        let a = [0.1, -0.4, 1.2];
        let b = [0.0, 0.3, -0.2];
        let parts: f64 = (0..3).map(|i| f.kl_divergence(a[i], b[i]).unwrap()).sum();
        assert_eq!(f.product_kl(&a, &b).unwrap(), parts);
        assert!(f.product_kl(&a, &b[..2]).is_err());
    }

    #[test]
    fn sigma_max_examples() {
        let b = Family::binomial(10).unwrap();
        assert_eq!(b.sigma_max(&ScoreBounds::new(0.0, 10.0).unwrap()).unwrap(), 2.5);
        assert_eq!(b.sigma_max(&ScoreBounds::new(6.0, 9.0).unwrap()).unwrap(), 2.4);
        let p = Family::Poisson;
        assert_eq!(p.sigma_max(&ScoreBounds::new(1.0, 9.0).unwrap()).unwrap(), 9.0);
        let g = Family::gamma(4.0).unwrap();
        assert_eq!(g.sigma_max(&ScoreBounds::new(1.0, 8.0).unwrap()).unwrap(), 16.0);
        assert!(p.sigma_max(&ScoreBounds::new(0.0, 8.0).unwrap()).is_err());
        assert!(b.sigma_max(&ScoreBounds::new(0.0, 11.0).unwrap()).is_err());
        assert!(ScoreBounds::new(3.0, 2.0).is_err());
    }

    #[test]
    fn variance_certificates() {
        let b = Family::binomial(10).unwrap();
        let c = b
            .verify_variance_assumption(&ScoreBounds::new(0.0, 10.0).unwrap(), 1024)
            .unwrap();
        assert_eq!((c.v_tilde_min, c.v_tilde_max), (2.5, 7.5));
        assert_eq!(c.c_int, 0.5);
        assert!(close(c.c_var, 0.75, 1e-14));

        let g = Family::gaussian(1.0).unwrap();
        let c = g
            .verify_variance_assumption(&ScoreBounds::new(2.0, 6.0).unwrap(), 1024)
            .unwrap();
        assert_eq!((c.v_tilde_min, c.v_tilde_max, c.c_int, c.c_var), (2.0, 6.0, 1.0, 1.0));

        let c = Family::Poisson
            .verify_variance_assumption(&ScoreBounds::new(1.0, 8.0).unwrap(), 1024)
            .unwrap();
        assert_eq!((c.v_tilde_min, c.v_tilde_max, c.c_int, c.c_var), (4.0, 8.0, 0.5, 0.5));

        let c = Family::gamma(3.0)
            .unwrap()
            .verify_variance_assumption(&ScoreBounds::new(1.0, 8.0).unwrap(), 1024)
            .unwrap();
        assert_eq!((c.v_tilde_min, c.c_var), (4.0, 0.25));

        assert!(b
            .verify_variance_assumption(&ScoreBounds::new(0.0, 10.0).unwrap(), 1)
            .is_err());
    }

    #[test]
    fn family_json_shape() {
        let f = Family::binomial(10).unwrap();
        assert_eq!(serde_json::to_string(&f).unwrap(), r#"{"kind":"binomial","m":10}"#);
        let g: Family = serde_json::from_str(r#"{"kind":"gaussian","sigma_sq":2.0}"#).unwrap();
        assert_eq!(g, Family::Gaussian { sigma_sq: 2.0 });
        let p: Family = serde_json::from_str(r#"{"kind":"poisson"}"#).unwrap();
        assert_eq!(p, Family::Poisson);
        assert!(serde_json::from_str::<Family>(r#"{"kind":"gamma","m":-1}"#).is_err());
        assert!(serde_json::from_str::<Family>(r#"{"kind":"binomial","m":0}"#).is_err());
    }

    #[test]
    fn sampling_replays_with_seed() {
        let g = Family::gaussian(1.0).unwrap();
        let a = g.sample(0.0, &mut substream(42, tag::UTILITY, 0, 0)).unwrap();
        let b = g.sample(0.0, &mut substream(42, tag::UTILITY, 0, 0)).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }
}
