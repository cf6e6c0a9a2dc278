//! Discretized typhoon scenario enumeration.
//!
//! Storm occurrence is modelled through three independent parameter
//! marginals: central pressure difference and translation speed (log-normal)
//! and approach heading (two-component normal mixture). Each marginal is
//! partitioned into bins covering its full support; a scenario is one cell
//! of the Cartesian product and its probability is the product of the bin
//! masses, so the scenario probabilities always sum to one.

use std::collections::BTreeMap;

use serde::Deserialize;
use statrs::distribution::{Continuous, ContinuousCDF, LogNormal, Normal};

use crate::geo;
use crate::typhoon::{TyphoonError, TyphoonParameters};

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("failed to parse marginals file: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("marginal {dimension}: {reason}")]
    InvalidMarginal { dimension: String, reason: String },
    #[error("marginal {dimension}: bin {bin} has zero probability mass (degenerate marginal)")]
    ZeroMassBin { dimension: String, bin: usize },
    #[error(transparent)]
    Typhoon(#[from] TyphoonError),
}

/// One continuous parameter marginal.
#[derive(Debug, Clone, PartialEq)]
pub enum Marginal {
    LogNormal {
        mu_ln: f64,
        sigma_ln: f64,
    },
    NormalMixture {
        mean1: f64,
        std1: f64,
        weight1: f64,
        mean2: f64,
        std2: f64,
    },
}

impl Marginal {
    fn cdf(&self, x: f64) -> f64 {
        match self {
            Marginal::LogNormal { mu_ln, sigma_ln } => {
                LogNormal::new(*mu_ln, *sigma_ln).expect("validated").cdf(x)
            }
            Marginal::NormalMixture {
                mean1,
                std1,
                weight1,
                mean2,
                std2,
            } => {
                let n1 = Normal::new(*mean1, *std1).expect("validated");
                let n2 = Normal::new(*mean2, *std2).expect("validated");
                weight1 * n1.cdf(x) + (1.0 - weight1) * n2.cdf(x)
            }
        }
    }

    fn pdf(&self, x: f64) -> f64 {
        match self {
            Marginal::LogNormal { mu_ln, sigma_ln } => {
                if x <= 0.0 {
                    0.0
                } else {
                    LogNormal::new(*mu_ln, *sigma_ln).expect("validated").pdf(x)
                }
            }
            Marginal::NormalMixture {
                mean1,
                std1,
                weight1,
                mean2,
                std2,
            } => {
                let n1 = Normal::new(*mean1, *std1).expect("validated");
                let n2 = Normal::new(*mean2, *std2).expect("validated");
                weight1 * n1.pdf(x) + (1.0 - weight1) * n2.pdf(x)
            }
        }
    }

    /// Quantile by closed form (log-normal) or bisection (mixture).
    fn quantile(&self, p: f64) -> f64 {
        debug_assert!((0.0..1.0).contains(&p) && p > 0.0);
        match self {
            Marginal::LogNormal { mu_ln, sigma_ln } => LogNormal::new(*mu_ln, *sigma_ln)
                .expect("validated")
                .inverse_cdf(p),
            Marginal::NormalMixture {
                mean1,
                std1,
                mean2,
                std2,
                ..
            } => {
                let spread = 12.0 * std1.max(*std2);
                let mut lo = mean1.min(*mean2) - spread;
                let mut hi = mean1.max(*mean2) + spread;
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if self.cdf(mid) < p {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                0.5 * (lo + hi)
            }
        }
    }

    fn validate(&self, dimension: &str) -> Result<(), ScenarioError> {
        let bad = |reason: &str| ScenarioError::InvalidMarginal {
            dimension: dimension.to_string(),
            reason: reason.to_string(),
        };
        match self {
            Marginal::LogNormal { mu_ln, sigma_ln } => {
                if !mu_ln.is_finite() || !sigma_ln.is_finite() || *sigma_ln <= 0.0 {
                    return Err(bad("log-normal requires finite mu_ln and sigma_ln > 0"));
                }
            }
            Marginal::NormalMixture {
                std1,
                weight1,
                std2,
                ..
            } => {
                if *std1 <= 0.0 || *std2 <= 0.0 {
                    return Err(bad("mixture component std must be > 0"));
                }
                if !(0.0..=1.0).contains(weight1) {
                    return Err(bad("mixture weight1 must lie in [0, 1]"));
                }
            }
        }
        Ok(())
    }
}

/// A marginal split into bins: contiguous intervals covering the support,
/// each with its probability mass and a mass-weighted representative value.
#[derive(Debug, Clone)]
pub struct BinnedMarginal {
    pub masses: Vec<f64>,
    pub representatives: Vec<f64>,
}

/// Central quantile range spanned by the equal-width interior bin edges; the
/// outermost bins absorb the remaining tails so that masses sum to one.
const EDGE_COVERAGE: f64 = 0.0005;
/// Tail clip for the representative-value integral over unbounded bins.
const TAIL_CLIP: f64 = 1e-9;

pub fn bin_marginal(
    marginal: &Marginal,
    bins: usize,
    dimension: &str,
) -> Result<BinnedMarginal, ScenarioError> {
    marginal.validate(dimension)?;
    if bins == 0 {
        return Err(ScenarioError::InvalidMarginal {
            dimension: dimension.to_string(),
            reason: "bin count must be >= 1".to_string(),
        });
    }
    let lo = marginal.quantile(EDGE_COVERAGE);
    let hi = marginal.quantile(1.0 - EDGE_COVERAGE);
    // interior edges; outermost bins run to the support limits
    let mut edges = Vec::with_capacity(bins + 1);
    edges.push(f64::NEG_INFINITY);
    for i in 1..bins {
        edges.push(lo + (hi - lo) * i as f64 / bins as f64);
    }
    edges.push(f64::INFINITY);

    let clip_lo = marginal.quantile(TAIL_CLIP);
    let clip_hi = marginal.quantile(1.0 - TAIL_CLIP);
    let mut masses = Vec::with_capacity(bins);
    let mut representatives = Vec::with_capacity(bins);
    let cdf_at = |x: f64| {
        if x == f64::INFINITY {
            1.0
        } else if x == f64::NEG_INFINITY {
            0.0
        } else {
            marginal.cdf(x)
        }
    };
    for (i, pair) in edges.windows(2).enumerate() {
        let (a, b) = (pair[0], pair[1]);
        let mass = cdf_at(b) - cdf_at(a);
        if !(mass > 1e-12) {
            return Err(ScenarioError::ZeroMassBin {
                dimension: dimension.to_string(),
                bin: i,
            });
        }
        let ia = if a.is_infinite() { clip_lo } else { a };
        let ib = if b.is_infinite() { clip_hi } else { b };
        representatives.push(weighted_midpoint(marginal, ia, ib, mass));
        masses.push(mass);
    }
    Ok(BinnedMarginal {
        masses,
        representatives,
    })
}

/// Conditional mean of the marginal over [a, b]: composite-Simpson integral
/// of x*pdf(x) divided by the bin mass.
fn weighted_midpoint(marginal: &Marginal, a: f64, b: f64, mass: f64) -> f64 {
    const STEPS: usize = 256; // even
    let h = (b - a) / STEPS as f64;
    if h <= 0.0 {
        return a;
    }
    let g = |x: f64| x * marginal.pdf(x);
    let mut sum = g(a) + g(b);
    for i in 1..STEPS {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * g(a + i as f64 * h);
    }
    (sum * h / 3.0) / mass
}

/// One enumerated storm with its occurrence probability.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub params: TyphoonParameters,
    pub probability: f64,
}

#[derive(Debug, Clone)]
pub struct ScenarioSet {
    pub scenarios: Vec<Scenario>,
}

/// On-disk marginals file: one table per storm dimension.
#[derive(Debug, Deserialize)]
pub struct MarginalsConfig {
    #[serde(rename = "deltaP0_hPa")]
    pub delta_p0_hpa: MarginalSpec,
    #[serde(rename = "vT_kmh")]
    pub vt_kmh: MarginalSpec,
    pub heading_deg: MarginalSpec,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarginalSpec {
    pub distribution: String,
    #[serde(default)]
    pub mu_ln: f64,
    #[serde(default)]
    pub sigma_ln: f64,
    #[serde(default)]
    pub mean1: f64,
    #[serde(default)]
    pub std1: f64,
    #[serde(default = "one")]
    pub weight1: f64,
    #[serde(default)]
    pub mean2: f64,
    #[serde(default = "one")]
    pub std2: f64,
    pub bins: usize,
}

fn one() -> f64 {
    1.0
}

impl MarginalSpec {
    pub fn marginal(&self, dimension: &str) -> Result<Marginal, ScenarioError> {
        match self.distribution.as_str() {
            "log-normal" => Ok(Marginal::LogNormal {
                mu_ln: self.mu_ln,
                sigma_ln: self.sigma_ln,
            }),
            "normal-mixture" => Ok(Marginal::NormalMixture {
                mean1: self.mean1,
                std1: self.std1,
                weight1: self.weight1,
                mean2: self.mean2,
                std2: self.std2,
            }),
            other => Err(ScenarioError::InvalidMarginal {
                dimension: dimension.to_string(),
                reason: format!("unknown distribution {other:?}"),
            }),
        }
    }
}

impl MarginalsConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ScenarioError> {
        Ok(toml::from_str(text)?)
    }
}

/// Enumerate the Cartesian product of the three binned marginals. Each
/// scenario reuses the reference storm's landfall point, Batts coefficient
/// and step, overriding pressure difference, translation speed and heading.
pub fn enumerate_scenarios(
    base: &TyphoonParameters,
    config: &MarginalsConfig,
) -> Result<ScenarioSet, ScenarioError> {
    let dp = bin_marginal(
        &config.delta_p0_hpa.marginal("deltaP0_hPa")?,
        config.delta_p0_hpa.bins,
        "deltaP0_hPa",
    )?;
    let vt = bin_marginal(
        &config.vt_kmh.marginal("vT_kmh")?,
        config.vt_kmh.bins,
        "vT_kmh",
    )?;
    let hd = bin_marginal(
        &config.heading_deg.marginal("heading_deg")?,
        config.heading_deg.bins,
        "heading_deg",
    )?;

    let mut scenarios = Vec::with_capacity(dp.masses.len() * vt.masses.len() * hd.masses.len());
    for (p_dp, r_dp) in dp.masses.iter().zip(&dp.representatives) {
        for (p_vt, r_vt) in vt.masses.iter().zip(&vt.representatives) {
            for (p_hd, r_hd) in hd.masses.iter().zip(&hd.representatives) {
                let params = TyphoonParameters {
                    delta_p0_hpa: *r_dp,
                    vt_kmh: r_vt.max(0.0),
                    heading_deg: geo::normalize_deg(*r_hd),
                    ..*base
                };
                params.validate()?;
                scenarios.push(Scenario {
                    params,
                    probability: p_dp * p_vt * p_hd,
                });
            }
        }
    }
    Ok(ScenarioSet { scenarios })
}

impl ScenarioSet {
    pub fn total_probability(&self) -> f64 {
        self.scenarios.iter().map(|s| s.probability).sum()
    }

    /// Deterministic digest input: probabilities keyed by scenario index.
    pub fn summary(&self) -> BTreeMap<usize, f64> {
        self.scenarios
            .iter()
            .enumerate()
            .map(|(i, s)| (i, s.probability))
            .collect()
    }
}
