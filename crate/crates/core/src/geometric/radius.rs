//! Connection-neighborhood rules for roadmaps and rewiring trees.

use std::f64::consts::{E, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Scenario;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum RuleKind {
    /// `2 (1 + 1/d)^{1/d} (mu/zeta_d)^{1/d} (ln n / n)^{1/d}`
    PrmStar,
    /// `2 (1/d)^{1/d} (mu/zeta_d)^{1/d} (ln n / n)^{1/d}`
    FmtStarConstant,
    /// `(2 + theta) [((1 + eps/4) c*) / ((d + 1) theta (1 - nu))]^{1/(d+1)} (mu/zeta_d)^{1/(d+1)} (ln n / n)^{1/(d+1)}`
    RrtStarRevised,
    /// k-nearest rule, see [`k_connection`].
    KPrmStar,
    Fixed(f64),
}

impl fmt::Display for RuleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuleKind::PrmStar => write!(f, "prm-star"),
            RuleKind::FmtStarConstant => write!(f, "fmt-star"),
            RuleKind::RrtStarRevised => write!(f, "rrt-star"),
            RuleKind::KPrmStar => write!(f, "k-prm-star"),
            RuleKind::Fixed(r) => write!(f, "fixed:{r}"),
        }
    }
}

impl FromStr for RuleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        match norm.as_str() {
            "prm-star" | "prm" => Ok(RuleKind::PrmStar),
            "fmt-star" | "fmt-star-constant" | "fmt" => Ok(RuleKind::FmtStarConstant),
            "rrt-star" | "rrt-star-revised" | "rrt" => Ok(RuleKind::RrtStarRevised),
            "k-prm-star" | "k" => Ok(RuleKind::KPrmStar),
            other => {
                if let Some(r) = other.strip_prefix("fixed:").or_else(|| other.strip_prefix("fixed=")) {
                    let r: f64 = r.parse().map_err(|_| Error::usage(format!("bad fixed radius `{r}`")))?;
                    if !(r > 0.0) {
                        return Err(Error::usage("fixed radius must be positive"));
                    }
                    Ok(RuleKind::Fixed(r))
                } else {
                    Err(Error::usage(format!("unknown radius rule `{s}`")))
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiusRule {
    pub kind: RuleKind,
    pub d: usize,
    /// Measure of the free space (an upper bound is acceptable).
    pub mu: f64,
    pub theta: f64,
    pub nu: f64,
    pub eps: f64,
    pub c_star_estimate: f64,
    pub safety_factor: f64,
    /// Required ratio of radius to the `(mu/n)^{1/d}` dispersion bound
    /// when sampling deterministically.
    pub gamma_det: f64,
}

impl RadiusRule {
    pub fn new(kind: RuleKind, d: usize, mu: f64) -> Self {
        RadiusRule {
            kind,
            d,
            mu,
            theta: 0.2,
            nu: 0.5,
            eps: 0.5,
            c_star_estimate: 1.0,
            safety_factor: 1.001,
            gamma_det: 3.0,
        }
    }

    /// Rule for a scenario: `mu` is the domain volume and the optimal-cost
    /// estimate starts at `d` times the domain diagonal.
    pub fn for_scenario(kind: RuleKind, scenario: &Scenario) -> Self {
        let mut rule = RadiusRule::new(kind, scenario.dimension, scenario.measure_upper);
        rule.c_star_estimate = scenario.domain.diagonal() * scenario.dimension as f64;
        rule
    }

    pub fn with_safety(mut self, safety_factor: f64) -> Self {
        self.safety_factor = safety_factor;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::usage("dimension must be positive"));
        }
        if !(self.mu > 0.0) {
            return Err(Error::usage("mu must be positive"));
        }
        if !(self.theta > 0.0 && self.theta < 0.25) {
            return Err(Error::usage("theta must lie in (0, 1/4)"));
        }
        if !(self.nu > 0.0 && self.nu < 1.0) {
            return Err(Error::usage("nu must lie in (0, 1)"));
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(Error::usage("eps must lie in (0, 1)"));
        }
        if !(self.c_star_estimate > 0.0) {
            return Err(Error::usage("c_star_estimate must be positive"));
        }
        if !(self.safety_factor >= 1.0) {
            return Err(Error::usage("safety_factor must be at least 1"));
        }
        if !(self.gamma_det > 2.0) {
            return Err(Error::usage("gamma_det must exceed 2"));
        }
        Ok(())
    }
}

/// Volume of the unit `d`-ball, `pi^{d/2} / Gamma(d/2 + 1)`.
pub fn unit_ball_volume(d: usize) -> f64 {
    // V_0 = 1, V_1 = 2, V_d = (2 pi / d) V_{d-2}
    let (mut v, mut k) = if d.is_multiple_of(2) { (1.0, 0) } else { (2.0, 1) };
    while k < d {
        k += 2;
        v *= 2.0 * PI / k as f64;
    }
    v
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::usage("n must be at least 2"));
    }
    Ok(())
}

/// Connection radius for `n` vertices under `rule`, including the safety factor.
pub fn connection_radius(rule: &RadiusRule, n: usize) -> Result<f64> {
    check_n(n)?;
    rule.validate()?;
    let d = rule.d as f64;
    let zeta = unit_ball_volume(rule.d);
    let log_ratio = (n as f64).ln() / n as f64;
    let base = match rule.kind {
        RuleKind::PrmStar => {
            let p = 1.0 / d;
            2.0 * (1.0 + 1.0 / d).powf(p) * (rule.mu / zeta).powf(p) * log_ratio.powf(p)
        }
        RuleKind::FmtStarConstant => {
            let p = 1.0 / d;
            2.0 * (1.0 / d).powf(p) * (rule.mu / zeta).powf(p) * log_ratio.powf(p)
        }
        RuleKind::RrtStarRevised => {
            let p = 1.0 / (d + 1.0);
            let coef = ((1.0 + rule.eps / 4.0) * rule.c_star_estimate) / ((d + 1.0) * rule.theta * (1.0 - rule.nu));
            (2.0 + rule.theta) * coef.powf(p) * (rule.mu / zeta).powf(p) * log_ratio.powf(p)
        }
        RuleKind::Fixed(r) => return Ok(r),
        RuleKind::KPrmStar => {
            return Err(Error::usage("the k-nearest rule has no connection radius"));
        }
    };
    Ok(rule.safety_factor * base)
}

/// Smallest integer strictly greater than `e (1 + 1/d) ln n`.
pub fn k_connection(d: usize, n: usize) -> Result<usize> {
    check_n(n)?;
    if d == 0 {
        return Err(Error::usage("dimension must be positive"));
    }
    let threshold = E * (1.0 + 1.0 / d as f64) * (n as f64).ln();
    Ok(threshold.floor() as usize + 1)
}

/// Connectivity threshold of a random geometric graph in the unit-measure
/// space: `(1/zeta_d)^{1/d} (ln n / n)^{1/d}`.
pub fn rgg_connectivity_radius(d: usize, n: usize) -> Result<f64> {
    check_n(n)?;
    if d == 0 {
        return Err(Error::usage("dimension must be positive"));
    }
    let p = 1.0 / d as f64;
    Ok((1.0 / unit_ball_volume(d)).powf(p) * ((n as f64).ln() / n as f64).powf(p))
}

/// `(mu / n)^{1/d}`: the order of the dispersion of a low-dispersion
/// sequence with `n` points in a domain of measure `mu`.
pub fn dispersion_bound(mu: f64, d: usize, n: usize) -> f64 {
    (mu / n as f64).powf(1.0 / d as f64)
}

/// Guard for deterministic sampling: `radius >= gamma_det * (mu/n)^{1/d}`.
pub fn check_deterministic_radius(rule: &RadiusRule, radius: f64, n: usize) -> Result<()> {
    let bound = rule.gamma_det * dispersion_bound(rule.mu, rule.d, n);
    if radius < bound {
        return Err(Error::usage(format!(
            "radius {radius} is below {} x the dispersion bound ({bound}) at n = {n}; \
             raise the safety factor or n for deterministic sampling",
            rule.gamma_det
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_ball_volumes() {
        assert!((unit_ball_volume(1) - 2.0).abs() < 1e-15);
        assert!((unit_ball_volume(2) - PI).abs() < 1e-15);
        assert!((unit_ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-14);
    }

    #[test]
    fn k_examples() {
        assert_eq!(k_connection(2, 1000).unwrap(), 29);
        assert_eq!(k_connection(1, 2).unwrap(), 4);
        assert!(k_connection(2, 1).is_err());
    }

    #[test]
    fn small_n_rejected() {
        let rule = RadiusRule::new(RuleKind::PrmStar, 2, 1.0);
        assert!(connection_radius(&rule, 1).is_err());
        assert!(rgg_connectivity_radius(2, 0).is_err());
    }

    #[test]
    fn parameter_ranges() {
        let mut rule = RadiusRule::new(RuleKind::RrtStarRevised, 2, 1.0);
        rule.theta = 0.3;
        assert!(connection_radius(&rule, 100).is_err());
        let k = RadiusRule::new(RuleKind::KPrmStar, 2, 1.0);
        assert!(connection_radius(&k, 100).is_err());
        let mut low_gamma = RadiusRule::new(RuleKind::PrmStar, 2, 1.0);
        low_gamma.gamma_det = 2.0;
        assert!(low_gamma.validate().is_err());
    }

    #[test]
    fn parses_rule_names() {
        assert_eq!("prm_star".parse::<RuleKind>().unwrap(), RuleKind::PrmStar);
        assert_eq!("fmt-star".parse::<RuleKind>().unwrap(), RuleKind::FmtStarConstant);
        assert_eq!("fixed:0.25".parse::<RuleKind>().unwrap(), RuleKind::Fixed(0.25));
        assert!("fixed:-1".parse::<RuleKind>().is_err());
        assert!("nope".parse::<RuleKind>().is_err());
    }

    #[test]
    fn deterministic_guard() {
        let rule = RadiusRule::new(RuleKind::PrmStar, 2, 1.0);
        let r = connection_radius(&rule, 1000).unwrap();
        assert!(check_deterministic_radius(&rule, r, 1000).is_ok());
        assert!(check_deterministic_radius(&rule, 0.05, 1000).is_err());
    }
}
