//! Closed-form lifespan lower bounds, global-existence thresholds and the
//! scaling `u₀ ↦ λ u₀(λ·)`.
//!
//! Every formula carries a user-supplied constant `C` (default 1); none of
//! the values returned here is a claim about the true constant.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::dynamics::ViscosityTriple;
use crate::error::{config_err, Error, Result};
use crate::field::{SpectralField3, VectorField3};

/// Integrability exponent in `(3, ∞]`, written as a number or `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponent(pub f64);

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(Exponent(x)),
            Raw::Text(t) => t.parse().map(Exponent).map_err(serde::de::Error::custom),
        }
    }
}

impl std::str::FromStr for Exponent {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(Exponent(f64::INFINITY)),
            t => t
                .parse::<f64>()
                .map(Exponent)
                .map_err(|e| format!("bad exponent {s:?}: {e}")),
        }
    }
}

/// Which bound or threshold to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "snake_case", deny_unknown_fields)]
pub enum Formula {
    /// Isotropic bound `C ν^{(p+3)/(p−3)} M^{−2p/(p−3)}`; uses `nu1` as `ν`.
    Leray { p: Exponent },
    /// `C ν₂^{p/(p−3)} (ν₁ν₂ν₃)^{1/(p−3)} ‖u₀‖_{L^p}^{−2p/(p−3)}`.
    Thm1Finite { p: Exponent },
    /// `C ν₃ ‖u₀‖_{L^∞}^{−2}`.
    Thm1Infty,
    /// `(C 𝒞(α) / (‖u₀‖_B^{1−2α} ‖∇u₀‖_B^{2α}))^{1/α}`.
    Thm3 { alpha: f64 },
    /// `C min{ν₃^{1/3} M^{−4/3}, ν₃³ M^{−4}}`.
    Thm4,
    /// `C ν₃^α ‖u₀‖_{H^{s₁,0}}^{−4α} ‖u₀‖_{H^{s₂}}^{−(1−3α)}`; needs an
    /// externally supplied `H^{s₂}` norm.
    EulerInterp { alpha: f64 },
    /// `ν₂^{−p−1} ν₃^{−5(p−3)−1} ‖u₀‖_{L²}^{4(p−3)} ‖u₀‖_{L^p}^{2p}`, compared with `ν₁`.
    Cor11 { p: Exponent },
    /// `ν₂^{−3} ‖u₀‖_B⁴`, compared with `ν₁`.
    Cor12,
}

impl Formula {
    pub fn id(&self) -> &'static str {
        match self {
            Formula::Leray { .. } => "leray",
            Formula::Thm1Finite { .. } => "thm1_finite",
            Formula::Thm1Infty => "thm1_infty",
            Formula::Thm3 { .. } => "thm3",
            Formula::Thm4 => "thm4",
            Formula::EulerInterp { .. } => "euler_interp",
            Formula::Cor11 { .. } => "cor11",
            Formula::Cor12 => "cor12",
        }
    }

    /// Whether the formula is a global-existence threshold on `ν₁`.
    pub fn is_threshold(&self) -> bool {
        matches!(self, Formula::Cor11 { .. } | Formula::Cor12)
    }

    fn exponent(&self) -> Option<f64> {
        match self {
            Formula::Leray { p } | Formula::Thm1Finite { p } | Formula::Cor11 { p } => Some(p.0),
            Formula::Thm1Infty => Some(f64::INFINITY),
            _ => None,
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

pub mod norm_keys {
    pub const LP: &str = "Lp";
    pub const L2: &str = "L2";
    pub const LINF: &str = "Linf";
    pub const B0HALF: &str = "B0half";
    pub const GRAD_B0HALF: &str = "GradB0half";
    pub const HS10: &str = "Hs10";
    pub const HS2: &str = "Hs2";
}
use norm_keys as keys;

fn default_c() -> f64 {
    1.0
}

fn default_margin() -> f64 {
    100.0
}

/// Inputs of one bound evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundQuery {
    pub formula: Formula,
    pub nu: ViscosityTriple,
    /// Norms of the initial data, keyed as in [`norm_keys`].
    pub norms: BTreeMap<String, f64>,
    #[serde(default = "default_c")]
    pub c: f64,
    /// Factor the corollary margin `ν₁ / threshold` must exceed.
    #[serde(default = "default_margin")]
    pub margin_factor: f64,
}

impl BoundQuery {
    pub fn new(formula: Formula, nu: ViscosityTriple) -> Self {
        Self {
            formula,
            nu,
            norms: BTreeMap::new(),
            c: 1.0,
            margin_factor: 100.0,
        }
    }

    pub fn with_norm(mut self, key: &str, value: f64) -> Self {
        self.norms.insert(key.to_string(), value);
        self
    }

    pub fn with_c(mut self, c: f64) -> Self {
        self.c = c;
        self
    }

    fn norm(&self, key: &str) -> Result<f64> {
        let v = *self.norms.get(key).ok_or_else(|| {
            Error::Config(format!("formula {} needs the norm {key:?}", self.formula))
        })?;
        positive(key, v)
    }

    fn lp_norm(&self, p: f64) -> Result<f64> {
        if p.is_infinite() && !self.norms.contains_key(keys::LP) {
            self.norm(keys::LINF)
        } else {
            self.norm(keys::LP)
        }
    }
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        config_err(format!("{name} must be positive and finite, got {v}"))
    }
}

fn check_p(p: f64) -> Result<()> {
    if p > 3.0 {
        Ok(())
    } else {
        config_err(format!("exponent p must lie in (3, inf], got {p}"))
    }
}

/// Which side of the `min` in the `ν₃`-only bound is active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Thm4Branch {
    /// `ν₃^{1/3} M^{−4/3}` (active when `ν₃ ≥ M`).
    CubeRoot,
    /// `ν₃³ M^{−4}` (active when `ν₃ < M`).
    Cubic,
}

/// An evaluated lifespan lower bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundValue {
    pub formula_id: String,
    pub t_lower: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub thm4_branch: Option<Thm4Branch>,
    /// `ν₃` at which both branches of the `ν₃`-only bound agree.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub crossover_nu3: Option<f64>,
    /// Set when the value depends on a norm this crate cannot compute.
    #[serde(default)]
    pub external_norm: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inputs: Option<BoundQuery>,
}

impl BoundValue {
    fn plain(id: &str, t: f64) -> Self {
        Self {
            formula_id: id.to_string(),
            t_lower: t,
            thm4_branch: None,
            crossover_nu3: None,
            external_norm: false,
            inputs: None,
        }
    }
}

/// A corollary threshold with its margin report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdValue {
    pub formula_id: String,
    pub threshold: f64,
    /// `ν₁ / threshold`.
    pub margin: f64,
    pub margin_factor: f64,
    /// `margin > margin_factor`.
    pub satisfied: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inputs: Option<BoundQuery>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Evaluation {
    Lifespan(BoundValue),
    Threshold(ThresholdValue),
}

impl Evaluation {
    pub fn lifespan(&self) -> Option<&BoundValue> {
        match self {
            Evaluation::Lifespan(b) => Some(b),
            Evaluation::Threshold(_) => None,
        }
    }

    pub fn threshold(&self) -> Option<&ThresholdValue> {
        match self {
            Evaluation::Threshold(t) => Some(t),
            Evaluation::Lifespan(_) => None,
        }
    }

    /// The lifespan bound or the threshold value.
    pub fn value(&self) -> f64 {
        match self {
            Evaluation::Lifespan(b) => b.t_lower,
            Evaluation::Threshold(t) => t.threshold,
        }
    }
}

/// Isotropic bound; `p = ∞` uses `C ν M^{−2}`.
pub fn leray_bound(p: f64, nu: f64, m: f64, c: f64) -> Result<BoundValue> {
    check_p(p)?;
    positive("viscosity", nu)?;
    positive("norm", m)?;
    positive("C", c)?;
    let t = if p.is_infinite() {
        c * nu / (m * m)
    } else {
        c * nu.powf((p + 3.0) / (p - 3.0)) * m.powf(-2.0 * p / (p - 3.0))
    };
    Ok(BoundValue::plain("leray", t))
}

fn require_ordered(nu: ViscosityTriple) -> Result<()> {
    if nu.nu3 > 0.0 && nu.ordered() {
        Ok(())
    } else {
        config_err(format!(
            "the bound assumes 0 < nu3 <= nu2 <= nu1, got ({}, {}, {})",
            nu.nu1, nu.nu2, nu.nu3
        ))
    }
}

/// Anisotropic bound with all three viscosities positive and ordered.
pub fn thm1_bound(p: f64, nu: ViscosityTriple, m: f64, c: f64) -> Result<BoundValue> {
    check_p(p)?;
    require_ordered(nu)?;
    positive("norm", m)?;
    positive("C", c)?;
    if p.is_infinite() {
        return Ok(BoundValue::plain("thm1_infty", c * nu.nu3 / (m * m)));
    }
    let t = c
        * nu.nu2.powf(p / (p - 3.0))
        * (nu.nu1 * nu.nu2 * nu.nu3).powf(1.0 / (p - 3.0))
        * m.powf(-2.0 * p / (p - 3.0));
    Ok(BoundValue::plain("thm1_finite", t))
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 0.5 {
        Ok(())
    } else {
        config_err(format!(
            "alpha must lie in the open interval (0, 1/2), got {alpha}; the endpoint 1/2 is not covered"
        ))
    }
}

/// The viscosity factor `𝒞(α)` with its three branches.
pub fn thm3_constant(alpha: f64, nu1: f64, nu2: f64) -> Result<f64> {
    check_alpha(alpha)?;
    positive("nu1", nu1)?;
    positive("nu2", nu2)?;
    Ok(if alpha <= 0.125 {
        nu1.powf(0.25) * nu2.powf(0.75 - alpha)
    } else if alpha <= 0.25 {
        nu1.powf(0.375 - alpha) * nu2.powf(0.625)
    } else {
        nu1.powf(0.25 - 0.5 * alpha) * nu2.powf(0.75 - 0.5 * alpha)
    })
}

/// Bound for horizontal dissipation only, `0 < ν₂ ≤ ν₁`.
pub fn thm3_bound(alpha: f64, nu1: f64, nu2: f64, m0: f64, m1: f64, c: f64) -> Result<BoundValue> {
    if nu2 > nu1 {
        return config_err(format!("the bound assumes 0 < nu2 <= nu1, got nu1 = {nu1}, nu2 = {nu2}"));
    }
    let cc = thm3_constant(alpha, nu1, nu2)?;
    positive("B0half norm", m0)?;
    positive("GradB0half norm", m1)?;
    positive("C", c)?;
    let base = c * cc / (m0.powf(1.0 - 2.0 * alpha) * m1.powf(2.0 * alpha));
    Ok(BoundValue::plain("thm3", base.powf(1.0 / alpha)))
}

/// Bound for vertical dissipation only, with the active branch and crossover.
pub fn thm4_bound(nu3: f64, m: f64, c: f64) -> Result<BoundValue> {
    positive("nu3", nu3)?;
    positive("Hs10 norm", m)?;
    positive("C", c)?;
    let a = nu3.cbrt() / m.powf(4.0 / 3.0);
    let b = nu3.powi(3) / m.powi(4);
    let (t, branch) = if b < a {
        (b, Thm4Branch::Cubic)
    } else {
        (a, Thm4Branch::CubeRoot)
    };
    let mut v = BoundValue::plain("thm4", c * t);
    v.thm4_branch = Some(branch);
    v.crossover_nu3 = Some(m);
    Ok(v)
}

/// Interpolation between the `ν₃`-only bound and an inviscid `H^{s₂}` lifespan.
pub fn euler_interp_bound(alpha: f64, nu3: f64, m1: f64, m2: f64, c: f64) -> Result<BoundValue> {
    if !(0.0..=1.0 / 3.0).contains(&alpha) {
        return config_err(format!("alpha must lie in [0, 1/3], got {alpha}"));
    }
    positive("nu3", nu3)?;
    positive("Hs10 norm", m1)?;
    positive("Hs2 norm", m2)?;
    positive("C", c)?;
    let t = c * nu3.powf(alpha) * m1.powf(-4.0 * alpha) * m2.powf(-(1.0 - 3.0 * alpha));
    let mut v = BoundValue::plain("euler_interp", t);
    v.external_norm = true;
    Ok(v)
}

/// Corollary threshold on `ν₁` with the margin `ν₁ / threshold`.
pub fn cor_threshold(query: &BoundQuery) -> Result<ThresholdValue> {
    let nu = query.nu;
    let threshold = match query.formula {
        Formula::Cor11 { p } => {
            let p = p.0;
            if !(p > 3.0 && p.is_finite()) {
                return config_err(format!("exponent p must lie in (3, inf), got {p}"));
            }
            require_ordered(nu)?;
            let l2 = query.norm(keys::L2)?;
            let lp = query.norm(keys::LP)?;
            nu.nu2.powf(-p - 1.0)
                * nu.nu3.powf(-5.0 * (p - 3.0) - 1.0)
                * l2.powf(4.0 * (p - 3.0))
                * lp.powf(2.0 * p)
        }
        Formula::Cor12 => {
            positive("nu2", nu.nu2)?;
            if nu.nu2 > nu.nu1 {
                return config_err("the threshold assumes 0 < nu2 <= nu1");
            }
            let b = query.norm(keys::B0HALF)?;
            nu.nu2.powi(-3) * b.powi(4)
        }
        other => return config_err(format!("{other} is not a threshold formula")),
    };
    positive("margin factor", query.margin_factor)?;
    let margin = nu.nu1 / threshold;
    Ok(ThresholdValue {
        formula_id: query.formula.id().to_string(),
        threshold,
        margin,
        margin_factor: query.margin_factor,
        satisfied: margin > query.margin_factor,
        inputs: Some(query.clone()),
    })
}

/// Evaluates any query; the result echoes the inputs.
pub fn evaluate(query: &BoundQuery) -> Result<Evaluation> {
    positive("C", query.c)?;
    query.nu.validate()?;
    let nu = query.nu;
    let c = query.c;
    let mut v = match query.formula {
        Formula::Leray { p } => leray_bound(p.0, nu.nu1, query.lp_norm(p.0)?, c)?,
        Formula::Thm1Finite { p } => {
            if p.0.is_infinite() {
                return config_err("thm1_finite needs a finite p; use thm1_infty");
            }
            thm1_bound(p.0, nu, query.lp_norm(p.0)?, c)?
        }
        Formula::Thm1Infty => thm1_bound(f64::INFINITY, nu, query.norm(keys::LINF)?, c)?,
        Formula::Thm3 { alpha } => thm3_bound(
            alpha,
            nu.nu1,
            nu.nu2,
            query.norm(keys::B0HALF)?,
            query.norm(keys::GRAD_B0HALF)?,
            c,
        )?,
        Formula::Thm4 => thm4_bound(nu.nu3, query.norm(keys::HS10)?, c)?,
        Formula::EulerInterp { alpha } => euler_interp_bound(
            alpha,
            nu.nu3,
            query.norm(keys::HS10)?,
            query.norm(keys::HS2)?,
            c,
        )?,
        Formula::Cor11 { .. } | Formula::Cor12 => {
            return cor_threshold(query).map(Evaluation::Threshold)
        }
    };
    v.inputs = Some(query.clone());
    Ok(Evaluation::Lifespan(v))
}

/// Power of `λ` picked up by a norm of `u₀` under `u₀ ↦ λ u₀(λ·)`, norms
/// taken over one period cell. `None` for inhomogeneous norms.
pub fn norm_homogeneity(key: &str, p: Option<f64>) -> Option<f64> {
    match key {
        keys::LP => p.map(|p| if p.is_infinite() { 1.0 } else { 1.0 - 3.0 / p }),
        keys::L2 => Some(-0.5),
        keys::LINF => Some(1.0),
        keys::B0HALF => Some(0.0),
        keys::GRAD_B0HALF => Some(1.0),
        _ => None,
    }
}

/// Rescales the norm inputs of `query` as `u₀ ↦ λ u₀(λ·)` does.
///
/// Viscosities are unchanged. Queries relying on `H^{s₁,0}` or `H^{s₂}`
/// are refused: those norms are inhomogeneous and have no exact power law.
pub fn scale_bound_inputs(query: &BoundQuery, lambda: f64) -> Result<BoundQuery> {
    positive("lambda", lambda)?;
    let p = query.formula.exponent();
    let mut out = query.clone();
    for (key, value) in out.norms.iter_mut() {
        let h = norm_homogeneity(key, p).ok_or_else(|| {
            Error::Config(format!("norm {key:?} has no scaling homogeneity"))
        })?;
        *value *= lambda.powf(h);
    }
    Ok(out)
}

/// `u₀,λ(x) = λ u₀(λx)` on the same box: the coefficient at `ξ` moves to
/// `λξ` and is multiplied by `λ`.
pub fn apply_scaling(u0: &VectorField3, lambda: usize) -> Result<VectorField3> {
    if lambda == 0 {
        return config_err("scaling factor must be a positive integer");
    }
    if lambda == 1 {
        return Ok(u0.clone());
    }
    let grid = u0.grid();
    let n = grid.n();
    let l = lambda as i64;
    let mut out = VectorField3::zeros(grid);
    for (comp_in, comp_out) in u0.components.iter().zip(out.components.iter_mut()) {
        for (idx, c) in comp_in.coeffs.iter().enumerate() {
            if c.norm() == 0.0 {
                continue;
            }
            let i = grid.unflatten(idx);
            let m = [0, 1, 2].map(|a| grid.freq(a, i[a]) * l);
            if (0..3).any(|a| 2 * m[a].unsigned_abs() as usize >= n[a]) {
                return config_err(format!(
                    "resolution insufficient: mode {:?} scaled by {lambda} leaves the grid",
                    [0, 1, 2].map(|a| grid.freq(a, i[a]))
                ));
            }
            comp_out.set_coeff(m, c * lambda as f64);
        }
    }
    Ok(out)
}

/// Scalar version of [`apply_scaling`].
pub fn apply_scaling_scalar(f: &SpectralField3, lambda: usize) -> Result<SpectralField3> {
    let v = VectorField3 {
        components: [f.clone(), SpectralField3::zeros(f.grid), SpectralField3::zeros(f.grid)],
    };
    let [s, _, _] = apply_scaling(&v, lambda)?.components;
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nu(a: f64, b: f64, c: f64) -> ViscosityTriple {
        ViscosityTriple::new(a, b, c).unwrap()
    }

    #[test]
    fn leray_examples() {
        assert!((leray_bound(6.0, 2.0, 1.0, 1.0).unwrap().t_lower - 8.0).abs() < 1e-12);
        assert!((leray_bound(f64::INFINITY, 4.0, 2.0, 1.0).unwrap().t_lower - 1.0).abs() < 1e-15);
        for p in [3.5, 5.0, 12.0] {
            assert!((leray_bound(p, 1.0, 1.0, 2.5).unwrap().t_lower - 2.5).abs() < 1e-12);
        }
        assert!(leray_bound(3.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn thm1_examples() {
        let v = thm1_bound(f64::INFINITY, nu(9.0, 5.0, 4.0), 2.0, 1.0).unwrap();
        assert!((v.t_lower - 1.0).abs() < 1e-15);
        let iso = thm1_bound(6.0, nu(1.7, 1.7, 1.7), 0.8, 1.0).unwrap().t_lower;
        let ler = leray_bound(6.0, 1.7, 0.8, 1.0).unwrap().t_lower;
        assert!((iso - ler).abs() < 1e-12 * ler);
        let err = thm1_bound(6.0, nu(1.0, 2.0, 0.5), 1.0, 1.0).unwrap_err();
        assert!(err.to_string().contains("0 < nu3 <= nu2 <= nu1"));
    }

    #[test]
    fn thm3_branches() {
        let lo = 16f64.powf(0.25) * 1f64.powf(0.75 - 0.125);
        let hi = 16f64.powf(0.375 - 0.125);
        assert!((lo - 2.0).abs() < 1e-12 && (hi - 2.0).abs() < 1e-12);
        assert!((thm3_constant(0.125, 16.0, 1.0).unwrap() - 2.0).abs() < 1e-12);
        assert!(thm3_constant(0.5, 1.0, 1.0).is_err());
        assert!(thm3_constant(0.0, 1.0, 1.0).is_err());
        let v = thm3_bound(0.3, 1.0, 1.0, 1.0, 1.0, 2.0).unwrap().t_lower;
        assert!((v - 2f64.powf(1.0 / 0.3)).abs() < 1e-9);
    }

    #[test]
    fn thm4_examples() {
        let v = thm4_bound(2.0, 2.0, 1.0).unwrap();
        assert!((v.t_lower - 0.5).abs() < 1e-12);
        assert_eq!(v.crossover_nu3, Some(2.0));
        assert_eq!(thm4_bound(0.1, 1.0, 1.0).unwrap().thm4_branch, Some(Thm4Branch::Cubic));
        assert!((thm4_bound(1.0, 1.0, 3.0).unwrap().t_lower - 3.0).abs() < 1e-15);
    }

    #[test]
    fn corollary_thresholds() {
        let q = BoundQuery::new(Formula::Cor12, nu(7.0, 1.0, 0.0)).with_norm(keys::B0HALF, 1.0);
        let t = cor_threshold(&q).unwrap();
        assert_eq!(t.threshold, 1.0);
        assert_eq!(t.margin, 7.0);
        assert!(!t.satisfied);
        let q2 = q.clone().with_norm(keys::B0HALF, 2.0);
        assert_eq!(cor_threshold(&q2).unwrap().threshold, 16.0);
        let q11 = BoundQuery::new(Formula::Cor11 { p: Exponent(4.0) }, nu(1.0, 1.0, 1.0))
            .with_norm(keys::L2, 1.0)
            .with_norm(keys::LP, 1.0);
        assert!((cor_threshold(&q11).unwrap().threshold - 1.0).abs() < 1e-15);
    }

    #[test]
    fn query_json_roundtrip() {
        let q = BoundQuery::new(Formula::Thm1Finite { p: Exponent(6.0) }, nu(3.0, 2.0, 1.0))
            .with_norm(keys::LP, 0.5);
        let s = serde_json::to_string(&q).unwrap();
        let back: BoundQuery = serde_json::from_str(&s).unwrap();
        assert_eq!(q, back);
        let inf: BoundQuery = serde_json::from_str(
            r#"{"formula":{"id":"leray","p":"inf"},"nu":{"nu1":4,"nu2":4,"nu3":4},"norms":{"Linf":2}}"#,
        )
        .unwrap();
        assert!((evaluate(&inf).unwrap().value() - 1.0).abs() < 1e-15);
        assert!(serde_json::from_str::<BoundQuery>(r#"{"formula":{"id":"thm4"},"nu":{"nu1":1,"nu2":1,"nu3":1},"norms":{},"bogus":1}"#).is_err());
    }

    #[test]
    fn missing_norm_is_reported() {
        let q = BoundQuery::new(Formula::Thm4, nu(1.0, 1.0, 1.0));
        assert!(evaluate(&q).unwrap_err().to_string().contains("Hs10"));
    }
}
