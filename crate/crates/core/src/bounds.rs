//! Closed-form price-of-anarchy bounds for the mixed-autonomy SCALE strategy.
//!
//! Everything here is a pure function of scalars: the network autonomy
//! fraction `alpha` in (0, 1), a degree of asymmetry `mu` in (0, 1], a flow
//! ratio `gamma` and a bounding parameter `lambda` in [0, 1].
//!
//! The bound comes from the lambda approach: for every `lambda` with
//! `omega(lambda) < 1`, `PoA <= lambda / (1 - omega(lambda))`. `omega` is the
//! supremum over flow ratios of `gamma * (1 + (beta(gamma) - 1) * lambda)`
//! with `beta` the relaxed latency-ratio bound, evaluated at the network's
//! minimum asymmetry. Minimizing over the feasible lambdas gives one of three
//! closed forms depending on which region of `alpha` the instance falls in.

use std::fmt;

use thiserror::Error;

/// Below this distance from 1, `mu` is treated as exactly 1 and the
/// analytic limits of the `1 / (1 - mu)` expressions are used.
pub const MU_ONE_TOL: f64 = 1e-9;

/// Relative slack admitted above the flow-ratio ceiling `1 / alpha`.
pub const GAMMA_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("lambda = {lambda} is not admissible: omega = {omega} >= 1")]
    InfeasibleLambda { lambda: f64, omega: f64 },
}

fn domain(msg: impl Into<String>) -> BoundError {
    BoundError::Domain(msg.into())
}

fn check_alpha(alpha: f64) -> Result<(), BoundError> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(domain(format!("alpha = {alpha} must lie in (0, 1)")))
    }
}

fn check_mu(mu: f64) -> Result<(), BoundError> {
    if mu > 0.0 && mu <= 1.0 {
        Ok(())
    } else {
        Err(domain(format!("mu = {mu} must lie in (0, 1]")))
    }
}

fn check_lambda(lambda: f64) -> Result<(), BoundError> {
    if (0.0..=1.0).contains(&lambda) {
        Ok(())
    } else {
        Err(domain(format!("lambda = {lambda} must lie in [0, 1]")))
    }
}

fn mu_is_one(mu: f64) -> bool {
    (1.0 - mu).abs() < MU_ONE_TOL
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundParams {
    pub alpha: f64,
    pub mu: f64,
}

impl BoundParams {
    pub fn new(alpha: f64, mu: f64) -> Result<Self, BoundError> {
        check_alpha(alpha)?;
        check_mu(mu)?;
        Ok(Self { alpha, mu })
    }
}

/// A region boundary on the `alpha` axis. The raw value may fall outside
/// [0, 1] (or be infinite at `mu = 1`), which empties the adjacent region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Threshold(pub f64);

impl Threshold {
    pub fn value(self) -> f64 {
        self.0
    }

    pub fn in_range(self) -> bool {
        (0.0..=1.0).contains(&self.0)
    }

    pub fn clamped(self) -> f64 {
        self.0.clamp(0.0, 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaThresholds {
    /// At or below: no admissible lambda, the bound is vacuous.
    pub alpha0: Threshold,
    /// From here on the interior minimizer lambda* is admissible.
    pub alpha1: Threshold,
    /// From here on the minimizer sits at the branch switch lambda+.
    pub alpha2: Threshold,
    /// Above: the feasible lambda set is bounded by `1 - alpha`.
    pub alpha_tilde: Threshold,
    /// The alternative `(1 - 2 sqrt(mu)) / (1 - sqrt(mu))^2` form of
    /// `alpha1`, kept for comparison; it is not used for classification.
    pub alpha1_alt: Threshold,
}

pub fn alpha_thresholds(mu: f64) -> Result<AlphaThresholds, BoundError> {
    check_mu(mu)?;
    if mu_is_one(mu) {
        let t = Threshold(f64::NEG_INFINITY);
        return Ok(AlphaThresholds {
            alpha0: t,
            alpha1: t,
            alpha2: t,
            alpha_tilde: t,
            alpha1_alt: t,
        });
    }
    let r = mu.sqrt();
    let tilde = (1.0 - 2.0 * r) / ((1.0 - r) * (1.0 - r));
    Ok(AlphaThresholds {
        alpha0: Threshold((1.0 - 2.0 * r) / (1.0 - mu)),
        alpha1: Threshold(1.0 + (mu - (mu * mu + 4.0 * mu).sqrt()) / (2.0 * (1.0 - mu))),
        alpha2: Threshold((1.0 - 2.0 * mu) / ((1.0 - mu) * (1.0 - mu))),
        alpha_tilde: Threshold(tilde),
        alpha1_alt: Threshold(tilde),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaThresholds {
    /// `omega1(lambda) = 1` here.
    pub omega1_unit: f64,
    /// `omega2(lambda) = 1` here; equals `1 - alpha`.
    pub omega2_unit: f64,
    /// Upper crossing of the two omega branches.
    pub plus: f64,
    /// Lower crossing of the two omega branches.
    pub minus: f64,
    /// Where the interior maximizer in gamma meets the relaxed-bound kink.
    pub kink: f64,
    /// Stationary point of `lambda / (1 - omega1(lambda))`.
    pub star: f64,
}

pub fn lambda_thresholds(alpha: f64, mu: f64) -> Result<LambdaThresholds, BoundError> {
    BoundParams::new(alpha, mu)?;
    let x = alpha * (1.0 - mu);
    let root = (1.0 - alpha).sqrt();
    let den = x * (1.0 - mu) + 4.0 * mu;
    Ok(LambdaThresholds {
        omega1_unit: (1.0 - x) * (1.0 - x) / (4.0 * mu),
        omega2_unit: 1.0 - alpha,
        plus: (2.0 * mu * (1.0 + root) - x * mu) / den,
        minus: (2.0 * mu * (1.0 - root) - x * mu) / den,
        kink: mu / (x + 2.0 * mu),
        star: (1.0 - x) * (1.0 - x) / ((2.0 - x) * mu),
    })
}

/// Upper bound on the latency ratio of a link under SCALE, given its flow
/// ratio `gamma`, the optimal flow degree of autonomy `alpha_star` and its
/// asymmetry `mu_l`.
pub fn beta_bound(gamma: f64, alpha: f64, mu_l: f64, alpha_star: f64) -> Result<f64, BoundError> {
    check_alpha(alpha)?;
    check_mu(mu_l)?;
    check_gamma(gamma, alpha)?;
    if !(0.0..=1.0).contains(&alpha_star) {
        return Err(domain(format!("alpha* = {alpha_star} must lie in [0, 1]")));
    }
    if gamma == 0.0 {
        return Ok(1.0);
    }
    let gamma_tilde = 1.0 / (1.0 + (alpha - alpha_star) * (1.0 - mu_l));
    if gamma < gamma_tilde {
        Ok(1.0 - (1.0 - alpha_star * (1.0 - mu_l)) / (1.0 / gamma - alpha * (1.0 - mu_l)))
    } else {
        Ok(0.0)
    }
}

/// [`beta_bound`] relaxed over all `alpha_star` in [0, 1].
pub fn beta_bound_relaxed(gamma: f64, alpha: f64, mu_l: f64) -> Result<f64, BoundError> {
    check_alpha(alpha)?;
    check_mu(mu_l)?;
    check_gamma(gamma, alpha)?;
    Ok(relaxed(gamma, alpha, mu_l))
}

fn relaxed(gamma: f64, alpha: f64, mu: f64) -> f64 {
    if gamma == 0.0 {
        return 1.0;
    }
    if gamma < gamma_plus(alpha, mu) {
        1.0 - mu / (1.0 / gamma - alpha * (1.0 - mu))
    } else {
        0.0
    }
}

/// Kink of the relaxed bound: `1 / (alpha (1 - mu) + mu)`.
pub fn gamma_plus(alpha: f64, mu: f64) -> f64 {
    1.0 / (alpha * (1.0 - mu) + mu)
}

fn check_gamma(gamma: f64, alpha: f64) -> Result<(), BoundError> {
    if gamma >= 0.0 && gamma <= (1.0 + GAMMA_SLACK) / alpha {
        Ok(())
    } else {
        Err(domain(format!("gamma = {gamma} must lie in [0, 1/alpha]")))
    }
}

/// `sqrt(lambda mu / (alpha (1 - mu) + lambda mu))`.
pub fn delta(lambda: f64, alpha: f64, mu: f64) -> Result<f64, BoundError> {
    check_lambda(lambda)?;
    check_alpha(alpha)?;
    check_mu(mu)?;
    if mu == 1.0 {
        return if lambda > 0.0 {
            Ok(1.0)
        } else {
            Err(domain("delta is undefined at lambda = 0, mu = 1"))
        };
    }
    Ok((lambda * mu / (alpha * (1.0 - mu) + lambda * mu)).sqrt())
}

/// Interior branch of omega: the value of the gamma-supremum at the
/// stationary point `gamma* = (1 - delta) / (alpha (1 - mu))`, with the
/// `1 / (4 lambda)` limit at `mu = 1`.
pub fn omega1(lambda: f64, alpha: f64, mu: f64) -> Result<f64, BoundError> {
    check_lambda(lambda)?;
    check_alpha(alpha)?;
    check_mu(mu)?;
    if mu_is_one(mu) {
        if lambda == 0.0 {
            return Err(domain("omega1 is unbounded at lambda = 0, mu = 1"));
        }
        return Ok(0.25 / lambda);
    }
    let x = alpha * (1.0 - mu);
    if lambda == 0.0 {
        return Ok(1.0 / x);
    }
    let d = delta(lambda, alpha, mu)?;
    Ok((1.0 - d) / x - mu * (1.0 - d) * (1.0 - d) * lambda / (x * x * d))
}

/// Boundary branch of omega: `(1 - lambda) / alpha`, attained at `gamma = 1/alpha`.
pub fn omega2(lambda: f64, alpha: f64) -> Result<f64, BoundError> {
    check_lambda(lambda)?;
    check_alpha(alpha)?;
    Ok((1.0 - lambda) / alpha)
}

/// Piecewise omega: the boundary branch up to and including `lambda+`, the
/// interior branch above it.
pub fn omega(lambda: f64, alpha: f64, mu: f64) -> Result<f64, BoundError> {
    let plus = lambda_thresholds(alpha, mu)?.plus;
    if lambda <= plus {
        omega2(lambda, alpha)
    } else {
        omega1(lambda, alpha, mu)
    }
}

/// `gamma (1 - mu lambda / (1/gamma - alpha (1 - mu)))`, the quantity whose
/// supremum over `gamma` in (0, gamma+) is [`omega1`].
pub fn omega1_at_gamma(lambda: f64, gamma: f64, alpha: f64, mu: f64) -> f64 {
    gamma * (1.0 - mu * lambda / (1.0 / gamma - alpha * (1.0 - mu)))
}

/// `gamma (1 + (beta(gamma) - 1) lambda)` with the relaxed latency-ratio
/// bound; omega is its supremum over `gamma` in [0, 1/alpha].
pub fn omega_integrand(lambda: f64, gamma: f64, alpha: f64, mu: f64) -> f64 {
    gamma * (1.0 + (relaxed(gamma, alpha, mu) - 1.0) * lambda)
}

/// `lambda / (1 - omega(lambda))` for an admissible `lambda`.
pub fn poa_from_lambda(lambda: f64, alpha: f64, mu: f64) -> Result<f64, BoundError> {
    let w = omega(lambda, alpha, mu)?;
    if w >= 1.0 {
        return Err(BoundError::InfeasibleLambda { lambda, omega: w });
    }
    Ok(lambda / (1.0 - w))
}

/// Admissible lambdas `{lambda in [0,1] : omega(lambda) < 1}`, always of the
/// form `(lower, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaInterval {
    /// Open lower end.
    pub lower: f64,
}

impl LambdaInterval {
    pub fn contains(&self, lambda: f64) -> bool {
        lambda > self.lower && lambda <= 1.0
    }
}

pub fn feasible_lambda_interval(alpha: f64, mu: f64) -> Result<Option<LambdaInterval>, BoundError> {
    let th = alpha_thresholds(mu)?;
    let lambdas = lambda_thresholds(alpha, mu)?;
    if alpha <= th.alpha0.value() {
        Ok(None)
    } else if alpha <= th.alpha_tilde.value() {
        Ok(Some(LambdaInterval {
            lower: lambdas.omega1_unit,
        }))
    } else {
        Ok(Some(LambdaInterval {
            lower: lambdas.omega2_unit,
        }))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    /// No admissible lambda; the bound is infinite.
    A0,
    /// Minimum at `lambda = 1`.
    A1,
    /// Minimum at the interior stationary point `lambda*`.
    LambdaStar,
    /// Minimum at the branch switch `lambda+`.
    LambdaPlus,
}

impl Region {
    pub const ALL: [Region; 4] = [Region::A0, Region::A1, Region::LambdaStar, Region::LambdaPlus];

    pub fn label(self) -> &'static str {
        match self {
            Region::A0 => "A0",
            Region::A1 => "A1",
            Region::LambdaStar => "A_lambda*",
            Region::LambdaPlus => "A_lambda+",
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Expression {
    Infinite,
    AtOne,
    AtLambdaStar,
    AtLambdaPlus,
}

impl Expression {
    pub fn label(self) -> &'static str {
        match self {
            Expression::Infinite => "inf",
            Expression::AtOne => "PoA_w1(1)",
            Expression::AtLambdaStar => "PoA_w1(lambda*)",
            Expression::AtLambdaPlus => "PoA_w1(lambda+)",
        }
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// A price-of-anarchy bound; `Infinite` when no admissible lambda exists.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    Finite(f64),
    Infinite,
}

impl Bound {
    pub fn value(self) -> f64 {
        match self {
            Bound::Finite(v) => v,
            Bound::Infinite => f64::INFINITY,
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Bound::Finite(v) => Some(v),
            Bound::Infinite => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Bound::Finite(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundResult {
    pub params: BoundParams,
    pub region: Region,
    pub thresholds: AlphaThresholds,
    pub lambdas: LambdaThresholds,
    pub bound: Bound,
    pub expression: Expression,
}

pub fn classify_region(alpha: f64, mu: f64) -> Result<Region, BoundError> {
    BoundParams::new(alpha, mu)?;
    let th = alpha_thresholds(mu)?;
    Ok(if alpha <= th.alpha0.value() {
        Region::A0
    } else if alpha < th.alpha1.value() {
        Region::A1
    } else if alpha < th.alpha2.value() {
        Region::LambdaStar
    } else {
        Region::LambdaPlus
    })
}

/// `1 / (1 - omega1(1))` in closed form.
pub fn poa_at_one(alpha: f64, mu: f64) -> f64 {
    let x = alpha * (1.0 - mu);
    (x * x - x - 2.0 * mu - 2.0 * (mu * mu + x * mu).sqrt()) / ((1.0 - x) * (1.0 - x) - 4.0 * mu)
}

/// `lambda* / (1 - omega1(lambda*))` in closed form.
pub fn poa_at_lambda_star(alpha: f64, mu: f64) -> f64 {
    (1.0 - alpha * (1.0 - mu)) / mu
}

/// `lambda+ / (1 - omega(lambda+))` in closed form.
pub fn poa_at_lambda_plus(alpha: f64, mu: f64) -> f64 {
    let x = alpha * (1.0 - mu);
    let root = (1.0 - alpha).sqrt();
    (2.0 * alpha * mu * (1.0 + root) - alpha * x * mu)
        / (x * x + alpha * (5.0 * mu - 1.0) - 2.0 * mu * (1.0 - root))
}

/// Price-of-anarchy upper bound of the SCALE strategy as a function of the
/// network autonomy fraction and the minimum degree of asymmetry.
pub fn poa_bound(alpha: f64, mu: f64) -> Result<BoundResult, BoundError> {
    let params = BoundParams::new(alpha, mu)?;
    let region = classify_region(alpha, mu)?;
    let (bound, expression) = match region {
        Region::A0 => (Bound::Infinite, Expression::Infinite),
        Region::A1 => (Bound::Finite(poa_at_one(alpha, mu)), Expression::AtOne),
        Region::LambdaStar => (
            Bound::Finite(poa_at_lambda_star(alpha, mu)),
            Expression::AtLambdaStar,
        ),
        Region::LambdaPlus => (
            Bound::Finite(poa_at_lambda_plus(alpha, mu)),
            Expression::AtLambdaPlus,
        ),
    };
    Ok(BoundResult {
        params,
        region,
        thresholds: alpha_thresholds(mu)?,
        lambdas: lambda_thresholds(alpha, mu)?,
        bound,
        expression,
    })
}

/// Bound for fully selfish two-class routing: `4 mu / (4 mu - 1)`, `mu > 1/4`.
pub fn poa_bound_selfish(mu: f64) -> Result<f64, BoundError> {
    if !(mu > 0.25 && mu <= 1.0) {
        return Err(domain(format!("selfish bound needs mu in (1/4, 1], got {mu}")));
    }
    Ok(4.0 * mu / (4.0 * mu - 1.0))
}

/// Single-class SCALE bound `(1 + sqrt(1-alpha))^2 / (2 (1 + sqrt(1-alpha)) - 1)`.
pub fn poa_bound_single_class(alpha: f64) -> Result<f64, BoundError> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(domain(format!("alpha = {alpha} must lie in [0, 1]")));
    }
    let s = 1.0 + (1.0 - alpha).sqrt();
    Ok(s * s / (2.0 * s - 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn beta_bound_branches() {
        assert_eq!(beta_bound(0.0, 0.4, 0.5, 0.3).unwrap(), 1.0);
        for a_star in [0.0, 0.3, 1.0] {
            assert!(close(beta_bound(0.5, 0.4, 1.0, a_star).unwrap(), 0.5, 1e-15));
        }
        let (alpha, mu, a_star) = (0.4, 0.5, 0.3);
        let tilde = 1.0 / (1.0 + (alpha - a_star) * (1.0 - mu));
        assert_eq!(beta_bound(tilde, alpha, mu, a_star).unwrap(), 0.0);
        assert!(beta_bound(3.0, 0.4, 0.5, 0.3).is_err());
    }

    #[test]
    fn beta_relaxed_examples() {
        assert!(close(beta_bound_relaxed(0.3, 0.6, 1.0).unwrap(), 0.7, 1e-15));
        assert!(close(gamma_plus(0.7, 1.0), 1.0, 1e-15));
        assert_eq!(beta_bound_relaxed(1.0, 0.6, 1.0).unwrap(), 0.0);
        assert!(close(gamma_plus(0.5, 0.5), 4.0 / 3.0, 1e-15));
    }

    #[test]
    fn delta_examples() {
        assert_eq!(delta(0.5, 0.3, 1.0).unwrap(), 1.0);
        assert_eq!(delta(0.0, 0.3, 0.5).unwrap(), 0.0);
        assert!(close(delta(0.5, 0.5, 0.5).unwrap(), 0.5f64.sqrt(), 1e-15));
        assert!(delta(0.0, 0.3, 1.0).is_err());
    }

    #[test]
    fn omega_examples() {
        assert!(close(omega2(0.3, 0.5).unwrap(), 1.4, 1e-15));
        assert_eq!(omega1(0.5, 0.4, 1.0).unwrap(), 0.5);
        // The mu < 1 formula approaches the limit branch.
        let near = omega1(0.5, 0.4, 1.0 - 1e-8).unwrap();
        assert!(close(near, 0.5, 1e-4), "{near}");
        assert!(omega1(0.0, 0.4, 1.0).is_err());
    }

    #[test]
    fn omega_continuous_at_lambda_plus() {
        for i in 1..20 {
            for j in 1..=20 {
                let (alpha, mu) = (i as f64 / 20.0, j as f64 / 20.0);
                let plus = lambda_thresholds(alpha, mu).unwrap().plus;
                let w1 = omega1(plus, alpha, mu).unwrap();
                let w2 = omega2(plus, alpha).unwrap();
                assert!(close(w1, w2, 1e-9), "alpha={alpha} mu={mu}: {w1} vs {w2}");
            }
        }
    }

    #[test]
    fn lambda_threshold_examples() {
        assert!(close(lambda_thresholds(0.3, 0.5).unwrap().omega2_unit, 0.7, 1e-15));
        for alpha in [0.1, 0.5, 0.9] {
            let plus = lambda_thresholds(alpha, 1.0).unwrap().plus;
            assert!(close(plus, (1.0 + (1.0 - alpha).sqrt()) / 2.0, 1e-15));
        }
        let w1 = lambda_thresholds(1e-12, 1.0).unwrap().omega1_unit;
        assert!(close(w1, 0.25, 1e-11));
    }

    #[test]
    fn region_examples() {
        for k in 1..100 {
            assert_eq!(classify_region(k as f64 / 100.0, 0.6).unwrap(), Region::LambdaPlus);
        }
        let th = alpha_thresholds(1.0 / 3.0).unwrap();
        assert!(close(th.alpha1.value(), 0.34861, 1e-5));
        assert!(close(th.alpha2.value(), 0.75, 1e-12));
        assert_eq!(classify_region(0.5, 1.0 / 3.0).unwrap(), Region::LambdaStar);
        let th = alpha_thresholds(1.0 / 9.0).unwrap();
        assert!(close(th.alpha0.value(), 0.375, 1e-12));
        assert_eq!(classify_region(0.3, 1.0 / 9.0).unwrap(), Region::A0);
    }

    #[test]
    fn alpha1_forms_disagree_at_quarter() {
        let th = alpha_thresholds(0.25).unwrap();
        assert!(close(th.alpha1_alt.value(), 0.0, 1e-15));
        assert!(close(th.alpha1.value(), 0.479, 1e-3));
    }

    #[test]
    fn bound_examples() {
        let r = poa_bound(0.5, 1.0 / 3.0).unwrap();
        assert_eq!(r.expression, Expression::AtLambdaStar);
        assert!(close(r.bound.value(), 2.0, 1e-12));
        let r = poa_bound(0.5, 1.0).unwrap();
        assert_eq!(r.region, Region::LambdaPlus);
        let expected = (1.0 + 0.5f64.sqrt()).powi(2) / (2.0 * (1.0 + 0.5f64.sqrt()) - 1.0);
        assert!(close(r.bound.value(), expected, 1e-12));
        assert!(close(r.bound.value(), 1.20711, 1e-5));
        let r = poa_bound(0.3, 1.0 / 9.0).unwrap();
        assert_eq!(r.bound, Bound::Infinite);
        assert_eq!(r.region, Region::A0);
    }

    #[test]
    fn lambda_examples() {
        assert!(close(poa_from_lambda(1.0, 0.4, 1.0).unwrap(), 4.0 / 3.0, 1e-15));
        let unit = lambda_thresholds(0.5, 1.0).unwrap().omega2_unit;
        assert!(matches!(
            poa_from_lambda(unit, 0.5, 1.0),
            Err(BoundError::InfeasibleLambda { .. })
        ));
    }

    #[test]
    fn feasible_interval_cases() {
        let iv = feasible_lambda_interval(0.3, 1.0).unwrap().unwrap();
        assert!(close(iv.lower, 0.7, 1e-15));
        assert_eq!(feasible_lambda_interval(0.3, 1.0 / 9.0).unwrap(), None);
        let th = alpha_thresholds(1.0 / 9.0).unwrap();
        assert!(close(th.alpha_tilde.value(), 0.75, 1e-12));
        let iv = feasible_lambda_interval(0.4, 1.0 / 9.0).unwrap().unwrap();
        let w1 = lambda_thresholds(0.4, 1.0 / 9.0).unwrap().omega1_unit;
        assert_eq!(iv.lower, w1);
    }

    #[test]
    fn comparison_bounds() {
        assert!(close(poa_bound_selfish(1.0).unwrap(), 4.0 / 3.0, 1e-15));
        assert!(close(poa_bound_selfish(0.5).unwrap(), 2.0, 1e-15));
        assert!(poa_bound_selfish(0.25).is_err());
        assert!(close(poa_bound_single_class(0.0).unwrap(), 4.0 / 3.0, 1e-15));
        assert!(close(poa_bound_single_class(1.0).unwrap(), 1.0, 1e-15));
        assert!(close(poa_bound_single_class(0.5).unwrap(), 1.20711, 1e-5));
    }

    #[test]
    fn domain_checks() {
        assert!(poa_bound(0.0, 0.5).is_err());
        assert!(poa_bound(1.0, 0.5).is_err());
        assert!(poa_bound(0.5, 0.0).is_err());
        assert!(poa_bound(0.5, 1.1).is_err());
    }

    #[test]
    fn bound_nonincreasing_in_alpha() {
        for mu in [0.3, 0.5, 0.8, 1.0] {
            let mut prev = f64::INFINITY;
            for k in 1..1000 {
                let b = poa_bound(k as f64 * 1e-3, mu).unwrap().bound.value();
                assert!(b <= prev + 1e-12, "mu={mu} k={k}: {b} > {prev}");
                prev = b;
            }
        }
    }

    proptest! {
        #[test]
        fn relaxed_dominates_exact(alpha in 0.01f64..0.99, mu in 0.01f64..=1.0, a_star in 0.0f64..=1.0, u in 0.0f64..=1.0) {
            let gamma = u / alpha;
            let exact = beta_bound(gamma, alpha, mu, a_star).unwrap();
            let relaxed = beta_bound_relaxed(gamma, alpha, mu).unwrap();
            prop_assert!(relaxed >= exact - 1e-12);
            prop_assert!(exact <= 1.0 && relaxed <= 1.0);
        }

        #[test]
        fn tilde_not_below_alpha0(mu in 0.001f64..0.9999) {
            let th = alpha_thresholds(mu).unwrap();
            if th.alpha0.in_range() && th.alpha_tilde.in_range() {
                prop_assert!(th.alpha_tilde.value() >= th.alpha0.value());
            }
            prop_assert_eq!(th.alpha0.value() <= 0.0, mu >= 0.25);
        }

        #[test]
        fn lambda_ordering(alpha in 0.001f64..0.999, mu in 0.001f64..=1.0) {
            let l = lambda_thresholds(alpha, mu).unwrap();
            prop_assert!(l.minus > 0.0 && l.minus < l.kink);
            prop_assert!(l.plus > l.kink && l.plus < 1.0);
            prop_assert!(l.star > l.omega1_unit);
        }

        #[test]
        fn branch_ordering(alpha in 0.01f64..0.99, mu in 0.01f64..0.999, u in 0.0f64..=1.0) {
            let l = lambda_thresholds(alpha, mu).unwrap();
            let plus = l.plus;
            // Between the crossings, and above the upper one, away from them by a margin.
            let below = l.minus + 1e-3 + u * (plus - l.minus - 2e-3);
            let above = plus + 1e-3 + u * (1.0 - plus - 1e-3);
            if below > l.minus && below < plus {
                prop_assert!(omega1(below, alpha, mu).unwrap() < omega2(below, alpha).unwrap());
            }
            if above <= 1.0 {
                prop_assert!(omega1(above, alpha, mu).unwrap() >= omega2(above, alpha).unwrap() - 1e-12);
            }
        }

        #[test]
        fn finite_bounds_are_at_least_one(alpha in 0.001f64..0.999, mu in 0.001f64..=1.0) {
            let r = poa_bound(alpha, mu).unwrap();
            prop_assert_eq!(r.region == Region::A0, !r.bound.is_finite());
            if let Some(b) = r.bound.finite() {
                prop_assert!(b >= 1.0);
            }
        }
    }
}
