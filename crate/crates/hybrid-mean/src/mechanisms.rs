//! Noise mechanisms: calibration of Laplace and Gaussian scales for the two
//! trust groups, noise sampling, and the closed-form density of a sum of
//! independent Laplace variables (the object behind the Laplace
//! no-amplification certificate in [`crate::amplification`]).

use rand::Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use statrs::function::gamma::ln_gamma;

use crate::core::{Cohort, PrivacyParams};
use crate::rng::SeededRng;
use crate::{Error, Result};

/// Mechanism family: which noise distribution privatizes reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MechanismKind {
    Laplace,
    Gaussian,
}

impl std::fmt::Display for MechanismKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MechanismKind::Laplace => write!(f, "laplace"),
            MechanismKind::Gaussian => write!(f, "gaussian"),
        }
    }
}

impl std::str::FromStr for MechanismKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "laplace" => Ok(MechanismKind::Laplace),
            "gaussian" => Ok(MechanismKind::Gaussian),
            other => Err(Error::invalid(format!(
                "unknown mechanism {other:?}; expected laplace or gaussian"
            ))),
        }
    }
}

/// A mechanism family bound to the privacy parameters every user receives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mechanism {
    kind: MechanismKind,
    params: PrivacyParams,
}

impl Mechanism {
    /// Binds a family to its parameters. The Gaussian family requires
    /// `delta > 0`: its calibration divides by a function of `delta` and its
    /// guarantee is undefined at `delta = 0`.
    pub fn new(kind: MechanismKind, params: PrivacyParams) -> Result<Self> {
        if kind == MechanismKind::Gaussian && params.delta() == 0.0 {
            return Err(Error::invalid(
                "delta must be positive for the Gaussian mechanism; use the Laplace \
                 mechanism for pure (delta = 0) differential privacy",
            ));
        }
        Ok(Mechanism { kind, params })
    }

    /// Laplace mechanism at `(epsilon, 0)`.
    pub fn laplace(epsilon: f64) -> Result<Self> {
        Mechanism::new(MechanismKind::Laplace, PrivacyParams::new(epsilon, 0.0)?)
    }

    /// Gaussian mechanism at `(epsilon, delta)`, `delta > 0`.
    pub fn gaussian(epsilon: f64, delta: f64) -> Result<Self> {
        Mechanism::new(MechanismKind::Gaussian, PrivacyParams::new(epsilon, delta)?)
    }

    pub fn kind(&self) -> MechanismKind {
        self.kind
    }

    pub fn params(&self) -> PrivacyParams {
        self.params
    }

    /// The classic Gaussian calibration constant `sqrt(2 ln(1.25/delta))` is
    /// derived under `epsilon <= 1`; for larger `epsilon` the guarantee still
    /// holds but the constant is loose. Returns a printable note in that
    /// case and `None` otherwise.
    pub fn epsilon_warning(&self) -> Option<String> {
        if self.kind == MechanismKind::Gaussian
            && self.params.epsilon() > 1.0
            && self.params.epsilon().is_finite()
        {
            Some(format!(
                "warning: Gaussian calibration with epsilon = {} > 1; the \
                 sqrt(2 ln(1.25/delta)) constant is derived for epsilon <= 1 and is \
                 conservative beyond it",
                self.params.epsilon()
            ))
        } else {
            None
        }
    }
}

/// Per-group noise variances: `s_t_sq` for the curator's single release,
/// `s_l_sq` for each local user's report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseScales {
    kind: MechanismKind,
    s_t_sq: f64,
    s_l_sq: f64,
}

impl NoiseScales {
    /// Requirements: both variances finite and nonnegative.
    pub fn new(kind: MechanismKind, s_t_sq: f64, s_l_sq: f64) -> Result<Self> {
        for (name, v) in [("s_t_sq", s_t_sq), ("s_l_sq", s_l_sq)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::invalid(format!(
                    "{name} must be nonnegative and finite, got {v}"
                )));
            }
        }
        Ok(NoiseScales {
            kind,
            s_t_sq,
            s_l_sq,
        })
    }

    /// Zero-noise scales: the no-privacy limit, useful for validating that
    /// estimators collapse to their non-private counterparts.
    pub fn zero(kind: MechanismKind) -> Self {
        NoiseScales {
            kind,
            s_t_sq: 0.0,
            s_l_sq: 0.0,
        }
    }

    pub fn kind(&self) -> MechanismKind {
        self.kind
    }

    pub fn s_t_sq(&self) -> f64 {
        self.s_t_sq
    }

    pub fn s_l_sq(&self) -> f64 {
        self.s_l_sq
    }

    pub fn s_t(&self) -> f64 {
        self.s_t_sq.sqrt()
    }

    pub fn s_l(&self) -> f64 {
        self.s_l_sq.sqrt()
    }
}

/// Calibrates noise so every user receives the mechanism's `(epsilon, delta)`
/// guarantee, for data in `[0, m]` under substitution neighbors.
///
/// The curator's mean over the `c n` opt-in users has sensitivity `m / (c n)`
/// and each local report has sensitivity `m`, giving:
///
/// - Laplace: `s_T^2 = 2 m^2 / (c^2 n^2 eps^2)`, `s_L^2 = 2 m^2 / eps^2`
/// - Gaussian: `s_T = sqrt(2 ln(1.25/delta)) m / (c n eps)`,
///   `s_L = sqrt(2 ln(1.25/delta)) m / eps`
///
/// In both families the local/curator variance ratio is `c^2 n^2`: one local
/// report carries as much noise as the curator's whole release scaled by the
/// opt-in head count.
pub fn calibrate(mech: &Mechanism, cohort: &Cohort, m: f64) -> Result<NoiseScales> {
    if !m.is_finite() || m <= 0.0 {
        return Err(Error::invalid(format!(
            "m must be positive and finite, got {m}"
        )));
    }
    let eps = mech.params().epsilon();
    let cn = cohort.c() * cohort.n() as f64;
    match mech.kind() {
        MechanismKind::Laplace => {
            let b_l = m / eps;
            let b_t = m / (cn * eps);
            NoiseScales::new(MechanismKind::Laplace, 2.0 * b_t * b_t, 2.0 * b_l * b_l)
        }
        MechanismKind::Gaussian => {
            let k = (2.0 * (1.25 / mech.params().delta()).ln()).sqrt();
            let s_l = k * m / eps;
            let s_t = k * m / (cn * eps);
            NoiseScales::new(MechanismKind::Gaussian, s_t * s_t, s_l * s_l)
        }
    }
}

/// Which noise stream a draw belongs to: the curator's single release or a
/// local user's report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseRole {
    Curator,
    PerUser,
}

/// One mean-zero noise draw with the requested role's variance. A zero
/// variance returns `0.0` without consuming randomness.
pub fn sample_noise(scales: &NoiseScales, role: NoiseRole, rng: &mut SeededRng) -> f64 {
    let var = match role {
        NoiseRole::Curator => scales.s_t_sq,
        NoiseRole::PerUser => scales.s_l_sq,
    };
    if var == 0.0 {
        return 0.0;
    }
    match scales.kind {
        MechanismKind::Laplace => sample_laplace((var / 2.0).sqrt(), rng),
        MechanismKind::Gaussian => {
            let z: f64 = rng.sample(StandardNormal);
            var.sqrt() * z
        }
    }
}

/// Draws Laplace(b) noise as `b * (E1 - E2)` for independent `E1, E2 ~ Exp(1)`;
/// the difference has density `exp(-|x|/b) / (2b)` and variance `2 b^2`.
/// `b = 0` returns `0.0` without consuming randomness.
pub fn sample_laplace(b: f64, rng: &mut SeededRng) -> f64 {
    if b == 0.0 {
        return 0.0;
    }
    let exp = Exp::new(1.0).expect("unit rate is valid");
    b * (exp.sample(rng) - exp.sample(rng))
}

/// Log-density evaluator for the sum of `n_terms` i.i.d. Laplace(b)
/// variables, with the `x`-independent series coefficients precomputed so a
/// whole grid of evaluations costs one pass per point.
///
/// The sum's density is a modified-Bessel-K form of half-integer order,
/// which collapses to the finite series (with `z = |x| / b`):
///
/// ```text
/// p(x) = exp(-z) / (2^n b Gamma(n))
///        * sum_{j=0}^{n-1} Gamma(n+j) / (Gamma(j+1) Gamma(n-j)) * z^(n-1-j) / 2^j
/// ```
///
/// For `n = 1` this is `exp(-z) / (2b)` and for `n = 2` it is
/// `exp(-z) (1 + z) / (4b)`, matching direct convolution. Evaluation is in
/// log space throughout, so tails as deep as `z ~ 1e9` stay finite.
struct LaplaceSumDensity {
    b: f64,
    n_terms: u32,
    // coeffs[j] = ln Gamma(n+j) - ln Gamma(j+1) - ln Gamma(n-j) - j ln 2
    coeffs: Vec<f64>,
    log_prefix: f64,
}

impl LaplaceSumDensity {
    fn new(b: f64, n_terms: u32) -> Result<Self> {
        if !b.is_finite() || b <= 0.0 {
            return Err(Error::invalid(format!(
                "b must be positive and finite, got {b}"
            )));
        }
        if n_terms == 0 {
            return Err(Error::invalid("n_terms must be at least 1"));
        }
        let n = n_terms as f64;
        // coeffs[0] = 0 and each step multiplies by (n+j)(n-1-j)/(2(j+1)),
        // so the whole table needs no gamma evaluations.
        let mut coeffs = Vec::with_capacity(n_terms as usize);
        let mut acc = 0.0;
        coeffs.push(acc);
        for j in 0..(n_terms - 1) {
            let jf = j as f64;
            acc += (n + jf).ln() - (jf + 1.0).ln() + (n - 1.0 - jf).ln() - std::f64::consts::LN_2;
            coeffs.push(acc);
        }
        let log_prefix = -n * std::f64::consts::LN_2 - b.ln() - ln_gamma(n);
        Ok(LaplaceSumDensity {
            b,
            n_terms,
            coeffs,
            log_prefix,
        })
    }

    fn log_density(&self, x: f64) -> f64 {
        let z = (x / self.b).abs();
        let ln_z = z.ln();
        // Log-sum-exp over the series; the z^0 term keeps the max finite even
        // at z = 0, where ln_z = -inf must not be multiplied by 0.
        let mut max = f64::NEG_INFINITY;
        let mut terms = Vec::with_capacity(self.n_terms as usize);
        for (j, &coeff) in self.coeffs.iter().enumerate() {
            let k = (self.n_terms - 1) as usize - j;
            let t = if k == 0 { coeff } else { coeff + k as f64 * ln_z };
            if t > max {
                max = t;
            }
            terms.push(t);
        }
        let sum: f64 = terms.iter().map(|&t| (t - max).exp()).sum();
        -z + self.log_prefix + max + sum.ln()
    }
}

/// Log-density at `x` of the sum of `n_terms` independent Laplace(b)
/// variables. See [`laplace_sum_privacy_ratio`] for the privacy use.
///
/// Requirements: `b > 0` finite, `n_terms >= 1`. `x` may be any real; the
/// density is symmetric and strictly positive, so the result is always
/// finite (including at `x = 0`, where for `n_terms = 1` it is `ln(1/(2b))`).
pub fn laplace_sum_log_density(x: f64, b: f64, n_terms: u32) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::invalid(format!("x must be finite, got {x}")));
    }
    Ok(LaplaceSumDensity::new(b, n_terms)?.log_density(x))
}

/// Log-ratio `log p(x) - log p(x + shift)` of the Laplace-sum density, the
/// privacy loss an observer of the sum incurs when one contribution moves by
/// `shift`. It is nondecreasing in `x >= 0` and tends to `shift / b` from
/// below, so the sum never certifies a better pure-DP parameter than a
/// single Laplace report: averaging with honest users' noise does not
/// amplify the Laplace guarantee.
///
/// Requirements: those of [`laplace_sum_log_density`] plus `shift > 0`.
pub fn laplace_sum_privacy_ratio(b: f64, n_terms: u32, shift: f64, x: f64) -> Result<f64> {
    if !shift.is_finite() || shift <= 0.0 {
        return Err(Error::invalid(format!(
            "shift must be positive and finite, got {shift}"
        )));
    }
    if !x.is_finite() {
        return Err(Error::invalid(format!("x must be finite, got {x}")));
    }
    let density = LaplaceSumDensity::new(b, n_terms)?;
    Ok(density.log_density(x) - density.log_density(x + shift))
}

/// Supremum of [`laplace_sum_privacy_ratio`] over a fixed evaluation grid:
/// `x = 0` plus `points` log-spaced values of `x / shift` from `1e-3` up to
/// `2000 * max(1000, n_terms)`. The upper end grows with `n_terms` because
/// the ratio approaches its limit at rate `(n_terms - 1) * shift / x`; this
/// grid keeps the gap to the true supremum below about `5e-4`.
pub fn laplace_sum_ratio_grid_sup(b: f64, n_terms: u32, shift: f64) -> Result<f64> {
    if !shift.is_finite() || shift <= 0.0 {
        return Err(Error::invalid(format!(
            "shift must be positive and finite, got {shift}"
        )));
    }
    let density = LaplaceSumDensity::new(b, n_terms)?;
    let points = 400usize;
    let lo: f64 = 1e-3;
    let hi: f64 = 2000.0 * 1000f64.max(n_terms as f64);
    let step = (hi / lo).ln() / (points - 1) as f64;
    let mut sup = density.log_density(0.0) - density.log_density(shift);
    for i in 0..points {
        let x = shift * lo * (step * i as f64).exp();
        let r = density.log_density(x) - density.log_density(x + shift);
        if r > sup {
            sup = r;
        }
    }
    Ok(sup)
}
