//! Odd, 2π-periodic interaction functions `H` between neighbouring oscillators.
//!
//! A coupling is admissible when it is smooth, 2π-periodic, odd, and strictly
//! increasing on `(-π/2, π/2)`. Together the last two force `H(0) = 0` and
//! `H(x) > 0` on `(0, π/2]`. None of these can be certified numerically, so
//! [`validate_coupling`] checks them on a uniform sample grid.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};

/// Step used for the central-difference derivative cross-check.
pub const FD_STEP: f64 = 1e-6;
/// Relative tolerance of the central-difference derivative cross-check.
pub const FD_TOLERANCE: f64 = 1e-6;
/// Sample count used when a coupling is admitted for use by the solvers.
pub const ADMISSION_SAMPLES: usize = 1024;

const CORE_SAMPLES: usize = 4096;

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Kind {
    Sine,
    /// `sin x − ¼ sin 2x`; unlike sine its slope at `±π/2` is nonzero.
    SineHarmonic,
    Custom {
        value: ScalarFn,
        derivative: ScalarFn,
    },
}

/// An interaction function together with its derivative.
#[derive(Clone)]
pub struct CouplingFunction {
    name: String,
    kind: Kind,
    max_derivative_on_core: f64,
}

impl fmt::Debug for CouplingFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CouplingFunction")
            .field("name", &self.name)
            .field("max_derivative_on_core", &self.max_derivative_on_core)
            .finish()
    }
}

impl CouplingFunction {
    /// Names accepted by [`CouplingFunction::by_name`].
    pub const REGISTERED: [&'static str; 2] = ["sine", "sine-harmonic"];

    /// `H(x) = sin x`, the coupling of the Lambda-Omega reduction.
    pub fn sine() -> Self {
        Self::from_kind("sine".into(), Kind::Sine)
    }

    /// `H(x) = sin x − ¼ sin 2x`, an admissible coupling with `H'(±π/2) = ½`.
    pub fn sine_harmonic() -> Self {
        Self::from_kind("sine-harmonic".into(), Kind::SineHarmonic)
    }

    /// Looks up a registered coupling.
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "sine" => Ok(Self::sine()),
            "sine-harmonic" => Ok(Self::sine_harmonic()),
            other => Err(Error::domain(format!(
                "unknown coupling '{other}' (known: {})",
                Self::REGISTERED.join(", ")
            ))),
        }
    }

    /// Wraps a user-supplied value/derivative pair without validating it.
    ///
    /// Use this to build candidates for [`validate_coupling`]; solvers should
    /// only receive couplings from [`CouplingFunction::checked`] or the
    /// built-in constructors.
    pub fn candidate<V, D>(name: impl Into<String>, value: V, derivative: D) -> Self
    where
        V: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::from_kind(
            name.into(),
            Kind::Custom {
                value: Arc::new(value),
                derivative: Arc::new(derivative),
            },
        )
    }

    /// Wraps a user-supplied pair and admits it only if every condition passes
    /// on [`ADMISSION_SAMPLES`] grid points.
    pub fn checked<V, D>(name: impl Into<String>, value: V, derivative: D) -> Result<Self>
    where
        V: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let candidate = Self::candidate(name, value, derivative);
        let report = validate_coupling(&candidate, ADMISSION_SAMPLES)?;
        if report.admissible() {
            Ok(candidate)
        } else {
            Err(Error::domain(format!(
                "coupling '{}' fails: {}",
                candidate.name,
                report.failed_conditions().join(", ")
            )))
        }
    }

    fn from_kind(name: String, kind: Kind) -> Self {
        let mut h = CouplingFunction {
            name,
            kind,
            max_derivative_on_core: f64::NAN,
        };
        h.max_derivative_on_core = maximize_on_core(|x| h.derivative(x));
        h
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// `H(x)` without argument checks. Hot loops use this.
    #[inline]
    pub fn value(&self, x: f64) -> f64 {
        match &self.kind {
            Kind::Sine => x.sin(),
            Kind::SineHarmonic => x.sin() - 0.25 * (2.0 * x).sin(),
            Kind::Custom { value, .. } => value(x),
        }
    }

    /// `H'(x)` without argument checks.
    #[inline]
    pub fn derivative(&self, x: f64) -> f64 {
        match &self.kind {
            Kind::Sine => x.cos(),
            Kind::SineHarmonic => x.cos() - 0.5 * (2.0 * x).cos(),
            Kind::Custom { derivative, .. } => derivative(x),
        }
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        check_finite(x)?;
        Ok(self.value(x))
    }

    pub fn eval_derivative(&self, x: f64) -> Result<f64> {
        check_finite(x)?;
        Ok(self.derivative(x))
    }

    /// `max H'` over the closed interval `[-π/2, π/2]`.
    pub fn max_derivative_on_core(&self) -> f64 {
        self.max_derivative_on_core
    }
}

fn check_finite(x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("phase difference {x} is not finite")))
    }
}

/// Dense sampling of `[-π/2, π/2]` followed by golden-section refinement
/// around the best sample.
fn maximize_on_core(f: impl Fn(f64) -> f64) -> f64 {
    let step = PI / (CORE_SAMPLES - 1) as f64;
    let (best_k, best) =
        (0..CORE_SAMPLES)
            .map(|k| (k, f(-FRAC_PI_2 + k as f64 * step)))
            .fold(
                (0, f64::NEG_INFINITY),
                |acc, (k, v)| if v > acc.1 { (k, v) } else { acc },
            );

    let mut lo = (-FRAC_PI_2 + (best_k as f64 - 1.0) * step).max(-FRAC_PI_2);
    let mut hi = (-FRAC_PI_2 + (best_k as f64 + 1.0) * step).min(FRAC_PI_2);
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - ratio * (hi - lo);
    let mut b = lo + ratio * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    for _ in 0..80 {
        if fa < fb {
            lo = a;
            a = b;
            fa = fb;
            b = lo + ratio * (hi - lo);
            fb = f(b);
        } else {
            hi = b;
            b = a;
            fb = fa;
            a = hi - ratio * (hi - lo);
            fa = f(a);
        }
    }
    best.max(fa).max(fb)
}

/// Outcome of one sampled condition; `worst` is the largest violation seen
/// (zero when the condition holds everywhere).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionCheck {
    pub passed: bool,
    pub worst: f64,
    pub worst_at: f64,
}

impl ConditionCheck {
    /// Folds `(x, violated, magnitude)` samples into a single verdict.
    fn collect(samples: impl Iterator<Item = (f64, bool, f64)>) -> Self {
        let mut check = ConditionCheck {
            passed: true,
            worst: 0.0,
            worst_at: f64::NAN,
        };
        for (x, violated, magnitude) in samples {
            if violated {
                if check.passed || magnitude > check.worst || magnitude.is_nan() {
                    check.worst = magnitude;
                    check.worst_at = x;
                }
                check.passed = false;
            }
        }
        check
    }
}

/// Sample-based check of the admissibility conditions.
#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub coupling: String,
    pub samples: usize,
    /// Finite values, and `H'` agrees with central differences of `H`.
    pub smooth: ConditionCheck,
    pub periodic: ConditionCheck,
    pub odd: ConditionCheck,
    /// `H' > 0` on the open interval `(-π/2, π/2)`.
    pub increasing_on_core: ConditionCheck,
    /// `H > 0` on `(0, π/2]`, a consequence of oddness and monotonicity.
    pub positive_on_half_core: ConditionCheck,
    /// `H'(π/2)`. When it vanishes the four centre-cell edges drop out of the
    /// linearization graph.
    pub derivative_at_core_edge: f64,
    pub max_derivative_on_core: f64,
}

impl ValidationReport {
    /// Names of the four defining conditions that failed.
    pub fn failed_conditions(&self) -> Vec<&'static str> {
        [
            ("smooth", self.smooth.passed),
            ("periodic", self.periodic.passed),
            ("odd", self.odd.passed),
            ("increasing_on_core", self.increasing_on_core.passed),
        ]
        .into_iter()
        .filter(|(_, ok)| !ok)
        .map(|(name, _)| name)
        .collect()
    }

    pub fn all_conditions_pass(&self) -> bool {
        self.failed_conditions().is_empty()
    }

    /// The four conditions plus the derived positivity.
    pub fn admissible(&self) -> bool {
        self.all_conditions_pass() && self.positive_on_half_core.passed
    }
}

/// Checks every admissibility condition on `samples` uniform points of
/// `[-2π, 2π]`. Failures are reported, never returned as errors.
pub fn validate_coupling(h: &CouplingFunction, samples: usize) -> Result<ValidationReport> {
    if samples < 16 {
        return Err(Error::domain(format!("need at least 16 samples, got {samples}")));
    }
    let grid: Vec<f64> = (0..samples)
        .map(|k| -2.0 * TAU + 2.0 * TAU * k as f64 / (samples - 1) as f64)
        .collect();
    let rel = |v: f64| 1.0 + v.abs();

    let smooth = ConditionCheck::collect(grid.iter().map(|&x| {
        let v = h.value(x);
        let d = h.derivative(x);
        if !v.is_finite() || !d.is_finite() {
            return (x, true, f64::INFINITY);
        }
        let fd = (h.value(x + FD_STEP) - h.value(x - FD_STEP)) / (2.0 * FD_STEP);
        let err = (d - fd).abs();
        (x, err > FD_TOLERANCE * rel(d), err)
    }));
    let periodic = ConditionCheck::collect(grid.iter().map(|&x| {
        let v = h.value(x);
        let err = (h.value(x + TAU) - v).abs();
        (x, err > 1e-9 * rel(v), err)
    }));
    let odd = ConditionCheck::collect(grid.iter().map(|&x| {
        let v = h.value(x);
        let err = (h.value(-x) + v).abs();
        (x, err > 1e-9 * rel(v), err)
    }));
    let increasing_on_core = ConditionCheck::collect(grid.iter().copied().filter(|x| x.abs() < FRAC_PI_2).map(|x| {
        let d = h.derivative(x);
        (x, !(d > 0.0), -d)
    }));
    let positive_on_half_core = ConditionCheck::collect(
        grid.iter()
            .copied()
            .filter(|&x| x > 0.0 && x <= FRAC_PI_2)
            .chain(std::iter::once(FRAC_PI_2))
            .map(|x| {
                let v = h.value(x);
                (x, !(v > 0.0), -v)
            }),
    );

    Ok(ValidationReport {
        coupling: h.name.clone(),
        samples,
        smooth,
        periodic,
        odd,
        increasing_on_core,
        positive_on_half_core,
        derivative_at_core_edge: h.derivative(FRAC_PI_2),
        max_derivative_on_core: h.max_derivative_on_core,
    })
}
