//! Continuous problem data, regime classification and the example registry.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};

pub type SpaceTimeFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type TimeFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type SpaceFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Which side of the discontinuity a node or evaluation belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

/// A coefficient that is smooth on `[0,d)` and on `(d,1]` but may jump at `d`.
///
/// There is no plain `x -> value` evaluation at `x = d`: callers
/// pick a one-sided branch with [`left`](Self::left) / [`right`](Self::right)
/// or use [`eval`](Self::eval), which rejects `x == d`.
#[derive(Clone)]
pub struct PiecewiseCoefficient {
    left: SpaceTimeFn,
    right: SpaceTimeFn,
}

impl PiecewiseCoefficient {
    pub fn new(
        left: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        right: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            left: Arc::new(left),
            right: Arc::new(right),
        }
    }

    /// Same function on both sides (used for the reaction coefficient).
    pub fn continuous(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        let f: SpaceTimeFn = Arc::new(f);
        Self {
            left: f.clone(),
            right: f,
        }
    }

    pub fn zero() -> Self {
        Self::continuous(|_, _| 0.0)
    }

    #[inline]
    pub fn left(&self, x: f64, t: f64) -> f64 {
        (self.left)(x, t)
    }

    #[inline]
    pub fn right(&self, x: f64, t: f64) -> f64 {
        (self.right)(x, t)
    }

    #[inline]
    pub fn on(&self, side: Side, x: f64, t: f64) -> f64 {
        match side {
            Side::Left => self.left(x, t),
            Side::Right => self.right(x, t),
        }
    }

    /// Evaluates the branch containing `x`; `x == d` is an error.
    pub fn eval(&self, x: f64, t: f64, d: f64) -> Result<f64> {
        if x < d {
            Ok(self.left(x, t))
        } else if x > d {
            Ok(self.right(x, t))
        } else {
            Err(Error::AtDiscontinuity(x))
        }
    }
}

impl fmt::Debug for PiecewiseCoefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("PiecewiseCoefficient { .. }")
    }
}

/// Data of the model problem
///
/// ```text
/// eps u_xx + mu a u_x - b u - u_t = f,  u(0,t) = p(t), u(1,t) = r(t), u(x,0) = q(x)
/// ```
///
/// with `a <= -alpha1` left of `d`, `a >= alpha2` right of `d` and `b >= beta`.
#[derive(Clone)]
pub struct ProblemSpec {
    pub a: PiecewiseCoefficient,
    pub b: PiecewiseCoefficient,
    pub f: PiecewiseCoefficient,
    pub p: TimeFn,
    pub r: TimeFn,
    pub q: SpaceFn,
    pub eps: f64,
    pub mu: f64,
    pub d: f64,
    pub final_time: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub beta: f64,
    pub rho: f64,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("eps", &self.eps)
            .field("mu", &self.mu)
            .field("d", &self.d)
            .field("final_time", &self.final_time)
            .field("alpha1", &self.alpha1)
            .field("alpha2", &self.alpha2)
            .field("beta", &self.beta)
            .field("rho", &self.rho)
            .finish_non_exhaustive()
    }
}

const SIGN_CHECK_SAMPLES: usize = 101;
const COMPAT_TOL: f64 = 1e-12;

impl ProblemSpec {
    /// Lower bound on `|a|` used in the layer rates and guards.
    pub fn alpha(&self) -> f64 {
        self.alpha1.min(self.alpha2)
    }

    /// Constant of the a-priori bound `|u| <= |u|_boundary + |f| / theta`.
    pub fn stability_theta(&self) -> f64 {
        (self.alpha1 / self.d).min(self.alpha2 / (1.0 - self.d))
    }

    /// Returns a copy with different perturbation parameters.
    pub fn with_perturbation(&self, eps: f64, mu: f64) -> Self {
        Self {
            eps,
            mu,
            ..self.clone()
        }
    }

    pub fn with_rho(&self, rho: f64) -> Self {
        Self {
            rho,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidProblem(msg));
        if !(self.eps > 0.0 && self.eps <= 1.0) {
            return bad(format!("eps={} outside (0,1]", self.eps));
        }
        if !(self.mu > 0.0 && self.mu <= 1.0) {
            return bad(format!("mu={} outside (0,1]", self.mu));
        }
        if !(self.d > 0.0 && self.d < 1.0) {
            return bad(format!("d={} outside (0,1)", self.d));
        }
        if !(self.final_time > 0.0 && self.final_time.is_finite()) {
            return bad(format!("T={} must be positive", self.final_time));
        }
        for (name, v) in [
            ("alpha1", self.alpha1),
            ("alpha2", self.alpha2),
            ("beta", self.beta),
            ("rho", self.rho),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name}={v} must be positive"));
            }
        }

        let n = SIGN_CHECK_SAMPLES - 1;
        for jt in 0..=n {
            let t = self.final_time * jt as f64 / n as f64;
            for ix in 0..=n {
                let x = ix as f64 / n as f64;
                let slack = 1e-12;
                if x < self.d {
                    let a = self.a.left(x, t);
                    if !(a <= -self.alpha1 + slack) {
                        return bad(format!("a({x},{t})={a} > -alpha1"));
                    }
                } else if x > self.d {
                    let a = self.a.right(x, t);
                    if !(a >= self.alpha2 - slack) {
                        return bad(format!("a({x},{t})={a} < alpha2"));
                    }
                }
                let side = if x <= self.d { Side::Left } else { Side::Right };
                let b = self.b.on(side, x, t);
                if !(b >= self.beta - slack) {
                    return bad(format!("b({x},{t})={b} < beta"));
                }
            }
        }

        let (q0, p0) = ((self.q)(0.0), (self.p)(0.0));
        let (q1, r0) = ((self.q)(1.0), (self.r)(0.0));
        if (q0 - p0).abs() > COMPAT_TOL || (q1 - r0).abs() > COMPAT_TOL {
            return bad(format!(
                "corner incompatibility: q(0)={q0}, p(0)={p0}, q(1)={q1}, r(0)={r0}"
            ));
        }
        Ok(())
    }
}

/// Sampled sup-norm estimates of the coefficients.
///
/// Black-box coefficients have no exact sup-norm, so the maxima are taken on a
/// fixed tensor sample (both one-sided limits at `d` included). The sample does
/// not depend on the mesh, so the N and 2N runs of a double-mesh pair see the
/// same norms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientNorms {
    pub a: f64,
    pub b: f64,
    pub f: f64,
}

const NORM_X_SAMPLES: usize = 512;
const NORM_T_SAMPLES: usize = 128;

impl CoefficientNorms {
    pub fn estimate(spec: &ProblemSpec) -> Self {
        let mut norms = CoefficientNorms {
            a: 0.0,
            b: 0.0,
            f: 0.0,
        };
        for jt in 0..=NORM_T_SAMPLES {
            let t = spec.final_time * jt as f64 / NORM_T_SAMPLES as f64;
            for k in 0..=NORM_X_SAMPLES {
                let s = k as f64 / NORM_X_SAMPLES as f64;
                for (side, x) in [
                    (Side::Left, s * spec.d),
                    (Side::Right, spec.d + s * (1.0 - spec.d)),
                ] {
                    norms.a = norms.a.max(spec.a.on(side, x, t).abs());
                    norms.b = norms.b.max(spec.b.on(side, x, t).abs());
                    norms.f = norms.f.max(spec.f.on(side, x, t).abs());
                }
            }
        }
        norms
    }
}

/// `min(1, beta / |a|)`, which keeps `rho |a| - b <= 0`.
pub fn default_rho(spec: &ProblemSpec) -> f64 {
    let norm_a = CoefficientNorms::estimate(spec).a;
    if norm_a > 0.0 {
        (spec.beta / norm_a).min(1.0)
    } else {
        1.0
    }
}

/// Which perturbation parameter controls the layer widths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// `sqrt(alpha) mu <= sqrt(rho eps)`: reaction-diffusion-like layers.
    EpsDominant,
    /// `sqrt(alpha) mu > sqrt(rho eps)`: convection-diffusion-like layers.
    MuDominant,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::EpsDominant => "eps-dominant",
            Regime::MuDominant => "mu-dominant",
        })
    }
}

pub fn classify_regime(spec: &ProblemSpec) -> Regime {
    if spec.alpha().sqrt() * spec.mu <= (spec.rho * spec.eps).sqrt() {
        Regime::EpsDominant
    } else {
        Regime::MuDominant
    }
}

/// A smooth manufactured solution with the derivatives the source needs.
#[derive(Clone)]
pub struct ExactSolution {
    pub u: SpaceTimeFn,
    pub u_x: SpaceTimeFn,
    pub u_xx: SpaceTimeFn,
    pub u_t: SpaceTimeFn,
}

impl ExactSolution {
    pub fn new(
        u: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        u_x: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        u_xx: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        u_t: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            u: Arc::new(u),
            u_x: Arc::new(u_x),
            u_xx: Arc::new(u_xx),
            u_t: Arc::new(u_t),
        }
    }

    pub fn zero() -> Self {
        Self::new(|_, _| 0.0, |_, _| 0.0, |_, _| 0.0, |_, _| 0.0)
    }

    #[inline]
    pub fn value(&self, x: f64, t: f64) -> f64 {
        (self.u)(x, t)
    }
}

impl fmt::Debug for ExactSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("ExactSolution { .. }")
    }
}

/// Builds the problem whose exact solution is `exact`: the source becomes
/// `eps u_xx + mu a u_x - b u - u_t` on each side and the boundary and initial
/// data are traced from `exact`. Everything else is taken from `skeleton`.
pub fn mms_problem(exact: &ExactSolution, skeleton: &ProblemSpec) -> Result<ProblemSpec> {
    let (u0, u1) = (exact.value(0.0, 0.0), exact.value(1.0, 0.0));
    if !(u0.is_finite() && u1.is_finite()) {
        return Err(Error::InvalidProblem(
            "manufactured solution is not finite at the corners".into(),
        ));
    }

    let (eps, mu) = (skeleton.eps, skeleton.mu);
    let source = |side: Side| {
        let e = exact.clone();
        let a = skeleton.a.clone();
        let b = skeleton.b.clone();
        move |x: f64, t: f64| {
            eps * (e.u_xx)(x, t) + mu * a.on(side, x, t) * (e.u_x)(x, t)
                - b.on(side, x, t) * (e.u)(x, t)
                - (e.u_t)(x, t)
        }
    };
    let f = PiecewiseCoefficient::new(source(Side::Left), source(Side::Right));

    let (u_p, u_r, u_q) = (exact.u.clone(), exact.u.clone(), exact.u.clone());
    let spec = ProblemSpec {
        f,
        p: Arc::new(move |t| u_p(0.0, t)),
        r: Arc::new(move |t| u_r(1.0, t)),
        q: Arc::new(move |x| u_q(x, 0.0)),
        ..skeleton.clone()
    };
    let (q0, p0, q1, r0) = ((spec.q)(0.0), (spec.p)(0.0), (spec.q)(1.0), (spec.r)(0.0));
    if (q0 - p0).abs() > COMPAT_TOL || (q1 - r0).abs() > COMPAT_TOL {
        return Err(Error::InvalidProblem(
            "manufactured solution violates corner compatibility".into(),
        ));
    }
    Ok(spec)
}

/// Identifiers of the built-in problems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExampleId {
    Example1,
    Example2,
    Example3,
    MmsSmooth,
    MmsLayer,
}

impl ExampleId {
    pub const ALL: [ExampleId; 5] = [
        ExampleId::Example1,
        ExampleId::Example2,
        ExampleId::Example3,
        ExampleId::MmsSmooth,
        ExampleId::MmsLayer,
    ];

    pub const DEFAULT_EPS: f64 = 1.0 / 64.0;
    pub const DEFAULT_MU: f64 = 1.0 / 65536.0;

    pub fn name(self) -> &'static str {
        match self {
            ExampleId::Example1 => "example1",
            ExampleId::Example2 => "example2",
            ExampleId::Example3 => "example3",
            ExampleId::MmsSmooth => "mms-smooth",
            ExampleId::MmsLayer => "mms-layer",
        }
    }

    /// The problem at the given perturbation parameters, with the default rho.
    pub fn spec(self, eps: f64, mu: f64) -> ProblemSpec {
        let mut spec = match self {
            ExampleId::Example1 => example12(eps, mu, 2.0),
            ExampleId::Example2 => example12(eps, mu, 3.0),
            ExampleId::Example3 => example3(eps, mu),
            ExampleId::MmsSmooth | ExampleId::MmsLayer => {
                let skeleton = example12(eps, mu, 2.0);
                let exact = self.exact(eps).expect("manufactured example");
                mms_problem(&exact, &skeleton).expect("built-in manufactured solution is compatible")
            }
        };
        spec.rho = default_rho(&spec);
        spec
    }

    /// Exact solution, known only for the manufactured problems.
    pub fn exact(self, eps: f64) -> Option<ExactSolution> {
        match self {
            ExampleId::MmsSmooth => Some(ExactSolution::new(
                |x, t| (PI * x).sin() * (-t).exp(),
                |x, t| PI * (PI * x).cos() * (-t).exp(),
                |x, t| -PI * PI * (PI * x).sin() * (-t).exp(),
                |x, t| -(PI * x).sin() * (-t).exp(),
            )),
            ExampleId::MmsLayer => {
                let k = 1.0 / eps.sqrt();
                Some(ExactSolution::new(
                    move |x, t| (-t).exp() * ((-k * x).exp() + x),
                    move |x, t| (-t).exp() * (1.0 - k * (-k * x).exp()),
                    move |x, t| (-t).exp() * k * k * (-k * x).exp(),
                    move |x, t| -(-t).exp() * ((-k * x).exp() + x),
                ))
            }
            _ => None,
        }
    }
}

impl fmt::Display for ExampleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExampleId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExampleId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| Error::UnknownExample {
                name: s.to_string(),
                valid: ExampleId::ALL.map(ExampleId::name).join(", "),
            })
    }
}

/// Looks up a built-in problem at the default parameters `eps = 2^-6`,
/// `mu = 2^-16`.
pub fn builtin_example(name: &str) -> Result<ProblemSpec> {
    let id: ExampleId = name.parse()?;
    Ok(id.spec(ExampleId::DEFAULT_EPS, ExampleId::DEFAULT_MU))
}

fn zero_data() -> (TimeFn, TimeFn, SpaceFn) {
    (Arc::new(|_| 0.0), Arc::new(|_| 0.0), Arc::new(|_| 0.0))
}

/// Examples 1 and 2 differ only in the factor of the right-hand source.
fn example12(eps: f64, mu: f64, right_source: f64) -> ProblemSpec {
    let (p, r, q) = zero_data();
    ProblemSpec {
        a: PiecewiseCoefficient::new(|x, _| -(1.0 + x * (1.0 - x)), |x, _| 1.0 + x * (1.0 - x)),
        b: PiecewiseCoefficient::continuous(|x, _| 1.0 + x.exp()),
        f: PiecewiseCoefficient::new(
            |x, t| -2.0 * (1.0 + x * x) * t,
            move |x, t| right_source * (1.0 + x * x) * t,
        ),
        p,
        r,
        q,
        eps,
        mu,
        d: 0.5,
        final_time: 1.0,
        alpha1: 1.0,
        alpha2: 1.0,
        beta: 2.0,
        rho: 1.0,
    }
}

fn example3(eps: f64, mu: f64) -> ProblemSpec {
    let (p, r, q) = zero_data();
    ProblemSpec {
        a: PiecewiseCoefficient::new(|x, t| -(1.0 + (-x * t).exp()), |x, t| 2.0 + x + t),
        b: PiecewiseCoefficient::continuous(|x, t| 2.0 + x * t),
        f: PiecewiseCoefficient::new(
            |x, t| ((t * t).exp() - 1.0) * (1.0 + x * t),
            |x, t| -(2.0 + x) * t * t,
        ),
        p,
        r,
        q,
        eps,
        mu,
        d: 0.5,
        final_time: 1.0,
        alpha1: 1.0 + (-0.5f64).exp(),
        alpha2: 2.5,
        beta: 2.0,
        rho: 1.0,
    }
}
