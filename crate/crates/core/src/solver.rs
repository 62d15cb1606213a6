//! ADMM for the robust graphical lasso
//!
//! ```text
//! minimize  -log det Θ + tr(F Θ) + ρ‖Z‖₁ + λ‖S‖₁
//! s.t.      Θ = Z,  M = F + S,  F ⪰ 0
//! ```
//!
//! and the plain graphical lasso as the special case with `F = M` held fixed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{log_det_prox, project_psd, soft_threshold_matrix, SymMatrix};

/// When the penalties `mu1, mu2` are multiplied by `beta` within an iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PenaltySchedule {
    /// Scale first, then run the primal and dual updates with the new values.
    #[default]
    GrowBeforeUpdate,
    /// Run the updates, then scale (the first iteration uses `mu*_init`).
    GrowAfterUpdate,
}

/// How the `U2` dual enters the `F`-update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DualForm {
    /// `F = P(U2 + M - S - Θ/mu2)`, the same scaling the `S`-update and the
    /// `U2 += M - F - S` step use.
    #[default]
    Scaled,
    /// `F = P(U2/mu2 + M - S - Θ/mu2)`.
    Literal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub rho: f64,
    pub lambda: f64,
    pub mu1_init: f64,
    pub mu2_init: f64,
    pub beta: f64,
    pub epsilon: f64,
    pub max_iter: usize,
    /// Upper bound on `mu1` and `mu2`. `None` lets them grow without limit.
    pub mu_max: Option<f64>,
    pub schedule: PenaltySchedule,
    pub dual_form: DualForm,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            rho: 0.05,
            lambda: 1.0,
            mu1_init: 0.2,
            mu2_init: 0.2,
            beta: 1.2,
            epsilon: 1e-7,
            max_iter: 500,
            mu_max: None,
            schedule: PenaltySchedule::default(),
            dual_form: DualForm::default(),
        }
    }
}

impl SolverConfig {
    pub fn with_penalties(rho: f64, lambda: f64) -> Self {
        Self {
            rho,
            lambda,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        fn check(ok: bool, name: &'static str, msg: String) -> Result<()> {
            if ok {
                Ok(())
            } else {
                Err(Error::param(name, msg))
            }
        }
        check(self.rho >= 0.0 && self.rho.is_finite(), "rho", format!("must be >= 0, got {}", self.rho))?;
        check(
            self.lambda >= 0.0 && self.lambda.is_finite(),
            "lambda",
            format!("must be >= 0, got {}", self.lambda),
        )?;
        check(
            self.mu1_init > 0.0 && self.mu1_init.is_finite(),
            "mu1_init",
            format!("must be > 0, got {}", self.mu1_init),
        )?;
        check(
            self.mu2_init > 0.0 && self.mu2_init.is_finite(),
            "mu2_init",
            format!("must be > 0, got {}", self.mu2_init),
        )?;
        check(self.beta >= 1.0 && self.beta.is_finite(), "beta", format!("must be >= 1, got {}", self.beta))?;
        check(
            self.epsilon > 0.0 && self.epsilon.is_finite(),
            "epsilon",
            format!("must be > 0, got {}", self.epsilon),
        )?;
        check(self.max_iter >= 1, "max_iter", "must be >= 1".into())?;
        if let Some(cap) = self.mu_max {
            check(
                cap >= self.mu1_init.max(self.mu2_init) && cap.is_finite(),
                "mu_max",
                format!("must be finite and >= both initial penalties, got {cap}"),
            )?;
        }
        Ok(())
    }

    fn grow(&self, mu: f64) -> f64 {
        let next = mu * self.beta;
        match self.mu_max {
            Some(cap) => next.min(cap),
            None => next,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    MaxIterations,
}

/// Full ADMM state between iterations.
#[derive(Debug, Clone)]
pub struct IterationState {
    pub theta: SymMatrix,
    pub z: SymMatrix,
    pub f: SymMatrix,
    pub s: SymMatrix,
    pub u1: SymMatrix,
    pub u2: SymMatrix,
    pub mu1: f64,
    pub mu2: f64,
    pub k: usize,
}

impl IterationState {
    /// `F = Z = U1 = U2 = 0`, `S = M`. `Θ` starts at the identity so the first
    /// relative change is well defined.
    pub fn initial(m: &SymMatrix, config: &SolverConfig) -> Self {
        let p = m.dim();
        Self {
            theta: SymMatrix::identity(p),
            z: SymMatrix::zeros(p),
            f: SymMatrix::zeros(p),
            s: m.clone(),
            u1: SymMatrix::zeros(p),
            u2: SymMatrix::zeros(p),
            mu1: config.mu1_init,
            mu2: config.mu2_init,
            k: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.theta.dim()
    }
}

/// `Θ = prox(W, mu1)` with `W = mu1 (Z - U1) - F`.
pub fn update_theta(state: &IterationState) -> Result<SymMatrix> {
    let w = state.z.axpby(state.mu1, &state.u1, -state.mu1);
    log_det_prox(&(&w - &state.f), state.mu1)
}

/// `Z = Soft_{rho/mu1}(Θ + U1)`.
pub fn update_z(state: &IterationState, rho: f64) -> SymMatrix {
    soft_threshold_matrix(&(&state.theta + &state.u1), rho / state.mu1)
}

/// Projects the unconstrained `F` minimizer onto the PSD cone.
pub fn update_f(state: &IterationState, m: &SymMatrix, dual_form: DualForm) -> Result<SymMatrix> {
    let u2_coef = match dual_form {
        DualForm::Scaled => 1.0,
        DualForm::Literal => 1.0 / state.mu2,
    };
    let a = (m - &state.s)
        .axpby(1.0, &state.u2, u2_coef)
        .axpby(1.0, &state.theta, -1.0 / state.mu2);
    project_psd(&a)
}

/// `S = Soft_{lambda/mu2}(M - F + U2)`.
pub fn update_s(state: &IterationState, m: &SymMatrix, lambda: f64) -> SymMatrix {
    let a = (m - &state.f).axpby(1.0, &state.u2, 1.0);
    soft_threshold_matrix(&a, lambda / state.mu2)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Convergence {
    pub delta1: f64,
    pub delta2: f64,
    pub converged: bool,
}

/// `Δ1 = ‖Θ' - Θ‖/‖Θ‖`, `Δ2 = ‖M - F - S‖/‖M‖`; converged when both are below `epsilon`.
pub fn check_convergence(
    theta_prev: &SymMatrix,
    theta_next: &SymMatrix,
    m: &SymMatrix,
    f: &SymMatrix,
    s: &SymMatrix,
    epsilon: f64,
) -> Result<Convergence> {
    let theta_norm = theta_prev.frobenius();
    let m_norm = m.frobenius();
    if theta_norm == 0.0 {
        return Err(Error::InvalidInput("previous Θ has zero norm; Δ1 undefined".into()));
    }
    if m_norm == 0.0 {
        return Err(Error::InvalidInput("M has zero norm; Δ2 undefined".into()));
    }
    let delta1 = theta_next.distance(theta_prev) / theta_norm;
    let delta2 = residual(m, f, s) / m_norm;
    Ok(Convergence {
        delta1,
        delta2,
        converged: delta1 < epsilon && delta2 < epsilon,
    })
}

fn residual(m: &SymMatrix, f: &SymMatrix, s: &SymMatrix) -> f64 {
    let (m, f, s) = (m.as_matrix(), f.as_matrix(), s.as_matrix());
    m.iter()
        .zip(f.iter())
        .zip(s.iter())
        .map(|((a, b), c)| {
            let r = a - b - c;
            r * r
        })
        .sum::<f64>()
        .sqrt()
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub theta: SymMatrix,
    pub f: SymMatrix,
    pub s: SymMatrix,
    pub z: SymMatrix,
    pub iterations: usize,
    pub delta1_history: Vec<f64>,
    pub delta2_history: Vec<f64>,
    pub termination: Termination,
}

impl SolveResult {
    pub fn final_delta1(&self) -> f64 {
        self.delta1_history.last().copied().unwrap_or(f64::NAN)
    }

    pub fn final_delta2(&self) -> f64 {
        self.delta2_history.last().copied().unwrap_or(f64::NAN)
    }
}

/// Stepwise driver, for callers that want to inspect iterates.
#[derive(Debug, Clone)]
pub struct Solver<'a> {
    m: &'a SymMatrix,
    config: SolverConfig,
    state: IterationState,
}

impl<'a> Solver<'a> {
    pub fn new(m: &'a SymMatrix, config: SolverConfig) -> Result<Self> {
        config.validate()?;
        if !m.is_finite() {
            return Err(Error::InvalidInput("M has non-finite entries".into()));
        }
        if m.frobenius() == 0.0 {
            return Err(Error::InvalidInput("M has zero Frobenius norm".into()));
        }
        let state = IterationState::initial(m, &config);
        Ok(Self { m, config, state })
    }

    pub fn state(&self) -> &IterationState {
        &self.state
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    /// One full cycle: Θ, Z, U1, F, S, U2, plus penalty growth.
    pub fn step(&mut self) -> Result<Convergence> {
        let k = self.state.k;
        let wrap = |e: Error| Error::Solver {
            iteration: k + 1,
            source: Box::new(e),
        };
        let cfg = &self.config;
        let st = &mut self.state;
        if cfg.schedule == PenaltySchedule::GrowBeforeUpdate {
            st.mu1 = cfg.grow(st.mu1);
            st.mu2 = cfg.grow(st.mu2);
        }
        let theta_next = update_theta(st).map_err(wrap)?;
        let theta_prev = std::mem::replace(&mut st.theta, theta_next);
        st.z = update_z(st, cfg.rho);
        st.u1 = st.u1.axpby(1.0, &(&st.theta - &st.z), 1.0);
        st.f = update_f(st, self.m, cfg.dual_form).map_err(wrap)?;
        st.s = update_s(st, self.m, cfg.lambda);
        let r = (self.m - &st.f).axpby(1.0, &st.s, -1.0);
        st.u2 = st.u2.axpby(1.0, &r, 1.0);
        if cfg.schedule == PenaltySchedule::GrowAfterUpdate {
            st.mu1 = cfg.grow(st.mu1);
            st.mu2 = cfg.grow(st.mu2);
        }
        st.k += 1;
        if !(st.theta.is_finite() && st.s.is_finite() && st.u1.is_finite() && st.u2.is_finite()) {
            return Err(wrap(Error::InvalidInput("iterate became non-finite".into())));
        }
        check_convergence(&theta_prev, &st.theta, self.m, &st.f, &st.s, cfg.epsilon).map_err(wrap)
    }

    pub fn run(mut self) -> Result<SolveResult> {
        let mut delta1_history = Vec::new();
        let mut delta2_history = Vec::new();
        let mut termination = Termination::MaxIterations;
        while self.state.k < self.config.max_iter {
            let c = self.step()?;
            delta1_history.push(c.delta1);
            delta2_history.push(c.delta2);
            if c.converged {
                termination = Termination::Converged;
                break;
            }
        }
        let st = self.state;
        Ok(SolveResult {
            theta: st.theta,
            f: st.f,
            s: st.s,
            z: st.z,
            iterations: st.k,
            delta1_history,
            delta2_history,
            termination,
        })
    }
}

/// Splits `M` into `F + S` with sparse `F^{-1}` and sparse `S`.
pub fn rglasso_solve(m: &SymMatrix, config: &SolverConfig) -> Result<SolveResult> {
    Solver::new(m, config.clone())?.run()
}

/// Sparse inverse covariance estimate for `M`, ignoring `config.lambda`.
///
/// Stops when both the relative change of `Θ` and `‖Θ - Z‖/‖Θ‖` fall below
/// `config.epsilon`.
pub fn glasso_solve(m: &SymMatrix, rho: f64, config: &SolverConfig) -> Result<SymMatrix> {
    let config = SolverConfig {
        rho,
        ..config.clone()
    };
    config.validate()?;
    if !m.is_finite() {
        return Err(Error::InvalidInput("M has non-finite entries".into()));
    }
    let p = m.dim();
    let mut theta = SymMatrix::identity(p);
    let mut z = SymMatrix::zeros(p);
    let mut u = SymMatrix::zeros(p);
    let mut mu = config.mu1_init;
    for k in 0..config.max_iter {
        if config.schedule == PenaltySchedule::GrowBeforeUpdate {
            mu = config.grow(mu);
        }
        let w = z.axpby(mu, &u, -mu);
        let next = log_det_prox(&(&w - m), mu).map_err(|e| Error::Solver {
            iteration: k + 1,
            source: Box::new(e),
        })?;
        z = soft_threshold_matrix(&(&next + &u), rho / mu);
        let gap = &next - &z;
        u = u.axpby(1.0, &gap, 1.0);
        if config.schedule == PenaltySchedule::GrowAfterUpdate {
            mu = config.grow(mu);
        }
        let norm = next.frobenius();
        let delta1 = next.distance(&theta) / theta.frobenius();
        theta = next;
        if delta1 < config.epsilon && gap.frobenius() / norm < config.epsilon {
            break;
        }
    }
    Ok(theta)
}
