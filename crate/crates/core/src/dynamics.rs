//! Closed-system annealing dynamics.
//!
//! The schedule `τ = t/T` is integrated with classical fourth-order
//! Runge–Kutta at fixed step `h = T/steps`, evaluating `H` at the step start,
//! midpoint and end. No renormalization is applied; the largest deviation of
//! `‖ψ‖` from one is reported as the error diagnostic.
//!
//! Each stage evaluates `(H(τ) − ⟨H⟩)·y`, with `⟨H⟩` the Rayleigh quotient of
//! the stage vector. Subtracting a real scalar only rotates the global phase
//! of the exact solution, so overlaps and probabilities are unchanged, while
//! the populated components see small `h·(E − ⟨H⟩)` arguments, which is
//! where RK4 loses norm.

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{AnnealError, Result};
use crate::instance::{ground_from_table, ClassicalSolution, ProblemInstance, DEFAULT_DEGENERACY_TOL};
use crate::operators::{AnnealSpec, AnnealingHamiltonian, StateVector};

/// Largest tolerated `|‖ψ‖ − 1|` over a run.
pub const NORM_DRIFT_TOL: f64 = 1e-6;

/// Default integrator resolution: 200 steps per unit of annealing time
/// (20 000 steps at `T = 100`).
pub const DEFAULT_STEPS_PER_UNIT_TIME: f64 = 200.0;

/// Largest change of the success probability tolerated between a step count
/// and its double when certifying a resolution.
pub const CERTIFY_PROBABILITY_TOL: f64 = 1e-6;

pub fn default_steps(total_time: f64) -> usize {
    (DEFAULT_STEPS_PER_UNIT_TIME * total_time).ceil().max(1.0) as usize
}

/// `⊗_i (|0⟩ − |1⟩)/√2`, the ground state of `Σ σˣ_i` with energy `−n`.
pub fn initial_state(n: usize) -> StateVector {
    let dim = 1usize << n;
    let mag = (dim as f64).sqrt().recip();
    let amps = (0..dim)
        .map(|k| {
            let sign = if k.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            Complex64::new(sign * mag, 0.0)
        })
        .collect();
    StateVector::new(n, amps).expect("dimension is 2^n by construction")
}

/// Total weight of the state on the classical ground configurations.
pub fn success_probability(state: &StateVector, ground: &ClassicalSolution) -> Result<f64> {
    if ground.states.is_empty() {
        return Err(AnnealError::InvalidArgument("ground-state set is empty".into()));
    }
    let amps = state.amplitudes();
    ground
        .states
        .iter()
        .map(|&g| {
            amps.get(g).map(|a| a.norm_sqr()).ok_or_else(|| {
                AnnealError::InvalidArgument(format!(
                    "ground configuration {g} outside state of dimension {}",
                    amps.len()
                ))
            })
        })
        .sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub tau: f64,
    pub norm: f64,
    /// `⟨ψ|H(τ)|ψ⟩`.
    pub energy: f64,
}

pub fn write_trace_csv<W: Write>(points: &[TracePoint], mut out: W) -> std::io::Result<()> {
    writeln!(out, "tau,norm,energy")?;
    for p in points {
        writeln!(out, "{},{},{}", p.tau, p.norm, p.energy)?;
    }
    Ok(())
}

/// Final state of an integration and its norm diagnostic.
#[derive(Clone, Debug)]
pub struct Evolution {
    pub state: StateVector,
    pub norm_drift: f64,
    pub steps: usize,
}

#[derive(Clone, Debug)]
pub struct PropagationResult {
    pub final_state: StateVector,
    pub norm_drift: f64,
    pub steps: usize,
    pub success_probability: f64,
}

/// Integrates from [`initial_state`] over the full schedule. When
/// `trace_every` is set, every `trace_every`-th step (plus both endpoints) is
/// sampled into the returned trace.
pub fn evolve(
    ham: &AnnealingHamiltonian,
    steps: usize,
    trace_every: Option<usize>,
) -> Result<(Evolution, Vec<TracePoint>)> {
    if steps == 0 {
        return Err(AnnealError::InvalidArgument("step count must be at least 1".into()));
    }
    if trace_every == Some(0) {
        return Err(AnnealError::InvalidArgument("trace interval must be at least 1".into()));
    }
    let n = ham.n();
    let dim = ham.dim();
    let total_time = ham.spec().total_time;
    let h = total_time / steps as f64;
    let zero = Complex64::new(0.0, 0.0);

    let mut psi = initial_state(n).into_amplitudes();
    let mut stage = vec![zero; dim];
    let mut k = vec![zero; dim];
    let mut acc = vec![zero; dim];
    let mut scratch = vec![zero; dim];
    let mut drift: f64 = 0.0;
    let mut trace = Vec::new();

    let sample = |tau: f64, psi: &[Complex64], trace: &mut Vec<TracePoint>| -> Result<()> {
        let coeffs = ham.coeffs(tau)?;
        let mut hpsi = vec![zero; dim];
        let mut buf = vec![zero; dim];
        ham.apply_shifted(coeffs, 0.0, psi, &mut hpsi, &mut buf)?;
        let energy: f64 = psi.iter().zip(&hpsi).map(|(a, b)| (a.conj() * b).re).sum();
        trace.push(TracePoint {
            tau,
            norm: crate::operators::norm(psi),
            energy,
        });
        Ok(())
    };
    if trace_every.is_some() {
        sample(0.0, &psi, &mut trace)?;
    }

    // dy/dt = −i (H(τ) − ⟨H⟩_y) y, written into `k`.
    let deriv = |tau: f64, y: &[Complex64], k: &mut [Complex64], scratch: &mut [Complex64]| -> Result<()> {
        let coeffs = ham.coeffs(tau)?;
        ham.apply_shifted(coeffs, 0.0, y, k, scratch)?;
        let (num, den) = y.iter().zip(k.iter()).fold((0.0, 0.0), |(num, den), (a, b)| {
            (num + a.re * b.re + a.im * b.im, den + a.norm_sqr())
        });
        let shift = num / den;
        for (z, &a) in k.iter_mut().zip(y) {
            let w = *z - a * shift;
            *z = Complex64::new(w.im, -w.re);
        }
        Ok(())
    };

    for step in 0..steps {
        let tau0 = step as f64 / steps as f64;
        let tau_mid = (step as f64 + 0.5) / steps as f64;
        let tau1 = (step + 1) as f64 / steps as f64;

        deriv(tau0, &psi, &mut k, &mut scratch)?;
        for ((a, s), (&p, &d)) in acc.iter_mut().zip(stage.iter_mut()).zip(psi.iter().zip(&k)) {
            *a = d;
            *s = p + d * (0.5 * h);
        }
        deriv(tau_mid, &stage, &mut k, &mut scratch)?;
        for ((a, s), (&p, &d)) in acc.iter_mut().zip(stage.iter_mut()).zip(psi.iter().zip(&k)) {
            *a += d * 2.0;
            *s = p + d * (0.5 * h);
        }
        deriv(tau_mid, &stage, &mut k, &mut scratch)?;
        for ((a, s), (&p, &d)) in acc.iter_mut().zip(stage.iter_mut()).zip(psi.iter().zip(&k)) {
            *a += d * 2.0;
            *s = p + d * h;
        }
        deriv(tau1, &stage, &mut k, &mut scratch)?;
        let mut norm_sqr = 0.0;
        for ((p, &a), &d) in psi.iter_mut().zip(&acc).zip(&k) {
            *p += (a + d) * (h / 6.0);
            norm_sqr += p.norm_sqr();
        }
        drift = drift.max((norm_sqr.sqrt() - 1.0).abs());

        if let Some(every) = trace_every {
            if (step + 1) % every == 0 || step + 1 == steps {
                sample(tau1, &psi, &mut trace)?;
            }
        }
    }

    Ok((
        Evolution {
            state: StateVector::new(n, psi)?,
            norm_drift: drift,
            steps,
        },
        trace,
    ))
}

/// Integrates with a prepared Hamiltonian and scores against `ground`.
/// Fails when the norm drift exceeds [`NORM_DRIFT_TOL`].
pub fn propagate_with(
    ham: &AnnealingHamiltonian,
    ground: &ClassicalSolution,
    steps: usize,
) -> Result<PropagationResult> {
    let (evolution, _) = evolve(ham, steps, None)?;
    if !(evolution.norm_drift <= NORM_DRIFT_TOL) {
        return Err(AnnealError::Convergence {
            drift: evolution.norm_drift,
            steps,
        });
    }
    let success_probability = success_probability(&evolution.state, ground)?;
    Ok(PropagationResult {
        final_state: evolution.state,
        norm_drift: evolution.norm_drift,
        steps,
        success_probability,
    })
}

pub fn propagate(inst: &ProblemInstance, spec: &AnnealSpec, steps: usize) -> Result<PropagationResult> {
    let ham = AnnealingHamiltonian::new(inst, spec)?;
    let ground = ground_from_table(ham.problem_diagonal(), DEFAULT_DEGENERACY_TOL);
    propagate_with(&ham, &ground, steps)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub steps: usize,
    pub success_probability: f64,
    pub norm_drift: f64,
    /// Drift above [`NORM_DRIFT_TOL`].
    pub flagged: bool,
}

/// Success probability and drift for each step count in ascending order.
pub fn convergence_study(
    inst: &ProblemInstance,
    spec: &AnnealSpec,
    step_counts: &[usize],
) -> Result<Vec<ConvergenceRow>> {
    if step_counts.windows(2).any(|w| w[0] >= w[1]) {
        return Err(AnnealError::InvalidArgument("step counts must be strictly ascending".into()));
    }
    let ham = AnnealingHamiltonian::new(inst, spec)?;
    let ground = ground_from_table(ham.problem_diagonal(), DEFAULT_DEGENERACY_TOL);
    step_counts.iter().map(|&steps| study_row(&ham, &ground, steps)).collect()
}

fn study_row(ham: &AnnealingHamiltonian, ground: &ClassicalSolution, steps: usize) -> Result<ConvergenceRow> {
    let (evolution, _) = evolve(ham, steps, None)?;
    Ok(ConvergenceRow {
        steps,
        success_probability: success_probability(&evolution.state, ground)?,
        norm_drift: evolution.norm_drift,
        flagged: !(evolution.norm_drift <= NORM_DRIFT_TOL),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certification {
    /// Smallest tried step count whose drift is within tolerance and whose
    /// success probability moves by less than [`CERTIFY_PROBABILITY_TOL`]
    /// when the step count doubles.
    pub steps: usize,
    pub rows: Vec<ConvergenceRow>,
}

/// Doubles the step count from `start` until a resolution certifies, giving
/// up past `max_steps`.
pub fn certify_steps(
    inst: &ProblemInstance,
    spec: &AnnealSpec,
    start: usize,
    max_steps: usize,
) -> Result<Certification> {
    if start == 0 {
        return Err(AnnealError::InvalidArgument("start step count must be at least 1".into()));
    }
    let ham = AnnealingHamiltonian::new(inst, spec)?;
    let ground = ground_from_table(ham.problem_diagonal(), DEFAULT_DEGENERACY_TOL);
    let mut rows = vec![study_row(&ham, &ground, start)?];
    loop {
        let prev = *rows.last().expect("rows is never empty");
        let next_steps = prev.steps * 2;
        if next_steps > max_steps {
            return Err(AnnealError::Convergence {
                drift: prev.norm_drift,
                steps: prev.steps,
            });
        }
        let next = study_row(&ham, &ground, next_steps)?;
        rows.push(next);
        if !prev.flagged
            && (next.success_probability - prev.success_probability).abs() < CERTIFY_PROBABILITY_TOL
        {
            return Ok(Certification {
                steps: prev.steps,
                rows,
            });
        }
    }
}
