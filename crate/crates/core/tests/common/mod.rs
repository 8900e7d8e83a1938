#![allow(dead_code)]

use anneal_core::{AnnealSpec, Driver, ProblemInstance};
use num_complex::Complex64;

pub fn spin(config: usize, i: usize) -> f64 {
    if config >> i & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

pub fn energy(inst: &ProblemInstance, config: usize) -> f64 {
    let n = inst.n();
    let mut e = 0.0;
    for i in 0..n {
        e += inst.fields()[i] * spin(config, i);
        for j in i + 1..n {
            e += inst.coupling(i, j) * spin(config, i) * spin(config, j);
        }
    }
    e
}

/// `H(τ)` as a row-major dense matrix, assembled from the Pauli terms.
pub fn dense_hamiltonian(tau: f64, inst: &ProblemInstance, spec: &AnnealSpec) -> Vec<Vec<f64>> {
    let n = inst.n();
    let dim = 1 << n;
    let a = 1.0 - tau;
    let b = match spec.driver {
        Driver::None => 0.0,
        _ => spec.lambda * tau * (1.0 - tau),
    };
    let mut h = vec![vec![0.0; dim]; dim];
    let mut pair = 0;
    let mut signs = Vec::new();
    for i in 0..n {
        for _ in i + 1..n {
            signs.push(match &spec.driver {
                Driver::None => 0.0,
                Driver::Ferro => -1.0,
                Driver::Antiferro => 1.0,
                Driver::Mixed(m) => m.signs()[pair] as f64,
            });
            pair += 1;
        }
    }
    for k in 0..dim {
        h[k][k] += tau * energy(inst, k);
        for i in 0..n {
            h[k ^ (1 << i)][k] += a;
        }
        let mut p = 0;
        for i in 0..n {
            for j in i + 1..n {
                h[k ^ (1 << i) ^ (1 << j)][k] += b * signs[p];
                p += 1;
            }
        }
    }
    h
}

pub fn matvec(h: &[Vec<f64>], x: &[Complex64]) -> Vec<Complex64> {
    h.iter()
        .map(|row| row.iter().zip(x).map(|(&a, &b)| b * a).sum())
        .collect()
}

/// One step `ψ ← exp(−i H Δt) ψ` by a Taylor series summed to machine
/// precision.
pub fn exp_step(h: &[Vec<f64>], psi: &[Complex64], dt: f64) -> Vec<Complex64> {
    let mut term = psi.to_vec();
    let mut out = psi.to_vec();
    for k in 1..60 {
        let ht = matvec(h, &term);
        let factor = Complex64::new(0.0, -dt / k as f64);
        term = ht.into_iter().map(|z| z * factor).collect();
        let size: f64 = term.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        out.iter_mut().zip(&term).for_each(|(o, t)| *o += t);
        if size < 1e-18 {
            break;
        }
    }
    out
}

/// Dense exponential stepping with the Hamiltonian frozen at each step
/// midpoint.
pub fn exponential_oracle(inst: &ProblemInstance, spec: &AnnealSpec, steps: usize) -> Vec<Complex64> {
    let n = inst.n();
    let dim = 1 << n;
    let amp = (dim as f64).sqrt().recip();
    let mut psi: Vec<Complex64> = (0..dim)
        .map(|k| Complex64::new(if (k as u32).count_ones().is_multiple_of(2) { amp } else { -amp }, 0.0))
        .collect();
    let dt = spec.total_time / steps as f64;
    for s in 0..steps {
        let tau = (s as f64 + 0.5) / steps as f64;
        let h = dense_hamiltonian(tau, inst, spec);
        psi = exp_step(&h, &psi, dt);
    }
    psi
}

pub fn fidelity(a: &[Complex64], b: &[Complex64]) -> f64 {
    let overlap: Complex64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    let na: f64 = a.iter().map(|z| z.norm_sqr()).sum();
    let nb: f64 = b.iter().map(|z| z.norm_sqr()).sum();
    overlap.norm_sqr() / (na * nb)
}

/// Eigenvalues of a small real symmetric matrix by cyclic Jacobi rotations.
pub fn jacobi_eigenvalues(m: &[Vec<f64>]) -> Vec<f64> {
    let n = m.len();
    let mut a = m.to_vec();
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut values: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    values.sort_by(f64::total_cmp);
    values
}
