//! Times one propagation and one spectrum trace per driver.
//!
//! Usage: `cargo run --release --example timing -- <n> <steps> <seed>`;
//! a step count of 0 skips the propagation.

use std::time::Instant;

use anneal_core::dynamics::evolve;
use anneal_core::spectrum::{gap_stats, trace_spectrum_with, TraceOptions};
use anneal_core::*;

fn main() {
    let args: Vec<u64> = std::env::args().skip(1).map(|a| a.parse().expect("integer argument")).collect();
    let [n, steps, seed] = args[..] else {
        eprintln!("usage: timing <n> <steps> <seed>");
        std::process::exit(1);
    };
    let (n, steps) = (n as usize, steps as usize);
    let inst = generate_instance(n, seed).unwrap();
    for kind in DriverKind::ALL {
        let spec = AnnealSpec::with_driver(Driver::from_kind(kind, n, 77));
        let ham = AnnealingHamiltonian::new(&inst, &spec).unwrap();
        let ground = instance::ground_from_table(ham.problem_diagonal(), 1e-12);
        if steps > 0 {
            let t = Instant::now();
            let (ev, _) = evolve(&ham, steps, None).unwrap();
            let p = success_probability(&ev.state, &ground).unwrap();
            println!(
                "n={n} {kind} steps={steps} drift={:.3e} P={p:.9} time={:.2}s",
                ev.norm_drift,
                t.elapsed().as_secs_f64()
            );
        }
        let t = Instant::now();
        let trace = trace_spectrum_with(&ham, &TraceOptions::default()).unwrap();
        let stats = gap_stats(&trace, 0.0).unwrap();
        println!(
            "n={n} {kind} points={} gap={:.6e} tau*={:.5} anticrossings={} time={:.2}s",
            trace.taus.len(),
            stats.min_gap,
            stats.tau_star,
            stats.anticrossings,
            t.elapsed().as_secs_f64()
        );
    }
}
