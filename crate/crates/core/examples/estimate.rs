//! Runs one estimator from a TOML file, as `annealz estimate` does, and prints
//! the per-round estimates.
//!
//! Usage: cargo run --release --example estimate [config.toml]

use annealz::harness::{run_estimate, RunConfig};

fn main() -> annealz::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/examples/configs/rds_sndmc_gmm.toml").into());
    let cfg = RunConfig::from_file(&path)?;
    let out = run_estimate(&cfg)?;
    let s = &out.summary;
    println!("{} on {}: {} rounds × {} particles", s.method, s.target, s.n_rounds, s.n_particles);
    for (i, z) in s.round_estimates.iter().enumerate() {
        println!("  round {i:>2}: Z = {z:.6}");
    }
    println!("median of rounds: {:.6}", s.median_estimate);
    if let Some(r) = &s.relative_error {
        println!("Z/Z mean {:.4} std {:.4}, coverage {:?}", r.mean_ratio, r.std_ratio, r.coverage);
    }
    if let (Some(m), Some(w)) = (&s.mmd, &s.w2) {
        println!("MMD per round {m:.4?}\nW2 per round {w:.4?}");
    }
    println!("{:.0} gradient and {:.0} value calls per sample", s.oracle_calls_per_sample, s.value_calls_per_sample);
    Ok(())
}
