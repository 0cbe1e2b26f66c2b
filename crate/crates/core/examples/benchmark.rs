//! Desk-scale benchmark rows, as printed by `annealz benchmark`.
//!
//! Usage: cargo run --release --example benchmark [gm2d|mueller] [methods]
//! e.g. `benchmark gm2d exact,sndmc`. The full suites take several minutes.

use annealz::harness::benchmark::rows_to_csv;
use annealz::harness::{run_benchmark, Scale, Suite};

fn main() -> annealz::Result<()> {
    let mut args = std::env::args().skip(1);
    let suite: Suite = args.next().unwrap_or_else(|| "gm2d".into()).parse()?;
    let methods: Vec<String> = args.next().unwrap_or_else(|| "exact".into()).split(',').map(String::from).collect();
    let rows = run_benchmark(suite, Scale::Desk, Some(&methods), 0)?;
    print!("{}", rows_to_csv(&rows));
    Ok(())
}
