//! Jarzynski's equality on a dragged harmonic trap, where the work is exactly
//! Gaussian: W ~ N(B_T, 2B_T) and the free energy does not change.

use annealz::estimators::{estimate_je, mazonka_bias, AisConfig, JeConfig, Protocol, TiConfig};
use annealz::metrics::work_stats;
use annealz::rng::RunSeed;
use annealz::targets::{make_gaussian, OracleCounter};

fn main() -> annealz::Result<()> {
    let (l, k) = (1.0, 1.0);
    let target = make_gaussian(1, &[], 1.0)?;
    let counter = OracleCounter::new();
    for t_total in [0.5, 1.0, 4.0, 16.0] {
        let cfg = JeConfig { total_time: t_total, n_steps: (1000.0 * t_total) as usize, keep_increments: false };
        let rep = estimate_je(
            &target,
            Protocol::Mazonka { l, k },
            &cfg,
            &TiConfig::default(),
            &AisConfig::default(),
            None,
            20_000,
            RunSeed::new(2, 0),
            &counter,
        )?;
        let ws = work_stats(&rep.work_samples)?;
        let b = mazonka_bias(l, k, t_total);
        println!(
            "T = {t_total:>4}: mean W = {:.4} (B_T = {b:.4}), var W = {:.4} (2B_T = {:.4}), -log <e^-W> = {:.4}",
            ws.mean,
            ws.var.unwrap_or(f64::NAN),
            2.0 * b,
            -(rep.z_hat() / (2.0 * std::f64::consts::PI).sqrt()).ln(),
        );
    }
    Ok(())
}
