//! Reverse-diffusion sampling with each score estimator on the planar mixture.
//!
//! Usage: cargo run --release --example rds_scores [particles]

use annealz::estimators::{estimate_rds, RdsConfig};
use annealz::metrics::{default_sigmas, mmd, w2_empirical};
use annealz::rng::{RunSeed, Rng};
use annealz::scores::{PosteriorLmc, RecursiveLmc, Rejection, ScoreConfig, ScoreEstimator, SelfNormalized};
use annealz::targets::{make_paper_gmm, Oracle, OracleCounter, SampleMeta};

fn main() -> annealz::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(128);
    let target = make_paper_gmm();
    let z = target.known_log_z.unwrap().exp();

    // One score evaluation, all estimators side by side.
    let configs = [
        ScoreConfig::Exact,
        ScoreConfig::Rdmc(PosteriorLmc::default()),
        ScoreConfig::Rsdmc(RecursiveLmc::default()),
        ScoreConfig::Zodmc(Rejection { n_samples: 64, ..Rejection::default() }),
        ScoreConfig::Sndmc(SelfNormalized { n_samples: 1024 }),
    ];
    let (t, x) = (0.5, [2.0, 3.0]);
    for c in &configs {
        let est = ScoreEstimator::new(&target, c.clone())?;
        let counter = OracleCounter::new();
        let mut rng: Rng = RunSeed::new(3, 0).auxiliary(0);
        let mut s = [0.0; 2];
        est.score(&Oracle::new(&target, &counter), t, &x, &mut s, &mut rng)?;
        let calls = counter.snapshot();
        println!("{:<6} s({t}, {x:?}) = ({:8.4}, {:8.4})  grad {} value {}", est.name(), s[0], s[1], calls.grad, calls.value);
    }

    let mut rng = RunSeed::new(3, 0).reference(0);
    let reference = target.sample_exact(&mut rng, n, SampleMeta::default())?;
    for c in [configs[0].clone(), configs[4].clone()] {
        let est = ScoreEstimator::new(&target, c)?;
        let counter = OracleCounter::new();
        let rep = estimate_rds(&target, &RdsConfig::default(), &est, n, RunSeed::new(4, 0), &counter)?;
        let samples = rep.samples.as_ref().expect("rds keeps samples");
        println!(
            "{:<12} Z/Z = {:.4}  MMD = {:.4}  W2 = {:.4}  V calls/sample = {:.0}",
            rep.method,
            rep.z_hat() / z,
            mmd(samples, &reference, &default_sigmas())?,
            w2_empirical(samples, &reference)?,
            rep.value_calls as f64 / n as f64,
        );
    }
    Ok(())
}
