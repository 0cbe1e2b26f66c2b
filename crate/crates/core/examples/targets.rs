//! Builds the registered targets and looks at what the estimators see:
//! potential values, gradients, smoothness, known constants and exact samples.

use annealz::rng::RunSeed;
use annealz::targets::{make_gaussian, make_mog1d, make_mueller_brown, make_paper_gmm, SampleMeta};

fn main() -> annealz::Result<()> {
    let targets = [make_gaussian(2, &[], 1.0)?, make_paper_gmm(), make_mog1d(4.0)?, make_mueller_brown()];
    for t in &targets {
        let x = vec![0.5; t.dim()];
        let mut g = vec![0.0; t.dim()];
        t.grad(&x, &mut g);
        println!(
            "{:<14} d={} beta={:<10.4} V(0.5)={:<10.4} |grad|={:<10.4} log Z={}",
            t.name,
            t.dim(),
            t.beta,
            t.value(&x),
            g.iter().map(|v| v * v).sum::<f64>().sqrt(),
            t.known_log_z.map_or("unknown".into(), |v| format!("{v:.6}")),
        );
    }

    // Mixtures come with an exact sampler, used as ground truth for MMD and W2.
    let gm = make_paper_gmm();
    let mut rng = RunSeed::new(0, 0).reference(0);
    let s = gm.sample_exact(&mut rng, 5, SampleMeta::default())?;
    for p in s.rows() {
        println!("exact GM sample ({:7.3}, {:7.3})", p[0], p[1]);
    }
    Ok(())
}
