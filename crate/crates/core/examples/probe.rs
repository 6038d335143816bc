//! Scratch probe for freezing acceptance thresholds. Not part of the API.

use std::time::Instant;

use matfun_core::costmodel::CostTable;
use matfun_core::iterations::MatrixFunction;
use matfun_core::spectra::{sample_spectrum, DistributionKind, DistributionSpec};
use matfun_core::verify::{
    algorithm_from_steps, generalization_gap_for_seed, median, replay_spectral,
    wishart_sqrt_reference_schedule,
};

fn main() {
    let table = CostTable::static_default(MatrixFunction::Sqrt);
    let dist = DistributionSpec::new(DistributionKind::Wishart, 5000, 0);
    let alg = algorithm_from_steps(
        MatrixFunction::Sqrt,
        wishart_sqrt_reference_schedule(),
        1e-3,
        &dist,
    );

    // replay threshold probe: 10 seeds at d = 5000
    let t0 = Instant::now();
    let handles: Vec<_> = (0..10u64)
        .map(|seed| {
            let alg = alg.clone();
            let table = table.clone();
            let mut d = dist.clone();
            d.seed = seed;
            std::thread::spawn(move || {
                let lam = sample_spectrum(&d).unwrap();
                let curve = replay_spectral(&alg, &lam, &table);
                let tail: Vec<f64> = curve.points[7..=10].iter().map(|p| p.term_loss).collect();
                (seed, curve.final_term_loss(), tail)
            })
        })
        .collect();
    let mut finals = Vec::new();
    for h in handles {
        let (seed, fl, tail) = h.join().unwrap();
        let monotone = tail.windows(2).all(|w| w[1] < w[0]);
        println!("seed {seed}: final {fl:.3e}, nsv tail {tail:?} monotone={monotone}");
        finals.push(fl);
    }
    println!(
        "replay probe: max final {:.3e}, elapsed {:?}",
        finals.iter().cloned().fold(0.0f64, f64::max),
        t0.elapsed()
    );

    // generalization probe: dims {250, 1000, 4000}, 20 seeds
    let wishart = DistributionSpec::new(DistributionKind::Wishart, 0, 0);
    let unif = DistributionSpec::new(DistributionKind::WishartUnif, 0, 0);
    for dim in [250usize, 1000, 4000] {
        let t1 = Instant::now();
        let handles: Vec<_> = (0..20u64)
            .map(|seed| {
                let alg = alg.clone();
                let table = table.clone();
                let mut a = wishart.clone();
                a.dim = dim;
                let mut b = unif.clone();
                b.dim = dim;
                std::thread::spawn(move || {
                    generalization_gap_for_seed(&alg, &a, &b, seed, &table).unwrap()
                })
            })
            .collect();
        let mut gaps: Vec<f64> = handles.into_iter().map(|h| h.join().unwrap()).collect();
        let med = median(&mut gaps);
        println!("dim {dim}: median max gap {med:.4e}, elapsed {:?}", t1.elapsed());
    }
}
