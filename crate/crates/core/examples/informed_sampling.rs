//! Uniform sampling of the informed set for shrinking solution costs, with
//! the empirical acceptance rate against the ratio of measures.
//!
//! ```text
//! cargo run --release --example informed_sampling -- [dimension]
//! ```

use aitstar::{make_free, InformedSampler};

fn main() {
    let n: usize = std::env::args().nth(1).map_or(3, |s| s.parse().expect("dimension"));
    let problem = make_free(n).expect("scenario").to_problem().expect("problem");
    let c_min = problem.min_cost();
    let volume = problem.space().volume();
    let mut sampler = InformedSampler::new(&problem, 0);

    println!("R{n}, c_min {c_min:.4}");
    for factor in [4.0, 2.0, 1.5, 1.2, 1.05] {
        let cost = factor * c_min;
        let samples = sampler.sample(&problem, 20_000, cost).expect("non-degenerate");
        let inside = samples.iter().all(|x| problem.f_hat(x) <= cost + 1e-12);
        let mean_f = samples.iter().map(|x| problem.f_hat(x)).sum::<f64>() / samples.len() as f64;
        println!(
            "cost {cost:.4}: informed measure / space {:.4}, all samples inside {inside}, mean f-hat {mean_f:.4}",
            (problem.informed_measure(cost) / volume).min(1.0)
        );
    }
}
