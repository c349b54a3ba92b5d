use hexsub::experiments::{run_table13_experiment, run_single, Problem, PrecondKind};
use hexsub::mesh::JumpRegion;

fn main() {
    for prob in [Problem::Elasticity, Problem::Maxwell] {
        let rows = run_table13_experiment(prob, &[8, 16]).unwrap();
        for r in &rows {
            println!("table13 {} h=1/{} err={:.4}", r.problem, r.h_denom, r.err);
        }
    }
    for (prob, n, m) in [(Problem::Elasticity, 4usize, 8usize), (Problem::Maxwell, 4, 8)] {
        let row = run_single(prob, PrecondKind::B2, n, m, JumpRegion::None, 1.0, 1e-6, 500).unwrap();
        println!("{} b2 n={} m={} iters={}", row.problem, n, m, row.iterations);
    }
}
