// Functional principal components of simulated Brownian motion, compared with
// the Karhunen-Loeve eigenvalues 1/((j - 1/2)^2 pi^2).

use rpflm::rng::stream;
use rpflm::simlab::{gen_process, ProcessKind};
use rpflm::{center, compute_fpc, Grid};

fn main() {
    let grid = Grid::equidistant(201).unwrap();
    let mut rng = stream(1, &[]);
    let x = gen_process(ProcessKind::BrownianMotion, 500, &grid, &mut rng).unwrap();
    let (xc, _) = center(&x);
    let basis = compute_fpc(&xc, 5).unwrap();

    println!("  j   estimated   theoretical");
    for (j, lambda) in basis.eigenvalues().iter().enumerate() {
        let k = j as f64 + 0.5;
        let theory = 1.0 / (k * k * std::f64::consts::PI.powi(2));
        println!("{:>3}   {:.5}     {:.5}", j + 1, lambda, theory);
    }
    let e1 = basis.eigenfunction(0);
    println!("<e1, e1> = {:.6}", grid.dot(e1.values(), e1.values()).unwrap());
}
